use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cole_core::norms::{default_t_grid, log_grid, NormKind};
use cole_core::pdesolver::{Advection, Scheme};
use cole_core::solutions::{FamilyKind, Params, SolutionFamily};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// `lo:hi:k`, `k` log-spaced times from `lo` down (or up) to `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub k: usize,
}

impl FromStr for TGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, k] = parts[..] else {
            return Err(format!("t-grid '{s}' is not of the form lo:hi:k"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("t-grid value '{x}': {e}"));
        let k = k.trim().parse::<usize>().map_err(|e| format!("t-grid count '{k}': {e}"))?;
        Ok(TGrid { lo: num(lo)?, hi: num(hi)?, k })
    }
}

impl<'de> Deserialize<'de> for TGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_kind(s: &str) -> Result<NormKind, String> {
    s.parse::<NormKind>().map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse::<FamilyKind>().map_err(|e| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s.to_ascii_lowercase().as_str() {
        "cn" | "crank-nicolson" => Ok(Scheme::CrankNicolson),
        "rk2" => Ok(Scheme::Rk2),
        _ => Err(format!("unknown scheme '{s}' (cn, rk2)")),
    }
}

fn parse_advection(s: &str) -> Result<Advection, String> {
    match s.to_ascii_lowercase().as_str() {
        "upwind" => Ok(Advection::Upwind),
        "central" => Ok(Advection::Central),
        _ => Err(format!("unknown advection '{s}' (upwind, central)")),
    }
}

fn de_with<'de, D, T>(d: D, f: fn(&str) -> Result<T, String>) -> Result<Option<T>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<String>::deserialize(d)?.map(|s| f(&s)).transpose().map_err(serde::de::Error::custom)
}

/// Options shared by every subcommand. Each one may also be given in the
/// TOML file named by `--config`; command-line values win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// TOML file with any of these options as keys.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_parser = parse_family)]
    #[serde(default, deserialize_with = "de_family")]
    pub family: Option<FamilyKind>,

    #[arg(long, global = true)]
    pub n: Option<usize>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,

    /// Constant of the stationary family.
    #[arg(long = "C", global = true, allow_negative_numbers = true)]
    #[serde(rename = "C", alias = "c")]
    pub c: Option<f64>,

    /// Comma-separated exponents.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,

    #[arg(long = "t-grid", global = true)]
    pub t_grid: Option<TGrid>,

    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Functional for `norms` and `decay`: lp, grad-lp, hess-bound-lp, hess-lp, linf, lp-distance.
    #[arg(long, global = true, value_parser = parse_kind)]
    #[serde(default, deserialize_with = "de_kind")]
    pub kind: Option<NormKind>,

    /// Reference family for lp-distance (defaults to the stationary family with C = 0).
    #[arg(long, global = true, value_parser = parse_family)]
    #[serde(default, deserialize_with = "de_family")]
    pub reference: Option<FamilyKind>,

    /// Pass threshold for `residual` (scaled residual).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[arg(long, global = true)]
    pub nr: Option<usize>,

    #[arg(long = "r-max", global = true)]
    pub r_max: Option<f64>,

    /// Inner radius for families singular at the origin.
    #[arg(long = "r-min", global = true)]
    pub r_min: Option<f64>,

    #[arg(long, global = true)]
    pub t0: Option<f64>,

    #[arg(long, global = true)]
    pub t1: Option<f64>,

    #[arg(long, global = true)]
    pub cfl: Option<f64>,

    #[arg(long, global = true, value_parser = parse_scheme)]
    #[serde(default, deserialize_with = "de_scheme")]
    pub scheme: Option<Scheme>,

    #[arg(long, global = true, value_parser = parse_advection)]
    #[serde(default, deserialize_with = "de_advection")]
    pub advection: Option<Advection>,

    /// Grid levels for a convergence study in `solve` (1 = single run).
    #[arg(long, global = true)]
    pub levels: Option<usize>,
}

fn de_family<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<FamilyKind>, D::Error> {
    de_with(d, parse_family)
}
fn de_kind<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<NormKind>, D::Error> {
    de_with(d, parse_kind)
}
fn de_scheme<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Scheme>, D::Error> {
    de_with(d, parse_scheme)
}
fn de_advection<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Advection>, D::Error> {
    de_with(d, parse_advection)
}

macro_rules! merge {
    ($dst:ident, $src:ident, $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )* };
}

impl Options {
    /// Fills unset options from the config file, if one was given.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let file = load(&path)?;
        merge!(
            self, file, family, n, mu, a, c, p, t_grid, out, format, kind, reference, tol, nr, r_max, r_min, t0, t1,
            cfl, scheme, advection, levels
        );
        Ok(self)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn params(&self) -> Params<f64> {
        Params::new(self.n.unwrap_or(3), self.mu.unwrap_or(0.1))
            .with_a(self.a.unwrap_or(1.0))
            .with_c(self.c.unwrap_or(0.0))
    }

    pub fn family_kind(&self) -> FamilyKind {
        self.family.unwrap_or(FamilyKind::MainExample)
    }

    pub fn family(&self) -> Result<SolutionFamily<f64>, CliError> {
        Ok(SolutionFamily::from_kind(self.family_kind(), self.params())?)
    }

    pub fn reference(&self) -> Result<SolutionFamily<f64>, CliError> {
        let p = self.params().with_c(0.0);
        Ok(SolutionFamily::from_kind(self.reference.unwrap_or(FamilyKind::Stationary), p)?)
    }

    pub fn exponents(&self) -> Result<Vec<f64>, CliError> {
        let p = self.p.clone().unwrap_or_else(|| vec![1.0]);
        if p.is_empty() || p.iter().any(|p| p.is_nan() || *p < 1.0 || !p.is_finite()) {
            return Err(CliError::Config(format!("exponents must be finite and >= 1, got {p:?}")));
        }
        Ok(p)
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        match self.t_grid {
            None => Ok(default_t_grid()),
            Some(g) => Ok(log_grid(g.lo, g.hi, g.k)?),
        }
    }
}

fn load(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_grid_parses() {
        assert_eq!("1e-2:1e-8:13".parse::<TGrid>().unwrap(), TGrid { lo: 1e-2, hi: 1e-8, k: 13 });
        assert!("1e-2:1e-8".parse::<TGrid>().is_err());
        assert!("a:b:3".parse::<TGrid>().is_err());
    }

    #[test]
    fn file_values_fill_gaps_and_flags_win() {
        let file: Options =
            toml::from_str("n = 5\nmu = 0.2\nfamily = \"self-similar\"\np = [1.0, 2.0]\nC = -2.0").unwrap();
        let mut flags = Options { n: Some(3), ..Default::default() };
        merge!(flags, file, family, n, mu, p, c);
        assert_eq!(flags.n, Some(3));
        assert_eq!(flags.mu, Some(0.2));
        assert_eq!(flags.c, Some(-2.0));
        assert_eq!(flags.family, Some(FamilyKind::SelfSimilar));
        assert_eq!(flags.p, Some(vec![1.0, 2.0]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Options>("n = 3\nbogus = 1").is_err());
        assert!(toml::from_str::<Options>("family = \"nope\"").is_err());
    }
}
