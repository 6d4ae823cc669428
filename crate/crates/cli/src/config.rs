//! Layered run configuration.
//!
//! Every setting is a `key=value` pair. Defaults sit underneath a flat config
//! file, which sits underneath command-line flags; [`Settings::overlay`] merges
//! two layers and [`RunConfig::resolve`] turns the result into typed values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dimer::bifurcation::{Branch, StationarityForm};
use dimer::dynamics::ENERGY_DRIFT_TOLERANCE;
use dimer::fluctuation::Variant;
use dimer::{ModelParams, ReducedParams};

use crate::error::{CliError, CliResult};

/// Keys accepted in config files and produced from flags.
pub const KEYS: &[&str] = &[
    "xi",
    "delta",
    "n-atoms",
    "gamma",
    "gbeta",
    "tilt",
    "variant",
    "out",
    "grid",
    "tau-end",
    "dtau",
    "energy-drift",
    "x0",
    "phi0",
    "eq9-as-printed",
    "tilt-localize",
    "compare",
    "branch",
    "observable",
    "fit",
];

pub const DEFAULT_GRID: usize = 401;
pub const DEFAULT_TAU_END: f64 = 100.0;
pub const DEFAULT_DTAU: f64 = 0.02;
/// Reduced tilt used by `--tilt-localize` when no value is given.
pub const DEFAULT_LOCALIZING_TILT: f64 = 1e-3;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn new() -> Self {
        Settings::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown setting `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut s = Settings::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key=value, got `{raw}`", lineno + 1))
            })?;
            s.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Settings::parse(&text)
    }

    /// `self` with every key present in `higher` replaced by its value there.
    pub fn overlay(mut self, higher: &Settings) -> Settings {
        for (k, v) in &higher.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }
}

/// Parses `a,b,c`, the inclusive linear range `a:b:n`, or the geometric range `a:b:n:log`.
pub fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Config(format!("bad list `{text}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<CliResult<Vec<f64>>>()?,
        [a, b, n] | [a, b, n, "log"] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad("count must be an integer"))?;
            if n < 2 {
                return Err(bad("a range needs at least two points"));
            }
            let geometric = parts.len() == 4;
            if geometric && !(a > 0.0 && b > 0.0) {
                return Err(bad("geometric ranges need positive ends"));
            }
            (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if i == n - 1 {
                        b
                    } else if geometric {
                        a * (b / a).powf(t)
                    } else {
                        a + (b - a) * t
                    }
                })
                .collect()
        }
        _ => return Err(bad("expected a,b,... or a:b:n[:log]")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

fn parse_count_list(text: &str) -> CliResult<Vec<usize>> {
    parse_list(text)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if r >= 1.0 && r <= usize::MAX as f64 {
                Ok(r as usize)
            } else {
                Err(CliError::Config(format!("atom number {v} must be a positive integer")))
            }
        })
        .collect()
}

/// Where the model parameters came from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSet {
    /// γ, gβ, Δ and one or more N.
    Physical {
        n_atoms: Vec<usize>,
        gamma: f64,
        gbeta: f64,
        tilt: f64,
    },
    /// ξ and δ with γ = 1/2; N is optional unless a command needs it.
    Reduced {
        xi: Vec<f64>,
        delta: Vec<f64>,
        n_atoms: Vec<usize>,
    },
}

/// One parameter combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub reduced: ReducedParams,
    pub model: Option<ModelParams>,
}

impl Point {
    pub fn model(&self) -> CliResult<ModelParams> {
        self.model
            .ok_or_else(|| CliError::Config("this command needs --n-atoms".into()))
    }

    pub fn n_atoms(&self) -> Option<usize> {
        self.model.map(|m| m.n_total)
    }
}

impl ParamSet {
    /// All combinations, ordered by (N, ξ, δ) as given.
    pub fn points(&self) -> CliResult<Vec<Point>> {
        match self {
            ParamSet::Physical { n_atoms, gamma, gbeta, tilt } => n_atoms
                .iter()
                .map(|&n| {
                    let m = ModelParams::new(n, *gamma, *gbeta, *tilt)?;
                    Ok(Point { reduced: m.reduced_params()?, model: Some(m) })
                })
                .collect(),
            ParamSet::Reduced { xi, delta, n_atoms } => {
                let ns: Vec<Option<usize>> = if n_atoms.is_empty() {
                    vec![None]
                } else {
                    n_atoms.iter().copied().map(Some).collect()
                };
                let mut out = Vec::with_capacity(ns.len() * xi.len() * delta.len());
                for n in &ns {
                    for &x in xi {
                        for &d in delta {
                            let model = n.map(|n| ModelParams::from_reduced(n, x, d)).transpose()?;
                            out.push(Point { reduced: ReducedParams::new(x, d), model });
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// The only combination, or an error when lists were given.
    pub fn single(&self) -> CliResult<Point> {
        let pts = self.points()?;
        match pts.as_slice() {
            [p] => Ok(*p),
            _ => Err(CliError::Config(format!(
                "this command takes a single parameter set, got {}",
                pts.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// Semiclassical Δn of the chosen variant at the chosen branch.
    DeltaN,
    /// Exact ground-state Δn.
    QuantumDeltaN,
    /// Localised-doublet Δn on the attractive side.
    DoubletDeltaN,
    XiC,
    StableCount,
}

impl Observable {
    pub fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "delta-n" => Observable::DeltaN,
            "quantum-delta-n" => Observable::QuantumDeltaN,
            "doublet-delta-n" => Observable::DoubletDeltaN,
            "xi-c" => Observable::XiC,
            "stable-count" => Observable::StableCount,
            _ => return Err(CliError::Config(format!("unknown observable `{s}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::DeltaN => "delta_n",
            Observable::QuantumDeltaN => "quantum_delta_n",
            Observable::DoubletDeltaN => "doublet_delta_n",
            Observable::XiC => "xi_c",
            Observable::StableCount => "stable_count",
        }
    }
}

/// Control variable for a power-law fit over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitAxis {
    N,
    Xi,
    XiMinusOne,
    Delta,
}

impl FitAxis {
    pub fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "n" => FitAxis::N,
            "xi" => FitAxis::Xi,
            "xi-minus-one" => FitAxis::XiMinusOne,
            "delta" => FitAxis::Delta,
            _ => return Err(CliError::Config(format!("unknown fit axis `{s}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FitAxis::N => "n",
            FitAxis::Xi => "xi",
            FitAxis::XiMinusOne => "xi_minus_one",
            FitAxis::Delta => "delta",
        }
    }
}

pub fn parse_variant(s: &str) -> CliResult<Variant> {
    Ok(match s {
        "paper-s" => Variant::PaperS,
        "paper-spm" => Variant::PaperSpm,
        "javanainen" => Variant::JavanainenS,
        "generic" => Variant::Generic,
        _ => return Err(CliError::Config(format!("unknown variant `{s}`"))),
    })
}

pub fn parse_branch(s: &str) -> CliResult<Branch> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "p" => Branch::P,
        "s" => Branch::S,
        "s+" | "splus" => Branch::SPlus,
        "s-" | "sminus" => Branch::SMinus,
        _ => return Err(CliError::Config(format!("unknown branch `{s}`"))),
    })
}

/// Fully typed settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ParamSet,
    pub variant: Variant,
    pub compare: Option<Variant>,
    pub branch: Branch,
    pub form: StationarityForm,
    pub out: Option<PathBuf>,
    /// Contour grid points along x and along φ.
    pub grid: (usize, usize),
    pub tau_end: f64,
    pub dtau: f64,
    pub energy_drift: f64,
    pub start: Option<(f64, f64)>,
    pub tilt_localize: Option<f64>,
    pub observable: Observable,
    pub fit: Option<FitAxis>,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> CliResult<Self> {
        let float = |key: &str| -> CliResult<Option<f64>> {
            s.get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| CliError::Config(format!("{key}: `{v}` is not a finite number")))
                })
                .transpose()
        };
        let positive = |key: &str, default: f64| -> CliResult<f64> {
            let v = float(key)?.unwrap_or(default);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(CliError::Config(format!("{key} must be positive, got {v}")))
            }
        };
        let flag = |key: &str| -> CliResult<bool> {
            match s.get(key) {
                None | Some("false") => Ok(false),
                Some("true") | Some("") => Ok(true),
                Some(v) => Err(CliError::Config(format!("{key}: expected true or false, got `{v}`"))),
            }
        };

        let physical = ["gamma", "gbeta", "tilt"].iter().any(|k| s.get(k).is_some());
        let reduced = ["xi", "delta"].iter().any(|k| s.get(k).is_some());
        let n_atoms = s.get("n-atoms").map(parse_count_list).transpose()?.unwrap_or_default();
        let params = match (physical, reduced) {
            (true, true) => {
                return Err(CliError::Config(
                    "give either physical (--gamma, --gbeta, --tilt) or reduced (--xi, --delta) parameters, not both"
                        .into(),
                ))
            }
            (true, false) => {
                let gamma = float("gamma")?
                    .ok_or_else(|| CliError::Config("physical parameters need --gamma".into()))?;
                let gbeta = float("gbeta")?
                    .ok_or_else(|| CliError::Config("physical parameters need --gbeta".into()))?;
                if n_atoms.is_empty() {
                    return Err(CliError::Config("physical parameters need --n-atoms".into()));
                }
                ParamSet::Physical { n_atoms, gamma, gbeta, tilt: float("tilt")?.unwrap_or(0.0) }
            }
            (false, true) => ParamSet::Reduced {
                xi: s.get("xi").map(parse_list).transpose()?.unwrap_or_else(|| vec![0.0]),
                delta: s.get("delta").map(parse_list).transpose()?.unwrap_or_else(|| vec![0.0]),
                n_atoms,
            },
            (false, false) => {
                return Err(CliError::Config(
                    "no model parameters: give --xi/--delta or --gamma/--gbeta/--n-atoms".into(),
                ))
            }
        };

        let grid = match s.get("grid") {
            None => (DEFAULT_GRID, DEFAULT_GRID),
            Some(g) => {
                let dims: Vec<&str> = g.split(['x', 'X']).collect();
                let parse = |d: &str| {
                    d.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 3)
                        .ok_or_else(|| CliError::Config(format!("grid: `{g}` needs sizes of at least 3")))
                };
                match dims.as_slice() {
                    [n] => (parse(n)?, parse(n)?),
                    [nx, nphi] => (parse(nx)?, parse(nphi)?),
                    _ => return Err(CliError::Config(format!("grid: expected N or NXxNPHI, got `{g}`"))),
                }
            }
        };

        let start = match (float("x0")?, float("phi0")?) {
            (Some(x), phi) => Some((x, phi.unwrap_or(0.0))),
            (None, Some(_)) => return Err(CliError::Config("--phi0 needs --x0".into())),
            (None, None) => None,
        };

        let tilt_localize = match s.get("tilt-localize") {
            None | Some("false") => None,
            Some("true") | Some("") => Some(DEFAULT_LOCALIZING_TILT),
            Some(_) => Some(float("tilt-localize")?.unwrap_or(DEFAULT_LOCALIZING_TILT)),
        };

        Ok(RunConfig {
            params,
            variant: s.get("variant").map(parse_variant).transpose()?.unwrap_or(Variant::Generic),
            compare: s.get("compare").map(parse_variant).transpose()?,
            branch: s.get("branch").map(parse_branch).transpose()?.unwrap_or(Branch::S),
            form: if flag("eq9-as-printed")? {
                StationarityForm::Literal
            } else {
                StationarityForm::Flow
            },
            out: s.get("out").filter(|o| *o != "-").map(PathBuf::from),
            grid,
            tau_end: positive("tau-end", DEFAULT_TAU_END)?,
            dtau: positive("dtau", DEFAULT_DTAU)?,
            energy_drift: positive("energy-drift", ENERGY_DRIFT_TOLERANCE)?,
            start,
            tilt_localize,
            observable: s
                .get("observable")
                .map(Observable::parse)
                .transpose()?
                .unwrap_or(Observable::DeltaN),
            fit: s.get("fit").map(FitAxis::parse).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_forms() {
        assert_eq!(parse_list("0.1").unwrap(), vec![0.1]);
        assert_eq!(parse_list("0,0.1, 0.2").unwrap(), vec![0.0, 0.1, 0.2]);
        assert_eq!(parse_list("0:0.5:3").unwrap(), vec![0.0, 0.25, 0.5]);
        let g = parse_list("1e2:1e4:3:log").unwrap();
        assert!((g[1] - 1e3).abs() < 1e-9 && g[2] == 1e4);
        assert!(parse_list("0:1:1").is_err());
        assert!(parse_list("a,b").is_err());
        assert!(parse_list("-1:1:3:log").is_err());
    }

    #[test]
    fn config_file_syntax() {
        let s = Settings::parse("# comment\nxi = 1.8\n\ndelta=0.1 # trailing\n").unwrap();
        assert_eq!(s.get("xi"), Some("1.8"));
        assert_eq!(s.get("delta"), Some("0.1"));
        assert!(Settings::parse("xi 1.8").is_err());
        assert!(Settings::parse("colour = blue").is_err());
    }

    #[test]
    fn physical_and_reduced_are_exclusive() {
        let s = Settings::parse("xi = 1\ngamma = 1\ngbeta = 0.1\nn-atoms = 10").unwrap();
        assert!(matches!(RunConfig::resolve(&s), Err(CliError::Config(_))));
        let s = Settings::parse("gamma = 1\ngbeta = 0.1").unwrap();
        assert!(RunConfig::resolve(&s).is_err());
        let s = Settings::parse("gamma = 0.5\ngbeta = 0.01\nn-atoms = 100").unwrap();
        let c = RunConfig::resolve(&s).unwrap();
        let p = c.params.single().unwrap();
        assert!((p.reduced.xi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tolerances_must_be_positive() {
        for bad in ["energy-drift = 0", "dtau = -1", "tau-end = 0"] {
            let s = Settings::parse(&format!("xi = 1\n{bad}")).unwrap();
            assert!(RunConfig::resolve(&s).is_err(), "{bad}");
        }
    }

    #[test]
    fn reduced_lists_expand_in_order() {
        let s = Settings::parse("xi = 1,2\ndelta = 0,0.1\nn-atoms = 10").unwrap();
        let pts = RunConfig::resolve(&s).unwrap().params.points().unwrap();
        let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p.reduced.xi, p.reduced.delta)).collect();
        assert_eq!(pairs, vec![(1.0, 0.0), (1.0, 0.1), (2.0, 0.0), (2.0, 0.1)]);
        assert_eq!(pts[0].model.unwrap().tunneling, 0.5);
    }

    #[test]
    fn grid_and_start_parsing() {
        let s = Settings::parse("xi = 1\ngrid = 51x31\nx0 = 0.3").unwrap();
        let c = RunConfig::resolve(&s).unwrap();
        assert_eq!(c.grid, (51, 31));
        assert_eq!(c.start, Some((0.3, 0.0)));
        assert!(RunConfig::resolve(&Settings::parse("xi = 1\ngrid = 2").unwrap()).is_err());
    }
}
