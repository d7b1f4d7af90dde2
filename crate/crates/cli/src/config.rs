//! Run configuration. Precedence: command-line flags, then the `--config` file, then defaults.

use std::path::Path;

use crext::coords::DEFAULT_R_MAX;
use crext::fd::{DerivativeMode, FdSpec};
use crext::grid::{GridSpec, DEFAULT_POINTS_PER_AXIS, DEFAULT_SEED, MAX_LATTICE_AXES};
use crext::linalg::DEFAULT_RANK_TOL;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 50;

/// Every field optional; used for both the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub richardson: Option<usize>,
    pub grid: Option<String>,
    pub rmax: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub target_l: Option<usize>,
    pub json: Option<bool>,
}

impl Overrides {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    fn or(self, other: Overrides) -> Overrides {
        Overrides {
            tol: self.tol.or(other.tol),
            step: self.step.or(other.step),
            richardson: self.richardson.or(other.richardson),
            grid: self.grid.or(other.grid),
            rmax: self.rmax.or(other.rmax),
            seed: self.seed.or(other.seed),
            samples: self.samples.or(other.samples),
            target_l: self.target_l.or(other.target_l),
            json: self.json.or(other.json),
        }
    }
}

/// `lattice:N` or `random:N`; the box is always `[-r_max/2, r_max/2]^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    Auto,
    Lattice(usize),
    Random(usize),
}

impl GridChoice {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Input(format!("bad grid {text:?}: expected auto, lattice:N or random:N"));
        if text == "auto" {
            return Ok(Self::Auto);
        }
        let (kind, n) = text.split_once(':').ok_or_else(bad)?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind {
            "lattice" => Ok(Self::Lattice(n)),
            "random" => Ok(Self::Random(n)),
            _ => Err(bad()),
        }
    }

    fn label(&self) -> String {
        match self {
            Self::Auto => "auto".into(),
            Self::Lattice(n) => format!("lattice:{n}"),
            Self::Random(n) => format!("random:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub fd: FdSpec,
    pub grid: GridChoice,
    pub r_max: f64,
    pub seed: u64,
    pub samples: usize,
    pub target_l: Option<usize>,
    pub json: bool,
}

impl RunConfig {
    pub fn resolve(flags: Overrides, file: Option<Overrides>) -> Result<Self, CliError> {
        let o = flags.or(file.unwrap_or_default());
        let fd = FdSpec {
            step: o.step.unwrap_or(FdSpec::default().step),
            richardson_levels: o.richardson.unwrap_or(FdSpec::default().richardson_levels),
            mode: DerivativeMode::FiniteDifference,
        };
        fd.validate().map_err(|e| CliError::Input(e.to_string()))?;
        let cfg = Self {
            tol: o.tol.unwrap_or(DEFAULT_TOL),
            fd,
            grid: o.grid.as_deref().map(GridChoice::parse).transpose()?.unwrap_or(GridChoice::Auto),
            r_max: o.rmax.unwrap_or(DEFAULT_R_MAX),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            samples: o.samples.unwrap_or(DEFAULT_SAMPLES),
            target_l: o.target_l,
            json: o.json.unwrap_or(false),
        };
        if !(cfg.tol.is_finite() && cfg.tol >= 0.0) {
            return Err(CliError::Input(format!("tolerance must be a non-negative number, got {}", cfg.tol)));
        }
        if !(cfg.r_max.is_finite() && cfg.r_max > 0.0) {
            return Err(CliError::Input(format!("rmax must be positive, got {}", cfg.r_max)));
        }
        if cfg.samples == 0 {
            return Err(CliError::Input("samples must be at least 1".into()));
        }
        if cfg.target_l == Some(0) {
            return Err(CliError::Input("target-l must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// Grid sweeps stay in the inner half of the chart.
    pub fn half_width(&self) -> f64 {
        0.5 * self.r_max
    }

    pub fn grid_for(&self, dim: usize) -> GridSpec {
        let half_width = self.half_width();
        match self.grid {
            GridChoice::Auto if dim <= MAX_LATTICE_AXES => {
                GridSpec::Lattice { points_per_axis: DEFAULT_POINTS_PER_AXIS, half_width }
            }
            GridChoice::Auto => {
                GridSpec::Random { count: crext::grid::DEFAULT_RANDOM_POINTS, half_width, seed: self.seed }
            }
            GridChoice::Lattice(n) => GridSpec::Lattice { points_per_axis: n, half_width },
            GridChoice::Random(n) => GridSpec::Random { count: n, half_width, seed: self.seed },
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tol": self.tol,
            "step": self.fd.step,
            "richardson": self.fd.richardson_levels,
            "grid": self.grid.label(),
            "grid_half_width": self.half_width(),
            "rmax": self.r_max,
            "seed": self.seed,
            "samples": self.samples,
            "sample_fraction": 0.3,
            "target_l": self.target_l,
            "rank_tol": DEFAULT_RANK_TOL,
            "json": self.json,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = Overrides { tol: Some(1e-3), step: Some(1e-3), seed: Some(9), ..Default::default() };
        let flags = Overrides { tol: Some(1e-5), ..Default::default() };
        let cfg = RunConfig::resolve(flags, Some(file)).unwrap();
        assert_eq!(cfg.tol, 1e-5);
        assert_eq!(cfg.fd.step, 1e-3);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.r_max, DEFAULT_R_MAX);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let bad = |o: Overrides| RunConfig::resolve(o, None).is_err();
        assert!(bad(Overrides { step: Some(1.0), ..Default::default() }));
        assert!(bad(Overrides { richardson: Some(9), ..Default::default() }));
        assert!(bad(Overrides { rmax: Some(-1.0), ..Default::default() }));
        assert!(bad(Overrides { grid: Some("hex:3".into()), ..Default::default() }));
        assert!(!bad(Overrides::default()));
    }

    #[test]
    fn grid_choices() {
        assert_eq!(GridChoice::parse("random:20").unwrap(), GridChoice::Random(20));
        assert!(GridChoice::parse("lattice:0").is_err());
        let cfg = RunConfig::resolve(Overrides::default(), None).unwrap();
        assert!(matches!(cfg.grid_for(3), GridSpec::Lattice { points_per_axis: 5, .. }));
        assert!(matches!(cfg.grid_for(5), GridSpec::Random { count: 200, .. }));
        assert_eq!(cfg.grid_for(3).half_width(), 0.5);
    }
}
