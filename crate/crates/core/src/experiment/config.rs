use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dependence::ConditionParams;
use crate::error::{Error, Result};
use crate::estimator::{BandwidthSchedule, EvalGrid, RegressionFn};
use crate::field_gen::GeneratorSpec;
use crate::kernel::{KernelSpec, KernelVariant};

/// Smallest replication count accepted by the Monte Carlo studies.
pub const MIN_REPLICATIONS: usize = 30;
/// Smallest number of sample sizes accepted by the slope fits.
pub const MIN_SIZES_FOR_FIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    pub function: RegressionFn,
    /// Declared Lipschitz constant `B`.
    pub lipschitz: f64,
}

/// How the sup over `[0,1]^d` is approximated in the Monte Carlo studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridPolicy {
    /// Uniform grid with spacing at most `h / fraction`.
    BandwidthFraction { fraction: usize },
    /// Uniform grid `{0, 1/m, ..., 1}^d` with `m = divisions` at every `n`.
    Divisions { divisions: usize },
    /// Centers of the covering cubes of side `v_n h^(2d+1)`, at most `max_cubes` of them.
    Covering { max_cubes: usize },
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy::BandwidthFraction { fraction: 8 }
    }
}

impl GridPolicy {
    pub fn grid(&self, n: usize, h: f64, d: usize) -> Result<EvalGrid> {
        match *self {
            GridPolicy::BandwidthFraction { fraction } => {
                if fraction == 0 {
                    return Err(Error::config("grid fraction must be >= 1"));
                }
                EvalGrid::with_spacing(h / fraction as f64, d)
            }
            GridPolicy::Divisions { divisions } => EvalGrid::uniform(divisions, d),
            GridPolicy::Covering { max_cubes } => {
                let rate = crate::estimator::deviation_rate(n, h, d);
                Ok(crate::estimator::covering(rate, h, d, max_cubes)?.0)
            }
        }
    }
}

/// Quantity whose sup over the grid is tracked by the rate study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateTarget {
    /// `sup |g_n - E g_n|`.
    #[default]
    Deviation,
    /// `sup |g_n - g|`.
    Error,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

/// Parameters `(p, a, b)` of the polynomial-moment rate `n^a (log n)^b / (n h)^(d/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `(2a(d+p) - d^2 - 2) / (d(3d+2))`.
    pub theta: f64,
    /// `theta >= theta2`.
    pub exponent_ok: bool,
    /// `d(3d+2) theta1 + 2(d+p) b > 2`.
    pub log_ok: bool,
    pub admissible: bool,
}

/// Checks the parameter region under which a bandwidth
/// `n^-theta2 (log n)^theta1` attains the rate `n^a (log n)^b / (n h)^(d/2)`
/// for errors with `p > 2` moments. Differences of order `n^epsilon` are not
/// measurable at desk scale, so this is a static check only.
pub fn check_admissibility(d: usize, schedule: &BandwidthSchedule, params: &AdmissibilityParams) -> Result<AdmissibilityReport> {
    let (theta1, theta2) = match *schedule {
        BandwidthSchedule::PowerLog { theta1, theta2 } => (theta1, theta2),
        _ => return Err(Error::config("admissibility applies to power_log bandwidths only")),
    };
    let AdmissibilityParams { p, a, b } = *params;
    if !(p > 2.0 && a >= 0.0 && b >= 0.0) {
        return Err(Error::config(format!("need p > 2 and a, b >= 0 (got p = {p}, a = {a}, b = {b})")));
    }
    if !(theta1 > 0.0 && theta2 > 0.0) {
        return Err(Error::config("admissibility needs theta1, theta2 > 0"));
    }
    let df = d as f64;
    let span = df * (3.0 * df + 2.0);
    let theta = (2.0 * a * (df + p) - df * df - 2.0) / span;
    let exponent_ok = theta >= theta2;
    let log_ok = span * theta1 + 2.0 * (df + p) * b > 2.0;
    Ok(AdmissibilityReport { theta, exponent_ok, log_ok, admissible: exponent_ok && log_ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n_values: Vec<usize>,
    pub generator: GeneratorSpec,
    pub kernel: KernelVariant,
    pub bandwidth: BandwidthSchedule,
    pub regression: RegressionConfig,
    #[serde(default)]
    pub grid: GridPolicy,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub target: RateTarget,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    #[serde(default = "default_variance_tolerance")]
    pub variance_slope_tolerance: f64,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default)]
    pub conditions: Option<ConditionParams>,
    #[serde(default)]
    pub admissibility: Option<AdmissibilityParams>,
}

fn default_slope_tolerance() -> f64 {
    0.12
}

fn default_variance_tolerance() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.kernel, self.d)
    }

    /// Checks everything except the study-specific requirements.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("d must be >= 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::config("n_values is empty"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_values must be strictly increasing"));
        }
        for &n in &self.n_values {
            crate::lattice::LatticeShape::new(self.d, n)?;
        }
        self.generator.validate(self.d)?;
        self.kernel_spec()?;
        self.bandwidth.validate(&self.n_values, self.d)?;
        self.regression.function.validate(self.d)?;
        let b = self.regression.lipschitz;
        if !(b > 0.0 && b.is_finite()) || self.regression.function.lipschitz() > b {
            return Err(Error::config(format!(
                "declared B = {b} must be positive and at least {}",
                self.regression.function.lipschitz()
            )));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be >= 1"));
        }
        for (name, tol) in [("slope_tolerance", self.slope_tolerance), ("variance_slope_tolerance", self.variance_slope_tolerance)] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::config(format!("{name} = {tol} must be > 0")));
            }
        }
        if let Some(params) = &self.admissibility {
            let report = check_admissibility(self.d, &self.bandwidth, params)?;
            if !report.admissible {
                return Err(Error::config(format!(
                    "bandwidth parameters are outside the admissible region: theta = {}, exponent_ok = {}, log_ok = {}",
                    report.theta, report.exponent_ok, report.log_ok
                )));
            }
        }
        Ok(())
    }

    /// Requirements of the slope-fitting Monte Carlo studies.
    pub fn validate_monte_carlo(&self) -> Result<()> {
        if self.n_values.len() < MIN_SIZES_FOR_FIT {
            return Err(Error::config(format!("slope fits need at least {MIN_SIZES_FOR_FIT} values of n")));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::config(format!("Monte Carlo studies need at least {MIN_REPLICATIONS} replications")));
        }
        Ok(())
    }
}
