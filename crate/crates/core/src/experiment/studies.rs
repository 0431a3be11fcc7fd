use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, RateTarget};
use super::output::CsvRow;
use super::slope::{fit_slope, SlopeFit};
use crate::error::{Error, Result};
use crate::estimator::{covering, deviation_rate, lipschitz_battery, Decomposition, EstimationProblem, EvalGrid, RegressionFn};
use crate::field_gen::{generate, theoretical_covariance, FieldSample, GeneratorSpec};
use crate::lattice::{cube_points, LatticeShape};
use crate::rng::derive_seed;

/// Additive slack in the bias bound, absorbing floating-point error.
pub const BIAS_SLACK: f64 = 1e-12;
/// Cap on covering cubes used by the `estimate` decomposition.
pub const DECOMPOSITION_MAX_CUBES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StudyVerdict {
    Pass,
    Fail,
    /// Every measured value is zero, so no slope can be fitted.
    Degenerate,
}

/// Seed of replication `r` at size `n`.
pub fn replication_seed(master: u64, n: usize, r: usize) -> u64 {
    derive_seed(master, &[n as u64, r as u64])
}

/// Deterministic grid of the bias and variance oracles: 401 points for
/// `d = 1`, `61^2` for `d = 2`, `21^d` beyond.
pub fn reference_grid(d: usize) -> Result<EvalGrid> {
    match d {
        1 => EvalGrid::uniform(400, 1),
        2 => EvalGrid::uniform(60, 2),
        _ => EvalGrid::uniform(20, d),
    }
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Everything about one sample size that does not depend on the replication.
struct PreparedSize {
    n: usize,
    h: f64,
    problem: EstimationProblem,
    points: Vec<Vec<f64>>,
    /// `E g_n` or `g` at the points, depending on the target.
    reference: Vec<f64>,
    /// `g(i/n)` on the lattice in flat order.
    signal: Vec<f64>,
}

impl PreparedSize {
    fn new(cfg: &ExperimentConfig, n: usize, grid: &EvalGrid, target: RateTarget) -> Result<Self> {
        let h = cfg.bandwidth.bandwidth(n, cfg.d);
        let problem = build_problem(cfg, n, h)?;
        let points: Vec<Vec<f64>> = grid.points().collect();
        let truth = &cfg.regression.function;
        let reference = points
            .par_iter()
            .map(|x| match target {
                RateTarget::Deviation => problem.expected_estimate(x),
                RateTarget::Error => Ok(truth.eval(x)),
            })
            .collect::<Result<Vec<f64>>>()?;
        let signal = problem.observations(&vec![0.0; problem.shape().len()])?;
        Ok(PreparedSize { n, h, problem, points, reference, signal })
    }

    fn sup(&self, field: &FieldSample) -> Result<f64> {
        let y: Vec<f64> = self.signal.iter().zip(field.values()).map(|(g, e)| g + e).collect();
        let mut best = 0.0f64;
        for (x, r) in self.points.iter().zip(&self.reference) {
            best = best.max((self.problem.estimate(&y, x)? - r).abs());
        }
        Ok(best)
    }
}

fn build_problem(cfg: &ExperimentConfig, n: usize, h: f64) -> Result<EstimationProblem> {
    let shape = LatticeShape::new(cfg.d, n)?;
    EstimationProblem::new(shape, cfg.kernel_spec()?, h)?
        .with_truth(cfg.regression.function.clone(), cfg.regression.lipschitz)
}

fn run_replications<F>(cfg: &ExperimentConfig, n: usize, per_rep: F) -> Result<Vec<f64>>
where
    F: Fn(&FieldSample) -> Result<f64> + Sync,
{
    let shape = LatticeShape::new(cfg.d, n)?;
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(cfg.seed, n, r);
            generate(&cfg.generator, shape, seed)
                .and_then(|field| per_rep(&field))
                .map_err(|e| Error::Replication { seed, source: Box::new(e) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub h: f64,
    pub replications: usize,
    pub grid_points: usize,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    /// `(log n)^(1/2) / (n h)^(d/2)`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub d: usize,
    pub generator: String,
    pub target: RateTarget,
    pub seed: u64,
    pub points: Vec<RatePoint>,
    /// Fit of `log mean` on `log(n^-d log n)`.
    pub fit: Option<SlopeFit>,
    /// Same regression for the 0.9 quantile.
    pub q90_fit: Option<SlopeFit>,
    pub theoretical_slope: f64,
    pub tolerance: f64,
    /// Fraction of consecutive sizes where the mean sup does not increase.
    pub monotone_fraction: f64,
    pub verdict: StudyVerdict,
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl RateReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let d = self.d;
        let mut rows = Vec::new();
        for (p, samples) in self.points.iter().zip(&self.samples) {
            for (r, v) in samples.iter().enumerate() {
                rows.push(CsvRow::new("rates", d, "sup", *v).at(p.n, p.h).replicate(r));
            }
            for (name, v) in [("mean", p.mean), ("median", p.median), ("q90", p.q90), ("rate", p.rate)] {
                rows.push(CsvRow::new("rates", d, name, v).at(p.n, p.h));
            }
        }
        if let Some(fit) = &self.fit {
            rows.push(CsvRow::new("rates", d, "slope", fit.slope));
            rows.push(CsvRow::new("rates", d, "slope_stderr", fit.stderr));
        }
        rows.push(CsvRow::new("rates", d, "theoretical_slope", self.theoretical_slope));
        rows.push(CsvRow::new("rates", d, "monotone_fraction", self.monotone_fraction));
        rows
    }
}

/// Regressor of the sup-norm rate fits, `log(n^-d log n)`.
pub fn rate_regressor(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    nf.ln().ln() - d as f64 * nf.ln()
}

/// Monte Carlo sup-norm rate study.
pub fn run_rate_study(cfg: &ExperimentConfig) -> Result<RateReport> {
    cfg.validate()?;
    cfg.validate_monte_carlo()?;
    let d = cfg.d;
    let mut points = Vec::with_capacity(cfg.n_values.len());
    let mut samples = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let h = cfg.bandwidth.bandwidth(n, d);
        let grid = cfg.grid.grid(n, h, d)?;
        let prep = PreparedSize::new(cfg, n, &grid, cfg.target)?;
        let sups = run_replications(cfg, n, |field| prep.sup(field))?;
        points.push(RatePoint {
            n,
            h: prep.h,
            replications: sups.len(),
            grid_points: prep.points.len(),
            mean: mean(&sups),
            median: quantile(&sups, 0.5),
            q90: quantile(&sups, 0.9),
            rate: deviation_rate(prep.n, prep.h, d),
        });
        samples.push(sups);
    }
    let theoretical_slope = 1.0 / (2.0 + d as f64);
    let monotone_fraction = points.windows(2).filter(|w| w[1].mean <= w[0].mean).count() as f64
        / (points.len() - 1) as f64;
    let degenerate = points.iter().all(|p| p.mean == 0.0);
    let (fit, q90_fit, verdict) = if degenerate || points.iter().any(|p| p.mean <= 0.0) {
        (None, None, StudyVerdict::Degenerate)
    } else {
        let xs: Vec<f64> = points.iter().map(|p| rate_regressor(p.n, d)).collect();
        let fit = fit_slope(&xs.iter().zip(&points).map(|(x, p)| (*x, p.mean.ln())).collect::<Vec<_>>())?;
        let q90_fit = if points.iter().all(|p| p.q90 > 0.0) {
            Some(fit_slope(&xs.iter().zip(&points).map(|(x, p)| (*x, p.q90.ln())).collect::<Vec<_>>())?)
        } else {
            None
        };
        let verdict = if (fit.slope - theoretical_slope).abs() <= cfg.slope_tolerance {
            StudyVerdict::Pass
        } else {
            StudyVerdict::Fail
        };
        (Some(fit), q90_fit, verdict)
    };
    Ok(RateReport {
        d,
        generator: cfg.generator.name().to_string(),
        target: cfg.target,
        seed: cfg.seed,
        points,
        fit,
        q90_fit,
        theoretical_slope,
        tolerance: cfg.slope_tolerance,
        monotone_fraction,
        verdict,
        samples,
    })
}

/// Exact second moment of `S_n(x)` against its covariance-sum bound at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceOraclePoint {
    pub n: usize,
    pub h: f64,
    pub grid_points: usize,
    /// `sum_l |cov(l)|`.
    pub covariance_sum: f64,
    /// Max over the grid of `E S_n(x)^2 / (sum_l |cov(l)| sum_k a_k(x))`.
    pub max_ratio: f64,
    pub holds: bool,
    /// For iid errors, max over the grid of `|E S^2 - sigma^2 sum a^2| / max(1, sigma^2 sum a^2)`.
    pub iid_equality_error: Option<f64>,
}

/// Checks `E S_n(x)^2 <= (sum_l |cov(l)|) sum_k a_k(x)` at every grid point.
pub fn variance_oracle(problem: &EstimationProblem, spec: &GeneratorSpec, grid: &EvalGrid) -> Result<VarianceOraclePoint> {
    let d = problem.shape().dim();
    spec.validate(d)?;
    let radius = spec.dependence_radius(d);
    let covariance_sum: f64 = cube_points(d, radius).iter().map(|l| theoretical_covariance(spec, l).abs()).sum();
    let iid = matches!(spec, GeneratorSpec::Iid { .. });
    let variance = spec.variance();
    let per_point = grid
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| {
            let second = problem.stochastic_second_moment(x, |l| theoretical_covariance(spec, l), radius)?;
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            problem.for_each_weight(x, |_, _, w| {
                sum += w;
                sum_sq += w * w;
            })?;
            let bound = covariance_sum * sum;
            let ratio = if bound > 0.0 { second / bound } else if second == 0.0 { 0.0 } else { f64::INFINITY };
            let iid_err = iid.then(|| {
                let exact = variance * sum_sq;
                (second - exact).abs() / exact.max(1.0)
            });
            Ok((ratio, second <= bound, iid_err))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceOraclePoint {
        n: problem.shape().side(),
        h: problem.bandwidth(),
        grid_points: grid.len(),
        covariance_sum,
        max_ratio: per_point.iter().map(|p| p.0).fold(0.0, f64::max),
        holds: per_point.iter().all(|p| p.1),
        iid_equality_error: iid.then(|| per_point.iter().filter_map(|p| p.2).fold(0.0, f64::max)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub n: usize,
    pub h: f64,
    pub replications: usize,
    /// Monte Carlo root mean square of `g_n(x0) - E g_n(x0)`.
    pub rms: f64,
    /// `(E S_n(x0)^2)^(1/2) / sum_k a_k(x0)`, the exact value `rms` estimates.
    pub exact_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub d: usize,
    pub generator: String,
    pub seed: u64,
    pub point: Vec<f64>,
    pub oracle: Vec<VarianceOraclePoint>,
    pub oracle_holds: bool,
    pub points: Vec<VariancePoint>,
    /// Fit of `log rms` on `log(n h)`.
    pub fit: Option<SlopeFit>,
    pub theoretical_slope: f64,
    pub tolerance: f64,
    pub verdict: StudyVerdict,
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl VarianceReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let d = self.d;
        let mut rows = Vec::new();
        for o in &self.oracle {
            rows.push(CsvRow::new("variance", d, "oracle_max_ratio", o.max_ratio).at(o.n, o.h));
            if let Some(e) = o.iid_equality_error {
                rows.push(CsvRow::new("variance", d, "iid_equality_error", e).at(o.n, o.h));
            }
        }
        for (p, samples) in self.points.iter().zip(&self.samples) {
            for (r, v) in samples.iter().enumerate() {
                rows.push(CsvRow::new("variance", d, "deviation", *v).at(p.n, p.h).replicate(r));
            }
            rows.push(CsvRow::new("variance", d, "rms", p.rms).at(p.n, p.h));
            rows.push(CsvRow::new("variance", d, "exact_rms", p.exact_rms).at(p.n, p.h));
        }
        if let Some(fit) = &self.fit {
            rows.push(CsvRow::new("variance", d, "slope", fit.slope));
            rows.push(CsvRow::new("variance", d, "slope_stderr", fit.stderr));
        }
        rows.push(CsvRow::new("variance", d, "theoretical_slope", self.theoretical_slope));
        rows
    }
}

/// Covariance-sum oracle on the reference grid plus the Monte Carlo decay of
/// the pointwise deviation at the center of the cube.
pub fn run_variance_study(cfg: &ExperimentConfig) -> Result<VarianceReport> {
    cfg.validate()?;
    cfg.validate_monte_carlo()?;
    let d = cfg.d;
    let x0 = vec![0.5; d];
    let grid = reference_grid(d)?;
    let radius = cfg.generator.dependence_radius(d);
    let mut oracle = Vec::new();
    let mut points = Vec::new();
    let mut samples = Vec::new();
    for &n in &cfg.n_values {
        let h = cfg.bandwidth.bandwidth(n, d);
        let problem = build_problem(cfg, n, h)?;
        oracle.push(variance_oracle(&problem, &cfg.generator, &grid)?);
        let expected = problem.expected_estimate(&x0)?;
        let signal = problem.observations(&vec![0.0; problem.shape().len()])?;
        let deviations = run_replications(cfg, n, |field| {
            let y: Vec<f64> = signal.iter().zip(field.values()).map(|(g, e)| g + e).collect();
            Ok(problem.estimate(&y, &x0)? - expected)
        })?;
        let second = problem.stochastic_second_moment(&x0, |l| theoretical_covariance(&cfg.generator, l), radius)?;
        let rms = (deviations.iter().map(|v| v * v).sum::<f64>() / deviations.len() as f64).sqrt();
        points.push(VariancePoint {
            n,
            h,
            replications: deviations.len(),
            rms,
            exact_rms: second.sqrt() / problem.weight_sum(&x0)?,
        });
        samples.push(deviations);
    }
    let oracle_holds = oracle.iter().all(|o| o.holds);
    let theoretical_slope = -(d as f64) / 2.0;
    let (fit, verdict) = if points.iter().any(|p| p.rms <= 0.0) {
        (None, if oracle_holds { StudyVerdict::Degenerate } else { StudyVerdict::Fail })
    } else {
        let pts: Vec<(f64, f64)> = points.iter().map(|p| ((p.n as f64 * p.h).ln(), p.rms.ln())).collect();
        let fit = fit_slope(&pts)?;
        let in_band = (fit.slope - theoretical_slope).abs() <= cfg.variance_slope_tolerance;
        (Some(fit), if in_band && oracle_holds { StudyVerdict::Pass } else { StudyVerdict::Fail })
    };
    Ok(VarianceReport {
        d,
        generator: cfg.generator.name().to_string(),
        seed: cfg.seed,
        point: x0,
        oracle,
        oracle_holds,
        points,
        fit,
        theoretical_slope,
        tolerance: cfg.variance_slope_tolerance,
        verdict,
        samples,
    })
}

/// `(x, E g_n(x) - g(x))` at every grid point.
pub fn bias_table(problem: &EstimationProblem, grid: &EvalGrid) -> Result<Vec<(Vec<f64>, f64)>> {
    grid.points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| {
            let b = problem.bias(&x)?;
            Ok((x, b))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEntry {
    pub n: usize,
    pub h: f64,
    pub function: String,
    pub lipschitz: f64,
    pub max_abs_bias: f64,
    pub argmax: Vec<f64>,
    /// `B h + slack`.
    pub bound: f64,
    /// `max_abs_bias / h`.
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub d: usize,
    pub lipschitz: f64,
    pub grid_points: usize,
    pub entries: Vec<BiasEntry>,
    /// Largest `max_abs_bias / h` at each size, over all functions.
    pub ratios: Vec<f64>,
    /// Whether every ratio stays at most `B`.
    pub ratio_bounded: bool,
    pub verdict: StudyVerdict,
}

impl BiasReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for e in &self.entries {
            let tag = |s: &str| format!("{s}[{}]", e.function);
            rows.push(CsvRow::new("bias", self.d, tag("max_abs_bias"), e.max_abs_bias).at(e.n, e.h));
            rows.push(CsvRow::new("bias", self.d, tag("bound"), e.bound).at(e.n, e.h));
            rows.push(CsvRow::new("bias", self.d, tag("ratio"), e.ratio).at(e.n, e.h));
        }
        rows
    }
}

fn bias_functions(cfg: &ExperimentConfig) -> Vec<(String, RegressionFn)> {
    let mut fns: Vec<(String, RegressionFn)> = lipschitz_battery(cfg.regression.lipschitz, cfg.d)
        .into_iter()
        .map(|g| (g.name().to_string(), g))
        .collect();
    fns.push((format!("config_{}", cfg.regression.function.name()), cfg.regression.function.clone()));
    fns
}

/// Deterministic bias check over the reference grid and a battery of
/// `B`-Lipschitz functions together with the configured one.
pub fn run_bias_study(cfg: &ExperimentConfig) -> Result<BiasReport> {
    cfg.validate()?;
    let d = cfg.d;
    let b = cfg.regression.lipschitz;
    let grid = reference_grid(d)?;
    let mut entries = Vec::new();
    let mut ratios = Vec::new();
    for &n in &cfg.n_values {
        let h = cfg.bandwidth.bandwidth(n, d);
        let base = EstimationProblem::new(LatticeShape::new(d, n)?, cfg.kernel_spec()?, h)?;
        let mut worst_ratio = 0.0f64;
        for (name, g) in bias_functions(cfg) {
            let problem = base.clone().with_truth(g, b)?;
            let table = bias_table(&problem, &grid)?;
            let (argmax, max_abs_bias) = table
                .into_iter()
                .map(|(x, v)| (x, v.abs()))
                .fold((vec![0.0; d], -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let bound = b * h + BIAS_SLACK;
            worst_ratio = worst_ratio.max(max_abs_bias / h);
            entries.push(BiasEntry {
                n,
                h,
                function: name,
                lipschitz: b,
                max_abs_bias,
                argmax,
                bound,
                ratio: max_abs_bias / h,
                holds: max_abs_bias <= bound,
            });
        }
        ratios.push(worst_ratio);
    }
    let ratio_bounded = ratios.iter().all(|r| *r <= b + BIAS_SLACK);
    let verdict = if entries.iter().all(|e| e.holds) && ratio_bounded { StudyVerdict::Pass } else { StudyVerdict::Fail };
    Ok(BiasReport { d, lipschitz: b, grid_points: grid.len(), entries, ratios, ratio_bounded, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub n: usize,
    pub seed: u64,
    pub sites: usize,
    pub mean: f64,
    pub variance: f64,
    pub theoretical_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub d: usize,
    pub generator: String,
    pub fields: Vec<FieldSummary>,
    #[serde(skip)]
    pub values: Vec<Vec<f64>>,
}

impl SimulationReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for (f, values) in self.fields.iter().zip(&self.values) {
            let at = |row: CsvRow| CsvRow { n: Some(f.n), ..row };
            for (k, v) in values.iter().enumerate() {
                rows.push(at(CsvRow::new("simulate", self.d, format!("eps[{k}]"), *v)));
            }
            rows.push(at(CsvRow::new("simulate", self.d, "mean", f.mean)));
            rows.push(at(CsvRow::new("simulate", self.d, "variance", f.variance)));
        }
        rows
    }
}

/// One field per configured size, drawn with the seed of replication 0.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let mut fields = Vec::new();
    let mut values = Vec::new();
    for &n in &cfg.n_values {
        let seed = replication_seed(cfg.seed, n, 0);
        let field = generate(&cfg.generator, LatticeShape::new(cfg.d, n)?, seed)?;
        let m = mean(field.values());
        let var = field.values().iter().map(|v| (v - m).powi(2)).sum::<f64>() / field.values().len() as f64;
        fields.push(FieldSummary {
            n,
            seed,
            sites: field.values().len(),
            mean: m,
            variance: var,
            theoretical_variance: cfg.generator.variance(),
        });
        values.push(field.values().to_vec());
    }
    Ok(SimulationReport { d: cfg.d, generator: cfg.generator.name().to_string(), fields, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    pub grid_points: usize,
    /// `sup |g_n - E g_n|` over the grid.
    pub sup_deviation: f64,
    pub argmax: Vec<f64>,
    /// `sup |g_n - g|` over the grid.
    pub sup_error: f64,
    pub covering_cells_per_axis: usize,
    pub covering_capped: bool,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub d: usize,
    pub generator: String,
    pub estimates: Vec<EstimateSummary>,
    #[serde(skip)]
    pub curves: Vec<Vec<(f64, f64, f64)>>,
}

impl EstimateReport {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows = Vec::new();
        for (e, curve) in self.estimates.iter().zip(&self.curves) {
            for (p, (gn, egn, g)) in curve.iter().enumerate() {
                rows.push(CsvRow::new("estimate", self.d, format!("g_n[{p}]"), *gn).at(e.n, e.h));
                rows.push(CsvRow::new("estimate", self.d, format!("expected[{p}]"), *egn).at(e.n, e.h));
                rows.push(CsvRow::new("estimate", self.d, format!("truth[{p}]"), *g).at(e.n, e.h));
            }
            rows.push(CsvRow::new("estimate", self.d, "sup", e.sup_deviation).at(e.n, e.h));
            rows.push(CsvRow::new("estimate", self.d, "sup_error", e.sup_error).at(e.n, e.h));
        }
        rows
    }
}

/// One replication per size: the estimate on the grid, its sup deviation and
/// the split of that deviation through the covering cubes.
pub fn run_estimation(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let d = cfg.d;
    let mut estimates = Vec::new();
    let mut curves = Vec::new();
    for &n in &cfg.n_values {
        let h = cfg.bandwidth.bandwidth(n, d);
        let problem = build_problem(cfg, n, h)?;
        let seed = replication_seed(cfg.seed, n, 0);
        let field = generate(&cfg.generator, problem.shape(), seed)?;
        let y = problem.observations(field.values())?;
        let grid = cfg.grid.grid(n, h, d)?;
        let curve = grid
            .points()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|x| Ok((problem.estimate(&y, x)?, problem.expected_estimate(x)?, cfg.regression.function.eval(x))))
            .collect::<Result<Vec<_>>>()?;
        let (mut sup, mut arg, mut sup_error) = (0.0, grid.point(0), 0.0f64);
        for (p, (gn, egn, g)) in curve.iter().enumerate() {
            if (gn - egn).abs() > sup {
                sup = (gn - egn).abs();
                arg = grid.point(p);
            }
            sup_error = sup_error.max((gn - g).abs());
        }
        let (cover, plan) = covering(deviation_rate(n, h, d), h, d, DECOMPOSITION_MAX_CUBES)?;
        let decomposition = problem.sup_decomposition(&y, &grid, &cover)?;
        estimates.push(EstimateSummary {
            n,
            h,
            seed,
            grid_points: grid.len(),
            sup_deviation: sup,
            argmax: arg,
            sup_error,
            covering_cells_per_axis: plan.cells_per_axis,
            covering_capped: plan.capped,
            decomposition,
        });
        curves.push(curve);
    }
    Ok(EstimateReport { d, generator: cfg.generator.name().to_string(), estimates, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_gen::InnovationLaw;
    use crate::kernel::KernelSpec;

    fn config(json_patch: &[(&str, &str)]) -> ExperimentConfig {
        let mut text = r#"{
            "d": 1,
            "n_values": [64, 128, 256, 512],
            "generator": {"kind": "md_neighbor", "innovation": {"law": "rademacher"}, "link": {"kind": "sign"}},
            "kernel": {"kind": "uniform"},
            "bandwidth": {"form": "optimal_as"},
            "regression": {"function": {"kind": "affine", "slope": 1.0}, "lipschitz": 1.0},
            "replications": 30,
            "seed": 11
        }"#
        .to_string();
        for (from, to) in json_patch {
            text = text.replace(from, to);
        }
        ExperimentConfig::from_json(&text).unwrap()
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.9) - 3.7).abs() < 1e-15);
    }

    #[test]
    fn bias_table_small_example() {
        let shape = LatticeShape::new(1, 10).unwrap();
        let problem = EstimationProblem::new(shape, KernelSpec::uniform(1).unwrap(), 0.3)
            .unwrap()
            .with_truth(RegressionFn::Affine { slope: 1.0, intercept: 0.0 }, 1.0)
            .unwrap();
        let table = bias_table(&problem, &reference_grid(1).unwrap()).unwrap();
        let (x, worst) = table.iter().fold((vec![0.0], 0.0f64), |b, (x, v)| if v.abs() > b.1 { (x.clone(), v.abs()) } else { b });
        // The design starts at 1/n, so the left edge is worse than the right one.
        assert!((worst - 0.2).abs() < 1e-12);
        assert_eq!(x, vec![0.0]);
        let right = table.last().unwrap();
        assert_eq!(right.0, vec![1.0]);
        assert!((right.1 + 0.15).abs() < 1e-12);
    }

    #[test]
    fn degenerate_rate_study() {
        let cfg = config(&[(r#"{"kind": "md_neighbor", "innovation": {"law": "rademacher"}, "link": {"kind": "sign"}}"#, r#"{"kind": "iid", "innovation": {"law": "gaussian", "sigma": 0.0}}"#)]);
        let report = run_rate_study(&cfg).unwrap();
        assert_eq!(report.verdict, StudyVerdict::Degenerate);
        assert!(report.fit.is_none());
        assert!(report.points.iter().all(|p| p.mean == 0.0));
    }

    #[test]
    fn rate_study_is_reproducible() {
        let cfg = config(&[("\"replications\": 30", "\"replications\": 30")]);
        let a = run_rate_study(&cfg).unwrap();
        let b = run_rate_study(&cfg).unwrap();
        assert_eq!(a.csv_rows(), b.csv_rows());
        assert_eq!(a.samples.len(), 4);
        assert!(a.points.iter().all(|p| p.mean > 0.0 && p.q90 >= p.median));
    }

    #[test]
    fn variance_oracle_small_example() {
        let spec = GeneratorSpec::linear_1d(InnovationLaw::gaussian(1.0), &[1.0, 0.5]);
        let problem = EstimationProblem::new(LatticeShape::new(1, 32).unwrap(), KernelSpec::uniform(1).unwrap(), 0.25).unwrap();
        let second = problem.stochastic_second_moment(&[0.5], |l| theoretical_covariance(&spec, l), 1).unwrap();
        // 17 sites with weight 1/2: 17 * 1.25 / 4 + 2 * 16 * 0.5 / 4.
        assert!((second - (17.0 * 1.25 + 32.0 * 0.5) / 4.0).abs() < 1e-12);
        assert!(second <= 2.25 * problem.weight_sum(&[0.5]).unwrap());
        let report = variance_oracle(&problem, &spec, &reference_grid(1).unwrap()).unwrap();
        assert!(report.holds);
        assert_eq!(report.covariance_sum, 2.25);
    }

    #[test]
    fn iid_variance_equality() {
        let spec = GeneratorSpec::Iid { innovation: InnovationLaw::gaussian(1.5) };
        let problem = EstimationProblem::new(LatticeShape::new(2, 16).unwrap(), KernelSpec::pedestal(2, 1.0, 1.0).unwrap(), 0.3).unwrap();
        let report = variance_oracle(&problem, &spec, &EvalGrid::uniform(10, 2).unwrap()).unwrap();
        assert!(report.holds);
        assert!(report.iid_equality_error.unwrap() <= 1e-10);
    }

    #[test]
    fn bias_study_passes() {
        let cfg = config(&[("[64, 128, 256, 512]", "[10, 100, 1000]")]);
        let report = run_bias_study(&cfg).unwrap();
        assert_eq!(report.verdict, StudyVerdict::Pass);
        assert_eq!(report.entries.len(), 3 * 4);
    }
}
