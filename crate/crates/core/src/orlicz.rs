//! Exponential Young functions `psi_beta`, Luxemburg norms, tail quantiles
//! and the quantile-integral coefficients used by the mixing conditions.
//!
//! ```text
//! psi_beta(x) = exp((x + xi)^beta) - exp(xi^beta),
//! xi = ((1 - beta) / beta)^(1/beta) if 0 < beta < 1, else 0
//! ```
//!
//! Expectations are computed in closed form where one exists, exactly for
//! empirical laws, and by double-exponential quadrature otherwise.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::integrate;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungFunctionBeta {
    beta: f64,
    shift: f64,
}

impl YoungFunctionBeta {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta = {beta} must be finite and > 0")));
        }
        let shift = if beta < 1.0 { ((1.0 - beta) / beta).powf(1.0 / beta) } else { 0.0 };
        Ok(YoungFunctionBeta { beta, shift })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The shift `xi_beta` making `psi_beta` convex near zero.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("psi_beta is defined on [0, inf), got {x}")));
        }
        Ok(self.value(x))
    }

    fn value(&self, x: f64) -> f64 {
        if self.shift == 0.0 {
            (x.powf(self.beta)).exp_m1()
        } else {
            (x + self.shift).powf(self.beta).exp() - self.shift.powf(self.beta).exp()
        }
    }
}

pub fn psi_eval(yf: &YoungFunctionBeta, x: f64) -> Result<f64> {
    yf.eval(x)
}

/// `beta(q) = 2q / (2 - q)` for `0 < q < 2`.
pub fn beta_of_q(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) {
        return Err(Error::domain(format!("q = {q} must lie in (0, 2)")));
    }
    Ok(2.0 * q / (2.0 - q))
}

/// Law of a real variable `Z`; only `|Z|` matters for every quantity here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    /// `|Z| = mass` almost surely; `mass = 0` is the zero variable.
    PointMass { mass: f64 },
    /// `Z ~ U(-half_width, half_width)`.
    Uniform { half_width: f64 },
    /// `Z ~ N(0, sigma^2)`.
    Gaussian { sigma: f64 },
    Empirical { sample: Vec<f64> },
}

impl MarginalSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            MarginalSpec::PointMass { mass } => mass.is_finite() && *mass >= 0.0,
            MarginalSpec::Uniform { half_width } => half_width.is_finite() && *half_width > 0.0,
            MarginalSpec::Gaussian { sigma } => sigma.is_finite() && *sigma > 0.0,
            MarginalSpec::Empirical { sample } => !sample.is_empty() && sample.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!("invalid marginal {self:?}")))
        }
    }

    /// Same law scaled by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            MarginalSpec::PointMass { mass } => MarginalSpec::PointMass { mass: mass * lambda },
            MarginalSpec::Uniform { half_width } => MarginalSpec::Uniform { half_width: half_width * lambda },
            MarginalSpec::Gaussian { sigma } => MarginalSpec::Gaussian { sigma: sigma * lambda },
            MarginalSpec::Empirical { sample } => {
                MarginalSpec::Empirical { sample: sample.iter().map(|v| v * lambda).collect() }
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            MarginalSpec::PointMass { mass } => *mass == 0.0,
            MarginalSpec::Empirical { sample } => sample.iter().all(|v| *v == 0.0),
            _ => false,
        }
    }

    /// Rough size of `|Z|`, used to seed bisection brackets.
    fn scale(&self) -> f64 {
        match self {
            MarginalSpec::PointMass { mass } => *mass,
            MarginalSpec::Uniform { half_width } => *half_width,
            MarginalSpec::Gaussian { sigma } => *sigma,
            MarginalSpec::Empirical { sample } => sample.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// `|z|` sorted ascending, for empirical laws.
    fn sorted_abs(sample: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = sample.iter().map(|x| x.abs()).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `Q(u) = inf { t > 0 : P(|Z| > t) <= u }`, nonincreasing in `u`.
///
/// For empirical laws this is the exact inverse of the empirical tail:
/// on `[k/N, (k+1)/N)` it equals the `(N-k)`-th smallest `|z|`.
pub fn quantile_q(z: &MarginalSpec, u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    match z {
        MarginalSpec::PointMass { mass } => {
            if u < 1.0 {
                *mass
            } else {
                0.0
            }
        }
        MarginalSpec::Uniform { half_width } => half_width * (1.0 - u),
        MarginalSpec::Gaussian { sigma } => {
            if u == 0.0 {
                f64::INFINITY
            } else {
                (sigma * std_normal().inverse_cdf(1.0 - 0.5 * u)).max(0.0)
            }
        }
        MarginalSpec::Empirical { sample } => {
            let sorted = MarginalSpec::sorted_abs(sample);
            let n = sorted.len();
            let k = ((u * n as f64).floor() as usize).min(n);
            if k == n {
                0.0
            } else {
                sorted[n - 1 - k]
            }
        }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Standard normal density.
fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `int_0^alpha psi(Q(u) / c) du`, which equals `E psi(|Z|/c)` at
/// `alpha = 1`. Returns `+inf` when the integral diverges.
fn psi_quantile_integral(z: &MarginalSpec, yf: &YoungFunctionBeta, alpha: f64, c: f64) -> f64 {
    let alpha = alpha.clamp(0.0, 1.0);
    if alpha == 0.0 {
        return 0.0;
    }
    match z {
        MarginalSpec::PointMass { mass } => alpha * yf.value(mass / c),
        MarginalSpec::Uniform { half_width } => {
            integrate(|u| yf.value(half_width * (1.0 - u) / c), 0.0, alpha, 16)
        }
        MarginalSpec::Gaussian { sigma } => gaussian_tail_psi(*sigma, yf, alpha, c),
        MarginalSpec::Empirical { sample } => {
            let sorted = MarginalSpec::sorted_abs(sample);
            let n = sorted.len();
            let nf = n as f64;
            let mut total = 0.0;
            for k in 0..n {
                let lo = k as f64 / nf;
                if lo >= alpha {
                    break;
                }
                let hi = ((k + 1) as f64 / nf).min(alpha);
                total += (hi - lo) * yf.value(sorted[n - 1 - k] / c);
            }
            total
        }
    }
}

/// `E[psi(|Z|/c); |Z| > Q(alpha)]` for `Z ~ N(0, sigma^2)`, the quantile
/// integral after substituting `u = P(|Z| > t)`.
fn gaussian_tail_psi(sigma: f64, yf: &YoungFunctionBeta, alpha: f64, c: f64) -> f64 {
    let beta = yf.beta();
    let threshold = quantile_q(&MarginalSpec::Gaussian { sigma }, alpha) / sigma;
    let a = sigma / c;
    if beta > 2.0 {
        return f64::INFINITY;
    }
    if beta == 2.0 {
        // psi_2(x) = exp(x^2) - 1 and E exp(a^2 Z^2; |Z| > T) has a closed form.
        let k = 0.5 - a * a;
        if k <= 0.0 {
            return f64::INFINITY;
        }
        let tail_exp = libm::erfc(k.sqrt() * threshold) / (2.0 * k).sqrt();
        let tail_prob = libm::erfc(threshold / std::f64::consts::SQRT_2);
        return tail_exp - tail_prob;
    }
    // The log-integrand (a z + xi)^beta - z^2/2 is eventually decreasing;
    // cut where it has dropped below -60 and is still falling.
    let shift = yf.shift();
    let log_integrand = |z: f64| (a * z + shift).powf(beta) - 0.5 * z * z;
    let slope = |z: f64| a * beta * (a * z + shift).powf(beta - 1.0) - z;
    let mut upper = threshold.max(1.0) * 2.0;
    while !(log_integrand(upper) < -60.0 && slope(upper) < 0.0) {
        upper *= 2.0;
        if upper > 1e8 {
            return f64::INFINITY;
        }
    }
    let f = |z: f64| 2.0 * yf.value(a * z) * phi(z);
    integrate(f, threshold, upper, 64)
}

/// Bisection for `inf { c > 0 : F(c) <= 1 }` with `F` nonincreasing.
/// Returns the upper end of the final bracket, so `F(result) <= 1`.
fn bisect_scale<F>(f: F, initial: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance {tol} must be > 0")));
    }
    let exceeds = |c: f64| {
        let v = f(c);
        v.is_nan() || v > 1.0
    };
    let mut hi = if initial > 0.0 && initial.is_finite() { initial } else { 1.0 };
    let mut doublings = 0;
    while exceeds(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_ITERATIONS {
            return Err(Error::Divergent(format!(
                "expectation exceeds 1 for every scale up to {hi:e}"
            )));
        }
    }
    let mut lo = hi;
    let mut halvings = 0;
    loop {
        lo *= 0.5;
        if exceeds(lo) {
            break;
        }
        hi = lo;
        halvings += 1;
        if halvings > 2000 {
            // F(c) <= 1 for arbitrarily small c: the variable is zero.
            return Ok(0.0);
        }
    }
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= tol * hi {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if exceeds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical {
        message: "bisection did not reach the tolerance".into(),
        iterations: MAX_ITERATIONS,
        lower: lo,
        upper: hi,
    })
}

/// `|| Z ||_{psi_beta} = inf { c > 0 : E psi_beta(|Z| / c) <= 1 }`.
///
/// The result `c*` satisfies `E psi(|Z|/c*) <= 1` and lies within relative
/// distance `tol` of the infimum.
pub fn luxemburg_norm(z: &MarginalSpec, beta: f64, tol: f64) -> Result<f64> {
    z.validate()?;
    let yf = YoungFunctionBeta::new(beta)?;
    if z.is_zero() {
        return Ok(0.0);
    }
    if let MarginalSpec::Gaussian { .. } = z {
        if beta > 2.0 {
            return Err(Error::Divergent(format!(
                "a gaussian has no finite psi_{beta} norm (exponential moment of order {beta} > 2)"
            )));
        }
    }
    bisect_scale(|c| psi_quantile_integral(z, &yf, 1.0, c), z.scale(), tol)
}

/// `c_k(beta) = inf { c > 0 : int_0^alpha psi_beta(Q(u)/c) du <= 1 }`.
pub fn c_k_coefficient(z: &MarginalSpec, alpha: f64, beta: f64, tol: f64) -> Result<f64> {
    z.validate()?;
    let yf = YoungFunctionBeta::new(beta)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if alpha == 0.0 || z.is_zero() {
        return Ok(0.0);
    }
    if let MarginalSpec::Gaussian { .. } = z {
        if beta > 2.0 {
            return Err(Error::Divergent(format!("gaussian quantile integral diverges for beta = {beta}")));
        }
    }
    bisect_scale(|c| psi_quantile_integral(z, &yf, alpha, c), z.scale(), tol)
}

/// `int_0^alpha Q(u)^p du`.
fn quantile_power_integral(z: &MarginalSpec, alpha: f64, p: f64) -> f64 {
    match z {
        MarginalSpec::PointMass { mass } => alpha * mass.powf(p),
        MarginalSpec::Uniform { half_width } => {
            half_width.powf(p) * (1.0 - (1.0 - alpha).powf(p + 1.0)) / (p + 1.0)
        }
        MarginalSpec::Gaussian { sigma } => {
            // E[|Z|^p; |Z| > T] = sigma^p 2^(p/2) Gamma((p+1)/2) / sqrt(pi) * Q((p+1)/2, T^2 / (2 sigma^2)).
            let s = 0.5 * (p + 1.0);
            let full = (p * sigma.ln() + 0.5 * p * 2f64.ln() + ln_gamma(s) - 0.5 * std::f64::consts::PI.ln()).exp();
            if alpha >= 1.0 {
                return full;
            }
            let t = quantile_q(z, alpha);
            full * gamma_ur(s, t * t / (2.0 * sigma * sigma))
        }
        MarginalSpec::Empirical { sample } => {
            let sorted = MarginalSpec::sorted_abs(sample);
            let n = sorted.len();
            let nf = n as f64;
            let mut total = 0.0;
            for k in 0..n {
                let lo = k as f64 / nf;
                if lo >= alpha {
                    break;
                }
                let hi = ((k + 1) as f64 / nf).min(alpha);
                total += (hi - lo) * sorted[n - 1 - k].powf(p);
            }
            total
        }
    }
}

/// `d_k(p) = (int_0^alpha Q(u)^p du)^(1/p)`.
pub fn d_k_coefficient(z: &MarginalSpec, alpha: f64, p: f64) -> Result<f64> {
    z.validate()?;
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::domain(format!("p = {p} must be finite and > 2")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let v = quantile_power_integral(z, alpha, p).powf(1.0 / p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical {
            message: format!("quantile integral of order {p} is not finite"),
            iterations: 0,
            lower: 0.0,
            upper: alpha,
        })
    }
}

/// `|| Z ||_p = (E |Z|^p)^(1/p)` for any `p > 0`.
pub fn moment_norm(z: &MarginalSpec, p: f64) -> Result<f64> {
    z.validate()?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain(format!("p = {p} must be finite and > 0")));
    }
    let v = quantile_power_integral(z, 1.0, p).powf(1.0 / p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical { message: format!("moment of order {p} is not finite"), iterations: 0, lower: 0.0, upper: 1.0 })
    }
}

/// Geometric grid of 24 exponents from 2.01 to 64.
pub fn default_p_grid() -> Vec<f64> {
    let (lo, hi, m) = (2.01f64, 64.0f64, 24);
    (0..m).map(|k| lo * (hi / lo).powf(k as f64 / (m - 1) as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub luxemburg: f64,
    /// Max over the grid of `||Z||_p / p^(1/beta)`; a lower bound of the sup over `p > 2`.
    pub moment_sup: f64,
    pub argmax_p: f64,
    /// `luxemburg / moment_sup`, or 0 when both vanish.
    pub ratio: f64,
}

/// Pairs the Luxemburg norm with `sup_p ||Z||_p / p^(1/beta)`. The two are
/// equivalent up to constants depending on `beta` only; no bound on the
/// ratio is asserted.
pub fn norm_equivalence_diag(z: &MarginalSpec, beta: f64, p_grid: &[f64]) -> Result<NormEquivalence> {
    if p_grid.is_empty() || p_grid.iter().any(|&p| !(p > 2.0)) {
        return Err(Error::domain("p grid must be nonempty with every p > 2"));
    }
    let luxemburg = luxemburg_norm(z, beta, 1e-12)?;
    let mut moment_sup = 0.0;
    let mut argmax_p = p_grid[0];
    for &p in p_grid {
        let v = moment_norm(z, p)? / p.powf(1.0 / beta);
        if v > moment_sup {
            moment_sup = v;
            argmax_p = p;
        }
    }
    let ratio = if moment_sup > 0.0 { luxemburg / moment_sup } else { 0.0 };
    Ok(NormEquivalence { luxemburg, moment_sup, argmax_p, ratio })
}
