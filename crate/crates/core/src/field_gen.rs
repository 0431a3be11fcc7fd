//! Stationary zero-mean error fields on `{1,...,n}^d`.
//!
//! Three families are shipped, each a finite-range functional of an iid
//! innovation field `xi`:
//!
//! * `Iid`: `eps_i = xi_i`;
//! * `Linear`: `eps_i = sum_j a_j xi_{i-j}` over a finite coefficient table;
//! * `MdNeighbor`: `eps_i = xi_i * f(xi_{i-e1})` with a bounded link `f`,
//!   a martingale difference for the lexicographic past.
//!
//! Because every family depends on finitely many innovations, each is
//! m-dependent and therefore ergodic, which the almost-sure rate arguments
//! rely on even though ergodicity is not listed among their hypotheses.
//!
//! Innovations live on a box padded just enough that every site of the
//! lattice sees its full neighbourhood, so the returned field is exactly
//! stationary. The innovation at padded position `p` is drawn from a
//! generator keyed by `(seed, p)`, which makes generation order-free.

use rand::RngExt;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{checked_box_size, sup_norm, IntBox, LatticeShape};
use crate::numeric::{gaussian_expectation, integrate};
use crate::rng::counter_rng;

/// Law of the iid innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnovationLaw {
    Gaussian {
        #[serde(default)]
        mean: f64,
        sigma: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Rademacher,
}

impl InnovationLaw {
    pub fn gaussian(sigma: f64) -> Self {
        InnovationLaw::Gaussian { mean: 0.0, sigma }
    }

    pub fn uniform(half_width: f64) -> Self {
        InnovationLaw::Uniform { low: -half_width, high: half_width }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationLaw::Gaussian { mean, sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(Error::validation(format!("gaussian sigma {sigma} must be finite and >= 0")));
                }
                if mean != 0.0 {
                    return Err(Error::validation(format!("innovation mean {mean} is not zero")));
                }
            }
            InnovationLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    return Err(Error::validation(format!("uniform bounds [{low}, {high}] are invalid")));
                }
                let mean = 0.5 * (low + high);
                if mean.abs() > 1e-12 * (high - low).max(1.0) {
                    return Err(Error::validation(format!("innovation mean {mean} is not zero")));
                }
            }
            InnovationLaw::Rademacher => {}
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InnovationLaw::Gaussian { sigma, .. } => sigma * sigma,
            InnovationLaw::Uniform { low, high } => (high - low).powi(2) / 12.0,
            InnovationLaw::Rademacher => 1.0,
        }
    }

    /// Almost-sure bound on `|xi|`, or `None` for unbounded laws.
    pub fn abs_bound(&self) -> Option<f64> {
        match *self {
            InnovationLaw::Gaussian { sigma, .. } => (sigma == 0.0).then_some(0.0),
            InnovationLaw::Uniform { low, high } => Some(low.abs().max(high.abs())),
            InnovationLaw::Rademacher => Some(1.0),
        }
    }

    /// `E f(xi)` by closed form or quadrature.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match *self {
            InnovationLaw::Gaussian { mean, sigma } => gaussian_expectation(f, mean, sigma),
            InnovationLaw::Uniform { low, high } => {
                if high == low {
                    f(low)
                } else {
                    integrate(&f, low, high, 16) / (high - low)
                }
            }
            InnovationLaw::Rademacher => 0.5 * (f(1.0) + f(-1.0)),
        }
    }

    fn sample<R: rand::Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            InnovationLaw::Gaussian { mean, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
            InnovationLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            InnovationLaw::Rademacher => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Bounded link for the martingale-difference family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkFunction {
    /// `sign(x)` with `sign(0) = 0`.
    Sign,
    Tanh,
    /// `min(|x|, bound)`.
    ClippedAbs { bound: f64 },
}

impl LinkFunction {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            LinkFunction::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LinkFunction::Tanh => x.tanh(),
            LinkFunction::ClippedAbs { bound } => x.abs().min(bound),
        }
    }

    /// `sup |f|`.
    pub fn bound(&self) -> f64 {
        match *self {
            LinkFunction::Sign | LinkFunction::Tanh => 1.0,
            LinkFunction::ClippedAbs { bound } => bound,
        }
    }

    fn validate(&self) -> Result<()> {
        if let LinkFunction::ClippedAbs { bound } = *self {
            if !(bound.is_finite() && bound > 0.0) {
                return Err(Error::validation(format!("link bound {bound} must be finite and > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearCoefficient {
    pub offset: Vec<i64>,
    pub value: f64,
}

impl LinearCoefficient {
    pub fn new(offset: Vec<i64>, value: f64) -> Self {
        LinearCoefficient { offset, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Iid {
        innovation: InnovationLaw,
    },
    Linear {
        innovation: InnovationLaw,
        coefficients: Vec<LinearCoefficient>,
    },
    MdNeighbor {
        innovation: InnovationLaw,
        link: LinkFunction,
    },
}

impl GeneratorSpec {
    /// One-dimensional `Linear` spec from coefficients `a_0, a_1, ...`.
    pub fn linear_1d(innovation: InnovationLaw, coefficients: &[f64]) -> Self {
        GeneratorSpec::Linear {
            innovation,
            coefficients: coefficients
                .iter()
                .enumerate()
                .map(|(j, &a)| LinearCoefficient::new(vec![j as i64], a))
                .collect(),
        }
    }

    pub fn innovation(&self) -> &InnovationLaw {
        match self {
            GeneratorSpec::Iid { innovation }
            | GeneratorSpec::Linear { innovation, .. }
            | GeneratorSpec::MdNeighbor { innovation, .. } => innovation,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Iid { .. } => "iid",
            GeneratorSpec::Linear { .. } => "linear",
            GeneratorSpec::MdNeighbor { .. } => "md_neighbor",
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.innovation().validate()?;
        match self {
            GeneratorSpec::Iid { .. } => {}
            GeneratorSpec::Linear { coefficients, .. } => {
                if coefficients.is_empty() {
                    return Err(Error::validation("linear coefficient table is empty"));
                }
                for (k, c) in coefficients.iter().enumerate() {
                    if c.offset.len() != d {
                        return Err(Error::validation(format!(
                            "coefficient offset {:?} has length {}, expected {d}",
                            c.offset,
                            c.offset.len()
                        )));
                    }
                    if !c.value.is_finite() {
                        return Err(Error::validation(format!("coefficient {:?} is not finite", c.offset)));
                    }
                    if coefficients[..k].iter().any(|o| o.offset == c.offset) {
                        return Err(Error::validation(format!("duplicate coefficient offset {:?}", c.offset)));
                    }
                }
            }
            GeneratorSpec::MdNeighbor { link, .. } => link.validate()?,
        }
        Ok(())
    }

    /// Innovation offsets `j` such that `eps_i` is a function of `xi_{i-j}`.
    pub fn offsets(&self, d: usize) -> Vec<Vec<i64>> {
        match self {
            GeneratorSpec::Iid { .. } => vec![vec![0; d]],
            GeneratorSpec::Linear { coefficients, .. } => {
                coefficients.iter().map(|c| c.offset.clone()).collect()
            }
            GeneratorSpec::MdNeighbor { .. } => {
                let mut e1 = vec![0; d];
                e1[0] = 1;
                vec![vec![0; d], e1]
            }
        }
    }

    /// Sites farther apart than this (sup norm) depend on disjoint sets of
    /// innovations and are therefore independent.
    pub fn dependence_radius(&self, d: usize) -> i64 {
        let offsets = self.offsets(d);
        let mut radius = 0;
        for a in &offsets {
            for b in &offsets {
                let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                radius = radius.max(sup_norm(&diff));
            }
        }
        radius
    }

    /// `Var(eps_0)`.
    pub fn variance(&self) -> f64 {
        let v = self.innovation().variance();
        match self {
            GeneratorSpec::Iid { .. } => v,
            GeneratorSpec::Linear { coefficients, .. } => {
                v * coefficients.iter().map(|c| c.value * c.value).sum::<f64>()
            }
            GeneratorSpec::MdNeighbor { innovation, link } => {
                v * innovation.expect(|x| link.apply(x).powi(2))
            }
        }
    }

    /// Almost-sure bound on `|eps_0|`, or `None` when unbounded.
    pub fn abs_bound(&self) -> Option<f64> {
        let m = self.innovation().abs_bound()?;
        Some(match self {
            GeneratorSpec::Iid { .. } => m,
            GeneratorSpec::Linear { coefficients, .. } => {
                m * coefficients.iter().map(|c| c.value.abs()).sum::<f64>()
            }
            GeneratorSpec::MdNeighbor { link, .. } => m * link.bound(),
        })
    }
}

/// Innovations on the padded box, exposed so that callers can check the
/// field against an independent convolution.
#[derive(Debug, Clone)]
pub struct PaddedInnovations {
    lower: Vec<i64>,
    extent: Vec<usize>,
    values: Vec<f64>,
}

impl PaddedInnovations {
    /// Smallest padded coordinate on each axis.
    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    /// Innovation at absolute lattice position `p`, if inside the box.
    pub fn get(&self, p: &[i64]) -> Option<f64> {
        let inside = p.iter().enumerate().all(|(k, &c)| {
            c >= self.lower[k] && c < self.lower[k] + self.extent[k] as i64
        });
        inside.then(|| self.values[self.as_box().flat(p)])
    }

    fn as_box(&self) -> IntBox {
        IntBox { lower: self.lower.clone(), extent: self.extent.clone() }
    }
}

/// Draws the innovations on the padded box for `(spec, shape, seed)`.
pub fn innovations(spec: &GeneratorSpec, shape: LatticeShape, seed: u64) -> Result<PaddedInnovations> {
    let d = shape.dim();
    spec.validate(d)?;
    let offsets = spec.offsets(d);
    let n = shape.side();
    let mut lower = vec![1i64; d];
    let mut extent = vec![n; d];
    for k in 0..d {
        let below = offsets.iter().map(|o| o[k]).max().unwrap_or(0).max(0);
        let above = offsets.iter().map(|o| -o[k]).max().unwrap_or(0).max(0);
        lower[k] = 1 - below;
        extent[k] = n + (below + above) as usize;
    }
    let total = checked_box_size(&extent)?;
    let law = spec.innovation().clone();
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|f| law.sample(&mut counter_rng(seed, f as u64)))
        .collect();
    Ok(PaddedInnovations { lower, extent, values })
}

/// A realized error field on `{1,...,n}^d`, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    shape: LatticeShape,
    values: Vec<f64>,
    spec: GeneratorSpec,
    seed: u64,
}

impl FieldSample {
    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    /// Values in flat (lexicographic) order; see [`LatticeShape::flat_index`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Value at the 1-based multi-index `i`.
    pub fn at(&self, i: &[i64]) -> Option<f64> {
        self.shape.flat_index(i).map(|f| self.values[f])
    }
}

/// Realizes the field for `(spec, shape, seed)`; a pure function of its inputs.
pub fn generate(spec: &GeneratorSpec, shape: LatticeShape, seed: u64) -> Result<FieldSample> {
    let xi = innovations(spec, shape, seed)?;
    let d = shape.dim();
    let padded = xi.as_box();
    let e1 = {
        let mut v = vec![0i64; d];
        v[0] = 1;
        v
    };
    let site_value = |flat: usize| -> f64 {
        let i = shape.multi_index(flat);
        let at = |offset: &[i64]| {
            let p: Vec<i64> = i.iter().zip(offset).map(|(a, b)| a - b).collect();
            xi.values[padded.flat(&p)]
        };
        match spec {
            GeneratorSpec::Iid { .. } => at(&vec![0; d]),
            GeneratorSpec::Linear { coefficients, .. } => {
                coefficients.iter().map(|c| c.value * at(&c.offset)).sum()
            }
            GeneratorSpec::MdNeighbor { link, .. } => at(&vec![0; d]) * link.apply(at(&e1)),
        }
    };
    let values: Vec<f64> = (0..shape.len()).into_par_iter().map(site_value).collect();
    Ok(FieldSample { shape, values, spec: spec.clone(), seed })
}

/// Exact `E(eps_0 eps_lag)`.
///
/// Distinct sites of the martingale-difference family are uncorrelated: the
/// later site has zero conditional mean given the lexicographic past.
pub fn theoretical_covariance(spec: &GeneratorSpec, lag: &[i64]) -> f64 {
    let at_zero = lag.iter().all(|&c| c == 0);
    match spec {
        GeneratorSpec::Iid { .. } | GeneratorSpec::MdNeighbor { .. } => {
            if at_zero {
                spec.variance()
            } else {
                0.0
            }
        }
        GeneratorSpec::Linear { innovation, coefficients } => {
            // eps_0 eps_lag pairs xi_{-j} with xi_{lag-j'}: equal when j' = j + lag.
            let mut acc = 0.0;
            for a in coefficients {
                let target: Vec<i64> = a.offset.iter().zip(lag).map(|(x, y)| x + y).collect();
                if let Some(b) = coefficients.iter().find(|b| b.offset == target) {
                    acc += a.value * b.value;
                }
            }
            innovation.variance() * acc
        }
    }
}
