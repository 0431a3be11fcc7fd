//! Probability kernels on `[-1,1]^d` that are bounded below on their support.
//!
//! Both shipped kernels have the form `K(u) = (a + b * prod_k (1 - |u_k|)) / Z`
//! on the closed box, zero outside. `Uniform` is the case `b = 0`. The
//! tent factor has integral one over the box, so `Z = a 2^d + b`.
//!
//! The Lipschitz requirement only applies inside the box: the jump to zero
//! at the boundary is allowed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelVariant {
    Uniform,
    Pedestal { height: f64, tent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    variant: KernelVariant,
    d: usize,
    lower: f64,
    upper: f64,
    lipschitz: f64,
    normalizer: f64,
}

impl KernelSpec {
    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(KernelVariant::Uniform, d)
    }

    pub fn pedestal(d: usize, height: f64, tent: f64) -> Result<Self> {
        Self::new(KernelVariant::Pedestal { height, tent }, d)
    }

    /// Builds the kernel with its certified constants.
    pub fn new(variant: KernelVariant, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("kernel dimension must be at least 1"));
        }
        let (a, b) = match variant {
            KernelVariant::Uniform => (1.0, 0.0),
            KernelVariant::Pedestal { height, tent } => {
                if !(height.is_finite() && height > 0.0) {
                    return Err(Error::validation(format!("pedestal height {height} must be > 0")));
                }
                if !(tent.is_finite() && tent >= 0.0) {
                    return Err(Error::validation(format!("tent weight {tent} must be >= 0")));
                }
                (height, tent)
            }
        };
        let normalizer = a * 2f64.powi(d as i32) + b;
        Ok(KernelSpec {
            variant,
            d,
            lower: a / normalizer,
            upper: (a + b) / normalizer,
            // Product of d tents is d-Lipschitz in the sup norm.
            lipschitz: b * d as f64 / normalizer,
            normalizer,
        })
    }

    /// Replaces the certified constants with declared ones; used to check
    /// that [`verify_a1`] rejects a misdeclared kernel.
    pub fn with_declared_constants(mut self, lower: f64, upper: f64, lipschitz: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self.lipschitz = lipschitz;
        self
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Lower bound `c` on the support.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper bound `C` on the support.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Lipschitz constant `eta` w.r.t. the sup norm, on the support.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// `K(u)`; zero as soon as some `|u_j| > 1`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.d);
        if u.iter().any(|c| c.abs() > 1.0) {
            return 0.0;
        }
        match self.variant {
            KernelVariant::Uniform => 1.0 / self.normalizer,
            KernelVariant::Pedestal { height, tent } => {
                let prod: f64 = u.iter().map(|c| 1.0 - c.abs()).product();
                (height + tent * prod) / self.normalizer
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub min: f64,
    pub max: f64,
    pub lipschitz_quotient: f64,
    pub integral: f64,
    pub integral_error_bound: f64,
    pub pass: bool,
}

const A1_TOL: f64 = 1e-12;

/// Numerically certifies the kernel constants on the grid
/// `{-1, -1 + 1/r, ..., 1}^d` (`(2r+1)^d` points).
pub fn verify_a1(kernel: &KernelSpec, resolution: usize) -> Result<A1Report> {
    if resolution < 8 {
        return Err(Error::domain(format!("resolution {resolution} must be at least 8")));
    }
    let d = kernel.dim();
    let side = 2 * resolution + 1;
    let total = side
        .checked_pow(d as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| Error::Capacity(format!("A1 grid {side}^{d} is too large")))?;
    let step = 1.0 / resolution as f64;
    let coord = |j: usize| -1.0 + j as f64 * step;

    let mut values = Vec::with_capacity(total);
    let mut u = vec![0.0; d];
    let mut weights = Vec::with_capacity(total);
    for f in 0..total {
        let mut rem = f;
        let mut w = 1.0;
        for k in (0..d).rev() {
            let j = rem % side;
            rem /= side;
            u[k] = coord(j);
            // Trapezoid weights per axis.
            w *= if j == 0 || j == side - 1 { 0.5 * step } else { step };
        }
        values.push(kernel.eval(&u));
        weights.push(w);
    }

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let integral: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();

    let mut quotient = 0.0f64;
    let mut stride = 1;
    for _axis in (0..d).rev() {
        for f in 0..total {
            if (f / stride) % side + 1 < side {
                let q = (values[f + stride] - values[f]).abs() / step;
                quotient = quotient.max(q);
            }
        }
        stride *= side;
    }

    let integral_error_bound = kernel.lipschitz() * 2f64.powi(d as i32) * step + A1_TOL;
    let pass = min >= kernel.lower() - A1_TOL
        && max <= kernel.upper() + A1_TOL
        && quotient <= kernel.lipschitz() + A1_TOL
        && (integral - 1.0).abs() <= integral_error_bound;
    Ok(A1Report { min, max, lipschitz_quotient: quotient, integral, integral_error_bound, pass })
}
