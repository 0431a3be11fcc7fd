//! Fixed-design kernel regression on `{1,...,n}^d`:
//!
//! ```text
//! g_n(x) = sum_i Y_i a_i(x) / sum_i a_i(x),   a_i(x) = K((x - i/n) / h)
//! ```
//!
//! Every sum only visits the window of sites with `|x - i/n|_inf <= h`,
//! so evaluation costs `O((2nh + 1)^d)` regardless of `n^d`. The window is
//! closed; a site whose scaled offset exceeds one by less than `1e-12`
//! (floating-point noise from forming `(nx - i) / (nh)`) is treated as lying
//! on the edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::lattice::{cube_points, IntBox, LatticeShape};

const EDGE_SNAP: f64 = 1e-12;

/// Smallest covering cube side kept in desk-scale runs.
pub const MIN_COVERING_SIDE: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthSchedule {
    /// `h_n = (n^-d log n)^(1/(2+d))`.
    OptimalAs,
    /// `h_n = n^(-d/(2+d))`.
    OptimalLp,
    /// `h_n = n^-theta2 (log n)^theta1`.
    PowerLog { theta1: f64, theta2: f64 },
    /// The same `h` at every `n`.
    Fixed { h: f64 },
}

impl BandwidthSchedule {
    pub fn bandwidth(&self, n: usize, d: usize) -> f64 {
        let nf = n as f64;
        let df = d as f64;
        match *self {
            BandwidthSchedule::OptimalAs => (nf.powf(-df) * nf.ln()).powf(1.0 / (2.0 + df)),
            BandwidthSchedule::OptimalLp => nf.powf(-df / (2.0 + df)),
            BandwidthSchedule::PowerLog { theta1, theta2 } => nf.powf(-theta2) * nf.ln().powf(theta1),
            BandwidthSchedule::Fixed { h } => h,
        }
    }

    /// Checks `h_n` in (0,1) and `floor(n h_n) >= 2` at every size, and for
    /// the varying schedules also `h_n` decreasing and `n h_n` increasing.
    pub fn validate(&self, ns: &[usize], d: usize) -> Result<()> {
        if let BandwidthSchedule::PowerLog { theta1, theta2 } = *self {
            if !(theta1 >= 0.0 && theta2 >= 0.0) {
                return Err(Error::config(format!("theta1 = {theta1}, theta2 = {theta2} must be >= 0")));
            }
        }
        let mut prev: Option<(f64, f64)> = None;
        for &n in ns {
            let h = self.bandwidth(n, d);
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::config(format!("bandwidth h = {h} at n = {n} is outside (0, 1)")));
            }
            if ((n as f64) * h).floor() < 2.0 {
                return Err(Error::config(format!("floor(n h) < 2 at n = {n}, h = {h}")));
            }
            if let (Some((ph, pnh)), false) = (prev, matches!(self, BandwidthSchedule::Fixed { .. })) {
                if h >= ph || n as f64 * h <= pnh {
                    return Err(Error::config(format!(
                        "bandwidth schedule must have h_n decreasing and n h_n increasing (violated at n = {n})"
                    )));
                }
            }
            prev = Some((h, n as f64 * h));
        }
        Ok(())
    }
}

/// `(log n)^(1/2) / (n h)^(d/2)`, the almost-sure deviation rate for
/// bounded errors. Equals `(log n / n^d)^(1/(2+d))` for the optimal schedule.
pub fn deviation_rate(n: usize, h: f64, d: usize) -> f64 {
    let nf = n as f64;
    nf.ln().sqrt() / (nf * h).powf(d as f64 / 2.0)
}

/// Regression functions with a known sup-norm Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressionFn {
    Constant { value: f64 },
    /// `intercept + slope * mean_k x_k`.
    Affine {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `scale * |x - center|_inf`.
    Distance { scale: f64, center: Vec<f64> },
    /// `(scale / frequency) * sin(frequency * mean_k x_k)`.
    Sinusoid { scale: f64, frequency: f64 },
}

impl RegressionFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mean = || x.iter().sum::<f64>() / x.len() as f64;
        match self {
            RegressionFn::Constant { value } => *value,
            RegressionFn::Affine { slope, intercept } => intercept + slope * mean(),
            RegressionFn::Distance { scale, center } => {
                scale * x.iter().zip(center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            }
            RegressionFn::Sinusoid { scale, frequency } => scale / frequency * (frequency * mean()).sin(),
        }
    }

    /// Certified Lipschitz constant for the sup norm on `[0,1]^d`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            RegressionFn::Constant { .. } => 0.0,
            RegressionFn::Affine { slope, .. } => slope.abs(),
            RegressionFn::Distance { scale, .. } => scale.abs(),
            RegressionFn::Sinusoid { scale, .. } => scale.abs(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressionFn::Constant { .. } => "constant",
            RegressionFn::Affine { .. } => "affine",
            RegressionFn::Distance { .. } => "distance",
            RegressionFn::Sinusoid { .. } => "sinusoid",
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let finite = match self {
            RegressionFn::Constant { value } => value.is_finite(),
            RegressionFn::Affine { slope, intercept } => slope.is_finite() && intercept.is_finite(),
            RegressionFn::Distance { scale, center } => {
                if center.len() != d {
                    return Err(Error::config(format!("distance center has length {}, expected {d}", center.len())));
                }
                scale.is_finite() && center.iter().all(|c| c.is_finite())
            }
            RegressionFn::Sinusoid { scale, frequency } => {
                scale.is_finite() && frequency.is_finite() && *frequency != 0.0
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::config(format!("regression function {self:?} has invalid parameters")))
        }
    }
}

/// Affine, distance and sinusoid functions, each with Lipschitz constant `b`.
pub fn lipschitz_battery(b: f64, d: usize) -> Vec<RegressionFn> {
    vec![
        RegressionFn::Affine { slope: b, intercept: 0.0 },
        RegressionFn::Distance { scale: b, center: vec![0.3; d] },
        RegressionFn::Sinusoid { scale: b, frequency: 6.0 * std::f64::consts::PI },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueRegression {
    pub function: RegressionFn,
    /// Declared Lipschitz constant `B`, at least the certified one.
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationProblem {
    shape: LatticeShape,
    kernel: KernelSpec,
    h: f64,
    truth: Option<TrueRegression>,
}

/// Lattice sites whose weight at a point is positive, per axis.
struct Window {
    /// For each axis, the admissible `(i_k, u_k)` pairs.
    axes: Vec<Vec<(i64, f64)>>,
}

impl Window {
    fn count(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    fn as_box(&self) -> IntBox {
        IntBox {
            lower: self.axes.iter().map(|a| a.first().map_or(1, |p| p.0)).collect(),
            extent: self.axes.iter().map(Vec::len).collect(),
        }
    }
}

impl EstimationProblem {
    pub fn new(shape: LatticeShape, kernel: KernelSpec, h: f64) -> Result<Self> {
        if kernel.dim() != shape.dim() {
            return Err(Error::config(format!(
                "kernel dimension {} differs from lattice dimension {}",
                kernel.dim(),
                shape.dim()
            )));
        }
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::config(format!("bandwidth {h} must lie in (0, 1)")));
        }
        if (shape.side() as f64 * h).floor() < 2.0 {
            return Err(Error::DegenerateBandwidth(format!(
                "floor(n h) = floor({} * {h}) < 2",
                shape.side()
            )));
        }
        Ok(EstimationProblem { shape, kernel, h, truth: None })
    }

    /// Attaches the true regression `g` with declared Lipschitz constant `b`.
    pub fn with_truth(mut self, function: RegressionFn, b: f64) -> Result<Self> {
        function.validate(self.shape.dim())?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config(format!("Lipschitz constant B = {b} must be > 0")));
        }
        if function.lipschitz() > b {
            return Err(Error::config(format!(
                "declared B = {b} is below the certified constant {} of {}",
                function.lipschitz(),
                function.name()
            )));
        }
        self.truth = Some(TrueRegression { function, lipschitz: b });
        Ok(self)
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn truth(&self) -> Option<&TrueRegression> {
        self.truth.as_ref()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.shape.dim() {
            return Err(Error::domain(format!("point has {} coordinates, expected {}", x.len(), self.shape.dim())));
        }
        if x.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::domain(format!("point {x:?} is outside [0,1]^d")));
        }
        Ok(())
    }

    /// Scaled offset `(x_k - i_k/n) / h`, snapped onto `+-1` within `EDGE_SNAP`.
    fn scaled_offset(&self, xk: f64, ik: i64) -> f64 {
        let n = self.shape.side() as f64;
        let u = (n * xk - ik as f64) / (n * self.h);
        if u.abs() > 1.0 && u.abs() <= 1.0 + EDGE_SNAP {
            u.signum()
        } else {
            u
        }
    }

    fn window(&self, x: &[f64]) -> Window {
        let n = self.shape.side() as i64;
        let nf = n as f64;
        let axes = x
            .iter()
            .map(|&xk| {
                let lo = ((nf * (xk - self.h)).floor() as i64 - 1).max(1);
                let hi = ((nf * (xk + self.h)).ceil() as i64 + 1).min(n);
                (lo..=hi)
                    .filter_map(|ik| {
                        let u = self.scaled_offset(xk, ik);
                        (u.abs() <= 1.0).then_some((ik, u))
                    })
                    .collect()
            })
            .collect();
        Window { axes }
    }

    /// Visits every site of the window with its multi-index, flat lattice
    /// position and weight `a_i(x)`, in lexicographic order.
    pub fn for_each_weight<F>(&self, x: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(&[i64], usize, f64),
    {
        self.check_point(x)?;
        let window = self.window(x);
        let count = window.count();
        if count == 0 {
            return Err(Error::DegenerateBandwidth(format!("no lattice site within h of {x:?}")));
        }
        let d = x.len();
        let n = self.shape.side();
        let mut pos = vec![0usize; d];
        let mut idx = vec![0i64; d];
        let mut u = vec![0.0; d];
        for _ in 0..count {
            let mut flat = 0usize;
            for k in 0..d {
                let (ik, uk) = window.axes[k][pos[k]];
                idx[k] = ik;
                u[k] = uk;
                flat = flat * n + (ik - 1) as usize;
            }
            visit(&idx, flat, self.kernel.eval(&u));
            for k in (0..d).rev() {
                pos[k] += 1;
                if pos[k] < window.axes[k].len() {
                    break;
                }
                pos[k] = 0;
            }
        }
        Ok(())
    }

    /// `a_i(x)` for a 1-based lattice index `i`.
    pub fn weight(&self, x: &[f64], i: &[i64]) -> Result<f64> {
        self.check_point(x)?;
        if self.shape.flat_index(i).is_none() {
            return Err(Error::domain(format!("index {i:?} is outside the lattice")));
        }
        let u: Vec<f64> = x.iter().zip(i).map(|(&xk, &ik)| self.scaled_offset(xk, ik)).collect();
        Ok(self.kernel.eval(&u))
    }

    /// `sum_i a_i(x)`.
    pub fn weight_sum(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        self.for_each_weight(x, |_, _, w| total += w)?;
        Ok(total)
    }

    /// `(sum_i a_i(x), sum_i a_i(x) y_i)` for values in flat order.
    pub fn weighted_sums(&self, y: &[f64], x: &[f64]) -> Result<(f64, f64)> {
        if y.len() != self.shape.len() {
            return Err(Error::domain(format!("expected {} values, got {}", self.shape.len(), y.len())));
        }
        let (mut sw, mut swy) = (0.0, 0.0);
        self.for_each_weight(x, |_, flat, w| {
            sw += w;
            swy += w * y[flat];
        })?;
        Ok((sw, swy))
    }

    /// `g_n(x)` for observations `y` in flat order.
    pub fn estimate(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        let (sw, swy) = self.weighted_sums(y, x)?;
        Ok(swy / sw)
    }

    fn require_truth(&self) -> Result<&TrueRegression> {
        self.truth
            .as_ref()
            .ok_or_else(|| Error::config("expected estimate needs the true regression function"))
    }

    /// `E g_n(x) = sum_i a_i(x) g(i/n) / sum_i a_i(x)`, exact since `E eps = 0`.
    pub fn expected_estimate(&self, x: &[f64]) -> Result<f64> {
        let g = &self.require_truth()?.function;
        let n = self.shape.side() as f64;
        let (mut sw, mut swg) = (0.0, 0.0);
        let mut site = vec![0.0; x.len()];
        self.for_each_weight(x, |i, _, w| {
            for (s, &ik) in site.iter_mut().zip(i) {
                *s = ik as f64 / n;
            }
            sw += w;
            swg += w * g.eval(&site);
        })?;
        Ok(swg / sw)
    }

    /// `E g_n(x) - g(x)`.
    pub fn bias(&self, x: &[f64]) -> Result<f64> {
        let g = &self.require_truth()?.function;
        Ok(self.expected_estimate(x)? - g.eval(x))
    }

    /// Lattice observations `Y_i = g(i/n) + eps_i` in flat order.
    pub fn observations(&self, errors: &[f64]) -> Result<Vec<f64>> {
        let g = &self.require_truth()?.function;
        if errors.len() != self.shape.len() {
            return Err(Error::domain(format!("expected {} errors, got {}", self.shape.len(), errors.len())));
        }
        let n = self.shape.side() as f64;
        Ok(self
            .shape
            .indices()
            .zip(errors)
            .map(|(i, e)| {
                let site: Vec<f64> = i.iter().map(|&c| c as f64 / n).collect();
                g.eval(&site) + e
            })
            .collect())
    }

    /// Exact `E S_n(x)^2 = sum_{k,l} a_k a_l cov(l - k)` for a covariance
    /// vanishing beyond sup-norm lag `radius`.
    pub fn stochastic_second_moment<C>(&self, x: &[f64], covariance: C, radius: i64) -> Result<f64>
    where
        C: Fn(&[i64]) -> f64,
    {
        self.check_point(x)?;
        let window = self.window(x);
        let bx = window.as_box();
        let mut weights = vec![0.0; bx.len()];
        let mut sites = Vec::with_capacity(bx.len());
        self.for_each_weight(x, |i, _, w| {
            weights[bx.flat(i)] = w;
            sites.push((i.to_vec(), w));
        })?;
        let lags = cube_points(x.len(), radius);
        let covs: Vec<f64> = lags.iter().map(|l| covariance(l)).collect();
        let mut total = 0.0;
        let mut other = vec![0i64; x.len()];
        for (k, wk) in &sites {
            for (lag, c) in lags.iter().zip(&covs) {
                if *c == 0.0 {
                    continue;
                }
                let mut inside = true;
                for q in 0..x.len() {
                    other[q] = k[q] + lag[q];
                    let rel = other[q] - bx.lower[q];
                    inside &= rel >= 0 && (rel as usize) < bx.extent[q];
                }
                if inside {
                    total += wk * weights[bx.flat(&other)] * c;
                }
            }
        }
        Ok(total)
    }

    /// The weight-sum bounds at `x`.
    pub fn weight_envelope(&self, x: &[f64]) -> Result<WeightEnvelope> {
        let sum = self.weight_sum(x)?;
        let n = self.shape.side() as f64;
        let d = x.len() as i32;
        let m = (n * self.h).floor();
        let product_count: f64 = x
            .iter()
            .map(|&xk| (n * (xk + self.h) + EDGE_SNAP * n).floor().min(n))
            .product();
        Ok(WeightEnvelope {
            sum,
            lower: self.kernel.lower() * (m - 1.0).powi(d),
            upper: self.kernel.upper() * (2.0 * m + 2.0).powi(d),
            product_upper: self.kernel.upper() * product_count,
            product_lower: self.kernel.lower() * product_count,
        })
    }

    /// `sup_x |g_n(x) - E g_n(x)|` over the grid.
    pub fn sup_deviation(&self, y: &[f64], grid: &EvalGrid) -> Result<SupReport> {
        self.require_truth()?;
        grid.check_dim(self.shape.dim())?;
        let mut best = SupReport { sup: 0.0, argmax: grid.point(0), points: grid.len() };
        for p in 0..grid.len() {
            let x = grid.point(p);
            let v = (self.estimate(y, &x)? - self.expected_estimate(&x)?).abs();
            if v > best.sup {
                best.sup = v;
                best.argmax = x;
            }
        }
        Ok(best)
    }

    /// Splits the fine-grid sup deviation through the covering cubes:
    /// `|V(x)| <= |g_n(x) - g_n(c)| + |E g_n(x) - E g_n(c)| + |V(c)|`
    /// where `c` is the center of the cube containing `x`.
    pub fn sup_decomposition(&self, y: &[f64], fine: &EvalGrid, covering: &EvalGrid) -> Result<Decomposition> {
        self.require_truth()?;
        fine.check_dim(self.shape.dim())?;
        let cells = match covering {
            EvalGrid::Covering { cells_per_axis, d } if *d == self.shape.dim() => *cells_per_axis,
            _ => return Err(Error::config("decomposition needs a covering grid of matching dimension")),
        };
        let mut centers: Vec<Option<(f64, f64)>> = vec![None; covering.len()];
        let mut out = Decomposition { a1: 0.0, a2: 0.0, a3: 0.0, fine_sup: 0.0, cubes: covering.len() };
        for p in 0..fine.len() {
            let x = fine.point(p);
            let cube = x.iter().fold(0usize, |acc, &c| {
                acc * cells + ((c * cells as f64).floor() as usize).min(cells - 1)
            });
            let (gc, ec) = match centers[cube] {
                Some(v) => v,
                None => {
                    let c = covering.point(cube);
                    let v = (self.estimate(y, &c)?, self.expected_estimate(&c)?);
                    centers[cube] = Some(v);
                    v
                }
            };
            let gx = self.estimate(y, &x)?;
            let ex = self.expected_estimate(&x)?;
            out.fine_sup = out.fine_sup.max((gx - ex).abs());
            out.a1 = out.a1.max((gx - gc).abs());
            out.a2 = out.a2.max((ex - ec).abs());
        }
        for (p, cached) in centers.iter().enumerate() {
            let (gc, ec) = match *cached {
                Some(v) => v,
                None => {
                    let c = covering.point(p);
                    (self.estimate(y, &c)?, self.expected_estimate(&c)?)
                }
            };
            out.a3 = out.a3.max((gc - ec).abs());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEnvelope {
    pub sum: f64,
    /// `c (floor(nh) - 1)^d`.
    pub lower: f64,
    /// `C (2 floor(nh) + 2)^d`.
    pub upper: f64,
    /// `C prod_k floor(n (x_k + h))`.
    pub product_upper: f64,
    /// `c prod_k floor(n (x_k + h))`; fails near the upper boundary.
    pub product_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupReport {
    pub sup: f64,
    pub argmax: Vec<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Max over fine points of `|g_n(x) - g_n(c(x))|`.
    pub a1: f64,
    /// Max over fine points of `|E g_n(x) - E g_n(c(x))|`.
    pub a2: f64,
    /// Max over cube centers of `|g_n(c) - E g_n(c)|`.
    pub a3: f64,
    pub fine_sup: f64,
    pub cubes: usize,
}

/// Evaluation points in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalGrid {
    /// `{0, 1/m, ..., 1}^d` with `m = divisions`.
    Uniform { divisions: usize, d: usize },
    /// Centers of the `cells_per_axis^d` cubes tiling `[0,1]^d`.
    Covering { cells_per_axis: usize, d: usize },
}

impl EvalGrid {
    pub fn uniform(divisions: usize, d: usize) -> Result<Self> {
        if divisions == 0 || d == 0 {
            return Err(Error::config("uniform grid needs divisions >= 1 and d >= 1"));
        }
        let grid = EvalGrid::Uniform { divisions, d };
        grid.check_size()?;
        Ok(grid)
    }

    /// Uniform grid with spacing at most `delta`.
    pub fn with_spacing(delta: f64, d: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::config(format!("grid spacing {delta} must be > 0")));
        }
        Self::uniform((1.0 / delta).ceil() as usize, d)
    }

    fn per_axis(&self) -> (usize, usize) {
        match *self {
            EvalGrid::Uniform { divisions, d } => (divisions + 1, d),
            EvalGrid::Covering { cells_per_axis, d } => (cells_per_axis, d),
        }
    }

    fn check_size(&self) -> Result<()> {
        let (m, d) = self.per_axis();
        m.checked_pow(d as u32)
            .filter(|&t| t <= 1 << 28)
            .map(|_| ())
            .ok_or_else(|| Error::Capacity(format!("grid with {m}^{d} points is too large")))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.per_axis().1 != d {
            return Err(Error::config(format!("grid dimension {} differs from {d}", self.per_axis().1)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        let (m, d) = self.per_axis();
        m.pow(d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.per_axis().1
    }

    /// Coordinate of the `j`-th point along an axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        match *self {
            EvalGrid::Uniform { divisions, .. } => j as f64 / divisions as f64,
            EvalGrid::Covering { cells_per_axis, .. } => (j as f64 + 0.5) / cells_per_axis as f64,
        }
    }

    /// The `p`-th point in lexicographic order.
    pub fn point(&self, mut p: usize) -> Vec<f64> {
        let (m, d) = self.per_axis();
        let mut x = vec![0.0; d];
        for slot in x.iter_mut().rev() {
            *slot = self.coordinate(p % m);
            p /= m;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |p| self.point(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringPlan {
    /// `l_n = v_n h^(2d+1)` before flooring.
    pub requested_side: f64,
    /// Side actually used, `1 / cells_per_axis`.
    pub side: f64,
    pub cells_per_axis: usize,
    pub cubes: usize,
    /// Whether `max_cubes` reduced the cube count.
    pub capped: bool,
}

/// Covering of `[0,1]^d` by cubes of side `l_n = rate * h^(2d+1)`, floored
/// at [`MIN_COVERING_SIDE`] and limited to `max_cubes` cubes.
pub fn covering(rate: f64, h: f64, d: usize, max_cubes: usize) -> Result<(EvalGrid, CoveringPlan)> {
    if !(rate > 0.0 && h > 0.0) || d == 0 || max_cubes == 0 {
        return Err(Error::config("covering needs rate > 0, h > 0, d >= 1, max_cubes >= 1"));
    }
    let requested_side = rate * h.powi(2 * d as i32 + 1);
    let side = requested_side.clamp(MIN_COVERING_SIDE, 1.0);
    let mut cells = (1.0 / side).ceil() as usize;
    let mut capped = false;
    let cap_per_axis = (max_cubes as f64).powf(1.0 / d as f64).floor().max(1.0) as usize;
    if cells > cap_per_axis {
        cells = cap_per_axis;
        capped = true;
    }
    let grid = EvalGrid::Covering { cells_per_axis: cells, d };
    let plan = CoveringPlan {
        requested_side,
        side: 1.0 / cells as f64,
        cells_per_axis: cells,
        cubes: grid.len(),
        capped,
    };
    Ok((grid, plan))
}
