//! Lexicographic order on `Z^d`, mixing profiles of the shipped generators and
//! certified checkers for the projective (C1 to C4) and mixing (C'1 to C'3)
//! conditions.
//!
//! Every shipped field is a finite-range functional of iid innovations, so
//! sites farther apart than the dependence radius `m` are independent. Sums
//! over `Z^d` are therefore truncated at `m` without loss; terms inside the
//! radius are either exactly zero by model structure or bounded analytically.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_gen::{theoretical_covariance, GeneratorSpec, InnovationLaw};
use crate::lattice::{cube_points, sup_norm};
use crate::orlicz::{beta_of_q, c_k_coefficient, d_k_coefficient, luxemburg_norm, moment_norm, MarginalSpec};

/// Trivial bound on any alpha-mixing coefficient.
pub const ALPHA_TRIVIAL: f64 = 0.25;
/// Trivial bound on any phi-mixing coefficient.
pub const PHI_TRIVIAL: f64 = 1.0;

/// Lexicographic comparison with the first coordinate most significant.
pub fn lex_compare(i: &[i64], j: &[i64]) -> Result<Ordering> {
    if i.len() != j.len() {
        return Err(Error::domain(format!("cannot compare vectors of lengths {} and {}", i.len(), j.len())));
    }
    Ok(i.cmp(j))
}

/// Membership of `j` in `V_i^k`: the strict lexicographic past of `i`
/// restricted to sites at sup-norm distance at least `k`.
pub fn v_set_contains(i: &[i64], k: u64, j: &[i64]) -> Result<bool> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if lex_compare(j, i)? != Ordering::Less {
        return Ok(false);
    }
    let diff: Vec<i64> = i.iter().zip(j).map(|(a, b)| a - b).collect();
    Ok(k == 1 || sup_norm(&diff) as u64 >= k)
}

/// A mixing coefficient value and whether it is exact or only a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingValue {
    pub value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile {
    pub model: String,
    pub radius: i64,
}

impl MixingProfile {
    /// `alpha_{1,inf}(r)`: exactly 0 beyond the radius, else the trivial bound.
    pub fn alpha_1_inf(&self, r: i64) -> MixingValue {
        self.coefficient(r, ALPHA_TRIVIAL)
    }

    /// `phi_{inf,1}(r)`: exactly 0 beyond the radius, else the trivial bound.
    pub fn phi_inf_1(&self, r: i64) -> MixingValue {
        self.coefficient(r, PHI_TRIVIAL)
    }

    fn coefficient(&self, r: i64, trivial: f64) -> MixingValue {
        if r > self.radius {
            MixingValue { value: 0.0, exact: true }
        } else {
            MixingValue { value: trivial, exact: false }
        }
    }
}

pub fn mixing_profile(spec: &GeneratorSpec, d: usize) -> Result<MixingProfile> {
    spec.validate(d)?;
    Ok(MixingProfile { model: spec.name().to_string(), radius: spec.dependence_radius(d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    C1,
    C2,
    C3,
    C4,
    #[serde(rename = "C'1")]
    C1Mixing,
    #[serde(rename = "C'2")]
    C2Mixing,
    #[serde(rename = "C'3")]
    C3Mixing,
}

impl ConditionId {
    pub const ALL: [ConditionId; 7] = [
        ConditionId::C1,
        ConditionId::C2,
        ConditionId::C3,
        ConditionId::C4,
        ConditionId::C1Mixing,
        ConditionId::C2Mixing,
        ConditionId::C3Mixing,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::C1 => "C1",
            ConditionId::C2 => "C2",
            ConditionId::C3 => "C3",
            ConditionId::C4 => "C4",
            ConditionId::C1Mixing => "C'1",
            ConditionId::C2Mixing => "C'2",
            ConditionId::C3Mixing => "C'3",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('\u{2032}', "'");
        ConditionId::ALL
            .into_iter()
            .find(|c| c.as_str() == norm || c.as_str().replace('\'', "P") == norm)
            .ok_or_else(|| Error::validation(format!("unknown condition '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    HoldsExact,
    HoldsBound,
    Undetermined,
}

/// Parameters for the checkers: `q` in `(0, 2)` for C2 and C'2, `p > 2`
/// for C3 and C'3, and the Luxemburg bisection tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionParams {
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for ConditionParams {
    fn default() -> Self {
        ConditionParams { q: None, p: None, tol: default_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTerm {
    pub offset: Vec<i64>,
    pub distance: i64,
    pub value: f64,
    /// `true` when `value` is the term itself, `false` when it bounds it.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub model: String,
    pub verdict: Verdict,
    /// Sum of the reported terms; `None` when undetermined.
    pub sum: Option<f64>,
    pub truncation_radius: i64,
    pub parameter: Option<f64>,
    pub reason: String,
    pub terms: Vec<ConditionTerm>,
}

/// Law of `|eps_0|` for a shipped generator, or a law dominating it.
/// The flag is `true` when the law is exact.
pub fn field_marginal(spec: &GeneratorSpec) -> (MarginalSpec, bool) {
    fn innovation_marginal(law: &InnovationLaw, scale: f64) -> MarginalSpec {
        match *law {
            InnovationLaw::Gaussian { sigma, .. } if sigma * scale > 0.0 => {
                MarginalSpec::Gaussian { sigma: sigma * scale }
            }
            InnovationLaw::Gaussian { .. } => MarginalSpec::PointMass { mass: 0.0 },
            InnovationLaw::Uniform { low, high } if high > low && scale > 0.0 => {
                MarginalSpec::Uniform { half_width: 0.5 * (high - low) * scale }
            }
            InnovationLaw::Uniform { high, .. } => MarginalSpec::PointMass { mass: high.abs() * scale },
            InnovationLaw::Rademacher => MarginalSpec::PointMass { mass: scale },
        }
    }
    match spec {
        GeneratorSpec::Iid { innovation } => (innovation_marginal(innovation, 1.0), true),
        GeneratorSpec::Linear { innovation, coefficients } => {
            let nonzero: Vec<f64> = coefficients.iter().map(|c| c.value).filter(|v| *v != 0.0).collect();
            match (innovation, nonzero.len()) {
                (_, 0) => (MarginalSpec::PointMass { mass: 0.0 }, true),
                (_, 1) => (innovation_marginal(innovation, nonzero[0].abs()), true),
                (InnovationLaw::Gaussian { .. }, _) => {
                    let l2 = nonzero.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (innovation_marginal(innovation, l2), true)
                }
                _ => {
                    let l1: f64 = nonzero.iter().map(|v| v.abs()).sum();
                    let bound = innovation.abs_bound().unwrap_or(f64::INFINITY) * l1;
                    (MarginalSpec::PointMass { mass: bound }, false)
                }
            }
        }
        GeneratorSpec::MdNeighbor { innovation, link } => match innovation {
            InnovationLaw::Rademacher => {
                let (a, b) = (link.apply(1.0).abs(), link.apply(-1.0).abs());
                (MarginalSpec::PointMass { mass: a.max(b) }, a == b)
            }
            // |eps_0| <= sup|f| |xi_0| pointwise.
            _ => (innovation_marginal(innovation, link.bound()), false),
        },
    }
}

/// `2 M^2 phi`, bounding `|| eps_k E_{|k|}(eps_0) ||_inf`.
pub fn serfling_bound(m_inf: f64, phi: f64) -> Result<f64> {
    if !(m_inf >= 0.0 && m_inf.is_finite()) {
        return Err(Error::domain(format!("sup norm {m_inf} must be finite and >= 0")));
    }
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!("phi = {phi} must lie in [0, 1]")));
    }
    Ok(2.0 * m_inf * m_inf * phi)
}

/// `4 d_k(p)^2`, bounding `|| eps_k E_{|k|}(eps_0) ||_{p/2}`.
pub fn rio_bound(z: &MarginalSpec, alpha: f64, p: f64) -> Result<f64> {
    Ok(4.0 * d_k_coefficient(z, alpha, p)?.powi(2))
}

fn require_q(params: &ConditionParams) -> Result<f64> {
    let q = params.q.ok_or_else(|| Error::validation("this condition needs q in (0, 2)"))?;
    beta_of_q(q).map_err(|_| Error::validation(format!("q = {q} must lie in (0, 2)")))?;
    Ok(q)
}

fn require_p(params: &ConditionParams) -> Result<f64> {
    let p = params.p.ok_or_else(|| Error::validation("this condition needs p > 2"))?;
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::validation(format!("p = {p} must be finite and > 2")));
    }
    Ok(p)
}

/// Certifies one condition for a shipped generator on `Z^d`.
/// Value and exactness of the term at distance `r`, or `None` when undetermined.
type TermFn<'a> = Box<dyn Fn(i64) -> Result<Option<(f64, bool)>> + 'a>;

pub fn check_condition(
    id: ConditionId,
    spec: &GeneratorSpec,
    d: usize,
    params: &ConditionParams,
) -> Result<ConditionReport> {
    spec.validate(d)?;
    if !(params.tol > 0.0) {
        return Err(Error::validation(format!("tolerance {} must be > 0", params.tol)));
    }
    let profile = mixing_profile(spec, d)?;
    let radius = profile.radius;
    let (marginal, marginal_exact) = field_marginal(spec);
    let origin = vec![0i64; d];
    let parameter = match id {
        ConditionId::C2 | ConditionId::C2Mixing => Some(require_q(params)?),
        ConditionId::C3 | ConditionId::C3Mixing => Some(require_p(params)?),
        _ => None,
    };
    let mut report = ConditionReport {
        condition: id,
        model: profile.model.clone(),
        verdict: Verdict::HoldsExact,
        sum: None,
        truncation_radius: radius,
        parameter,
        reason: String::new(),
        terms: Vec::new(),
    };
    let in_box = cube_points(d, radius);
    let past: Vec<Vec<i64>> = in_box
        .iter()
        .filter(|k| lex_compare(k, &origin).map(|o| o == Ordering::Less).unwrap_or(false))
        .cloned()
        .collect();

    match id {
        ConditionId::C1 | ConditionId::C2 | ConditionId::C3 => {
            let projective_zero = matches!(spec, GeneratorSpec::Iid { .. } | GeneratorSpec::MdNeighbor { .. });
            if projective_zero {
                // E(eps_0 | past) = 0, hence every conditional mean on a smaller past vanishes.
                report.terms = past
                    .iter()
                    .map(|k| ConditionTerm { offset: k.clone(), distance: sup_norm(k), value: 0.0, exact: true })
                    .collect();
                report.sum = Some(0.0);
                report.reason = "projections of eps_0 onto every lexicographic past vanish".into();
                return Ok(report);
            }
            // Linear fields: terms beyond the radius vanish; inside, Hoelder and
            // conditional Jensen bound each term by a squared norm of eps_0.
            let (bound, what) = match id {
                ConditionId::C1 => (spec.abs_bound().map(|m| m * m), "||eps_0||_inf^2"),
                ConditionId::C2 => {
                    let beta = beta_of_q(parameter.unwrap_or_default())?;
                    (luxemburg_norm(&marginal, beta, params.tol).ok().map(|v| v * v), "||eps_0||_psi^2")
                }
                _ => (moment_norm(&marginal, parameter.unwrap_or_default()).ok().map(|v| v * v), "||eps_0||_p^2"),
            };
            match bound {
                Some(b) if b.is_finite() => {
                    report.terms = past
                        .iter()
                        .map(|k| ConditionTerm { offset: k.clone(), distance: sup_norm(k), value: b, exact: false })
                        .collect();
                    report.sum = Some(b * past.len() as f64);
                    report.verdict = Verdict::HoldsBound;
                    report.reason = format!(
                        "terms beyond radius {radius} vanish by independence; each of the {} inner terms is at most {what}",
                        past.len()
                    );
                }
                _ => {
                    report.verdict = Verdict::Undetermined;
                    report.reason = format!("{what} is not finite for this innovation law");
                }
            }
        }
        ConditionId::C4 => {
            report.terms = in_box
                .iter()
                .map(|k| ConditionTerm {
                    offset: k.clone(),
                    distance: sup_norm(k),
                    value: theoretical_covariance(spec, k).abs(),
                    exact: true,
                })
                .collect();
            report.sum = Some(report.terms.iter().map(|t| t.value).sum());
            report.reason = "closed-form covariances; zero beyond the radius".into();
        }
        ConditionId::C1Mixing | ConditionId::C2Mixing | ConditionId::C3Mixing => {
            let per_term: TermFn<'_> = match id {
                ConditionId::C1Mixing => {
                    if spec.abs_bound().is_none() {
                        report.verdict = Verdict::Undetermined;
                        report.reason = "eps_0 is not bounded".into();
                        return Ok(report);
                    }
                    Box::new(|r| {
                        let v = profile.phi_inf_1(r);
                        Ok(Some((v.value, v.exact)))
                    })
                }
                ConditionId::C2Mixing => {
                    let beta = beta_of_q(parameter.unwrap_or_default())?;
                    let tol = params.tol;
                    let marginal = marginal.clone();
                    Box::new(move |r| {
                        let a = profile.alpha_1_inf(r);
                        if a.value == 0.0 {
                            return Ok(Some((0.0, true)));
                        }
                        match c_k_coefficient(&marginal, a.value, beta, tol) {
                            Ok(c) => Ok(Some((c * c, false))),
                            Err(Error::Divergent(_)) => Ok(None),
                            Err(e) => Err(e),
                        }
                    })
                }
                _ => {
                    let p = parameter.unwrap_or_default();
                    let marginal = marginal.clone();
                    Box::new(move |r| {
                        let a = profile.alpha_1_inf(r);
                        if a.value == 0.0 {
                            return Ok(Some((0.0, true)));
                        }
                        Ok(d_k_coefficient(&marginal, a.value, p).ok().map(|dk| (dk * dk, false)))
                    })
                }
            };
            let mut terms = Vec::with_capacity(in_box.len());
            for k in &in_box {
                let r = sup_norm(k);
                match per_term(r)? {
                    Some((value, exact)) => {
                        terms.push(ConditionTerm { offset: k.clone(), distance: r, value, exact })
                    }
                    None => {
                        report.verdict = Verdict::Undetermined;
                        report.reason = "quantile integral diverges for this marginal".into();
                        return Ok(report);
                    }
                }
            }
            report.sum = Some(terms.iter().map(|t| t.value).sum());
            report.verdict = Verdict::HoldsBound;
            report.reason = format!(
                "mixing coefficients vanish beyond radius {radius}; inner terms use the trivial bounds alpha <= 1/4, phi <= 1{}",
                if marginal_exact { "" } else { " and a dominating marginal" }
            );
            report.terms = terms;
        }
    }
    Ok(report)
}
