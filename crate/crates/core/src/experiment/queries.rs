use serde::{Deserialize, Serialize};

use crate::dependence::{check_condition, mixing_profile, ConditionId, ConditionParams, ConditionReport, MixingProfile};
use crate::error::{Error, Result};
use crate::field_gen::GeneratorSpec;
use crate::orlicz::{
    beta_of_q, c_k_coefficient, d_k_coefficient, default_p_grid, luxemburg_norm, norm_equivalence_diag, MarginalSpec,
    NormEquivalence,
};

use super::config::ExperimentConfig;

/// Orlicz quantities requested for one marginal law. Exactly one of `beta`
/// and `q` must be given; `q` selects `beta = 2q / (2 - q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrliczQuery {
    pub marginal: MarginalSpec,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    /// Upper limit of the quantile integrals.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Exponent of the quantile moment, `p > 2`.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrliczAnswer {
    pub beta: f64,
    pub luxemburg: Option<f64>,
    pub c_k: Option<f64>,
    pub d_k: Option<f64>,
    pub equivalence: Option<NormEquivalence>,
    /// Reasons for quantities left out because they diverge.
    pub divergent: Vec<String>,
}

fn divergent_to_none<T>(r: Result<T>, notes: &mut Vec<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Divergent(msg)) => {
            notes.push(msg);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn evaluate_orlicz(query: &OrliczQuery) -> Result<OrliczAnswer> {
    query.marginal.validate()?;
    let beta = match (query.beta, query.q) {
        (Some(b), None) => b,
        (None, Some(q)) => beta_of_q(q)?,
        _ => return Err(Error::config("give exactly one of beta and q")),
    };
    let mut notes = Vec::new();
    let luxemburg = divergent_to_none(luxemburg_norm(&query.marginal, beta, query.tol), &mut notes)?;
    let c_k = match query.alpha {
        Some(alpha) => divergent_to_none(c_k_coefficient(&query.marginal, alpha, beta, query.tol), &mut notes)?,
        None => None,
    };
    let d_k = match (query.alpha, query.p) {
        (Some(alpha), Some(p)) => Some(d_k_coefficient(&query.marginal, alpha, p)?),
        _ => None,
    };
    let grid = query.p_grid.clone().unwrap_or_else(default_p_grid);
    let equivalence = divergent_to_none(norm_equivalence_diag(&query.marginal, beta, &grid), &mut notes)?;
    Ok(OrliczAnswer { beta, luxemburg, c_k, d_k, equivalence, divergent: notes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsAnswer {
    pub d: usize,
    pub generator: GeneratorSpec,
    pub params: ConditionParams,
    pub profile: MixingProfile,
    pub reports: Vec<ConditionReport>,
}

/// Every condition for the configured generator; `q = 1` and `p = 4` unless set.
pub fn evaluate_conditions(cfg: &ExperimentConfig) -> Result<ConditionsAnswer> {
    let mut params = cfg.conditions.unwrap_or_default();
    params.q.get_or_insert(1.0);
    params.p.get_or_insert(4.0);
    let reports = ConditionId::ALL
        .into_iter()
        .map(|id| check_condition(id, &cfg.generator, cfg.d, &params))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionsAnswer {
        d: cfg.d,
        generator: cfg.generator.clone(),
        params,
        profile: mixing_profile(&cfg.generator, cfg.d)?,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orlicz_query_gaussian() {
        let q: OrliczQuery = serde_json::from_str(r#"{"marginal": {"law": "gaussian", "sigma": 1.0}, "beta": 2.0}"#).unwrap();
        let a = evaluate_orlicz(&q).unwrap();
        assert!((a.luxemburg.unwrap() - (8.0f64 / 3.0).sqrt()).abs() < 1e-6);
        assert!(a.equivalence.is_some());
        let q: OrliczQuery = serde_json::from_str(r#"{"marginal": {"law": "gaussian", "sigma": 1.0}, "q": 1.5}"#).unwrap();
        let a = evaluate_orlicz(&q).unwrap();
        assert!(a.luxemburg.is_none() && !a.divergent.is_empty());
        let both: OrliczQuery = serde_json::from_str(r#"{"marginal": {"law": "point_mass", "mass": 1.0}, "q": 1.0, "beta": 2.0}"#).unwrap();
        assert!(evaluate_orlicz(&both).is_err());
    }

    #[test]
    fn orlicz_query_point_mass() {
        let q: OrliczQuery =
            serde_json::from_str(r#"{"marginal": {"law": "point_mass", "mass": 1.0}, "beta": 2.0, "alpha": 0.1, "p": 4.0}"#).unwrap();
        let a = evaluate_orlicz(&q).unwrap();
        assert!((a.c_k.unwrap() - 1.0 / 11f64.ln().sqrt()).abs() < 1e-6);
        assert!((a.d_k.unwrap() - 0.1f64.powf(0.25)).abs() < 1e-12);
    }
}
