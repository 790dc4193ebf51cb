//! Registry of bound calculators: parameter schemas and JSON evaluation.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::doukhan::doukhan_louhichi_bound;
use crate::bounds::merlevede::merlevede_chernoff;
use crate::bounds::moment::{phi_moment_bound, rosenthal_liu_xiao_wu};
use crate::bounds::nagaev::{nagaev_dan, nagaev_fdm, nagaev_linear_long, nagaev_linear_short, nagaev_vector_max, FdmVariant};
use crate::bounds::{BoundResult, ConstantPack, ConstantsSource};
use crate::dependence::DependenceProfile;
use crate::error::{Error, Result};
use crate::matrix_bounds::{bernstein_beta_mixing, bernstein_independent, bernstein_tau_mixing};
use crate::ustat::{ustat_exponential_bound, vstat_fourier_bound};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub constraint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSchema {
    pub name: String,
    pub source: ConstantsSource,
    /// Default for user-supplied constants; None when computed internally.
    pub default: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub id: String,
    pub description: String,
    pub event: String,
    pub params: Vec<ParamSchema>,
    pub constants: Vec<ConstantSchema>,
}

fn entry(id: &str, description: &str, event: &str, params: &[(&str, &str, &str)], explicit: &[&str], user: &[&str]) -> BoundEntry {
    BoundEntry {
        id: id.into(),
        description: description.into(),
        event: event.into(),
        params: params
            .iter()
            .map(|(n, k, c)| ParamSchema { name: (*n).into(), kind: (*k).into(), constraint: (*c).into() })
            .collect(),
        constants: explicit
            .iter()
            .map(|n| ConstantSchema { name: (*n).into(), source: ConstantsSource::Explicit, default: None })
            .chain(user.iter().map(|n| ConstantSchema { name: (*n).into(), source: ConstantsSource::UserSupplied, default: Some(1.0) }))
            .collect(),
    }
}

const N: (&str, &str, &str) = ("n", "integer", ">= 1");
const X: (&str, &str, &str) = ("x", "real", "> 0");
const P: (&str, &str, &str) = ("p", "real", "> 2");
const CONSTS: (&str, &str, &str) = ("consts", "object", "named positive constants, default 1");

/// Every calculator, in a stable order.
pub fn list_bounds() -> Vec<BoundEntry> {
    vec![
        entry(
            "nagaev_linear_short",
            "Nagaev inequality for short-range dependent linear processes",
            "P(|S_n| >= x)",
            &[N, X, P, ("f_l1", "real", "> 0, sum of |f_j|"), ("eps_lp", "real", "> 0"), ("eps_l2", "real", "> 0")],
            &["c_p"],
            &[],
        ),
        entry(
            "nagaev_linear_long",
            "Nagaev inequality for long-range dependent linear processes",
            "P(|S_n| >= x)",
            &[N, X, P, ("beta", "real", "in (1/2, 1)"), ("k", "real", "> 0, sup |f_j|(1+j)^beta"), ("eps_lp", "real", "> 0"), ("eps_l2", "real", "> 0"), CONSTS],
            &[],
            &["C1", "C2"],
        ),
        entry(
            "phi_moment",
            "p-th moment bound for bounded phi-mixing sequences",
            "E|S_n|^p",
            &[N, ("p", "integer", ">= 2"), ("c", "real", "> 0, almost sure bound"), ("phi", "array", "nonincreasing, phi(0) <= 1, length >= n")],
            &[],
            &[],
        ),
        entry(
            "merlevede",
            "Chernoff bound from the Bernstein-type MGF bound for geometrically alpha-mixing sequences",
            "P(S_n >= x)",
            &[N, X, ("sigma2", "real", ">= 0"), ("b", "real", "> 0"), CONSTS],
            &[],
            &["C1", "C2"],
        ),
        entry(
            "doukhan_louhichi",
            "Exponential inequality under weak dependence",
            "P(S_n >= x)",
            &[N, X, ("a", "real", ">= 0"), ("b", "real", ">= 0"), ("k", "real", "> 0"), ("m", "real", "> 0"), ("l1", "real", "> 0"), ("l2", "real", "> 0")],
            &["C1", "C2"],
            &[],
        ),
        entry(
            "rosenthal",
            "Rosenthal-type L_p bound from functional dependence measures",
            "||S_n||_p",
            &[N, P, ("profile_2", "object", "dependence profile with p = 2 and tail certificate"), ("profile_p", "object", "dependence profile with p and tail certificate"), ("x0_l2", "real", "> 0"), ("x0_lp", "real", "> 0")],
            &[],
            &[],
        ),
        entry(
            "nagaev_fdm",
            "Nagaev inequality from functional dependence measures (variants i, ii, iii)",
            "P(|S_n| >= x)",
            &[N, X, P, ("variant", "object", "{variant: i|ii|iii, ...}"), CONSTS],
            &[],
            &["c_p", "C1", "C2"],
        ),
        entry(
            "nagaev_dan",
            "Nagaev inequality in terms of dependence-adjusted norms",
            "P(|S_n| >= x)",
            &[N, X, P, ("alpha", "real", "> 0, != 1/2 - 1/p"), ("dan_p", "real", ">= 0"), ("dan_2", "real", "> 0"), CONSTS],
            &[],
            &["C1", "C2", "C3"],
        ),
        entry(
            "nagaev_vector_max",
            "Max-norm Nagaev inequality for high-dimensional vectors",
            "P(|S_n|_inf >= x)",
            &[N, X, ("q", "real", "> 2"), ("alpha", "real", "> 0, != 1/2 - 1/q"), ("d", "integer", ">= 1"), ("psi_2alpha", "real", "> 0"), ("dan_inf", "real", ">= 0"), CONSTS],
            &[],
            &["C"],
        ),
        entry(
            "matrix_bernstein_independent",
            "Matrix Bernstein inequality for independent symmetric matrices",
            "P(lambda_max(sum X_i) >= x)",
            &[N, ("x", "real", ">= 0"), ("d", "integer", ">= 1"), ("sigma2", "real", ">= 0"), ("m", "real", "> 0")],
            &[],
            &[],
        ),
        entry(
            "matrix_bernstein_beta",
            "Matrix Bernstein inequality under geometric beta-mixing",
            "P(lambda_max(sum X_i) >= x)",
            &[("n", "integer", ">= 2"), ("x", "real", ">= 0"), ("d", "integer", ">= 1"), ("nu2", "real", ">= 0"), ("m", "real", "> 0"), ("gamma", "real", "> 0"), CONSTS],
            &[],
            &["C"],
        ),
        entry(
            "matrix_bernstein_tau",
            "Matrix Bernstein inequality under geometric tau-mixing",
            "P(lambda_max(sum X_i) >= x)",
            &[("n", "integer", ">= 2"), ("x", "real", ">= 0"), ("d", "integer", ">= 1"), ("nu2", "real", ">= 0"), ("m", "real", "> 0"), ("psi1", "real", "> 0"), ("psi2", "real", "> 0")],
            &["15^2", "60^2", "8", "2", "6"],
            &[],
        ),
        entry(
            "ustat_exponential",
            "Exponential inequality for degenerate U-statistics of phi-mixing data",
            "P(|U_n| >= c' M / sqrt(n) + x)",
            &[("n", "integer", ">= 4"), ("x", "real", ">= 0"), ("m", "real", "> 0, sup norm of h"), CONSTS],
            &[],
            &["c_prime", "C_prime"],
        ),
        entry(
            "vstat_fourier",
            "Exponential inequality for V-statistics of alpha-mixing data with Fourier-integrable kernels",
            "P(|V_n(h_p)| >= x)",
            &[("n", "integer", ">= 2"), ("x", "real", ">= 0"), ("p", "integer", "1..=r"), ("r", "integer", ">= 1"), ("fourier_l1", "real", ">= 0, declared by the caller"), ("c", "real", "> 0"), ("c_mix", "real", "> 0"), CONSTS],
            &[],
            &["C_prime"],
        ),
    ]
}

fn parse<T: DeserializeOwned>(id: &str, params: &Value) -> Result<T> {
    serde_json::from_value(params.clone()).map_err(|e| Error::invalid(id, format!("bad parameters: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Short { n: u64, x: f64, p: f64, f_l1: f64, eps_lp: f64, eps_l2: f64 }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Long { n: u64, x: f64, p: f64, beta: f64, k: f64, eps_lp: f64, eps_l2: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Phi { n: u64, p: u32, c: f64, phi: Vec<f64> }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Merlevede { n: u64, x: f64, sigma2: f64, b: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doukhan { n: u64, x: f64, a: f64, b: f64, k: f64, m: f64, l1: f64, l2: f64 }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Rosenthal { n: u64, p: f64, profile_2: DependenceProfile, profile_p: DependenceProfile, x0_l2: f64, x0_lp: f64 }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fdm { n: u64, x: f64, p: f64, variant: FdmVariant, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Dan { n: u64, x: f64, p: f64, alpha: f64, dan_p: f64, dan_2: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorMax { n: u64, x: f64, q: f64, alpha: f64, d: u64, psi_2alpha: f64, dan_inf: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatInd { n: u64, x: f64, d: u64, sigma2: f64, m: f64 }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatBeta { n: u64, x: f64, d: u64, nu2: f64, m: f64, gamma: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatTau { n: u64, x: f64, d: u64, nu2: f64, m: f64, psi1: f64, psi2: f64 }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UExp { n: u64, x: f64, m: f64, #[serde(default)] consts: ConstantPack }

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VFourier { n: u64, x: f64, p: u32, r: u32, fourier_l1: Option<f64>, c: f64, c_mix: f64, #[serde(default)] consts: ConstantPack }

/// Evaluates calculator `id` on a JSON parameter record.
pub fn evaluate(id: &str, params: &Value) -> Result<BoundResult> {
    match id {
        "nagaev_linear_short" => {
            let a: Short = parse(id, params)?;
            nagaev_linear_short(a.n, a.x, a.p, a.f_l1, a.eps_lp, a.eps_l2)
        }
        "nagaev_linear_long" => {
            let a: Long = parse(id, params)?;
            nagaev_linear_long(a.n, a.x, a.p, a.beta, a.k, a.eps_lp, a.eps_l2, &a.consts)
        }
        "phi_moment" => {
            let a: Phi = parse(id, params)?;
            phi_moment_bound(a.n, a.p, a.c, &a.phi)
        }
        "merlevede" => {
            let a: Merlevede = parse(id, params)?;
            merlevede_chernoff(a.n, a.x, a.sigma2, a.b, &a.consts)
        }
        "doukhan_louhichi" => {
            let a: Doukhan = parse(id, params)?;
            doukhan_louhichi_bound(a.n, a.x, a.a, a.b, a.k, a.m, a.l1, a.l2)
        }
        "rosenthal" => {
            let a: Rosenthal = parse(id, params)?;
            rosenthal_liu_xiao_wu(a.n, a.p, &a.profile_2, &a.profile_p, a.x0_l2, a.x0_lp)
        }
        "nagaev_fdm" => {
            let a: Fdm = parse(id, params)?;
            nagaev_fdm(a.n, a.x, a.p, &a.variant, &a.consts)
        }
        "nagaev_dan" => {
            let a: Dan = parse(id, params)?;
            nagaev_dan(a.n, a.x, a.p, a.alpha, a.dan_p, a.dan_2, &a.consts)
        }
        "nagaev_vector_max" => {
            let a: VectorMax = parse(id, params)?;
            nagaev_vector_max(a.n, a.x, a.q, a.alpha, a.d, a.psi_2alpha, a.dan_inf, &a.consts)
        }
        "matrix_bernstein_independent" => {
            let a: MatInd = parse(id, params)?;
            bernstein_independent(a.n, a.x, a.d, a.sigma2, a.m)
        }
        "matrix_bernstein_beta" => {
            let a: MatBeta = parse(id, params)?;
            bernstein_beta_mixing(a.n, a.x, a.d, a.nu2, a.m, a.gamma, &a.consts)
        }
        "matrix_bernstein_tau" => {
            let a: MatTau = parse(id, params)?;
            bernstein_tau_mixing(a.n, a.x, a.d, a.nu2, a.m, a.psi1, a.psi2)
        }
        "ustat_exponential" => {
            let a: UExp = parse(id, params)?;
            ustat_exponential_bound(a.n, a.x, a.m, &a.consts)
        }
        "vstat_fourier" => {
            let a: VFourier = parse(id, params)?;
            vstat_fourier_bound(a.n, a.x, a.p, a.r, a.fourier_l1, a.c, a.c_mix, &a.consts)
        }
        other => Err(Error::invalid("bound_id", format!("unknown calculator {other}; see list-bounds"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ids_are_unique_and_evaluable() {
        let entries = list_bounds();
        let mut ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), entries.len());
        let r = evaluate("matrix_bernstein_independent", &json!({"n": 10, "x": 3.0, "d": 4, "sigma2": 0.0, "m": 2.0})).unwrap();
        assert_eq!(r.bound_id, "matrix_bernstein_independent");
        assert!(evaluate("nope", &json!({})).is_err());
        assert!(evaluate("phi_moment", &json!({"n": 2})).unwrap_err().is_validation());
    }
}
