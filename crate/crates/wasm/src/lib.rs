//! Browser entry points. Every function takes JSON text and returns JSON
//! text; failures come back as `{"error": "..."}`.

use bce_core::io::{self, canonical_json};
use bce_core::support_tests::{check_aud, check_binary_states, check_small_states, check_two_step, TestVerdict};
use bce_core::{check_bce, classify, extreme_marginal_bounds, DecisionProblem, Distribution, Result, StructureTag};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn respond(r: Result<Value>) -> String {
    let v = r.unwrap_or_else(|e| json!({ "error": e.to_string() }));
    canonical_json(&v).unwrap_or_else(|e| format!("{{\"error\":{:?}}}", e.to_string()))
}

fn inputs(problem: &str, prior: &str) -> Result<(DecisionProblem, Distribution)> {
    let p = io::read_problem(problem)?;
    let mu = io::read_distribution(p.states(), prior)?;
    Ok((p, mu))
}

fn family_verdict(
    p: &DecisionProblem,
    mu: &Distribution,
    nu: &Distribution,
) -> Result<Option<(&'static str, TestVerdict)>> {
    Ok(match classify(p).tag {
        StructureTag::BinaryState => Some(("binary", check_binary_states(p, mu, nu)?)),
        StructureTag::BinaryAction | StructureTag::AffineUtilityDifferences => Some(("aud", check_aud(p, mu, nu)?)),
        StructureTag::TwoStep => Some(("two-step", check_two_step(p, mu, nu)?)),
        StructureTag::SmallState => Some(("small-states", check_small_states(p, mu, nu)?)),
        StructureTag::MonotoneConcave | StructureTag::General => None,
    })
}

/// Consistency of a prior and a marginal: LP verdict plus the matching
/// closed-form test, with the violated test functions.
#[wasm_bindgen]
pub fn check(problem: &str, prior: &str, marginal: &str) -> String {
    respond((|| {
        let (p, mu) = inputs(problem, prior)?;
        let nu = io::read_distribution(p.actions(), marginal)?;
        let lp = check_bce(&p, &mu, &nu)?;
        let mut out = json!({
            "structure": classify(&p).tag,
            "consistent": lp.consistent,
            "pi": lp.pi,
            "dominated": lp.dominated,
        });
        if let Some((name, v)) = family_verdict(&p, &mu, &nu)? {
            out["method"] = json!(name);
            out["violated"] = json!(v.violated);
            out["agrees"] = json!(v.consistent == lp.consistent);
        } else {
            out["method"] = json!("lp");
        }
        Ok(out)
    })())
}

/// Optimal-belief regions, the identified set and the prior, projected for
/// two or three states. An empty `prior` omits the prior point.
#[wasm_bindgen]
pub fn plot_data(problem: &str, marginal: &str, prior: &str) -> String {
    respond((|| {
        let p = io::read_problem(problem)?;
        let nu = io::read_distribution(p.actions(), marginal)?;
        let mu = if prior.trim().is_empty() {
            None
        } else {
            Some(io::read_distribution(p.states(), prior)?)
        };
        let data = io::plot_data(&p, &nu, mu.as_ref())?;
        serde_json::to_value(data).map_err(|e| bce_core::Error::Parse(e.to_string()))
    })())
}

/// Range of the probability of each action over obedient joints at the prior.
#[wasm_bindgen]
pub fn bounds(problem: &str, prior: &str) -> String {
    respond((|| {
        let (p, mu) = inputs(problem, prior)?;
        let rows = (0..p.num_actions())
            .map(|a| {
                let (lo, hi) = extreme_marginal_bounds(&p, &mu, &[a])?;
                Ok(json!({
                    "action": p.actions()[a],
                    "lower": lo,
                    "upper": hi,
                    "lower_decimal": io::decimal(&lo),
                    "upper_decimal": io::decimal(&hi),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({ "bounds": rows }))
    })())
}
