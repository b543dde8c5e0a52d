//! Decision problems, distributions and per-action belief polytopes.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::HPolytope;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::rational::{dot, Rational};

/// States, actions and a utility matrix with one row per action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDoc")]
pub struct DecisionProblem {
    states: Vec<String>,
    actions: Vec<String>,
    utility: Vec<Vec<Rational>>,
}

#[derive(Deserialize)]
struct ProblemDoc {
    states: Vec<String>,
    actions: Vec<String>,
    utility: Vec<Vec<Rational>>,
}

impl TryFrom<ProblemDoc> for DecisionProblem {
    type Error = Error;

    fn try_from(doc: ProblemDoc) -> Result<Self> {
        Self::new(doc.states, doc.actions, doc.utility)
    }
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl DecisionProblem {
    pub fn new(states: Vec<String>, actions: Vec<String>, utility: Vec<Vec<Rational>>) -> Result<Self> {
        if states.is_empty() || actions.is_empty() {
            return Err(Error::Dimension("need at least one state and one action".into()));
        }
        check_unique(&states)?;
        check_unique(&actions)?;
        if utility.len() != actions.len() {
            return Err(Error::Dimension(format!(
                "{} utility rows for {} actions",
                utility.len(),
                actions.len()
            )));
        }
        for (a, row) in actions.iter().zip(&utility) {
            if row.len() != states.len() {
                return Err(Error::Dimension(format!(
                    "row {a:?} has {} entries for {} states",
                    row.len(),
                    states.len()
                )));
            }
        }
        Ok(DecisionProblem {
            states,
            actions,
            utility,
        })
    }

    /// Builds a problem with labels `w1.. ` and `a1..` from integer payoffs.
    pub fn from_ints(utility: &[&[i64]]) -> Self {
        let j = utility.len();
        let i = utility.first().map_or(0, |r| r.len());
        let rows = utility
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_int(x)).collect())
            .collect();
        Self::new(labels("w", i), labels("a", j), rows).expect("well-formed table")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.try_into()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn utility(&self) -> &[Vec<Rational>] {
        &self.utility
    }

    pub fn u(&self, a: usize, w: usize) -> &Rational {
        &self.utility[a][w]
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// `u(a,·) − u(b,·)`.
    pub fn diff(&self, a: usize, b: usize) -> Vec<Rational> {
        self.utility[a]
            .iter()
            .zip(&self.utility[b])
            .map(|(x, y)| x - y)
            .collect()
    }

    pub fn expected_utility(&self, a: usize, belief: &[Rational]) -> Rational {
        dot(&self.utility[a], belief)
    }

    /// Adjacent differences `d(a_{j+1}, a_j, ·)` in action order.
    pub fn utility_differences(&self) -> Result<Vec<UtilityDifference>> {
        if self.actions.len() < 2 {
            return Err(Error::Precondition(
                "utility differences need at least two actions".into(),
            ));
        }
        Ok((0..self.actions.len() - 1)
            .map(|j| UtilityDifference {
                high_action: self.actions[j + 1].clone(),
                low_action: self.actions[j].clone(),
                values: self.diff(j + 1, j),
            })
            .collect())
    }

    /// Reorders states so that new state `k` is old state `perm[k]`.
    pub fn permute_states(&self, perm: &[usize]) -> DecisionProblem {
        DecisionProblem {
            states: perm.iter().map(|&k| self.states[k].clone()).collect(),
            actions: self.actions.clone(),
            utility: self
                .utility
                .iter()
                .map(|row| perm.iter().map(|&k| row[k].clone()).collect())
                .collect(),
        }
    }

    /// Keeps only the listed actions, in the given order.
    pub fn restrict_actions(&self, keep: &[usize]) -> DecisionProblem {
        DecisionProblem {
            states: self.states.clone(),
            actions: keep.iter().map(|&a| self.actions[a].clone()).collect(),
            utility: keep.iter().map(|&a| self.utility[a].clone()).collect(),
        }
    }

    /// Beliefs at which `action` is optimal, over free coordinates `μ(ω₂)…μ(ω_I)`.
    pub fn optimal_belief_set(&self, action: usize) -> HPolytope {
        let n = self.num_states();
        let dim = n - 1;
        let mut h = HPolytope::new(dim);
        for other in 0..self.num_actions() {
            if other == action {
                continue;
            }
            // Σ_ω μ(ω)[u(a',ω) − u(a,ω)] ≤ 0 with μ(ω₁) = 1 − Σ x.
            let g = self.diff(other, action);
            let normal: Vec<Rational> = (1..n).map(|i| &g[i] - &g[0]).collect();
            let height = -&g[0];
            if normal.iter().all(|x| x.is_zero()) {
                if height.is_negative() {
                    h.mark_empty();
                }
                continue;
            }
            h.add_inequality(normal, height);
        }
        for i in 0..dim {
            let mut e = vec![Rational::zero(); dim];
            e[i] = Rational::from_int(-1);
            h.add_inequality(e, Rational::zero());
        }
        if dim > 0 {
            h.add_inequality(vec![Rational::one(); dim], Rational::one());
        }
        h
    }

    pub fn optimal_belief_set_by_label(&self, action: &str) -> Result<HPolytope> {
        Ok(self.optimal_belief_set(self.action_index(action)?))
    }

    /// Exact argmax of expected utility at a full belief vector.
    pub fn optimal_actions(&self, belief: &[Rational]) -> Vec<usize> {
        let values: Vec<Rational> = (0..self.num_actions())
            .map(|a| self.expected_utility(a, belief))
            .collect();
        let best = values.iter().max().cloned().expect("at least one action");
        (0..values.len()).filter(|&a| values[a] == best).collect()
    }

    /// True when no belief makes `action` optimal.
    pub fn is_dominated(&self, action: usize) -> bool {
        let mut lp = LinearProgram::feasibility(self.num_states());
        self.add_obedience_rows(&mut lp, action, 0);
        lp.add(vec![Rational::one(); self.num_states()], Relation::Eq, Rational::one());
        !lp.find_feasible().is_feasible()
    }

    pub fn is_dominated_by_label(&self, action: &str) -> Result<bool> {
        Ok(self.is_dominated(self.action_index(action)?))
    }

    /// Appends `Σ_ω μ(ω)[u(a,ω) − u(a',ω)] ≥ 0` for every `a' ≠ a`, with the
    /// belief occupying columns `offset..offset+I`.
    pub(crate) fn add_obedience_rows(&self, lp: &mut LinearProgram, action: usize, offset: usize) {
        for other in 0..self.num_actions() {
            if other == action {
                continue;
            }
            let g = self.diff(action, other);
            if g.iter().all(|x| x.is_zero()) {
                continue;
            }
            let terms: Vec<(usize, Rational)> = g.into_iter().enumerate().map(|(w, c)| (offset + w, c)).collect();
            lp.add_sparse(&terms, Relation::Ge, Rational::zero());
        }
    }

    /// `max p·μ` over beliefs where `action` is optimal, or `None` if empty.
    pub fn max_over_optimal_set(&self, action: usize, p: &[Rational]) -> Option<Rational> {
        let n = self.num_states();
        let mut lp = LinearProgram::new(n, Sense::Maximize);
        lp.set_objective(p.to_vec());
        self.add_obedience_rows(&mut lp, action, 0);
        lp.add(vec![Rational::one(); n], Relation::Eq, Rational::one());
        lp.solve().optimal().map(|s| s.value)
    }

    /// Optimal point of `max p·μ` over `Δ*(action)`.
    pub fn argmax_over_optimal_set(&self, action: usize, p: &[Rational]) -> Option<Vec<Rational>> {
        let n = self.num_states();
        let mut lp = LinearProgram::new(n, Sense::Maximize);
        lp.set_objective(p.to_vec());
        self.add_obedience_rows(&mut lp, action, 0);
        lp.add(vec![Rational::one(); n], Relation::Eq, Rational::one());
        lp.solve().optimal().map(|s| s.x)
    }
}

/// `values[i] = u(high, ω_i) − u(low, ω_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UtilityDifference {
    pub high_action: String,
    pub low_action: String,
    pub values: Vec<Rational>,
}

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// A probability vector over an ordered label set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    domain: Vec<String>,
    weights: Vec<Rational>,
}

impl Distribution {
    pub fn new(domain: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if domain.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} labels",
                weights.len(),
                domain.len()
            )));
        }
        check_unique(&domain)?;
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::Distribution(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(Error::Distribution(format!("weights sum to {total}, not 1")));
        }
        Ok(Distribution { domain, weights })
    }

    pub fn uniform(domain: &[String]) -> Self {
        let n = domain.len() as i64;
        Distribution {
            domain: domain.to_vec(),
            weights: vec![Rational::new(1, n); domain.len()],
        }
    }

    pub fn point(domain: &[String], k: usize) -> Self {
        let mut weights = vec![Rational::zero(); domain.len()];
        weights[k] = Rational::one();
        Distribution {
            domain: domain.to_vec(),
            weights,
        }
    }

    /// Parses `{"label": "p/q", ...}` against a domain; absent labels get 0.
    pub fn from_json(domain: &[String], text: &str) -> Result<Self> {
        let map: BTreeMap<String, Rational> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_map(domain, &map)
    }

    pub fn from_map(domain: &[String], map: &BTreeMap<String, Rational>) -> Result<Self> {
        for k in map.keys() {
            if !domain.contains(k) {
                return Err(Error::UnknownLabel(k.clone()));
            }
        }
        let weights = domain
            .iter()
            .map(|l| map.get(l).cloned().unwrap_or_else(Rational::zero))
            .collect();
        Self::new(domain.to_vec(), weights)
    }

    pub fn to_map(&self) -> BTreeMap<String, Rational> {
        self.domain.iter().cloned().zip(self.weights.iter().cloned()).collect()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> &Rational {
        &self.weights[k]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&k| self.weights[k].is_positive())
            .collect()
    }

    pub fn permute(&self, perm: &[usize]) -> Distribution {
        Distribution {
            domain: perm.iter().map(|&k| self.domain[k].clone()).collect(),
            weights: perm.iter().map(|&k| self.weights[k].clone()).collect(),
        }
    }

    /// Errors unless the domain equals `expected` in order.
    pub fn expect_domain(&self, expected: &[String], what: &str) -> Result<()> {
        if self.domain != expected {
            return Err(Error::Dimension(format!("{what} domain does not match the problem")));
        }
        Ok(())
    }
}

impl Serialize for Distribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}
