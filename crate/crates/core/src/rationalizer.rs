//! Information structures that rationalize a marginal: distributions over
//! posteriors, menu measures, the core condition and Gale flows.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::consistency::{recover_belief_system, JointDistribution};
use crate::error::{Error, Result};
use crate::model::{DecisionProblem, Distribution};
use crate::rational::Rational;

/// Largest action set for which `core_check` enumerates subsets.
pub const SUBSET_CAP: usize = 20;

/// Finitely supported `τ ∈ Δ(Δ(Ω))`; identical posteriors are merged and
/// zero weights dropped, keeping first-appearance order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorDistribution {
    posteriors: Vec<Distribution>,
    weights: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct TauDocument {
    posteriors: Vec<BTreeMap<String, Rational>>,
    weights: Vec<Rational>,
}

impl PosteriorDistribution {
    pub fn new(posteriors: Vec<Distribution>, weights: Vec<Rational>) -> Result<Self> {
        if posteriors.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} posteriors",
                weights.len(),
                posteriors.len()
            )));
        }
        if posteriors.is_empty() {
            return Err(Error::Distribution("no posteriors".into()));
        }
        let domain = posteriors[0].domain().to_vec();
        if posteriors.iter().any(|p| p.domain() != domain.as_slice()) {
            return Err(Error::Dimension("posteriors over different state sets".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::Distribution(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(Error::Distribution(format!("weights sum to {total}, not 1")));
        }
        let mut merged: Vec<Distribution> = Vec::new();
        let mut mass: Vec<Rational> = Vec::new();
        for (p, w) in posteriors.into_iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            match merged.iter().position(|m| m == &p) {
                Some(k) => mass[k] += w,
                None => {
                    merged.push(p);
                    mass.push(w);
                }
            }
        }
        Ok(PosteriorDistribution {
            posteriors: merged,
            weights: mass,
        })
    }

    /// Parses `{"posteriors":[{"<state>":"p/q"}...], "weights":["p/q"...]}`.
    pub fn from_json(states: &[String], text: &str) -> Result<Self> {
        let doc: TauDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let posteriors = doc
            .posteriors
            .iter()
            .map(|m| Distribution::from_map(states, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(posteriors, doc.weights)
    }

    pub fn posteriors(&self) -> &[Distribution] {
        &self.posteriors
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn states(&self) -> &[String] {
        self.posteriors[0].domain()
    }

    /// `Σ_μ τ(μ) μ`.
    pub fn mean(&self) -> Vec<Rational> {
        let n = self.states().len();
        let mut out = vec![Rational::zero(); n];
        for (p, w) in self.posteriors.iter().zip(&self.weights) {
            for (o, x) in out.iter_mut().zip(p.weights()) {
                *o += w * x;
            }
        }
        out
    }

    pub fn is_bayes_plausible(&self, prior: &Distribution) -> bool {
        prior.domain() == self.states() && self.mean() == prior.weights()
    }
}

impl Serialize for PosteriorDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TauDocument {
            posteriors: self.posteriors.iter().map(|p| p.to_map()).collect(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

/// Pushforward `τ_A` of `τ` under the optimal-action correspondence, keyed by
/// sorted action indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MenuMeasure {
    pub actions: Vec<String>,
    pub masses: BTreeMap<Vec<usize>, Rational>,
}

impl MenuMeasure {
    pub fn mass(&self, menu: &[usize]) -> Rational {
        let mut key = menu.to_vec();
        key.sort_unstable();
        self.masses.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Σ_{C⊆B} τ_A(C)`.
    pub fn mass_within(&self, set: &[usize]) -> Rational {
        self.masses
            .iter()
            .filter(|(c, _)| c.iter().all(|a| set.contains(a)))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn labels(&self, menu: &[usize]) -> Vec<String> {
        menu.iter().map(|&a| self.actions[a].clone()).collect()
    }
}

#[derive(Serialize)]
struct MenuEntry {
    menu: Vec<String>,
    mass: Rational,
}

impl Serialize for MenuMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.masses
            .iter()
            .map(|(menu, mass)| MenuEntry {
                menu: self.labels(menu),
                mass: mass.clone(),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

/// `α(μ)(a)`, one row per posterior of `τ` in its order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecisionRule {
    pub actions: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

/// `σ(a|B)`, one row per menu in the measure's order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MenuChoice {
    pub actions: Vec<String>,
    pub menus: Vec<Vec<String>>,
    pub rows: Vec<Vec<Rational>>,
}

/// `σ̃(a|ω)` on the states the prior charges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentKernel {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

/// Either a feasible object or an action coalition violating the core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowOutcome<T> {
    Feasible(T),
    Violated(Vec<usize>),
}

impl<T> FlowOutcome<T> {
    pub fn feasible(self) -> Option<T> {
        match self {
            FlowOutcome::Feasible(t) => Some(t),
            FlowOutcome::Violated(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&[usize]> {
        match self {
            FlowOutcome::Feasible(_) => None,
            FlowOutcome::Violated(b) => Some(b),
        }
    }
}

/// Exact argmax set of expected utility, as labels.
pub fn optimal_actions(problem: &DecisionProblem, belief: &Distribution) -> Result<Vec<String>> {
    belief.expect_domain(problem.states(), "belief")?;
    Ok(problem
        .optimal_actions(belief.weights())
        .into_iter()
        .map(|a| problem.actions()[a].clone())
        .collect())
}

pub fn menu_measure(problem: &DecisionProblem, tau: &PosteriorDistribution) -> Result<MenuMeasure> {
    if tau.states() != problem.states() {
        return Err(Error::Dimension("posterior states do not match the problem".into()));
    }
    let mut masses: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for (p, w) in tau.posteriors.iter().zip(&tau.weights) {
        *masses
            .entry(problem.optimal_actions(p.weights()))
            .or_insert_with(Rational::zero) += w;
    }
    Ok(MenuMeasure {
        actions: problem.actions().to_vec(),
        masses,
    })
}

fn violates(marginal: &Distribution, menu: &MenuMeasure, set: &[usize]) -> bool {
    let supply: Rational = set.iter().map(|&a| marginal.weight(a)).sum();
    supply < menu.mass_within(set)
}

/// First nonempty subset of `within` violating the core, in size-then-lex order.
fn first_violation(marginal: &Distribution, menu: &MenuMeasure, within: &[usize]) -> Option<Vec<usize>> {
    for k in 1..=within.len() {
        let mut found = None;
        crate::geometry::combinations(within.len(), k, |idx| {
            if found.is_none() {
                let set: Vec<usize> = idx.iter().map(|&i| within[i]).collect();
                if violates(marginal, menu, &set) {
                    found = Some(set);
                }
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// `Σ_{a∈B} ν₀(a) ≥ Σ_{C⊆B} τ_A(C)` for every nonempty `B`; `Some(B)` is the
/// first violation.
pub fn core_check(marginal: &Distribution, menu: &MenuMeasure) -> Result<Option<Vec<usize>>> {
    marginal.expect_domain(&menu.actions, "marginal")?;
    let j = menu.actions.len();
    if j > SUBSET_CAP {
        return Err(Error::Cap(format!("{j} actions exceed the subset cap {SUBSET_CAP}")));
    }
    let all: Vec<usize> = (0..j).collect();
    Ok(first_violation(marginal, menu, &all))
}

/// Shrinks a violating coalition to one with no violating proper subset.
fn prune(marginal: &Distribution, menu: &MenuMeasure, mut set: Vec<usize>) -> Vec<usize> {
    let mut k = 0;
    while k < set.len() {
        let mut smaller = set.clone();
        smaller.remove(k);
        if !smaller.is_empty() && violates(marginal, menu, &smaller) {
            set = smaller;
        } else {
            k += 1;
        }
    }
    if set.len() <= SUBSET_CAP {
        if let Some(b) = first_violation(marginal, menu, &set) {
            return b;
        }
    }
    set
}

/// Supplies to demands along allowed edges, total one on each side. Returns
/// the flow matrix or the demand nodes reachable in the final residual graph.
fn gale_flow(supply: &[Rational], edges: &[Vec<usize>], demand: &[Rational]) -> FlowOutcome<Vec<Vec<Rational>>> {
    let (m, j) = (supply.len(), demand.len());
    let size = m + j + 2;
    let (source, sink) = (0, size - 1);
    let mut cap = vec![vec![Rational::zero(); size]; size];
    for (i, s) in supply.iter().enumerate() {
        cap[source][1 + i] = s.clone();
        for &a in &edges[i] {
            cap[1 + i][1 + m + a] = Rational::one();
        }
    }
    for (a, d) in demand.iter().enumerate() {
        cap[1 + m + a][sink] = d.clone();
    }
    let mut flow = vec![vec![Rational::zero(); size]; size];
    let residual = |cap: &[Vec<Rational>], flow: &[Vec<Rational>], u: usize, v: usize| &cap[u][v] - &flow[u][v];
    let total_supply: Rational = supply.iter().sum();
    let mut total = Rational::zero();
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && residual(&cap, &flow, u, v).is_positive() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            if total == total_supply {
                let f = (0..m)
                    .map(|i| (0..j).map(|a| flow[1 + i][1 + m + a].clone()).collect())
                    .collect();
                return FlowOutcome::Feasible(f);
            }
            let reached = (0..j).filter(|&a| parent[1 + m + a] != usize::MAX).collect();
            return FlowOutcome::Violated(reached);
        }
        let mut bottleneck: Option<Rational> = None;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            let r = residual(&cap, &flow, u, v);
            bottleneck = Some(match bottleneck {
                Some(b) => b.min(r),
                None => r,
            });
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = sink;
        while v != source {
            let u = parent[v];
            flow[u][v] += &b;
            flow[v][u] -= &b;
            v = u;
        }
        total += b;
    }
}

fn check_marginal(problem: &DecisionProblem, marginal: &Distribution) -> Result<()> {
    marginal.expect_domain(problem.actions(), "marginal")
}

/// Decision rule with `ν₀(a) = Σ_μ τ(μ)α(μ)(a)` supported on optimal actions,
/// or a minimal coalition violating the core.
pub fn implement_tau(
    problem: &DecisionProblem,
    tau: &PosteriorDistribution,
    marginal: &Distribution,
) -> Result<FlowOutcome<DecisionRule>> {
    check_marginal(problem, marginal)?;
    let menu = menu_measure(problem, tau)?;
    let edges: Vec<Vec<usize>> = tau
        .posteriors
        .iter()
        .map(|p| problem.optimal_actions(p.weights()))
        .collect();
    Ok(match gale_flow(&tau.weights, &edges, marginal.weights()) {
        FlowOutcome::Feasible(f) => {
            let rows = f
                .into_iter()
                .zip(&tau.weights)
                .map(|(row, w)| row.into_iter().map(|x| x / w).collect())
                .collect();
            FlowOutcome::Feasible(DecisionRule {
                actions: problem.actions().to_vec(),
                rows,
            })
        }
        FlowOutcome::Violated(b) => FlowOutcome::Violated(prune(marginal, &menu, b)),
    })
}

/// `σ(·|B)` supported in `B` with `ν₀(a) = Σ_{B∋a} τ_A(B)σ(a|B)`.
pub fn menu_choice(menu: &MenuMeasure, marginal: &Distribution) -> Result<FlowOutcome<MenuChoice>> {
    marginal.expect_domain(&menu.actions, "marginal")?;
    let menus: Vec<Vec<usize>> = menu.masses.keys().cloned().collect();
    let supply: Vec<Rational> = menu.masses.values().cloned().collect();
    Ok(match gale_flow(&supply, &menus, marginal.weights()) {
        FlowOutcome::Feasible(f) => {
            let rows = f
                .into_iter()
                .zip(&supply)
                .map(|(row, w)| row.into_iter().map(|x| x / w).collect())
                .collect();
            FlowOutcome::Feasible(MenuChoice {
                actions: menu.actions.clone(),
                menus: menus.iter().map(|b| menu.labels(b)).collect(),
                rows,
            })
        }
        FlowOutcome::Violated(b) => FlowOutcome::Violated(prune(marginal, menu, b)),
    })
}

/// Checks shape, stochasticity and support on optimal actions.
pub fn validate_rule(problem: &DecisionProblem, tau: &PosteriorDistribution, rule: &DecisionRule) -> Result<()> {
    if rule.actions != problem.actions() || rule.rows.len() != tau.len() {
        return Err(Error::Dimension(
            "decision rule does not match the problem and posteriors".into(),
        ));
    }
    for (row, p) in rule.rows.iter().zip(&tau.posteriors) {
        if row.len() != problem.num_actions() || row.iter().any(|x| x.is_negative()) {
            return Err(Error::Distribution("decision rule row is not a distribution".into()));
        }
        if row.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::Distribution("decision rule row does not sum to 1".into()));
        }
        let best = problem.optimal_actions(p.weights());
        if (0..row.len()).any(|a| row[a].is_positive() && !best.contains(&a)) {
            return Err(Error::Precondition("decision rule plays a non-optimal action".into()));
        }
    }
    Ok(())
}

/// `σ̃(a|ω) = Σ_μ [μ(ω)/μ₀(ω)] τ(μ) α(μ)(a)` for every `ω` with `μ₀(ω) > 0`.
pub fn experiment_kernel(
    problem: &DecisionProblem,
    prior: &Distribution,
    tau: &PosteriorDistribution,
    rule: &DecisionRule,
) -> Result<ExperimentKernel> {
    prior.expect_domain(problem.states(), "prior")?;
    if !tau.is_bayes_plausible(prior) {
        return Err(Error::Precondition("posteriors do not average to the prior".into()));
    }
    validate_rule(problem, tau, rule)?;
    let states = prior.support();
    let rows = states
        .iter()
        .map(|&w| {
            let m0 = prior.weight(w);
            (0..problem.num_actions())
                .map(|a| {
                    tau.posteriors
                        .iter()
                        .zip(&tau.weights)
                        .zip(&rule.rows)
                        .map(|((p, t), row)| &(&(p.weight(w) / m0) * t) * &row[a])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(ExperimentKernel {
        states: states.iter().map(|&w| problem.states()[w].clone()).collect(),
        actions: problem.actions().to_vec(),
        rows,
    })
}

/// Per-action posteriors of an obedient joint, weighted by the marginal.
pub fn tau_from_bce(
    problem: &DecisionProblem,
    joint: &JointDistribution,
    marginal: &Distribution,
) -> Result<PosteriorDistribution> {
    check_marginal(problem, marginal)?;
    let beliefs = recover_belief_system(joint, marginal)?;
    let posteriors = beliefs
        .posteriors
        .into_iter()
        .map(|p| Distribution::new(problem.states().to_vec(), p))
        .collect::<Result<Vec<_>>>()?;
    let weights = beliefs.actions.iter().map(|&a| marginal.weight(a).clone()).collect();
    PosteriorDistribution::new(posteriors, weights)
}
