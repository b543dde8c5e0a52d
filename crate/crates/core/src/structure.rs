//! Structural classes of decision problems and their certificates.

use serde::Serialize;

use crate::lp::{LinearProgram, Relation};
use crate::model::DecisionProblem;
use crate::rational::Rational;

/// `d(a_{j+1},a_j,·) = γ_j d + κ_j` with states sorted so `d` is nondecreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AudCertificate {
    /// New state `k` is original state `order[k]`.
    pub order: Vec<usize>,
    /// `d` in the sorted order.
    pub d: Vec<Rational>,
    pub gamma: Vec<Rational>,
    pub kappa: Vec<Rational>,
}

impl AudCertificate {
    /// `d` indexed by original states.
    pub fn d_original(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.d.len()];
        for (k, &w) in self.order.iter().enumerate() {
            out[w] = self.d[k].clone();
        }
        out
    }
}

/// Each `d(a_{j+1},a_j,·)` takes the values `low[j] < 0 < high[j]`, the low
/// value exactly on the first `istar[j]` states of `order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoStepCertificate {
    pub order: Vec<usize>,
    pub low: Vec<Rational>,
    pub high: Vec<Rational>,
    pub istar: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StructureTag {
    BinaryState,
    BinaryAction,
    #[serde(rename = "AUD")]
    AffineUtilityDifferences,
    TwoStep,
    SmallState,
    MonotoneConcave,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureClass {
    pub tag: StructureTag,
    /// State order attached to the tag's certificate (identity otherwise).
    pub order: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aud: Option<AudCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_step: Option<TwoStepCertificate>,
    /// State order under which Assumption-style monotonicity and concavity hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_concave: Option<Vec<usize>>,
}

fn differences(problem: &DecisionProblem) -> Vec<Vec<Rational>> {
    (0..problem.num_actions().saturating_sub(1))
        .map(|j| problem.diff(j + 1, j))
        .collect()
}

fn is_constant(v: &[Rational]) -> bool {
    v.iter().all(|x| x == &v[0])
}

/// Stable sort of state indices by a key, ties by original index.
fn order_by<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| key(a).cmp(&key(b)).then(a.cmp(&b)));
    idx
}

/// Weakly decreasing differences in the action index, state by state.
pub fn concave_part_one(problem: &DecisionProblem) -> bool {
    let ds = differences(problem);
    ds.windows(2).all(|w| w[1].iter().zip(&w[0]).all(|(x, y)| x <= y))
}

/// No belief makes two adjacent differences vanish together.
pub fn concave_part_two(problem: &DecisionProblem) -> bool {
    let ds = differences(problem);
    let n = problem.num_states();
    ds.windows(2).all(|w| {
        let mut lp = LinearProgram::feasibility(n);
        lp.add(vec![Rational::one(); n], Relation::Eq, Rational::one());
        lp.add(w[0].clone(), Relation::Eq, Rational::zero());
        lp.add(w[1].clone(), Relation::Eq, Rational::zero());
        !lp.find_feasible().is_feasible()
    })
}

pub fn is_concave_star(problem: &DecisionProblem) -> bool {
    concave_part_one(problem) && concave_part_two(problem)
}

/// Exact AUD fit; requires concavity* as well.
pub fn fit_aud(problem: &DecisionProblem) -> Option<AudCertificate> {
    let n = problem.num_states();
    let ds = differences(problem);
    let base = ds.iter().find(|d| !is_constant(d)).cloned();
    let (d, gamma, kappa) = match base {
        None => (
            vec![Rational::zero(); n],
            vec![Rational::one(); ds.len()],
            ds.iter().map(|d| d[0].clone()).collect(),
        ),
        Some(d) => {
            let (lo, hi) = {
                let mut lo = 0;
                let mut hi = 0;
                for w in 0..n {
                    if d[w] < d[lo] {
                        lo = w;
                    }
                    if d[w] > d[hi] {
                        hi = w;
                    }
                }
                (lo, hi)
            };
            let mut gamma = Vec::new();
            let mut kappa = Vec::new();
            for dj in &ds {
                let g = (&dj[hi] - &dj[lo]) / (&d[hi] - &d[lo]);
                if !g.is_positive() {
                    return None;
                }
                let k = &dj[lo] - &(&g * &d[lo]);
                if (0..n).any(|w| dj[w] != &(&g * &d[w]) + &k) {
                    return None;
                }
                gamma.push(g);
                kappa.push(k);
            }
            (d, gamma, kappa)
        }
    };
    if !is_concave_star(problem) {
        return None;
    }
    let order = order_by(n, |w| d[w].clone());
    let d = order.iter().map(|&w| d[w].clone()).collect();
    Some(AudCertificate { order, d, gamma, kappa })
}

/// Two-valued differences with nested low sets.
pub fn fit_two_step(problem: &DecisionProblem) -> Option<TwoStepCertificate> {
    let n = problem.num_states();
    let ds = differences(problem);
    if ds.is_empty() {
        return None;
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut low_sets = Vec::new();
    for d in &ds {
        let lo = d.iter().min().cloned()?;
        let hi = d.iter().max().cloned()?;
        if !(lo.is_negative() && hi.is_positive()) || d.iter().any(|x| x != &lo && x != &hi) {
            return None;
        }
        low_sets.push((0..n).map(|w| d[w] == lo).collect::<Vec<bool>>());
        low.push(lo);
        high.push(hi);
    }
    for w in low_sets.windows(2) {
        if (0..n).any(|s| w[0][s] && !w[1][s]) {
            return None;
        }
    }
    if !concave_part_one(problem) {
        return None;
    }
    let first_low = |s: usize| low_sets.iter().position(|l| l[s]).unwrap_or(ds.len());
    let order = order_by(n, first_low);
    let istar = low_sets.iter().map(|l| l.iter().filter(|b| **b).count()).collect();
    Some(TwoStepCertificate {
        order,
        low,
        high,
        istar,
    })
}

/// A common state order making every difference nondecreasing, plus concavity*.
pub fn fit_monotone_concave(problem: &DecisionProblem) -> Option<Vec<usize>> {
    let n = problem.num_states();
    let ds = differences(problem);
    let order = order_by(n, |w| ds.iter().map(|d| d[w].clone()).collect::<Vec<_>>());
    let monotone = ds.iter().all(|d| order.windows(2).all(|p| d[p[0]] <= d[p[1]]));
    (monotone && is_concave_star(problem)).then_some(order)
}

pub fn classify(problem: &DecisionProblem) -> StructureClass {
    let n = problem.num_states();
    let j = problem.num_actions();
    let aud = fit_aud(problem);
    let two_step = fit_two_step(problem);
    let monotone_concave = fit_monotone_concave(problem);
    let identity: Vec<usize> = (0..n).collect();
    let (tag, order) = if n == 2 {
        (StructureTag::BinaryState, identity)
    } else if j == 2 && aud.is_some() {
        (
            StructureTag::BinaryAction,
            aud.as_ref().map(|c| c.order.clone()).unwrap_or(identity),
        )
    } else if let Some(c) = &aud {
        (StructureTag::AffineUtilityDifferences, c.order.clone())
    } else if let Some(c) = &two_step {
        (StructureTag::TwoStep, c.order.clone())
    } else if n <= 3 {
        (StructureTag::SmallState, identity)
    } else if let Some(o) = &monotone_concave {
        (StructureTag::MonotoneConcave, o.clone())
    } else {
        (StructureTag::General, identity)
    };
    StructureClass {
        tag,
        order,
        aud,
        two_step,
        monotone_concave,
    }
}
