//! Consistency of a prior and an action marginal by exact LP feasibility.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpResult, Relation, Sense};
use crate::model::{DecisionProblem, Distribution};
use crate::rational::Rational;

/// `pi[a][ω]`, one row per action of the problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JointDistribution {
    pub pi: Vec<Vec<Rational>>,
}

impl JointDistribution {
    pub fn action_marginal(&self) -> Vec<Rational> {
        self.pi.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn state_marginal(&self) -> Vec<Rational> {
        let n = self.pi.first().map_or(0, |r| r.len());
        (0..n).map(|w| self.pi.iter().map(|row| &row[w]).sum()).collect()
    }

    /// Checks obedience and both marginals exactly.
    pub fn validate(&self, problem: &DecisionProblem, prior: &Distribution, marginal: &Distribution) -> bool {
        if self.pi.len() != problem.num_actions()
            || self
                .pi
                .iter()
                .any(|r| r.len() != problem.num_states() || r.iter().any(|x| x.is_negative()))
        {
            return false;
        }
        if self.state_marginal() != prior.weights() || self.action_marginal() != marginal.weights() {
            return false;
        }
        (0..problem.num_actions()).all(|a| {
            (0..problem.num_actions()).all(|b| {
                let g = problem.diff(a, b);
                !crate::rational::dot(&self.pi[a], &g).is_negative()
            })
        })
    }
}

/// Posterior `μ(·|a)` for every action in the support of the marginal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BeliefSystem {
    pub actions: Vec<usize>,
    pub posteriors: Vec<Vec<Rational>>,
}

/// Multipliers proving infeasibility: `q(a) ≥ p(ω) + Σ_{a'} λ(a,a')[u(a,ω) − u(a',ω)]`
/// for all `a, ω` together with `q·ν₀ − p·μ₀ < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub p: Vec<Rational>,
    pub q: Vec<Rational>,
    pub lambda: Vec<Vec<Rational>>,
}

impl DualCertificate {
    /// `λ(a_j, a_{j+1})`, zero for the last action.
    pub fn lambda_up(&self) -> Vec<Rational> {
        let j = self.q.len();
        (0..j)
            .map(|a| {
                if a + 1 < j {
                    self.lambda[a][a + 1].clone()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }

    /// `λ(a_j, a_{j−1})`, zero for the first action.
    pub fn lambda_down(&self) -> Vec<Rational> {
        (0..self.q.len())
            .map(|a| {
                if a > 0 {
                    self.lambda[a][a - 1].clone()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }

    pub fn objective(&self, prior: &Distribution, marginal: &Distribution) -> Rational {
        crate::rational::dot(&self.q, marginal.weights()) - crate::rational::dot(&self.p, prior.weights())
    }

    pub fn is_feasible(&self, problem: &DecisionProblem) -> bool {
        let (n, j) = (problem.num_states(), problem.num_actions());
        if self.p.len() != n || self.q.len() != j || self.lambda.len() != j {
            return false;
        }
        if self.lambda.iter().flatten().any(|l| l.is_negative()) {
            return false;
        }
        (0..j).all(|a| {
            (0..n).all(|w| {
                let mut rhs = self.p[w].clone();
                for b in 0..j {
                    if b != a && !self.lambda[a][b].is_zero() {
                        rhs += &self.lambda[a][b] * &(problem.u(a, w) - problem.u(b, w));
                    }
                }
                self.q[a] >= rhs
            })
        })
    }

    /// Feasible with a strictly negative objective.
    pub fn certifies(&self, problem: &DecisionProblem, prior: &Distribution, marginal: &Distribution) -> bool {
        self.is_feasible(problem) && self.objective(prior, marginal).is_negative()
    }
}

impl Serialize for DualCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("lambda", &self.lambda)?;
        m.serialize_entry("lambda_down", &self.lambda_down())?;
        m.serialize_entry("lambda_up", &self.lambda_up())?;
        m.serialize_entry("p", &self.p)?;
        m.serialize_entry("q", &self.q)?;
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<Rational>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualCertificate>,
    /// A dominated action in the support of the marginal, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominated: Option<String>,
}

impl Verdict {
    pub fn joint(&self) -> Option<JointDistribution> {
        self.pi.clone().map(|pi| JointDistribution { pi })
    }
}

fn check_domains(problem: &DecisionProblem, prior: &Distribution, marginal: &Distribution) -> Result<()> {
    prior.expect_domain(problem.states(), "prior")?;
    marginal.expect_domain(problem.actions(), "marginal")
}

/// Decides consistency of `(μ₀, ν₀)` with a witness or a dual certificate.
pub fn check_bce(problem: &DecisionProblem, prior: &Distribution, marginal: &Distribution) -> Result<Verdict> {
    check_domains(problem, prior, marginal)?;
    let (n, j) = (problem.num_states(), problem.num_actions());
    let support = marginal.support();
    let dominated = support
        .iter()
        .find(|&&a| problem.is_dominated(a))
        .map(|&a| problem.actions()[a].clone());
    let k = support.len();
    let var = |s: usize, w: usize| s * n + w;
    let mut lp = LinearProgram::feasibility(k * n);
    for w in 0..n {
        let terms: Vec<(usize, Rational)> = (0..k).map(|s| (var(s, w), Rational::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, prior.weight(w).clone());
    }
    for (s, &a) in support.iter().enumerate() {
        let terms: Vec<(usize, Rational)> = (0..n).map(|w| (var(s, w), Rational::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, marginal.weight(a).clone());
    }
    let mut obedience_rows = Vec::new();
    for (s, &a) in support.iter().enumerate() {
        for b in 0..j {
            if b == a {
                continue;
            }
            let g = problem.diff(a, b);
            let terms: Vec<(usize, Rational)> = g.into_iter().enumerate().map(|(w, c)| (var(s, w), c)).collect();
            lp.add_sparse(&terms, Relation::Ge, Rational::zero());
            obedience_rows.push((a, b));
        }
    }
    match lp.find_feasible() {
        LpResult::Optimal(sol) => {
            let mut pi = vec![vec![Rational::zero(); n]; j];
            for (s, &a) in support.iter().enumerate() {
                for w in 0..n {
                    pi[a][w] = sol.x[var(s, w)].clone();
                }
            }
            Ok(Verdict {
                consistent: true,
                pi: Some(pi),
                dual: None,
                dominated,
            })
        }
        LpResult::Infeasible(y) => {
            let p: Vec<Rational> = y[..n].to_vec();
            let mut q = vec![Rational::zero(); j];
            let pmax = p.iter().max().cloned().unwrap_or_else(Rational::zero);
            for (a, qa) in q.iter_mut().enumerate() {
                *qa = pmax.clone();
                if let Some(s) = support.iter().position(|&x| x == a) {
                    *qa = -&y[n + s];
                }
            }
            let mut lambda = vec![vec![Rational::zero(); j]; j];
            for (r, &(a, b)) in obedience_rows.iter().enumerate() {
                lambda[a][b] = y[n + k + r].clone();
            }
            let cert = DualCertificate { p, q, lambda };
            debug_assert!(cert.certifies(problem, prior, marginal));
            Ok(Verdict {
                consistent: false,
                pi: None,
                dual: Some(cert),
                dominated,
            })
        }
        LpResult::Unbounded => unreachable!("phase one is bounded"),
    }
}

/// `Σ_a ν₀(a) max_{μ∈Δ*(a)} p·μ`; `None` stands for `−∞`.
pub fn support_value(problem: &DecisionProblem, marginal: &Distribution, p: &[Rational]) -> Result<Option<Rational>> {
    marginal.expect_domain(problem.actions(), "marginal")?;
    if p.len() != problem.num_states() {
        return Err(Error::Dimension(format!(
            "direction has {} entries for {} states",
            p.len(),
            problem.num_states()
        )));
    }
    let mut total = Rational::zero();
    for a in marginal.support() {
        match problem.max_over_optimal_set(a, p) {
            Some(v) => total += marginal.weight(a) * &v,
            None => return Ok(None),
        }
    }
    Ok(Some(total))
}

/// Range of `Σ_{a∈S} Σ_ω π(a,ω)` over obedient `π` with state marginal `μ₀`.
pub fn extreme_marginal_bounds(
    problem: &DecisionProblem,
    prior: &Distribution,
    action_set: &[usize],
) -> Result<(Rational, Rational)> {
    prior.expect_domain(problem.states(), "prior")?;
    if action_set.is_empty() {
        return Err(Error::Precondition("empty action set".into()));
    }
    let (n, j) = (problem.num_states(), problem.num_actions());
    let var = |a: usize, w: usize| a * n + w;
    let mut lp = LinearProgram::new(j * n, Sense::Maximize);
    for w in 0..n {
        let terms: Vec<(usize, Rational)> = (0..j).map(|a| (var(a, w), Rational::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, prior.weight(w).clone());
    }
    for a in 0..j {
        for b in 0..j {
            if a != b {
                let terms: Vec<(usize, Rational)> = problem
                    .diff(a, b)
                    .into_iter()
                    .enumerate()
                    .map(|(w, c)| (var(a, w), c))
                    .collect();
                lp.add_sparse(&terms, Relation::Ge, Rational::zero());
            }
        }
    }
    let mut c = vec![Rational::zero(); j * n];
    for &a in action_set {
        for w in 0..n {
            c[var(a, w)] = Rational::one();
        }
    }
    lp.set_objective(c);
    let hi = lp.solve().optimal().expect("obedient joints always exist").value;
    lp.sense = Sense::Minimize;
    let lo = lp.solve().optimal().expect("obedient joints always exist").value;
    Ok((lo, hi))
}

/// `μ(ω|a) = π(a,ω)/ν₀(a)` on the support of the marginal.
pub fn recover_belief_system(joint: &JointDistribution, marginal: &Distribution) -> Result<BeliefSystem> {
    if joint.action_marginal() != marginal.weights() {
        return Err(Error::Distribution(
            "joint action marginal differs from the marginal".into(),
        ));
    }
    let actions = marginal.support();
    let posteriors = actions
        .iter()
        .map(|&a| {
            let m = marginal.weight(a);
            joint.pi[a].iter().map(|x| x / m).collect()
        })
        .collect();
    Ok(BeliefSystem { actions, posteriors })
}
