//! Comparative statics, consistency across decision problems, and the
//! private-payoff and ring-network game reductions.

use serde::{Deserialize, Serialize};

use crate::consistency::{check_bce, Verdict};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{DecisionProblem, Distribution};
use crate::rational::Rational;
use crate::structure::fit_aud;
use crate::support_tests::bounds_binary_action;

/// Separator in product action labels.
pub const PROFILE_SEPARATOR: char = '|';

fn aud_d(problem: &DecisionProblem) -> Result<Vec<Rational>> {
    fit_aud(problem)
        .map(|c| c.d_original())
        .ok_or_else(|| Error::Precondition("problem does not have affine utility differences".into()))
}

fn expectation(weights: &[Rational], f: impl Fn(usize) -> Rational) -> Rational {
    weights.iter().enumerate().map(|(w, m)| m * &f(w)).sum()
}

/// Whether `spread ∘ d⁻¹` is a mean-preserving spread of `base ∘ d⁻¹`.
pub fn d_mps_check(problem: &DecisionProblem, base: &Distribution, spread: &Distribution) -> Result<bool> {
    base.expect_domain(problem.states(), "prior")?;
    spread.expect_domain(problem.states(), "spread prior")?;
    let d = aud_d(problem)?;
    let (b, s) = (base.weights(), spread.weights());
    if expectation(b, |w| d[w].clone()) != expectation(s, |w| d[w].clone()) {
        return Ok(false);
    }
    Ok(d.iter().all(|star| {
        let up = |w: usize| d[w].clone().min(star.clone());
        let down = |w: usize| (-&d[w]).min(-star);
        expectation(s, up) <= expectation(b, up) && expectation(s, down) <= expectation(b, down)
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreservationReport {
    pub base: Verdict,
    pub spread: Verdict,
    /// Consistency of the base pair carried over to the spread pair.
    pub holds: bool,
}

pub fn preservation_check(
    problem: &DecisionProblem,
    prior: &Distribution,
    spread: &Distribution,
    marginal: &Distribution,
) -> Result<PreservationReport> {
    if !d_mps_check(problem, prior, spread)? {
        return Err(Error::Precondition(
            "spread prior is not a d-mean-preserving spread".into(),
        ));
    }
    let base = check_bce(problem, prior, marginal)?;
    let spread = check_bce(problem, spread, marginal)?;
    let holds = !base.consistent || spread.consistent;
    Ok(PreservationReport { base, spread, holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyMode {
    /// `u(a_J,·,θ) = u(a_J,·) + θ·s`.
    Shift,
    /// A table per θ whose binary difference is ratio ordered.
    Ratio,
    /// A table per θ with no premise.
    Table,
}

/// Problems indexed by a strictly increasing parameter grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFamily {
    pub mode: FamilyMode,
    pub theta: Vec<Rational>,
    pub problems: Vec<DecisionProblem>,
}

fn check_grid(theta: &[Rational]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::Precondition("empty parameter grid".into()));
    }
    if theta.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("parameter grid must be strictly increasing".into()));
    }
    Ok(())
}

impl ProblemFamily {
    pub fn shift(base: &DecisionProblem, theta: Vec<Rational>, shift: &[Rational]) -> Result<Self> {
        check_grid(&theta)?;
        if shift.len() != base.num_states() {
            return Err(Error::Dimension(
                "shift vector length differs from the state count".into(),
            ));
        }
        let last = base.num_actions() - 1;
        let problems = theta
            .iter()
            .map(|t| {
                let mut u = base.utility().to_vec();
                for (x, s) in u[last].iter_mut().zip(shift) {
                    *x += t * s;
                }
                DecisionProblem::new(base.states().to_vec(), base.actions().to_vec(), u)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProblemFamily {
            mode: FamilyMode::Shift,
            theta,
            problems,
        })
    }

    pub fn tables(
        base: &DecisionProblem,
        mode: FamilyMode,
        theta: Vec<Rational>,
        utilities: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        check_grid(&theta)?;
        if utilities.len() != theta.len() {
            return Err(Error::Dimension(format!(
                "{} tables for {} parameters",
                utilities.len(),
                theta.len()
            )));
        }
        let problems = utilities
            .into_iter()
            .map(|u| DecisionProblem::new(base.states().to_vec(), base.actions().to_vec(), u))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProblemFamily { mode, theta, problems })
    }

    /// `d(·,θ) = u(a₂,·,θ) − u(a₁,·,θ)` for each grid point.
    fn binary_differences(&self) -> Result<Vec<Vec<Rational>>> {
        self.problems
            .iter()
            .map(|p| {
                if p.num_actions() != 2 {
                    return Err(Error::Precondition("family members must have two actions".into()));
                }
                Ok(p.diff(1, 0))
            })
            .collect()
    }

    /// Validates the premise attached to the mode.
    pub fn check_premise(&self) -> Result<()> {
        let ds = self.binary_differences()?;
        match self.mode {
            FamilyMode::Table => Ok(()),
            FamilyMode::Shift => {
                if ds.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b)) {
                    Ok(())
                } else {
                    Err(Error::Precondition(
                        "utility difference is not nondecreasing in the parameter".into(),
                    ))
                }
            }
            FamilyMode::Ratio => {
                let n = ds[0].len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| ds[0][a].cmp(&ds[0][b]).then(a.cmp(&b)));
                for (x, &lo) in order.iter().enumerate() {
                    for &hi in &order[x + 1..] {
                        if ds.iter().any(|d| d[hi].is_zero()) {
                            continue;
                        }
                        let ratios: Vec<Rational> = ds.iter().map(|d| &d[lo] / &d[hi]).collect();
                        if ratios.windows(2).any(|w| w[0] > w[1]) {
                            return Err(Error::Precondition("utility difference is not ratio ordered".into()));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsRow {
    pub theta: Rational,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsTable {
    pub rows: Vec<BoundsRow>,
    /// Both columns nondecreasing in θ.
    pub monotone: bool,
}

/// Bounds on `ν₀(a₂)` at every grid point, after validating the premise.
pub fn shift_bounds_table(family: &ProblemFamily, prior: &Distribution) -> Result<BoundsTable> {
    family.check_premise()?;
    let rows = family
        .theta
        .iter()
        .zip(&family.problems)
        .map(|(t, p)| {
            let (lower, upper) = bounds_binary_action(p, prior)?;
            Ok(BoundsRow {
                theta: t.clone(),
                lower,
                upper,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows
        .windows(2)
        .all(|w| w[0].lower <= w[1].lower && w[0].upper <= w[1].upper);
    Ok(BoundsTable { rows, monotone })
}

fn check_label(label: &str) -> Result<()> {
    if label.contains(PROFILE_SEPARATOR) {
        return Err(Error::DuplicateLabel(format!(
            "action label {label:?} contains the profile separator"
        )));
    }
    Ok(())
}

/// All action profiles, first problem most significant.
pub fn profiles(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Auxiliary problem with action profiles and summed payoffs.
pub fn product_problem(problems: &[DecisionProblem]) -> Result<DecisionProblem> {
    let first = problems
        .first()
        .ok_or_else(|| Error::Precondition("no decision problems".into()))?;
    if problems.iter().any(|p| p.states() != first.states()) {
        return Err(Error::Dimension("decision problems have different state sets".into()));
    }
    for p in problems {
        for a in p.actions() {
            check_label(a)?;
        }
    }
    let sizes: Vec<usize> = problems.iter().map(|p| p.num_actions()).collect();
    let all = profiles(&sizes);
    let labels = all
        .iter()
        .map(|prof| {
            prof.iter()
                .zip(problems)
                .map(|(&a, p)| p.actions()[a].as_str())
                .collect::<Vec<_>>()
                .join(&PROFILE_SEPARATOR.to_string())
        })
        .collect();
    let utility = all
        .iter()
        .map(|prof| {
            (0..first.num_states())
                .map(|w| prof.iter().zip(problems).map(|(&a, p)| p.u(a, w)).sum())
                .collect()
        })
        .collect();
    DecisionProblem::new(first.states().to_vec(), labels, utility)
}

/// Consistency of a joint marginal over action profiles across problems.
pub fn across_problems(
    problems: &[DecisionProblem],
    joint_marginal: &Distribution,
    prior: &Distribution,
) -> Result<Verdict> {
    let product = product_problem(problems)?;
    check_bce(&product, prior, joint_marginal)
}

/// Marginal of a profile distribution on one coordinate.
pub fn project_marginal(problems: &[DecisionProblem], joint_marginal: &Distribution, n: usize) -> Result<Distribution> {
    let sizes: Vec<usize> = problems.iter().map(|p| p.num_actions()).collect();
    let all = profiles(&sizes);
    if joint_marginal.len() != all.len() {
        return Err(Error::Dimension(
            "joint marginal does not match the action profiles".into(),
        ));
    }
    let mut w = vec![Rational::zero(); sizes[n]];
    for (prof, m) in all.iter().zip(joint_marginal.weights()) {
        w[prof[n]] += m;
    }
    Distribution::new(problems[n].actions().to_vec(), w)
}

/// Players whose payoffs depend only on their own action and the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateGame {
    pub players: Vec<DecisionProblem>,
}

impl PrivateGame {
    pub fn new(players: Vec<DecisionProblem>) -> Result<Self> {
        product_problem(&players)?;
        Ok(PrivateGame { players })
    }

    /// From full payoff tables `payoffs[n][profile][ω]` over profiles in
    /// `profiles` order; errors unless each depends only on the own action.
    pub fn from_general(
        states: Vec<String>,
        actions: Vec<Vec<String>>,
        payoffs: &[Vec<Vec<Rational>>],
    ) -> Result<Self> {
        let sizes: Vec<usize> = actions.iter().map(|a| a.len()).collect();
        let all = profiles(&sizes);
        if payoffs.len() != actions.len() || payoffs.iter().any(|t| t.len() != all.len()) {
            return Err(Error::Dimension(
                "payoff tables do not match the action profiles".into(),
            ));
        }
        let mut players = Vec::new();
        for (n, table) in payoffs.iter().enumerate() {
            let mut own: Vec<Option<&Vec<Rational>>> = vec![None; sizes[n]];
            for (prof, row) in all.iter().zip(table) {
                match own[prof[n]] {
                    None => own[prof[n]] = Some(row),
                    Some(prev) if prev == row => {}
                    Some(_) => {
                        return Err(Error::Precondition(format!(
                            "payoff of player {} depends on other players' actions",
                            n + 1
                        )))
                    }
                }
            }
            let utility = own
                .into_iter()
                .map(|r| r.expect("every action appears").clone())
                .collect();
            players.push(DecisionProblem::new(states.clone(), actions[n].clone(), utility)?);
        }
        Self::new(players)
    }
}

/// Public-signal consistency via the auxiliary summed-payoff problem.
pub fn public_bce_check(game: &PrivateGame, prior: &Distribution, joint_marginal: &Distribution) -> Result<Verdict> {
    across_problems(&game.players, joint_marginal, prior)
}

/// Player 1 plays against the state; player `n ≥ 2` against player `n−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingGame {
    pub states: Vec<String>,
    pub actions: Vec<Vec<String>>,
    /// `v₁(a₁,ω)`, rows by own action.
    pub first: Vec<Vec<Rational>>,
    /// `v_n(a_{n−1},a_n)` for `n ≥ 2`, rows by the predecessor's action.
    pub links: Vec<Vec<Vec<Rational>>>,
}

impl RingGame {
    pub fn new(
        states: Vec<String>,
        actions: Vec<Vec<String>>,
        first: Vec<Vec<Rational>>,
        links: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        if actions.is_empty() || links.len() + 1 != actions.len() {
            return Err(Error::Dimension("need one payoff table per player".into()));
        }
        let game = RingGame {
            states,
            actions,
            first,
            links,
        };
        for n in 0..game.actions.len() {
            game.link_problem(n)?;
        }
        Ok(game)
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    /// Single-agent problem of player `n` (zero-based): states are the
    /// predecessor's actions for `n ≥ 1`.
    pub fn link_problem(&self, n: usize) -> Result<DecisionProblem> {
        if n == 0 {
            return DecisionProblem::new(self.states.clone(), self.actions[0].clone(), self.first.clone());
        }
        let table = &self.links[n - 1];
        let (prev, own) = (&self.actions[n - 1], &self.actions[n]);
        if table.len() != prev.len() || table.iter().any(|r| r.len() != own.len()) {
            return Err(Error::Dimension(format!(
                "payoff table of player {} has the wrong shape",
                n + 1
            )));
        }
        let utility = (0..own.len())
            .map(|a| (0..prev.len()).map(|b| table[b][a].clone()).collect())
            .collect();
        DecisionProblem::new(prev.clone(), own.clone(), utility)
    }

    /// `u_n(a, ω)` on the full game.
    pub fn payoff(&self, n: usize, profile: &[usize], w: usize) -> &Rational {
        if n == 0 {
            &self.first[profile[0]][w]
        } else {
            &self.links[n - 1][profile[n - 1]][profile[n]]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingVerdict {
    pub consistent: bool,
    pub links: Vec<Verdict>,
    /// First failing player, one-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_link: Option<usize>,
    /// `π̂(a,ω)` by profile (player 1 most significant) then state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<Rational>>>,
}

fn check_ring_inputs(game: &RingGame, prior: &Distribution, marginals: &[Distribution]) -> Result<()> {
    prior.expect_domain(&game.states, "prior")?;
    if marginals.len() != game.num_players() {
        return Err(Error::Dimension(format!(
            "{} marginals for {} players",
            marginals.len(),
            game.num_players()
        )));
    }
    for (m, a) in marginals.iter().zip(&game.actions) {
        m.expect_domain(a, "player marginal")?;
    }
    Ok(())
}

/// Link-by-link check with a revalidated chain witness.
pub fn ring_check(game: &RingGame, prior: &Distribution, marginals: &[Distribution]) -> Result<RingVerdict> {
    check_ring_inputs(game, prior, marginals)?;
    let mut links = Vec::new();
    for n in 0..game.num_players() {
        let p = game.link_problem(n)?;
        let link_prior = if n == 0 {
            prior.clone()
        } else {
            marginals[n - 1].clone()
        };
        links.push(check_bce(&p, &link_prior, &marginals[n])?);
    }
    let failing_link = links.iter().position(|v| !v.consistent).map(|n| n + 1);
    if failing_link.is_some() {
        return Ok(RingVerdict {
            consistent: false,
            links,
            failing_link,
            witness: None,
        });
    }
    let witness = chain_witness(game, &links, marginals);
    if !validate_ring_witness(game, prior, marginals, &witness) {
        return Err(Error::Precondition("chain witness failed revalidation".into()));
    }
    Ok(RingVerdict {
        consistent: true,
        links,
        failing_link: None,
        witness: Some(witness),
    })
}

/// `π̂(a,ω) = π₁(a₁,ω) Π_n π_n(a_n|a_{n−1})`.
fn chain_witness(game: &RingGame, links: &[Verdict], marginals: &[Distribution]) -> Vec<Vec<Rational>> {
    let joints: Vec<Vec<Vec<Rational>>> = links.iter().map(|v| v.pi.clone().expect("consistent link")).collect();
    let sizes: Vec<usize> = game.actions.iter().map(|a| a.len()).collect();
    profiles(&sizes)
        .iter()
        .map(|prof| {
            (0..game.states.len())
                .map(|w| {
                    let mut x = joints[0][prof[0]][w].clone();
                    for n in 1..prof.len() {
                        if x.is_zero() {
                            break;
                        }
                        // pi_n[a_n][a_{n-1}] / ν_{n-1}(a_{n-1})
                        x *= &(&joints[n][prof[n]][prof[n - 1]] / marginals[n - 1].weight(prof[n - 1]));
                    }
                    x
                })
                .collect()
        })
        .collect()
}

/// Marginals and every player's obedience on the full game.
pub fn validate_ring_witness(
    game: &RingGame,
    prior: &Distribution,
    marginals: &[Distribution],
    pi: &[Vec<Rational>],
) -> bool {
    let sizes: Vec<usize> = game.actions.iter().map(|a| a.len()).collect();
    let all = profiles(&sizes);
    let states = game.states.len();
    if pi.len() != all.len()
        || pi
            .iter()
            .any(|r| r.len() != states || r.iter().any(|x| x.is_negative()))
    {
        return false;
    }
    let state_marginal: Vec<Rational> = (0..states).map(|w| pi.iter().map(|r| &r[w]).sum()).collect();
    if state_marginal != prior.weights() {
        return false;
    }
    for n in 0..sizes.len() {
        let mut m = vec![Rational::zero(); sizes[n]];
        for (prof, row) in all.iter().zip(pi) {
            m[prof[n]] += row.iter().sum::<Rational>();
        }
        if m != marginals[n].weights() {
            return false;
        }
        for a in 0..sizes[n] {
            for b in 0..sizes[n] {
                let mut gain = Rational::zero();
                for (prof, row) in all.iter().zip(pi).filter(|(p, _)| p[n] == a) {
                    let mut dev = prof.clone();
                    dev[n] = b;
                    for (w, x) in row.iter().enumerate() {
                        gain += x * &(game.payoff(n, prof, w) - game.payoff(n, &dev, w));
                    }
                }
                if gain.is_negative() {
                    return false;
                }
            }
        }
    }
    true
}

/// Direct feasibility of an obedient `π` on the full game with the state
/// marginal and every player's action marginal fixed.
pub fn flattened_ring_check(game: &RingGame, prior: &Distribution, marginals: &[Distribution]) -> Result<bool> {
    check_ring_inputs(game, prior, marginals)?;
    let sizes: Vec<usize> = game.actions.iter().map(|a| a.len()).collect();
    let all = profiles(&sizes);
    let states = game.states.len();
    let var = |k: usize, w: usize| k * states + w;
    let mut lp = LinearProgram::feasibility(all.len() * states);
    for w in 0..states {
        let terms: Vec<(usize, Rational)> = (0..all.len()).map(|k| (var(k, w), Rational::one())).collect();
        lp.add_sparse(&terms, Relation::Eq, prior.weight(w).clone());
    }
    for n in 0..sizes.len() {
        for a in 0..sizes[n] {
            let members: Vec<usize> = (0..all.len()).filter(|&k| all[k][n] == a).collect();
            let terms: Vec<(usize, Rational)> = members
                .iter()
                .flat_map(|&k| (0..states).map(move |w| (var(k, w), Rational::one())))
                .collect();
            lp.add_sparse(&terms, Relation::Eq, marginals[n].weight(a).clone());
            for b in 0..sizes[n] {
                if b == a {
                    continue;
                }
                let mut terms = Vec::new();
                for &k in &members {
                    let mut dev = all[k].clone();
                    dev[n] = b;
                    for w in 0..states {
                        let g = game.payoff(n, &all[k], w) - game.payoff(n, &dev, w);
                        if !g.is_zero() {
                            terms.push((var(k, w), g));
                        }
                    }
                }
                lp.add_sparse(&terms, Relation::Ge, Rational::zero());
            }
        }
    }
    Ok(lp.find_feasible().is_feasible())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{coin, shift};
    use crate::rational::{q, r};

    #[test]
    fn product_labels_and_payoffs() {
        let p = product_problem(&[coin(), coin()]).unwrap();
        assert_eq!(p.actions(), &["a1|a1", "a1|a2", "a2|a1", "a2|a2"]);
        assert_eq!(p.utility()[0], vec![r(2), r(0)]);
        assert_eq!(p.utility()[1], vec![r(1), r(1)]);
    }

    #[test]
    fn separator_in_label_is_rejected() {
        let p = DecisionProblem::new(
            coin().states().to_vec(),
            vec!["x|y".into(), "z".into()],
            coin().utility().to_vec(),
        )
        .unwrap();
        assert!(matches!(product_problem(&[p]), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn shift_family_instantiates() {
        let f = ProblemFamily::shift(&shift(&r(0)), vec![q(-1, 2), r(0)], &[r(1), r(1)]).unwrap();
        assert_eq!(f.problems[0], shift(&q(-1, 2)));
        assert!(ProblemFamily::shift(&shift(&r(0)), vec![r(0), r(0)], &[r(1), r(1)]).is_err());
    }

    #[test]
    fn private_game_rejects_interaction() {
        let states = coin().states().to_vec();
        let actions = vec![vec!["x".to_string(), "y".to_string()]; 2];
        let own = |a: usize| if a == 0 { vec![r(1), r(0)] } else { vec![r(0), r(1)] };
        let table: Vec<Vec<Rational>> = profiles(&[2, 2]).iter().map(|p| own(p[0])).collect();
        let other: Vec<Vec<Rational>> = profiles(&[2, 2]).iter().map(|p| own(p[1])).collect();
        assert!(PrivateGame::from_general(states.clone(), actions.clone(), &[table.clone(), table.clone()]).is_err());
        assert!(PrivateGame::from_general(states, actions, &[table, other]).is_ok());
    }
}
