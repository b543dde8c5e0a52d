//! Small named decision problems used in docs, tests and demos.

use crate::model::{labels, DecisionProblem};
use crate::rational::Rational;

/// Three states, three actions, payoff one for matching the state.
pub fn match3() -> DecisionProblem {
    DecisionProblem::from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
}

/// Four states; `u(a₁,·) = 0`, `u(a₂,·) = (−9,−5,−1,5)`.
pub fn fourstate() -> DecisionProblem {
    DecisionProblem::from_ints(&[&[0, 0, 0, 0], &[-9, -5, -1, 5]])
}

/// `u(a_j, ω_k) = −|k − j|` on three states and actions.
pub fn abs3() -> DecisionProblem {
    DecisionProblem::from_ints(&[&[0, -1, -2], &[-1, 0, -1], &[-2, -1, 0]])
}

/// Two-by-two matching.
pub fn coin() -> DecisionProblem {
    DecisionProblem::from_ints(&[&[1, 0], &[0, 1]])
}

/// States `{−1, 1}`, `u(a₁,·) = 0`, `u(a₂,ω) = ω + θ`.
pub fn shift(theta: &Rational) -> DecisionProblem {
    let one = Rational::one();
    DecisionProblem::new(
        vec!["-1".into(), "1".into()],
        labels("a", 2),
        vec![
            vec![Rational::zero(), Rational::zero()],
            vec![theta - &one, theta + &one],
        ],
    )
    .expect("well-formed")
}

/// Hypothesis test: `d = c_I` on the flagged states and `−c_II` elsewhere.
pub fn hypothesis_test(flagged: &[bool], c_one: &Rational, c_two: &Rational) -> DecisionProblem {
    let d: Vec<Rational> = flagged
        .iter()
        .map(|&f| if f { c_one.clone() } else { -c_two })
        .collect();
    DecisionProblem::new(
        labels("w", flagged.len()),
        labels("a", 2),
        vec![vec![Rational::zero(); flagged.len()], d],
    )
    .expect("well-formed")
}
