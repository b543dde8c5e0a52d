#![allow(dead_code)]

use bce_core::model::labels;
use bce_core::rational::{q, r};
use bce_core::structure::{fit_aud, fit_two_step};
use bce_core::{DecisionProblem, Distribution, Rational};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

pub use rand::{Rng, SeedableRng};

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut Rng8, span: i64) -> Rational {
    let den = *[1i64, 1, 2, 3, 4].choose(rng).unwrap();
    q(rng.gen_range(-span..=span), den)
}

pub fn problem(rng: &mut Rng8, states: usize, actions: usize) -> DecisionProblem {
    let rows = (0..actions)
        .map(|_| (0..states).map(|_| r(rng.gen_range(-4..=4))).collect())
        .collect();
    DecisionProblem::new(labels("w", states), labels("a", actions), rows).unwrap()
}

/// Random distribution with integer weights, some of them zero.
pub fn distribution(rng: &mut Rng8, domain: &[String]) -> Distribution {
    loop {
        let w: Vec<i64> = domain
            .iter()
            .map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(0..=6) })
            .collect();
        let total: i64 = w.iter().sum();
        if total == 0 {
            continue;
        }
        let weights = w.iter().map(|&x| q(x, total)).collect();
        return Distribution::new(domain.to_vec(), weights).unwrap();
    }
}

pub fn full_support(rng: &mut Rng8, domain: &[String]) -> Distribution {
    let w: Vec<i64> = domain.iter().map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = w.iter().sum();
    Distribution::new(domain.to_vec(), w.iter().map(|&x| q(x, total)).collect()).unwrap()
}

/// A random belief for each supported action inside its optimal set and the
/// implied prior, so the pair is consistent by construction.
pub fn consistent_pair(rng: &mut Rng8, p: &DecisionProblem) -> (Distribution, Distribution) {
    let marginal = distribution(rng, p.actions());
    let n = p.num_states();
    let mut prior = vec![Rational::zero(); n];
    for a in marginal.support() {
        let dir: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-5..=5))).collect();
        match p.argmax_over_optimal_set(a, &dir) {
            Some(mu) => {
                let other: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-5..=5))).collect();
                let mu2 = p.argmax_over_optimal_set(a, &other).unwrap();
                let t = q(rng.gen_range(0..=4), 4);
                for w in 0..n {
                    prior[w] += marginal.weight(a) * &(&t * &mu[w] + (r(1) - &t) * &mu2[w]);
                }
            }
            None => return (Distribution::uniform(p.states()), marginal),
        }
    }
    (Distribution::new(p.states().to_vec(), prior).unwrap(), marginal)
}

/// Either a consistent-by-construction pair, a perturbation of one, or a
/// uniformly random pair.
pub fn pair(rng: &mut Rng8, p: &DecisionProblem) -> (Distribution, Distribution) {
    match rng.gen_range(0..3) {
        0 => consistent_pair(rng, p),
        1 => {
            let (prior, marginal) = consistent_pair(rng, p);
            let noise = distribution(rng, p.states());
            let t = q(rng.gen_range(1..=3), 8);
            let w = prior
                .weights()
                .iter()
                .zip(noise.weights())
                .map(|(a, b)| (r(1) - &t) * a + &t * b)
                .collect();
            (Distribution::new(p.states().to_vec(), w).unwrap(), marginal)
        }
        _ => (distribution(rng, p.states()), distribution(rng, p.actions())),
    }
}

fn shuffle_states(rng: &mut Rng8, p: &DecisionProblem) -> DecisionProblem {
    let mut perm: Vec<usize> = (0..p.num_states()).collect();
    perm.shuffle(rng);
    let q = p.permute_states(&perm);
    DecisionProblem::new(labels("w", q.num_states()), q.actions().to_vec(), q.utility().to_vec()).unwrap()
}

/// AUD problem with concave adjacent differences, states shuffled.
pub fn aud_problem(rng: &mut Rng8, states: usize, actions: usize) -> DecisionProblem {
    loop {
        let mut d: Vec<i64> = (0..states).map(|_| rng.gen_range(-6..=6)).collect();
        d.sort();
        let gamma = r(rng.gen_range(1..=3));
        let mut t: Vec<Rational> = (0..actions - 1).map(|_| small_rational(rng, 6)).collect();
        t.sort();
        let base: Vec<Rational> = (0..states).map(|_| r(rng.gen_range(-3..=3))).collect();
        let mut rows = vec![base];
        for tj in &t {
            let g = if rng.gen_bool(0.3) {
                &gamma * &q(rng.gen_range(2..=4), 3)
            } else {
                gamma.clone()
            };
            let prev = rows.last().unwrap().clone();
            rows.push(prev.iter().zip(&d).map(|(u, &dw)| u + &(&g * &(r(dw) - tj))).collect());
        }
        let p = DecisionProblem::new(labels("w", states), labels("a", actions), rows).unwrap();
        let p = shuffle_states(rng, &p);
        if fit_aud(&p).is_some() {
            return p;
        }
    }
}

/// Two-step problem with nested low sets and concave differences.
pub fn two_step_problem(rng: &mut Rng8, states: usize, actions: usize) -> DecisionProblem {
    loop {
        let pairs = actions - 1;
        let mut istar: Vec<usize> = (0..pairs).map(|_| rng.gen_range(1..states)).collect();
        istar.sort();
        let mut low: Vec<Rational> = (0..pairs).map(|_| -r(rng.gen_range(1..=4))).collect();
        let mut high: Vec<Rational> = (0..pairs).map(|_| r(rng.gen_range(1..=4))).collect();
        low.sort_by(|a, b| b.cmp(a));
        high.sort_by(|a, b| b.cmp(a));
        let base: Vec<Rational> = (0..states).map(|_| r(rng.gen_range(-3..=3))).collect();
        let mut rows = vec![base];
        for j in 0..pairs {
            let prev = rows.last().unwrap().clone();
            rows.push(
                (0..states)
                    .map(|w| &prev[w] + if w < istar[j] { &low[j] } else { &high[j] })
                    .collect(),
            );
        }
        let p = DecisionProblem::new(labels("w", states), labels("a", actions), rows).unwrap();
        let p = shuffle_states(rng, &p);
        if fit_two_step(&p).is_some() {
            return p;
        }
    }
}
