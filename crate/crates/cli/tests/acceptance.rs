//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use bce_cli::{run, Cli};
use bce_core::extensions::{
    across_problems, flattened_ring_check, preservation_check, product_problem, project_marginal, public_bce_check,
    ring_check, shift_bounds_table, validate_ring_witness, FamilyMode, PrivateGame, ProblemFamily, RingGame,
};
use bce_core::geometry::{contains_belief, facets, identified_set, lift, weighted_minkowski, DEFAULT_CAP};
use bce_core::instances::{coin, fourstate, hypothesis_test, match3, shift};
use bce_core::lp::{LinearProgram, Relation, Sense};
use bce_core::model::labels;
use bce_core::rational::{q, r};
use bce_core::rationalizer::{
    core_check, experiment_kernel, implement_tau, menu_measure, tau_from_bce, PosteriorDistribution,
};
use bce_core::structure::fit_aud;
use bce_core::support_tests::{
    bounds_binary_action, canonical_direction, check_aud, check_binary_states, check_small_states, check_two_step,
    testfns_aud, testfns_simplex, TestTag,
};
use bce_core::{check_bce, extreme_marginal_bounds, support_value, DecisionProblem, Distribution, Rational};
use clap::Parser;
use common::Rng;
use common::*;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> Result<(i32, Value), String> {
    let cli = Cli::try_parse_from(std::iter::once("bce").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let out = run(&cli).map_err(|e| e.0)?;
    let v = serde_json::from_str(&out.body).map_err(|e| e.to_string())?;
    Ok((out.code, v))
}

fn rat(v: &Value) -> Rational {
    Rational::parse(v.as_str().expect("rational string")).expect("valid rational")
}

fn rats(v: &Value) -> Vec<Rational> {
    v.as_array().expect("array").iter().map(rat).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn q_dot_nu(q: &[Option<Rational>], nu: &Distribution) -> Rational {
    nu.support()
        .into_iter()
        .map(|a| nu.weight(a) * q[a].as_ref().expect("nonempty"))
        .sum()
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| r(x)).collect()
}

/// `c·μ ≤ h` on the simplex, translated so `min c = 0` and scaled primitive.
fn normalize(c: &[Rational], h: &Rational) -> (Vec<Rational>, Rational) {
    let m = c.iter().min().cloned().unwrap();
    let shifted: Vec<Rational> = c.iter().map(|x| x - &m).collect();
    let s = Rational::primitive_scale(&shifted);
    (shifted.iter().map(|x| x * &s).collect(), &(h - &m) * &s)
}

fn criterion_1() -> Outcome {
    let p = match3();
    let nu = Distribution::uniform(p.actions());
    let tests = testfns_simplex(&p, &nu).map_err(|e| e.to_string())?;
    for t in &tests {
        let bound = q_dot_nu(&t.q, &nu);
        match t.tag {
            TestTag::Bm(_) => ensure(
                -bound == q(1, 9),
                format!("BM bound {} for {:?}", -q_dot_nu(&t.q, &nu), t.tag),
            )?,
            TestTag::Pm(..) => {
                let (lo, hi) = (t.p.iter().min().unwrap(), t.p.iter().max().unwrap());
                ensure(
                    *lo == r(-1) && *hi == r(1),
                    "PM direction is not a difference of two states",
                )?;
                ensure(bound == q(1, 2), format!("PM bound {bound}"))?;
            }
            _ => return Err(format!("unexpected test {:?}", t.tag)),
        }
    }
    ensure(
        tests.iter().filter(|t| matches!(t.tag, TestTag::Bm(_))).count() == 3,
        "BM count",
    )?;
    ensure(
        tests.iter().filter(|t| matches!(t.tag, TestTag::Pm(..))).count() == 6,
        "PM count",
    )?;
    let (code, v) = cli(&[
        "plot-data",
        "--problem",
        &data("match3.json"),
        "--marginal",
        &data("match3_marginal.json"),
    ])?;
    ensure(code == 0, "plot-data exit code")?;
    let cycle: Vec<Vec<Rational>> = v["identified"]["cycle"]
        .as_array()
        .unwrap()
        .iter()
        .map(|pt| rats(&pt["exact"]))
        .collect();
    ensure(cycle.len() == 9, format!("{} vertices", cycle.len()))?;
    for want in [[q(1, 9), q(11, 18)], [q(1, 9), q(5, 18)]] {
        ensure(
            cycle.contains(&want.to_vec()),
            format!("vertex ({}, {}) missing", want[0], want[1]),
        )?;
    }
    Ok("BM heights 1/9, PM heights 1/2, 9-gon with (1/9,11/18) and (1/9,5/18)".into())
}

fn criterion_2() -> Outcome {
    let f = fourstate();
    let fam = testfns_aud(&f).map_err(|e| e.to_string())?;
    let expected_p = [
        [-9, -5, -1, 5],
        [-9, -5, -1, -1],
        [-9, -5, -5, -5],
        [-9, -9, -9, -9],
        [9, 5, 1, -5],
        [5, 5, 1, -5],
        [1, 1, 1, -5],
        [-5, -5, -5, -5],
    ];
    let expected_q = [[0, 5], [-1, -1], [-5, -5], [-9, -9], [9, 0], [5, 0], [1, 0], [-5, -5]];
    ensure(fam.len() == 8, "family size")?;
    for (t, (p, qq)) in fam.iter().zip(expected_p.iter().zip(&expected_q)) {
        ensure(t.p == ints(p), format!("p {:?}", t.p))?;
        let got: Vec<Rational> = t.q.iter().map(|x| x.clone().unwrap()).collect();
        ensure(got == ints(qq), format!("q {got:?}"))?;
    }
    let (code, v) = cli(&[
        "facets",
        "--problem",
        &data("fourstate.json"),
        "--marginal",
        &data("half.json"),
    ])?;
    ensure(code == 0, "facets exit code")?;
    let ineqs = v["polytope"]["inequalities"].as_array().unwrap();
    ensure(ineqs.len() == 7, format!("{} facets", ineqs.len()))?;
    ensure(
        ineqs.iter().any(|h| rats(&h["normal"]) == ints(&[0, -2, -5])),
        "normal (0,-2,-5) missing",
    )?;
    let mut got: Vec<(Vec<Rational>, Rational)> = ineqs
        .iter()
        .map(|h| normalize(&lift(&rats(&h["normal"])), &rat(&h["height"])))
        .collect();
    let half = q(1, 2);
    let system = [
        (ints(&[9, 5, 1, -5]), r(9) * &half),
        (ints(&[-9, -5, -1, 5]), r(5) * &half),
        (ints(&[1, 1, 1, -5]), half.clone()),
        (ints(&[5, 5, 1, -5]), r(5) * &half),
        (ints(&[-1, 0, 0, 0]), r(0)),
        (ints(&[0, -1, 0, 0]), r(0)),
        (ints(&[0, 0, -1, 0]), r(0)),
    ];
    let mut want: Vec<(Vec<Rational>, Rational)> = system.iter().map(|(c, h)| normalize(c, h)).collect();
    got.sort();
    want.sort();
    ensure(got == want, "facet system differs from the listed inequalities")?;
    Ok("AUD listing verbatim; 7 facets equal the listed system".into())
}

fn criterion_3() -> Outcome {
    let mut g = rng(3);
    let mut disagreements = 0usize;
    let mut checked = 0usize;
    type Check =
        fn(&DecisionProblem, &Distribution, &Distribution) -> bce_core::Result<bce_core::support_tests::TestVerdict>;
    let classes: [(&str, Check); 5] = [
        ("binary-state", check_binary_states),
        ("binary-action", check_aud),
        ("three-state", check_small_states),
        ("aud", check_aud),
        ("two-step", check_two_step),
    ];
    for (k, (name, check)) in classes.iter().enumerate() {
        for _ in 0..200 {
            let p = match k {
                0 => {
                    let (i, j) = (2, g.gen_range(2..=4));
                    problem(&mut g, i, j)
                }
                1 => {
                    let (i, j) = (g.gen_range(2..=5), 2);
                    problem(&mut g, i, j)
                }
                2 => {
                    let (i, j) = (3, g.gen_range(2..=4));
                    problem(&mut g, i, j)
                }
                3 => {
                    let (i, j) = (g.gen_range(2..=5), g.gen_range(2..=4));
                    aud_problem(&mut g, i, j)
                }
                _ => {
                    let (i, j) = (g.gen_range(2..=5), g.gen_range(3..=4));
                    two_step_problem(&mut g, i, j)
                }
            };
            for _ in 0..50 {
                let (mu, nu) = pair(&mut g, &p);
                let lp = check_bce(&p, &mu, &nu).map_err(|e| e.to_string())?.consistent;
                let ch = check(&p, &mu, &nu).map_err(|e| format!("{name}: {e}"))?.consistent;
                checked += 1;
                if lp != ch {
                    disagreements += 1;
                }
            }
        }
    }
    ensure(
        disagreements == 0,
        format!("{disagreements} disagreements in {checked} pairs"),
    )?;
    Ok(format!("{checked} pairs across 5 classes, 0 disagreements"))
}

fn criterion_4() -> Outcome {
    let mut g = rng(4);
    let mut priors = 0usize;
    let mut heights = 0usize;
    let mut instances = 0usize;
    while instances < 30 {
        let p = {
            let (i, j) = (g.gen_range(2..=4), g.gen_range(2..=4));
            problem(&mut g, i, j)
        };
        let nu = distribution(&mut g, p.actions());
        if nu.support().iter().any(|&a| p.is_dominated(a)) {
            continue;
        }
        instances += 1;
        let v = weighted_minkowski(&p, &nu, DEFAULT_CAP).map_err(|e| e.to_string())?;
        let (h, basis) = facets(&v).map_err(|e| e.to_string())?;
        for x in &h.inequalities {
            let sv = support_value(&p, &nu, &lift(&x.normal)).map_err(|e| e.to_string())?;
            ensure(
                sv.as_ref() == Some(&x.height),
                format!("facet height {} vs support value {sv:?}", x.height),
            )?;
            heights += 1;
        }
        for k in 0..1000 {
            let mu = if k % 2 == 0 {
                consistent_pair_at(&mut g, &p, &nu)
            } else {
                distribution(&mut g, p.states())
            };
            let inside = contains_belief(&h, &basis, mu.weights()).map_err(|e| e.to_string())?;
            let lp = check_bce(&p, &mu, &nu).map_err(|e| e.to_string())?.consistent;
            ensure(inside == lp, format!("membership {inside} vs LP {lp}"))?;
            priors += 1;
        }
    }
    Ok(format!(
        "{priors} priors on {instances} instances agree; {heights} facet heights equal support values"
    ))
}

/// A prior in the identified set of `nu`, or a perturbation of one.
fn consistent_pair_at(g: &mut Rng8, p: &DecisionProblem, nu: &Distribution) -> Distribution {
    let n = p.num_states();
    let mut prior = vec![Rational::zero(); n];
    for a in nu.support() {
        let dir: Vec<Rational> = (0..n).map(|_| r(g.gen_range(-5..=5))).collect();
        let mu = p.argmax_over_optimal_set(a, &dir).expect("undominated");
        for w in 0..n {
            prior[w] += nu.weight(a) * &mu[w];
        }
    }
    if g.gen_bool(0.5) {
        let noise = distribution(g, p.states());
        let t = q(g.gen_range(1..=3), 16);
        for w in 0..n {
            prior[w] = (Rational::one() - &t) * &prior[w] + &t * noise.weight(w);
        }
    }
    Distribution::new(p.states().to_vec(), prior).unwrap()
}

fn criterion_5() -> Outcome {
    let f = fourstate();
    let nu = Distribution::uniform(f.actions());
    let tests = testfns_simplex(&f, &nu).map_err(|e| e.to_string())?;
    let mut lp = LinearProgram::new(4, Sense::Maximize);
    lp.add(vec![Rational::one(); 4], Relation::Eq, Rational::one());
    for t in &tests {
        lp.add(t.p.clone(), Relation::Le, q_dot_nu(&t.q, &nu));
    }
    // Push as far as possible along the direction the simplex tests miss.
    lp.set_objective(ints(&[0, 0, -2, -5]));
    let sol = lp.solve().optimal().ok_or("simplex-test region is empty")?;
    let mu = Distribution::new(f.states().to_vec(), sol.x.clone()).map_err(|e| e.to_string())?;
    ensure(
        tests.iter().all(|t| t.holds(&mu, &nu)),
        "search point fails a simplex test",
    )?;
    let v = check_bce(&f, &mu, &nu).map_err(|e| e.to_string())?;
    ensure(!v.consistent, format!("prior {:?} is consistent", sol.x))?;
    let (_, h, _) = identified_set(&f, &nu, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let free: Vec<Rational> = sol.x[1..].to_vec();
    let violated: Vec<Vec<Rational>> = h
        .inequalities
        .iter()
        .filter(|x| dot(&x.normal, &free) > x.height)
        .map(|x| canonical_direction(&lift(&x.normal)))
        .collect();
    let target = canonical_direction(&ints(&[0, 0, -2, -5]));
    ensure(
        target == canonical_direction(&ints(&[5, 5, 1, -5])),
        "affine normalization mismatch",
    )?;
    ensure(
        violated == vec![target.clone()],
        format!("violated facets {violated:?}"),
    )?;
    let dual = v.dual.ok_or("no dual certificate")?;
    ensure(
        canonical_direction(&dual.p) == target,
        format!("dual direction {:?}", dual.p),
    )?;
    let prior: Vec<String> = sol.x.iter().map(|x| x.to_string()).collect();
    Ok(format!(
        "prior ({}) passes BM/PM, fails the LP along (0,0,-2,-5)",
        prior.join(", ")
    ))
}

fn posterior_pair(g: &mut Rng8, p: &DecisionProblem) -> (PosteriorDistribution, Distribution) {
    let k = g.gen_range(1..=4);
    let posteriors: Vec<Distribution> = (0..k).map(|_| distribution(g, p.states())).collect();
    let w: Vec<i64> = (0..k).map(|_| g.gen_range(1..=5)).collect();
    let total: i64 = w.iter().sum();
    let tau = PosteriorDistribution::new(posteriors, w.iter().map(|&x| q(x, total)).collect()).unwrap();
    (tau, distribution(g, p.actions()))
}

fn criterion_6() -> Outcome {
    let mut g = rng(6);
    let mut round_trips = 0;
    while round_trips < 100 {
        let p = {
            let (i, j) = (g.gen_range(2..=4), g.gen_range(2..=4));
            problem(&mut g, i, j)
        };
        let (mu, nu) = consistent_pair(&mut g, &p);
        let v = check_bce(&p, &mu, &nu).map_err(|e| e.to_string())?;
        let Some(joint) = v.joint() else { continue };
        let tau = tau_from_bce(&p, &joint, &nu).map_err(|e| e.to_string())?;
        let rule = implement_tau(&p, &tau, &nu)
            .map_err(|e| e.to_string())?
            .feasible()
            .ok_or("witness posteriors fail")?;
        for a in 0..p.num_actions() {
            let got: Rational = rule.rows.iter().zip(tau.weights()).map(|(row, t)| &row[a] * t).sum();
            ensure(&got == nu.weight(a), "round trip changes the marginal")?;
        }
        let kernel = experiment_kernel(&p, &mu, &tau, &rule).map_err(|e| e.to_string())?;
        ensure(
            kernel
                .rows
                .iter()
                .all(|row| row.iter().sum::<Rational>() == Rational::one()),
            "kernel row sum",
        )?;
        round_trips += 1;
    }
    let c = coin();
    let tau = PosteriorDistribution::new(
        vec![
            Distribution::new(c.states().to_vec(), vec![q(3, 4), q(1, 4)]).unwrap(),
            Distribution::new(c.states().to_vec(), vec![q(1, 2), q(1, 2)]).unwrap(),
        ],
        vec![q(1, 2), q(1, 2)],
    )
    .unwrap();
    let menu = menu_measure(&c, &tau).map_err(|e| e.to_string())?;
    let mut pairs = 0;
    for (w, violation) in [(q(1, 2), None), (q(3, 4), None), (q(1, 4), Some(vec![0usize]))] {
        let nu = Distribution::new(c.actions().to_vec(), vec![w.clone(), Rational::one() - &w]).unwrap();
        let flow = implement_tau(&c, &tau, &nu).map_err(|e| e.to_string())?;
        ensure(
            flow.violation().map(|b| b.to_vec()) == violation,
            format!("COIN at ν(a1)={w}"),
        )?;
        ensure(
            core_check(&nu, &menu).map_err(|e| e.to_string())? == violation,
            format!("COIN core at ν(a1)={w}"),
        )?;
        pairs += 1;
    }
    while pairs < 500 {
        let p = {
            let (i, j) = (g.gen_range(2..=3), g.gen_range(2..=4));
            problem(&mut g, i, j)
        };
        let (tau, nu) = posterior_pair(&mut g, &p);
        let menu = menu_measure(&p, &tau).map_err(|e| e.to_string())?;
        let core = core_check(&nu, &menu).map_err(|e| e.to_string())?;
        let flow = implement_tau(&p, &tau, &nu).map_err(|e| e.to_string())?;
        ensure(core.is_none() == flow.violation().is_none(), "flow and core disagree")?;
        pairs += 1;
    }
    Ok(format!(
        "{round_trips} round trips exact; {pairs} flow/core pairs agree incl. COIN triple"
    ))
}

fn criterion_7() -> Outcome {
    let mut g = rng(7);
    for _ in 0..100 {
        let p = {
            let (i, j) = (g.gen_range(2..=5), 2);
            problem(&mut g, i, j)
        };
        let mu = distribution(&mut g, p.states());
        let closed = bounds_binary_action(&p, &mu).map_err(|e| e.to_string())?;
        let lp = extreme_marginal_bounds(&p, &mu, &[1]).map_err(|e| e.to_string())?;
        ensure(closed == lp, format!("closed form {closed:?} vs LP {lp:?}"))?;
    }
    let s = shift(&r(0));
    let mu = Distribution::new(s.states().to_vec(), vec![q(1, 4), q(3, 4)]).unwrap();
    let b = bounds_binary_action(&s, &mu).map_err(|e| e.to_string())?;
    ensure(b == (q(1, 2), r(1)), format!("SHIFT bounds {b:?}"))?;
    Ok("100 instances equal; SHIFT(0) at 3/4 gives (1/2, 1)".into())
}

fn criterion_8() -> Outcome {
    let mut g = rng(8);
    let mut spreads = 0;
    while spreads < 200 {
        let i = g.gen_range(3..=5);
        let j = g.gen_range(2..=4);
        let p = aud_problem(&mut g, i, j);
        let d = fit_aud(&p).unwrap().d_original();
        let (mu, nu) = pair(&mut g, &p);
        let mut order: Vec<usize> = (0..i).collect();
        order.sort_by(|a, b| d[*a].cmp(&d[*b]));
        let (lo, hi) = (order[0], order[i - 1]);
        let Some(m) = order[1..i - 1]
            .iter()
            .copied()
            .find(|&w| d[lo] < d[w] && d[w] < d[hi] && mu.weight(w).is_positive())
        else {
            continue;
        };
        let moved = mu.weight(m) * &q(g.gen_range(1..=4), 4);
        let to_lo = &(&d[hi] - &d[m]) / &(&d[hi] - &d[lo]);
        let mut w = mu.weights().to_vec();
        w[m] -= &moved;
        w[lo] += &(&moved * &to_lo);
        w[hi] += &(&moved * &(Rational::one() - to_lo));
        let spread = Distribution::new(p.states().to_vec(), w).unwrap();
        let report = preservation_check(&p, &mu, &spread, &nu).map_err(|e| e.to_string())?;
        ensure(report.holds, "preservation counterexample")?;
        spreads += 1;
    }

    let grid: Vec<Rational> = (-8..=8).map(|k| q(k, 8)).collect();
    let base = shift(&r(0));
    let family = ProblemFamily::shift(&base, grid.clone(), &[r(1), r(1)]).map_err(|e| e.to_string())?;
    for k in 0..=8 {
        let mu = Distribution::new(base.states().to_vec(), vec![Rational::one() - q(k, 8), q(k, 8)]).unwrap();
        ensure(
            shift_bounds_table(&family, &mu).map_err(|e| e.to_string())?.monotone,
            "SHIFT table not monotone",
        )?;
    }
    let flagged = [true, false, true, false];
    let ht_theta: Vec<Rational> = (0..=8).map(|k| q(k, 4)).collect();
    let tables = ht_theta
        .iter()
        .map(|t| hypothesis_test(&flagged, &(r(1) + t), &r(1)).utility().to_vec())
        .collect();
    let ht = hypothesis_test(&flagged, &r(1), &r(1));
    let ht_family = ProblemFamily::tables(&ht, FamilyMode::Ratio, ht_theta, tables).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let mu = distribution(&mut g, ht.states());
        ensure(
            shift_bounds_table(&ht_family, &mu).map_err(|e| e.to_string())?.monotone,
            "HT table not monotone",
        )?;
    }

    let mut endpoints = 0;
    for k in 1..=8 {
        let theta = q(k, 8);
        let problems = vec![shift(&r(0)), shift(&theta)];
        let product = product_problem(&problems).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let w: Vec<i64> = (0..3).map(|_| g.gen_range(0..=4)).collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                continue;
            }
            let (n11, n12, n22) = (q(w[0], total), q(w[1], total), q(w[2], total));
            let nu = Distribution::new(product.actions().to_vec(), vec![n11, n12.clone(), r(0), n22.clone()]).unwrap();
            let one_minus = (r(1) - &theta) / r(2);
            let lo = &n12 * &one_minus + &n22 / r(2);
            let hi = &one_minus + &(&n12 * &theta / r(2)) + &n22 * &((r(1) + &theta) / r(2));
            let v = weighted_minkowski(&product, &nu, DEFAULT_CAP).map_err(|e| e.to_string())?;
            let ends: Vec<Rational> = v.vertices.iter().map(|x| x[0].clone()).collect();
            let (min, max) = (ends.iter().min().unwrap(), ends.iter().max().unwrap());
            ensure(
                *min == lo && *max == hi,
                format!("θ={theta}: [{min}, {max}] vs [{lo}, {hi}]"),
            )?;
            for (x, inside) in [
                (lo.clone(), true),
                (hi.clone(), true),
                (&lo - &q(1, 1000), false),
                (&hi + &q(1, 1000), false),
            ] {
                if x.is_negative() || x > r(1) {
                    continue;
                }
                let mu = Distribution::new(product.states().to_vec(), vec![r(1) - &x, x.clone()]).unwrap();
                let got = across_problems(&problems, &nu, &mu)
                    .map_err(|e| e.to_string())?
                    .consistent;
                ensure(got == inside, format!("θ={theta}, μ₀(1)={x}"))?;
            }
            endpoints += 1;
            let bad = Distribution::new(product.actions().to_vec(), vec![r(0), q(1, 2), q(1, 4), q(1, 4)]).unwrap();
            for j in 0..=8 {
                let mu = Distribution::new(product.states().to_vec(), vec![r(1) - q(j, 8), q(j, 8)]).unwrap();
                ensure(
                    !across_problems(&problems, &bad, &mu)
                        .map_err(|e| e.to_string())?
                        .consistent,
                    "accepted ν̄(a2,a1) > 0",
                )?;
            }
        }
    }
    Ok(format!(
        "{spreads} spreads preserve; SHIFT/HT tables monotone; {endpoints} across intervals exact"
    ))
}

fn criterion_9() -> Outcome {
    let mut g = rng(9);
    for _ in 0..50 {
        let players = g.gen_range(2..=3);
        let states = labels("w", g.gen_range(2..=3));
        let sizes: Vec<usize> = (0..players).map(|_| g.gen_range(2..=3)).collect();
        let actions: Vec<Vec<String>> = sizes
            .iter()
            .enumerate()
            .map(|(n, &k)| labels(&format!("p{}a", n + 1), k))
            .collect();
        let entry = |g: &mut Rng8| r(g.gen_range(-3..=3));
        let first = (0..actions[0].len())
            .map(|_| (0..states.len()).map(|_| entry(&mut g)).collect())
            .collect();
        let links = (1..players)
            .map(|n| {
                (0..actions[n - 1].len())
                    .map(|_| (0..actions[n].len()).map(|_| entry(&mut g)).collect())
                    .collect()
            })
            .collect();
        let game = RingGame::new(states, actions, first, links).map_err(|e| e.to_string())?;
        let (mu, first_marginal) = pair(&mut g, &game.link_problem(0).unwrap());
        let mut marginals = vec![first_marginal];
        for n in 1..players {
            let link = game.link_problem(n).unwrap();
            let prev = Distribution::new(link.states().to_vec(), marginals[n - 1].weights().to_vec()).unwrap();
            let nu = if g.gen_bool(0.6) {
                let a = g.gen_range(0..link.num_actions());
                let (lo, hi) = extreme_marginal_bounds(&link, &prev, &[a]).unwrap();
                let t = if g.gen_bool(0.5) { lo } else { hi };
                let rest = (Rational::one() - &t) / r(link.num_actions() as i64 - 1);
                Distribution::new(
                    link.actions().to_vec(),
                    (0..link.num_actions())
                        .map(|b| if b == a { t.clone() } else { rest.clone() })
                        .collect(),
                )
                .unwrap()
            } else {
                distribution(&mut g, link.actions())
            };
            marginals.push(nu);
        }
        let v = ring_check(&game, &mu, &marginals).map_err(|e| e.to_string())?;
        let flat = flattened_ring_check(&game, &mu, &marginals).map_err(|e| e.to_string())?;
        ensure(v.consistent == flat, "ring and flattened LP disagree")?;
        if let Some(pi) = &v.witness {
            ensure(
                validate_ring_witness(&game, &mu, &marginals, pi),
                "ring witness invalid",
            )?;
        }
    }
    let mut consistent = 0;
    for _ in 0..50 {
        let k = g.gen_range(2..=3);
        let players: Vec<DecisionProblem> = (0..2)
            .map(|n| {
                let p = {
                    let (i, j) = (k, g.gen_range(2..=3));
                    problem(&mut g, i, j)
                };
                DecisionProblem::new(
                    p.states().to_vec(),
                    labels(&format!("p{}a", n + 1), p.num_actions()),
                    p.utility().to_vec(),
                )
                .unwrap()
            })
            .collect();
        let game = PrivateGame::new(players.clone()).map_err(|e| e.to_string())?;
        let product = product_problem(&players).map_err(|e| e.to_string())?;
        let (mu, nu) = if g.gen_bool(0.5) {
            let mu = full_support(&mut g, product.states());
            let nu = signal_marginal(&mut g, &product, &mu);
            (mu, nu)
        } else {
            pair(&mut g, &product)
        };
        let v = public_bce_check(&game, &mu, &nu).map_err(|e| e.to_string())?;
        ensure(
            v == check_bce(&product, &mu, &nu).map_err(|e| e.to_string())?,
            "public check differs from the auxiliary LP",
        )?;
        if v.consistent {
            consistent += 1;
            for n in 0..players.len() {
                let m = project_marginal(&players, &nu, n).map_err(|e| e.to_string())?;
                ensure(
                    check_bce(&players[n], &mu, &m).map_err(|e| e.to_string())?.consistent,
                    "projection inconsistent",
                )?;
            }
        }
    }
    Ok(format!(
        "50 chains match the flattened LP; {consistent} consistent public games project consistently"
    ))
}

/// Action distribution of a random public signal followed by optimal play.
fn signal_marginal(g: &mut Rng8, p: &DecisionProblem, prior: &Distribution) -> Distribution {
    let signals = g.gen_range(1..=3);
    let kernel: Vec<Vec<Rational>> = (0..p.num_states())
        .map(|_| {
            let w: Vec<i64> = (0..signals).map(|_| g.gen_range(0..=3) + 1).collect();
            let total: i64 = w.iter().sum();
            w.iter().map(|&x| q(x, total)).collect()
        })
        .collect();
    let mut nu = vec![Rational::zero(); p.num_actions()];
    for s in 0..signals {
        let joint: Vec<Rational> = (0..p.num_states()).map(|w| prior.weight(w) * &kernel[w][s]).collect();
        let mass: Rational = joint.iter().sum();
        let best = p.optimal_actions(&joint)[0];
        nu[best] += &mass;
    }
    Distribution::new(p.actions().to_vec(), nu).unwrap()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("MATCH3 golden bounds and polygon", criterion_1, Duration::from_secs(1)),
        ("FOURSTATE AUD listing and facets", criterion_2, Duration::from_secs(5)),
        ("LP vs characterizations", criterion_3, Duration::from_secs(120)),
        ("identified-set geometry oracle", criterion_4, Duration::from_secs(120)),
        (
            "simplex tests are not sufficient at four states",
            criterion_5,
            Duration::from_secs(60),
        ),
        ("rationalizer round trip and core", criterion_6, Duration::from_secs(60)),
        ("binary-action closed form", criterion_7, Duration::from_secs(60)),
        (
            "comparative statics and across problems",
            criterion_8,
            Duration::from_secs(60),
        ),
        ("ring networks and public games", criterion_9, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (k, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took <= *limit => Ok(msg),
            Ok(msg) => Err(format!("{msg}; took {took:.2?} over {limit:?}")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} [{took:.2?}]", k + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e} [{took:.2?}]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
