//! Two-phase primal simplex over exact rationals with Bland's rule.
//!
//! Solutions carry row multipliers: dual prices when optimal and a Farkas
//! ray when infeasible.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `opt c·x` subject to rows, with `x_j ≥ 0` unless `free[j]`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub free: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// One price per constraint: `value = Σ y_i b_i`.
    pub duals: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub enum LpResult {
    Optimal(Solution),
    /// Farkas multipliers `y`, one per constraint, with `y_i ≥ 0` on `Ge`
    /// rows, `y_i ≤ 0` on `Le` rows, `Σ_i y_i a_ij ≤ 0` on nonnegative
    /// columns (`= 0` on free ones) and `Σ_i y_i b_i > 0`.
    Infeasible(Vec<Rational>),
    Unbounded,
}

impl LpResult {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpResult::Infeasible(_))
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            free: vec![false; num_vars],
        }
    }

    /// Feasibility problem with a zero objective.
    pub fn feasibility(num_vars: usize) -> Self {
        Self::new(num_vars, Sense::Maximize)
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds a row given as sparse `(column, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).run(self, true)
    }

    /// Phase one only; the returned solution is some feasible point.
    pub fn find_feasible(&self) -> LpResult {
        Tableau::build(self).run(self, false)
    }
}

struct Tableau {
    /// `m` rows of `cols + 1` entries, last entry is the right-hand side.
    a: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Column that formed the identity for each row at the start.
    unit_col: Vec<usize>,
    /// Row sign applied to make the right-hand side nonnegative.
    sign: Vec<bool>,
    num_struct: usize,
    first_artificial: usize,
    cols: usize,
    /// Maps a structural column to (variable, is_negative_part).
    col_var: Vec<(usize, bool)>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let mut col_var = Vec::new();
        for j in 0..lp.num_vars {
            col_var.push((j, false));
            if lp.free[j] {
                col_var.push((j, true));
            }
        }
        let num_struct = col_var.len();
        let m = lp.constraints.len();
        let num_slack = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let mut sign = Vec::with_capacity(m);
        let mut needs_art = Vec::with_capacity(m);
        for c in &lp.constraints {
            let neg = c.rhs.is_negative();
            sign.push(neg);
            let slack_positive = match c.relation {
                Relation::Le => !neg,
                Relation::Ge => neg,
                Relation::Eq => false,
            };
            needs_art.push(!slack_positive);
        }
        let num_art = needs_art.iter().filter(|b| **b).count();
        let first_artificial = num_struct + num_slack;
        let cols = first_artificial + num_art;
        let mut a = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut unit_col = Vec::with_capacity(m);
        let mut slack_j = num_struct;
        let mut art_j = first_artificial;
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); cols + 1];
            let flip = sign[i];
            for (k, &(v, negpart)) in col_var.iter().enumerate() {
                let coef = &c.coeffs[v];
                if coef.is_zero() {
                    continue;
                }
                let mut x = if negpart { -coef } else { coef.clone() };
                if flip {
                    x = -x;
                }
                row[k] = x;
            }
            let mut slack_col = None;
            if c.relation != Relation::Eq {
                let s = if c.relation == Relation::Le { 1 } else { -1 };
                let s = if flip { -s } else { s };
                row[slack_j] = Rational::from_int(s);
                slack_col = Some(slack_j);
                slack_j += 1;
            }
            row[cols] = if flip { -&c.rhs } else { c.rhs.clone() };
            if needs_art[i] {
                row[art_j] = Rational::one();
                basis.push(art_j);
                unit_col.push(art_j);
                art_j += 1;
            } else {
                let s = slack_col.expect("slack exists");
                basis.push(s);
                unit_col.push(s);
            }
            a.push(row);
        }
        Tableau {
            a,
            basis,
            unit_col,
            sign,
            num_struct,
            first_artificial,
            cols,
            col_var,
        }
    }

    fn reduced_costs(&self, cost: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut d = cost.to_vec();
        let mut z = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            let row = &self.a[i];
            for (j, dj) in d.iter_mut().enumerate() {
                if !row[j].is_zero() {
                    *dj -= cb * &row[j];
                }
            }
            z += cb * &row[self.cols];
        }
        (d, z)
    }

    fn pivot(&mut self, d: &mut [Rational], pr: usize, pc: usize) {
        let inv = self.a[pr][pc].recip();
        let width = self.cols + 1;
        for j in 0..width {
            if !self.a[pr][j].is_zero() {
                self.a[pr][j] *= &inv;
            }
        }
        let nz: Vec<usize> = (0..width).filter(|&j| !self.a[pr][j].is_zero()).collect();
        let prow = self.a[pr].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for &j in &nz {
                let t = &f * &prow[j];
                row[j] -= t;
            }
        }
        if !d[pc].is_zero() {
            let f = d[pc].clone();
            for &j in &nz {
                if j < d.len() {
                    let t = &f * &prow[j];
                    d[j] -= t;
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes with the given costs; columns at or beyond `limit` never enter.
    fn optimize(&mut self, cost: &[Rational], limit: usize) -> Phase {
        let (mut d, _) = self.reduced_costs(cost);
        loop {
            let entering = (0..limit).find(|&j| d[j].is_negative());
            let Some(e) = entering else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                let aie = &self.a[i][e];
                if !aie.is_positive() {
                    continue;
                }
                let ratio = &self.a[i][self.cols] / aie;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((pr, _)) = best else {
                return Phase::Unbounded;
            };
            self.pivot(&mut d, pr, e);
        }
    }

    /// Row multipliers in the caller's row orientation.
    fn multipliers(&self, cost: &[Rational]) -> Vec<Rational> {
        let (d, _) = self.reduced_costs(cost);
        self.unit_col
            .iter()
            .zip(&self.sign)
            .map(|(&u, &flip)| {
                let y = &cost[u] - &d[u];
                if flip {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }

    fn run(mut self, lp: &LinearProgram, phase_two: bool) -> LpResult {
        let mut c1 = vec![Rational::zero(); self.cols];
        for c in c1.iter_mut().skip(self.first_artificial) {
            *c = Rational::one();
        }
        if self.first_artificial < self.cols {
            self.optimize(&c1, self.cols);
            let (_, w) = self.reduced_costs(&c1);
            if w.is_positive() {
                return LpResult::Infeasible(self.multipliers(&c1));
            }
            self.drive_out_artificials();
        }
        let mut c2 = vec![Rational::zero(); self.cols];
        if phase_two {
            for (k, &(v, neg)) in self.col_var.iter().enumerate() {
                let mut c = lp.objective[v].clone();
                if lp.sense == Sense::Maximize {
                    c = -c;
                }
                if neg {
                    c = -c;
                }
                c2[k] = c;
            }
            if let Phase::Unbounded = self.optimize(&c2, self.first_artificial) {
                return LpResult::Unbounded;
            }
        }
        let mut x = vec![Rational::zero(); lp.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_struct {
                let (v, neg) = self.col_var[b];
                let val = &self.a[i][self.cols];
                if neg {
                    x[v] -= val;
                } else {
                    x[v] += val;
                }
            }
        }
        let value: Rational = lp
            .objective
            .iter()
            .zip(&x)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, v)| c * v)
            .sum();
        let mut duals = self.multipliers(&c2);
        if lp.sense == Sense::Maximize {
            for y in duals.iter_mut() {
                *y = -&*y;
            }
        }
        LpResult::Optimal(Solution { x, value, duals })
    }

    fn drive_out_artificials(&mut self) {
        for i in 0..self.a.len() {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            if let Some(j) = (0..self.first_artificial).find(|&j| !self.a[i][j].is_zero()) {
                let mut dummy = vec![Rational::zero(); self.cols];
                self.pivot(&mut dummy, i, j);
            }
        }
    }
}
