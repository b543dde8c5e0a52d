//! Exact polytope machinery over the free belief coordinates `μ(ω₂)…μ(ω_I)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpResult, Relation, Sense};
use crate::model::{DecisionProblem, Distribution};
use crate::rational::{dot, Rational};

pub const DEFAULT_CAP: usize = 6;

/// `normal · x ≤ height` (or `=` for equality rows).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Halfspace {
    pub normal: Vec<Rational>,
    pub height: Rational,
}

impl Halfspace {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        &self.height - dot(&self.normal, x)
    }

    /// Positive rescaling to a primitive integer normal.
    pub fn primitive(&self) -> Halfspace {
        let s = Rational::primitive_scale(&self.normal);
        Halfspace {
            normal: self.normal.iter().map(|x| x * &s).collect(),
            height: &self.height * &s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HPolytope {
    pub dim: usize,
    pub inequalities: Vec<Halfspace>,
    pub equalities: Vec<Halfspace>,
    /// Set when a constant row `0 ≤ h` with `h < 0` was dropped.
    #[serde(skip)]
    pub trivially_empty: bool,
}

impl HPolytope {
    pub fn new(dim: usize) -> Self {
        HPolytope {
            dim,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            trivially_empty: false,
        }
    }

    pub fn add_inequality(&mut self, normal: Vec<Rational>, height: Rational) {
        assert_eq!(normal.len(), self.dim);
        self.inequalities.push(Halfspace { normal, height });
    }

    pub fn add_equality(&mut self, normal: Vec<Rational>, height: Rational) {
        assert_eq!(normal.len(), self.dim);
        self.equalities.push(Halfspace { normal, height });
    }

    pub fn mark_empty(&mut self) {
        self.trivially_empty = true;
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        !self.trivially_empty
            && self.equalities.iter().all(|h| h.slack(x).is_zero())
            && self.inequalities.iter().all(|h| !h.slack(x).is_negative())
    }

    fn lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::feasibility(self.dim);
        for j in 0..self.dim {
            lp.set_free(j);
        }
        for h in &self.inequalities {
            lp.add(h.normal.clone(), Relation::Le, h.height.clone());
        }
        for h in &self.equalities {
            lp.add(h.normal.clone(), Relation::Eq, h.height.clone());
        }
        lp
    }

    pub fn is_feasible(&self) -> bool {
        !self.trivially_empty && self.lp().find_feasible().is_feasible()
    }

    /// `max c·x`, `None` when empty, error when unbounded.
    pub fn maximize(&self, c: &[Rational]) -> Result<Option<Rational>> {
        if self.trivially_empty {
            return Ok(None);
        }
        let mut lp = self.lp();
        lp.sense = Sense::Maximize;
        lp.set_objective(c.to_vec());
        match lp.solve() {
            LpResult::Optimal(s) => Ok(Some(s.value)),
            LpResult::Infeasible(_) => Ok(None),
            LpResult::Unbounded => Err(Error::Unbounded("linear objective unbounded".into())),
        }
    }
}

/// Vertex list, deduplicated and sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VPolytope {
    pub dim: usize,
    pub vertices: Vec<Vec<Rational>>,
}

impl VPolytope {
    pub fn new(dim: usize, mut vertices: Vec<Vec<Rational>>) -> Self {
        vertices.sort();
        vertices.dedup();
        VPolytope { dim, vertices }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Kernel of the direction space of a polytope, plus a point on it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineHullBasis {
    pub kernel: Vec<Vec<Rational>>,
    pub anchor: Vec<Rational>,
}

impl AffineHullBasis {
    pub fn contains(&self, x: &[Rational]) -> bool {
        let diff: Vec<Rational> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        self.kernel.iter().all(|b| dot(b, &diff).is_zero())
    }

    /// Kernel vectors in full belief coordinates, together with `𝟙`.
    pub fn kernel_full(&self) -> Vec<Vec<Rational>> {
        let mut out: Vec<Vec<Rational>> = self.kernel.iter().map(|b| lift(b)).collect();
        out.push(vec![Rational::one(); self.anchor.len() + 1]);
        out
    }
}

/// Free coordinates of a full belief.
pub fn to_free(belief: &[Rational]) -> Vec<Rational> {
    belief[1..].to_vec()
}

/// Full belief from free coordinates.
pub fn to_full(x: &[Rational]) -> Vec<Rational> {
    let s: Rational = x.iter().sum();
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(Rational::one() - s);
    out.extend_from_slice(x);
    out
}

/// A free-coordinate normal as a full-coordinate direction `(0, n)`.
pub fn lift(normal: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(normal.len() + 1);
    out.push(Rational::zero());
    out.extend_from_slice(normal);
    out
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : rows · x = 0}` in `ℝ^cols`.
pub fn nullspace(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[f] = Rational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][f];
        }
        basis.push(v);
    }
    basis
}

/// Unique solution of a square system, if any.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

pub(crate) fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact vertex enumeration by basis subsets.
pub fn vertices(h: &HPolytope, cap: usize) -> Result<VPolytope> {
    if h.dim > cap {
        return Err(Error::Cap(format!("dimension {} above cap {cap}", h.dim)));
    }
    if !h.is_feasible() {
        return Ok(VPolytope::new(h.dim, Vec::new()));
    }
    if h.dim == 0 {
        return Ok(VPolytope::new(0, vec![Vec::new()]));
    }
    for i in 0..h.dim {
        let mut e = vec![Rational::zero(); h.dim];
        for s in [1, -1] {
            e[i] = Rational::from_int(s);
            h.maximize(&e)?;
        }
    }
    let eq_rank = rank(&h.equalities.iter().map(|e| e.normal.clone()).collect::<Vec<_>>());
    let need = h.dim - eq_rank;
    let eqs = independent_rows(&h.equalities);
    let mut found = Vec::new();
    combinations(h.inequalities.len(), need, |subset| {
        let mut a: Vec<Vec<Rational>> = eqs.iter().map(|e| e.normal.clone()).collect();
        let mut b: Vec<Rational> = eqs.iter().map(|e| e.height.clone()).collect();
        for &k in subset {
            a.push(h.inequalities[k].normal.clone());
            b.push(h.inequalities[k].height.clone());
        }
        if let Some(x) = solve_square(&a, &b) {
            if h.contains(&x) {
                found.push(x);
            }
        }
    });
    Ok(VPolytope::new(h.dim, found))
}

fn independent_rows(rows: &[Halfspace]) -> Vec<&Halfspace> {
    let mut kept: Vec<&Halfspace> = Vec::new();
    let mut normals: Vec<Vec<Rational>> = Vec::new();
    for r in rows {
        normals.push(r.normal.clone());
        if rank(&normals) > kept.len() {
            kept.push(r);
        } else {
            normals.pop();
        }
    }
    kept
}

/// Whether `point` is a convex combination of `others`.
pub fn in_convex_hull(point: &[Rational], others: &[&Vec<Rational>]) -> bool {
    if others.is_empty() {
        return false;
    }
    let n = others.len();
    let mut lp = LinearProgram::feasibility(n);
    lp.add(vec![Rational::one(); n], Relation::Eq, Rational::one());
    for (i, target) in point.iter().enumerate() {
        let row = others.iter().map(|v| v[i].clone()).collect();
        lp.add(row, Relation::Eq, target.clone());
    }
    lp.find_feasible().is_feasible()
}

/// Drops every point lying in the hull of the remaining ones.
pub fn extreme_points(points: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let mut pts = points;
    pts.sort();
    pts.dedup();
    let mut k = 0;
    while k < pts.len() {
        let others: Vec<&Vec<Rational>> = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, v)| v)
            .collect();
        if in_convex_hull(&pts[k], &others) {
            pts.remove(k);
        } else {
            k += 1;
        }
    }
    pts
}

/// Support actions of `marginal`, rejecting dominated ones.
pub fn support_without_dominated(problem: &DecisionProblem, marginal: &Distribution) -> Result<Vec<usize>> {
    let support = marginal.support();
    if let Some(&a) = support.iter().find(|&&a| problem.is_dominated(a)) {
        return Err(Error::Precondition(format!(
            "dominated action {:?} in the support of the marginal",
            problem.actions()[a]
        )));
    }
    Ok(support)
}

/// Vertices of `Σ_a ν₀(a) Δ*(a)` in free coordinates.
pub fn weighted_minkowski(problem: &DecisionProblem, marginal: &Distribution, cap: usize) -> Result<VPolytope> {
    marginal.expect_domain(problem.actions(), "marginal")?;
    let dim = problem.num_states() - 1;
    if dim > cap {
        return Err(Error::Cap(format!("dimension {dim} above cap {cap}")));
    }
    let support = support_without_dominated(problem, marginal)?;
    let mut acc: Vec<Vec<Rational>> = vec![vec![Rational::zero(); dim]];
    for a in support {
        let w = marginal.weight(a);
        let va = vertices(&problem.optimal_belief_set(a), cap)?;
        let mut next = Vec::with_capacity(acc.len() * va.vertices.len());
        for s in &acc {
            for v in &va.vertices {
                next.push(s.iter().zip(v).map(|(x, y)| x + &(w * y)).collect());
            }
        }
        acc = extreme_points(next);
    }
    Ok(VPolytope::new(dim, acc))
}

fn orient_and_normalize(normal: Vec<Rational>, height: Rational) -> Halfspace {
    Halfspace { normal, height }.primitive()
}

/// Minimal H-representation plus affine hull data.
pub fn facets(v: &VPolytope) -> Result<(HPolytope, AffineHullBasis)> {
    let Some(anchor) = v.vertices.first().cloned() else {
        return Err(Error::Precondition("facets of an empty vertex list".into()));
    };
    let dim = v.dim;
    let diffs: Vec<Vec<Rational>> = v
        .vertices
        .iter()
        .skip(1)
        .map(|p| p.iter().zip(&anchor).map(|(a, b)| a - b).collect())
        .collect();
    let kernel = if diffs.is_empty() {
        nullspace(&[], dim)
    } else {
        nullspace(&diffs, dim)
    };
    let basis = AffineHullBasis {
        kernel: kernel.clone(),
        anchor: anchor.clone(),
    };
    let mut h = HPolytope::new(dim);
    for b in &kernel {
        let height = dot(b, &anchor);
        let hs = Halfspace {
            normal: b.clone(),
            height,
        }
        .primitive();
        h.add_equality(hs.normal, hs.height);
    }
    let r = dim - kernel.len();
    if r == 0 {
        return Ok((h, basis));
    }
    // Coordinates on which the projection is injective over the hull.
    let coords = {
        let mut m = diffs.clone();
        rref(&mut m)
    };
    debug_assert_eq!(coords.len(), r);
    let proj: Vec<Vec<Rational>> = v
        .vertices
        .iter()
        .map(|p| coords.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let mut found: Vec<Halfspace> = Vec::new();
    let embed = |n_s: &[Rational]| {
        let mut n = vec![Rational::zero(); dim];
        for (k, &c) in coords.iter().enumerate() {
            n[c] = n_s[k].clone();
        }
        n
    };
    if r == 1 {
        let lo = proj.iter().map(|p| p[0].clone()).min().expect("nonempty");
        let hi = proj.iter().map(|p| p[0].clone()).max().expect("nonempty");
        found.push(orient_and_normalize(embed(&[Rational::from_int(-1)]), -lo));
        found.push(orient_and_normalize(embed(&[Rational::one()]), hi));
    } else {
        combinations(proj.len(), r, |subset| {
            let base = &proj[subset[0]];
            let rows: Vec<Vec<Rational>> = subset[1..]
                .iter()
                .map(|&k| proj[k].iter().zip(base).map(|(a, b)| a - b).collect())
                .collect();
            let ns = nullspace(&rows, r);
            if ns.len() != 1 {
                return;
            }
            let n = &ns[0];
            let height = dot(n, base);
            let mut above = false;
            let mut below = false;
            for p in &proj {
                let s = dot(n, p) - &height;
                if s.is_positive() {
                    above = true;
                } else if s.is_negative() {
                    below = true;
                }
                if above && below {
                    return;
                }
            }
            let hs = if above {
                Halfspace {
                    normal: embed(&n.iter().map(|x| -x).collect::<Vec<_>>()),
                    height: -height,
                }
            } else {
                Halfspace {
                    normal: embed(n),
                    height,
                }
            };
            let hs = hs.primitive();
            if !found.contains(&hs) {
                found.push(hs);
            }
        });
    }
    found.sort();
    h.inequalities = found;
    Ok((h, basis))
}

/// Membership of a full belief vector in `M`, given its facets.
pub fn contains_belief(h: &HPolytope, basis: &AffineHullBasis, belief: &[Rational]) -> Result<bool> {
    if belief.len() != h.dim + 1 {
        return Err(Error::Dimension("belief length does not match the polytope".into()));
    }
    contains(h, basis, &to_free(belief))
}

/// Membership of a free-coordinate point.
pub fn contains(h: &HPolytope, basis: &AffineHullBasis, point: &[Rational]) -> Result<bool> {
    if point.len() != h.dim || basis.anchor.len() != h.dim {
        return Err(Error::Dimension("point length does not match the polytope".into()));
    }
    Ok(basis.contains(point) && h.contains(point))
}

/// Facets and hull of the identified set `M(u, ν₀)`.
pub fn identified_set(
    problem: &DecisionProblem,
    marginal: &Distribution,
    cap: usize,
) -> Result<(VPolytope, HPolytope, AffineHullBasis)> {
    let v = weighted_minkowski(problem, marginal, cap)?;
    let (h, b) = facets(&v)?;
    Ok((v, h, b))
}

/// Primitive outward facet normals of `M`, in free coordinates.
pub fn refinement_rays(problem: &DecisionProblem, marginal: &Distribution, cap: usize) -> Result<Vec<Vec<Rational>>> {
    let (_, h, _) = identified_set(problem, marginal, cap)?;
    Ok(h.inequalities.into_iter().map(|f| f.normal).collect())
}

/// Orders the vertices of a planar convex polygon counter-clockwise,
/// starting from the lexicographically smallest.
pub fn polygon_cycle(points: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let o = pts[0].clone();
    let mut rest = pts[1..].to_vec();
    let cross =
        |a: &Vec<Rational>, b: &Vec<Rational>| (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0]);
    rest.sort_by(|a, b| {
        let c = cross(a, b);
        if c.is_positive() {
            std::cmp::Ordering::Less
        } else if c.is_negative() {
            std::cmp::Ordering::Greater
        } else {
            let da = (&a[0] - &o[0]).abs() + (&a[1] - &o[1]).abs();
            let db = (&b[0] - &o[0]).abs() + (&b[1] - &o[1]).abs();
            da.cmp(&db)
        }
    });
    let mut out = vec![o];
    out.extend(rest);
    out
}
