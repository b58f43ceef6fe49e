//! Dense two-phase simplex for small box-bounded linear programs.
//!
//! Every problem carries a finite variable box, so `Unbounded` can only come
//! back if the box is violated by construction; it is kept as an outcome for
//! completeness. Pivoting follows Bland's rule with a fixed tie order, so the
//! same problem always produces the same optimal vertex.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::model::Bounds;

/// A point counts as satisfying `a·x <= b` when `a·x <= b + FEASIBILITY_TOL`.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// A system is open-feasible when its interior margin exceeds this.
pub const STRICT_MARGIN: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const RATIO_TIE: f64 = 1e-12;
const MAX_PIVOTS: usize = 20_000;

thread_local! {
    static SOLVE_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of LPs solved on the current thread since the last reset.
pub fn solve_calls() -> u64 {
    SOLVE_CALLS.with(Cell::get)
}

pub fn reset_solve_calls() {
    SOLVE_CALLS.with(|c| c.set(0));
}

/// `maximize objective·x  s.t.  rows·x <= rhs,  bounds.lo <= x <= bounds.hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<Bounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Outcome of [`interior_margin`].
#[derive(Debug, Clone, PartialEq)]
pub enum MarginOutcome {
    Feasible { margin: f64, witness: Vec<f64> },
    Infeasible,
}

impl MarginOutcome {
    /// True when the system admits a point with every inequality satisfied
    /// by more than [`STRICT_MARGIN`].
    pub fn is_open(&self) -> bool {
        matches!(self, Self::Feasible { margin, .. } if *margin > STRICT_MARGIN)
    }

    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            Self::Feasible { witness, .. } => Some(witness),
            Self::Infeasible => None,
        }
    }
}

fn check_dims(rows: &[Vec<f64>], rhs: &[f64], bounds: &[Bounds]) -> Result<usize> {
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::Lp("problem has no variables".into()));
    }
    if rows.len() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), got: rhs.len() });
    }
    if let Some(row) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
    }
    if let Some(b) =
        bounds.iter().find(|b| b.lo.partial_cmp(&b.hi) != Some(std::cmp::Ordering::Less) || !b.lo.is_finite() || !b.hi.is_finite())
    {
        return Err(Error::Domain(format!("invalid variable box [{}, {}]", b.lo, b.hi)));
    }
    Ok(dim)
}

pub fn solve(problem: &LpProblem) -> Result<LpOutcome> {
    let dim = check_dims(&problem.rows, &problem.rhs, &problem.bounds)?;
    if problem.objective.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: problem.objective.len() });
    }
    SOLVE_CALLS.with(|c| c.set(c.get() + 1));
    Tableau::build(problem, dim).map_or(Ok(LpOutcome::Infeasible), |t| t.run(problem))
}

/// Solves `maximize t  s.t.  rows·x + t <= rhs` (box faces included, with
/// `0 <= t <= diag(box)`), the largest uniform slack any point of the box
/// can achieve. Callers normalise rows when the margin should be a distance.
pub fn interior_margin(rows: &[Vec<f64>], rhs: &[f64], bounds: &[Bounds]) -> Result<MarginOutcome> {
    let dim = check_dims(rows, rhs, bounds)?;
    let diag = bounds.iter().map(|b| b.width() * b.width()).sum::<f64>().sqrt();

    let mut lifted_rows = Vec::with_capacity(rows.len() + 2 * dim);
    let mut lifted_rhs = Vec::with_capacity(rows.len() + 2 * dim);
    for (row, &b) in rows.iter().zip(rhs) {
        let mut r = row.clone();
        r.push(1.0);
        lifted_rows.push(r);
        lifted_rhs.push(b);
    }
    for (j, b) in bounds.iter().enumerate() {
        for (sign, bound) in [(1.0, b.hi), (-1.0, -b.lo)] {
            let mut r = vec![0.0; dim + 1];
            r[j] = sign;
            r[dim] = 1.0;
            lifted_rows.push(r);
            lifted_rhs.push(bound);
        }
    }
    let mut lifted_bounds = bounds.to_vec();
    lifted_bounds.push(Bounds { lo: 0.0, hi: diag });
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;

    let problem = LpProblem { objective, rows: lifted_rows, rhs: lifted_rhs, bounds: lifted_bounds };
    match solve(&problem)? {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(dim);
            Ok(MarginOutcome::Feasible { margin: value, witness: x })
        }
        LpOutcome::Infeasible => Ok(MarginOutcome::Infeasible),
        LpOutcome::Unbounded => Err(Error::Lp("margin program reported unbounded".into())),
    }
}

/// Standard-form tableau over shifted variables `y = x - lo >= 0`.
///
/// Columns: `dim` structural, one slack per row, then artificials.
struct Tableau {
    dim: usize,
    ncols: usize,
    first_artificial: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
}

impl Tableau {
    /// Returns `None` when a zero row alone makes the system infeasible.
    fn build(p: &LpProblem, dim: usize) -> Option<Self> {
        let mut coeffs: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for (row, &b) in p.rows.iter().zip(&p.rhs) {
            let shifted = b - row.iter().zip(&p.bounds).map(|(a, bd)| a * bd.lo).sum::<f64>();
            let scale = row.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
            if scale == 0.0 {
                if shifted < -FEASIBILITY_TOL {
                    return None;
                }
                continue;
            }
            coeffs.push(row.iter().map(|a| a / scale).collect());
            rhs.push(shifted / scale);
        }
        for (j, bd) in p.bounds.iter().enumerate() {
            let mut r = vec![0.0; dim];
            r[j] = 1.0;
            coeffs.push(r);
            rhs.push(bd.width());
        }

        let nrows = coeffs.len();
        let n_art = rhs.iter().filter(|b| **b < 0.0).count();
        let first_artificial = dim + nrows;
        let ncols = first_artificial + n_art;
        let mut rows = Vec::with_capacity(nrows);
        let mut basis = Vec::with_capacity(nrows);
        let mut next_art = first_artificial;
        for (i, (c, b)) in coeffs.into_iter().zip(rhs.iter_mut()).enumerate() {
            let mut r = vec![0.0; ncols];
            r[..dim].copy_from_slice(&c);
            r[dim + i] = 1.0;
            if *b < 0.0 {
                r.iter_mut().for_each(|v| *v = -*v);
                *b = -*b;
                r[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(dim + i);
            }
            rows.push(r);
        }
        Some(Self { dim, ncols, first_artificial, rows, rhs, basis, cost: vec![0.0; ncols] })
    }

    fn run(mut self, p: &LpProblem) -> Result<LpOutcome> {
        if self.ncols > self.first_artificial {
            // Phase one: maximize -sum(artificials).
            let mut c = vec![0.0; self.ncols];
            c[self.first_artificial..].iter_mut().for_each(|v| *v = -1.0);
            self.price(&c);
            if !self.iterate(self.ncols)? {
                return Err(Error::Lp("phase one reported unbounded".into()));
            }
            let infeasibility: f64 = self.basis.iter().zip(&self.rhs).filter(|(b, _)| **b >= self.first_artificial).map(|(_, v)| *v).sum();
            if infeasibility > FEASIBILITY_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }

        let mut c = vec![0.0; self.ncols];
        c[..self.dim].copy_from_slice(&p.objective);
        self.price(&c);
        if !self.iterate(self.first_artificial)? {
            return Ok(LpOutcome::Unbounded);
        }

        let mut x: Vec<f64> = p.bounds.iter().map(|b| b.lo).collect();
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.dim {
                x[var] += self.rhs[r].max(0.0);
            }
        }
        for (xi, b) in x.iter_mut().zip(&p.bounds) {
            *xi = xi.clamp(b.lo, b.hi);
        }
        let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, value })
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn price(&mut self, c: &[f64]) {
        self.cost.copy_from_slice(c);
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = c[var];
            if cb != 0.0 {
                for (k, v) in self.rows[r].iter().enumerate() {
                    self.cost[k] -= cb * v;
                }
            }
        }
    }

    /// Bland's-rule pivoting over columns `< allowed`. Returns `false` when
    /// an improving column has no blocking row.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] > COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, best)) => {
                        if ratio < best - RATIO_TIE || (ratio <= best + RATIO_TIE && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, enter);
        }
        Err(Error::Lp(format!("no convergence after {MAX_PIVOTS} pivots")))
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(col) = (0..self.first_artificial).find(|&j| self.rows[r][j].abs() > PIVOT_TOL) {
                self.pivot(r, col);
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn boxed(dim: usize, lo: f64, hi: f64) -> Vec<Bounds> {
        vec![Bounds { lo, hi }; dim]
    }

    #[test]
    fn single_bound() {
        let p = LpProblem { objective: vec![1.0, 0.0], rows: vec![vec![1.0, 0.0]], rhs: vec![1.0], bounds: boxed(2, -10.0, 10.0) };
        assert_eq!(solve(&p).unwrap().value(), Some(1.0));
    }

    #[test]
    fn contradictory_pair() {
        let p = LpProblem {
            objective: vec![0.3, -2.0],
            rows: vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            rhs: vec![0.0, -1.0],
            bounds: boxed(2, -10.0, 10.0),
        };
        assert_eq!(solve(&p).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn binding_hyperplane() {
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![vec![1.0, 1.0], vec![1.0, 0.0]],
            rhs: vec![3.0, 2.0],
            bounds: boxed(2, 0.0, 10.0),
        };
        let out = solve(&p).unwrap();
        assert!((out.value().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn box_alone_bounds_the_objective() {
        let p = LpProblem { objective: vec![1.0, -1.0], rows: vec![], rhs: vec![], bounds: boxed(2, -1.0, 2.0) };
        assert_eq!(solve(&p).unwrap().value(), Some(3.0));
    }

    #[test]
    fn zero_rows_are_checked_arithmetically() {
        let ok = LpProblem { objective: vec![1.0], rows: vec![vec![0.0]], rhs: vec![0.5], bounds: boxed(1, 0.0, 1.0) };
        assert_eq!(solve(&ok).unwrap().value(), Some(1.0));
        let bad = LpProblem { objective: vec![1.0], rows: vec![vec![0.0]], rhs: vec![-0.5], bounds: boxed(1, 0.0, 1.0) };
        assert_eq!(solve(&bad).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch() {
        let p = LpProblem { objective: vec![1.0], rows: vec![vec![1.0, 2.0]], rhs: vec![1.0], bounds: boxed(1, 0.0, 1.0) };
        assert!(matches!(solve(&p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn counts_calls() {
        reset_solve_calls();
        let p = LpProblem { objective: vec![1.0], rows: vec![], rhs: vec![], bounds: boxed(1, 0.0, 1.0) };
        solve(&p).unwrap();
        interior_margin(&[], &[], &boxed(1, 0.0, 1.0)).unwrap();
        assert_eq!(solve_calls(), 2);
    }

    #[test]
    fn margin_examples() {
        let b = boxed(1, -2.0, 2.0);
        let rows = vec![vec![1.0], vec![-1.0]];
        match interior_margin(&rows, &[1.0, 0.0], &b).unwrap() {
            MarginOutcome::Feasible { margin, witness } => {
                assert!((margin - 0.5).abs() < 1e-12);
                assert!((witness[0] - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let slab = interior_margin(&rows, &[0.0, 0.0], &b).unwrap();
        assert!(matches!(slab, MarginOutcome::Feasible { margin, .. } if margin.abs() < 1e-12));
        assert!(!slab.is_open());
        assert_eq!(interior_margin(&rows, &[-1.0, 0.0], &b).unwrap(), MarginOutcome::Infeasible);
    }

    /// Best objective over all vertices formed by `dim` tight rows (box
    /// faces included), found by direct linear solves.
    fn brute_force_max(p: &LpProblem) -> Option<f64> {
        let dim = p.bounds.len();
        let mut rows = p.rows.clone();
        let mut rhs = p.rhs.clone();
        for (j, b) in p.bounds.iter().enumerate() {
            let mut r = vec![0.0; dim];
            r[j] = 1.0;
            rows.push(r.clone());
            rhs.push(b.hi);
            r[j] = -1.0;
            rows.push(r);
            rhs.push(-b.lo);
        }
        let mut best: Option<f64> = None;
        for subset in (0..rows.len()).combinations(dim) {
            let m = DMatrix::from_fn(dim, dim, |i, j| rows[subset[i]][j]);
            let v = DVector::from_fn(dim, |i, _| rhs[subset[i]]);
            let Some(x) = m.lu().solve(&v) else { continue };
            if x.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let feasible = rows.iter().zip(&rhs).all(|(r, b)| r.iter().zip(x.iter()).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-9);
            if feasible {
                let val: f64 = p.objective.iter().zip(x.iter()).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(val, |b: f64| b.max(val)));
            }
        }
        best
    }

    fn feasible_system() -> impl Strategy<Value = LpProblem> {
        (1usize..=4, 0usize..=20).prop_flat_map(|(dim, m)| {
            (
                prop::collection::vec(-1.0..1.0f64, dim),
                prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dim), m),
                prop::collection::vec(0.0..1.0f64, m),
                prop::collection::vec(-1.5..1.5f64, dim),
            )
                .prop_map(move |(objective, rows, slack, anchor)| {
                    let rhs = rows.iter().zip(&slack).map(|(r, s)| r.iter().zip(&anchor).map(|(a, x)| a * x).sum::<f64>() + s).collect();
                    LpProblem { objective, rows, rhs, bounds: vec![Bounds { lo: -2.0, hi: 2.0 }; dim] }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn optimum_matches_vertex_oracle(p in feasible_system()) {
            let out = solve(&p).unwrap();
            let LpOutcome::Optimal { x, value } = &out else {
                return Err(TestCaseError::fail(format!("not optimal: {out:?}")));
            };
            for (r, b) in p.rows.iter().zip(&p.rhs) {
                let lhs: f64 = r.iter().zip(x).map(|(a, v)| a * v).sum();
                prop_assert!(lhs <= b + 1e-7);
            }
            let oracle = brute_force_max(&p).expect("anchor point is feasible");
            prop_assert!((value - oracle).abs() <= 1e-6, "{} vs {}", value, oracle);
            prop_assert_eq!(solve(&p).unwrap(), out);
        }
    }
}
