//! Dense revised simplex for small linear programs, plus a depth-first
//! branch-and-bound that enforces `x_a · x_b = 0` on variable pairs.
//!
//! Problems are `min cᵀx` subject to `aᵢᵀx {≤, ≥, =} bᵢ` and `x ≥ 0`.
//! The basis inverse is kept explicitly and refactored periodically.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Dense coefficients, one per variable.
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or sign constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Primal feasibility tolerance on row-scaled values.
    pub feas_tol: f64,
    /// Reduced-cost tolerance on the scaled objective.
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
    /// Consecutive non-improving pivots before switching to Bland's rule.
    pub stall_limit: usize,
    pub max_nodes: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            opt_tol: 1e-11,
            pivot_tol: 1e-9,
            max_iterations: 200_000,
            refactor_every: 64,
            stall_limit: 50,
            max_nodes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    /// Rows still violated when phase one stalls.
    #[error("infeasible: rows {rows:?} cannot be satisfied")]
    Infeasible { rows: Vec<usize> },
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("branch-and-bound node limit {0} reached")]
    NodeLimit(usize),
    #[error("basis matrix became singular")]
    Singular,
    #[error("constraint {row} has {got} coefficients, expected {expected}")]
    Shape { row: usize, got: usize, expected: usize },
}

pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    solve_restricted(lp, &vec![false; lp.n_vars()], opts)
}

/// Solves with every variable flagged in `fixed_zero` held at zero.
pub fn solve_restricted(lp: &LinearProgram, fixed_zero: &[bool], opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let n = lp.n_vars();
    for (row, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(LpError::Shape { row, got: c.coeffs.len(), expected: n });
        }
    }
    let mut s = Simplex::new(lp, fixed_zero, opts);
    s.run()?;
    let mut x = vec![0.0; n];
    for (pos, &j) in s.basis.iter().enumerate() {
        if j < n {
            x[j] = s.xb[pos].max(0.0);
        }
    }
    Ok(LpSolution { objective: lp.objective_value(&x), x, iterations: s.iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BranchStats {
    pub iterations: usize,
    pub nodes: usize,
    /// True when the root relaxation violated complementarity.
    pub branched: bool,
}

/// Largest `x_a · x_b` over the pairs.
pub fn complementarity(x: &[f64], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(a, b)| x[a] * x[b]).fold(0.0, f64::max)
}

/// Minimizes subject to `x_a · x_b ≤ eps` for every pair, branching on
/// `x_a = 0` versus `x_b = 0` for the worst offending pair.
pub fn solve_complementary(
    lp: &LinearProgram,
    pairs: &[(usize, usize)],
    eps: f64,
    opts: &SimplexOptions,
) -> Result<(LpSolution, BranchStats), LpError> {
    let mut stats = BranchStats::default();
    let root = solve(lp, opts)?;
    stats.iterations += root.iterations;
    stats.nodes = 1;
    if complementarity(&root.x, pairs) <= eps {
        return Ok((root, stats));
    }
    stats.branched = true;

    let mut best: Option<LpSolution> = None;
    let mut first_err: Option<LpError> = None;
    let mut stack: Vec<Vec<bool>> = Vec::new();
    push_children(&mut stack, &vec![false; lp.n_vars()], &root.x, pairs);
    while let Some(fixed) = stack.pop() {
        if stats.nodes >= opts.max_nodes {
            return Err(LpError::NodeLimit(opts.max_nodes));
        }
        stats.nodes += 1;
        let sol = match solve_restricted(lp, &fixed, opts) {
            Ok(s) => s,
            Err(LpError::Infeasible { .. }) => continue,
            Err(e) => {
                first_err.get_or_insert(e);
                continue;
            }
        };
        stats.iterations += sol.iterations;
        if let Some(b) = &best {
            if sol.objective >= b.objective - 1e-15 * (1.0 + b.objective.abs()) {
                continue;
            }
        }
        if complementarity(&sol.x, pairs) <= eps {
            best = Some(sol);
        } else {
            push_children(&mut stack, &fixed, &sol.x, pairs);
        }
    }
    match (best, first_err) {
        (Some(b), _) => Ok((b, stats)),
        (None, Some(e)) => Err(e),
        (None, None) => Err(LpError::Infeasible { rows: Vec::new() }),
    }
}

fn push_children(stack: &mut Vec<Vec<bool>>, fixed: &[bool], x: &[f64], pairs: &[(usize, usize)]) {
    let Some(&(a, b)) = pairs
        .iter()
        .filter(|&&(a, b)| !fixed[a] && !fixed[b])
        .max_by(|p, q| (x[p.0] * x[p.1]).total_cmp(&(x[q.0] * x[q.1])))
    else {
        return;
    };
    // explore the branch that keeps the larger value first
    let (keep, drop) = if x[a] >= x[b] { (a, b) } else { (b, a) };
    let mut other = fixed.to_vec();
    other[keep] = true;
    stack.push(other);
    let mut first = fixed.to_vec();
    first[drop] = true;
    stack.push(first);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial(usize),
}

struct Simplex<'a> {
    opts: &'a SimplexOptions,
    m: usize,
    n_struct: usize,
    /// Column-major, `m` entries per column.
    a: Vec<f64>,
    kinds: Vec<Kind>,
    b: Vec<f64>,
    c_struct: Vec<f64>,
    allowed: Vec<bool>,
    basis: Vec<usize>,
    /// Position of each column in the basis, or `usize::MAX`.
    pos: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

const NONBASIC: usize = usize::MAX;

impl<'a> Simplex<'a> {
    fn new(lp: &LinearProgram, fixed_zero: &[bool], opts: &'a SimplexOptions) -> Self {
        let m = lp.constraints.len();
        let n = lp.n_vars();
        let mut a: Vec<f64> = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut rel = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let scale = c.coeffs.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            let mut s = if scale > 0.0 { 1.0 / scale } else { 1.0 };
            let mut r = c.relation;
            if c.rhs < 0.0 {
                s = -s;
                r = match r {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            for (j, &v) in c.coeffs.iter().enumerate() {
                a[j * m + i] = v * s;
            }
            b[i] = c.rhs * s;
            rel.push(r);
        }
        let mut kinds = vec![Kind::Structural; n];
        let mut basis = vec![NONBASIC; m];
        let push_col = |a: &mut Vec<f64>, kinds: &mut Vec<Kind>, row: usize, v: f64, kind: Kind| {
            let start = a.len();
            a.resize(start + m, 0.0);
            a[start + row] = v;
            kinds.push(kind);
            kinds.len() - 1
        };
        for (i, r) in rel.iter().enumerate() {
            match r {
                Relation::Le => basis[i] = push_col(&mut a, &mut kinds, i, 1.0, Kind::Slack),
                Relation::Ge => {
                    push_col(&mut a, &mut kinds, i, -1.0, Kind::Slack);
                }
                Relation::Eq => {}
            }
        }
        for i in 0..m {
            if basis[i] == NONBASIC {
                basis[i] = push_col(&mut a, &mut kinds, i, 1.0, Kind::Artificial(i));
            }
        }
        let total = kinds.len();
        let mut pos = vec![NONBASIC; total];
        for (p, &j) in basis.iter().enumerate() {
            pos[j] = p;
        }
        let mut allowed = vec![true; total];
        for (j, &f) in fixed_zero.iter().enumerate() {
            allowed[j] = !f;
        }
        let cmax = lp.objective.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let cs = if cmax > 0.0 { 1.0 / cmax } else { 1.0 };
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Self {
            opts,
            m,
            n_struct: n,
            a,
            kinds,
            xb: b.clone(),
            b,
            c_struct: lp.objective.iter().map(|c| c * cs).collect(),
            allowed,
            basis,
            pos,
            binv,
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.a[j * self.m..(j + 1) * self.m]
    }

    fn run(&mut self) -> Result<(), LpError> {
        let has_artificial = self.kinds.iter().any(|k| matches!(k, Kind::Artificial(_)));
        if has_artificial {
            let cost: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if matches!(k, Kind::Artificial(_)) { 1.0 } else { 0.0 })
                .collect();
            self.optimize(&cost)?;
            self.refactor()?;
            let bmax = self.b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let tol = self.opts.feas_tol * bmax;
            let mut rows: Vec<usize> = self
                .basis
                .iter()
                .enumerate()
                .filter_map(|(p, &j)| match self.kinds[j] {
                    Kind::Artificial(row) if self.xb[p] > tol => Some(row),
                    _ => None,
                })
                .collect();
            if !rows.is_empty() {
                rows.sort_unstable();
                return Err(LpError::Infeasible { rows });
            }
            for j in 0..self.kinds.len() {
                if matches!(self.kinds[j], Kind::Artificial(_)) {
                    self.allowed[j] = false;
                }
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.kinds.len()];
        cost[..self.n_struct].copy_from_slice(&self.c_struct);
        self.optimize(&cost)?;
        self.refactor()
    }

    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for p in 0..m {
            if !matches!(self.kinds[self.basis[p]], Kind::Artificial(_)) {
                continue;
            }
            self.xb[p] = 0.0;
            let row = &self.binv[p * m..(p + 1) * m];
            let mut best = (NONBASIC, self.opts.pivot_tol);
            for j in 0..self.kinds.len() {
                if self.pos[j] != NONBASIC || !self.allowed[j] {
                    continue;
                }
                let v: f64 = row.iter().zip(self.col(j)).map(|(r, a)| r * a).sum();
                if v.abs() > best.1 {
                    best = (j, v.abs());
                }
            }
            if best.0 != NONBASIC {
                let alpha = self.ftran(best.0);
                self.pivot(p, best.0, &alpha, 0.0);
            }
        }
    }

    /// `B⁻¹·A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col = self.col(j);
        let mut out = vec![0.0; m];
        for k in 0..m {
            let v = col[k];
            if v != 0.0 {
                for i in 0..m {
                    out[i] += self.binv[i * m + k] * v;
                }
            }
        }
        out
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -self.opts.feas_tol {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let inv = 1.0 / alpha[r];
        for k in 0..m {
            self.binv[r * m + k] *= inv;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_exact_mut(m).chain(after.chunks_exact_mut(m)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = alpha[i];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
            }
        }
        self.pos[self.basis[r]] = NONBASIC;
        self.basis[r] = q;
        self.pos[q] = r;
        self.since_refactor += 1;
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination and recomputes `x_B`.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut bm = vec![0.0; m * m];
        for (p, &j) in self.basis.iter().enumerate() {
            for (i, &v) in self.col(j).iter().enumerate() {
                bm[i * m + p] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (piv, val) = (c..m)
                .map(|i| (i, bm[i * m + c].abs()))
                .fold((c, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if val < 1e-13 {
                return Err(LpError::Singular);
            }
            if piv != c {
                for k in 0..m {
                    bm.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = 1.0 / bm[c * m + c];
            for k in 0..m {
                bm[c * m + k] *= d;
                inv[c * m + k] *= d;
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = bm[i * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        bm[i * m + k] -= f * bm[c * m + k];
                        inv[i * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.b).map(|(r, b)| r * b).sum();
            self.xb[i] = if v < 0.0 && v > -self.opts.feas_tol { 0.0 } else { v };
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<(), LpError> {
        let m = self.m;
        let total = self.kinds.len();
        let mut stall = 0usize;
        let mut y = vec![0.0; m];
        let mut last_obj = f64::INFINITY;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(LpError::IterationLimit(self.opts.max_iterations));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            y.iter_mut().for_each(|v| *v = 0.0);
            for (p, &j) in self.basis.iter().enumerate() {
                let cb = cost[j];
                if cb != 0.0 {
                    let row = &self.binv[p * m..(p + 1) * m];
                    for (yk, r) in y.iter_mut().zip(row) {
                        *yk += cb * r;
                    }
                }
            }
            let bland = stall >= self.opts.stall_limit;
            let mut entering = NONBASIC;
            let mut best = -self.opts.opt_tol;
            for j in 0..total {
                if self.pos[j] != NONBASIC || !self.allowed[j] {
                    continue;
                }
                let d = cost[j] - self.col(j).iter().zip(&y).map(|(a, y)| a * y).sum::<f64>();
                if d < best {
                    entering = j;
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            if entering == NONBASIC {
                return Ok(());
            }
            let alpha = self.ftran(entering);
            let Some(r) = self.ratio_test(&alpha, bland) else {
                return Err(LpError::Unbounded);
            };
            let theta = (self.xb[r] / alpha[r]).max(0.0);
            self.pivot(r, entering, &alpha, theta);
            self.iterations += 1;

            let obj: f64 = self.basis.iter().zip(&self.xb).map(|(&j, x)| cost[j] * x).sum();
            if obj < last_obj - 1e-14 * (1.0 + obj.abs()) {
                stall = 0;
            } else {
                stall += 1;
            }
            last_obj = obj;
        }
    }

    /// Harris two-pass ratio test; textbook minimum ratio with lowest
    /// basic index under Bland's rule.
    fn ratio_test(&self, alpha: &[f64], bland: bool) -> Option<usize> {
        let tol = self.opts.pivot_tol;
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a > tol {
                    let t = self.xb[i].max(0.0) / a;
                    best = match best {
                        None => Some((i, t)),
                        Some((bi, bt)) => {
                            if t < bt - 1e-15 || (t <= bt + 1e-15 && self.basis[i] < self.basis[bi]) {
                                Some((i, t))
                            } else {
                                Some((bi, bt))
                            }
                        }
                    };
                }
            }
            return best.map(|(i, _)| i);
        }
        let mut theta_max = f64::INFINITY;
        for (i, &a) in alpha.iter().enumerate() {
            if a > tol {
                theta_max = theta_max.min((self.xb[i].max(0.0) + self.opts.feas_tol) / a);
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        let mut pick: Option<usize> = None;
        for (i, &a) in alpha.iter().enumerate() {
            if a > tol && self.xb[i].max(0.0) / a <= theta_max && pick.map_or(true, |p| a > alpha[p]) {
                pick = Some(i);
            }
        }
        pick
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn opts() -> SimplexOptions {
        SimplexOptions::default()
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(s.objective, -36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn phase_one_with_ge_and_eq() {
        // min x + y, x + y ≥ 2, x − y = 1 → (1.5, 0.5)
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add(vec![1.0, -1.0], Relation::Eq, 1.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(s.x[0], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_le_row() {
        // −x ≤ −3 means x ≥ 3
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add(vec![-1.0], Relation::Le, -3.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn reports_infeasible_rows() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 1.0);
        lp.add(vec![0.0, 1.0], Relation::Le, 5.0);
        lp.add(vec![1.0, 0.0], Relation::Ge, 2.0);
        match solve(&lp, &opts()) {
            Err(LpError::Infeasible { rows }) => assert_eq!(rows, vec![2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp, &opts()), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 4.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the naive largest-coefficient rule.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(s.objective, -0.05, epsilon = 1e-9);
    }

    #[test]
    fn fixed_variables_stay_zero() {
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
        lp.add(vec![1.0, 1.0], Relation::Le, 3.0);
        let s = solve_restricted(&lp, &[false, true], &opts()).unwrap();
        assert_eq!(s.x[1], 0.0);
        assert_abs_diff_eq!(s.x[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn branch_and_bound_enforces_pairs() {
        // relaxation gives x = y = 1 with −2; with x·y = 0 the best is −1
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.add(vec![1.0, 1.0], Relation::Le, 2.0);
        lp.add(vec![1.0, 0.0], Relation::Le, 1.0);
        lp.add(vec![0.0, 1.0], Relation::Le, 1.0);
        let relaxed = solve(&lp, &opts()).unwrap();
        assert_abs_diff_eq!(relaxed.objective, -2.0, epsilon = 1e-12);
        let (s, stats) = solve_complementary(&lp, &[(0, 1)], 1e-6, &opts()).unwrap();
        assert_abs_diff_eq!(s.objective, -1.0, epsilon = 1e-12);
        assert!(complementarity(&s.x, &[(0, 1)]) <= 1e-6);
        assert!(stats.branched);
        assert_eq!(stats.nodes, 3);
    }

    #[test]
    fn branch_and_bound_skips_when_root_complementary() {
        let mut lp = LinearProgram::new(vec![-1.0, 1.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 1.0);
        let (_, stats) = solve_complementary(&lp, &[(0, 1)], 1e-6, &opts()).unwrap();
        assert!(!stats.branched);
        assert_eq!(stats.nodes, 1);
    }

    /// Brute force over vertices of a 2-variable polytope.
    fn vertex_oracle(c: [f64; 2], rows: &[([f64; 2], f64)]) -> Option<f64> {
        let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
        lines.push(([1.0, 0.0], 0.0));
        lines.push(([0.0, 1.0], 0.0));
        let feasible = |x: [f64; 2]| {
            x[0] >= -1e-9 && x[1] >= -1e-9 && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9)
        };
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a, b) = lines[i];
                let (p, q) = lines[j];
                let det = a[0] * p[1] - a[1] * p[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = [(b * p[1] - a[1] * q) / det, (a[0] * q - b * p[0]) / det];
                if feasible(x) {
                    let v = c[0] * x[0] + c[1] * x[1];
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            c in proptest::array::uniform2(-5.0f64..5.0),
            rows in proptest::collection::vec((proptest::array::uniform2(0.1f64..5.0), 0.5f64..10.0), 1..6),
        ) {
            // positive coefficients keep the polytope bounded
            let mut lp = LinearProgram::new(c.to_vec());
            for (a, b) in &rows {
                lp.add(a.to_vec(), Relation::Le, *b);
            }
            let s = solve(&lp, &opts()).unwrap();
            let oracle = vertex_oracle(c, &rows).unwrap();
            prop_assert!((s.objective - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()));
            prop_assert!(lp.max_violation(&s.x) <= 1e-9);
        }
    }
}
