//! Dense bounded-variable primal simplex (two phases).
//!
//! Every variable needs a finite lower bound; upper bounds may be infinite.
//! Nonbasic variables sit at one of their bounds, so box constraints never
//! become rows. Pricing is Dantzig's rule, switching to Bland's rule after a
//! run of degenerate pivots or when the objective stops improving between
//! rebuilds. The tableau is rebuilt from the original rows
//! every few pivots and before the solver reports optimality or an unbounded
//! ray.

use super::{Constraint, Sense};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;
const REINVERT_EVERY: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    /// `n` variables in `[0, inf)` with zero objective.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    solve_with_bounds(lp, &lp.lower, &lp.upper, &[])
}

/// Solves `lp` with replaced variable bounds and extra rows appended.
pub(crate) fn solve_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    extra: &[Constraint],
) -> LpSolution {
    let n = lp.num_vars();
    let fail = |status| LpSolution {
        status,
        x: Vec::new(),
        objective: f64::NAN,
    };
    for j in 0..n {
        assert!(lower[j].is_finite(), "variable {j} needs a finite lower bound");
        if upper[j] < lower[j] - FEAS_TOL {
            return fail(LpStatus::Infeasible);
        }
    }
    let rows: Vec<&Constraint> = lp.constraints.iter().chain(extra).collect();
    let mut t = Tableau::build(n, lower, upper, &rows);
    match t.phase_one() {
        Ok(()) => {}
        Err(status) => return fail(status),
    }
    t.set_phase_two_costs(&lp.objective);
    if let Err(status) = t.iterate() {
        return fail(status);
    }
    let x = t.primal(lower);
    let objective = lp.objective_value(&x);
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    }
}

struct Tableau {
    m: usize,
    n: usize,
    cols: usize,
    /// Row-major `m x cols` matrix `B^-1 A`.
    a: Vec<f64>,
    /// Initial tableau and right-hand side, where the starting basis is the
    /// identity.
    a0: Vec<f64>,
    b0: Vec<f64>,
    /// Values of the basic variables (shifted so lower bounds are zero).
    beta: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    upper: Vec<f64>,
    head: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    max_iter: usize,
}

impl Tableau {
    fn build(n: usize, lower: &[f64], upper: &[f64], rows: &[&Constraint]) -> Self {
        let m = rows.len();
        let cols = n + 2 * m;
        let mut a = vec![0.0; m * cols];
        let mut beta = vec![0.0; m];
        let mut ub = vec![f64::INFINITY; cols];
        for j in 0..n {
            ub[j] = (upper[j] - lower[j]).max(0.0);
        }
        let mut head = vec![0; m];
        let mut cost = vec![0.0; cols];
        for (i, row) in rows.iter().enumerate() {
            let flip = if row.sense == Sense::Ge { -1.0 } else { 1.0 };
            let mut rhs = flip * row.rhs;
            let r = &mut a[i * cols..(i + 1) * cols];
            for &(j, v) in &row.coeffs {
                r[j] += flip * v;
            }
            for j in 0..n {
                rhs -= r[j] * lower[j];
            }
            let slack = n + i;
            let art = n + m + i;
            r[slack] = 1.0;
            if row.sense == Sense::Eq {
                ub[slack] = 0.0;
            }
            if row.sense != Sense::Eq && rhs >= 0.0 {
                head[i] = slack;
                beta[i] = rhs;
                ub[art] = 0.0;
            } else {
                let sign = if rhs >= 0.0 { 1.0 } else { -1.0 };
                r[art] = sign;
                if sign < 0.0 {
                    for v in r.iter_mut() {
                        *v = -*v;
                    }
                }
                head[i] = art;
                beta[i] = rhs.abs();
                cost[art] = 1.0;
            }
        }
        let mut is_basic = vec![false; cols];
        for &h in &head {
            is_basic[h] = true;
        }
        Tableau {
            m,
            n,
            cols,
            a0: a.clone(),
            b0: beta.clone(),
            a,
            beta,
            cost,
            reduced: vec![0.0; cols],
            upper: ub,
            head,
            is_basic,
            at_upper: vec![false; cols],
            max_iter: 20_000 + 50 * (m + cols),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    fn recompute_reduced(&mut self) {
        self.reduced.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.head[i]];
            if cb != 0.0 {
                let start = i * self.cols;
                for j in 0..self.cols {
                    self.reduced[j] -= cb * self.a[start + j];
                }
            }
        }
    }

    fn phase_one(&mut self) -> Result<(), LpStatus> {
        self.recompute_reduced();
        self.iterate()?;
        let infeasibility: f64 = (0..self.m)
            .filter(|&i| self.head[i] >= self.n + self.m)
            .map(|i| self.beta[i])
            .sum();
        let scale = 1.0 + self.beta.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Err(LpStatus::Infeasible);
        }
        for j in self.n + self.m..self.cols {
            self.upper[j] = 0.0;
            self.at_upper[j] = false;
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..self.m {
            if self.head[i] < self.n + self.m {
                continue;
            }
            let r = self.row(i);
            let q = (0..self.n + self.m)
                .filter(|&j| !self.is_basic[j] && self.upper[j] > 0.0)
                .max_by(|&x, &y| r[x].abs().total_cmp(&r[y].abs()));
            if let Some(q) = q {
                if self.row(i)[q].abs() > 1e-7 {
                    let entering = if self.at_upper[q] { self.upper[q] } else { 0.0 };
                    self.pivot(i, q, entering);
                }
            }
        }
        Ok(())
    }

    fn set_phase_two_costs(&mut self, objective: &[f64]) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.n].copy_from_slice(objective);
        self.recompute_reduced();
    }

    fn iterate(&mut self) -> Result<(), LpStatus> {
        let mut degenerate = 0usize;
        let mut since_reinvert = 0usize;
        let mut stalled = false;
        let mut last_obj = f64::INFINITY;
        for _ in 0..self.max_iter {
            if since_reinvert >= REINVERT_EVERY && self.reinvert() {
                since_reinvert = 0;
                let obj = self.objective_now();
                stalled |= obj > last_obj - 1e-9 * (1.0 + obj.abs());
                last_obj = obj;
            }
            let bland = stalled || degenerate >= DEGENERATE_RUN;
            let Some((q, dir)) = self.price(bland) else {
                if since_reinvert > 0 && self.reinvert() {
                    since_reinvert = 0;
                    continue;
                }
                return Ok(());
            };
            let col: Vec<f64> = (0..self.m).map(|i| self.a[i * self.cols + q]).collect();
            // Harris ratio test: bound the step with slightly relaxed basic
            // bounds, then leave on the largest pivot within that bound.
            // Bland mode keeps the exact bounds so the anti-cycling rule holds.
            let ratio = |i: usize, slack: f64| -> Option<(f64, bool)> {
                let delta = dir * col[i];
                if delta > PIVOT_TOL {
                    Some(((self.beta[i].max(0.0) + slack) / delta, false))
                } else if delta < -PIVOT_TOL && self.upper[self.head[i]].is_finite() {
                    Some((((self.upper[self.head[i]] - self.beta[i]).max(0.0) + slack) / -delta, true))
                } else {
                    None
                }
            };
            let slack = if bland { 0.0 } else { FEAS_TOL };
            let relaxed = (0..self.m)
                .filter_map(|i| ratio(i, slack))
                .fold(f64::INFINITY, |b, (r, _)| b.min(r));
            let mut step = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            if relaxed < step {
                let mut best_mag = 0.0;
                for i in 0..self.m {
                    let Some((r, to_upper)) = ratio(i, 0.0) else { continue };
                    if r > relaxed {
                        continue;
                    }
                    let mag = col[i].abs();
                    let take = match leave {
                        None => true,
                        Some((p, _)) if bland => self.head[i] < self.head[p],
                        Some(_) => mag > best_mag,
                    };
                    if take {
                        leave = Some((i, to_upper));
                        best_mag = mag;
                        step = r;
                    }
                }
            }
            if step.is_infinite() {
                if since_reinvert > 0 && self.reinvert() {
                    since_reinvert = 0;
                    continue;
                }
                return Err(LpStatus::Unbounded);
            }
            since_reinvert += 1;
            if leave.is_some_and(|(p, _)| col[p].abs() < 1e-7) {
                since_reinvert = REINVERT_EVERY;
            }
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for (i, &alpha) in col.iter().enumerate() {
                self.beta[i] -= step * dir * alpha;
            }
            let start = if self.at_upper[q] { self.upper[q] } else { 0.0 };
            match leave {
                Some((p, to_upper)) => {
                    let leaving = self.head[p];
                    self.at_upper[leaving] = to_upper;
                    self.pivot(p, q, start + dir * step);
                }
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
            }
        }
        Err(LpStatus::IterationLimit)
    }

    fn objective_now(&self) -> f64 {
        let basic: f64 = (0..self.m).map(|i| self.cost[self.head[i]] * self.beta[i]).sum();
        let upper: f64 = (0..self.cols)
            .filter(|&j| !self.is_basic[j] && self.at_upper[j])
            .map(|j| self.cost[j] * self.upper[j])
            .sum();
        basic + upper
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.is_basic[j] || self.upper[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let (score, dir) = if !self.at_upper[j] && d < -OPT_TOL {
                (-d, 1.0)
            } else if self.at_upper[j] && d > OPT_TOL {
                (d, -1.0)
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    /// Makes `q` basic in row `p` with value `value`.
    fn pivot(&mut self, p: usize, q: usize, value: f64) {
        let cols = self.cols;
        let piv = self.a[p * cols + q];
        {
            let r = &mut self.a[p * cols..(p + 1) * cols];
            for v in r.iter_mut() {
                *v /= piv;
            }
        }
        let prow: Vec<f64> = self.a[p * cols..(p + 1) * cols].to_vec();
        for i in 0..self.m {
            if i == p {
                continue;
            }
            let f = self.a[i * cols + q];
            if f != 0.0 {
                let r = &mut self.a[i * cols..(i + 1) * cols];
                for (v, pv) in r.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                r[q] = 0.0;
            }
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, pv) in self.reduced.iter_mut().zip(&prow) {
                *d -= dq * pv;
            }
            self.reduced[q] = 0.0;
        }
        let leaving = self.head[p];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.at_upper[q] = false;
        self.head[p] = q;
        self.beta[p] = value;
    }

    /// Recomputes `B^-1 A`, the basic values and the reduced costs from the
    /// initial tableau. Returns false, leaving the tableau untouched, when
    /// the basis is numerically singular.
    fn reinvert(&mut self) -> bool {
        let (m, cols) = (self.m, self.cols);
        let w = m + cols + 1;
        let mut aug = vec![0.0; m * w];
        for i in 0..m {
            let r0 = &self.a0[i * cols..(i + 1) * cols];
            let r = &mut aug[i * w..(i + 1) * w];
            for (k, &h) in self.head.iter().enumerate() {
                r[k] = r0[h];
            }
            r[m..m + cols].copy_from_slice(r0);
            let mut rhs = self.b0[i];
            for j in 0..cols {
                if !self.is_basic[j] && self.at_upper[j] {
                    rhs -= r0[j] * self.upper[j];
                }
            }
            r[m + cols] = rhs;
        }
        for k in 0..m {
            let p = (k..m)
                .max_by(|&x, &y| aug[x * w + k].abs().total_cmp(&aug[y * w + k].abs()))
                .expect("nonempty");
            if aug[p * w + k].abs() < 1e-11 {
                return false;
            }
            if p != k {
                for c in 0..w {
                    aug.swap(p * w + c, k * w + c);
                }
            }
            let piv = aug[k * w + k];
            for v in &mut aug[k * w..(k + 1) * w] {
                *v /= piv;
            }
            let prow: Vec<f64> = aug[k * w..(k + 1) * w].to_vec();
            for i in 0..m {
                let f = aug[i * w + k];
                if i != k && f != 0.0 {
                    for (v, pv) in aug[i * w..(i + 1) * w].iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        for i in 0..m {
            self.a[i * cols..(i + 1) * cols].copy_from_slice(&aug[i * w + m..i * w + m + cols]);
            for (k, &h) in self.head.iter().enumerate() {
                self.a[i * cols + h] = if k == i { 1.0 } else { 0.0 };
            }
            self.beta[i] = aug[i * w + m + cols];
        }
        self.recompute_reduced();
        true
    }

    fn primal(&self, lower: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.n)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for i in 0..self.m {
            let h = self.head[i];
            if h < self.n {
                x[h] = self.beta[i];
            }
        }
        for j in 0..self.n {
            x[j] = (x[j].max(0.0).min(self.upper[j])) + lower[j];
        }
        x
    }
}
