//! Dense revised simplex for small bounded LPs.
//!
//! Maximizes `c'x` subject to `Ax <= b` and `l <= x <= u`. Bounds are handled
//! directly (no row blow-up): nonbasic variables rest at either bound and may
//! flip without a basis change. Feasibility comes from a phase-1 run with
//! artificial columns on rows whose slack starts negative. Pricing is Dantzig
//! with a switch to Bland's rule after a run of degenerate pivots, which
//! guarantees termination on degenerate instances.

use super::{LinearProgram, LpSolution, LpStatus};

/// Pivot elements smaller than this are considered unusable.
pub const PIVOT_TOL: f64 = 1e-10;
const PRICE_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
/// Consecutive degenerate pivots before anti-cycling kicks in.
const BLAND_TRIGGER: usize = 50;
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    n_cols: usize,
    n_rows: usize,
    cols: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    obj: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    /// Row-major inverse of the basis matrix.
    binv: Vec<f64>,
    /// Current basic variable values, one per row.
    xb: Vec<f64>,
    n_artificial: usize,
    degenerate_run: usize,
    pivots_since_refactor: usize,
    iterations: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Tableau {
        let n = lp.objective.len();
        let m = lp.rows.len();

        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|j| lp.rows.iter().map(|r| r.coeffs[j]).collect())
            .collect();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for i in 0..m {
            let mut slack = vec![0.0; m];
            slack[i] = 1.0;
            cols.push(slack);
            lower.push(0.0);
            upper.push(f64::INFINITY);
        }
        debug_assert!(lower.iter().all(|l| l.is_finite()));

        // Nonbasic structurals start at their lower bound; rows whose slack
        // would start negative get an artificial basic column instead.
        let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        let mut resid = rhs.clone();
        for (j, col) in cols.iter().take(n).enumerate() {
            if lower[j] != 0.0 {
                for (i, &a) in col.iter().enumerate() {
                    resid[i] -= a * lower[j];
                }
            }
        }

        let mut basis = Vec::with_capacity(m);
        let mut state = vec![VarState::AtLower; n + m];
        let mut binv = vec![0.0; m * m];
        let mut xb = vec![0.0; m];
        let mut n_artificial = 0;
        for i in 0..m {
            if resid[i] >= 0.0 {
                basis.push(n + i);
                state[n + i] = VarState::Basic;
                binv[i * m + i] = 1.0;
                xb[i] = resid[i];
            } else {
                let mut art = vec![0.0; m];
                art[i] = -1.0;
                cols.push(art);
                lower.push(0.0);
                upper.push(f64::INFINITY);
                state.push(VarState::Basic);
                basis.push(cols.len() - 1);
                binv[i * m + i] = -1.0;
                xb[i] = -resid[i];
                n_artificial += 1;
            }
        }

        Tableau {
            n_cols: cols.len(),
            n_rows: m,
            cols,
            lower,
            upper,
            obj: Vec::new(),
            rhs,
            basis,
            state,
            binv,
            xb,
            n_artificial,
            degenerate_run: 0,
            pivots_since_refactor: 0,
            iterations: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_cols - self.n_artificial
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Basic => unreachable!("basic variable queried as nonbasic"),
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.n_rows;
        let mut y = vec![0.0; m];
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = self.obj[b];
            if cb != 0.0 {
                for i in 0..m {
                    y[i] += cb * self.binv[k * m + i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, y: &[f64], j: usize) -> f64 {
        let mut d = self.obj[j];
        for (i, &a) in self.cols[j].iter().enumerate() {
            if a != 0.0 {
                d -= y[i] * a;
            }
        }
        d
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.n_rows;
        let mut alpha = vec![0.0; m];
        for (k, &a) in self.cols[j].iter().enumerate() {
            if a != 0.0 {
                for i in 0..m {
                    alpha[i] += self.binv[i * m + k] * a;
                }
            }
        }
        alpha
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes
    /// basic values from scratch.
    fn refactor(&mut self) {
        let m = self.n_rows;
        if m == 0 {
            return;
        }
        let mut work = vec![0.0; m * 2 * m];
        for (r, &b) in self.basis.iter().enumerate() {
            for i in 0..m {
                work[i * 2 * m + r] = self.cols[b][i];
            }
        }
        for i in 0..m {
            work[i * 2 * m + m + i] = 1.0;
        }
        for col in 0..m {
            let mut pivot_row = col;
            let mut best = work[col * 2 * m + col].abs();
            for r in col + 1..m {
                let v = work[r * 2 * m + col].abs();
                if v > best {
                    best = v;
                    pivot_row = r;
                }
            }
            assert!(best > 1e-13, "singular basis during refactorization");
            if pivot_row != col {
                for k in 0..2 * m {
                    work.swap(col * 2 * m + k, pivot_row * 2 * m + k);
                }
            }
            let inv_pivot = 1.0 / work[col * 2 * m + col];
            for k in 0..2 * m {
                work[col * 2 * m + k] *= inv_pivot;
            }
            for r in 0..m {
                if r != col {
                    let f = work[r * 2 * m + col];
                    if f != 0.0 {
                        for k in 0..2 * m {
                            work[r * 2 * m + k] -= f * work[col * 2 * m + k];
                        }
                    }
                }
            }
        }
        for r in 0..m {
            for k in 0..m {
                self.binv[r * m + k] = work[r * 2 * m + m + k];
            }
        }

        let mut net = self.rhs.clone();
        for j in 0..self.n_cols {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for (i, &a) in self.cols[j].iter().enumerate() {
                    net[i] -= a * v;
                }
            }
        }
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i * m + k] * net[k];
            }
            self.xb[i] = acc;
        }
        self.pivots_since_refactor = 0;
    }

    fn choose_entering(&self, y: &[f64]) -> Option<(usize, f64)> {
        let bland = self.degenerate_run >= BLAND_TRIGGER;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n_cols {
            if self.state[j] == VarState::Basic {
                continue;
            }
            // Pinned variables (lower == upper) never move.
            if self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let d = self.reduced_cost(y, j);
            let score = match self.state[j] {
                VarState::AtLower => d,
                VarState::AtUpper => -d,
                VarState::Basic => unreachable!(),
            };
            if score > PRICE_TOL {
                if bland {
                    return Some((j, d));
                }
                if best.is_none() || score > best.unwrap().1.abs() {
                    best = Some((j, d));
                }
            }
        }
        best
    }

    fn step(&mut self) -> StepOutcome {
        let y = self.duals();
        let Some((entering, _)) = self.choose_entering(&y) else {
            return StepOutcome::Optimal;
        };
        let sigma = match self.state[entering] {
            VarState::AtLower => 1.0,
            VarState::AtUpper => -1.0,
            VarState::Basic => unreachable!(),
        };
        let alpha = self.ftran(entering);
        let bland = self.degenerate_run >= BLAND_TRIGGER;

        // Ratio test: the entering variable moves by t >= 0 until it hits its
        // opposite bound or some basic variable hits one of its own.
        let mut t_limit = self.upper[entering] - self.lower[entering];
        let mut leaving: Option<(usize, bool)> = None; // (row, leaves_at_lower)
        let mut best_pivot = 0.0;
        for i in 0..self.n_rows {
            let g = sigma * alpha[i];
            let b = self.basis[i];
            let (ratio, at_lower) = if g > PIVOT_TOL {
                ((self.xb[i] - self.lower[b]).max(0.0) / g, true)
            } else if g < -PIVOT_TOL {
                if self.upper[b].is_infinite() {
                    continue;
                }
                ((self.upper[b] - self.xb[i]).max(0.0) / -g, false)
            } else {
                continue;
            };
            let replace = if ratio < t_limit - 1e-12 {
                true
            } else if ratio > t_limit + 1e-12 {
                false
            } else if let Some((r, _)) = leaving {
                if bland {
                    b < self.basis[r]
                } else {
                    alpha[i].abs() > best_pivot
                }
            } else {
                // Tie against the entering variable's own bound-flip limit:
                // prefer the basis exchange for a well-conditioned pivot.
                alpha[i].abs() > PIVOT_TOL
            };
            if replace {
                t_limit = ratio.min(t_limit);
                leaving = Some((i, at_lower));
                best_pivot = alpha[i].abs();
            }
        }

        if t_limit.is_infinite() {
            return StepOutcome::Unbounded;
        }

        match leaving {
            None => {
                // Bound flip: no basis change.
                for i in 0..self.n_rows {
                    self.xb[i] -= t_limit * sigma * alpha[i];
                }
                self.state[entering] = match self.state[entering] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    VarState::Basic => unreachable!(),
                };
                if t_limit < DEGENERATE_STEP {
                    self.degenerate_run += 1;
                } else {
                    self.degenerate_run = 0;
                }
            }
            Some((r, at_lower)) => {
                let entering_start = self.nonbasic_value(entering);
                for i in 0..self.n_rows {
                    self.xb[i] -= t_limit * sigma * alpha[i];
                }
                let old = self.basis[r];
                self.state[old] = if at_lower {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                self.basis[r] = entering;
                self.state[entering] = VarState::Basic;
                self.xb[r] = entering_start + sigma * t_limit;

                // Product-form update of the basis inverse.
                let m = self.n_rows;
                let pivot = alpha[r];
                for k in 0..m {
                    self.binv[r * m + k] /= pivot;
                }
                for i in 0..m {
                    if i != r {
                        let f = alpha[i];
                        if f != 0.0 {
                            for k in 0..m {
                                self.binv[i * m + k] -= f * self.binv[r * m + k];
                            }
                        }
                    }
                }
                self.pivots_since_refactor += 1;
                if t_limit < DEGENERATE_STEP {
                    self.degenerate_run += 1;
                } else {
                    self.degenerate_run = 0;
                }
                if self.pivots_since_refactor >= REFACTOR_EVERY {
                    self.refactor();
                }
            }
        }
        StepOutcome::Pivoted
    }

    fn run(&mut self) -> StepOutcome {
        let limit = 50_000 + 200 * (self.n_cols + self.n_rows);
        loop {
            self.iterations += 1;
            assert!(
                self.iterations < limit,
                "simplex iteration limit exceeded ({limit})"
            );
            match self.step() {
                StepOutcome::Pivoted => continue,
                outcome => return outcome,
            }
        }
    }

    fn primal(&self, n_struct: usize) -> Vec<f64> {
        let mut x = vec![0.0; n_struct];
        for (j, slot) in x.iter_mut().enumerate() {
            *slot = match self.state[j] {
                VarState::AtLower => self.lower[j],
                VarState::AtUpper => self.upper[j],
                VarState::Basic => {
                    let r = self.basis.iter().position(|&b| b == j).unwrap();
                    self.xb[r]
                }
            };
        }
        x
    }
}

/// Solves `lp` to a basic optimal solution, reporting infeasibility or
/// unboundedness as a status rather than an error.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.objective.len();
    debug_assert!(lp.rows.iter().all(|r| r.coeffs.len() == n));
    debug_assert!((0..n).all(|j| lp.lower[j] <= lp.upper[j]));

    if lp.rows.is_empty() {
        let mut x = vec![0.0; n];
        for j in 0..n {
            x[j] = if lp.objective[j] > 0.0 {
                if lp.upper[j].is_infinite() {
                    return LpSolution {
                        status: LpStatus::Unbounded,
                        primal: Vec::new(),
                        objective: f64::NAN,
                        duals: Vec::new(),
                        iterations: 0,
                    };
                }
                lp.upper[j]
            } else {
                lp.lower[j]
            };
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        return LpSolution {
            status: LpStatus::Optimal,
            primal: x,
            objective,
            duals: Vec::new(),
            iterations: 0,
        };
    }

    let mut tab = Tableau::new(lp);

    if tab.n_artificial > 0 {
        tab.obj = vec![0.0; tab.n_cols];
        for j in tab.n_cols - tab.n_artificial..tab.n_cols {
            tab.obj[j] = -1.0;
        }
        match tab.run() {
            StepOutcome::Unbounded => unreachable!("phase-1 objective is bounded"),
            StepOutcome::Optimal => {}
            StepOutcome::Pivoted => unreachable!(),
        }
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| tab.is_artificial(b))
            .map(|(r, _)| tab.xb[r])
            .sum();
        if infeasibility > 1e-7 {
            return LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                objective: f64::NAN,
                duals: Vec::new(),
                iterations: tab.iterations,
            };
        }
        // Drive leftover degenerate artificials out of the basis where a
        // usable pivot exists; pin the rest so they can never re-enter.
        for r in 0..tab.n_rows {
            if !tab.is_artificial(tab.basis[r]) {
                continue;
            }
            let replacement = (0..tab.n_cols - tab.n_artificial).find(|&j| {
                tab.state[j] != VarState::Basic && tab.ftran(j)[r].abs() > PIVOT_TOL
            });
            if let Some(j) = replacement {
                let alpha = tab.ftran(j);
                let old = tab.basis[r];
                tab.state[old] = VarState::AtLower;
                tab.basis[r] = j;
                tab.state[j] = VarState::Basic;
                let m = tab.n_rows;
                let pivot = alpha[r];
                for k in 0..m {
                    tab.binv[r * m + k] /= pivot;
                }
                for i in 0..m {
                    if i != r {
                        let f = alpha[i];
                        if f != 0.0 {
                            for k in 0..m {
                                tab.binv[i * m + k] -= f * tab.binv[r * m + k];
                            }
                        }
                    }
                }
                tab.refactor();
            }
        }
        for j in tab.n_cols - tab.n_artificial..tab.n_cols {
            tab.upper[j] = 0.0;
            if tab.state[j] == VarState::AtUpper {
                tab.state[j] = VarState::AtLower;
            }
        }
        tab.refactor();
    }

    tab.obj = vec![0.0; tab.n_cols];
    tab.obj[..n].copy_from_slice(&lp.objective);
    tab.degenerate_run = 0;
    let outcome = tab.run();
    if matches!(outcome, StepOutcome::Unbounded) {
        return LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            objective: f64::NAN,
            duals: Vec::new(),
            iterations: tab.iterations,
        };
    }

    // Tighten residual error in the reported solution.
    tab.refactor();
    let primal = tab.primal(n);
    let objective = lp
        .objective
        .iter()
        .zip(&primal)
        .map(|(c, v)| c * v)
        .sum();
    let duals = tab.duals();
    LpSolution {
        status: LpStatus::Optimal,
        primal,
        objective,
        duals,
        iterations: tab.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LinearProgram, LpRow};
    use super::*;

    fn simple_lp(obj: Vec<f64>, rows: Vec<(Vec<f64>, f64)>, bounds: Vec<(f64, f64)>) -> LinearProgram {
        let n = obj.len();
        LinearProgram {
            objective: obj,
            constant: 0.0,
            rows: rows
                .into_iter()
                .map(|(coeffs, rhs)| LpRow { coeffs, rhs })
                .collect(),
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            var_tags: vec![super::super::VarTag::Free; n],
            row_meta: Vec::new(),
        }
    }

    #[test]
    fn single_variable_cap() {
        let lp = simple_lp(vec![1.0], vec![(vec![1.0], 3.0)], vec![(0.0, 10.0)]);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.primal[0] - 3.0).abs() < 1e-9);
        // Dual of the binding row must carry the full objective gradient.
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_rows_terminate() {
        let rows = vec![
            (vec![1.0, 1.0], 1.0),
            (vec![1.0, 1.0], 1.0),
            (vec![1.0, 1.0], 1.0),
            (vec![2.0, 2.0], 2.0),
        ];
        let lp = simple_lp(vec![1.0, 0.5], rows, vec![(0.0, 1.0), (0.0, 1.0)]);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_is_reported() {
        // x >= 2 (encoded as -x <= -2) with x <= 1.
        let lp = simple_lp(vec![1.0], vec![(vec![-1.0], -2.0)], vec![(0.0, 1.0)]);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_reported() {
        let lp = simple_lp(
            vec![1.0, 0.0],
            vec![(vec![0.0, 1.0], 5.0)],
            vec![(0.0, f64::INFINITY), (0.0, 1.0)],
        );
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn negative_rhs_uses_phase_one() {
        // -x1 - x2 <= -1.5, maximize -x1 - 2 x2: best is x1 = 1, x2 = 0.5.
        let lp = simple_lp(
            vec![-1.0, -2.0],
            vec![(vec![-1.0, -1.0], -1.5)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - (-2.0)).abs() < 1e-9, "{}", sol.objective);
        assert!((sol.primal[0] - 1.0).abs() < 1e-9);
        assert!((sol.primal[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn upper_bounds_flip_without_pivoting() {
        // Optimum pushes both variables to their upper bounds.
        let lp = simple_lp(
            vec![1.0, 1.0],
            vec![(vec![1.0, 1.0], 10.0)],
            vec![(0.0, 2.0), (0.0, 3.0)],
        );
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 5.0).abs() < 1e-9);
    }
}
