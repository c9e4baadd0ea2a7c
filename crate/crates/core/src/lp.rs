//! Minimal dense linear-program layer: build, solve, extract.
//!
//! All LPs in this crate are small and dense, so the solver is a two-phase
//! tableau simplex. Dantzig pricing is used until the objective stalls,
//! then Bland's rule takes over for guaranteed termination.

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// A linear program in maximization form over nonnegative-by-default
/// variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub names: Vec<String>,
    /// Objective coefficients; sense is always maximize.
    pub objective: Vec<f64>,
    pub constraints: Vec<(Vec<f64>, Relation, f64)>,
    /// Per-variable lower bounds, default 0.
    pub lower: Vec<f64>,
    /// Optional per-variable upper bounds.
    pub upper: Vec<Option<f64>>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            names: (0..num_vars).map(|i| format!("x{i}")).collect(),
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push((coeffs, rel, rhs));
    }

    fn is_well_formed(&self) -> bool {
        self.objective.len() == self.num_vars
            && self.lower.len() == self.num_vars
            && self.upper.len() == self.num_vars
            && self.objective.iter().all(|v| v.is_finite())
            && self.lower.iter().all(|v| v.is_finite())
            && self.constraints.iter().all(|(row, _, b)| {
                row.len() == self.num_vars
                    && b.is_finite()
                    && row.iter().all(|v| v.is_finite())
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver gave up (iteration cap or loss of numerical control);
    /// never reported as a silent wrong answer.
    Numerical,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: Vec<f64>,
    /// Max violation of the original constraints and bounds at `assignment`.
    pub residual: f64,
}

impl LpSolution {
    fn failed(status: LpStatus) -> Self {
        LpSolution { status, value: f64::NAN, assignment: Vec::new(), residual: f64::NAN }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

/// Solves a linear program. Optimal assignments satisfy all constraints
/// within `1e-7`; numerical failure is reported as a distinct status.
pub fn solve_lp(prob: &LpProblem) -> LpSolution {
    if !prob.is_well_formed() {
        return LpSolution::failed(LpStatus::Numerical);
    }
    // Shift lower bounds to zero and turn upper bounds into rows.
    let n = prob.num_vars;
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(
        prob.constraints.len() + prob.upper.iter().filter(|u| u.is_some()).count(),
    );
    for (coef, rel, rhs) in &prob.constraints {
        let shift: f64 = coef.iter().zip(&prob.lower).map(|(a, l)| a * l).sum();
        rows.push((coef.clone(), *rel, rhs - shift));
    }
    for (j, upper) in prob.upper.iter().enumerate() {
        if let Some(u) = upper {
            let mut coef = vec![0.0; n];
            coef[j] = 1.0;
            rows.push((coef, Relation::Le, u - prob.lower[j]));
        }
    }

    let mut tab = Tableau::build(n, &rows);
    match tab.phase1() {
        PhaseOutcome::Proceed => {}
        PhaseOutcome::Infeasible => return LpSolution::failed(LpStatus::Infeasible),
        PhaseOutcome::Numerical => return LpSolution::failed(LpStatus::Numerical),
    }
    let status = match tab.phase2(&prob.objective) {
        Phase2Outcome::Optimal => LpStatus::Optimal,
        Phase2Outcome::Unbounded => return LpSolution::failed(LpStatus::Unbounded),
        Phase2Outcome::Numerical => return LpSolution::failed(LpStatus::Numerical),
    };

    let mut assignment = tab.extract(n);
    for (x, l) in assignment.iter_mut().zip(&prob.lower) {
        *x += l;
    }
    let value: f64 = prob.objective.iter().zip(&assignment).map(|(c, x)| c * x).sum();
    let residual = residual(prob, &assignment);
    if !residual.is_finite() || residual > FEAS_TOL {
        return LpSolution::failed(LpStatus::Numerical);
    }
    LpSolution { status, value, assignment, residual }
}

/// Max violation of `prob`'s constraints and bounds at `x`.
pub fn residual(prob: &LpProblem, x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (coef, rel, rhs) in &prob.constraints {
        let lhs: f64 = coef.iter().zip(x).map(|(a, v)| a * v).sum();
        let v = match rel {
            Relation::Le => lhs - rhs,
            Relation::Ge => rhs - lhs,
            Relation::Eq => (lhs - rhs).abs(),
        };
        worst = worst.max(v);
    }
    for j in 0..prob.num_vars {
        worst = worst.max(prob.lower[j] - x[j]);
        if let Some(u) = prob.upper[j] {
            worst = worst.max(x[j] - u);
        }
    }
    worst
}

enum PhaseOutcome {
    Proceed,
    Infeasible,
    Numerical,
}

enum Phase2Outcome {
    Optimal,
    Unbounded,
    Numerical,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    IterationCap,
}

struct Tableau {
    /// rows[i] has `width` entries; the last is the RHS.
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    num_structural: usize,
    first_artificial: usize,
    width: usize,
    /// Columns barred from entering (artificials after phase 1).
    banned: Vec<bool>,
}

impl Tableau {
    fn build(n: usize, rows_in: &[(Vec<f64>, Relation, f64)]) -> Tableau {
        let m = rows_in.len();
        let num_slack = rows_in
            .iter()
            .filter(|(_, rel, _)| matches!(rel, Relation::Le | Relation::Ge))
            .count();
        // One artificial per row keeps the initial basis trivially feasible;
        // slack columns double as initial basis for Le rows with rhs >= 0.
        let mut num_artificial = 0;
        for (_, rel, rhs) in rows_in {
            let needs_flip = *rhs < 0.0;
            match (rel, needs_flip) {
                (Relation::Le, false) => {}
                _ => num_artificial += 1,
            }
        }
        let first_artificial = n + num_slack;
        let width = n + num_slack + num_artificial + 1;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack_idx = n;
        let mut art_idx = first_artificial;
        for (coef, rel, rhs) in rows_in {
            let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for (j, &a) in coef.iter().enumerate() {
                row[j] = flip * a;
            }
            row[width - 1] = flip * rhs;
            let rel_eff = match (rel, flip < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            };
            match rel_eff {
                Relation::Le => {
                    row[slack_idx] = 1.0;
                    if flip < 0.0 {
                        // Slack basic would be negative; use an artificial.
                        let a = art_idx;
                        art_idx += 1;
                        row[a] = 1.0;
                        basis.push(a);
                    } else {
                        basis.push(slack_idx);
                    }
                    slack_idx += 1;
                }
                Relation::Ge => {
                    row[slack_idx] = -1.0;
                    slack_idx += 1;
                    let a = art_idx;
                    art_idx += 1;
                    row[a] = 1.0;
                    basis.push(a);
                }
                Relation::Eq => {
                    let a = art_idx;
                    art_idx += 1;
                    row[a] = 1.0;
                    basis.push(a);
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            cost: vec![0.0; width],
            basis,
            num_structural: n,
            first_artificial,
            width,
            banned: vec![false; width - 1],
        }
    }

    fn set_cost(&mut self, structural: &[f64], artificial_cost: f64) {
        self.cost = vec![0.0; self.width];
        self.cost[..structural.len()].copy_from_slice(structural);
        for j in self.first_artificial..self.width - 1 {
            self.cost[j] = artificial_cost;
        }
        // Price out the current basis.
        let snapshot: Vec<(usize, f64)> = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, &b)| (i, self.cost[b]))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        for (i, c) in snapshot {
            let row = self.rows[i].clone();
            for (dst, src) in self.cost.iter_mut().zip(&row) {
                *dst -= c * src;
            }
        }
    }

    fn objective(&self) -> f64 {
        -self.cost[self.width - 1]
    }

    fn phase1(&mut self) -> PhaseOutcome {
        if self.first_artificial == self.width - 1 {
            return PhaseOutcome::Proceed; // no artificials
        }
        self.set_cost(&vec![0.0; self.num_structural], -1.0);
        match self.run() {
            StepOutcome::Optimal => {}
            // Phase-1 objective is bounded above by zero, so an unbounded
            // report here means numerical trouble.
            StepOutcome::Unbounded | StepOutcome::IterationCap => {
                return PhaseOutcome::Numerical
            }
        }
        if self.objective() < -1e-7 {
            return PhaseOutcome::Infeasible;
        }
        for j in self.first_artificial..self.width - 1 {
            self.banned[j] = true;
        }
        self.drive_out_artificials();
        PhaseOutcome::Proceed
    }

    /// Pivots basic artificials (at level ~0) onto structural or slack
    /// columns; rows that admit no pivot are redundant and deleted.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_artificial {
                i += 1;
                continue;
            }
            let pivot_col = (0..self.first_artificial)
                .find(|&j| self.rows[i][j].abs() > PIVOT_TOL);
            match pivot_col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.swap_remove(i);
                    self.basis.swap_remove(i);
                }
            }
        }
    }

    fn phase2(&mut self, objective: &[f64]) -> Phase2Outcome {
        self.set_cost(objective, 0.0);
        match self.run() {
            StepOutcome::Optimal => Phase2Outcome::Optimal,
            StepOutcome::Unbounded => Phase2Outcome::Unbounded,
            StepOutcome::IterationCap => Phase2Outcome::Numerical,
        }
    }

    fn run(&mut self) -> StepOutcome {
        let m = self.rows.len();
        let cap = 200 * (m + self.width) + 20_000;
        let stall_limit = 4 * (m + 2);
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = self.objective();
        for _ in 0..cap {
            let entering = if bland {
                (0..self.width - 1)
                    .find(|&j| !self.banned[j] && self.cost[j] > COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.width - 1 {
                    if self.banned[j] || self.cost[j] <= COST_TOL {
                        continue;
                    }
                    if best.map_or(true, |(_, c)| self.cost[j] > c) {
                        best = Some((j, self.cost[j]));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(j) = entering else {
                return StepOutcome::Optimal;
            };
            // Ratio test; ties go to the smallest basic index (Bland).
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[j];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = (row[self.width - 1] / a).max(0.0);
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12
                            || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((i, _)) = leave else {
                return StepOutcome::Unbounded;
            };
            self.pivot(i, j);
            let obj = self.objective();
            if obj > last_obj + 1e-12 {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            }
        }
        StepOutcome::IterationCap
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let piv = self.rows[i][j];
        let inv = 1.0 / piv;
        for v in self.rows[i].iter_mut() {
            *v *= inv;
        }
        self.rows[i][j] = 1.0;
        let pivot_row = std::mem::take(&mut self.rows[i]);
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == i {
                continue;
            }
            let factor = row[j];
            if factor != 0.0 {
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst -= factor * src;
                }
                row[j] = 0.0;
            }
        }
        let factor = self.cost[j];
        if factor != 0.0 {
            for (dst, src) in self.cost.iter_mut().zip(&pivot_row) {
                *dst -= factor * src;
            }
            self.cost[j] = 0.0;
        }
        self.rows[i] = pivot_row;
        self.basis[i] = j;
    }

    fn extract(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rows[i][self.width - 1].max(0.0);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(prob: &LpProblem) -> LpSolution {
        let sol = solve_lp(prob);
        if sol.status == LpStatus::Optimal {
            assert!(sol.residual <= FEAS_TOL, "residual {}", sol.residual);
        }
        sol
    }

    #[test]
    fn single_variable_box() {
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.constrain(vec![1.0], Relation::Le, 3.0);
        let sol = solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn two_variable_budget() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 1.0];
        p.constrain(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_interval() {
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.constrain(vec![1.0], Relation::Ge, 2.0);
        p.constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 0.0];
        p.constrain(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // max x + 2y  s.t.  x + y = 1,  -x - y <= -0.2 (i.e. x + y >= 0.2)
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 2.0];
        p.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        p.constrain(vec![-1.0, -1.0], Relation::Le, -0.2);
        let sol = solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 2.0).abs() < 1e-9);
        assert!((sol.assignment[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn respects_bounds() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, -1.0];
        p.lower = vec![0.5, 0.25];
        p.upper = vec![Some(2.0), None];
        p.constrain(vec![1.0, 1.0], Relation::Le, 10.0);
        let sol = solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.assignment[0] - 2.0).abs() < 1e-9);
        assert!((sol.assignment[1] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_guard() {
        // Klee-Minty-ish degenerate system; mostly checks termination.
        let mut p = LpProblem::new(3);
        p.objective = vec![0.75, -150.0, 0.02];
        p.constrain(vec![0.25, -60.0, -0.04], Relation::Le, 0.0);
        p.constrain(vec![0.5, -90.0, -0.02], Relation::Le, 0.0);
        p.constrain(vec![0.0, 0.0, 1.0], Relation::Le, 1.0);
        let sol = solve(&p);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 0.05).abs() < 1e-7, "value {}", sol.value);
    }

    #[test]
    fn determinism() {
        let mut p = LpProblem::new(3);
        p.objective = vec![1.0, 2.0, 3.0];
        p.constrain(vec![1.0, 1.0, 1.0], Relation::Le, 2.0);
        p.constrain(vec![0.0, 1.0, 2.0], Relation::Le, 3.0);
        let a = solve(&p).value;
        for _ in 0..5 {
            assert_eq!(a, solve(&p).value);
        }
    }

    /// Duality check: for feasible bounded problems, the hand-built dual
    /// must reach the same optimum.
    #[test]
    fn duality_gap_on_random_problems() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut checked = 0;
        for seed in 0..60u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=4);
            let mut p = LpProblem::new(n);
            p.objective = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..m {
                let row: Vec<f64> =
                    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                p.constrain(row, Relation::Le, rng.random_range(0.1..2.0));
            }
            // Box keeps it bounded; rhs >= 0 keeps x = 0 feasible.
            p.constrain(vec![1.0; n], Relation::Le, 10.0);
            let primal = solve_lp(&p);
            assert_eq!(primal.status, LpStatus::Optimal);

            // Dual: min b'y s.t. A'y >= c, y >= 0, solved as max -b'y.
            let rows = &p.constraints;
            let md = rows.len();
            let mut d = LpProblem::new(md);
            d.objective = rows.iter().map(|(_, _, b)| -b).collect();
            for j in 0..n {
                let col: Vec<f64> = rows.iter().map(|(a, _, _)| a[j]).collect();
                d.constrain(col, Relation::Ge, p.objective[j]);
            }
            let dual = solve_lp(&d);
            assert_eq!(dual.status, LpStatus::Optimal);
            assert!(
                (primal.value + dual.value).abs() <= 1e-7 * (1.0 + primal.value.abs()),
                "seed {seed}: primal {} dual {}",
                primal.value,
                -dual.value
            );
            checked += 1;
        }
        assert_eq!(checked, 60);
    }
}
