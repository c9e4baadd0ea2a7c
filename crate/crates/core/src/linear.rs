//! Grid-based approximation schemes for explicit linear contracts: a single
//! share parameter, or a menu of share parameters indexed by signal.

use crate::error::{Error, Result};
use crate::model::{check_ic, principal_utility, Instance, Mechanism, PaymentScheme, SignalingScheme};
use crate::persuasion::{solve_grouped, SignalSpec};
use crate::report::{Diagnostics, SolveReport};
use rayon::prelude::*;

/// Share-parameter grid `{0, ε, 2ε, …} ∪ {1}` clipped to `[0,1]`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub epsilon: f64,
    pub points: Vec<f64>,
}

impl Grid {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::pre(format!("grid step must be positive, got {epsilon}")));
        }
        let mut points = Vec::new();
        let mut k = 0u64;
        loop {
            let x = k as f64 * epsilon;
            if x >= 1.0 {
                break;
            }
            points.push(x);
            k += 1;
        }
        points.push(1.0);
        points.dedup();
        Ok(Grid { epsilon, points })
    }
}

/// Direct signals, one per action, all paying `α·r`.
fn linear_specs(inst: &Instance, alpha: f64) -> Vec<SignalSpec> {
    let payment: Vec<f64> = inst.rewards.iter().map(|&r| alpha * r).collect();
    (0..inst.num_actions())
        .map(|a| SignalSpec { action: a, payment: payment.clone() })
        .collect()
}

fn direct_signal_ids(inst: &Instance) -> Vec<String> {
    inst.action_ids.iter().map(|a| format!("rec_{a}")).collect()
}

/// Optimal direct signaling scheme for a fixed linear contract `α`.
///
/// Always feasible: recommending the opt-out action everywhere satisfies
/// every IC row. Returns the scheme and the LP optimum.
pub fn solve_signaling_for_fixed_linear(
    inst: &Instance,
    alpha: f64,
) -> Result<(SignalingScheme, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::pre(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let sol = solve_grouped(inst, &linear_specs(inst, alpha))?;
    Ok((SignalingScheme::new(direct_signal_ids(inst), sol.pi), sol.value))
}

/// Grid search over single linear contracts: for every `α` in the grid,
/// solve the fixed-contract scheme LP and keep the best.
///
/// The returned utility is within `ε·max(1, bound_c)` of the optimal single
/// linear contract mechanism.
pub fn solve_single_linear(inst: &Instance, epsilon: f64) -> Result<SolveReport> {
    let grid = Grid::new(epsilon)?;
    let values: Vec<f64> = grid
        .points
        .par_iter()
        .map(|&alpha| solve_grouped(inst, &linear_specs(inst, alpha)).map(|s| s.value))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let alpha = grid.points[best];
    let (scheme, lp_value) = solve_signaling_for_fixed_linear(inst, alpha)?;
    let n = inst.num_actions();
    let mech = Mechanism::new(
        scheme,
        PaymentScheme::LinearSingle { alpha },
        Some((0..n).collect()),
    )?;
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(lp_value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("epsilon", epsilon);
    diagnostics.push_param("alpha", alpha);
    diagnostics.push_param("grid_size", grid.points.len() as f64);
    diagnostics.grid_values = grid.points.iter().copied().zip(values).collect();
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}

/// One LP over the signal family `{s_{α,i} : α in the grid, i an action}`
/// with the share fixed per signal, approximating the optimal menu of
/// linear contracts within `ε·max(1, bound_c)`.
pub fn solve_menu_linear(inst: &Instance, epsilon: f64) -> Result<SolveReport> {
    let grid = Grid::new(epsilon)?;
    let n = inst.num_actions();
    let mut specs = Vec::with_capacity(grid.points.len() * n);
    let mut alphas = Vec::with_capacity(specs.capacity());
    let mut ids = Vec::with_capacity(specs.capacity());
    for &alpha in &grid.points {
        let payment: Vec<f64> = inst.rewards.iter().map(|&r| alpha * r).collect();
        for a in 0..n {
            specs.push(SignalSpec { action: a, payment: payment.clone() });
            alphas.push(alpha);
            ids.push(format!("s_{alpha:.6}_{}", inst.action_ids[a]));
        }
    }
    let sol = solve_grouped(inst, &specs)?;
    let mech = Mechanism::new(
        SignalingScheme::new(ids, sol.pi),
        PaymentScheme::LinearMenu { alpha: alphas },
        Some((0..specs.len()).map(|k| k % n).collect()),
    )?;
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(sol.value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("epsilon", epsilon);
    diagnostics.push_param("num_signals", specs.len() as f64);
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}
