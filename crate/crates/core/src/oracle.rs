//! Ground-truth baselines: brute-force lattice search over explicit
//! contracts (single and menu), per-posterior optimal contracts, the
//! K-uniform belief solver, and a Monte Carlo simulator.
//!
//! The oracles are correct-by-construction references, not performant
//! solvers; every lattice point is priced by a small LP.

use crate::amb::eps_to_ic;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Relation};
use crate::model::{
    check_ic, principal_utility, Instance, Mechanism, PaymentScheme, SignalingScheme,
};
use crate::persuasion::{solve_grouped, solve_grouped_streaming, SignalSpec};
use crate::report::{Diagnostics, SolveReport};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Additive payment lattice `{0, g, 2g, …}` per outcome, capped per outcome
/// by `min(B, 2 / max_i Σ_θ μ(θ) F^θ_{i,ω})`; the cap endpoint is included.
/// Outcomes that no action can produce get the single value 0.
#[derive(Debug, Clone)]
pub struct ContractGrid {
    pub step: f64,
    pub bound: f64,
    /// Enumeration refusal threshold on the lattice size.
    pub budget: u128,
}

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

impl ContractGrid {
    pub fn new(step: f64, bound: f64) -> Result<Self> {
        if !(step > 0.0) || !(bound > 0.0) {
            return Err(Error::pre(format!(
                "grid step and bound must be positive, got step {step} bound {bound}"
            )));
        }
        Ok(ContractGrid { step, bound, budget: DEFAULT_ENUMERATION_BUDGET })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Per-outcome cap from the restriction argument: payments above
    /// `2 / max_i Σ_θ μ(θ) F^θ_{i,ω}` make the expected payment exceed the
    /// normalized reward scale and are never optimal. The constant 2 assumes
    /// rewards and costs in [0,1]; it is scaled by max(1, bound_c) for
    /// unnormalized data.
    pub fn outcome_caps(&self, inst: &Instance) -> Vec<f64> {
        let scale = inst.bound_c.max(1.0);
        let t = inst.num_states();
        let n = inst.num_actions();
        let m = inst.num_outcomes();
        let mut col_max = vec![0.0_f64; m];
        let mut col = vec![0.0_f64; m];
        for a in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            for th in 0..t {
                let mu = inst.prior[th];
                if mu == 0.0 {
                    continue;
                }
                for (w, f) in inst.matrices[th].row(a) {
                    col[w] += mu * f;
                }
            }
            for (mx, &v) in col_max.iter_mut().zip(&col) {
                *mx = mx.max(v);
            }
        }
        col_max
            .iter()
            .map(|&mx| if mx > 0.0 { self.bound.min(2.0 * scale / mx) } else { 0.0 })
            .collect()
    }

    fn axis_values(&self, cap: f64) -> Vec<f64> {
        let mut vals = Vec::new();
        let mut k = 0u64;
        loop {
            let x = k as f64 * self.step;
            if x > cap {
                break;
            }
            vals.push(x);
            k += 1;
        }
        if vals.is_empty() || *vals.last().unwrap() < cap {
            vals.push(cap);
        }
        vals
    }

    /// Per-outcome value lists and the total lattice size.
    pub fn lattice(&self, inst: &Instance) -> (Vec<Vec<f64>>, u128) {
        let axes: Vec<Vec<f64>> = self
            .outcome_caps(inst)
            .iter()
            .map(|&cap| self.axis_values(cap))
            .collect();
        let count = axes
            .iter()
            .fold(1u128, |acc, ax| acc.saturating_mul(ax.len() as u128));
        (axes, count)
    }
}

fn contract_at(axes: &[Vec<f64>], mut idx: u128) -> Vec<f64> {
    let mut p = vec![0.0; axes.len()];
    for (w, ax) in axes.iter().enumerate().rev() {
        let len = ax.len() as u128;
        p[w] = ax[(idx % len) as usize];
        idx /= len;
    }
    p
}

/// Cheapest contract incentivizing each action at the unnormalized posterior
/// `mass`, keeping the best action by principal value (ties by lower index).
///
/// For each candidate action the LP minimizes the expected payment subject
/// to the action's IC rows, `p ≥ 0`, and optionally `p ≤ B`. Always succeeds
/// with value ≥ 0: the zero contract incentivizes a zero-cost action.
pub fn optimal_contract_for_posterior(
    inst: &Instance,
    mass: &[f64],
    bound: Option<f64>,
) -> Result<(Vec<f64>, usize, f64)> {
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::pre("posterior mass must be positive"));
    }
    let t = inst.num_states();
    let n = inst.num_actions();
    let m = inst.num_outcomes();
    if mass.len() != t {
        return Err(Error::Dimension("posterior mass length".into()));
    }
    // Expected row of each action under the mass: rows[a][w] = Σ_θ x_θ F^θ_a.
    let mut rows = vec![vec![0.0; m]; n];
    for (th, &x) in mass.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (a, row) in rows.iter_mut().enumerate() {
            for (w, f) in inst.matrices[th].row(a) {
                row[w] += x * f;
            }
        }
    }
    let reward: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().zip(&inst.rewards).map(|(f, r)| f * r).sum())
        .collect();

    let mut best: Option<(Vec<f64>, usize, f64)> = None;
    for a in 0..n {
        let mut prob = LpProblem::new(m);
        for w in 0..m {
            prob.objective[w] = -rows[a][w]; // minimize expected payment
            prob.upper[w] = bound;
        }
        for j in 0..n {
            if j == a {
                continue;
            }
            let coefs: Vec<f64> = (0..m).map(|w| rows[a][w] - rows[j][w]).collect();
            prob.constrain(coefs, Relation::Ge, (inst.costs[a] - inst.costs[j]) * total);
        }
        let sol = solve_lp(&prob);
        if sol.status != LpStatus::Optimal {
            continue; // action not incentivizable under the bound
        }
        let value = reward[a] + sol.value; // sol.value = -min payment
        if best.as_ref().map_or(true, |(_, _, bv)| value > *bv) {
            best = Some((sol.assignment, a, value));
        }
    }
    best.ok_or_else(|| Error::InvalidInstance("no incentivizable action".into()))
}

fn single_contract_specs(inst: &Instance, p: &[f64]) -> Vec<SignalSpec> {
    (0..inst.num_actions())
        .map(|a| SignalSpec { action: a, payment: p.to_vec() })
        .collect()
}

fn direct_ids(inst: &Instance) -> Vec<String> {
    inst.action_ids.iter().map(|a| format!("rec_{a}")).collect()
}

/// Quick upper bound on the direct-scheme LP value for a fixed contract:
/// every state plays its pointwise best action.
fn pointwise_bound(inst: &Instance, p: &[f64]) -> f64 {
    let mut total = 0.0;
    for th in 0..inst.num_states() {
        let mu = inst.prior[th];
        if mu == 0.0 {
            continue;
        }
        let best = (0..inst.num_actions())
            .map(|a| inst.expected_reward(th, a) - inst.expect(th, a, p))
            .fold(f64::NEG_INFINITY, f64::max);
        total += mu * best.max(0.0);
    }
    total
}

/// Brute force over single explicit contracts: for every lattice contract,
/// solve the direct signaling LP and keep the best.
pub fn oracle_single(inst: &Instance, grid: &ContractGrid) -> Result<SolveReport> {
    let (axes, count) = grid.lattice(inst);
    if count > grid.budget {
        return Err(Error::BudgetExceeded { got: count, budget: grid.budget });
    }
    let chunk = 4096u128;
    let chunks: Vec<u128> = (0..count.div_ceil(chunk)).collect();
    // Two-pass pruning: a cheap pointwise bound skips contracts that cannot
    // beat the best value found so far within the chunk.
    let best = chunks
        .par_iter()
        .map(|&c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(count);
            let mut local: Option<(f64, u128)> = None;
            for idx in lo..hi {
                let p = contract_at(&axes, idx);
                if let Some((bv, _)) = local {
                    if pointwise_bound(inst, &p) < bv - 1e-12 {
                        continue;
                    }
                }
                let Ok(sol) = solve_grouped(inst, &single_contract_specs(inst, &p)) else {
                    continue;
                };
                if local.map_or(true, |(bv, _)| sol.value > bv) {
                    local = Some((sol.value, idx));
                }
            }
            local
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some((av, ai)), Some((bv, bi))) => {
                    if bv > av || (bv == av && bi < ai) {
                        Some((bv, bi))
                    } else {
                        Some((av, ai))
                    }
                }
            },
        );
    let (value, idx) = best.ok_or_else(|| Error::InvalidInstance("empty lattice".into()))?;
    let p = contract_at(&axes, idx);
    let sol = solve_grouped(inst, &single_contract_specs(inst, &p))?;
    let n = inst.num_actions();
    let mech = Mechanism::new(
        SignalingScheme::new(direct_ids(inst), sol.pi),
        PaymentScheme::Single { p },
        Some((0..n).collect()),
    )?;
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("lattice_points", count as f64);
    diagnostics.push_param("grid_step", grid.step);
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}

/// Brute force over menus of lattice contracts: one signal per
/// (contract, action) pair, solved as a single scheme-design LP.
///
/// Signals that end up unused are pruned from the returned mechanism; the
/// LP value counts them at mass zero, so nothing is lost.
pub fn oracle_menu(inst: &Instance, grid: &ContractGrid) -> Result<SolveReport> {
    let (axes, count) = grid.lattice(inst);
    let n = inst.num_actions() as u128;
    let num_signals = count.saturating_mul(n);
    if num_signals > grid.budget {
        return Err(Error::BudgetExceeded { got: num_signals, budget: grid.budget });
    }
    let opt_out = inst
        .costs
        .iter()
        .position(|&c| c == 0.0)
        .ok_or_else(|| Error::InvalidInstance("no zero-cost opt-out action".into()))?;
    let nn = inst.num_actions();
    let spec_of = |k: usize| -> SignalSpec {
        let p = contract_at(&axes, (k / nn) as u128);
        SignalSpec { action: k % nn, payment: p }
    };

    let (value, pi) = if num_signals <= 3000 {
        let specs: Vec<SignalSpec> = (0..num_signals as usize).map(spec_of).collect();
        let sol = solve_grouped(inst, &specs)?;
        (sol.value, sol.pi)
    } else {
        let sol = solve_grouped_streaming(inst, num_signals as usize, opt_out, &spec_of)?;
        (sol.value, sol.pi)
    };

    // Keep only signals that carry mass.
    let t = inst.num_states();
    let active: Vec<usize> = (0..num_signals as usize)
        .filter(|&k| (0..t).any(|th| pi[th][k] > 0.0))
        .collect();
    let mut ids = Vec::with_capacity(active.len());
    let mut payments = Vec::with_capacity(active.len());
    let mut recs = Vec::with_capacity(active.len());
    for &k in &active {
        let spec = spec_of(k);
        ids.push(format!("s_p{}_{}", k / nn, inst.action_ids[spec.action]));
        payments.push(spec.payment);
        recs.push(spec.action);
    }
    let scheme_pi: Vec<Vec<f64>> = (0..t)
        .map(|th| active.iter().map(|&k| pi[th][k]).collect())
        .collect();
    let mech = Mechanism::new(
        SignalingScheme::new(ids, scheme_pi),
        PaymentScheme::Menu { p: payments },
        Some(recs),
    )?;
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("lattice_points", count as f64);
    diagnostics.push_param("signals_considered", num_signals as f64);
    diagnostics.push_param("signals_active", active.len() as f64);
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}

/// Parameters for the K-uniform belief solver.
#[derive(Debug, Clone)]
pub struct KUniformParams {
    /// Number of basis vectors averaged per belief.
    pub k: usize,
    /// Payment bound B.
    pub bound: f64,
    /// Target gap ε; only used to report the paper-scale K in diagnostics.
    pub epsilon: f64,
    pub budget: u128,
}

impl KUniformParams {
    pub fn new(k: usize, bound: f64, epsilon: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::pre("K must be at least 1"));
        }
        if !(bound > 0.0) {
            return Err(Error::pre("payment bound must be positive"));
        }
        Ok(KUniformParams { k, bound, epsilon, budget: DEFAULT_ENUMERATION_BUDGET })
    }
}

fn multiset_count(t: usize, k: usize) -> u128 {
    // C(k + t - 1, k) with saturation.
    let mut num = 1u128;
    for i in 0..k {
        num = num.saturating_mul((t + i) as u128);
        num /= (i + 1) as u128;
    }
    num
}

fn kuniform_beliefs(t: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; t];
    fn rec(theta: usize, left: usize, t: usize, k: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if theta == t - 1 {
            counts[theta] = left;
            out.push(counts.iter().map(|&c| c as f64 / k as f64).collect());
            return;
        }
        for c in (0..=left).rev() {
            counts[theta] = c;
            rec(theta + 1, left - c, t, k, counts, out);
        }
    }
    rec(0, k, t, k, &mut counts, &mut out);
    out
}

/// Enumerates all K-uniform beliefs, prices each with its optimal bounded
/// contract, decomposes the prior over them by LP, and assembles the
/// resulting menu mechanism (converted to exactly IC if the measured slack
/// exceeds 1e-9).
pub fn solve_kuniform(inst: &Instance, params: &KUniformParams) -> Result<SolveReport> {
    let t = inst.num_states();
    let count = multiset_count(t, params.k);
    if count > params.budget {
        return Err(Error::BudgetExceeded { got: count, budget: params.budget });
    }
    let beliefs = kuniform_beliefs(t, params.k);
    debug_assert_eq!(beliefs.len() as u128, count);
    let priced: Vec<(Vec<f64>, usize, f64)> = beliefs
        .par_iter()
        .map(|q| optimal_contract_for_posterior(inst, q, Some(params.bound)))
        .collect::<Result<_>>()?;

    // Decomposition LP: max Σ_q γ_q u(q)  s.t.  Σ_q γ_q q = μ, γ ≥ 0.
    // Always feasible: the point masses are K-uniform for every K ≥ 1.
    let mut prob = LpProblem::new(beliefs.len());
    prob.objective = priced.iter().map(|(_, _, v)| *v).collect();
    for th in 0..t {
        let coefs: Vec<f64> = beliefs.iter().map(|q| q[th]).collect();
        prob.constrain(coefs, Relation::Eq, inst.prior[th]);
    }
    let sol = solve_lp(&prob);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }

    let mut ids = Vec::new();
    let mut pi: Vec<Vec<f64>> = vec![Vec::new(); t];
    let mut payments = Vec::new();
    let mut recs = Vec::new();
    for (i, &gamma) in sol.assignment.iter().enumerate() {
        if gamma <= 1e-12 {
            continue;
        }
        ids.push(format!("q{i}"));
        for th in 0..t {
            let mu = inst.prior[th];
            pi[th].push(if mu > 0.0 { gamma * beliefs[i][th] / mu } else { 0.0 });
        }
        payments.push(priced[i].0.clone());
        recs.push(priced[i].1);
    }
    for row in pi.iter_mut() {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|v| *v /= sum);
        } else if !row.is_empty() {
            row[0] = 1.0;
        }
    }
    let mech = Mechanism::new(
        SignalingScheme::new(ids, pi),
        PaymentScheme::Menu { p: payments },
        Some(recs),
    )?;

    let slack = check_ic(inst, &mech, 1e-9)?.max_violation.max(0.0);
    let mech = if slack > 1e-9 { eps_to_ic(inst, &mech, slack)? } else { mech };
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(sol.value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("K", params.k as f64);
    diagnostics.push_param("bound", params.bound);
    diagnostics.push_param("beliefs", beliefs.len() as f64);
    diagnostics.push_param("measured_slack", slack);
    // Paper-scale sample count for the requested gap, for reference.
    let n = inst.num_actions() as f64;
    let (b, eps) = (params.bound, params.epsilon);
    if eps > 0.0 {
        diagnostics.push_param(
            "paper_k_formula",
            (2.0 * n * b / eps).ln() / (2.0 * b * b * eps.powi(4)),
        );
    }
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}

/// Monte Carlo replay of the interaction timeline: sample a state from the
/// prior, a signal from the scheme, play the recommended action, sample an
/// outcome, and collect `r_ω − p_ω`. Returns (mean, standard error).
///
/// Samples are partitioned into fixed-size chunks with per-chunk derived
/// seeds, so the result is reproducible regardless of thread count.
pub fn simulate(
    inst: &Instance,
    mech: &Mechanism,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let recs = mech
        .recommendations
        .as_ref()
        .ok_or(Error::MissingRecommendations)?;
    if samples == 0 {
        return Err(Error::pre("need at least one sample"));
    }
    let t = inst.num_states();
    let k = mech.num_signals();

    let cum = |vals: &[f64]| -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(vals.len());
        for &v in vals {
            acc += v;
            out.push(acc);
        }
        out
    };
    let draw = |cdf: &[f64], u: f64| -> usize {
        let total = *cdf.last().unwrap();
        let x = u * total;
        cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
    };

    let prior_cdf = cum(&inst.prior);
    let signal_cdf: Vec<Vec<f64>> = mech.scheme.pi.iter().map(|row| cum(row)).collect();
    // Outcome CDFs and net principal payoffs per (state, signal).
    let mut outcome_cdf = vec![vec![Vec::new(); k]; t];
    let mut net = vec![vec![Vec::new(); k]; t];
    for th in 0..t {
        for s in 0..k {
            if mech.scheme.pi[th][s] == 0.0 {
                continue;
            }
            let a = recs[s];
            let p = mech.payments.payment(inst, s, th);
            let row: Vec<(usize, f64)> = inst.matrices[th].row(a).collect();
            outcome_cdf[th][s] = cum(&row.iter().map(|&(_, f)| f).collect::<Vec<_>>());
            net[th][s] = row
                .iter()
                .map(|&(w, _)| inst.rewards[w] - p[w])
                .collect();
        }
    }

    const CHUNK: u64 = 1 << 16;
    let num_chunks = samples.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..num_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add(c.wrapping_mul(0x9E3779B97F4A7C15)));
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in lo..hi {
                let th = draw(&prior_cdf, rng.random::<f64>());
                let s = draw(&signal_cdf[th], rng.random::<f64>());
                let w = draw(&outcome_cdf[th][s], rng.random::<f64>());
                let u = net[th][s][w];
                sum += u;
                sumsq += u * u;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let nf = samples as f64;
    let mean = sum / nf;
    let stderr = if samples > 1 {
        let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn prop4_point_mass_contracts() {
        let inst = gen::gen_prop4(0.1).unwrap();
        let (p, a, v) = optimal_contract_for_posterior(&inst, &[0.0, 1.0, 0.0], None).unwrap();
        assert_eq!(a, 1);
        assert!((p[0] - 50.0 / 7.0).abs() < 1e-7, "p = {p:?}");
        assert!(p[1].abs() < 1e-9);
        assert!((v - 16.0 / 7.0).abs() < 1e-7);

        let (p, a, v) = optimal_contract_for_posterior(&inst, &[0.0, 0.0, 1.0], None).unwrap();
        assert_eq!(a, 1);
        assert!((p[0] - 25.0 / 4.0).abs() < 1e-7);
        assert!((v - 15.0 / 4.0).abs() < 1e-7);

        let (p, a, v) = optimal_contract_for_posterior(&inst, &[1.0, 0.0, 0.0], None).unwrap();
        assert_eq!(a, 0);
        assert!(p.iter().all(|&x| x.abs() < 1e-9));
        assert!((v - 10.0).abs() < 1e-9);
    }

    #[test]
    fn opt_out_preferred_when_it_earns_the_most() {
        // Opt-out has the best reward row, so the zero contract is optimal.
        let inst = Instance::from_dense(
            vec![1.0],
            vec![0.0, 0.4],
            vec![1.0, 0.0],
            vec![vec![vec![0.9, 0.1], vec![0.5, 0.5]]],
        )
        .unwrap();
        let (p, a, v) = optimal_contract_for_posterior(&inst, &[1.0], None).unwrap();
        assert_eq!(a, 0);
        assert!(p.iter().all(|&x| x.abs() < 1e-9));
        assert!((v - 0.9).abs() < 1e-9);
    }

    #[test]
    fn zero_rewards_give_zero_oracle_value() {
        let mut inst = gen::gen_random(2, 2, 2, 4, 1.0).unwrap();
        inst.rewards = vec![0.0, 0.0];
        let grid = ContractGrid::new(0.25, 1.0).unwrap();
        let report = oracle_single(&inst, &grid).unwrap();
        assert!(report.utility.abs() <= 1e-9);
    }

    #[test]
    fn budget_refusal() {
        let inst = gen::gen_random(2, 3, 2, 4, 1.0).unwrap();
        let grid = ContractGrid::new(1e-4, 1.0).unwrap().with_budget(1000);
        assert!(matches!(
            oracle_single(&inst, &grid),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn menu_oracle_dominates_single_oracle() {
        for seed in 0..6u64 {
            let inst = gen::gen_random(2, 2, 2, seed, 1.0).unwrap();
            let grid = ContractGrid::new(0.2, 2.0).unwrap();
            let single = oracle_single(&inst, &grid).unwrap();
            let menu = oracle_menu(&inst, &grid).unwrap();
            assert!(
                menu.utility >= single.utility - 1e-9,
                "seed {seed}: menu {} < single {}",
                menu.utility,
                single.utility
            );
        }
    }

    #[test]
    fn menu_oracle_reaches_full_revelation_on_prop4() {
        // Lattice step 25/28 with bound 50/7 contains both closed-form
        // contracts {25/4, 50/7}, so the menu oracle must reach the
        // full-revelation value.
        let inst = gen::gen_prop4(0.1).unwrap();
        let grid = ContractGrid::new(25.0 / 28.0, 50.0 / 7.0).unwrap();
        let report = oracle_menu(&inst, &grid).unwrap();
        let full_rev = 10.0 * 0.8 + 169.0 / 28.0 * 0.1;
        assert!(
            report.utility >= full_rev - 1e-6,
            "menu oracle {} below {full_rev}",
            report.utility
        );
    }

    #[test]
    fn simulate_tracks_prop4_full_revelation() {
        let inst = gen::gen_prop4(0.1).unwrap();
        let mut payments = Vec::new();
        let mut recs = Vec::new();
        for th in 0..3 {
            let mut mass = vec![0.0; 3];
            mass[th] = 1.0;
            let (p, a, _) = optimal_contract_for_posterior(&inst, &mass, None).unwrap();
            payments.push(p);
            recs.push(a);
        }
        let mech = Mechanism::new(
            SignalingScheme::full_revelation(&inst),
            PaymentScheme::Menu { p: payments },
            Some(recs),
        )
        .unwrap();
        let analytic = 10.0 * 0.8 + 169.0 / 28.0 * 0.1;
        let (mean, stderr) = simulate(&inst, &mech, 1_000_000, 11).unwrap();
        assert!(
            (mean - analytic).abs() <= 3.0 * stderr,
            "mean {mean} stderr {stderr} analytic {analytic}"
        );
    }

    #[test]
    fn zero_lattice_equals_zero_payment_persuasion() {
        // Lattice {0}^m: the menu oracle reduces to persuasion with zero pay.
        let inst = gen::gen_random(3, 2, 3, 11, 1.0).unwrap();
        let grid = ContractGrid::new(1.0, 1e-12).unwrap();
        let report = oracle_menu(&inst, &grid).unwrap();
        let specs: Vec<SignalSpec> = (0..3)
            .map(|a| SignalSpec { action: a, payment: vec![0.0, 0.0] })
            .collect();
        let zero_pay = solve_grouped(&inst, &specs).unwrap().value;
        assert!((report.utility - zero_pay).abs() <= 1e-7);
    }

    #[test]
    fn single_state_kuniform_is_classical_contract_value() {
        let inst = gen::gen_random(3, 2, 1, 2, 1.0).unwrap();
        let params = KUniformParams::new(3, 5.0, 0.1).unwrap();
        let report = solve_kuniform(&inst, &params).unwrap();
        let (_, _, v) = optimal_contract_for_posterior(&inst, &[1.0], Some(5.0)).unwrap();
        assert!((report.utility - v).abs() <= 1e-7);
    }

    #[test]
    fn kuniform_k1_is_full_revelation_on_prop4() {
        let inst = gen::gen_prop4(0.1).unwrap();
        let params = KUniformParams::new(1, 10.0, 0.1).unwrap();
        let report = solve_kuniform(&inst, &params).unwrap();
        let expected = 10.0 * 0.8 + 169.0 / 28.0 * 0.1;
        assert!(
            (report.utility - expected).abs() <= 1e-6,
            "got {} expected {expected}",
            report.utility
        );
        let ic = check_ic(&inst, &report.mechanism, 1e-7).unwrap();
        assert!(ic.is_ic(1e-7));
    }

    #[test]
    fn kuniform_budget_refusal() {
        let inst = gen::gen_random(2, 2, 3, 0, 1.0).unwrap();
        let mut params = KUniformParams::new(40, 1.0, 0.1).unwrap();
        params.budget = 100;
        assert!(matches!(
            solve_kuniform(&inst, &params),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn simulate_deterministic_instance_exactly() {
        let inst = Instance::from_dense(
            vec![1.0],
            vec![0.0],
            vec![0.75],
            vec![vec![vec![1.0]]],
        )
        .unwrap();
        let mech = Mechanism::new(
            SignalingScheme::new(vec!["s".into()], vec![vec![1.0]]),
            PaymentScheme::Single { p: vec![0.25] },
            Some(vec![0]),
        )
        .unwrap();
        let (mean, stderr) = simulate(&inst, &mech, 10_000, 1).unwrap();
        assert_eq!(mean, 0.5);
        assert_eq!(stderr, 0.0);
    }

    #[test]
    fn simulate_is_reproducible() {
        let inst = gen::gen_prop2();
        let mech = gen::prop2_mechanism(0.01).unwrap();
        let (m1, s1) = simulate(&inst, &mech, 50_000, 42).unwrap();
        let (m2, s2) = simulate(&inst, &mech, 50_000, 42).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
        assert!((m1 - 0.73875).abs() <= 4.0 * s1, "mean {m1} stderr {s1}");
    }
}
