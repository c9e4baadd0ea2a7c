//! Shared machinery for scheme-design LPs with fixed per-signal payments.
//!
//! Several solvers (fixed linear contract, linear menus, lattice oracles)
//! reduce to the same problem: given signals `k` with a fixed payment vector
//! `p_k` and recommended action `a_k`, choose `π(k|θ)` maximizing
//!
//! ```text
//!   Σ_k Σ_θ μ(θ) π(k|θ) ⟨F^θ_{a_k}, r − p_k⟩
//! ```
//!
//! subject to one IC row per (signal, deviation) and per-state simplex rows.
//! In the mass variables `x_{k,θ} = μ(θ)π(k|θ)` the IC rows constrain each
//! signal's column to a polyhedral cone, and the only coupling is
//! `Σ_k x_k = μ`. Three interchangeable strategies:
//!
//! - [`solve_grouped_direct`]: one dense LP, best for few signals.
//! - [`solve_grouped_vertices`]: enumerate the vertices of each signal's
//!   feasible-posterior polytope and solve a master LP with |Θ| rows.
//! - [`solve_grouped_streaming`]: column generation against the master's
//!   dual, for signal families too large to materialize.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Relation};
use crate::model::Instance;
use rayon::prelude::*;
use std::collections::HashSet;

/// Dimension cap for vertex enumeration.
pub(crate) const RAY_DIM_LIMIT: usize = 7;
const GEOM_TOL: f64 = 1e-9;

/// One signal with fixed, state-independent payments.
#[derive(Debug, Clone)]
pub(crate) struct SignalSpec {
    pub action: usize,
    pub payment: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct GroupedSolution {
    /// LP optimum in unnormalized (μ-weighted) units.
    pub value: f64,
    /// `pi[θ][k]`, rows renormalized to sum to one.
    pub pi: Vec<Vec<f64>>,
}

/// Per-signal LP coefficients in mass space.
struct SignalCoeffs {
    /// `val[θ] = ⟨F^θ_a, r − p⟩`
    val: Vec<f64>,
    /// IC rows `g_j[θ] = (⟨F^θ_a, p⟩ − c_a) − (⟨F^θ_j, p⟩ − c_j)`, j ≠ a.
    ic: Vec<Vec<f64>>,
}

fn coeffs(inst: &Instance, spec: &SignalSpec) -> SignalCoeffs {
    let t = inst.num_states();
    let n = inst.num_actions();
    let a = spec.action;
    let mut val = vec![0.0; t];
    let mut pay_a = vec![0.0; t];
    for th in 0..t {
        let pa = inst.expect(th, a, &spec.payment);
        pay_a[th] = pa;
        val[th] = inst.expected_reward(th, a) - pa;
    }
    let mut ic = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n {
        if j == a {
            continue;
        }
        let row: Vec<f64> = (0..t)
            .map(|th| {
                (pay_a[th] - inst.costs[a])
                    - (inst.expect(th, j, &spec.payment) - inst.costs[j])
            })
            .collect();
        ic.push(row);
    }
    SignalCoeffs { val, ic }
}

/// Dispatches on problem size.
pub(crate) fn solve_grouped(inst: &Instance, specs: &[SignalSpec]) -> Result<GroupedSolution> {
    let t = inst.num_states();
    if specs.len() * t <= 512 || t > RAY_DIM_LIMIT {
        solve_grouped_direct(inst, specs)
    } else {
        solve_grouped_vertices(inst, specs)
    }
}

pub(crate) fn solve_grouped_direct(
    inst: &Instance,
    specs: &[SignalSpec],
) -> Result<GroupedSolution> {
    let t = inst.num_states();
    let k = specs.len();
    let mut prob = LpProblem::new(k * t);
    for (ki, spec) in specs.iter().enumerate() {
        let c = coeffs(inst, spec);
        for th in 0..t {
            prob.objective[ki * t + th] = c.val[th];
        }
        for row in &c.ic {
            // Componentwise-nonnegative rows are implied by x >= 0.
            if row.iter().all(|&v| v >= 0.0) {
                continue;
            }
            let mut coefs = vec![0.0; k * t];
            coefs[ki * t..ki * t + t].copy_from_slice(row);
            prob.constrain(coefs, Relation::Ge, 0.0);
        }
    }
    for th in 0..t {
        let mut coefs = vec![0.0; k * t];
        for ki in 0..k {
            coefs[ki * t + th] = 1.0;
        }
        prob.constrain(coefs, Relation::Eq, inst.prior[th]);
    }
    let sol = solve_lp(&prob);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let mut mass = vec![vec![0.0; k]; t];
    for ki in 0..k {
        for th in 0..t {
            mass[th][ki] = sol.assignment[ki * t + th];
        }
    }
    Ok(GroupedSolution { value: sol.value, pi: mass_to_pi(inst, mass) })
}

fn mass_to_pi(_inst: &Instance, mass: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut pi = mass;
    for row in pi.iter_mut() {
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for v in row.iter_mut() {
                *v /= sum;
            }
        } else {
            // Unconstrained state (zero prior); send the first signal.
            row[0] = 1.0;
        }
    }
    pi
}

/// Solves a square system by Gaussian elimination; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = 1.0 / a[col][col];
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col] * inv;
            if f != 0.0 {
                for j in col..n {
                    let v = a[col][j];
                    a[i][j] -= f * v;
                }
                b[i] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to next lexicographic combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Vertices of `{q : q ≥ 0, Σq = 1, g·q ≥ 0 ∀g}` for small dimensions.
///
/// Each vertex is pinned by `T−1` tight constraints plus the sum row; all
/// subsets are tried and infeasible or singular picks discarded.
fn polytope_vertices(t: usize, ic: &[Vec<f64>]) -> Vec<Vec<f64>> {
    assert!(t <= RAY_DIM_LIMIT);
    if t == 1 {
        let ok = ic.iter().all(|g| g[0] >= -GEOM_TOL);
        return if ok { vec![vec![1.0]] } else { vec![] };
    }
    let feasible = |q: &[f64]| {
        q.iter().all(|&v| v >= -GEOM_TOL)
            && ic
                .iter()
                .all(|g| g.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() >= -GEOM_TOL)
    };
    // Candidate tight rows: coordinate facets first, then IC facets.
    let num_cand = t + ic.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for_each_combination(num_cand, t - 1, |chosen| {
        let mut a = Vec::with_capacity(t);
        for &c in chosen {
            if c < t {
                let mut row = vec![0.0; t];
                row[c] = 1.0;
                a.push(row);
            } else {
                a.push(ic[c - t].clone());
            }
        }
        a.push(vec![1.0; t]);
        let mut b = vec![0.0; t - 1];
        b.push(1.0);
        let Some(mut q) = solve_square(a, b) else {
            return;
        };
        if !q.iter().all(|v| v.is_finite()) || !feasible(&q) {
            return;
        }
        for v in q.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = q.iter().sum();
        if sum <= 0.0 {
            return;
        }
        for v in q.iter_mut() {
            *v /= sum;
        }
        let key: Vec<u64> = q.iter().map(|&v| (v * 1e9).round() as u64).collect();
        if seen.insert(key) {
            out.push(q);
        }
    });
    out
}

struct Column {
    signal: usize,
    q: Vec<f64>,
    value: f64,
}

/// Solves the master LP over explicit columns; returns (value, mass matrix).
fn solve_master(
    inst: &Instance,
    columns: &[Column],
    num_signals: usize,
) -> Result<GroupedSolution> {
    let t = inst.num_states();
    let mut prob = LpProblem::new(columns.len());
    prob.objective = columns.iter().map(|c| c.value).collect();
    for th in 0..t {
        let coefs: Vec<f64> = columns.iter().map(|c| c.q[th]).collect();
        prob.constrain(coefs, Relation::Eq, inst.prior[th]);
    }
    let sol = solve_lp(&prob);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let mut mass = vec![vec![0.0; num_signals]; t];
    for (c, &lambda) in columns.iter().zip(&sol.assignment) {
        if lambda <= 0.0 {
            continue;
        }
        for th in 0..t {
            mass[th][c.signal] += lambda * c.q[th];
        }
    }
    Ok(GroupedSolution { value: sol.value, pi: mass_to_pi(inst, mass) })
}

/// Full vertex enumeration: every signal contributes all vertices of its
/// feasible-posterior polytope as master columns.
pub(crate) fn solve_grouped_vertices(
    inst: &Instance,
    specs: &[SignalSpec],
) -> Result<GroupedSolution> {
    let t = inst.num_states();
    if t > RAY_DIM_LIMIT {
        return solve_grouped_direct(inst, specs);
    }
    let mut columns = Vec::new();
    for (ki, spec) in specs.iter().enumerate() {
        let c = coeffs(inst, spec);
        for q in polytope_vertices(t, &c.ic) {
            let value = c.val.iter().zip(&q).map(|(v, qq)| v * qq).sum();
            columns.push(Column { signal: ki, q, value });
        }
    }
    if columns.is_empty() {
        return Err(Error::Lp(LpStatus::Infeasible));
    }
    solve_master(inst, &columns, specs.len())
}

/// Column generation for signal families too large to materialize.
///
/// `spec_of` produces the k-th signal on demand; `universal` names a signal
/// whose feasible-posterior polytope is the whole simplex (any zero-payment
/// opt-out signal qualifies), which seeds a feasible master basis.
pub(crate) fn solve_grouped_streaming(
    inst: &Instance,
    num_signals: usize,
    universal: usize,
    spec_of: &(dyn Fn(usize) -> SignalSpec + Sync),
) -> Result<StreamingSolution> {
    let t = inst.num_states();
    if t > RAY_DIM_LIMIT {
        return Err(Error::pre(format!(
            "streaming solver supports at most {RAY_DIM_LIMIT} states, instance has {t}"
        )));
    }
    let mut columns: Vec<Column> = Vec::new();
    let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
    {
        let spec = spec_of(universal);
        let c = coeffs(inst, &spec);
        for th in 0..t {
            let mut q: Vec<f64> = vec![0.0; t];
            q[th] = 1.0;
            let value = c.val[th];
            seen.insert((universal, q.iter().map(|&v| (v * 1e9).round() as u64).collect()));
            columns.push(Column { signal: universal, q, value });
        }
    }

    let price_tol = 1e-9 * inst.bound_c.max(1.0);
    let max_rounds = 600;
    for _round in 0..max_rounds {
        let duals = master_duals(inst, &columns)?;
        // Price every signal: best vertex of its polytope under reduced
        // costs (val − y)·q. A quick simplex-wide upper bound skips
        // hopeless signals without enumerating vertices.
        let best: Vec<(f64, usize, Vec<f64>)> = (0..num_signals)
            .into_par_iter()
            .filter_map(|k| {
                let spec = spec_of(k);
                let c = coeffs(inst, &spec);
                let ub = c
                    .val
                    .iter()
                    .zip(&duals)
                    .map(|(v, y)| v - y)
                    .fold(f64::NEG_INFINITY, f64::max);
                if ub <= price_tol {
                    return None;
                }
                let mut found: Option<(f64, Vec<f64>)> = None;
                for q in polytope_vertices(t, &c.ic) {
                    let rc: f64 = c
                        .val
                        .iter()
                        .zip(&duals)
                        .zip(&q)
                        .map(|((v, y), qq)| (v - y) * qq)
                        .sum();
                    if rc > price_tol && found.as_ref().map_or(true, |(f, _)| rc > *f) {
                        found = Some((rc, q));
                    }
                }
                found.map(|(rc, q)| (rc, k, q))
            })
            .collect();
        if best.is_empty() {
            let master = solve_master(inst, &columns, num_signals)?;
            return Ok(StreamingSolution {
                value: master.value,
                pi: master.pi,
            });
        }
        let mut ranked = best;
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut added = 0;
        for (_, k, q) in ranked.into_iter().take(100) {
            let key = (k, q.iter().map(|&v| (v * 1e9).round() as u64).collect());
            if !seen.insert(key) {
                continue;
            }
            let spec = spec_of(k);
            let c = coeffs(inst, &spec);
            let value = c.val.iter().zip(&q).map(|(v, qq)| v * qq).sum();
            columns.push(Column { signal: k, q, value });
            added += 1;
        }
        if added == 0 {
            // Every priced column is already present: the master is optimal
            // up to the pricing tolerance.
            let master = solve_master(inst, &columns, num_signals)?;
            return Ok(StreamingSolution {
                value: master.value,
                pi: master.pi,
            });
        }
    }
    Err(Error::Lp(LpStatus::Numerical))
}

pub(crate) struct StreamingSolution {
    pub value: f64,
    /// `pi[θ][k]` over the full signal family; only priced-in signals can
    /// carry mass.
    pub pi: Vec<Vec<f64>>,
}

/// Duals of the master's coupling rows, obtained by solving the explicit
/// dual LP: min μ·y s.t. y·q_c ≥ value_c for every collected column.
fn master_duals(inst: &Instance, columns: &[Column]) -> Result<Vec<f64>> {
    let t = inst.num_states();
    // Free y represented as y+ − y−.
    let mut prob = LpProblem::new(2 * t);
    for th in 0..t {
        prob.objective[th] = -inst.prior[th];
        prob.objective[t + th] = inst.prior[th];
    }
    for c in columns {
        let mut row = vec![0.0; 2 * t];
        for th in 0..t {
            row[th] = c.q[th];
            row[t + th] = -c.q[th];
        }
        prob.constrain(row, Relation::Ge, c.value);
    }
    let sol = solve_lp(&prob);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    Ok((0..t).map(|th| sol.assignment[th] - sol.assignment[t + th]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn specs_for_alpha(inst: &Instance, alpha: f64) -> Vec<SignalSpec> {
        let payment: Vec<f64> = inst.rewards.iter().map(|&r| alpha * r).collect();
        (0..inst.num_actions())
            .map(|a| SignalSpec { action: a, payment: payment.clone() })
            .collect()
    }

    #[test]
    fn vertex_enumeration_on_simplex() {
        // No IC rows: vertices are exactly the corners.
        let vs = polytope_vertices(3, &[]);
        assert_eq!(vs.len(), 3);
        for v in &vs {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(v.iter().filter(|&&x| x > 0.5).count(), 1);
        }
    }

    #[test]
    fn halfspace_cuts_produce_edge_vertices() {
        // q0 >= q1 on a 2-simplex: vertices (1,0) and (0.5,0.5).
        let vs = polytope_vertices(2, &[vec![1.0, -1.0]]);
        assert_eq!(vs.len(), 2);
    }

    #[test]
    fn direct_and_vertex_paths_agree() {
        for seed in 0..25u64 {
            let inst = gen::gen_random(3, 3, 3, seed, 1.0).unwrap();
            for &alpha in &[0.0, 0.3, 0.7] {
                let specs = specs_for_alpha(&inst, alpha);
                let a = solve_grouped_direct(&inst, &specs).unwrap();
                let b = solve_grouped_vertices(&inst, &specs).unwrap();
                assert!(
                    (a.value - b.value).abs() <= 1e-7 * (1.0 + a.value.abs()),
                    "seed {seed} alpha {alpha}: direct {} vs vertices {}",
                    a.value,
                    b.value
                );
            }
        }
    }

    #[test]
    fn streaming_matches_direct() {
        for seed in 0..10u64 {
            let inst = gen::gen_random(3, 2, 3, seed, 1.0).unwrap();
            let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
            let mut specs = Vec::new();
            for &alpha in &alphas {
                specs.extend(specs_for_alpha(&inst, alpha));
            }
            let direct = solve_grouped_direct(&inst, &specs).unwrap();
            let inst2 = inst.clone();
            let streaming = solve_grouped_streaming(&inst, specs.len(), 0, &move |k| {
                let alpha = alphas[k / inst2.num_actions()];
                SignalSpec {
                    action: k % inst2.num_actions(),
                    payment: inst2.rewards.iter().map(|&r| alpha * r).collect(),
                }
            })
            .unwrap();
            assert!(
                (direct.value - streaming.value).abs() <= 1e-7 * (1.0 + direct.value.abs()),
                "seed {seed}: direct {} vs streaming {}",
                direct.value,
                streaming.value
            );
        }
    }
}
