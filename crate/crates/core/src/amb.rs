//! The ambiguous-contract pipeline: LP relaxation over direct signals,
//! repair of irregular (payment mass without signal mass) pairs by
//! reserve-and-redistribute, conversion of approximately-IC mechanisms to
//! exactly IC ones, and the end-to-end ζ-optimal solver.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Relation};
use crate::model::{
    best_response, check_ic, posterior, principal_utility, Instance, Mechanism,
    PaymentScheme, SignalingScheme,
};
use crate::oracle::optimal_contract_for_posterior;
use crate::report::{Diagnostics, SolveReport};

/// Threshold below which LP outputs are treated as exact zeros when
/// classifying irregular pairs.
pub const IRREGULAR_TOL: f64 = 1e-9;

/// Derived approximation parameters for a target additive gap ζ.
#[derive(Debug, Clone, Copy)]
pub struct AmbParams {
    pub zeta: f64,
    /// ξ = (ζ / (2(n+1)))²; the pipeline's intermediate IC slack.
    pub xi: f64,
    /// Reserve mass ε = n·ξ/(n+1).
    pub epsilon: f64,
    /// Redistributed mass per irregular pair, δ = ε/n.
    pub delta: f64,
    /// Contract blending weight η = √ξ.
    pub eta: f64,
}

impl AmbParams {
    pub fn from_zeta(zeta: f64, num_actions: usize) -> Result<Self> {
        if !(zeta > 0.0) {
            return Err(Error::pre(format!("zeta must be positive, got {zeta}")));
        }
        let n = num_actions as f64;
        let xi = (zeta / (2.0 * (n + 1.0))).powi(2);
        let epsilon = n * xi / (n + 1.0);
        let delta = epsilon / n;
        let eta = xi.sqrt();
        Ok(AmbParams { zeta, xi, epsilon, delta, eta })
    }
}

/// Solution of the relaxed design LP over direct signals.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    /// Direct scheme over signals {0..n−1}.
    pub pi: SignalingScheme,
    /// `z[s][θ][ω]`, the relaxation's payment-mass variables (π·p products).
    pub z: Vec<Vec<Vec<f64>>>,
    /// LP optimum; an upper bound on the utility of every feasible
    /// mechanism and equal to the design problem's supremum.
    pub value: f64,
}

/// Builds and solves the relaxed LP: variables π(s|θ) and z^{s,θ}, objective
/// `Σ_θ μ(θ) Σ_s ⟨F^θ_s, π(s|θ) r − z^{s,θ}⟩`, one IC row per (signal,
/// deviation), and one simplex row per state.
pub fn solve_amb_relaxation(inst: &Instance) -> Result<RelaxedSolution> {
    let t = inst.num_states();
    let n = inst.num_actions();
    let m = inst.num_outcomes();
    let pi_vars = n * t;
    let num_vars = pi_vars + n * t * m;
    let pi_idx = |s: usize, th: usize| s * t + th;
    let z_idx = |s: usize, th: usize, w: usize| pi_vars + (s * t + th) * m + w;

    let mut prob = LpProblem::new(num_vars);
    for s in 0..n {
        for th in 0..t {
            let mu = inst.prior[th];
            prob.objective[pi_idx(s, th)] = mu * inst.expected_reward(th, s);
            for (w, f) in inst.matrices[th].row(s) {
                prob.objective[z_idx(s, th, w)] = -mu * f;
            }
        }
    }
    for s in 0..n {
        for i in 0..n {
            if i == s {
                continue;
            }
            let mut coefs = vec![0.0; num_vars];
            for th in 0..t {
                let mu = inst.prior[th];
                if mu == 0.0 {
                    continue;
                }
                for (w, f) in inst.matrices[th].row(s) {
                    coefs[z_idx(s, th, w)] += mu * f;
                }
                for (w, f) in inst.matrices[th].row(i) {
                    coefs[z_idx(s, th, w)] -= mu * f;
                }
                coefs[pi_idx(s, th)] += mu * (inst.costs[i] - inst.costs[s]);
            }
            prob.constrain(coefs, Relation::Ge, 0.0);
        }
    }
    for th in 0..t {
        let mut coefs = vec![0.0; num_vars];
        for s in 0..n {
            coefs[pi_idx(s, th)] = 1.0;
        }
        prob.constrain(coefs, Relation::Eq, 1.0);
    }

    let sol = solve_lp(&prob);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let pi_rows: Vec<Vec<f64>> = (0..t)
        .map(|th| (0..n).map(|s| sol.assignment[pi_idx(s, th)]).collect())
        .collect();
    let z: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|s| {
            (0..t)
                .map(|th| (0..m).map(|w| sol.assignment[z_idx(s, th, w)]).collect())
                .collect()
        })
        .collect();
    let pi = SignalingScheme::new(
        inst.action_ids.iter().map(|a| format!("rec_{a}")).collect(),
        pi_rows,
    );
    Ok(RelaxedSolution { pi, z, value: sol.value })
}

/// Converts a relaxed solution into an ambiguous mechanism that is ξ-IC.
///
/// Reserve: an extra signal takes mass ε from every state. Redistribute:
/// every irregular pair (nonzero z, zero π) receives mass δ = ε/n, taken
/// from the reserve signal so that each state's mass is conserved exactly.
/// Payments are then recovered as p = z/π, the reserve signal gets the
/// optimal IC contract for its own posterior, and it is merged into the
/// direct signal of its induced action.
pub fn repair_irregular(
    inst: &Instance,
    rel: &RelaxedSolution,
    params: &AmbParams,
) -> Result<Mechanism> {
    let t = inst.num_states();
    let n = inst.num_actions();
    let m = inst.num_outcomes();
    let eps = params.epsilon;
    let delta = params.delta;

    // pi_new[θ][s], reserve column at index n.
    let mut pi_new: Vec<Vec<f64>> = (0..t)
        .map(|th| {
            let mut row: Vec<f64> =
                (0..n).map(|s| (1.0 - eps) * rel.pi.pi[th][s]).collect();
            row.push(eps);
            row
        })
        .collect();
    let mut payments: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; m]; t]; n];

    for s in 0..n {
        for th in 0..t {
            let pi_orig = rel.pi.pi[th][s];
            let z = &rel.z[s][th];
            let z_max = z.iter().cloned().fold(0.0_f64, f64::max);
            if pi_orig > IRREGULAR_TOL {
                let denom = pi_new[th][s];
                payments[s][th] = z.iter().map(|&v| (v / denom).max(0.0)).collect();
            } else if z_max > IRREGULAR_TOL {
                // Irregular pair: give it mass δ from the reserve.
                pi_new[th][s] += delta;
                pi_new[th][n] -= delta;
                if pi_new[th][n] < 0.0 {
                    debug_assert!(pi_new[th][n] > -1e-12, "reserve driven below zero");
                    pi_new[th][n] = 0.0;
                }
                let denom = pi_new[th][s];
                payments[s][th] = z.iter().map(|&v| (v / denom).max(0.0)).collect();
            }
            // Sub-threshold z with sub-threshold π: zeroed rather than
            // repaired; payments stay zero.
        }
    }

    // Price the reserve signal and fold it into its induced direct signal.
    let reserve_mass: Vec<f64> = (0..t).map(|th| inst.prior[th] * pi_new[th][n]).collect();
    let reserve_total: f64 = reserve_mass.iter().sum();
    if reserve_total > 1e-15 {
        let (p_bar, a_star, _) = optimal_contract_for_posterior(inst, &reserve_mass, None)?;
        for th in 0..t {
            let add = pi_new[th][n];
            if add == 0.0 {
                continue;
            }
            let old = pi_new[th][a_star];
            let merged = old + add;
            for (w, dst) in payments[a_star][th].iter_mut().enumerate() {
                *dst = (old * *dst + add * p_bar[w]) / merged;
            }
            pi_new[th][a_star] = merged;
        }
    }
    for row in pi_new.iter_mut() {
        row.pop();
    }

    Mechanism::new(
        SignalingScheme::new(rel.pi.signal_ids.clone(), pi_new),
        PaymentScheme::Ambiguous { p: payments },
        Some((0..n).collect()),
    )
}

/// Converts a ξ-IC mechanism into an exactly IC one by blending every
/// contract with the reward vector: p̄ = (1−η)p + η·r with η = √ξ, then
/// recomputing best responses. The principal loses at most
/// (n+1)·√ξ·max(1, bound_c).
pub fn eps_to_ic(inst: &Instance, mech: &Mechanism, xi: f64) -> Result<Mechanism> {
    if xi < 0.0 {
        return Err(Error::pre(format!("xi must be nonnegative, got {xi}")));
    }
    if xi == 0.0 {
        return Ok(mech.clone());
    }
    let eta = xi.sqrt();
    let blend = |p: &[f64]| -> Vec<f64> {
        p.iter()
            .zip(&inst.rewards)
            .map(|(&pw, &r)| (1.0 - eta) * pw + eta * r)
            .collect()
    };
    let payments = match &mech.payments {
        PaymentScheme::Ambiguous { p } => PaymentScheme::Ambiguous {
            p: p.iter()
                .map(|per_state| per_state.iter().map(|v| blend(v)).collect())
                .collect(),
        },
        PaymentScheme::Menu { p } => {
            PaymentScheme::Menu { p: p.iter().map(|v| blend(v)).collect() }
        }
        PaymentScheme::Single { p } => PaymentScheme::Single { p: blend(p) },
        PaymentScheme::LinearSingle { alpha } => {
            PaymentScheme::LinearSingle { alpha: (1.0 - eta) * alpha + eta }
        }
        PaymentScheme::LinearMenu { alpha } => PaymentScheme::LinearMenu {
            alpha: alpha.iter().map(|&a| (1.0 - eta) * a + eta).collect(),
        },
    };
    let k = mech.num_signals();
    let mut recs = match &mech.recommendations {
        Some(r) => r.clone(),
        None => vec![0; k],
    };
    let shell = Mechanism::new(mech.scheme.clone(), payments, None)?;
    for s in 0..k {
        let post = posterior(inst, &shell.scheme, s)?;
        if post.total == 0.0 {
            continue;
        }
        let pays = shell.payments.payments_at_signal(inst, s);
        recs[s] = best_response(inst, &post, &pays)?;
    }
    Mechanism::new(shell.scheme, shell.payments, Some(recs))
}

/// End-to-end ζ-optimal solver for ambiguous contracts: relaxation →
/// irregular-pair repair → IC conversion.
pub fn solve_amb(inst: &Instance, zeta: f64) -> Result<SolveReport> {
    let params = AmbParams::from_zeta(zeta, inst.num_actions())?;
    let rel = solve_amb_relaxation(inst)?;
    let repaired = repair_irregular(inst, &rel, &params)?;
    let mech = eps_to_ic(inst, &repaired, params.xi)?;
    let utility = principal_utility(inst, &mech)?;
    let residual_ic = check_ic(inst, &mech, 1e-9)?.max_violation;
    let mut diagnostics = Diagnostics {
        lp_value: Some(rel.value),
        residual_ic,
        scaled_bound: inst.bound_c > 1.0,
        ..Default::default()
    };
    diagnostics.push_param("zeta", params.zeta);
    diagnostics.push_param("xi", params.xi);
    diagnostics.push_param("epsilon", params.epsilon);
    diagnostics.push_param("delta", params.delta);
    diagnostics.push_param("eta", params.eta);
    Ok(SolveReport { mechanism: mech, utility, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::model::Instance;

    #[test]
    fn params_satisfy_stated_identities() {
        let p = AmbParams::from_zeta(0.01, 3).unwrap();
        assert!((p.xi - (0.01f64 / 8.0).powi(2)).abs() < 1e-18);
        assert!((p.xi - (3.0 + 1.0) * p.epsilon / 3.0).abs() < 1e-18);
        assert!((p.eta * p.eta - p.xi).abs() < 1e-18);
        assert!((p.delta - p.epsilon / 3.0).abs() < 1e-18);
    }

    #[test]
    fn relaxation_on_prop2_hits_three_quarters() {
        let inst = gen::gen_prop2();
        let rel = solve_amb_relaxation(&inst).unwrap();
        assert!((rel.value - 0.75).abs() <= 1e-9, "value {}", rel.value);
        // Objective re-evaluated at (pi, z) must match the reported value.
        let mut obj = 0.0;
        for s in 0..inst.num_actions() {
            for th in 0..inst.num_states() {
                let mu = inst.prior[th];
                obj += mu * rel.pi.pi[th][s] * inst.expected_reward(th, s);
                obj -= mu * inst.expect(th, s, &rel.z[s][th]);
            }
        }
        assert!((obj - rel.value).abs() <= 1e-7);
    }

    #[test]
    fn single_state_instance_attains_classical_optimum() {
        let inst = Instance::from_dense(
            vec![1.0],
            vec![0.0, 0.2],
            vec![1.0, 0.0],
            vec![vec![vec![0.3, 0.7], vec![0.9, 0.1]]],
        )
        .unwrap();
        let (_, _, classical) =
            optimal_contract_for_posterior(&inst, &[1.0], None).unwrap();
        let report = solve_amb(&inst, 0.01).unwrap();
        let rel = solve_amb_relaxation(&inst).unwrap();
        assert!((rel.value - classical).abs() <= 1e-7);
        assert!(report.utility <= classical + 1e-7);
        assert!(report.utility >= classical - 0.01);
    }

    #[test]
    fn repair_without_irregular_pairs_only_reserves() {
        // A single-state instance where the optimum needs no irregular mass.
        let inst = Instance::from_dense(
            vec![1.0],
            vec![0.0, 0.2],
            vec![1.0, 0.0],
            vec![vec![vec![0.3, 0.7], vec![0.9, 0.1]]],
        )
        .unwrap();
        let params = AmbParams::from_zeta(0.01, 2).unwrap();
        let rel = solve_amb_relaxation(&inst).unwrap();
        let mech = repair_irregular(&inst, &rel, &params).unwrap();
        let u = principal_utility(&inst, &mech).unwrap();
        assert!(u >= rel.value - params.epsilon * inst.bound_c.max(1.0) - 1e-9);
        let ic = check_ic(&inst, &mech, 1e-9).unwrap();
        assert!(ic.max_violation <= params.xi + 1e-9);
    }

    #[test]
    fn repair_gives_positive_mass_and_finite_payments_to_irregular_pairs() {
        // Hand-edit a regular relaxed solution to contain one irregular pair.
        let inst = gen::gen_prop2();
        let rel = solve_amb_relaxation(&inst).unwrap();
        let mut edited = rel.clone();
        // Force signal 0 to have payment mass on a state that never sends it.
        edited.pi.pi[1][0] = 0.0;
        edited.z[0][1] = vec![0.0, 0.0, 0.0, 0.05];
        let params = AmbParams::from_zeta(0.01, inst.num_actions()).unwrap();
        let mech = repair_irregular(&inst, &edited, &params).unwrap();
        assert!(mech.scheme.pi[1][0] >= params.delta - 1e-15);
        if let PaymentScheme::Ambiguous { p } = &mech.payments {
            assert!(p[0][1].iter().all(|v| v.is_finite()));
            assert!(p[0][1][3] > 0.0);
        } else {
            panic!("expected ambiguous payments");
        }
        for row in &mech.scheme.pi {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9, "row sum {sum}");
        }
    }

    #[test]
    fn eps_to_ic_identity_at_zero_xi() {
        let inst = gen::gen_prop2();
        let mech = gen::prop2_mechanism(0.01).unwrap();
        let out = eps_to_ic(&inst, &mech, 0.0).unwrap();
        let u1 = principal_utility(&inst, &mech).unwrap();
        let u2 = principal_utility(&inst, &out).unwrap();
        assert_eq!(u1, u2);
    }

    #[test]
    fn eps_to_ic_blends_zero_contract_toward_rewards() {
        let inst = gen::gen_random(3, 2, 2, 8, 1.0).unwrap();
        let scheme = SignalingScheme::full_revelation(&inst);
        let k = scheme.num_signals();
        let mech = Mechanism::new(
            scheme,
            PaymentScheme::Single { p: vec![0.0; 2] },
            Some(vec![0; k]),
        )
        .unwrap();
        let before = principal_utility(&inst, &mech).unwrap();
        let xi = 1e-4;
        let out = eps_to_ic(&inst, &mech, xi).unwrap();
        match &out.payments {
            PaymentScheme::Single { p } => {
                for (w, &pw) in p.iter().enumerate() {
                    assert!((pw - 0.01 * inst.rewards[w]).abs() <= 1e-15);
                }
            }
            other => panic!("unexpected class {other:?}"),
        }
        let after = principal_utility(&inst, &out).unwrap();
        let n = inst.num_actions() as f64;
        assert!(before - after <= (n + 1.0) * xi.sqrt() + 1e-9);
        let ic = check_ic(&inst, &out, 1e-9).unwrap();
        assert!(ic.is_ic(1e-9));
        assert!(ic.ir_ok);
    }

    #[test]
    fn repair_on_prop2_stays_near_the_supremum() {
        let inst = gen::gen_prop2();
        let params = AmbParams::from_zeta(0.01, inst.num_actions()).unwrap();
        let rel = solve_amb_relaxation(&inst).unwrap();
        let mech = repair_irregular(&inst, &rel, &params).unwrap();
        let u = principal_utility(&inst, &mech).unwrap();
        assert!(
            u >= 0.75 - params.xi - params.epsilon,
            "repair utility {u} too far below 0.75"
        );
        let slack = check_ic(&inst, &mech, 1e-9).unwrap().max_violation;
        assert!(slack <= params.xi + 1e-12, "slack {slack}");
    }

    #[test]
    fn prop2_pipeline_lands_in_band() {
        let inst = gen::gen_prop2();
        let report = solve_amb(&inst, 0.01).unwrap();
        assert!((report.diagnostics.lp_value.unwrap() - 0.75).abs() <= 1e-6);
        assert!(report.utility >= 0.74, "utility {}", report.utility);
        assert!(report.utility < 0.75, "utility {}", report.utility);
        assert!(report.diagnostics.residual_ic <= 1e-9);
    }

    #[test]
    fn utility_monotone_as_zeta_shrinks() {
        let inst = gen::gen_prop2();
        let mut last = f64::NEG_INFINITY;
        for zeta in [0.04, 0.02, 0.01] {
            let u = solve_amb(&inst, zeta).unwrap().utility;
            assert!(u >= last - 1e-9, "zeta {zeta}: {u} < {last}");
            last = u;
        }
    }
}
