//! Cross-module invariants checked over many seeded instances.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sigpact::amb::{solve_amb_relaxation, eps_to_ic};
use sigpact::gen;
use sigpact::model::{
    agent_utilities, best_response, check_ic, make_direct, posterior, principal_utility,
    Instance, Mechanism, PaymentScheme, SignalingScheme,
};
use sigpact::oracle::optimal_contract_for_posterior;

fn random_scheme(inst: &Instance, num_signals: usize, rng: &mut ChaCha8Rng) -> SignalingScheme {
    let t = inst.num_states();
    let mut pi = Vec::with_capacity(t);
    for _ in 0..t {
        let mut row: Vec<f64> = (0..num_signals)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
        let head: f64 = row[..num_signals - 1].iter().sum();
        row[num_signals - 1] = 1.0 - head;
        pi.push(row);
    }
    SignalingScheme::new((0..num_signals).map(|s| format!("s{s}")).collect(), pi)
}

#[test]
fn bayes_plausibility_over_100_seeds() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = gen::gen_random(3, 3, 4, seed, 1.0).unwrap();
        let scheme = random_scheme(&inst, 5, &mut rng);
        let mut reconstructed = vec![0.0; inst.num_states()];
        for s in 0..5 {
            let post = posterior(&inst, &scheme, s).unwrap();
            if let Some(belief) = post.belief {
                for (acc, b) in reconstructed.iter_mut().zip(&belief) {
                    *acc += post.total * b;
                }
            }
        }
        for (acc, mu) in reconstructed.iter().zip(&inst.prior) {
            assert!((acc - mu).abs() <= 1e-9, "seed {seed}: {acc} vs {mu}");
        }
    }
}

#[test]
fn best_response_is_deterministic_and_optimal() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let inst = gen::gen_random(4, 3, 3, seed, 1.0).unwrap();
        let scheme = random_scheme(&inst, 3, &mut rng);
        let pays: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.random_range(0.0..2.0)).collect())
            .collect();
        for s in 0..3 {
            let post = posterior(&inst, &scheme, s).unwrap();
            if post.total == 0.0 {
                continue;
            }
            let a = best_response(&inst, &post, &pays).unwrap();
            let b = best_response(&inst, &post, &pays).unwrap();
            assert_eq!(a, b);
            let (utils, _) = agent_utilities(&inst, &post.mass, &pays);
            for (i, &u) in utils.iter().enumerate() {
                assert!(
                    u <= utils[a] + 1e-9,
                    "seed {seed} signal {s}: action {i} beats {a} ({u} > {})",
                    utils[a]
                );
            }
        }
    }
}

/// Random direct IC ambiguous mechanism whose signals are then split in two;
/// merging must recover at most n signals without changing the utility.
#[test]
fn make_direct_collapses_duplicated_signals() {
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let inst = gen::gen_random(3, 2, 3, seed, 1.0).unwrap();
        let n = inst.num_actions();
        let t = inst.num_states();
        let base = random_scheme(&inst, n, &mut rng);

        // Per-signal cheapest contracts make each recommendation IC.
        let mut payments = Vec::with_capacity(n);
        let mut recs = Vec::with_capacity(n);
        for s in 0..n {
            let post = posterior(&inst, &base, s).unwrap();
            if post.total > 0.0 {
                let (p, a, _) = optimal_contract_for_posterior(&inst, &post.mass, None).unwrap();
                payments.push(vec![p; t]);
                recs.push(a);
            } else {
                payments.push(vec![vec![0.0; 2]; t]);
                recs.push(0);
            }
        }

        // Split every signal into two proportional halves with identical
        // contracts; proportional splits preserve the posterior and IC.
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
        let mut pi2 = vec![vec![0.0; 2 * n]; t];
        for th in 0..t {
            for s in 0..n {
                pi2[th][2 * s] = weights[s] * base.pi[th][s];
                pi2[th][2 * s + 1] = (1.0 - weights[s]) * base.pi[th][s];
            }
        }
        let mut payments2 = Vec::new();
        let mut recs2 = Vec::new();
        for s in 0..n {
            payments2.push(payments[s].clone());
            payments2.push(payments[s].clone());
            recs2.push(recs[s]);
            recs2.push(recs[s]);
        }
        let doubled = Mechanism::new(
            SignalingScheme::new(
                (0..2 * n).map(|s| format!("s{s}")).collect(),
                pi2,
            ),
            PaymentScheme::Ambiguous { p: payments2 },
            Some(recs2),
        )
        .unwrap();
        let ic = check_ic(&inst, &doubled, 1e-9).unwrap();
        assert!(ic.is_ic(1e-7), "seed {seed}: base mechanism not IC");

        let before = principal_utility(&inst, &doubled).unwrap();
        let direct = make_direct(&inst, &doubled).unwrap();
        assert!(direct.num_signals() <= n);
        let after = principal_utility(&inst, &direct).unwrap();
        assert!(
            (before - after).abs() <= 1e-9,
            "seed {seed}: {before} vs {after}"
        );
        let ic = check_ic(&inst, &direct, 1e-9).unwrap();
        assert!(ic.is_ic(1e-7), "seed {seed}: merged mechanism not IC");
    }
}

/// The relaxation value upper-bounds the utility of every IC mechanism.
#[test]
fn relaxation_dominates_feasible_mechanisms() {
    for seed in 0..20u64 {
        let inst = gen::gen_random(3, 2, 2, seed, 1.0).unwrap();
        let rel = solve_amb_relaxation(&inst).unwrap();

        let grid = sigpact::oracle::ContractGrid::new(0.25, 1.0).unwrap();
        let single = sigpact::oracle::oracle_single(&inst, &grid).unwrap();
        assert!(
            single.utility <= rel.value + 1e-6,
            "seed {seed}: oracle {} above relaxation {}",
            single.utility,
            rel.value
        );

        // Per-signal optimal contracts on a random scheme stay below too.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFEED);
        let scheme = random_scheme(&inst, 3, &mut rng);
        let mut payments = Vec::new();
        let mut recs = Vec::new();
        for s in 0..3 {
            let post = posterior(&inst, &scheme, s).unwrap();
            let (p, a, _) = optimal_contract_for_posterior(&inst, &post.mass, None).unwrap();
            payments.push(p);
            recs.push(a);
        }
        let mech = Mechanism::new(scheme, PaymentScheme::Menu { p: payments }, Some(recs))
            .unwrap();
        let u = principal_utility(&inst, &mech).unwrap();
        assert!(
            u <= rel.value + 1e-6,
            "seed {seed}: menu mechanism {} above relaxation {}",
            u,
            rel.value
        );
    }
}

/// Telescoping of the pipeline losses, on normalized random instances.
#[test]
fn amb_pipeline_telescoping() {
    for seed in 0..15u64 {
        let inst = gen::gen_random(3, 2, 2, seed, 1.0).unwrap();
        let params = sigpact::amb::AmbParams::from_zeta(0.02, inst.num_actions()).unwrap();
        let rel = solve_amb_relaxation(&inst).unwrap();
        let repaired = sigpact::amb::repair_irregular(&inst, &rel, &params).unwrap();
        let u_rep = principal_utility(&inst, &repaired).unwrap();
        assert!(
            rel.value - u_rep <= params.xi + 1e-6,
            "seed {seed}: repair lost {}",
            rel.value - u_rep
        );
        let slack = check_ic(&inst, &repaired, 1e-9).unwrap().max_violation;
        assert!(slack <= params.xi + 1e-9, "seed {seed}: slack {slack}");

        let finished = eps_to_ic(&inst, &repaired, params.xi).unwrap();
        let u_fin = principal_utility(&inst, &finished).unwrap();
        let n = inst.num_actions() as f64;
        assert!(
            u_rep - u_fin <= (n + 1.0) * params.xi.sqrt() + 1e-6,
            "seed {seed}: conversion lost {}",
            u_rep - u_fin
        );
        let report = check_ic(&inst, &finished, 1e-9).unwrap();
        assert!(report.is_ic(1e-9) && report.ir_ok, "seed {seed}");
    }
}
