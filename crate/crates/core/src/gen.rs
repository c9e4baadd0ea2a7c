//! Instance generators: the counterexample instances, the two
//! graph-reduction constructions with their closed-form mechanism
//! evaluators, and seeded random instances.

use crate::error::{Error, Result};
use crate::exact::{rat, rat_from_f64, rat_to_f64, ExactInstance, Rat};
use crate::model::{
    check_ic, posterior, principal_value, Instance, Mechanism, PaymentScheme,
    SignalingScheme, SparseRows,
};
use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Undirected simple graph, vertices `0..num_vertices`.
#[derive(Debug, Clone)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::pre(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::pre(format!("self-loop at {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::pre(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Graph { num_vertices, edges })
    }

    /// Parses the text format: first line `|V| |E|`, then one `u v` edge per
    /// line, 0-indexed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::pre("empty graph file"))?;
        let mut it = header.split_whitespace();
        let nv: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::pre("bad graph header"))?;
        let ne: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::pre("bad graph header"))?;
        let mut edges = Vec::with_capacity(ne);
        for line in lines {
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::pre(format!("bad edge line `{line}`")))?;
            let v: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::pre(format!("bad edge line `{line}`")))?;
            edges.push((u, v));
        }
        if edges.len() != ne {
            return Err(Error::pre(format!(
                "header promises {ne} edges, file has {}",
                edges.len()
            )));
        }
        Graph::new(nv, edges)
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.num_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if self.has_edge(u, v) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_dominating(&self, set: &[usize]) -> bool {
        let mut covered = vec![false; self.num_vertices];
        for &u in set {
            covered[u] = true;
            for &(a, b) in &self.edges {
                if a == u {
                    covered[b] = true;
                } else if b == u {
                    covered[a] = true;
                }
            }
        }
        covered.into_iter().all(|c| c)
    }
}

/// The three-state, three-action, four-outcome instance whose optimum is a
/// supremum that no mechanism attains.
pub fn gen_prop2() -> Instance {
    let third = 1.0 / 3.0;
    let mats = vec![
        // th1
        vec![
            vec![0.0, 0.5, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
        ],
        // th2
        vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
        // th3
        vec![
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ],
    ];
    let mut inst = Instance::from_dense(
        vec![third, third, third],
        vec![0.0, 0.0, 0.125],
        vec![1.0, 0.5, 0.0, 0.0],
        mats,
    )
    .unwrap();
    inst.state_ids = vec!["th1".into(), "th2".into(), "th3".into()];
    inst.action_ids = vec!["a1".into(), "a2".into(), "a3".into()];
    inst.outcome_ids = vec!["w1".into(), "w2".into(), "w3".into(), "w4".into()];
    inst
}

/// The near-optimal three-signal ambiguous mechanism for the supremum
/// instance, achieving utility 3/4 − 9ε/8.
pub fn prop2_mechanism(epsilon: f64) -> Result<Mechanism> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 3.0) {
        return Err(Error::pre(format!("epsilon must lie in (0, 1/3), got {epsilon}")));
    }
    let scheme = SignalingScheme::new(
        vec!["s1".into(), "s2".into(), "s3".into()],
        vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0 - 3.0 * epsilon, 3.0 * epsilon],
            vec![0.0, 0.0, 1.0],
        ],
    );
    let m = 4;
    let mut p = vec![vec![vec![0.0; m]; 3]; 3];
    p[2][1][3] = 1.0 / (12.0 * epsilon) + 0.125;
    Mechanism::new(scheme, PaymentScheme::Ambiguous { p }, Some(vec![0, 1, 2]))
}

/// The two-action, two-outcome instance family on which two-signal direct
/// mechanisms are strictly worse than full revelation.
pub fn gen_prop4(delta: f64) -> Result<Instance> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::pre(format!("delta must lie in (0, 0.5), got {delta}")));
    }
    let mats = vec![
        vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        vec![vec![0.1, 0.9], vec![0.8, 0.2]],
        vec![vec![0.2, 0.8], vec![1.0, 0.0]],
    ];
    let mut inst = Instance::from_dense(
        vec![1.0 - 2.0 * delta, delta, delta],
        vec![0.0, 5.0],
        vec![10.0, 0.0],
        mats,
    )?;
    inst.state_ids = vec!["th1".into(), "th2".into(), "th3".into()];
    inst.action_ids = vec!["a0".into(), "a1".into()];
    inst.outcome_ids = vec!["w1".into(), "w2".into()];
    Ok(inst)
}

/// Parameters of the menu-hardness reduction.
#[derive(Debug, Clone, Copy)]
pub struct MenuHardnessParams {
    /// Independent-set size in the "yes" case: 33|V|/100.
    pub kbar: usize,
    /// Independent-set bound in the "no" case: |V|/9.
    pub khat: usize,
    /// Probability scale 1/(|V|·10^5).
    pub delta: f64,
}

impl MenuHardnessParams {
    pub fn for_vertices(num_vertices: usize) -> Result<Self> {
        if num_vertices == 0 || num_vertices % 900 != 0 {
            return Err(Error::pre(format!(
                "menu-hardness construction needs |V| divisible by 900, got {num_vertices}"
            )));
        }
        Ok(MenuHardnessParams {
            kbar: 33 * num_vertices / 100,
            khat: num_vertices / 9,
            delta: 1.0 / (num_vertices as f64 * 1e5),
        })
    }
}

// Action layout of the menu-hardness instance: a* first, then the hat, bar
// and tilde families, one action per vertex each.
fn mh_a_star() -> usize {
    0
}
fn mh_a_hat(v: usize) -> usize {
    1 + v
}
fn mh_a_bar(nv: usize, v: usize) -> usize {
    1 + nv + v
}
fn mh_a_tilde(nv: usize, v: usize) -> usize {
    1 + 2 * nv + v
}

/// Menu-hardness reduction: one state and one outcome per vertex, plus the
/// reward outcome and a sink outcome; 3|V|+1 actions.
///
/// Rows are assembled as exact integer fractions over the common denominator
/// |V|·10^6 and asserted to sum to exactly one before conversion.
pub fn gen_menu_hardness(g: &Graph) -> Result<Instance> {
    let nv = g.num_vertices;
    let params = MenuHardnessParams::for_vertices(nv)?;
    let n = 3 * nv + 1;
    let m = nv + 2;
    let w_star = nv;
    let w_empty = nv + 1;
    // Common denominator: delta/10 = 1/(|V|·10^6); |V| is a multiple of 4.
    let den: i64 = (nv as i64) * 1_000_000;
    let delta_num: i64 = 10; // delta = 10/den
    let khat_delta = params.khat as i64 * delta_num;

    let adjacency: Vec<Vec<usize>> = (0..nv).map(|v| g.neighbors(v)).collect();
    let mut matrices = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let push = |rows: &mut Vec<Vec<(usize, f64)>>, a: usize, entries: Vec<(usize, i64)>| {
            let sum: i64 = entries.iter().map(|&(_, num)| num).sum();
            assert_eq!(sum, den, "row does not sum to one exactly");
            rows[a] = entries
                .into_iter()
                .filter(|&(_, num)| num != 0)
                .map(|(w, num)| (w, num as f64 / den as f64))
                .collect();
        };
        push(&mut rows, mh_a_star(), vec![
            (w_star, den / 2),
            (v, delta_num),
            (w_empty, den / 2 - delta_num),
        ]);
        for vp in 0..nv {
            let entries = if vp == v {
                vec![
                    (w_star, den / 4),
                    (v, khat_delta),
                    (w_empty, 3 * den / 4 - khat_delta),
                ]
            } else {
                vec![(w_star, den / 4), (w_empty, 3 * den / 4)]
            };
            push(&mut rows, mh_a_hat(vp), entries);
        }
        for vp in 0..nv {
            push(&mut rows, mh_a_bar(nv, vp), vec![
                (vp, 1), // delta/10 = 1/den
                (w_empty, den - 1),
            ]);
        }
        for vp in 0..nv {
            let entries = if vp != v && adjacency[v].binary_search(&vp).is_ok() {
                vec![(vp, den)]
            } else {
                vec![(w_empty, den)]
            };
            push(&mut rows, mh_a_tilde(nv, vp), entries);
        }
        matrices.push(SparseRows::from_entries(&rows, m));
    }

    let mut costs = vec![0.0; n];
    costs[mh_a_star()] = 0.25;
    for v in 0..nv {
        costs[mh_a_hat(v)] = 1.0 / 16.0;
    }
    let mut rewards = vec![0.0; m];
    rewards[w_star] = 1.0;
    let prior = vec![1.0 / nv as f64; nv];

    let state_ids = (0..nv).map(|v| format!("th_v{v}")).collect();
    let mut action_ids = vec!["a_star".to_string()];
    action_ids.extend((0..nv).map(|v| format!("a_hat_v{v}")));
    action_ids.extend((0..nv).map(|v| format!("a_bar_v{v}")));
    action_ids.extend((0..nv).map(|v| format!("a_tilde_v{v}")));
    let mut outcome_ids: Vec<String> = (0..nv).map(|v| format!("w_v{v}")).collect();
    outcome_ids.push("w_star".into());
    outcome_ids.push("w_empty".into());

    Instance::from_parts(
        Some(state_ids),
        Some(action_ids),
        Some(outcome_ids),
        prior,
        costs,
        rewards,
        matrices,
    )
}

/// Exact evaluation of the four-signal completeness mechanism of the
/// menu-hardness reduction.
#[derive(Debug, Clone)]
pub struct MenuHardnessEval {
    /// Posterior-normalized principal utility of each part signal.
    pub per_signal: Vec<f64>,
    /// Agent utility of the high-cost flagship action under a part signal.
    pub agent_star: f64,
    /// Agent utility of the tie deviation (the hat action of a part vertex).
    pub agent_hat: f64,
    /// Total principal utility of the mechanism.
    pub total: f64,
    /// f64 IC violation of the assembled mechanism.
    pub ic_max_violation: f64,
    pub mechanism: Mechanism,
}

/// Builds the reduction's completeness mechanism from three disjoint
/// independent sets of size k̄, verifies incentive compatibility, and
/// reports its exact per-signal and total utilities.
pub fn eval_menu_hardness_mechanism(
    inst: &Instance,
    g: &Graph,
    parts: &[Vec<usize>],
) -> Result<MenuHardnessEval> {
    let nv = g.num_vertices;
    let params = MenuHardnessParams::for_vertices(nv)?;
    if inst.num_states() != nv || inst.num_actions() != 3 * nv + 1 {
        return Err(Error::Dimension("instance does not match the graph".into()));
    }
    if parts.len() != 3 {
        return Err(Error::pre(format!("need exactly 3 parts, got {}", parts.len())));
    }
    let mut seen = vec![false; nv];
    for (i, part) in parts.iter().enumerate() {
        if part.len() != params.kbar {
            return Err(Error::pre(format!(
                "part {i} has {} vertices, expected kbar = {}",
                part.len(),
                params.kbar
            )));
        }
        for &v in part {
            if v >= nv {
                return Err(Error::pre(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::pre(format!("parts are not disjoint at vertex {v}")));
            }
            seen[v] = true;
        }
        if !g.is_independent(part) {
            return Err(Error::pre(format!("part {i} is not an independent set")));
        }
    }

    let m = nv + 2;
    // Payment P = (3/16)·k̄/(δ(k̄−k̂)), built from the instance's own δ so
    // that δ·P cancels exactly in rational arithmetic.
    let delta_lift = rat_from_f64(
        inst.matrices[parts[0][0]]
            .row(mh_a_star())
            .find(|&(w, _)| w == parts[0][0])
            .map(|(_, f)| f)
            .ok_or_else(|| Error::Dimension("flagship row lacks its vertex outcome".into()))?,
    );
    let kbar = rat(params.kbar as i64, 1);
    let khat = rat(params.khat as i64, 1);
    let pay = rat(3, 16) * &kbar / (&delta_lift * (&kbar - &khat));
    let pay_f64 = rat_to_f64(&pay);

    // Scheme: one signal per part, leftovers to the sink signal.
    let mut pi = vec![vec![0.0; 4]; nv];
    for (i, part) in parts.iter().enumerate() {
        for &v in part {
            pi[v][i] = 1.0;
        }
    }
    for row in pi.iter_mut() {
        if row.iter().all(|&x| x == 0.0) {
            row[3] = 1.0;
        }
    }
    let mut payments = Vec::with_capacity(4);
    for part in parts {
        let mut p = vec![0.0; m];
        for &v in part {
            p[v] = pay_f64;
        }
        payments.push(p);
    }
    payments.push(vec![0.0; m]);

    // Exact headline values. Under a part signal the posterior is uniform
    // over the part, so the lifted prior cancels:
    //   agent(a*)   = δ·P − 1/4
    //   agent(â_v)  = (k̂/k̄)·δ·P − 1/16 for part vertices v
    //   principal   = 1/2 − δ·P
    let dp = &delta_lift * &pay;
    let agent_star_rat = &dp - rat(1, 4);
    let agent_hat_rat = &khat / &kbar * &dp - rat(1, 16);
    let per_signal_rat = rat(1, 2) - &dp;
    if agent_star_rat < Rat::zero() {
        return Err(Error::pre(
            "flagship action is not individually rational under the part payments",
        ));
    }

    // Sink-signal recommendation and value, computed numerically.
    let scheme = SignalingScheme::new(
        vec!["s1".into(), "s2".into(), "s3".into(), "s_empty".into()],
        pi,
    );
    let shell = Mechanism::new(scheme, PaymentScheme::Menu { p: payments }, None)?;
    let mut recs = vec![mh_a_star(); 4];
    let sink_post = posterior(inst, &shell.scheme, 3)?;
    let mut sink_value = 0.0;
    if sink_post.total > 0.0 {
        let pays = shell.payments.payments_at_signal(inst, 3);
        recs[3] = crate::model::best_response(inst, &sink_post, &pays)?;
        sink_value = principal_value(inst, &sink_post.mass, &pays, recs[3]);
    }
    let mech = Mechanism::new(shell.scheme, shell.payments, Some(recs))?;

    let report = check_ic(inst, &mech, 1e-9)?;
    if !report.is_ic(1e-9) {
        return Err(Error::pre(format!(
            "completeness mechanism failed the IC check: violation {}",
            report.max_violation
        )));
    }

    // Total = Σ_i Pr[s_i]·per_signal + sink contribution, with Pr[s_i]
    // assembled from the instance's own prior entries.
    let prior_lift: Vec<Rat> = inst.prior.iter().map(|&x| rat_from_f64(x)).collect();
    let mut total_rat = rat_from_f64(sink_value);
    for part in parts {
        let mass: Rat = part.iter().map(|&v| prior_lift[v].clone()).sum();
        total_rat += mass * &per_signal_rat;
    }

    Ok(MenuHardnessEval {
        per_signal: vec![rat_to_f64(&per_signal_rat); 3],
        agent_star: rat_to_f64(&agent_star_rat),
        agent_hat: rat_to_f64(&agent_hat_rat),
        total: rat_to_f64(&total_rat),
        ic_max_violation: report.max_violation,
        mechanism: mech,
    })
}

// Action layout of the single-contract hardness instance: 2N blocks of 5.
fn sh_action(block: usize, t: usize) -> usize {
    5 * block + t
}

/// Single-contract hardness reduction from dominating set on graphs of
/// maximum degree 3: 2N states, 10N actions in 2N blocks of five, N+1
/// outcomes (one per vertex plus a sink). All rows are point masses.
pub fn gen_single_hardness(g: &Graph) -> Result<Instance> {
    if g.max_degree() > 3 {
        return Err(Error::pre(format!(
            "construction needs maximum degree 3, got {}",
            g.max_degree()
        )));
    }
    let nv = g.num_vertices;
    if nv == 0 {
        return Err(Error::pre("empty graph"));
    }
    let num_states = 2 * nv;
    let n = 10 * nv;
    let m = nv + 1;
    let w_bar = nv;

    let mut matrices = Vec::with_capacity(num_states);
    for i in 0..num_states {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![vec![(w_bar, 1.0)]; n];
        if i < nv {
            // Vertex state: its own block maps the padded neighbor slots,
            // the self outcome, and the zero-cost sink action.
            let mut slots = g.neighbors(i);
            while slots.len() < 3 {
                slots.push(i); // dummy neighbor: the vertex itself
            }
            for (t, &dest) in slots.iter().enumerate().take(3) {
                rows[sh_action(i, t)] = vec![(dest, 1.0)];
            }
            rows[sh_action(i, 3)] = vec![(i, 1.0)];
            rows[sh_action(i, 4)] = vec![(w_bar, 1.0)];
        } else {
            // Shadow state: only the block's zero-cost action produces the
            // vertex outcome.
            rows[sh_action(i, 4)] = vec![(i - nv, 1.0)];
        }
        matrices.push(SparseRows::from_entries(&rows, m));
    }

    let mut costs = vec![0.0; n];
    for block in 0..num_states {
        for t in 0..4 {
            costs[sh_action(block, t)] = 0.5;
        }
    }
    let mut rewards = vec![1.0; m];
    rewards[w_bar] = 0.0;
    let prior = vec![1.0 / num_states as f64; num_states];

    let state_ids = (0..num_states).map(|i| format!("th{}", i + 1)).collect();
    let mut action_ids = Vec::with_capacity(n);
    for block in 0..num_states {
        for t in 0..5 {
            action_ids.push(format!("a_{}_{}", block + 1, t + 1));
        }
    }
    let mut outcome_ids: Vec<String> = (0..nv).map(|v| format!("w{}", v + 1)).collect();
    outcome_ids.push("w_bar".into());

    Instance::from_parts(
        Some(state_ids),
        Some(action_ids),
        Some(outcome_ids),
        prior,
        costs,
        rewards,
        matrices,
    )
}

#[derive(Debug, Clone)]
pub struct SingleHardnessEval {
    pub utility: f64,
    pub ic_max_violation: f64,
    pub mechanism: Mechanism,
}

/// Builds full revelation plus the half-payment contract supported on a
/// dominating set, verifies incentive compatibility exactly, and returns
/// the mechanism's utility (equal to 1/2 + 1/4 − |S|/(4N)).
pub fn eval_single_hardness_mechanism(
    inst: &Instance,
    g: &Graph,
    domset: &[usize],
) -> Result<SingleHardnessEval> {
    let nv = g.num_vertices;
    if inst.num_states() != 2 * nv || inst.num_actions() != 10 * nv {
        return Err(Error::Dimension("instance does not match the graph".into()));
    }
    if !g.is_dominating(domset) {
        return Err(Error::pre("the given set is not dominating"));
    }
    let m = nv + 1;
    let mut p = vec![0.0; m];
    for &v in domset {
        if v >= nv {
            return Err(Error::pre(format!("vertex {v} out of range")));
        }
        p[v] = 0.5;
    }

    let exact = ExactInstance::from_instance(inst)?;
    let p_rat: Vec<Rat> = p.iter().map(|&x| rat_from_f64(x)).collect();
    let scheme = SignalingScheme::full_revelation(inst);
    let mut recs = Vec::with_capacity(2 * nv);
    let mut utility_rat = Rat::zero();
    for th in 0..2 * nv {
        let mut mass = vec![Rat::zero(); 2 * nv];
        mass[th] = rat(1, 1);
        let a = exact.best_response(&mass, &p_rat);
        if !exact.ic_slack(&mass, &p_rat, a).is_zero() {
            return Err(Error::pre("exact best response is not incentive compatible"));
        }
        recs.push(a);
        utility_rat +=
            rat_from_f64(inst.prior[th]) * exact.principal_value(&mass, &p_rat, a);
    }
    let mech = Mechanism::new(scheme, PaymentScheme::Single { p }, Some(recs))?;
    let report = check_ic(inst, &mech, 1e-9)?;
    if !report.is_ic(1e-9) {
        return Err(Error::pre(format!(
            "dominating-set mechanism failed the IC check: violation {}",
            report.max_violation
        )));
    }
    Ok(SingleHardnessEval {
        utility: rat_to_f64(&utility_rat),
        ic_max_violation: report.max_violation,
        mechanism: mech,
    })
}

/// Seeded random instance: Dirichlet(1,…,1) rows, increasing-sorted costs
/// with a zero-cost opt-out first, uniform rewards, and a perturbed-uniform
/// prior. Identical seeds give identical instances.
pub fn gen_random(
    n: usize,
    m: usize,
    num_states: usize,
    seed: u64,
    reward_bound: f64,
) -> Result<Instance> {
    if n < 1 || m < 1 || num_states < 1 {
        return Err(Error::pre("need n ≥ 1, m ≥ 1, states ≥ 1"));
    }
    if !(reward_bound >= 0.0) {
        return Err(Error::pre(format!("reward bound must be nonnegative, got {reward_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut prior: Vec<f64> = (0..num_states)
        .map(|_| 1.0 + rng.random_range(-0.5..0.5))
        .collect();
    let total: f64 = prior.iter().sum();
    prior.iter_mut().for_each(|p| *p /= total);
    // Renormalization drift can exceed the 1e-12 validation tolerance; pin
    // the last coordinate.
    let head: f64 = prior[..num_states - 1].iter().sum();
    prior[num_states - 1] = 1.0 - head;

    let mut costs: Vec<f64> = (0..n.saturating_sub(1))
        .map(|_| rng.random_range(0.0..0.5) * reward_bound.max(f64::MIN_POSITIVE))
        .collect();
    costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    costs.insert(0, 0.0);

    let rewards: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=1.0) * reward_bound).collect();

    let mut matrices = Vec::with_capacity(num_states);
    for _ in 0..num_states {
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row: Vec<f64> = (0..m)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= sum);
            let head: f64 = row[..m - 1].iter().sum();
            row[m - 1] = 1.0 - head;
            rows.push(row);
        }
        matrices.push(rows);
    }
    Instance::from_dense(prior, costs, rewards, matrices)
}
