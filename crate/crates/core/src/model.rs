//! Domain types and evaluation primitives: instances, signaling schemes,
//! posteriors, payment schemes, mechanisms, incentive-compatibility checks,
//! and the direct-mechanism merging transform.

use crate::error::{Error, Result};

/// Row-sum tolerance for action-outcome matrices and the prior.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Row-sum tolerance for signaling schemes.
pub const SCHEME_TOL: f64 = 1e-9;
/// Tie tolerance for best responses, in unnormalized (μ·π-weighted) units.
pub const BR_TIE_TOL: f64 = 1e-9;

/// One row of an action-outcome matrix, stored sparse.
///
/// The menu-hardness construction produces instances with thousands of
/// actions whose rows have at most four nonzero entries; storing rows
/// densely would not fit in memory there, and for small instances the
/// overhead is negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    num_rows: usize,
    num_cols: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseRows {
    pub fn from_dense(rows: &[Vec<f64>], num_cols: usize) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        SparseRows { num_rows: rows.len(), num_cols, offsets, cols, vals }
    }

    /// Builds from per-row `(col, value)` entry lists. Entries need not be
    /// sorted; zero entries are dropped.
    pub fn from_entries(rows: &[Vec<(usize, f64)>], num_cols: usize) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in rows {
            let mut entries: Vec<(usize, f64)> =
                row.iter().copied().filter(|&(_, v)| v != 0.0).collect();
            entries.sort_by_key(|&(c, _)| c);
            for (c, v) in entries {
                cols.push(c as u32);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        SparseRows { num_rows: rows.len(), num_cols, offsets, cols, vals }
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    /// Nonzero entries of row `i` as `(outcome, probability)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        self.vals[lo..hi].iter().sum()
    }

    /// Dot product of row `i` with a dense vector over outcomes.
    pub fn dot(&self, i: usize, dense: &[f64]) -> f64 {
        let lo = self.offsets[i];
        let hi = self.offsets[i + 1];
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| v * dense[c as usize])
            .sum()
    }

    pub fn to_dense(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols];
        for (c, v) in self.row(i) {
            out[c] = v;
        }
        out
    }

    /// True if the two rows have identical sparsity patterns and values.
    pub fn rows_equal(&self, i: usize, j: usize) -> bool {
        let (li, hi) = (self.offsets[i], self.offsets[i + 1]);
        let (lj, hj) = (self.offsets[j], self.offsets[j + 1]);
        self.cols[li..hi] == self.cols[lj..hj] && self.vals[li..hi] == self.vals[lj..hj]
    }
}

/// A principal-agent game with hidden states.
///
/// `n` actions (index 0 is the opt-out by convention in all generated
/// instances), `m` outcomes, and per state `θ` a row-stochastic `n × m`
/// matrix whose row `i` is the outcome distribution of action `a_i`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub state_ids: Vec<String>,
    pub action_ids: Vec<String>,
    pub outcome_ids: Vec<String>,
    /// Prior μ over states.
    pub prior: Vec<f64>,
    /// Action costs c, nonnegative.
    pub costs: Vec<f64>,
    /// Outcome rewards r, nonnegative.
    pub rewards: Vec<f64>,
    /// Per-state action-outcome matrices F^θ.
    pub matrices: Vec<SparseRows>,
    /// max(max c, max r); loss bounds stated for [0,1]-normalized data are
    /// scaled by max(1, bound_c) in diagnostics.
    pub bound_c: f64,
}

/// A single invariant violation found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Where the violation sits, e.g. `matrices[th1][2]` or `costs`.
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl Instance {
    /// Builds an instance from dense matrices with default identifiers.
    pub fn from_dense(
        prior: Vec<f64>,
        costs: Vec<f64>,
        rewards: Vec<f64>,
        matrices: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let m = rewards.len();
        let sparse = matrices.iter().map(|mat| SparseRows::from_dense(mat, m)).collect();
        Self::from_parts(None, None, None, prior, costs, rewards, sparse)
    }

    /// Builds an instance from pre-assembled sparse matrices.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        state_ids: Option<Vec<String>>,
        action_ids: Option<Vec<String>>,
        outcome_ids: Option<Vec<String>>,
        prior: Vec<f64>,
        costs: Vec<f64>,
        rewards: Vec<f64>,
        matrices: Vec<SparseRows>,
    ) -> Result<Self> {
        let t = prior.len();
        let n = costs.len();
        let m = rewards.len();
        if matrices.len() != t {
            return Err(Error::Dimension(format!(
                "{} matrices for {} states",
                matrices.len(),
                t
            )));
        }
        for (th, mat) in matrices.iter().enumerate() {
            if mat.num_rows() != n || mat.num_cols() != m {
                return Err(Error::Dimension(format!(
                    "matrix for state {th} is {}x{}, expected {n}x{m}",
                    mat.num_rows(),
                    mat.num_cols()
                )));
            }
        }
        let state_ids =
            state_ids.unwrap_or_else(|| (0..t).map(|i| format!("th{i}")).collect());
        let action_ids =
            action_ids.unwrap_or_else(|| (0..n).map(|i| format!("a{i}")).collect());
        let outcome_ids =
            outcome_ids.unwrap_or_else(|| (0..m).map(|i| format!("w{i}")).collect());
        if state_ids.len() != t || action_ids.len() != n || outcome_ids.len() != m {
            return Err(Error::Dimension("identifier list length".into()));
        }
        let bound_c = costs
            .iter()
            .chain(rewards.iter())
            .fold(0.0_f64, |acc, &v| acc.max(v));
        Ok(Instance {
            state_ids,
            action_ids,
            outcome_ids,
            prior,
            costs,
            rewards,
            matrices,
            bound_c,
        })
    }

    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn num_actions(&self) -> usize {
        self.costs.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.rewards.len()
    }

    /// Expected value of a dense outcome vector under `F^θ_a`.
    pub fn expect(&self, theta: usize, action: usize, dense: &[f64]) -> f64 {
        self.matrices[theta].dot(action, dense)
    }

    /// Expected reward `⟨F^θ_a, r⟩`.
    pub fn expected_reward(&self, theta: usize, action: usize) -> f64 {
        self.matrices[theta].dot(action, &self.rewards)
    }

    /// Checks every instance invariant and returns all violations found.
    ///
    /// Violations are data, not errors: generators and file loaders report
    /// them, tests assert on them.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let prior_sum: f64 = self.prior.iter().sum();
        if (prior_sum - 1.0).abs() > STOCHASTIC_TOL {
            out.push(Violation {
                location: "prior".into(),
                message: format!("sums to {prior_sum}, expected 1"),
            });
        }
        for (i, &p) in self.prior.iter().enumerate() {
            if p < 0.0 {
                out.push(Violation {
                    location: format!("prior[{i}]"),
                    message: format!("negative probability {p}"),
                });
            }
        }
        for (i, &c) in self.costs.iter().enumerate() {
            if c < 0.0 {
                out.push(Violation {
                    location: format!("costs[{i}]"),
                    message: format!("negative cost {c}"),
                });
            }
        }
        if !self.costs.iter().any(|&c| c == 0.0) {
            out.push(Violation {
                location: "costs".into(),
                message: format!(
                    "opt-out cost nonzero: no zero-cost action exists (c[0] = {})",
                    self.costs.first().copied().unwrap_or(f64::NAN)
                ),
            });
        }
        for (j, &r) in self.rewards.iter().enumerate() {
            if r < 0.0 {
                out.push(Violation {
                    location: format!("rewards[{j}]"),
                    message: format!("negative reward {r}"),
                });
            }
        }
        for (th, mat) in self.matrices.iter().enumerate() {
            for a in 0..mat.num_rows() {
                let sum = mat.row_sum(a);
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    out.push(Violation {
                        location: format!("matrices[{}][{a}]", self.state_ids[th]),
                        message: format!("row not stochastic: sums to {sum}"),
                    });
                }
                if mat.row(a).any(|(_, v)| v < 0.0) {
                    out.push(Violation {
                        location: format!("matrices[{}][{a}]", self.state_ids[th]),
                        message: "negative entry".into(),
                    });
                }
            }
        }
        out
    }
}

/// Conditional signal distribution π(s|θ), one row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingScheme {
    pub signal_ids: Vec<String>,
    /// `pi[θ][s]` = π(s|θ); each row sums to 1.
    pub pi: Vec<Vec<f64>>,
}

impl SignalingScheme {
    pub fn new(signal_ids: Vec<String>, pi: Vec<Vec<f64>>) -> Self {
        SignalingScheme { signal_ids, pi }
    }

    /// Full-information revelation: one signal per state.
    pub fn full_revelation(inst: &Instance) -> Self {
        let t = inst.num_states();
        let mut pi = vec![vec![0.0; t]; t];
        for (th, row) in pi.iter_mut().enumerate() {
            row[th] = 1.0;
        }
        SignalingScheme {
            signal_ids: inst.state_ids.iter().map(|s| format!("s_{s}")).collect(),
            pi,
        }
    }

    pub fn num_signals(&self) -> usize {
        self.signal_ids.len()
    }

    pub fn signal_index(&self, id: &str) -> Result<usize> {
        self.signal_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownSignal(id.to_string()))
    }

    /// Probability of sending signal `s` under prior μ.
    pub fn signal_probability(&self, prior: &[f64], s: usize) -> f64 {
        self.pi.iter().zip(prior).map(|(row, &mu)| mu * row[s]).sum()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (th, row) in self.pi.iter().enumerate() {
            if row.len() != self.signal_ids.len() {
                out.push(Violation {
                    location: format!("pi[{th}]"),
                    message: "row length differs from signal count".into(),
                });
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SCHEME_TOL {
                out.push(Violation {
                    location: format!("pi[{th}]"),
                    message: format!("row sums to {sum}, expected 1"),
                });
            }
            if row.iter().any(|&v| v < 0.0) {
                out.push(Violation {
                    location: format!("pi[{th}]"),
                    message: "negative entry".into(),
                });
            }
        }
        out
    }
}

/// Bayesian posterior induced by one signal.
#[derive(Debug, Clone)]
pub struct Posterior {
    /// Index of the signal in the scheme.
    pub signal: usize,
    pub signal_id: String,
    /// Unnormalized mass `x_θ = μ(θ)·π(s|θ)`.
    pub mass: Vec<f64>,
    /// `Q = Σ_θ x_θ`, the probability of the signal.
    pub total: f64,
    /// Normalized belief `x / Q`; `None` when the signal has zero probability.
    pub belief: Option<Vec<f64>>,
}

/// Computes the posterior for signal `s` of `scheme` on `inst`.
pub fn posterior(inst: &Instance, scheme: &SignalingScheme, s: usize) -> Result<Posterior> {
    if s >= scheme.num_signals() {
        return Err(Error::UnknownSignal(format!("#{s}")));
    }
    let mass: Vec<f64> = inst
        .prior
        .iter()
        .zip(&scheme.pi)
        .map(|(&mu, row)| mu * row[s])
        .collect();
    let total: f64 = mass.iter().sum();
    let belief = if total > 0.0 {
        Some(mass.iter().map(|&x| x / total).collect())
    } else {
        None
    };
    Ok(Posterior {
        signal: s,
        signal_id: scheme.signal_ids[s].clone(),
        mass,
        total,
        belief,
    })
}

/// Posterior looked up by signal identifier.
pub fn posterior_by_id(
    inst: &Instance,
    scheme: &SignalingScheme,
    id: &str,
) -> Result<Posterior> {
    posterior(inst, scheme, scheme.signal_index(id)?)
}

/// Outcome-contingent payments, tagged by contract class.
#[derive(Debug, Clone, PartialEq)]
pub enum PaymentScheme {
    /// Per-signal, per-state payment vectors `p^{s,θ}` (the agent never
    /// learns which one applies).
    Ambiguous { p: Vec<Vec<Vec<f64>>> },
    /// One revealed contract per signal, `p^s`.
    Menu { p: Vec<Vec<f64>> },
    /// One revealed contract for all signals.
    Single { p: Vec<f64> },
    /// `p = α·r` with a single share parameter.
    LinearSingle { alpha: f64 },
    /// One share parameter per signal.
    LinearMenu { alpha: Vec<f64> },
}

impl PaymentScheme {
    /// Payment vector applied at `(signal, state)`, materialized dense.
    pub fn payment(&self, inst: &Instance, s: usize, theta: usize) -> Vec<f64> {
        match self {
            PaymentScheme::Ambiguous { p } => p[s][theta].clone(),
            PaymentScheme::Menu { p } => p[s].clone(),
            PaymentScheme::Single { p } => p.clone(),
            PaymentScheme::LinearSingle { alpha } => {
                inst.rewards.iter().map(|&r| alpha * r).collect()
            }
            PaymentScheme::LinearMenu { alpha } => {
                inst.rewards.iter().map(|&r| alpha[s] * r).collect()
            }
        }
    }

    /// Per-state payment vectors for one signal.
    pub fn payments_at_signal(&self, inst: &Instance, s: usize) -> Vec<Vec<f64>> {
        (0..inst.num_states()).map(|th| self.payment(inst, s, th)).collect()
    }

    /// Expands any variant to the fully general ambiguous form over
    /// `num_signals` signals.
    pub fn expand_to_ambiguous(&self, inst: &Instance, num_signals: usize) -> PaymentScheme {
        let p = (0..num_signals)
            .map(|s| self.payments_at_signal(inst, s))
            .collect();
        PaymentScheme::Ambiguous { p }
    }

    /// Number of signals this scheme is indexed by, when signal-indexed.
    pub fn signal_count(&self) -> Option<usize> {
        match self {
            PaymentScheme::Ambiguous { p } => Some(p.len()),
            PaymentScheme::Menu { p } => Some(p.len()),
            PaymentScheme::LinearMenu { alpha } => Some(alpha.len()),
            PaymentScheme::Single { .. } | PaymentScheme::LinearSingle { .. } => None,
        }
    }

    /// All payments nonnegative (limited liability), shares in [0,1].
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |loc: String, v: f64, share: bool| {
            if v < 0.0 || (share && v > 1.0) || !v.is_finite() {
                out.push(Violation {
                    location: loc,
                    message: if share {
                        format!("share {v} outside [0,1]")
                    } else {
                        format!("negative or non-finite payment {v}")
                    },
                });
            }
        };
        match self {
            PaymentScheme::Ambiguous { p } => {
                for (s, per_state) in p.iter().enumerate() {
                    for (th, vec) in per_state.iter().enumerate() {
                        for (w, &v) in vec.iter().enumerate() {
                            check(format!("p[{s}][{th}][{w}]"), v, false);
                        }
                    }
                }
            }
            PaymentScheme::Menu { p } => {
                for (s, vec) in p.iter().enumerate() {
                    for (w, &v) in vec.iter().enumerate() {
                        check(format!("p[{s}][{w}]"), v, false);
                    }
                }
            }
            PaymentScheme::Single { p } => {
                for (w, &v) in p.iter().enumerate() {
                    check(format!("p[{w}]"), v, false);
                }
            }
            PaymentScheme::LinearSingle { alpha } => check("alpha".into(), *alpha, true),
            PaymentScheme::LinearMenu { alpha } => {
                for (s, &a) in alpha.iter().enumerate() {
                    check(format!("alpha[{s}]"), a, true);
                }
            }
        }
        out
    }
}

/// A signaling scheme paired with a payment scheme and optional per-signal
/// action recommendations.
#[derive(Debug, Clone)]
pub struct Mechanism {
    pub scheme: SignalingScheme,
    pub payments: PaymentScheme,
    /// Recommended action index per signal. Required by [`check_ic`] and
    /// [`simulate`](crate::oracle::simulate).
    pub recommendations: Option<Vec<usize>>,
}

impl Mechanism {
    pub fn new(
        scheme: SignalingScheme,
        payments: PaymentScheme,
        recommendations: Option<Vec<usize>>,
    ) -> Result<Self> {
        if let Some(k) = payments.signal_count() {
            if k != scheme.num_signals() {
                return Err(Error::Dimension(format!(
                    "payments indexed by {k} signals, scheme has {}",
                    scheme.num_signals()
                )));
            }
        }
        if let Some(recs) = &recommendations {
            if recs.len() != scheme.num_signals() {
                return Err(Error::Dimension(format!(
                    "{} recommendations for {} signals",
                    recs.len(),
                    scheme.num_signals()
                )));
            }
        }
        Ok(Mechanism { scheme, payments, recommendations })
    }

    pub fn num_signals(&self) -> usize {
        self.scheme.num_signals()
    }

    /// Drops signals that are sent with probability zero under every state.
    /// Utility and IC are unchanged.
    pub fn prune_zero_signals(&self) -> Mechanism {
        let k = self.num_signals();
        let keep: Vec<usize> = (0..k)
            .filter(|&s| self.scheme.pi.iter().any(|row| row[s] != 0.0))
            .collect();
        let scheme = SignalingScheme {
            signal_ids: keep.iter().map(|&s| self.scheme.signal_ids[s].clone()).collect(),
            pi: self
                .scheme
                .pi
                .iter()
                .map(|row| keep.iter().map(|&s| row[s]).collect())
                .collect(),
        };
        let payments = match &self.payments {
            PaymentScheme::Ambiguous { p } => PaymentScheme::Ambiguous {
                p: keep.iter().map(|&s| p[s].clone()).collect(),
            },
            PaymentScheme::Menu { p } => {
                PaymentScheme::Menu { p: keep.iter().map(|&s| p[s].clone()).collect() }
            }
            PaymentScheme::LinearMenu { alpha } => PaymentScheme::LinearMenu {
                alpha: keep.iter().map(|&s| alpha[s]).collect(),
            },
            other => other.clone(),
        };
        let recommendations = self
            .recommendations
            .as_ref()
            .map(|r| keep.iter().map(|&s| r[s]).collect());
        Mechanism { scheme, payments, recommendations }
    }
}

/// Best response to a posterior given per-state payment vectors.
///
/// Maximizes the agent's unnormalized utility
/// `Σ_θ x_θ (⟨F^θ_a, p^θ⟩ − c_a)`; ties within [`BR_TIE_TOL`] are broken in
/// favor of the principal's utility `Σ_θ x_θ ⟨F^θ_a, r − p^θ⟩`, remaining
/// ties by lowest action index.
pub fn best_response(
    inst: &Instance,
    post: &Posterior,
    payments_at_signal: &[Vec<f64>],
) -> Result<usize> {
    if post.total <= 0.0 {
        return Err(Error::ZeroProbabilitySignal(post.signal));
    }
    let (agent, _) = agent_utilities(inst, &post.mass, payments_at_signal);
    let u_max = agent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(usize, f64)> = None;
    for (i, &u) in agent.iter().enumerate() {
        if u < u_max - BR_TIE_TOL {
            continue;
        }
        let v = principal_value(inst, &post.mass, payments_at_signal, i);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    Ok(best.expect("at least one action").0)
}

/// Unnormalized agent utilities for every action, plus the index attaining
/// the maximum (lowest index on exact ties).
pub fn agent_utilities(
    inst: &Instance,
    mass: &[f64],
    payments_at_signal: &[Vec<f64>],
) -> (Vec<f64>, usize) {
    let n = inst.num_actions();
    let mut out = vec![0.0; n];
    for (th, &x) in mass.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let p = &payments_at_signal[th];
        for (i, u) in out.iter_mut().enumerate() {
            *u += x * (inst.expect(th, i, p) - inst.costs[i]);
        }
    }
    let mut argmax = 0;
    for i in 1..n {
        if out[i] > out[argmax] {
            argmax = i;
        }
    }
    (out, argmax)
}

/// Unnormalized principal utility of action `a` at mass `x`.
pub fn principal_value(
    inst: &Instance,
    mass: &[f64],
    payments_at_signal: &[Vec<f64>],
    a: usize,
) -> f64 {
    mass.iter()
        .enumerate()
        .filter(|&(_, &x)| x != 0.0)
        .map(|(th, &x)| {
            x * (inst.expected_reward(th, a) - inst.expect(th, a, &payments_at_signal[th]))
        })
        .sum()
}

/// Expected principal utility of a mechanism:
/// `Σ_θ μ(θ) Σ_s π(s|θ) ⟨F^θ_{a(s)}, r − p^{s,θ}⟩`.
///
/// Uses the mechanism's recommendations when present, otherwise computes
/// best responses per signal. Signals sent with probability zero contribute
/// nothing and are skipped.
pub fn principal_utility(inst: &Instance, mech: &Mechanism) -> Result<f64> {
    if inst.num_states() != mech.scheme.pi.len() {
        return Err(Error::Dimension("scheme state count differs from instance".into()));
    }
    let mut total = 0.0;
    for s in 0..mech.num_signals() {
        let post = posterior(inst, &mech.scheme, s)?;
        if post.total == 0.0 {
            continue;
        }
        let pays = mech.payments.payments_at_signal(inst, s);
        let a = match &mech.recommendations {
            Some(r) => r[s],
            None => best_response(inst, &post, &pays)?,
        };
        if a >= inst.num_actions() {
            return Err(Error::Dimension(format!(
                "recommended action {a} out of range for signal {s}"
            )));
        }
        total += principal_value(inst, &post.mass, &pays, a);
    }
    Ok(total)
}

/// Per-signal incentive-compatibility diagnostics.
#[derive(Debug, Clone)]
pub struct SignalIc {
    pub signal: usize,
    pub signal_id: String,
    pub recommended: usize,
    /// Deviation with the largest gain over the recommendation.
    pub worst_deviation: usize,
    /// Unnormalized `max_i u_i − u_rec`; positive means the recommendation
    /// is not a best response.
    pub slack: f64,
    /// Unnormalized agent utility of the recommended action.
    pub agent_utility: f64,
}

/// Result of [`check_ic`]. The mechanism is ε-IC iff `max_violation ≤ ε`.
#[derive(Debug, Clone)]
pub struct ICReport {
    /// Worst IC slack over all (signal, deviation) pairs, unnormalized.
    /// Zero when every signal is exempt.
    pub max_violation: f64,
    pub per_signal: Vec<SignalIc>,
    /// Every considered signal gives the agent utility ≥ −tol.
    pub ir_ok: bool,
}

impl ICReport {
    pub fn is_ic(&self, eps: f64) -> bool {
        self.max_violation <= eps
    }
}

/// Checks incentive compatibility of a mechanism's recommendations.
///
/// Comparisons use unnormalized (μ·π-weighted) utilities, matching the IC
/// constraint rows of the design programs; signals with probability ≤ `tol`
/// carry vacuous constraints and are exempt.
pub fn check_ic(inst: &Instance, mech: &Mechanism, tol: f64) -> Result<ICReport> {
    let recs = mech
        .recommendations
        .as_ref()
        .ok_or(Error::MissingRecommendations)?;
    let mut per_signal = Vec::new();
    let mut max_violation: Option<f64> = None;
    let mut ir_ok = true;
    for s in 0..mech.num_signals() {
        let post = posterior(inst, &mech.scheme, s)?;
        if post.total <= tol {
            continue;
        }
        let pays = mech.payments.payments_at_signal(inst, s);
        let (agent, argmax) = agent_utilities(inst, &post.mass, &pays);
        let rec = recs[s];
        let u_rec = agent[rec];
        let slack = agent[argmax] - u_rec;
        max_violation = Some(max_violation.map_or(slack, |v| v.max(slack)));
        if u_rec < -tol {
            ir_ok = false;
        }
        per_signal.push(SignalIc {
            signal: s,
            signal_id: mech.scheme.signal_ids[s].clone(),
            recommended: rec,
            worst_deviation: argmax,
            slack,
            agent_utility: u_rec,
        });
    }
    Ok(ICReport {
        max_violation: max_violation.unwrap_or(0.0),
        per_signal,
        ir_ok,
    })
}

/// Merges signals that induce the same best response into one, preserving
/// utility and incentive compatibility.
///
/// Ambiguous payments are mixed with weights `π(s_k|θ)/π(s|θ)`; explicit
/// menus are only merged when the contracts coincide, since merging distinct
/// menu contracts is lossy; linear menus merge only signals with equal share
/// parameters. The output has at most `n` signals for ambiguous and single
/// schemes.
pub fn make_direct(inst: &Instance, mech: &Mechanism) -> Result<Mechanism> {
    let recs = mech
        .recommendations
        .as_ref()
        .ok_or(Error::MissingRecommendations)?;
    let k = mech.num_signals();
    let t = inst.num_states();

    // Group signals by merge key: recommended action, refined per class.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut key_of: Vec<(usize, u64)> = Vec::new();
    for s in 0..k {
        let sub = match &mech.payments {
            PaymentScheme::LinearMenu { alpha } => alpha[s].to_bits(),
            _ => 0,
        };
        let key = (recs[s], sub);
        match key_of.iter().position(|&kk| kk == key) {
            Some(g) => {
                if let PaymentScheme::Menu { p } = &mech.payments {
                    let first = groups[g][0];
                    if p[first] != p[s] {
                        return Err(Error::MenuMergeConflict(first, s));
                    }
                }
                groups[g].push(s);
            }
            None => {
                key_of.push(key);
                groups.push(vec![s]);
            }
        }
    }

    let mut signal_ids = Vec::with_capacity(groups.len());
    let mut pi = vec![vec![0.0; groups.len()]; t];
    let mut new_recs = Vec::with_capacity(groups.len());
    for (g, members) in groups.iter().enumerate() {
        signal_ids.push(mech.scheme.signal_ids[members[0]].clone());
        new_recs.push(recs[members[0]]);
        for th in 0..t {
            pi[th][g] = members.iter().map(|&s| mech.scheme.pi[th][s]).sum();
        }
    }

    let payments = match &mech.payments {
        PaymentScheme::Ambiguous { p } => {
            let mut merged = Vec::with_capacity(groups.len());
            for (g, members) in groups.iter().enumerate() {
                let mut per_state = Vec::with_capacity(t);
                for th in 0..t {
                    let denom = pi[th][g];
                    let m = inst.num_outcomes();
                    let mut vec = vec![0.0; m];
                    if denom > 0.0 {
                        for &s in members {
                            let w = mech.scheme.pi[th][s] / denom;
                            if w == 0.0 {
                                continue;
                            }
                            for (j, v) in vec.iter_mut().enumerate() {
                                *v += w * p[s][th][j];
                            }
                        }
                    }
                    per_state.push(vec);
                }
                merged.push(per_state);
            }
            PaymentScheme::Ambiguous { p: merged }
        }
        PaymentScheme::Menu { p } => PaymentScheme::Menu {
            p: groups.iter().map(|members| p[members[0]].clone()).collect(),
        },
        PaymentScheme::LinearMenu { alpha } => PaymentScheme::LinearMenu {
            alpha: groups.iter().map(|members| alpha[members[0]]).collect(),
        },
        other => other.clone(),
    };

    Mechanism::new(
        SignalingScheme { signal_ids, pi },
        payments,
        Some(new_recs),
    )
}
