//! Exact rational evaluation for small instances.
//!
//! Closed-form values from the hardness constructions are fractions like
//! 685/3152; evaluating them in floating point cannot certify exactness.
//! This module lifts instance data (every f64 is a dyadic rational) into
//! `BigRational` and evaluates posteriors, best responses, and utilities
//! without rounding.

use crate::error::{Error, Result};
use crate::model::Instance;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact lift; every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_f64(x).expect("finite float")
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().expect("rational fits in f64 range")
}

/// A fully rational mirror of an [`Instance`], with sparse rows.
#[derive(Debug, Clone)]
pub struct ExactInstance {
    pub prior: Vec<Rat>,
    pub costs: Vec<Rat>,
    pub rewards: Vec<Rat>,
    /// rows[θ][a] = nonzero (outcome, probability) pairs.
    pub rows: Vec<Vec<Vec<(usize, Rat)>>>,
}

/// Guard against accidentally lifting huge instances into BigRational.
const EXACT_ENTRY_LIMIT: usize = 2_000_000;

impl ExactInstance {
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let t = inst.num_states();
        let n = inst.num_actions();
        let mut entries = 0usize;
        let mut rows = Vec::with_capacity(t);
        for th in 0..t {
            let mut per_state = Vec::with_capacity(n);
            for a in 0..n {
                let row: Vec<(usize, Rat)> = inst.matrices[th]
                    .row(a)
                    .map(|(w, f)| (w, rat_from_f64(f)))
                    .collect();
                entries += row.len();
                if entries > EXACT_ENTRY_LIMIT {
                    return Err(Error::pre(
                        "instance too large for exact-rational evaluation",
                    ));
                }
                per_state.push(row);
            }
            rows.push(per_state);
        }
        Ok(ExactInstance {
            prior: inst.prior.iter().map(|&x| rat_from_f64(x)).collect(),
            costs: inst.costs.iter().map(|&x| rat_from_f64(x)).collect(),
            rewards: inst.rewards.iter().map(|&x| rat_from_f64(x)).collect(),
            rows,
        })
    }

    pub fn expect(&self, theta: usize, action: usize, dense: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (w, f) in &self.rows[theta][action] {
            acc += f * &dense[*w];
        }
        acc
    }

    pub fn expected_reward(&self, theta: usize, action: usize) -> Rat {
        self.expect(theta, action, &self.rewards)
    }

    /// Unnormalized agent utility of `action` at rational mass `x`.
    pub fn agent_utility(&self, mass: &[Rat], payment: &[Rat], action: usize) -> Rat {
        let mut acc = Rat::zero();
        for (th, x) in mass.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            acc += x * (self.expect(th, action, payment) - &self.costs[action]);
        }
        acc
    }

    /// Unnormalized principal utility of `action` at rational mass `x`.
    pub fn principal_value(&self, mass: &[Rat], payment: &[Rat], action: usize) -> Rat {
        let mut acc = Rat::zero();
        for (th, x) in mass.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            acc +=
                x * (self.expected_reward(th, action) - self.expect(th, action, payment));
        }
        acc
    }

    /// Exact best response: maximize agent utility, break ties by principal
    /// utility, then by lowest index.
    pub fn best_response(&self, mass: &[Rat], payment: &[Rat]) -> usize {
        let n = self.costs.len();
        let mut best: Option<(usize, Rat, Rat)> = None;
        for a in 0..n {
            let u = self.agent_utility(mass, payment, a);
            let replace = match &best {
                None => true,
                Some((_, bu, bv)) => {
                    u > *bu || (u == *bu && self.principal_value(mass, payment, a) > *bv)
                }
            };
            if replace {
                let v = self.principal_value(mass, payment, a);
                best = Some((a, u, v));
            }
        }
        best.expect("at least one action").0
    }

    /// Worst IC slack of recommending `rec` at mass `x`: positive means a
    /// deviation strictly beats the recommendation. Always ≥ 0 since the
    /// recommendation itself gains nothing over itself.
    pub fn ic_slack(&self, mass: &[Rat], payment: &[Rat], rec: usize) -> Rat {
        let u_rec = self.agent_utility(mass, payment, rec);
        let mut worst = Rat::zero();
        for a in 0..self.costs.len() {
            let gain = self.agent_utility(mass, payment, a) - &u_rec;
            if gain > worst {
                worst = gain;
            }
        }
        worst
    }
}

pub fn rat_abs_diff(a: &Rat, b: &Rat) -> Rat {
    (a - b).abs()
}
