//! Instance and mechanism file formats: canonical JSON documents that
//! round-trip exactly (shortest-round-trip decimals, fixed key order,
//! sorted matrix keys).

use serde::{Deserialize, Serialize};
use sigpact::model::{Instance, Mechanism, PaymentScheme, SignalingScheme};
use std::collections::BTreeMap;

#[derive(Debug, Serialize, Deserialize)]
pub struct ActionEntry {
    pub cost: f64,
    pub id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub id: String,
    pub reward: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateEntry {
    pub id: String,
    pub prior: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub actions: Vec<ActionEntry>,
    pub matrices: BTreeMap<String, Vec<Vec<f64>>>,
    pub outcomes: Vec<OutcomeEntry>,
    pub states: Vec<StateEntry>,
}

/// Refuse to serialize instances whose dense matrices would be absurd on
/// disk (the 900-vertex reduction instance runs to gigabytes).
const DENSE_FILE_LIMIT: usize = 20_000_000;

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Result<Self, String> {
        let cells = inst.num_states() * inst.num_actions() * inst.num_outcomes();
        if cells > DENSE_FILE_LIMIT {
            return Err(format!(
                "instance needs {cells} dense matrix cells, above the file-format limit {DENSE_FILE_LIMIT}; use the library API for instances of this size"
            ));
        }
        let mut matrices = BTreeMap::new();
        for (th, id) in inst.state_ids.iter().enumerate() {
            let rows: Vec<Vec<f64>> = (0..inst.num_actions())
                .map(|a| inst.matrices[th].to_dense(a))
                .collect();
            if matrices.insert(id.clone(), rows).is_some() {
                return Err(format!("duplicate state id `{id}`"));
            }
        }
        Ok(InstanceFile {
            actions: inst
                .action_ids
                .iter()
                .zip(&inst.costs)
                .map(|(id, &cost)| ActionEntry { cost, id: id.clone() })
                .collect(),
            matrices,
            outcomes: inst
                .outcome_ids
                .iter()
                .zip(&inst.rewards)
                .map(|(id, &reward)| OutcomeEntry { id: id.clone(), reward })
                .collect(),
            states: inst
                .state_ids
                .iter()
                .zip(&inst.prior)
                .map(|(id, &prior)| StateEntry { id: id.clone(), prior })
                .collect(),
        })
    }

    pub fn into_instance(self) -> Result<Instance, String> {
        let state_ids: Vec<String> = self.states.iter().map(|s| s.id.clone()).collect();
        let prior: Vec<f64> = self.states.iter().map(|s| s.prior).collect();
        let action_ids: Vec<String> = self.actions.iter().map(|a| a.id.clone()).collect();
        let costs: Vec<f64> = self.actions.iter().map(|a| a.cost).collect();
        let outcome_ids: Vec<String> = self.outcomes.iter().map(|o| o.id.clone()).collect();
        let rewards: Vec<f64> = self.outcomes.iter().map(|o| o.reward).collect();
        let mut dense = Vec::with_capacity(state_ids.len());
        for id in &state_ids {
            let mat = self
                .matrices
                .get(id)
                .ok_or_else(|| format!("missing matrix for state `{id}`"))?;
            dense.push(mat.clone());
        }
        if self.matrices.len() != state_ids.len() {
            return Err("matrices map contains unknown state ids".into());
        }
        let m = rewards.len();
        let sparse: Vec<sigpact::model::SparseRows> = dense
            .iter()
            .map(|mat| sigpact::model::SparseRows::from_dense(mat, m))
            .collect();
        let inst = Instance::from_parts(
            Some(state_ids),
            Some(action_ids),
            Some(outcome_ids),
            prior,
            costs,
            rewards,
            sparse,
        )
        .map_err(|e| e.to_string())?;
        let violations = inst.validate();
        if !violations.is_empty() {
            return Err(format!(
                "instance violates invariants: {}",
                violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ")
            ));
        }
        Ok(inst)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PaymentsFile {
    Ambiguous { p: Vec<Vec<Vec<f64>>> },
    Menu { p: Vec<Vec<f64>> },
    Single { p: Vec<f64> },
    LinearSingle { alpha: f64 },
    LinearMenu { alpha: Vec<f64> },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SchemeFile {
    pub pi: Vec<Vec<f64>>,
    pub signals: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MechanismFile {
    pub payments: PaymentsFile,
    pub recommendations: Option<Vec<String>>,
    pub scheme: SchemeFile,
}

impl MechanismFile {
    pub fn from_mechanism(inst: &Instance, mech: &Mechanism) -> Self {
        let payments = match &mech.payments {
            PaymentScheme::Ambiguous { p } => PaymentsFile::Ambiguous { p: p.clone() },
            PaymentScheme::Menu { p } => PaymentsFile::Menu { p: p.clone() },
            PaymentScheme::Single { p } => PaymentsFile::Single { p: p.clone() },
            PaymentScheme::LinearSingle { alpha } => {
                PaymentsFile::LinearSingle { alpha: *alpha }
            }
            PaymentScheme::LinearMenu { alpha } => {
                PaymentsFile::LinearMenu { alpha: alpha.clone() }
            }
        };
        MechanismFile {
            payments,
            recommendations: mech.recommendations.as_ref().map(|recs| {
                recs.iter().map(|&a| inst.action_ids[a].clone()).collect()
            }),
            scheme: SchemeFile {
                pi: mech.scheme.pi.clone(),
                signals: mech.scheme.signal_ids.clone(),
            },
        }
    }

    pub fn into_mechanism(self, inst: &Instance) -> Result<Mechanism, String> {
        let payments = match self.payments {
            PaymentsFile::Ambiguous { p } => PaymentScheme::Ambiguous { p },
            PaymentsFile::Menu { p } => PaymentScheme::Menu { p },
            PaymentsFile::Single { p } => PaymentScheme::Single { p },
            PaymentsFile::LinearSingle { alpha } => PaymentScheme::LinearSingle { alpha },
            PaymentsFile::LinearMenu { alpha } => PaymentScheme::LinearMenu { alpha },
        };
        let recommendations = match self.recommendations {
            None => None,
            Some(ids) => {
                let mut recs = Vec::with_capacity(ids.len());
                for id in &ids {
                    let a = inst
                        .action_ids
                        .iter()
                        .position(|x| x == id)
                        .ok_or_else(|| format!("unknown action id `{id}`"))?;
                    recs.push(a);
                }
                Some(recs)
            }
        };
        let scheme = SignalingScheme::new(self.scheme.signals, self.scheme.pi);
        let violations: Vec<String> = scheme
            .validate()
            .into_iter()
            .chain(payments.validate())
            .map(|v| v.to_string())
            .collect();
        if !violations.is_empty() {
            return Err(format!("mechanism violates invariants: {}", violations.join("; ")));
        }
        if scheme.pi.len() != inst.num_states() {
            return Err(format!(
                "scheme has {} state rows, instance has {}",
                scheme.pi.len(),
                inst.num_states()
            ));
        }
        Mechanism::new(scheme, payments, recommendations).map_err(|e| e.to_string())
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
