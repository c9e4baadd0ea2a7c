//! Solver output: mechanism, achieved utility, and diagnostics.

use crate::model::Mechanism;

/// Solver diagnostics attached to every [`SolveReport`].
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Optimum of the LP (relaxation value, grid LP value, or decomposition
    /// value, depending on the solver).
    pub lp_value: Option<f64>,
    /// Residual IC violation of the returned mechanism (unnormalized units).
    pub residual_ic: f64,
    /// Approximation parameters and solver-specific scalars, in insertion
    /// order.
    pub params: Vec<(String, f64)>,
    /// Set when a stated loss bound assumes rewards/costs in [0,1] and the
    /// instance exceeds that; the bound is scaled by max(1, bound_c).
    pub scaled_bound: bool,
    /// Per-grid-point values for grid-search solvers: (α, LP value).
    pub grid_values: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    pub fn push_param(&mut self, key: &str, value: f64) {
        self.params.push((key.to_string(), value));
    }
}

/// A solved mechanism together with its achieved utility and diagnostics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mechanism: Mechanism,
    pub utility: f64,
    pub diagnostics: Diagnostics,
}
