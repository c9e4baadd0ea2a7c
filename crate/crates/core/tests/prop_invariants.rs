//! Property-based invariants over generated inputs.

use proptest::prelude::*;
use sigpact::linear::Grid;
use sigpact::lp::{residual, solve_lp, LpProblem, LpStatus, Relation};
use sigpact::model::SparseRows;

proptest! {
    /// Optimal LP solutions always satisfy the original constraints within
    /// the feasibility tolerance, and repeated solves agree exactly.
    #[test]
    fn lp_optima_are_feasible_and_deterministic(
        n in 1usize..5,
        // Nonnegative right-hand sides keep the origin feasible.
        rows in prop::collection::vec(
            (prop::collection::vec(-1.0f64..1.0, 5), 0.0f64..2.0),
            0..6,
        ),
        objective in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let mut prob = LpProblem::new(n);
        prob.objective = objective[..n].to_vec();
        for (coefs, rhs) in &rows {
            prob.constrain(coefs[..n].to_vec(), Relation::Le, *rhs);
        }
        prob.constrain(vec![1.0; n], Relation::Le, 5.0); // keep it bounded
        let sol = solve_lp(&prob);
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(sol.residual <= 1e-7);
        prop_assert!(residual(&prob, &sol.assignment) <= 1e-7);
        let again = solve_lp(&prob);
        prop_assert!((sol.value - again.value).abs() <= 1e-9);
    }

    /// Share grids are sorted, deduplicated, and span [0, 1].
    #[test]
    fn grids_are_well_formed(eps in 1e-4f64..3.0) {
        let g = Grid::new(eps).unwrap();
        prop_assert_eq!(g.points[0], 0.0);
        prop_assert_eq!(*g.points.last().unwrap(), 1.0);
        prop_assert!(g.points.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.points.iter().all(|&a| (0.0..=1.0).contains(&a)));
    }

    /// Sparse rows faithfully reproduce the dense data they came from.
    #[test]
    fn sparse_rows_round_trip(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 1..5),
    ) {
        let sparse = SparseRows::from_dense(&rows, 4);
        for (i, row) in rows.iter().enumerate() {
            prop_assert_eq!(&sparse.to_dense(i), row);
            let sum: f64 = row.iter().sum();
            prop_assert!((sparse.row_sum(i) - sum).abs() <= 1e-12);
            let weights = [0.3, -1.0, 2.0, 0.25];
            let dense_dot: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum();
            prop_assert!((sparse.dot(i, &weights) - dense_dot).abs() <= 1e-12);
        }
    }
}
