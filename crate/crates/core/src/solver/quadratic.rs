//! Direct solver for all-quadratic objectives via the normal equations
//! `(2KᵀK + Σ η_i G_i) x = 2Kᵀy`.

use crate::error::CoreError;
use crate::linalg::{norm2, sub};
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::value_function::RegParam;

use super::{SolveRecord, SolverOptions};

pub fn solve_quadratic<T: Scalar>(
    model: &TikhonovModel<T>,
    eta: &RegParam<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveRecord<T>, CoreError<T>> {
    let mut a = model.normal_matrix().clone();
    for (p, &e) in model.penalties().iter().zip(eta.components()) {
        a.add_scaled(e, p.quadratic_gram()?);
    }
    let b = model.normal_rhs().to_vec();

    let chol = a.cholesky().map_err(|pivot| CoreError::Singular { pivot })?;
    let mut x = chol.solve(&b);

    let tol = T::c(1e-10) * (T::one() + norm2(&b));
    let mut residual = sub(&a.matvec(&x), &b);
    if norm2(&residual) > tol {
        // one step of iterative refinement with the same factorization
        let correction = chol.solve(&sub(&b, &a.matvec(&x)));
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi = *xi + *ci;
        }
        residual = sub(&a.matvec(&x), &b);
    }
    let kkt = norm2(&residual);

    let trace = if opts.record_objective {
        let phi = model.phi(&x);
        let psi = model.psi(&x)?;
        vec![phi
            + eta
                .components()
                .iter()
                .zip(&psi)
                .map(|(&e, &p)| e * p)
                .sum::<T>()]
    } else {
        Vec::new()
    };
    SolveRecord::assemble(model, eta, x, 0, kkt, tol, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, norm2, sub, Matrix};
    use crate::operators::LinearOperator;
    use crate::penalties::Penalty;
    use crate::rng::SplitMix64;

    fn identity_model(y: Vec<f64>) -> TikhonovModel<f64> {
        let n = y.len();
        let op = LinearOperator::new(Matrix::identity(n)).unwrap();
        TikhonovModel::new(op, y, vec![Penalty::l2(n)]).unwrap()
    }

    #[test]
    fn identity_operator_with_unit_weight_shrinks_by_two_thirds() {
        // minimize (x-y)² + ½x² per component: x = 2y/3
        let y = vec![3.0, -1.5, 0.2];
        let rec = solve_quadratic(
            &identity_model(y.clone()),
            &RegParam::new(vec![1.0]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        for (xi, yi) in rec.x.iter().zip(&y) {
            assert!((xi - 2.0 * yi / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn scalar_case_matches_grid_search() {
        // independent 1-D oracle: brute-force scan of (x-y)² + η·½x²
        let (y, eta) = (3.0f64, 1.0f64);
        let mut best = (f64::INFINITY, 0.0);
        let mut x = -5.0;
        while x <= 5.0 {
            let j = (x - y) * (x - y) + eta * 0.5 * x * x;
            if j < best.0 {
                best = (j, x);
            }
            x += 1e-5;
        }
        let rec = solve_quadratic(
            &identity_model(vec![y]),
            &RegParam::new(vec![eta]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!((rec.x[0] - best.1).abs() <= 2e-5, "{} vs {}", rec.x[0], best.1);
    }

    #[test]
    fn vanishing_weight_recovers_the_unregularized_solution() {
        let mut rng = SplitMix64::new(2);
        let m = Matrix::from_fn(5, 5, |i, j| {
            if i == j {
                3.0 + rng.next_f64()
            } else {
                rng.next_f64() * 0.2
            }
        });
        let y: Vec<f64> = (0..5).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let op = LinearOperator::new(m.clone()).unwrap();
        let model = TikhonovModel::new(op, y.clone(), vec![Penalty::l2(5)]).unwrap();
        let rec = solve_quadratic(
            &model,
            &RegParam::new(vec![1e-12]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        // K x ≈ y
        let residual = sub(&m.matvec(&rec.x), &y);
        assert!(norm2(&residual) <= 1e-9);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let rec = solve_quadratic(
            &identity_model(vec![0.0; 4]),
            &RegParam::new(vec![0.5]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!(max_abs(&rec.x) == 0.0);
        assert_eq!(rec.phi, 0.0);
    }

    #[test]
    fn shared_null_space_reports_singularity() {
        // K annihilates e_2 and so does the H¹-like penalty built to ignore it
        let mut k = Matrix::<f64>::zeros(3, 3);
        k[(0, 0)] = 1.0;
        k[(1, 1)] = 1.0;
        // penalty kernel L that is zero on the last coordinate as well
        let mut l = Matrix::<f64>::zeros(3, 3);
        l[(0, 0)] = 1.0;
        l[(1, 1)] = 1.0;
        let op = LinearOperator::new(k).unwrap();
        let model =
            TikhonovModel::new(op, vec![1.0, 1.0, 1.0], vec![Penalty::quadratic(l)]).unwrap();
        match solve_quadratic(&model, &RegParam::new(vec![1.0]).unwrap(), &Default::default()) {
            Err(CoreError::Singular { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected singularity, got {other:?}"),
        }
    }
}
