//! Accelerated proximal gradient (FISTA) solver for the elastic-net
//! objective `‖Kx - y‖² + a‖x‖₁ + (b/2)‖x‖²`, with restart on objective
//! increase so the accepted iterates decrease monotonically.

use crate::error::CoreError;
use crate::linalg::{norm2, norm2_sq};
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::value_function::RegParam;

use super::{soft_threshold, SolveRecord, SolverOptions};

/// How often the (extra-matvec) subgradient check runs.
const KKT_CHECK_EVERY: usize = 4;

pub fn solve_elastic_net<T: Scalar>(
    model: &TikhonovModel<T>,
    eta: &RegParam<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveRecord<T>, CoreError<T>> {
    let penalties = model.penalties();
    let i_l1 = penalties
        .iter()
        .position(|p| p.is_l1())
        .ok_or_else(|| CoreError::UnsupportedCombination("elastic net needs an l1 penalty".into()))?;
    let i_l2 = penalties
        .iter()
        .position(|p| p.is_l2_identity())
        .ok_or_else(|| {
            CoreError::UnsupportedCombination("elastic net needs an identity-kernel l2 penalty".into())
        })?;
    if i_l1 == i_l2 || penalties.len() != 2 {
        return Err(CoreError::UnsupportedCombination(
            "elastic net expects exactly the pair (l1, l2)".into(),
        ));
    }
    // effective coefficients of ‖x‖₁ and ½‖x‖²
    let a = eta.components()[i_l1] * penalties[i_l1].scale();
    let b = eta.components()[i_l2] * penalties[i_l2].scale();

    let k = model.operator().matrix();
    let y = model.data();
    let n = model.unknowns();

    let lipschitz = T::c(2.0) * model.operator_norm_sq() + b;
    let step = T::one() / lipschitz;

    // reference residual: minimal subgradient norm at x = 0
    let r_ref = {
        let g0 = model.normal_rhs(); // 2Kᵀy; gradient at 0 is its negation
        norm2(&g0.iter().map(|&gi| (gi.abs() - a).max(T::zero())).collect::<Vec<_>>())
    };
    let tol = (opts.tol_elastic_net * r_ref)
        .max(T::epsilon() * T::c(64.0) * (T::one() + r_ref));

    let objective = |x: &[T], kx: &[T]| -> T {
        let resid: T = kx.iter().zip(y).map(|(&p, &d)| (p - d) * (p - d)).sum();
        let l1: T = x.iter().map(|v| v.abs()).sum();
        resid + a * l1 + b * T::c(0.5) * norm2_sq(x)
    };
    // minimal-norm subgradient of the full objective at x, given Kx
    let kkt_at = |x: &[T], kx: &[T]| -> T {
        let resid: Vec<T> = kx.iter().zip(y).map(|(&p, &d)| p - d).collect();
        let kr = k.matvec_t(&resid);
        let mut s = T::zero();
        for i in 0..n {
            let g = T::c(2.0) * kr[i] + b * x[i];
            let v = if x[i] > T::zero() {
                g + a
            } else if x[i] < T::zero() {
                g - a
            } else {
                (g.abs() - a).max(T::zero())
            };
            s = s + v * v;
        }
        s.sqrt()
    };

    let mut x: Vec<T> = match &opts.warm_start {
        Some(w) if w.len() == n => w.clone(),
        Some(w) => {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: w.len(),
                what: "warm start",
            })
        }
        None => vec![T::zero(); n],
    };
    let mut kx = k.matvec(&x);
    let mut x_prev = x.clone();
    let mut kx_prev = kx.clone();
    let mut obj = objective(&x, &kx);
    let mut t_momentum = T::one();
    let mut kkt = kkt_at(&x, &kx);
    let mut trace = Vec::new();
    if opts.record_objective {
        trace.push(obj);
    }

    let mut iterations = 0usize;
    while kkt > tol && iterations < opts.max_iter {
        iterations += 1;

        let t_next = (T::one() + (T::one() + T::c(4.0) * t_momentum * t_momentum).sqrt())
            * T::c(0.5);
        let beta = (t_momentum - T::one()) / t_next;

        // momentum point and its image, by linear combination
        let yv: Vec<T> =
            x.iter().zip(&x_prev).map(|(&c, &p)| c + beta * (c - p)).collect();
        let kyv: Vec<T> =
            kx.iter().zip(&kx_prev).map(|(&c, &p)| c + beta * (c - p)).collect();

        let prox_step = |point: &[T], image: &[T]| -> (Vec<T>, Vec<T>) {
            let resid: Vec<T> = image.iter().zip(y).map(|(&p, &d)| p - d).collect();
            let kr = k.matvec_t(&resid);
            let xn: Vec<T> = (0..n)
                .map(|i| {
                    let g = T::c(2.0) * kr[i] + b * point[i];
                    soft_threshold(point[i] - step * g, step * a)
                })
                .collect();
            let kxn = k.matvec(&xn);
            (xn, kxn)
        };

        let (mut x_new, mut kx_new) = prox_step(&yv, &kyv);
        let mut obj_new = objective(&x_new, &kx_new);
        if obj_new > obj {
            // restart momentum: plain proximal step from the last accepted
            // iterate, which cannot increase the objective at step ≤ 1/L
            t_momentum = T::one();
            let (xr, kxr) = prox_step(&x, &kx);
            x_new = xr;
            kx_new = kxr;
            obj_new = objective(&x_new, &kx_new);
        } else {
            t_momentum = t_next;
        }

        x_prev = std::mem::replace(&mut x, x_new);
        kx_prev = std::mem::replace(&mut kx, kx_new);
        obj = obj.min(obj_new);
        if opts.record_objective {
            trace.push(obj_new);
        }

        if iterations % KKT_CHECK_EVERY == 0 || iterations == opts.max_iter {
            kkt = kkt_at(&x, &kx);
        }
    }

    if kkt > tol {
        kkt = kkt_at(&x, &kx);
    }
    let record = SolveRecord::assemble(model, eta, x, iterations, kkt, tol, trace)?;
    if kkt > tol {
        return Err(CoreError::NotConverged { best: Box::new(record), tol });
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, Matrix};
    use crate::operators::LinearOperator;
    use crate::penalties::Penalty;
    use crate::rng::SplitMix64;

    fn scalar_model(y: f64) -> TikhonovModel<f64> {
        let op = LinearOperator::new(Matrix::identity(1)).unwrap();
        TikhonovModel::new(op, vec![y], vec![Penalty::l1(), Penalty::l2(1)]).unwrap()
    }

    #[test]
    fn scalar_case_matches_grid_search_oracle() {
        // J(x) = (x-3)² + |x| + ½x², scanned over [-5, 5]
        let mut best = (f64::INFINITY, 0.0f64);
        let mut xv = -5.0f64;
        while xv <= 5.0 {
            let j = (xv - 3.0) * (xv - 3.0) + xv.abs() + 0.5 * xv * xv;
            if j < best.0 {
                best = (j, xv);
            }
            xv += 1e-5;
        }
        // subgradient algebra gives x = 5/3
        assert!((best.1 - 5.0 / 3.0).abs() <= 2e-5);

        let rec = solve_elastic_net(
            &scalar_model(3.0),
            &RegParam::new(vec![1.0, 1.0]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!((rec.x[0] - 5.0 / 3.0).abs() <= 1e-9, "{}", rec.x[0]);
    }

    #[test]
    fn zero_data_gives_zero() {
        let rec = solve_elastic_net(
            &scalar_model(0.0),
            &RegParam::new(vec![0.3, 0.2]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(rec.x[0], 0.0);
        assert_eq!(rec.iterations, 0);
    }

    #[test]
    fn large_l1_weight_zeroes_the_solution() {
        let mut rng = SplitMix64::new(9);
        let m = Matrix::from_fn(6, 6, |_, _| rng.next_f64());
        let y: Vec<f64> = (0..6).map(|_| rng.next_f64() * 2.0).collect();
        let op = LinearOperator::new(m.clone()).unwrap();
        let model =
            TikhonovModel::new(op, y.clone(), vec![Penalty::l1(), Penalty::l2(6)]).unwrap();
        // 0 ∈ ∂J(0) iff every |2(Kᵀy)_i| ≤ η₁
        let threshold = 2.0 * max_abs(&m.matvec_t(&y));
        let rec = solve_elastic_net(
            &model,
            &RegParam::new(vec![threshold * 1.01, 0.1]).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert!(max_abs(&rec.x) <= 1e-12, "{:?}", rec.x);
    }

    #[test]
    fn accepted_objectives_decrease_monotonically() {
        let mut rng = SplitMix64::new(4);
        let m = Matrix::from_fn(12, 12, |_, _| rng.next_f64() - 0.4);
        let y: Vec<f64> = (0..12).map(|_| rng.next_f64() * 3.0 - 1.0).collect();
        let op = LinearOperator::new(m).unwrap();
        let model = TikhonovModel::new(op, y, vec![Penalty::l1(), Penalty::l2(12)]).unwrap();
        let opts = SolverOptions { record_objective: true, ..Default::default() };
        let rec = solve_elastic_net(
            &model,
            &RegParam::new(vec![0.05, 0.01]).unwrap(),
            &opts,
        )
        .unwrap();
        for w in rec.objective_trace.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0),
                "objective increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let mut rng = SplitMix64::new(6);
        let m = Matrix::from_fn(15, 15, |_, _| rng.next_f64());
        let y: Vec<f64> = (0..15).map(|_| rng.next_f64()).collect();
        let op = LinearOperator::new(m).unwrap();
        let model = TikhonovModel::new(op, y, vec![Penalty::l1(), Penalty::l2(15)]).unwrap();
        let opts = SolverOptions { max_iter: 3, ..Default::default() };
        match solve_elastic_net(&model, &RegParam::new(vec![1e-4, 1e-6]).unwrap(), &opts) {
            Err(CoreError::NotConverged { best, .. }) => {
                assert_eq!(best.iterations, 3);
                assert!(best.x.iter().all(|v| v.is_finite()));
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn warm_start_from_the_solution_converges_immediately() {
        let model = scalar_model(3.0);
        let eta = RegParam::new(vec![1.0, 1.0]).unwrap();
        let first = solve_elastic_net(&model, &eta, &Default::default()).unwrap();
        let warm = SolverOptions {
            warm_start: Some(first.x.clone()),
            ..Default::default()
        };
        let second = solve_elastic_net(&model, &eta, &warm).unwrap();
        assert!(second.iterations <= 1);
        assert!((second.x[0] - first.x[0]).abs() <= 1e-12);
    }
}
