//! Operator-splitting (ADMM) solver for quadratic-plus-TV objectives
//! `‖Kx - y‖² + η₁ ψ_quad(x) + η₂ |x|_TV` on the split variable `z = Dx`.

use crate::error::CoreError;
use crate::linalg::{difference_gram, norm2, Matrix};
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::value_function::RegParam;

use super::{soft_threshold, SolveRecord, SolverOptions};

/// Residual-balancing check cadence.
const RHO_ADAPT_EVERY: usize = 10;
const MAX_RHO_ADAPTATIONS: usize = 40;

/// `D x` for the forward-difference matrix, without forming `D`.
fn diff<T: Scalar>(x: &[T]) -> Vec<T> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// `Dᵀ v`.
fn diff_t<T: Scalar>(v: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (i, &vi) in v.iter().enumerate() {
        out[i] = out[i] - vi;
        out[i + 1] = out[i + 1] + vi;
    }
    out
}

pub fn solve_h1_tv<T: Scalar>(
    model: &TikhonovModel<T>,
    eta: &RegParam<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveRecord<T>, CoreError<T>> {
    let penalties = model.penalties();
    let i_quad = penalties
        .iter()
        .position(|p| p.is_quadratic())
        .ok_or_else(|| {
            CoreError::UnsupportedCombination("splitting solver needs a quadratic penalty".into())
        })?;
    let i_tv = penalties
        .iter()
        .position(|p| p.is_tv1d())
        .ok_or_else(|| {
            CoreError::UnsupportedCombination("splitting solver needs a tv penalty".into())
        })?;
    if penalties.len() != 2 || i_quad == i_tv {
        return Err(CoreError::UnsupportedCombination(
            "splitting solver expects exactly the pair (quadratic, tv)".into(),
        ));
    }

    let n = model.unknowns();
    if n < 2 {
        return Err(CoreError::InvalidInput("tv penalty needs at least two unknowns".into()));
    }
    let eta_quad = eta.components()[i_quad];
    let w_tv = eta.components()[i_tv] * penalties[i_tv].scale();

    // fixed part of the normal matrix: 2KᵀK + η_quad · G
    let mut base = model.normal_matrix().clone();
    base.add_scaled(eta_quad, penalties[i_quad].quadratic_gram()?);
    let dtd: Matrix<T> = difference_gram(n);
    let b0 = model.normal_rhs();

    let factorize = |rho: T| -> Result<crate::linalg::Cholesky<T>, CoreError<T>> {
        let mut m = base.clone();
        m.add_scaled(rho, &dtd);
        m.cholesky().map_err(|pivot| CoreError::Singular { pivot })
    };

    let mut rho = opts.rho0;
    let mut chol = factorize(rho)?;

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
    let mut z = diff(&x);
    let mut u = vec![T::zero(); n - 1];

    let tol = opts.tol_splitting;
    let sqrt_m = T::from_usize(n - 1).unwrap().sqrt();
    let sqrt_n = T::from_usize(n).unwrap().sqrt();

    let objective = |x: &[T]| -> T {
        let quad = penalties[i_quad].evaluate(x).unwrap_or_else(|_| T::nan());
        let tvv: T = diff(x).iter().map(|v| v.abs()).sum();
        model.phi(x) + eta_quad * quad + w_tv * tvv
    };

    let mut trace = Vec::new();
    let mut adaptations = 0usize;
    let mut kkt = T::infinity();
    let mut iterations = 0usize;

    while iterations < opts.max_iter {
        iterations += 1;

        // x-update: (2KᵀK + η_quad G + ρ DᵀD) x = 2Kᵀy + ρ Dᵀ(z - u)
        let v: Vec<T> = z.iter().zip(&u).map(|(&zi, &ui)| zi - ui).collect();
        let mut rhs = diff_t(&v, n);
        for (r, &b) in rhs.iter_mut().zip(b0) {
            *r = *r * rho + b;
        }
        x = chol.solve(&rhs);

        let dx = diff(&x);
        let z_old = std::mem::replace(
            &mut z,
            dx.iter()
                .zip(&u)
                .map(|(&d, &ui)| soft_threshold(d + ui, w_tv / rho))
                .collect(),
        );
        for ((ui, &d), &zi) in u.iter_mut().zip(&dx).zip(&z) {
            *ui = *ui + d - zi;
        }

        let primal: T = norm2(&dx.iter().zip(&z).map(|(&d, &zi)| d - zi).collect::<Vec<_>>());
        let dz: Vec<T> = z.iter().zip(&z_old).map(|(&a, &b)| a - b).collect();
        let dual = rho * norm2(&diff_t(&dz, n));

        let scaled_dual_norm = rho * norm2(&diff_t(&u, n));
        let eps_pri = sqrt_m * tol + tol * norm2(&dx).max(norm2(&z));
        let eps_dual = sqrt_n * tol + tol * scaled_dual_norm;

        if opts.record_objective {
            trace.push(objective(&x));
        }

        // residual in units of its own tolerance, worst of the two
        kkt = (primal / eps_pri).max(dual / eps_dual) * tol;
        if primal <= eps_pri && dual <= eps_dual {
            break;
        }

        if opts.adapt_rho
            && iterations % RHO_ADAPT_EVERY == 0
            && adaptations < MAX_RHO_ADAPTATIONS
        {
            let ten = T::c(10.0);
            if primal > ten * dual {
                rho = rho * T::c(2.0);
                for ui in u.iter_mut() {
                    *ui = *ui * T::c(0.5);
                }
                chol = factorize(rho)?;
                adaptations += 1;
            } else if dual > ten * primal {
                rho = rho * T::c(0.5);
                for ui in u.iter_mut() {
                    *ui = *ui * T::c(2.0);
                }
                chol = factorize(rho)?;
                adaptations += 1;
            }
        }
    }

    let converged = kkt <= tol;
    let record = SolveRecord::assemble(model, eta, x, iterations, kkt, tol, trace)?;
    if !converged {
        return Err(CoreError::NotConverged { best: Box::new(record), tol });
    }
    Ok(record)
}
