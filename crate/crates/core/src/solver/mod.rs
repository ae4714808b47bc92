//! Inner solvers for `x_η = argmin ‖Kx - y‖² + Σ η_i ψ_i(x)`, one per
//! supported penalty family, plus the dispatcher that picks the right one.

mod elastic_net;
mod quadratic;
mod splitting;

pub use elastic_net::solve_elastic_net;
pub use quadratic::solve_quadratic;
pub use splitting::solve_h1_tv;

use crate::error::CoreError;
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::value_function::RegParam;

/// Converged minimizer together with the functional values at it and the
/// solver diagnostics.
#[derive(Debug, Clone)]
pub struct SolveRecord<T> {
    pub x: Vec<T>,
    /// `‖Kx - y‖²`.
    pub phi: T,
    /// Penalty values `ψ_i(x)` in model order.
    pub psi: Vec<T>,
    /// Objective value `φ + Σ η_i ψ_i`.
    pub f_value: T,
    pub iterations: usize,
    /// Optimality residual; its meaning is solver-specific (normal-equation
    /// residual, minimal subgradient norm, or ADMM primal/dual residual).
    pub kkt_residual: T,
    /// The tolerance the solver compared `kkt_residual` against.
    pub kkt_tolerance: T,
    /// Objective value per accepted iterate; filled only when
    /// `SolverOptions::record_objective` is set.
    pub objective_trace: Vec<T>,
}

impl<T: Scalar> SolveRecord<T> {
    /// Builds a record from a solution vector, evaluating `φ`, `ψ` and `F`
    /// with the same routines every caller uses.
    pub(crate) fn assemble(
        model: &TikhonovModel<T>,
        eta: &RegParam<T>,
        x: Vec<T>,
        iterations: usize,
        kkt_residual: T,
        kkt_tolerance: T,
        objective_trace: Vec<T>,
    ) -> Result<Self, CoreError<T>> {
        let phi = model.phi(&x);
        let psi = model.psi(&x)?;
        let f_value = phi
            + eta
                .components()
                .iter()
                .zip(&psi)
                .map(|(&e, &p)| e * p)
                .sum::<T>();
        Ok(SolveRecord {
            x,
            phi,
            psi,
            f_value,
            iterations,
            kkt_residual,
            kkt_tolerance,
            objective_trace,
        })
    }
}

/// Knobs shared by the iterative solvers. The defaults keep the inner
/// problems at least two orders of magnitude tighter than any outer stopping
/// rule, so rule behavior is solver-noise-free.
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    /// Relative tolerance on the minimal-subgradient norm (proximal path).
    pub tol_elastic_net: T,
    /// Relative tolerance on the ADMM primal/dual residuals.
    pub tol_splitting: T,
    pub max_iter: usize,
    /// Initial ADMM penalty parameter.
    pub rho0: T,
    /// Residual-balancing adaptation of `rho`.
    pub adapt_rho: bool,
    pub warm_start: Option<Vec<T>>,
    pub record_objective: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol_elastic_net: T::c(1e-10),
            tol_splitting: T::c(1e-8),
            max_iter: 50_000,
            rho0: T::one(),
            adapt_rho: true,
            warm_start: None,
            record_objective: false,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn with_warm_start(mut self, x0: Option<Vec<T>>) -> Self {
        self.warm_start = x0;
        self
    }
}

pub(crate) fn soft_threshold<T: Scalar>(v: T, k: T) -> T {
    if v > k {
        v - k
    } else if v < -k {
        v + k
    } else {
        T::zero()
    }
}

/// Solves the Tikhonov problem, dispatching on the penalty combination:
/// all-quadratic (direct normal equations), `ℓ¹` + `½ℓ²` (accelerated
/// proximal gradient), or quadratic + 1-D TV (operator splitting).
pub fn solve<T: Scalar>(
    model: &TikhonovModel<T>,
    eta: &RegParam<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveRecord<T>, CoreError<T>> {
    let penalties = model.penalties();
    if eta.len() != penalties.len() {
        return Err(CoreError::DimensionMismatch {
            expected: penalties.len(),
            got: eta.len(),
            what: "regularization parameter",
        });
    }

    if penalties.iter().all(|p| p.is_quadratic()) {
        return solve_quadratic(model, eta, opts);
    }

    if penalties.len() == 2 {
        let l1 = penalties.iter().position(|p| p.is_l1());
        let l2 = penalties.iter().position(|p| p.is_l2_identity());
        if let (Some(i), Some(j)) = (l1, l2) {
            if i != j {
                return solve_elastic_net(model, eta, opts);
            }
        }
        let quad = penalties.iter().position(|p| p.is_quadratic());
        let tv = penalties.iter().position(|p| p.is_tv1d());
        if let (Some(i), Some(j)) = (quad, tv) {
            if i != j {
                return solve_h1_tv(model, eta, opts);
            }
        }
    }

    Err(CoreError::UnsupportedCombination(format!(
        "penalties ({}) are not one of: all quadratic; l1 + l2; quadratic + tv",
        penalties.iter().map(|p| p.label().to_string()).collect::<Vec<_>>().join(", ")
    )))
}
