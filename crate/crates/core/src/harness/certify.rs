//! Numerical certification of the value-function theory on the benchmark
//! problems: derivative sandwich checks, small-parameter asymptotics, and
//! the grid monotonicity/concavity reports.

use crate::error::CoreError;
use crate::model::TikhonovModel;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;
use crate::solver::SolverOptions;
use crate::value_function::{RegParam, ValueEvaluator};

use super::examples::QuadraticToy;

/// Log-uniform random parameter points in `[lo, hi]^dim`.
pub fn random_eta_points<T: Scalar>(
    count: usize,
    lo: T,
    hi: T,
    dim: usize,
    seed: u64,
) -> Vec<RegParam<T>> {
    let mut rng = SplitMix64::new(seed);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| {
            let components: Vec<T> = (0..dim)
                .map(|_| (llo + (lhi - llo) * T::c(rng.next_f64())).exp())
                .collect();
            RegParam::new(components).unwrap()
        })
        .collect()
}

/// One sandwich check `∂⁺_i F - tol ≤ ψ_i ≤ ∂⁻_i F + tol` at a parameter
/// point, with the one-sided derivatives estimated by finite differences.
#[derive(Debug, Clone)]
pub struct SandwichPoint<T> {
    pub eta: RegParam<T>,
    pub psi: Vec<T>,
    pub grad_plus: Vec<T>,
    pub grad_minus: Vec<T>,
    pub ok: bool,
}

/// Runs the sandwich check at each point with tolerance `tol_rel · ψ_i`.
pub fn sandwich_check<T: Scalar>(
    model: &TikhonovModel<T>,
    points: &[RegParam<T>],
    h_rel: T,
    tol_rel: T,
    solver: &SolverOptions<T>,
) -> Result<Vec<SandwichPoint<T>>, CoreError<T>> {
    let mut evaluator = ValueEvaluator::with_options(model, solver.clone());
    points
        .iter()
        .map(|eta| {
            let sample = evaluator.eval(eta)?;
            let (grad_plus, grad_minus) = evaluator.fd_partials(eta, h_rel)?;
            let ok = sample.psi.iter().enumerate().all(|(i, &psi)| {
                let tol = tol_rel * psi;
                grad_plus[i] - tol <= psi && psi <= grad_minus[i] + tol
            });
            Ok(SandwichPoint { eta: eta.clone(), psi: sample.psi, grad_plus, grad_minus, ok })
        })
        .collect()
}

/// Small-parameter behavior along the diagonal ray `η = (t, t)` of the
/// all-quadratic toy: the gap `|F(t,t) - min φ|` and the largest scaled
/// derivative `t · ∂F` at each probe value.
#[derive(Debug, Clone)]
pub struct AsymptoticsCheck<T> {
    pub probes: Vec<T>,
    pub value_gaps: Vec<T>,
    pub scaled_gradients: Vec<T>,
    pub min_phi: T,
}

pub fn asymptotics_check<T: Scalar>(
    toy: &QuadraticToy<T>,
    probes: &[T],
    h_rel: T,
) -> Result<AsymptoticsCheck<T>, CoreError<T>> {
    let mut evaluator = ValueEvaluator::new(&toy.model);
    let mut value_gaps = Vec::with_capacity(probes.len());
    let mut scaled_gradients = Vec::with_capacity(probes.len());
    for &t in probes {
        let eta = RegParam::pair(t, t)?;
        let sample = evaluator.eval(&eta)?;
        value_gaps.push((sample.f_value - toy.min_phi).abs());
        let (gp, gm) = evaluator.fd_partials(&eta, h_rel)?;
        let grad_max = gp
            .iter()
            .chain(gm.iter())
            .map(|g| g.abs())
            .fold(T::zero(), T::max);
        scaled_gradients.push(t * grad_max);
    }
    Ok(AsymptoticsCheck {
        probes: probes.to_vec(),
        value_gaps,
        scaled_gradients,
        min_phi: toy.min_phi,
    })
}
