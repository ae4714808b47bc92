//! Regularization parameter choice rules: the discrepancy principle on a
//! fixed parameter ray, the two balancing fixed-point algorithms, the
//! augmented-Tikhonov variant with offsets, a two-step weight adjustment,
//! and an oracle grid search against a known exact solution.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::linalg::{norm2, sub};
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::solver::{solve, SolverOptions};
use crate::value_function::{phi_criterion_from_value, RegParam, ValueEvaluator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIter,
    BracketFail,
}

/// One outer iteration of a choice rule.
#[derive(Debug, Clone)]
pub struct RuleIterate<T> {
    pub eta: RegParam<T>,
    pub phi: T,
    pub psi: Vec<T>,
    /// `Φ_γ(η)` for two-penalty balancing runs, `φ - c_m δ²` for the
    /// discrepancy principle, `F(η)` otherwise.
    pub criterion: T,
    pub f_value: T,
    pub kkt: T,
}

/// Full iterate history of a rule run. The last entry is always evaluated at
/// `final_eta`, and `final_x` is the minimizer the rule computed there (the
/// relevant solution when the inner problem has several minimizers).
#[derive(Debug, Clone)]
pub struct RuleTrace<T> {
    pub iterates: Vec<RuleIterate<T>>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_eta: RegParam<T>,
    pub final_x: Vec<T>,
}

impl<T: Scalar> RuleTrace<T> {
    /// Number of parameter updates performed.
    pub fn updates(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    pub fn last(&self) -> &RuleIterate<T> {
        self.iterates.last().expect("trace is never empty")
    }

    /// Balancing-system residual `max_i |γ η_i ψ_i - φ| / φ` at the final
    /// iterate.
    pub fn balance_residual(&self, gamma: T) -> Option<T> {
        let it = self.iterates.last()?;
        if it.phi == T::zero() {
            return None;
        }
        Some(
            it.eta
                .components()
                .iter()
                .zip(&it.psi)
                .map(|(&e, &p)| (gamma * e * p - it.phi).abs() / it.phi)
                .fold(T::zero(), T::max),
        )
    }
}

/// Shared knobs of the fixed-point rules. The defaults mirror the
/// experiments: start at `1e-3` in every component, stop when the relative
/// change of `η` drops below `1e-3`, give up after 100 updates.
#[derive(Debug, Clone)]
pub struct FixedPointOptions<T> {
    pub eta0: RegParam<T>,
    pub tol: T,
    pub max_iter: usize,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> FixedPointOptions<T> {
    pub fn defaults(n_penalties: usize) -> Self {
        FixedPointOptions {
            eta0: RegParam::new(vec![T::c(1e-3); n_penalties]).unwrap(),
            tol: T::c(1e-3),
            max_iter: 100,
            solver: SolverOptions::default(),
        }
    }
}

/// Iterates stay strictly positive even when the fidelity vanishes.
fn positive_floor<T: Scalar>() -> T {
    T::min_positive_value() * T::c(1e8)
}

/// Ceiling on fixed-point iterates: beyond this the regularization terms
/// drown the normal matrix in floating point and the factorization turns
/// numerically singular.
fn positive_ceiling<T: Scalar>() -> T {
    T::c(1e8)
}

/// Algorithm-I update:
/// `η_i' = (φ + Σ_{j≠i} η_j ψ_j) / ((1+γ) ψ_i)`.
pub fn algorithm_i_update<T: Scalar>(
    gamma: T,
    eta: &[T],
    phi: T,
    psi: &[T],
) -> Result<Vec<T>, CoreError<T>> {
    let cross: T = eta.iter().zip(psi).map(|(&e, &p)| e * p).sum();
    psi.iter()
        .enumerate()
        .map(|(i, &p)| {
            if p == T::zero() {
                return Err(CoreError::DegeneratePenalty { index: i });
            }
            let numer = phi + cross - eta[i] * p;
            Ok((numer / ((T::one() + gamma) * p))
                .max(positive_floor())
                .min(positive_ceiling()))
        })
        .collect()
}

/// Algorithm-II update: `η_i' = φ / (γ ψ_i)`.
pub fn algorithm_ii_update<T: Scalar>(
    gamma: T,
    phi: T,
    psi: &[T],
) -> Result<Vec<T>, CoreError<T>> {
    psi.iter()
        .enumerate()
        .map(|(i, &p)| {
            if p == T::zero() {
                return Err(CoreError::DegeneratePenalty { index: i });
            }
            Ok((phi / (gamma * p)).max(positive_floor()).min(positive_ceiling()))
        })
        .collect()
}

/// Augmented-Tikhonov update: `η_i' = (φ + β₀) / (γ (ψ_i + β))`.
/// With `β = β₀ = 0` this is exactly the Algorithm-II update.
pub fn atikhonov_update<T: Scalar>(
    gamma: T,
    beta: T,
    beta0: T,
    phi: T,
    psi: &[T],
) -> Result<Vec<T>, CoreError<T>> {
    psi.iter()
        .enumerate()
        .map(|(i, &p)| {
            let denom = gamma * (p + beta);
            if denom == T::zero() {
                return Err(CoreError::DegeneratePenalty { index: i });
            }
            Ok(((phi + beta0) / denom).max(positive_floor()).min(positive_ceiling()))
        })
        .collect()
}

/// Which balancing iteration to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceAlgorithm<T> {
    FixedPointI,
    FixedPointII,
    ATikhonov { beta: T, beta0: T },
}

fn criterion_at<T: Scalar>(eta: &RegParam<T>, f_value: T, gamma: T) -> T {
    if eta.len() == 2 {
        phi_criterion_from_value(f_value, eta, gamma).unwrap_or(f_value)
    } else {
        f_value
    }
}

/// Runs one balancing fixed-point iteration until the relative change of
/// `η` drops below tolerance. The trace ends with an evaluation at the final
/// parameter, so the reported balancing residual refers to `final_eta`.
pub fn run_balance<T: Scalar>(
    model: &TikhonovModel<T>,
    algorithm: BalanceAlgorithm<T>,
    gamma: T,
    opts: &FixedPointOptions<T>,
) -> Result<RuleTrace<T>, CoreError<T>> {
    if !(gamma > T::zero()) {
        return Err(CoreError::InvalidInput("gamma must be positive".into()));
    }
    let mut evaluator = ValueEvaluator::with_options(model, opts.solver.clone());
    let mut eta = opts.eta0.clone();
    let mut prev: Option<RegParam<T>> = None;
    let mut iterates = Vec::new();
    let mut updates = 0usize;
    let mut final_x = Vec::new();
    let (converged, stop_reason) = loop {
        let record = evaluator.solve_at(&eta)?;
        final_x = record.x;
        iterates.push(RuleIterate {
            eta: eta.clone(),
            phi: record.phi,
            psi: record.psi.clone(),
            criterion: criterion_at(&eta, record.f_value, gamma),
            f_value: record.f_value,
            kkt: record.kkt_residual,
        });
        if let Some(p) = &prev {
            if eta.relative_change(p) <= opts.tol {
                break (true, StopReason::Tolerance);
            }
        }
        if updates >= opts.max_iter {
            break (false, StopReason::MaxIter);
        }
        let next = match algorithm {
            BalanceAlgorithm::FixedPointI => {
                algorithm_i_update(gamma, eta.components(), record.phi, &record.psi)?
            }
            BalanceAlgorithm::FixedPointII => {
                algorithm_ii_update(gamma, record.phi, &record.psi)?
            }
            BalanceAlgorithm::ATikhonov { beta, beta0 } => {
                atikhonov_update(gamma, beta, beta0, record.phi, &record.psi)?
            }
        };
        prev = Some(std::mem::replace(&mut eta, RegParam::new(next)?));
        updates += 1;
    };
    Ok(RuleTrace { iterates, converged, stop_reason, final_eta: eta, final_x })
}

pub fn balance_fixed_point_i<T: Scalar>(
    model: &TikhonovModel<T>,
    gamma: T,
    opts: &FixedPointOptions<T>,
) -> Result<RuleTrace<T>, CoreError<T>> {
    run_balance(model, BalanceAlgorithm::FixedPointI, gamma, opts)
}

pub fn balance_fixed_point_ii<T: Scalar>(
    model: &TikhonovModel<T>,
    gamma: T,
    opts: &FixedPointOptions<T>,
) -> Result<RuleTrace<T>, CoreError<T>> {
    run_balance(model, BalanceAlgorithm::FixedPointII, gamma, opts)
}

pub fn atikhonov_fixed_point<T: Scalar>(
    model: &TikhonovModel<T>,
    gamma: T,
    beta: T,
    beta0: T,
    opts: &FixedPointOptions<T>,
) -> Result<RuleTrace<T>, CoreError<T>> {
    if beta < T::zero() || beta0 < T::zero() {
        return Err(CoreError::InvalidInput("offsets must be nonnegative".into()));
    }
    run_balance(model, BalanceAlgorithm::ATikhonov { beta, beta0 }, gamma, opts)
}

/// Options for the discrepancy-principle root search.
#[derive(Debug, Clone)]
pub struct DiscrepancyOptions<T> {
    /// Probe range for the ray coordinate `t`.
    pub t_min: T,
    pub t_max: T,
    /// Relative tolerance on `|φ - c_m δ²|`.
    pub tol: T,
    pub max_bisections: usize,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> Default for DiscrepancyOptions<T> {
    fn default() -> Self {
        DiscrepancyOptions {
            t_min: T::c(1e-16),
            t_max: T::c(1e6),
            tol: T::c(1e-3),
            max_bisections: 200,
            solver: SolverOptions::default(),
        }
    }
}

/// Morozov's principle `φ(x_η) = c_m δ²` solved on the ray
/// `η = (ratio · t, t)` by bracketing plus bisection in `log t`; `φ` is
/// monotone along the ray, which is what makes the scalar equation
/// well-posed.
pub fn discrepancy_select<T: Scalar>(
    model: &TikhonovModel<T>,
    delta2: T,
    c_m: T,
    ratio: T,
    opts: &DiscrepancyOptions<T>,
) -> Result<RuleTrace<T>, CoreError<T>> {
    if model.n_penalties() != 2 {
        return Err(CoreError::UnsupportedKind(
            "the discrepancy ray search expects two penalties".into(),
        ));
    }
    if !(delta2 > T::zero()) {
        return Err(CoreError::InvalidInput("noise level must be positive".into()));
    }
    if c_m < T::one() {
        return Err(CoreError::InvalidInput(format!("c_m must be >= 1, got {c_m}")));
    }
    if !(ratio > T::zero()) {
        return Err(CoreError::InvalidInput("ratio must be positive".into()));
    }
    let target = c_m * delta2;
    let mut evaluator = ValueEvaluator::with_options(model, opts.solver.clone());
    let mut iterates: Vec<RuleIterate<T>> = Vec::new();

    let eta_at = |t: T| RegParam::pair(ratio * t, t);
    let probe = |t: T,
                 iterates: &mut Vec<RuleIterate<T>>,
                 evaluator: &mut ValueEvaluator<T>|
     -> Result<T, CoreError<T>> {
        let eta = eta_at(t)?;
        let record = evaluator.solve_at(&eta)?;
        iterates.push(RuleIterate {
            eta,
            phi: record.phi,
            psi: record.psi.clone(),
            criterion: record.phi - target,
            f_value: record.f_value,
            kkt: record.kkt_residual,
        });
        Ok(record.phi)
    };

    let phi_low = probe(opts.t_min, &mut iterates, &mut evaluator)?;
    if phi_low > target * (T::one() + opts.tol) {
        return Err(CoreError::BracketFail { phi_low, phi_high: T::infinity(), target });
    }
    let phi_high = probe(opts.t_max, &mut iterates, &mut evaluator)?;
    if phi_high < target * (T::one() - opts.tol) {
        return Err(CoreError::BracketFail { phi_low, phi_high, target });
    }

    let within = |phi: T| (phi - target).abs() <= opts.tol * target;
    let mut lo = opts.t_min;
    let mut hi = opts.t_max;
    let (mut best_t, mut best_gap) = if (phi_low - target).abs() <= (phi_high - target).abs() {
        (opts.t_min, (phi_low - target).abs())
    } else {
        (opts.t_max, (phi_high - target).abs())
    };
    let mut converged = within(phi_low) || within(phi_high);
    let mut stop_reason = if converged { StopReason::Tolerance } else { StopReason::MaxIter };

    if !converged {
        for _ in 0..opts.max_bisections {
            // geometric midpoint, computed in log space
            let mid = (T::c(0.5) * (lo.ln() + hi.ln())).exp();
            let phi_mid = probe(mid, &mut iterates, &mut evaluator)?;
            let gap = (phi_mid - target).abs();
            if gap < best_gap {
                best_gap = gap;
                best_t = mid;
            }
            if within(phi_mid) {
                converged = true;
                stop_reason = StopReason::Tolerance;
                break;
            }
            if phi_mid < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi / lo) - T::one() <= T::epsilon() * T::c(8.0) {
                break;
            }
        }
    }

    // close the trace with an evaluation at the returned parameter
    let final_eta = eta_at(best_t)?;
    let last_matches = iterates
        .last()
        .map(|it| it.eta == final_eta)
        .unwrap_or(false);
    if !last_matches {
        probe(best_t, &mut iterates, &mut evaluator)?;
    }
    let final_x = evaluator.last_solution().map(|x| x.to_vec()).unwrap_or_default();
    Ok(RuleTrace { iterates, converged, stop_reason, final_eta, final_x })
}

/// Strategy for the second-step adjustment of the balancing weight `γ`.
pub trait GammaUpdate<T: Scalar> {
    fn update(&self, gamma0: T, step1: &RuleTrace<T>) -> T;
    /// Human-readable formula, recorded in experiment metadata.
    fn describe(&self) -> String;
}

/// Keeps `γ` fixed; the two-step procedure then reduces to a single run.
#[derive(Debug, Clone, Default)]
pub struct FixedGamma;

impl<T: Scalar> GammaUpdate<T> for FixedGamma {
    fn update(&self, gamma0: T, _step1: &RuleTrace<T>) -> T {
        gamma0
    }
    fn describe(&self) -> String {
        "gamma = gamma0 (no adjustment)".into()
    }
}

/// Rescales `γ` by a damped power of the ratio between the noise-level
/// estimate `δ_est² = φ(x_η*)` from the first run and the misfit of the very
/// first iterate, clamped to `[2, 10]`. A converged fidelity far below the
/// initial misfit indicates a small noise level, which relaxes the fidelity
/// weight toward the lower clamp; at large noise the weight stays near
/// `γ₀`.
#[derive(Debug, Clone)]
pub struct NoiseLevelGamma<T> {
    pub exponent: T,
    pub clamp: (T, T),
}

impl<T: Scalar> Default for NoiseLevelGamma<T> {
    fn default() -> Self {
        NoiseLevelGamma { exponent: T::c(0.1), clamp: (T::c(2.0), T::c(10.0)) }
    }
}

impl<T: Scalar> GammaUpdate<T> for NoiseLevelGamma<T> {
    fn update(&self, gamma0: T, step1: &RuleTrace<T>) -> T {
        let phi_first = step1.iterates.first().map(|it| it.phi).unwrap_or(T::one());
        let delta2_est = step1.last().phi;
        if delta2_est <= T::zero() || phi_first <= T::zero() {
            return gamma0;
        }
        let gamma = gamma0 * (delta2_est / phi_first).powf(self.exponent);
        gamma.max(self.clamp.0).min(self.clamp.1)
    }
    fn describe(&self) -> String {
        "gamma = clamp(gamma0 * (delta_est^2 / phi(x_1))^0.1, 2, 10) with delta_est^2 = phi(x_eta*)"
            .into()
    }
}

/// Result of the two-step procedure: the adjusted weight, the noise-level
/// estimate from step one, and both traces.
#[derive(Debug, Clone)]
pub struct TwoStepOutcome<T> {
    pub gamma: T,
    pub delta2_estimate: T,
    pub step1: RuleTrace<T>,
    pub trace: RuleTrace<T>,
}

/// Runs the chosen balancing rule at `gamma0`, estimates the noise level from
/// the converged fidelity, adjusts `γ` with `strategy` and reruns from the
/// same initial guess. If the adjusted weight equals `gamma0` the first run
/// is returned unchanged.
pub fn gamma_two_step<T: Scalar>(
    model: &TikhonovModel<T>,
    algorithm: BalanceAlgorithm<T>,
    gamma0: T,
    opts: &FixedPointOptions<T>,
    strategy: &dyn GammaUpdate<T>,
) -> Result<TwoStepOutcome<T>, CoreError<T>> {
    let step1 = run_balance(model, algorithm, gamma0, opts)?;
    let delta2_estimate = step1.last().phi;
    let gamma = strategy.update(gamma0, &step1);
    let trace = if gamma == gamma0 {
        step1.clone()
    } else {
        run_balance(model, algorithm, gamma, opts)?
    };
    Ok(TwoStepOutcome { gamma, delta2_estimate, step1, trace })
}

/// Outcome of an exhaustive parameter scan against the exact solution.
#[derive(Debug, Clone)]
pub struct OracleSearch<T> {
    pub eta_opt: RegParam<T>,
    pub error_opt: T,
    /// Relative error per candidate, in candidate order.
    pub errors: Vec<T>,
    /// Candidates whose inner solve hit the iteration cap; their best
    /// iterates still participate in the scan.
    pub non_converged: usize,
}

/// Evaluates the reconstruction error `‖x_η - x†‖/‖x†‖` for every candidate
/// and returns the argmin (first of equals, so the result is deterministic).
/// Candidates whose inner solve hit the iteration cap are recorded but do
/// not compete: a truncated iterate is not the minimizer the scan ranks.
pub fn oracle_grid_search<T: Scalar>(
    model: &TikhonovModel<T>,
    x_true: &[T],
    candidates: &[RegParam<T>],
    solver: &SolverOptions<T>,
) -> Result<OracleSearch<T>, CoreError<T>> {
    if candidates.is_empty() {
        return Err(CoreError::InvalidInput("oracle search needs at least one candidate".into()));
    }
    let x_norm = norm2(x_true);
    if x_norm == T::zero() {
        return Err(CoreError::InvalidInput("exact solution must be nonzero".into()));
    }

    let chunk = (candidates.len() / (rayon::current_num_threads() * 4)).max(1);
    let chunk_results: Vec<Result<Vec<(T, bool)>, CoreError<T>>> = candidates
        .par_chunks(chunk)
        .map(|part| {
            let mut warm: Option<Vec<T>> = None;
            part.iter()
                .map(|eta| {
                    let opts = solver.clone().with_warm_start(warm.clone());
                    let (x, ok) = match solve(model, eta, &opts) {
                        Ok(rec) => (rec.x, true),
                        Err(CoreError::NotConverged { best, .. }) => (best.x, false),
                        Err(e) => return Err(e),
                    };
                    warm = Some(x.clone());
                    Ok((norm2(&sub(&x, x_true)) / x_norm, ok))
                })
                .collect()
        })
        .collect();

    let mut errors = Vec::with_capacity(candidates.len());
    let mut converged = Vec::with_capacity(candidates.len());
    let mut non_converged = 0usize;
    for r in chunk_results {
        for (e, ok) in r? {
            if !ok {
                non_converged += 1;
            }
            errors.push(e);
            converged.push(ok);
        }
    }
    let eligible = |idx: &usize| non_converged == candidates.len() || converged[*idx];
    let (best_idx, &error_opt) = errors
        .iter()
        .enumerate()
        .filter(|(idx, _)| eligible(idx))
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("errors are comparable"))
        .expect("non-empty");
    Ok(OracleSearch {
        eta_opt: candidates[best_idx].clone(),
        error_opt,
        errors,
        non_converged,
    })
}
