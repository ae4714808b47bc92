//! The value function `F(η) = inf_x J_η(x)`, its one-sided finite-difference
//! partials, the balancing criteria `Φ_γ` and `Ψ_γ`, and numerical
//! certification of monotonicity/concavity on parameter grids.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::model::TikhonovModel;
use crate::scalar::Scalar;
use crate::solver::{solve, SolveRecord, SolverOptions};

/// Strictly positive regularization parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RegParam<T> {
    eta: Vec<T>,
}

impl<T: Scalar> RegParam<T> {
    pub fn new(eta: Vec<T>) -> Result<Self, CoreError<T>> {
        if eta.is_empty() {
            return Err(CoreError::InvalidInput("empty regularization parameter".into()));
        }
        for (i, &e) in eta.iter().enumerate() {
            if !(e > T::zero()) || !e.is_finite() {
                return Err(CoreError::InvalidInput(format!(
                    "regularization parameter component {i} must be positive and finite, got {e}"
                )));
            }
        }
        Ok(RegParam { eta })
    }

    pub fn pair(a: T, b: T) -> Result<Self, CoreError<T>> {
        Self::new(vec![a, b])
    }

    pub fn components(&self) -> &[T] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn get(&self, i: usize) -> T {
        self.eta[i]
    }

    /// `η ≤ η̂` componentwise.
    pub fn le(&self, other: &Self) -> bool {
        self.eta.iter().zip(&other.eta).all(|(&a, &b)| a <= b)
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        let half = T::c(0.5);
        RegParam {
            eta: self
                .eta
                .iter()
                .zip(&other.eta)
                .map(|(&a, &b)| half * (a + b))
                .collect(),
        }
    }

    /// Maximum componentwise relative change from `prev` to `self`.
    pub fn relative_change(&self, prev: &Self) -> T {
        self.eta
            .iter()
            .zip(&prev.eta)
            .map(|(&a, &b)| (a - b).abs() / b)
            .fold(T::zero(), T::max)
    }
}

/// One evaluation of the value function, optionally with one-sided
/// finite-difference gradient estimates.
#[derive(Debug, Clone)]
pub struct ValueSample<T> {
    pub eta: RegParam<T>,
    pub f_value: T,
    pub phi: T,
    pub psi: Vec<T>,
    pub grad_plus: Option<Vec<T>>,
    pub grad_minus: Option<Vec<T>>,
}

/// Geometric sequence from `lo` to `hi` inclusive with `n` points.
pub fn log_space<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(lo > T::zero() && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let denom = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| (llo + (lhi - llo) * T::from_usize(i).unwrap() / denom).exp())
        .collect()
}

/// Log-spaced grid with `per_decade` points per decade (endpoints included).
pub fn log_space_per_decade<T: Scalar>(lo: T, hi: T, per_decade: usize) -> Vec<T> {
    let decades = (hi / lo).log10().to_f64().unwrap();
    let n = ((decades * per_decade as f64).round() as usize).max(1) + 1;
    log_space(lo, hi, n)
}

/// Row-major 2-D log grid of parameter pairs.
pub fn grid_2d_log<T: Scalar>(
    lo1: T,
    hi1: T,
    n1: usize,
    lo2: T,
    hi2: T,
    n2: usize,
) -> Vec<RegParam<T>> {
    let ax1 = log_space(lo1, hi1, n1);
    let ax2 = log_space(lo2, hi2, n2);
    let mut out = Vec::with_capacity(n1 * n2);
    for &a in &ax1 {
        for &b in &ax2 {
            out.push(RegParam::pair(a, b).unwrap());
        }
    }
    out
}

/// The constant `c_γ = γ^γ / (γ+2)^(γ+2)` in front of `Φ_γ`.
pub fn phi_gamma_constant<T: Scalar>(gamma: T) -> T {
    let two = T::c(2.0);
    gamma.powf(gamma) / (gamma + two).powf(gamma + two)
}

/// `Φ_γ(η) = c_γ F^(2+γ) / (η₁ η₂)` from an already-computed value `F(η)`.
/// Defined for exactly two penalties.
pub fn phi_criterion_from_value<T: Scalar>(
    f_value: T,
    eta: &RegParam<T>,
    gamma: T,
) -> Result<T, CoreError<T>> {
    if eta.len() != 2 {
        return Err(CoreError::UnsupportedKind(format!(
            "criterion Phi is defined for 2 penalties, got {}",
            eta.len()
        )));
    }
    if !(gamma > T::zero()) {
        return Err(CoreError::InvalidInput("gamma must be positive".into()));
    }
    Ok(phi_gamma_constant(gamma) * f_value.powf(T::c(2.0) + gamma) / (eta.get(0) * eta.get(1)))
}

/// `Ψ_γ = φ^γ ψ₁ ψ₂` from a solve record. Defined for exactly two penalties.
pub fn psi_criterion_from_record<T: Scalar>(
    record: &SolveRecord<T>,
    gamma: T,
) -> Result<T, CoreError<T>> {
    if record.psi.len() != 2 {
        return Err(CoreError::UnsupportedKind(format!(
            "criterion Psi is defined for 2 penalties, got {}",
            record.psi.len()
        )));
    }
    Ok(record.phi.powf(gamma) * record.psi[0] * record.psi[1])
}

/// Evaluates the value function on one model, warm-starting consecutive
/// solves with the previous minimizer.
pub struct ValueEvaluator<'a, T> {
    model: &'a TikhonovModel<T>,
    opts: SolverOptions<T>,
    warm: Option<Vec<T>>,
    pub solves: usize,
}

impl<'a, T: Scalar> ValueEvaluator<'a, T> {
    pub fn new(model: &'a TikhonovModel<T>) -> Self {
        ValueEvaluator { model, opts: SolverOptions::default(), warm: None, solves: 0 }
    }

    pub fn with_options(model: &'a TikhonovModel<T>, opts: SolverOptions<T>) -> Self {
        ValueEvaluator { model, opts, warm: None, solves: 0 }
    }

    pub fn model(&self) -> &TikhonovModel<T> {
        self.model
    }

    /// Minimizer of the most recent solve, if any.
    pub fn last_solution(&self) -> Option<&[T]> {
        self.warm.as_deref()
    }

    pub fn solve_at(&mut self, eta: &RegParam<T>) -> Result<SolveRecord<T>, CoreError<T>> {
        let opts = self.opts.clone().with_warm_start(self.warm.clone());
        let record = solve(self.model, eta, &opts)?;
        self.solves += 1;
        self.warm = Some(record.x.clone());
        Ok(record)
    }

    /// `F(η)` together with `φ` and `ψ` at the minimizer.
    pub fn eval(&mut self, eta: &RegParam<T>) -> Result<ValueSample<T>, CoreError<T>> {
        let record = self.solve_at(eta)?;
        Ok(ValueSample {
            eta: eta.clone(),
            f_value: record.f_value,
            phi: record.phi,
            psi: record.psi,
            grad_plus: None,
            grad_minus: None,
        })
    }

    /// One-sided finite-difference estimates of `∂_i^± F` with steps
    /// `h_i = h_rel · η_i` (shrunk automatically if a backward step would
    /// leave the positive orthant).
    pub fn fd_partials(
        &mut self,
        eta: &RegParam<T>,
        h_rel: T,
    ) -> Result<(Vec<T>, Vec<T>), CoreError<T>> {
        if !(h_rel > T::zero() && h_rel < T::c(0.5)) {
            return Err(CoreError::InvalidInput(format!(
                "relative step must lie in (0, 0.5), got {h_rel}"
            )));
        }
        let center = self.eval(eta)?;
        let center_warm = self.warm.clone();
        let n = eta.len();
        let mut grad_plus = Vec::with_capacity(n);
        let mut grad_minus = Vec::with_capacity(n);
        for i in 0..n {
            let mut h = h_rel * eta.get(i);
            while eta.get(i) - h <= T::zero() {
                h = h * T::c(0.5);
            }
            let mut up = eta.components().to_vec();
            up[i] = up[i] + h;
            let mut down = eta.components().to_vec();
            down[i] = down[i] - h;

            self.warm = center_warm.clone();
            let f_up = self.eval(&RegParam::new(up)?)?.f_value;
            self.warm = center_warm.clone();
            let f_down = self.eval(&RegParam::new(down)?)?.f_value;

            grad_plus.push((f_up - center.f_value) / h);
            grad_minus.push((center.f_value - f_down) / h);
        }
        self.warm = center_warm;
        Ok((grad_plus, grad_minus))
    }

    /// `F` evaluation with the finite-difference partials attached.
    pub fn eval_with_partials(
        &mut self,
        eta: &RegParam<T>,
        h_rel: T,
    ) -> Result<ValueSample<T>, CoreError<T>> {
        let mut sample = self.eval(eta)?;
        let (gp, gm) = self.fd_partials(eta, h_rel)?;
        sample.grad_plus = Some(gp);
        sample.grad_minus = Some(gm);
        Ok(sample)
    }

    /// `Φ_γ(η)`, evaluated through the value function only.
    pub fn phi_criterion(&mut self, eta: &RegParam<T>, gamma: T) -> Result<T, CoreError<T>> {
        let sample = self.eval(eta)?;
        phi_criterion_from_value(sample.f_value, eta, gamma)
    }

    /// `Ψ_γ(η) = φ(x_η)^γ ψ₁(x_η) ψ₂(x_η)`.
    pub fn psi_criterion(&mut self, eta: &RegParam<T>, gamma: T) -> Result<T, CoreError<T>> {
        let record = self.solve_at(eta)?;
        psi_criterion_from_record(&record, gamma)
    }
}

/// One row of a grid certification: the sample plus the criteria when the
/// model has two penalties.
#[derive(Debug, Clone)]
pub struct CertifiedSample<T> {
    pub sample: ValueSample<T>,
    pub phi_criterion: Option<T>,
    pub psi_criterion: Option<T>,
}

/// Violation of `F(η) ≤ F(η̂)` for `η ≤ η̂`: grid indices and the gap.
#[derive(Debug, Clone)]
pub struct MonotonicityViolation<T> {
    pub lower: usize,
    pub upper: usize,
    pub gap: T,
}

/// Violation of midpoint concavity between two grid points.
#[derive(Debug, Clone)]
pub struct ConcavityViolation<T> {
    pub first: usize,
    pub second: usize,
    pub gap: T,
}

/// Numerical certification of Lemma-style monotonicity and concavity of `F`
/// on a finite grid, together with the `Ψ ≤ Φ` comparison at every point.
#[derive(Debug)]
pub struct GridCertification<T> {
    pub samples: Vec<CertifiedSample<T>>,
    pub monotonicity_violations: Vec<MonotonicityViolation<T>>,
    pub concavity_violations: Vec<ConcavityViolation<T>>,
    /// Grid points where `Ψ_γ > Φ_γ` beyond tolerance.
    pub criterion_order_violations: Vec<(usize, T)>,
    pub tolerance: T,
}

impl<T: Scalar> GridCertification<T> {
    pub fn is_clean(&self) -> bool {
        self.monotonicity_violations.is_empty()
            && self.concavity_violations.is_empty()
            && self.criterion_order_violations.is_empty()
    }
}

fn parallel_eval<T: Scalar>(
    model: &TikhonovModel<T>,
    opts: &SolverOptions<T>,
    grid: &[RegParam<T>],
) -> Result<Vec<ValueSample<T>>, CoreError<T>> {
    let chunk = (grid.len() / (rayon::current_num_threads() * 4)).max(1);
    let results: Vec<Result<Vec<ValueSample<T>>, CoreError<T>>> = grid
        .par_chunks(chunk)
        .map(|part| {
            let mut ev = ValueEvaluator::with_options(model, opts.clone());
            part.iter().map(|eta| ev.eval(eta)).collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(grid.len());
    for r in results {
        samples.extend(r?);
    }
    Ok(samples)
}

/// Evaluates `F` on `grid`, checks monotonicity over all comparable pairs and
/// midpoint concavity over all pairs, and compares `Ψ_γ ≤ Φ_γ` pointwise.
/// The tolerance is `1e-8 · max|F|` over the grid.
pub fn certify_value_function<T: Scalar>(
    model: &TikhonovModel<T>,
    grid: &[RegParam<T>],
    gamma: T,
    opts: &SolverOptions<T>,
) -> Result<GridCertification<T>, CoreError<T>> {
    let samples = parallel_eval(model, opts, grid)?;
    let fmax = samples.iter().map(|s| s.f_value.abs()).fold(T::zero(), T::max);
    let tol = T::c(1e-8) * fmax;

    // monotonicity: η ≤ η̂ implies F(η) ≤ F(η̂)
    let mut monotonicity_violations = Vec::new();
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            if i != j && grid[i].le(&grid[j]) {
                let gap = samples[i].f_value - samples[j].f_value;
                if gap > tol {
                    monotonicity_violations.push(MonotonicityViolation {
                        lower: i,
                        upper: j,
                        gap,
                    });
                }
            }
        }
    }

    // concavity: F(½η + ½η̂) ≥ ½F(η) + ½F(η̂)
    let pairs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| ((i + 1)..grid.len()).map(move |j| (i, j)))
        .collect();
    let midpoints: Vec<RegParam<T>> =
        pairs.iter().map(|&(i, j)| grid[i].midpoint(&grid[j])).collect();
    let mid_samples = parallel_eval(model, opts, &midpoints)?;
    let half = T::c(0.5);
    let mut concavity_violations = Vec::new();
    for (&(i, j), mid) in pairs.iter().zip(&mid_samples) {
        let chord = half * samples[i].f_value + half * samples[j].f_value;
        let gap = chord - mid.f_value;
        if gap > tol {
            concavity_violations.push(ConcavityViolation { first: i, second: j, gap });
        }
    }

    // Ψ ≤ Φ pointwise (two-penalty models only)
    let two_penalties = model.n_penalties() == 2;
    let mut criterion_order_violations = Vec::new();
    let samples: Vec<CertifiedSample<T>> = samples
        .into_iter()
        .enumerate()
        .map(|(idx, sample)| {
            if two_penalties {
                let phi_c = phi_criterion_from_value(sample.f_value, &sample.eta, gamma).ok();
                let psi_c = Some(sample.phi.powf(gamma) * sample.psi[0] * sample.psi[1]);
                if let (Some(p), Some(q)) = (phi_c, psi_c) {
                    let gap = q - p;
                    if gap > T::c(1e-10) * p.abs().max(q.abs()).max(T::min_positive_value()) {
                        criterion_order_violations.push((idx, gap));
                    }
                }
                CertifiedSample { sample, phi_criterion: phi_c, psi_criterion: psi_c }
            } else {
                CertifiedSample { sample, phi_criterion: None, psi_criterion: None }
            }
        })
        .collect();

    Ok(GridCertification {
        samples,
        monotonicity_violations,
        concavity_violations,
        criterion_order_violations,
        tolerance: tol,
    })
}
