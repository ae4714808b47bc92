//! The three benchmark inverse problems and the small all-quadratic toy used
//! by the certification suite.

use crate::error::CoreError;
use crate::linalg::Matrix;
use crate::model::TikhonovModel;
use crate::operators::{
    build_convolution_kernel, build_gaussian_blur, GridSpec, GridSpec2D, KernelKind,
    LinearOperator,
};
use crate::penalties::Penalty;
use crate::rng::{derive_seed, SplitMix64};
use crate::scalar::Scalar;

use super::{add_noise, Problem};

/// The three experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    /// 1-D deconvolution with a cosine-bump kernel on `[-6, 6]`,
    /// `H¹` + TV penalties.
    H1TvDeconvolution,
    /// 1-D deconvolution with an algebraically decaying kernel on `[0, 1]`,
    /// `ℓ¹` + `½ℓ²` penalties.
    ElasticNetDeconvolution,
    /// 2-D Gaussian deblurring with half the pixels observed,
    /// `ℓ¹` + `½ℓ²` penalties.
    ElasticNetDeblurring,
}

impl ExampleId {
    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(ExampleId::H1TvDeconvolution),
            2 => Some(ExampleId::ElasticNetDeconvolution),
            3 => Some(ExampleId::ElasticNetDeblurring),
            _ => None,
        }
    }

    pub fn index(&self) -> usize {
        match self {
            ExampleId::H1TvDeconvolution => 1,
            ExampleId::ElasticNetDeconvolution => 2,
            ExampleId::ElasticNetDeblurring => 3,
        }
    }
}

/// Spatial layout of the unknowns.
#[derive(Debug, Clone)]
pub enum ProblemGrid<T> {
    Line(GridSpec<T>),
    Image(GridSpec2D),
}

impl<T: Scalar> ProblemGrid<T> {
    pub fn unknowns(&self) -> usize {
        match self {
            ProblemGrid::Line(g) => g.n_points,
            ProblemGrid::Image(g) => g.pixels(),
        }
    }
}

/// Piecewise test signal on `[-6, 6]` with one flat and one smoothly varying
/// region: a plateau of height 1 on `[-5, -1]` entered and left through
/// linear ramps of width 0.6, and the smooth hump
/// `(1 + cos(π(t-2.5)/2.5))/2` on `[0, 5]`.
pub fn plateau_and_hump<T: Scalar>(t: T) -> T {
    let half = T::c(0.5);
    let ramp = T::c(0.6);
    let plateau = if t >= T::c(-5.0) && t <= T::c(-1.0) {
        T::one()
    } else if t > T::c(-5.0) - ramp && t < T::c(-5.0) {
        (t + T::c(5.0) + ramp) / ramp
    } else if t > T::c(-1.0) && t < T::c(-1.0) + ramp {
        (T::c(-1.0) + ramp - t) / ramp
    } else {
        T::zero()
    };
    let hump = if t >= T::zero() && t <= T::c(5.0) {
        half * (T::one() + (T::c(std::f64::consts::PI) * (t - T::c(2.5)) / T::c(2.5)).cos())
    } else {
        T::zero()
    };
    plateau + hump
}

/// Sparse two-bump signal on `[0, 1]`: Gaussians at 0.3 and 0.7 of width
/// 0.05 (the second scaled by 0.8), truncated to exact zeros below 0.01.
pub fn two_bumps<T: Scalar>(t: T) -> T {
    let w = T::c(0.05);
    let b1 = (-((t - T::c(0.3)) / w).powi(2)).exp();
    let b2 = T::c(0.8) * (-((t - T::c(0.7)) / w).powi(2)).exp();
    let v = b1 + b2;
    if v < T::c(0.01) {
        T::zero()
    } else {
        v
    }
}

/// Binary blocks-and-cross image, row-major.
pub fn blocks_and_cross<T: Scalar>(side: usize) -> Vec<T> {
    // layout tuned for the canonical 50×50 size and scaled for others
    let s = |v: usize| v * side / 50;
    let mut img = vec![T::zero(); side * side];
    let mut fill = |r0: usize, r1: usize, c0: usize, c1: usize| {
        for r in s(r0)..s(r1) {
            for c in s(c0)..s(c1) {
                img[r * side + c] = T::one();
            }
        }
    };
    fill(5, 15, 5, 15); // upper block
    fill(30, 44, 8, 20); // lower block
    fill(8, 42, 33, 37); // cross, vertical bar
    fill(21, 27, 26, 46); // cross, horizontal bar
    img
}

/// Builds the operator, exact solution and penalties of one example once;
/// problems at different noise levels are stamped out of it.
#[derive(Debug)]
pub struct ExampleFactory<T> {
    pub id: ExampleId,
    pub grid: ProblemGrid<T>,
    pub operator: LinearOperator<T>,
    pub x_true: Vec<T>,
    pub y_true: Vec<T>,
    pub penalties: Vec<Penalty<T>>,
    pub seed: u64,
}

impl<T: Scalar> ExampleFactory<T> {
    /// `size` overrides the problem dimension: number of grid points for the
    /// 1-D examples, image side length for the 2-D one.
    pub fn new(id: ExampleId, size: Option<usize>, seed: u64) -> Result<Self, CoreError<T>> {
        match id {
            ExampleId::H1TvDeconvolution => {
                let n = size.unwrap_or(100);
                let grid = GridSpec::new(T::c(-6.0), T::c(6.0), n)?;
                let operator = build_convolution_kernel(KernelKind::CosineBump, &grid)?;
                let x_true: Vec<T> = grid.nodes().iter().map(|&t| plateau_and_hump(t)).collect();
                let y_true = operator.apply(&x_true)?;
                let penalties = vec![Penalty::h1(&grid), Penalty::tv1d()];
                Ok(ExampleFactory {
                    id,
                    grid: ProblemGrid::Line(grid),
                    operator,
                    x_true,
                    y_true,
                    penalties,
                    seed,
                })
            }
            ExampleId::ElasticNetDeconvolution => {
                let n = size.unwrap_or(100);
                let grid = GridSpec::new(T::zero(), T::one(), n)?;
                let operator = build_convolution_kernel(KernelKind::BumpPair, &grid)?;
                let x_true: Vec<T> = grid.nodes().iter().map(|&t| two_bumps(t)).collect();
                let y_true = operator.apply(&x_true)?;
                let penalties = vec![Penalty::l1(), Penalty::l2(n)];
                Ok(ExampleFactory {
                    id,
                    grid: ProblemGrid::Line(grid),
                    operator,
                    x_true,
                    y_true,
                    penalties,
                    seed,
                })
            }
            ExampleId::ElasticNetDeblurring => {
                let side = size.unwrap_or(50);
                let image = GridSpec2D::new::<T>(side, side)?;
                let operator = build_gaussian_blur(
                    5,
                    T::one(),
                    image,
                    T::c(0.5),
                    derive_seed(seed, 7),
                )?;
                let x_true = blocks_and_cross::<T>(side);
                let y_true = operator.apply(&x_true)?;
                let penalties = vec![Penalty::l1(), Penalty::l2(image.pixels())];
                Ok(ExampleFactory {
                    id,
                    grid: ProblemGrid::Image(image),
                    operator,
                    x_true,
                    y_true,
                    penalties,
                    seed,
                })
            }
        }
    }

    /// Stamps a problem at relative noise level `epsilon` with the given
    /// noise seed.
    pub fn problem(&self, epsilon: T, noise_seed: u64) -> Result<Problem<T>, CoreError<T>> {
        let (y_noisy, delta2) = add_noise(&self.y_true, epsilon, noise_seed);
        let model = TikhonovModel::new(
            self.operator.clone(),
            y_noisy,
            self.penalties.clone(),
        )?;
        Ok(Problem {
            model,
            grid: self.grid.clone(),
            x_true: self.x_true.clone(),
            y_true: self.y_true.clone(),
            delta2,
            noise_level: epsilon,
            seed: noise_seed,
        })
    }
}

/// Small dense all-quadratic problem (`ℓ²` + `H¹`-type penalties) with a
/// known exact solution and inconsistent data, for the certification suite.
pub struct QuadraticToy<T> {
    pub model: TikhonovModel<T>,
    pub x_true: Vec<T>,
    /// Unregularized least-squares minimum of `φ`, from the normal equations.
    pub min_phi: T,
}

pub fn quadratic_toy<T: Scalar>(n: usize, seed: u64) -> QuadraticToy<T> {
    let mut rng = SplitMix64::new(seed);
    let rows = n + 2;
    let matrix = Matrix::from_fn(rows, n, |i, j| {
        let base = T::c(rng.next_f64() - 0.5);
        // mild column-wise decay makes the problem genuinely ill-conditioned
        let decay = T::c(0.85).powi(j as i32);
        if i == j {
            base * decay + T::c(0.8) * decay
        } else {
            base * decay
        }
    });
    let x_true: Vec<T> = (0..n)
        .map(|i| (T::from_usize(i).unwrap() * T::c(0.4)).sin() + T::c(0.3))
        .collect();
    let mut y = matrix.matvec(&x_true);
    let noise_scale = T::c(0.05);
    for v in y.iter_mut() {
        *v = *v + noise_scale * T::c(rng.next_gaussian());
    }
    // min φ via the normal equations KᵀK x = Kᵀy
    let min_phi = {
        let gram = matrix.gram();
        let rhs = matrix.matvec_t(&y);
        let x_ls = gram.cholesky().expect("toy gram is positive definite").solve(&rhs);
        let kx = matrix.matvec(&x_ls);
        crate::linalg::norm2_sq(&crate::linalg::sub(&kx, &y))
    };
    let grid = GridSpec::new(T::zero(), T::one(), n).expect("valid toy grid");
    let operator = LinearOperator::new(matrix).expect("finite toy operator");
    let model = TikhonovModel::new(operator, y, vec![Penalty::l2(n), Penalty::h1(&grid)])
        .expect("consistent toy dimensions");
    QuadraticToy { model, x_true, min_phi }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_one_defaults() {
        let f = ExampleFactory::<f64>::new(ExampleId::H1TvDeconvolution, None, 1).unwrap();
        match &f.grid {
            ProblemGrid::Line(g) => {
                assert_eq!((g.a, g.b, g.n_points), (-6.0, 6.0, 100));
            }
            _ => panic!("expected a line grid"),
        }
        assert_eq!(f.operator.rows(), 100);
        assert_eq!(f.penalties[0].label(), "h1");
        assert_eq!(f.penalties[1].label(), "tv");
    }

    #[test]
    fn example_two_defaults() {
        let f = ExampleFactory::<f64>::new(ExampleId::ElasticNetDeconvolution, None, 1).unwrap();
        match &f.grid {
            ProblemGrid::Line(g) => {
                assert_eq!((g.a, g.b, g.n_points), (0.0, 1.0, 100));
            }
            _ => panic!("expected a line grid"),
        }
        assert_eq!(f.penalties[0].label(), "l1");
        assert_eq!(f.penalties[1].label(), "l2");
        // the exact solution is genuinely sparse with two groups
        let nonzero = f.x_true.iter().filter(|&&v| v != 0.0).count();
        assert!(nonzero > 10 && nonzero < 50, "nonzeros {nonzero}");
    }

    #[test]
    fn example_three_defaults() {
        let f = ExampleFactory::<f64>::new(ExampleId::ElasticNetDeblurring, None, 1).unwrap();
        assert_eq!(f.operator.rows(), 1250);
        assert_eq!(f.operator.cols(), 2500);
        assert_eq!(f.x_true.len(), 2500);
        assert!(f.x_true.iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn exact_solutions_have_the_advertised_structure() {
        // plateau is flat at 1, hump peaks at 1 in the middle, tails vanish
        assert_eq!(plateau_and_hump(-3.0f64), 1.0);
        assert_eq!(plateau_and_hump(-1.0f64), 1.0);
        assert!((plateau_and_hump(2.5f64) - 1.0).abs() <= 1e-15);
        assert!(plateau_and_hump(0.0f64).abs() <= 1e-15);
        assert_eq!(plateau_and_hump(5.5f64), 0.0);
        assert_eq!(plateau_and_hump(-5.8f64), 0.0);
        // the ramp is halfway up at its midpoint
        assert!((plateau_and_hump(-5.3f64) - 0.5).abs() <= 1e-12);
        // bumps are 1 and 0.8 at their centers and exactly zero far away
        assert!((two_bumps(0.3f64) - 1.0).abs() <= 1e-12);
        assert!((two_bumps(0.7f64) - 0.8).abs() <= 1e-12);
        assert_eq!(two_bumps(0.5f64), 0.0);
    }

    #[test]
    fn problems_are_reproducible_from_the_seed() {
        let f = ExampleFactory::<f64>::new(ExampleId::ElasticNetDeconvolution, Some(40), 5)
            .unwrap();
        let a = f.problem(5e-2, 17).unwrap();
        let b = f.problem(5e-2, 17).unwrap();
        assert_eq!(a.model.data(), b.model.data());
        assert_eq!(a.delta2, b.delta2);
    }

    #[test]
    fn toy_min_phi_is_positive_for_inconsistent_data() {
        let toy = quadratic_toy::<f64>(12, 3);
        assert!(toy.min_phi > 0.0);
    }
}
