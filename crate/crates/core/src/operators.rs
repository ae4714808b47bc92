//! Discrete forward operators: quadrature discretizations of first-kind
//! convolution kernels, a 2-D Gaussian blur with missing data, and generic
//! dense matrices.

use crate::error::CoreError;
use crate::linalg::Matrix;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// Uniform 1-D grid on `[a, b]` with midpoint nodes `s_i = a + (i + 1/2) h`,
/// `h = (b - a)/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub a: T,
    pub b: T,
    pub n_points: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(a: T, b: T, n_points: usize) -> Result<Self, CoreError<T>> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(CoreError::InvalidInput(format!("grid interval [{a}, {b}] is invalid")));
        }
        if n_points < 2 {
            return Err(CoreError::InvalidInput(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(GridSpec { a, b, n_points })
    }

    pub fn spacing(&self) -> T {
        (self.b - self.a) / T::from_usize(self.n_points).unwrap()
    }

    pub fn node(&self, i: usize) -> T {
        self.a + (T::from_usize(i).unwrap() + T::c(0.5)) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }
}

/// Pixel grid for the 2-D deblurring problem, row-major pixel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec2D {
    pub width: usize,
    pub height: usize,
}

impl GridSpec2D {
    pub fn new<T: Scalar>(width: usize, height: usize) -> Result<Self, CoreError<T>> {
        if width == 0 || height == 0 {
            return Err(CoreError::InvalidInput("image dimensions must be positive".into()));
        }
        Ok(GridSpec2D { width, height })
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Convolution kernels of the two deconvolution test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `k(s,t) = ζ(s-t)` with `ζ(t) = 1 + cos(πt/3)` on `|t| ≤ 3`, zero outside.
    CosineBump,
    /// `k(s,t) = (1/16 + (s-t)²)^(-3/2) / 4`.
    BumpPair,
}

impl KernelKind {
    pub fn value<T: Scalar>(&self, s: T, t: T) -> T {
        let d = s - t;
        match self {
            KernelKind::CosineBump => {
                let three = T::c(3.0);
                if d.abs() > three {
                    T::zero()
                } else {
                    T::one() + (T::c(std::f64::consts::PI) * d / three).cos()
                }
            }
            KernelKind::BumpPair => {
                let q = T::c(1.0 / 16.0) + d * d;
                T::c(0.25) * q.powf(T::c(-1.5))
            }
        }
    }
}

/// Dense forward operator with optional missing-data row selection.
///
/// When `row_index_map` is present the stored matrix already contains only
/// the retained rows; the map records which rows of the unmasked operator
/// they are.
#[derive(Debug, Clone)]
pub struct LinearOperator<T> {
    matrix: Matrix<T>,
    row_index_map: Option<Vec<usize>>,
}

impl<T: Scalar> LinearOperator<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self, CoreError<T>> {
        if !matrix.all_finite() {
            return Err(CoreError::InvalidInput("operator entries must be finite".into()));
        }
        Ok(LinearOperator { matrix, row_index_map: None })
    }

    /// Keeps the rows of `full` listed in `kept` (which must be unique and
    /// within range); records them in the row index map.
    pub fn masked(full: &Matrix<T>, kept: &[usize]) -> Result<Self, CoreError<T>> {
        if !full.all_finite() {
            return Err(CoreError::InvalidInput("operator entries must be finite".into()));
        }
        let mut seen = vec![false; full.rows()];
        for &r in kept {
            if r >= full.rows() {
                return Err(CoreError::InvalidInput(format!(
                    "row index {r} out of range for {} rows",
                    full.rows()
                )));
            }
            if seen[r] {
                return Err(CoreError::InvalidInput(format!("duplicate row index {r}")));
            }
            seen[r] = true;
        }
        let mut m = Matrix::zeros(kept.len(), full.cols());
        for (out_i, &src) in kept.iter().enumerate() {
            m.row_mut(out_i).copy_from_slice(full.row(src));
        }
        Ok(LinearOperator { matrix: m, row_index_map: Some(kept.to_vec()) })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn row_index_map(&self) -> Option<&[usize]> {
        self.row_index_map.as_deref()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// `K x` restricted to the retained rows.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>, CoreError<T>> {
        if x.len() != self.cols() {
            return Err(CoreError::DimensionMismatch {
                expected: self.cols(),
                got: x.len(),
                what: "operator apply",
            });
        }
        Ok(self.matrix.matvec(x))
    }
}

/// Midpoint-rule discretization of the integral operator with kernel
/// `k(s, t)`: entries `h · k(s_i, t_j)` on a square grid.
pub fn build_convolution_kernel<T: Scalar>(
    kind: KernelKind,
    grid: &GridSpec<T>,
) -> Result<LinearOperator<T>, CoreError<T>> {
    let nodes = grid.nodes();
    let h = grid.spacing();
    let m = Matrix::from_fn(grid.n_points, grid.n_points, |i, j| {
        h * kind.value(nodes[i], nodes[j])
    });
    LinearOperator::new(m)
}

/// Gaussian blur with a `width × width` stencil (`width` odd), standard
/// deviation `sigma`, zero boundary conditions, and uniform random retention
/// of `keep_fraction` of the output pixels.
pub fn build_gaussian_blur<T: Scalar>(
    width: usize,
    sigma: T,
    image: GridSpec2D,
    keep_fraction: T,
    seed: u64,
) -> Result<LinearOperator<T>, CoreError<T>> {
    if width % 2 == 0 || width == 0 {
        return Err(CoreError::InvalidInput(format!("blur width must be odd, got {width}")));
    }
    if !(sigma > T::zero()) {
        return Err(CoreError::InvalidInput("sigma must be positive".into()));
    }
    if !(keep_fraction > T::zero() && keep_fraction <= T::one()) {
        return Err(CoreError::InvalidInput(format!(
            "keep fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }

    let half = (width / 2) as isize;
    // truncated separable stencil, normalized to unit sum
    let mut stencil = vec![T::zero(); width * width];
    let mut total = T::zero();
    for di in -half..=half {
        for dj in -half..=half {
            let r2 = T::from_isize(di * di + dj * dj).unwrap();
            let w = (-r2 / (T::c(2.0) * sigma * sigma)).exp();
            stencil[((di + half) as usize) * width + (dj + half) as usize] = w;
            total = total + w;
        }
    }
    for w in stencil.iter_mut() {
        *w = *w / total;
    }

    let (nx, ny) = (image.width, image.height);
    let n = image.pixels();
    let mut full = Matrix::zeros(n, n);
    for pi in 0..ny as isize {
        for pj in 0..nx as isize {
            let row = (pi as usize) * nx + pj as usize;
            for di in -half..=half {
                for dj in -half..=half {
                    let (qi, qj) = (pi + di, pj + dj);
                    if qi < 0 || qj < 0 || qi >= ny as isize || qj >= nx as isize {
                        continue; // zero padding
                    }
                    let col = (qi as usize) * nx + qj as usize;
                    full[(row, col)] =
                        stencil[((di + half) as usize) * width + (dj + half) as usize];
                }
            }
        }
    }

    let keep = (keep_fraction.to_f64().unwrap() * n as f64).round() as usize;
    let keep = keep.clamp(1, n);
    if keep == n {
        return LinearOperator::new(full);
    }
    let kept = SplitMix64::new(seed).sample_without_replacement(n, keep);
    LinearOperator::masked(&full, &kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, sub};
    use crate::rng::SplitMix64;

    #[test]
    fn cosine_bump_diagonal_is_two() {
        // ζ(0) = 1 + cos(0) = 2
        assert_eq!(KernelKind::CosineBump.value(1.25f64, 1.25), 2.0);
    }

    #[test]
    fn cosine_bump_vanishes_at_support_boundary() {
        // 1 + cos(π) = 0; use a grid with exactly representable spacing
        let grid = GridSpec::new(-6.0f64, 6.0, 8).unwrap(); // h = 1.5
        let op = build_convolution_kernel(KernelKind::CosineBump, &grid).unwrap();
        let m = op.matrix();
        // nodes 1.5 apart: |s_i - t_j| = 3 when |i - j| = 2
        assert!(m[(2, 0)].abs() <= 1e-14);
        // and zero beyond the support
        assert_eq!(m[(5, 0)], 0.0);
    }

    #[test]
    fn bump_pair_diagonal_value() {
        // (1/16)^(-3/2) / 4 = 64 / 4 = 16, computed by hand
        let v = KernelKind::BumpPair.value(0.3f64, 0.3);
        assert!((v - 16.0).abs() <= 1e-12, "{v}");
    }

    #[test]
    fn kernel_entries_are_nonnegative_and_scaled_by_h() {
        let grid = GridSpec::new(0.0f64, 1.0, 25).unwrap();
        let op = build_convolution_kernel(KernelKind::BumpPair, &grid).unwrap();
        let h = grid.spacing();
        for i in 0..25 {
            for j in 0..25 {
                let v = op.matrix()[(i, j)];
                assert!(v >= 0.0);
                let expect = h * KernelKind::BumpPair.value(grid.node(i), grid.node(j));
                assert!((v - expect).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn cosine_bump_operator_is_symmetric() {
        let grid = GridSpec::new(-6.0f64, 6.0, 100).unwrap();
        let op = build_convolution_kernel(KernelKind::CosineBump, &grid).unwrap();
        let m = op.matrix();
        let diff = m.max_abs_diff(&m.transpose());
        assert!(diff <= 1e-12, "asymmetry {diff}");
    }

    #[test]
    fn invalid_grid_is_rejected() {
        assert!(GridSpec::new(1.0f64, 1.0, 10).is_err());
        assert!(GridSpec::new(0.0f64, 1.0, 1).is_err());
    }

    #[test]
    fn quadrature_error_shrinks_with_refinement() {
        // compare K x against a fine-quadrature reference of the continuous
        // integral, evaluated at the coarse nodes
        let xfun = |t: f64| (0.4 * t).cos() + 0.3 * (0.9 * t).sin();
        let reference = |s: f64| {
            let fine = GridSpec::new(-6.0f64, 6.0, 6400).unwrap();
            let h = fine.spacing();
            fine.nodes()
                .iter()
                .map(|&t| h * KernelKind::CosineBump.value(s, t) * xfun(t))
                .sum::<f64>()
        };
        let err_at = |n: usize| {
            let grid = GridSpec::new(-6.0f64, 6.0, n).unwrap();
            let op = build_convolution_kernel(KernelKind::CosineBump, &grid).unwrap();
            let x: Vec<f64> = grid.nodes().iter().map(|&t| xfun(t)).collect();
            let y = op.apply(&x).unwrap();
            grid.nodes()
                .iter()
                .zip(&y)
                .map(|(&s, &yi)| (yi - reference(s)).abs())
                .fold(0.0f64, f64::max)
        };
        let (e100, e200) = (err_at(100), err_at(200));
        let ratio = e100 / e200;
        assert!(ratio >= 1.5 && ratio <= 8.0, "e100={e100:e} e200={e200:e} ratio={ratio}");
    }

    #[test]
    fn single_tap_blur_with_full_data_is_identity() {
        let image = GridSpec2D::new::<f64>(4, 3).unwrap();
        let op = build_gaussian_blur(1, 1.0f64, image, 1.0, 0).unwrap();
        assert!(op.matrix().is_identity());
        assert!(op.row_index_map().is_none());
    }

    #[test]
    fn five_tap_stencil_rows_sum_to_one_in_the_interior() {
        let image = GridSpec2D::new::<f64>(11, 11).unwrap();
        let op = build_gaussian_blur(5, 1.0f64, image, 1.0, 0).unwrap();
        // centre pixel sees the whole stencil
        let row = op.matrix().row(5 * 11 + 5);
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "stencil sum {sum}");
    }

    #[test]
    fn half_retention_on_50x50_gives_1250_rows() {
        let image = GridSpec2D::new::<f64>(50, 50).unwrap();
        let op = build_gaussian_blur(5, 1.0f64, image, 0.5, 11).unwrap();
        assert_eq!(op.rows(), 1250);
        assert_eq!(op.cols(), 2500);
        assert_eq!(op.row_index_map().unwrap().len(), 1250);
    }

    #[test]
    fn even_width_and_bad_keep_fraction_are_rejected() {
        let image = GridSpec2D::new::<f64>(5, 5).unwrap();
        assert!(build_gaussian_blur(4, 1.0f64, image, 1.0, 0).is_err());
        assert!(build_gaussian_blur(5, 1.0f64, image, 0.0, 0).is_err());
        assert!(build_gaussian_blur(5, 1.0f64, image, 1.5, 0).is_err());
    }

    #[test]
    fn masked_rows_match_unmasked_operator() {
        let image = GridSpec2D::new::<f64>(8, 8).unwrap();
        let masked = build_gaussian_blur(3, 0.8f64, image, 0.4, 99).unwrap();
        let fullop = build_gaussian_blur(3, 0.8f64, image, 1.0, 99).unwrap();
        let map = masked.row_index_map().unwrap();
        for (i, &src) in map.iter().enumerate() {
            assert_eq!(masked.matrix().row(i), fullop.matrix().row(src));
        }
    }

    #[test]
    fn apply_identity_and_zero() {
        let op = LinearOperator::new(Matrix::<f64>::identity(6)).unwrap();
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.0).collect();
        assert_eq!(op.apply(&x).unwrap(), x);
        assert_eq!(op.apply(&vec![0.0; 6]).unwrap(), vec![0.0; 6]);
        assert!(op.apply(&vec![0.0; 5]).is_err());
    }

    #[test]
    fn apply_matches_naive_product() {
        let mut rng = SplitMix64::new(5);
        let m = Matrix::from_fn(5, 5, |_, _| rng.next_f64() - 0.5);
        let x: Vec<f64> = (0..5).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let op = LinearOperator::new(m.clone()).unwrap();
        let got = op.apply(&x).unwrap();
        let mut want = vec![0.0; 5];
        for i in 0..5 {
            for j in 0..5 {
                want[i] += m[(i, j)] * x[j];
            }
        }
        assert!(max_abs(&sub(&got, &want)) <= 1e-14);
    }
}
