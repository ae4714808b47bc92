//! Convex penalty functionals and their solver-facing structure.

use std::sync::OnceLock;

use crate::error::CoreError;
use crate::linalg::{difference_matrix, Matrix};
use crate::operators::GridSpec;
use crate::scalar::Scalar;

/// The supported penalty families.
#[derive(Debug, Clone)]
pub enum PenaltyForm<T> {
    /// `ψ(x) = ½‖Lx‖²` for a fixed kernel matrix `L`.
    Quadratic { l: Matrix<T> },
    /// `ψ(x) = Σ|x_i|`.
    L1,
    /// `ψ(x) = Σ|x_{i+1} - x_i|` (unweighted jumps).
    Tv1d,
}

/// A nonnegative convex penalty `scale · ψ(x)` with `ψ(0) = 0`.
#[derive(Debug, Clone)]
pub struct Penalty<T> {
    form: PenaltyForm<T>,
    scale: T,
    label: String,
    gram: OnceLock<Matrix<T>>,
}

impl<T: Scalar> Penalty<T> {
    fn build(form: PenaltyForm<T>, label: &str) -> Self {
        Penalty { form, scale: T::one(), label: label.to_string(), gram: OnceLock::new() }
    }

    /// `½‖x‖²` on vectors of length `n`.
    pub fn l2(n: usize) -> Self {
        Self::build(PenaltyForm::Quadratic { l: Matrix::identity(n) }, "l2")
    }

    /// Discrete `H¹` seminorm `½ Σ ((x_{i+1}-x_i)/h)² h = ½‖Lx‖²` with
    /// `L = D/√h`.
    pub fn h1(grid: &GridSpec<T>) -> Self {
        let mut l = difference_matrix(grid.n_points);
        l.scale(T::one() / grid.spacing().sqrt());
        Self::build(PenaltyForm::Quadratic { l }, "h1")
    }

    /// General quadratic penalty `½‖Lx‖²`.
    pub fn quadratic(l: Matrix<T>) -> Self {
        Self::build(PenaltyForm::Quadratic { l }, "quad")
    }

    pub fn l1() -> Self {
        Self::build(PenaltyForm::L1, "l1")
    }

    pub fn tv1d() -> Self {
        Self::build(PenaltyForm::Tv1d, "tv")
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        assert!(scale > T::zero(), "penalty scale must be positive");
        self.scale = scale;
        self.gram = OnceLock::new();
        self
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn form(&self) -> &PenaltyForm<T> {
        &self.form
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.form, PenaltyForm::Quadratic { .. })
    }

    pub fn is_l1(&self) -> bool {
        matches!(self.form, PenaltyForm::L1)
    }

    pub fn is_tv1d(&self) -> bool {
        matches!(self.form, PenaltyForm::Tv1d)
    }

    /// Quadratic penalty whose kernel is exactly the identity, i.e. `½‖x‖²`
    /// up to scale.
    pub fn is_l2_identity(&self) -> bool {
        match &self.form {
            PenaltyForm::Quadratic { l } => l.is_identity(),
            _ => false,
        }
    }

    /// Evaluates `scale · ψ(x)`.
    pub fn evaluate(&self, x: &[T]) -> Result<T, CoreError<T>> {
        let value = match &self.form {
            PenaltyForm::Quadratic { l } => {
                if x.len() != l.cols() {
                    return Err(CoreError::DimensionMismatch {
                        expected: l.cols(),
                        got: x.len(),
                        what: "quadratic penalty",
                    });
                }
                let lx = l.matvec(x);
                T::c(0.5) * lx.iter().map(|&v| v * v).sum()
            }
            PenaltyForm::L1 => x.iter().map(|v| v.abs()).sum(),
            PenaltyForm::Tv1d => x.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
        };
        Ok(self.scale * value)
    }

    /// Symmetric positive semidefinite `G` with `ψ(x) = ½ xᵀGx`, i.e.
    /// `G = scale · LᵀL`. Only defined for the quadratic family; the result
    /// is cached since penalties are immutable.
    pub fn quadratic_gram(&self) -> Result<&Matrix<T>, CoreError<T>> {
        match &self.form {
            PenaltyForm::Quadratic { l } => Ok(self.gram.get_or_init(|| {
                let mut g = l.gram();
                g.scale(self.scale);
                g
            })),
            PenaltyForm::L1 => Err(CoreError::UnsupportedKind(
                "l1 penalty has no quadratic kernel".into(),
            )),
            PenaltyForm::Tv1d => Err(CoreError::UnsupportedKind(
                "tv penalty has no quadratic kernel".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h1_grid(n: usize) -> GridSpec<f64> {
        // h = 1 grid so the seminorm weights drop out
        GridSpec::new(0.0, n as f64, n).unwrap()
    }

    #[test]
    fn tv_of_constant_vector_is_zero() {
        let p = Penalty::<f64>::tv1d();
        assert_eq!(p.evaluate(&[0.7; 9]).unwrap(), 0.0);
    }

    #[test]
    fn h1_of_unit_step_on_unit_grid() {
        // ½ ((1-0)/1)² · 1 = ½
        let p = Penalty::h1(&h1_grid(2));
        let v = p.evaluate(&[0.0, 1.0]).unwrap();
        assert!((v - 0.5).abs() <= 1e-15, "{v}");
    }

    #[test]
    fn l1_sums_absolute_values() {
        let p = Penalty::<f64>::l1();
        assert_eq!(p.evaluate(&[1.0, -2.0, 3.0]).unwrap(), 6.0);
    }

    #[test]
    fn l2_gram_is_identity() {
        let p = Penalty::<f64>::l2(4);
        assert!(p.quadratic_gram().unwrap().is_identity());
    }

    #[test]
    fn h1_gram_on_three_points_is_the_second_difference_matrix() {
        // expanding Σ (x_{i+1}-x_i)² by hand gives tridiag(-1; 1,2,1; -1)
        let p = Penalty::h1(&h1_grid(3));
        let g = p.quadratic_gram().unwrap();
        let want =
            Matrix::from_vec(3, 3, vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert!(g.max_abs_diff(&want) <= 1e-14);
    }

    #[test]
    fn gram_is_exactly_symmetric() {
        let p = Penalty::h1(&GridSpec::new(-6.0, 6.0, 20).unwrap());
        let g = p.quadratic_gram().unwrap();
        assert_eq!(g.max_abs_diff(&g.transpose()), 0.0);
    }

    #[test]
    fn gram_reproduces_evaluation() {
        let p = Penalty::h1(&GridSpec::new(-2.0, 3.0, 12).unwrap());
        let x: Vec<f64> = (0..12).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let g = p.quadratic_gram().unwrap();
        let quad = 0.5 * crate::linalg::dot(&x, &g.matvec(&x));
        let direct = p.evaluate(&x).unwrap();
        assert!((quad - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn gram_of_nonsmooth_kind_is_an_error() {
        assert!(Penalty::<f64>::l1().quadratic_gram().is_err());
        assert!(Penalty::<f64>::tv1d().quadratic_gram().is_err());
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let p = Penalty::<f64>::l2(4);
        assert!(p.evaluate(&[1.0, 2.0]).is_err());
    }

    /// Independent per-formula oracles used by the property tests below.
    mod oracle {
        pub fn h1(x: &[f64], h: f64) -> f64 {
            let mut s = 0.0;
            for i in 0..x.len() - 1 {
                let d = (x[i + 1] - x[i]) / h;
                s += d * d * h;
            }
            0.5 * s
        }
        pub fn tv(x: &[f64]) -> f64 {
            let mut s = 0.0;
            for i in 0..x.len() - 1 {
                s += (x[i + 1] - x[i]).abs();
            }
            s
        }
        pub fn l1(x: &[f64]) -> f64 {
            let mut s = 0.0;
            for v in x {
                s += v.abs();
            }
            s
        }
        pub fn l2(x: &[f64]) -> f64 {
            let mut s = 0.0;
            for v in x {
                s += v * v;
            }
            0.5 * s
        }
    }

    proptest! {
        #[test]
        fn evaluate_agrees_with_loop_oracles(x in proptest::collection::vec(-10.0f64..10.0, 2..40)) {
            let grid = GridSpec::new(-1.0, 2.0, x.len()).unwrap();
            let h = grid.spacing();
            let cases: Vec<(Penalty<f64>, f64)> = vec![
                (Penalty::h1(&grid), oracle::h1(&x, h)),
                (Penalty::tv1d(), oracle::tv(&x)),
                (Penalty::l1(), oracle::l1(&x)),
                (Penalty::l2(x.len()), oracle::l2(&x)),
            ];
            for (p, want) in cases {
                let got = p.evaluate(&x).unwrap();
                prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "{}: {got} vs {want}", p.label());
            }
        }

        #[test]
        fn nonnegative_zero_at_origin_and_convex(
            x in proptest::collection::vec(-5.0f64..5.0, 3..20),
            z_seed in 0u64..1000,
        ) {
            let n = x.len();
            let mut rng = crate::rng::SplitMix64::new(z_seed);
            let z: Vec<f64> = (0..n).map(|_| rng.next_f64() * 10.0 - 5.0).collect();
            let mid: Vec<f64> = x.iter().zip(&z).map(|(&a, &b)| 0.5 * (a + b)).collect();
            let grid = GridSpec::new(0.0, 1.0, n).unwrap();
            for p in [Penalty::h1(&grid), Penalty::tv1d(), Penalty::l1(), Penalty::l2(n)] {
                let (px, pz) = (p.evaluate(&x).unwrap(), p.evaluate(&z).unwrap());
                let pm = p.evaluate(&mid).unwrap();
                prop_assert!(px >= 0.0 && pz >= 0.0);
                prop_assert!(p.evaluate(&vec![0.0; n]).unwrap() == 0.0);
                prop_assert!(pm <= 0.5 * px + 0.5 * pz + 1e-10 * (1.0 + px + pz),
                    "{} violates midpoint convexity", p.label());
            }
        }

        #[test]
        fn positive_homogeneity_degrees(
            x in proptest::collection::vec(-5.0f64..5.0, 3..20),
            t in 0.0f64..8.0,
        ) {
            let n = x.len();
            let tx: Vec<f64> = x.iter().map(|&v| t * v).collect();
            let grid = GridSpec::new(0.0, 1.0, n).unwrap();
            for p in [Penalty::<f64>::l1(), Penalty::tv1d()] {
                let (a, b) = (p.evaluate(&tx).unwrap(), t * p.evaluate(&x).unwrap());
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
            for p in [Penalty::l2(n), Penalty::h1(&grid)] {
                let (a, b) = (p.evaluate(&tx).unwrap(), t * t * p.evaluate(&x).unwrap());
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }
    }
}
