//! The Tikhonov model: forward operator, observed data and penalty vector,
//! together with the cached quantities every solver needs.

use std::sync::OnceLock;

use crate::error::CoreError;
use crate::linalg::{norm2_sq, sub, Matrix};
use crate::operators::LinearOperator;
use crate::penalties::Penalty;
use crate::scalar::Scalar;

/// `min_x ‖Kx - y‖² + Σ η_i ψ_i(x)` — the operator, data and penalties.
/// Immutable after construction; caches are lazily filled and shared.
#[derive(Debug)]
pub struct TikhonovModel<T> {
    operator: LinearOperator<T>,
    data: Vec<T>,
    penalties: Vec<Penalty<T>>,
    normal_matrix: OnceLock<Matrix<T>>, // 2 KᵀK
    normal_rhs: OnceLock<Vec<T>>,       // 2 Kᵀy
    op_norm_sq: OnceLock<T>,            // largest eigenvalue of KᵀK
}

impl<T: Scalar> TikhonovModel<T> {
    pub fn new(
        operator: LinearOperator<T>,
        data: Vec<T>,
        penalties: Vec<Penalty<T>>,
    ) -> Result<Self, CoreError<T>> {
        if data.len() != operator.rows() {
            return Err(CoreError::DimensionMismatch {
                expected: operator.rows(),
                got: data.len(),
                what: "model data",
            });
        }
        if penalties.is_empty() {
            return Err(CoreError::InvalidInput("model needs at least one penalty".into()));
        }
        Ok(TikhonovModel {
            operator,
            data,
            penalties,
            normal_matrix: OnceLock::new(),
            normal_rhs: OnceLock::new(),
            op_norm_sq: OnceLock::new(),
        })
    }

    pub fn operator(&self) -> &LinearOperator<T> {
        &self.operator
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn penalties(&self) -> &[Penalty<T>] {
        &self.penalties
    }

    pub fn n_penalties(&self) -> usize {
        self.penalties.len()
    }

    pub fn unknowns(&self) -> usize {
        self.operator.cols()
    }

    /// Fidelity `φ(x) = ‖Kx - y‖²` (no ½ factor).
    pub fn phi(&self, x: &[T]) -> T {
        let kx = self.operator.matrix().matvec(x);
        norm2_sq(&sub(&kx, &self.data))
    }

    /// All penalty values at `x`, in model order.
    pub fn psi(&self, x: &[T]) -> Result<Vec<T>, CoreError<T>> {
        self.penalties.iter().map(|p| p.evaluate(x)).collect()
    }

    /// `2 KᵀK`, cached.
    pub fn normal_matrix(&self) -> &Matrix<T> {
        self.normal_matrix.get_or_init(|| {
            let mut g = self.operator.matrix().gram();
            g.scale(T::c(2.0));
            g
        })
    }

    /// `2 Kᵀy`, cached.
    pub fn normal_rhs(&self) -> &[T] {
        self.normal_rhs.get_or_init(|| {
            let mut v = self.operator.matrix().matvec_t(&self.data);
            for vi in v.iter_mut() {
                *vi = *vi * T::c(2.0);
            }
            v
        })
    }

    /// Largest eigenvalue of `KᵀK` by power iteration with a fixed
    /// deterministic start vector, cached. Slightly overestimated on return
    /// so it is safe to use as a Lipschitz bound.
    pub fn operator_norm_sq(&self) -> T {
        *self.op_norm_sq.get_or_init(|| {
            let k = self.operator.matrix();
            let n = k.cols();
            let mut v: Vec<T> = (0..n)
                .map(|i| T::one() + T::c(0.5) * T::from_usize(i % 7).unwrap())
                .collect();
            let mut lambda = T::zero();
            for _ in 0..200 {
                let kv = k.matvec(&v);
                let mut w = k.matvec_t(&kv);
                let norm = norm2_sq(&w).sqrt();
                if norm == T::zero() {
                    return T::zero();
                }
                for wi in w.iter_mut() {
                    *wi = *wi / norm;
                }
                let new_lambda = norm;
                let done = (new_lambda - lambda).abs() <= T::c(1e-12) * new_lambda;
                lambda = new_lambda;
                v = w;
                if done {
                    break;
                }
            }
            lambda * T::c(1.01)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::operators::LinearOperator;

    #[test]
    fn phi_is_squared_residual_without_half() {
        let op = LinearOperator::new(Matrix::<f64>::identity(3)).unwrap();
        let model = TikhonovModel::new(op, vec![1.0, 0.0, 0.0], vec![Penalty::l2(3)]).unwrap();
        // at x=0: ‖y‖² = 1
        assert_eq!(model.phi(&[0.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn operator_norm_of_scaled_identity() {
        let mut m = Matrix::<f64>::identity(5);
        m.scale(3.0);
        let op = LinearOperator::new(m).unwrap();
        let model = TikhonovModel::new(op, vec![0.0; 5], vec![Penalty::l2(5)]).unwrap();
        let est = model.operator_norm_sq();
        assert!(est >= 9.0 && est <= 9.2, "{est}");
    }

    #[test]
    fn data_dimension_is_checked() {
        let op = LinearOperator::new(Matrix::<f64>::identity(3)).unwrap();
        assert!(TikhonovModel::new(op, vec![1.0; 4], vec![Penalty::l2(3)]).is_err());
    }
}
