use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::{symmetric_eigen, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", bound = "T: Real")]
pub enum FieldType<T> {
    Zero,
    /// X(x) = x/2.
    Renormalizing,
    /// X(x) = A x + b.
    Affine { a: Mat3<T>, b: Vec3<T> },
}

/// Ambient vector field X with its linear-growth constant sup |X(x)| / (|x| + 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AmbientVectorField<T> {
    pub kind: FieldType<T>,
    pub growth_constant: T,
}

impl<T: Real> AmbientVectorField<T> {
    pub fn zero() -> Self {
        Self {
            kind: FieldType::Zero,
            growth_constant: T::zero(),
        }
    }

    pub fn renormalizing() -> Self {
        Self {
            kind: FieldType::Renormalizing,
            growth_constant: T::lit(0.5),
        }
    }

    /// The growth constant of an affine field is max(‖A‖₂, |b|).
    pub fn affine(a: Mat3<T>, b: Vec3<T>) -> Result<Self> {
        let (vals, _) = symmetric_eigen(&a.transpose().mul(&a));
        let op = vals[2].max(T::zero()).sqrt();
        let g = op.max(b.norm());
        if !g.is_finite() {
            return Err(Error::InvalidParameter("affine field has non-finite coefficients".into()));
        }
        Ok(Self {
            kind: FieldType::Affine { a, b },
            growth_constant: g,
        })
    }

    #[inline]
    pub fn eval(&self, x: Vec3<T>) -> Vec3<T> {
        match &self.kind {
            FieldType::Zero => Vec3::zero(),
            FieldType::Renormalizing => x * T::lit(0.5),
            FieldType::Affine { a, b } => a.apply(x) + *b,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FieldType::Zero)
    }

    pub fn is_renormalizing(&self) -> bool {
        matches!(self.kind, FieldType::Renormalizing)
    }

    /// Variant name, used to check that two trajectories are comparable.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FieldType::Zero => "zero",
            FieldType::Renormalizing => "renormalizing",
            FieldType::Affine { .. } => "affine",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_constants() {
        let r = AmbientVectorField::<f64>::renormalizing();
        let x = Vec3::new(1.0, -2.0, 0.5);
        assert_eq!(r.eval(x), x * 0.5);
        assert_eq!(r.growth_constant, 0.5);
        let a = AmbientVectorField::affine(Mat3::<f64>::scaled_identity(0.5), Vec3::<f64>::zero()).unwrap();
        assert!((a.growth_constant - 0.5).abs() < 1e-12);
        let b = AmbientVectorField::affine(Mat3::<f64>::scaled_identity(0.1), Vec3::new(3.0, 4.0, 0.0)).unwrap();
        assert!((b.growth_constant - 5.0).abs() < 1e-12);
        assert_eq!(AmbientVectorField::<f64>::zero().eval(x), Vec3::<f64>::zero());
    }
}
