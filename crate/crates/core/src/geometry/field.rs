use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    MeasureWeight,
    Normal,
    CurvatureVector,
    Residual,
    Velocity,
    Other,
}

/// One value per surface vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexField<V> {
    pub kind: FieldKind,
    pub values: Vec<V>,
}

pub type ScalarField<T> = VertexField<T>;
pub type VectorField<T> = VertexField<Vec3<T>>;

impl<V: Copy> VertexField<V> {
    pub fn new(kind: FieldKind, values: Vec<V>) -> Self {
        Self { kind, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, V> {
        self.values.iter()
    }
}

impl<V> std::ops::Index<usize> for VertexField<V> {
    type Output = V;
    fn index(&self, i: usize) -> &V {
        &self.values[i]
    }
}

impl<T: Real> VertexField<T> {
    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }
}

impl<T: Real> VertexField<Vec3<T>> {
    pub fn norms(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// sqrt(Σ w |v|²) with vertex weights `w`.
    pub fn weighted_l2(&self, weights: &ScalarField<T>) -> T {
        self.values
            .iter()
            .zip(weights.values.iter())
            .map(|(v, w)| *w * v.norm_squared())
            .sum::<T>()
            .sqrt()
    }

    pub fn add(&self, other: &Self, kind: FieldKind) -> Result<Self> {
        other.check_len(self.len())?;
        Ok(Self::new(
            kind,
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| *a + *b)
                .collect(),
        ))
    }
}
