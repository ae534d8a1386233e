//! Small fixed-size vector used for points in R² and R³.
//!
//! Planar data is stored with `z = 0`; every operation in the crate keeps
//! the third component identically zero for ambient dimension 2.

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn planar(x: T, y: T) -> Self {
        Self { x, y, z: T::zero() }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    /// Unit basis vector along `axis` (0, 1 or 2).
    pub fn axis(axis: usize) -> Self {
        let mut v = Self::zero();
        v[axis] = T::one();
        v
    }

    pub fn from_slice(s: &[T]) -> Self {
        let get = |i: usize| s.get(i).copied().unwrap_or_else(T::zero);
        Self::new(get(0), get(1), get(2))
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Returns `None` for vectors shorter than `floor`.
    pub fn try_normalize(self, floor: T) -> Option<Self> {
        let n = self.norm();
        if n > floor && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counter-clockwise rotation by a quarter turn in the xy-plane.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x, T::zero())
    }

    pub fn component_min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn component_max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> std::iter::Sum for Vec3<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

/// Row-major 3×3 matrix, used for rigid motions and affine vectorfields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Mat3<T> {
    pub rows: [Vec3<T>; 3],
}

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        Self {
            rows: [Vec3::axis(0), Vec3::axis(1), Vec3::axis(2)],
        }
    }

    pub fn from_rows(rows: [Vec3<T>; 3]) -> Self {
        Self { rows }
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        Mat3::from_rows(self.rows.map(|r| r.cast()))
    }

    pub fn scaled_identity(s: T) -> Self {
        let mut m = Self::identity();
        for (i, r) in m.rows.iter_mut().enumerate() {
            r[i] = s;
        }
        m
    }

    /// Rotation about a unit axis by `angle` (Rodrigues).
    pub fn rotation(axis: Vec3<T>, angle: T) -> Self {
        let a = axis / axis.norm();
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        Self::from_rows([
            Vec3::new(t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y),
            Vec3::new(t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x),
            Vec3::new(t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c),
        ])
    }

    #[inline]
    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::from_rows([
            Vec3::new(r[0].x, r[1].x, r[2].x),
            Vec3::new(r[0].y, r[1].y, r[2].y),
            Vec3::new(r[0].z, r[1].z, r[2].z),
        ])
    }

    pub fn mul(&self, o: &Self) -> Self {
        let ot = o.transpose();
        let row = |r: Vec3<T>| Vec3::new(r.dot(ot.rows[0]), r.dot(ot.rows[1]), r.dot(ot.rows[2]));
        Self::from_rows([row(self.rows[0]), row(self.rows[1]), row(self.rows[2])])
    }

    /// Operator 2-norm bound via the Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.rows.iter().map(|r| r.norm_squared()).sum::<T>().sqrt()
    }
}

/// Symmetric eigen-decomposition of a 3×3 matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
pub fn symmetric_eigen<T: Real>(m: &Mat3<T>) -> ([T; 3], [Vec3<T>; 3]) {
    let mut a = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m.rows[i][j];
        }
    }
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= T::epsilon() * T::epsilon() * (diag + T::min_positive_value()) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = [a[idx[0]][idx[0]], a[idx[1]][idx[1]], a[idx[2]][idx[2]]];
    let vecs = idx.map(|c| Vec3::new(v[0][c], v[1][c], v[2][c]));
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_preserves_length_and_orthogonality() {
        let r = Mat3::rotation(Vec3::<f64>::new(1.0, 2.0, -0.5), 0.7);
        let v = Vec3::<f64>::new(0.3, -1.1, 2.0);
        assert!((r.apply(v).norm() - v.norm()).abs() < 1e-14);
        let rtr = r.transpose().mul(&r);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((rtr.rows[i][j] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let q = Mat3::rotation(Vec3::<f64>::new(0.2, 1.0, 0.4), 1.1);
        let d = Mat3::from_rows([
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 0.5),
        ]);
        let m = q.mul(&d).mul(&q.transpose());
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 0.5).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
        for (l, v) in vals.iter().zip(vecs.iter()) {
            let mv = m.apply(*v);
            assert!((mv - *v * *l).norm() < 1e-12);
        }
    }
}
