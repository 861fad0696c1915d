//! Rotations of the unit sphere: hat map, exponential and logarithm, distance,
//! and projection back onto SO(3) after numeric drift.

use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SphereError};
use crate::scalar::Scalar;

/// A 3-vector.
pub type Vec3<T> = [T; 3];

pub fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

pub fn scale<T: Scalar>(a: Vec3<T>, k: T) -> Vec3<T> {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Matrix3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = T::one();
        }
        Self { m }
    }

    pub fn from_columns(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self {
            m: [
                [c0[0], c1[0], c2[0]],
                [c0[1], c1[1], c2[1]],
                [c0[2], c1[2], c2[2]],
            ],
        }
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn transpose(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    pub fn scaled(&self, k: T) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|x| *x = *x * k);
        out
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.iter().flatten().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> [T; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_row_major(a: [T; 9]) -> Self {
        Self {
            m: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
        }
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

impl<T: Scalar> Mul for Matrix3<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j]
                    + self.m[i][1] * rhs.m[1][j]
                    + self.m[i][2] * rhs.m[2][j];
            }
        }
        out
    }
}

impl<T: Scalar> Add for Matrix3<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Scalar> Sub for Matrix3<T> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] = self.m[i][j] - rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Scalar> Neg for Matrix3<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scaled(-T::one())
    }
}

/// Hat map: `skew(v) * w == v x w`.
pub fn skew<T: Scalar>(v: Vec3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new([[z, -v[2], v[1]], [v[2], z, -v[0]], [-v[1], v[0], z]])
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
pub fn vee<T: Scalar>(m: &Matrix3<T>) -> Vec3<T> {
    let half = T::lit(0.5);
    [
        (m.m[2][1] - m.m[1][2]) * half,
        (m.m[0][2] - m.m[2][0]) * half,
        (m.m[1][0] - m.m[0][1]) * half,
    ]
}

/// Element of SO(3). The columns are the frame vectors `(X, T, N)` when the
/// rotation encodes a vehicle configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T>(Matrix3<T>);

impl<T: Scalar> Rotation<T> {
    /// Validates orthonormality and orientation to [`Scalar::manifold_tol`].
    pub fn new(m: Matrix3<T>) -> Result<Self> {
        let tol = T::manifold_tol();
        if !m.is_finite() {
            return Err(SphereError::NotARotation("non-finite entry".into()));
        }
        let gram = (m.transpose() * m - Matrix3::identity()).frobenius_norm();
        if gram > tol {
            return Err(SphereError::NotARotation(format!(
                "|m^T m - I|_F = {gram}"
            )));
        }
        let det = m.determinant();
        if (det - T::one()).abs() > tol {
            return Err(SphereError::NotARotation(format!("det = {det}")));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix the caller knows to be a rotation (closed-form products).
    pub(crate) fn from_matrix_unchecked(m: Matrix3<T>) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn from_columns(x: Vec3<T>, t: Vec3<T>, n: Vec3<T>) -> Result<Self> {
        Self::new(Matrix3::from_columns(x, t, n))
    }

    pub fn matrix(&self) -> &Matrix3<T> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Position column `X`.
    pub fn x(&self) -> Vec3<T> {
        self.0.column(0)
    }

    /// Tangent column `T`.
    pub fn t(&self) -> Vec3<T> {
        self.0.column(1)
    }

    /// Normal column `N = X x T`.
    pub fn n(&self) -> Vec3<T> {
        self.0.column(2)
    }

    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        self.0.apply(v)
    }
}

impl<T: Scalar> Mul for Rotation<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

#[derive(Serialize, Deserialize)]
struct RotationRepr<T> {
    rotation: [T; 9],
}

impl<T: Scalar + Serialize> Serialize for Rotation<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RotationRepr {
            rotation: self.0.to_row_major(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Rotation<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = RotationRepr::<T>::deserialize(deserializer)?;
        Rotation::new(Matrix3::from_row_major(repr.rotation)).map_err(D::Error::custom)
    }
}

/// Unit axis and angle in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle<T> {
    pub axis: Vec3<T>,
    pub angle: T,
}

impl<T: Scalar> AxisAngle<T> {
    /// Rotation vector `axis * angle`.
    pub fn vector(&self) -> Vec3<T> {
        scale(self.axis, self.angle)
    }
}

/// `exp(s * skew(omega))` in closed form.
pub fn exp_rotation<T: Scalar>(omega: Vec3<T>, s: T) -> Rotation<T> {
    let k = skew(scale(omega, s));
    let k2 = k * k;
    let theta = norm(omega) * s.abs();
    let (a, b) = if theta < T::lit(1e-6) {
        let t2 = theta * theta;
        (
            T::one() - t2 / T::lit(6.0),
            T::lit(0.5) - t2 / T::lit(24.0),
        )
    } else {
        (theta.sin() / theta, (T::one() - theta.cos()) / (theta * theta))
    };
    Rotation(Matrix3::identity() + k.scaled(a) + k2.scaled(b))
}

/// Principal logarithm. Angle 0 reports the fixed axis `(1, 0, 0)`.
pub fn log_rotation<T: Scalar>(r: &Rotation<T>) -> AxisAngle<T> {
    let m = &r.0;
    let two = T::lit(2.0);
    // v = 2 sin(angle) * axis
    let v = scale(vee(m), two);
    let sin_t = norm(v) / two;
    let cos_t = (m.trace() - T::one()) / two;
    let angle = sin_t.atan2(cos_t);
    if cos_t >= T::zero() {
        let nv = norm(v);
        if nv == T::zero() {
            return AxisAngle {
                axis: [T::one(), T::zero(), T::zero()],
                angle: T::zero(),
            };
        }
        return AxisAngle {
            axis: scale(v, T::one() / nv),
            angle,
        };
    }
    // Beyond a quarter turn the antisymmetric part loses precision; read the
    // axis off the symmetric part (1 - cos) a a^T instead.
    let mut b = (*m + m.transpose()).scaled(T::lit(0.5));
    for i in 0..3 {
        b.m[i][i] = b.m[i][i] - cos_t;
    }
    let j = (0..3)
        .max_by(|&p, &q| b.m[p][p].partial_cmp(&b.m[q][q]).unwrap())
        .unwrap();
    let denom = (b.m[j][j] * (T::one() - cos_t)).sqrt();
    let mut axis = scale(b.column(j), T::one() / denom);
    axis = scale(axis, T::one() / norm(axis));
    if dot(axis, v) < T::zero() {
        axis = scale(axis, -T::one());
    }
    AxisAngle { axis, angle }
}

/// Rotation vector `log(R)` as a 3-vector.
pub fn log_vector<T: Scalar>(r: &Rotation<T>) -> Vec3<T> {
    log_rotation(r).vector()
}

/// Angle of `r1^T r2`, in `[0, pi]`.
pub fn rotation_distance<T: Scalar>(r1: &Rotation<T>, r2: &Rotation<T>) -> T {
    log_rotation(&(r1.inverse() * *r2)).angle
}

/// Nearest rotation by polar decomposition (Newton-Schulz iteration).
pub fn orthonormalize<T: Scalar>(m: &Matrix3<T>) -> Result<Rotation<T>> {
    let det = m.determinant();
    if !(det > T::zero()) {
        return Err(SphereError::NonPositiveDeterminant(
            det.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let three = Matrix3::identity().scaled(T::lit(3.0));
    let half = T::lit(0.5);
    let converged = T::epsilon() * T::lit(16.0);
    let mut x = *m;
    for k in 0..24 {
        let gram = x.transpose() * x;
        if k >= 4 && (gram - Matrix3::identity()).frobenius_norm() <= converged {
            break;
        }
        x = (x * (three - gram)).scaled(half);
    }
    Rotation::new(x)
}

/// Inverse of the left Jacobian of SO(3) at rotation vector `phi`:
/// `log(exp(eps) exp(phi)) ~ phi + J_l^{-1}(phi) eps`.
pub fn left_jacobian_inverse<T: Scalar>(phi: Vec3<T>) -> Matrix3<T> {
    let theta = norm(phi);
    let k = skew(phi);
    let coeff = if theta < T::lit(1e-4) {
        T::one() / T::lit(12.0) + theta * theta / T::lit(720.0)
    } else {
        let half = theta / T::lit(2.0);
        // 1/theta^2 - (1 + cos) / (2 theta sin) written via cot(theta/2)
        (T::one() - half * half.cos() / half.sin()) / (theta * theta)
    };
    Matrix3::identity() - k.scaled(T::lit(0.5)) + (k * k).scaled(coeff)
}
