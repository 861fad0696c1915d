//! Frame model of the vehicle: `g = (X | T | N)` in SO(3) driven by
//! `dg/ds = g (l1 - u L12)` with geodesic curvature `u`.
//!
//! Convention: `u > 0` turns `T` toward `N = X x T`, which is a left turn
//! seen from outside the sphere. `LeftTurn` is `u = +u_max`, `RightTurn` is
//! `u = -u_max`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::control::{check_step, substeps, ControlSchedule};
use crate::error::{Result, SphereError};
use crate::ode::rk4_step;
use crate::scalar::Scalar;
use crate::so3::{exp_rotation, orthonormalize, skew, Matrix3, Rotation, Vec3};

/// Steps between re-projections onto SO(3) in [`integrate_frame`].
pub const REORTHONORMALIZE_EVERY: usize = 100;

/// Curvature bound of the frame model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SabbanParams<T> {
    pub u_max: T,
}

impl<T: Scalar> SabbanParams<T> {
    pub fn new(u_max: T) -> Result<Self> {
        if u_max > T::zero() && u_max.is_finite() {
            Ok(Self { u_max })
        } else {
            Err(SphereError::InvalidParameter(format!("u_max = {u_max} must be > 0")))
        }
    }

    /// Parameters whose tight turn has Euclidean radius `r` in `(0, 1)`.
    pub fn from_radius(r: T) -> Result<Self> {
        if !(r > T::zero() && r < T::one()) {
            return Err(SphereError::InvalidParameter(format!("radius {r} not in (0, 1)")));
        }
        Self::new((T::one() / (r * r) - T::one()).sqrt())
    }

    /// Radius of the tightest turn, `1 / sqrt(1 + u_max^2)`.
    pub fn radius(&self) -> T {
        turn_radius(self.u_max)
    }

    /// Arc length of one full tight turn.
    pub fn turn_period(&self) -> T {
        T::two_pi() * self.radius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SegmentKind {
    LeftTurn,
    RightTurn,
    GreatCircle,
}

impl SegmentKind {
    pub fn letter(self) -> char {
        match self {
            SegmentKind::LeftTurn => 'L',
            SegmentKind::RightTurn => 'R',
            SegmentKind::GreatCircle => 'G',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(SegmentKind::LeftTurn),
            'R' => Some(SegmentKind::RightTurn),
            'G' => Some(SegmentKind::GreatCircle),
            _ => None,
        }
    }

    /// Geodesic curvature of this segment kind.
    pub fn curvature<T: Scalar>(self, u_max: T) -> T {
        match self {
            SegmentKind::LeftTurn => u_max,
            SegmentKind::RightTurn => -u_max,
            SegmentKind::GreatCircle => T::zero(),
        }
    }

    /// Kind selected by a curvature value (sign only).
    pub fn from_curvature<T: Scalar>(u: T) -> Self {
        if u > T::zero() {
            SegmentKind::LeftTurn
        } else if u < T::zero() {
            SegmentKind::RightTurn
        } else {
            SegmentKind::GreatCircle
        }
    }

    /// Swaps turn handedness; great circles map to themselves.
    pub fn mirrored(self) -> Self {
        match self {
            SegmentKind::LeftTurn => SegmentKind::RightTurn,
            SegmentKind::RightTurn => SegmentKind::LeftTurn,
            SegmentKind::GreatCircle => SegmentKind::GreatCircle,
        }
    }

    /// Arc length after which this segment returns to its start.
    pub fn period<T: Scalar>(self, u_max: T) -> T {
        T::two_pi() * turn_radius(self.curvature(u_max))
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One arc of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub kind: SegmentKind,
    pub length: T,
}

/// Body-frame angular velocity `(u, 0, 1)` of the generator `l1 - u L12`.
pub fn generator_axis<T: Scalar>(u: T) -> Vec3<T> {
    [u, T::zero(), T::one()]
}

/// `l1 - u L12` as a matrix.
pub fn control_generator<T: Scalar>(u: T) -> Matrix3<T> {
    skew(generator_axis(u))
}

/// Exact solution of the frame equations for constant curvature over length `s`.
pub fn propagate_segment<T: Scalar>(g0: &Rotation<T>, u: T, s: T) -> Rotation<T> {
    *g0 * exp_rotation(generator_axis(u), s)
}

/// Euclidean radius of the circle traced with constant curvature `u`.
pub fn turn_radius<T: Scalar>(u: T) -> T {
    T::one() / (T::one() + u * u).sqrt()
}

/// Integrates the nine frame entries with RK4, calling `visit(s, g, u)` after
/// every step (and once at `s = 0`).
pub fn integrate_frame_with<T, F>(
    g0: &Rotation<T>,
    control: &ControlSchedule<T>,
    s_end: T,
    step: T,
    mut visit: F,
) -> Result<Rotation<T>>
where
    T: Scalar,
    F: FnMut(T, &Rotation<T>, T),
{
    check_step(step)?;
    let pieces = control.clipped(s_end)?;
    let mut g = *g0;
    let mut s = T::zero();
    visit(s, &g, pieces.first().map_or(T::zero(), |p| p.u));
    let mut count = 0usize;
    for piece in pieces {
        let a = control_generator(piece.u);
        let n = substeps(piece.length, step);
        let h = piece.length / T::from_usize(n).unwrap();
        let start = s;
        for k in 1..=n {
            let y = rk4_step(&g.matrix().to_row_major(), h, |y| {
                Ok((Matrix3::from_row_major(*y) * a).to_row_major())
            })?;
            let mut m = Matrix3::from_row_major(y);
            count += 1;
            if count % REORTHONORMALIZE_EVERY == 0 {
                m = *orthonormalize(&m)?.matrix();
            }
            g = Rotation::from_matrix_unchecked(m);
            s = start + h * T::from_usize(k).unwrap();
            visit(s, &g, piece.u);
        }
    }
    Ok(g)
}

/// Numeric cross-check of [`propagate_segment`]: RK4 on the frame equations,
/// re-orthonormalized every [`REORTHONORMALIZE_EVERY`] steps.
pub fn integrate_frame<T: Scalar>(
    g0: &Rotation<T>,
    control: &ControlSchedule<T>,
    s_end: T,
    step: T,
) -> Result<Rotation<T>> {
    let g = integrate_frame_with(g0, control, s_end, step, |_, _, _| {})?;
    Rotation::new(*g.matrix()).or_else(|_| orthonormalize(g.matrix()))
}

/// Sample of a closed-form trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample<T> {
    pub s: T,
    pub frame: Rotation<T>,
    pub u: T,
}

/// Samples a word at multiples of `ds` and at every segment endpoint.
pub fn sample_trace<T: Scalar>(
    g0: &Rotation<T>,
    word: &[Segment<T>],
    params: &SabbanParams<T>,
    ds: T,
) -> Result<Vec<TraceSample<T>>> {
    check_step(ds)?;
    let first_u = word.first().map_or(T::zero(), |seg| seg.kind.curvature(params.u_max));
    let mut out = vec![TraceSample {
        s: T::zero(),
        frame: *g0,
        u: first_u,
    }];
    let mut g = *g0;
    let mut s0 = T::zero();
    let mut k = 1usize;
    for seg in word {
        if seg.length < T::zero() {
            return Err(SphereError::NegativeArcLength(seg.length.to_f64().unwrap_or(f64::NAN)));
        }
        let u = seg.kind.curvature(params.u_max);
        let s1 = s0 + seg.length;
        loop {
            let s = ds * T::from_usize(k).unwrap();
            if s >= s1 {
                break;
            }
            out.push(TraceSample {
                s,
                frame: propagate_segment(&g, u, s - s0),
                u,
            });
            k += 1;
        }
        g = propagate_segment(&g, u, seg.length);
        if seg.length > T::zero() {
            out.push(TraceSample { s: s1, frame: g, u });
        }
        if ds * T::from_usize(k).unwrap() == s1 {
            k += 1;
        }
        s0 = s1;
    }
    Ok(out)
}
