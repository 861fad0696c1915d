//! Piecewise-constant controls over arc length.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SphereError};
use crate::scalar::Scalar;

/// One constant-control piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPiece<T> {
    pub u: T,
    pub length: T,
}

/// Ordered list of constant-control pieces starting at arc length 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlSchedule<T> {
    pub pieces: Vec<ControlPiece<T>>,
}

impl<T: Scalar> ControlSchedule<T> {
    pub fn new(pieces: Vec<ControlPiece<T>>) -> Result<Self> {
        for p in &pieces {
            if !(p.length >= T::zero()) || !p.u.is_finite() {
                return Err(SphereError::InvalidParameter(format!(
                    "control piece u={} length={}",
                    p.u, p.length
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// A single piece holding `u` for `length`.
    pub fn constant(u: T, length: T) -> Self {
        Self {
            pieces: vec![ControlPiece { u, length }],
        }
    }

    pub fn total_length(&self) -> T {
        self.pieces.iter().map(|p| p.length).sum()
    }

    /// Pieces clipped to `[0, s_end]`, dropping empty ones.
    ///
    /// Fails if the schedule is shorter than `s_end`.
    pub fn clipped(&self, s_end: T) -> Result<Vec<ControlPiece<T>>> {
        if !(s_end >= T::zero()) {
            return Err(SphereError::NegativeArcLength(s_end.to_f64().unwrap_or(f64::NAN)));
        }
        let total = self.total_length();
        // schedules built from decimal input may miss s_end by rounding
        if total < s_end - T::lit(1e-12).max(T::epsilon() * s_end * T::lit(8.0)) {
            return Err(SphereError::ScheduleTooShort {
                available: total.to_f64().unwrap_or(f64::NAN),
                requested: s_end.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut out = Vec::new();
        let mut remaining = s_end;
        for p in &self.pieces {
            if remaining <= T::zero() {
                break;
            }
            let len = p.length.min(remaining);
            if len > T::zero() {
                out.push(ControlPiece { u: p.u, length: len });
            }
            remaining = remaining - len;
        }
        Ok(out)
    }
}

/// Number of equal substeps used to cover `length` with steps no larger than `step`.
pub(crate) fn substeps<T: Scalar>(length: T, step: T) -> usize {
    (length / step).ceil().to_usize().unwrap_or(0).max(1)
}

pub(crate) fn check_step<T: Scalar>(step: T) -> Result<()> {
    if step > T::zero() && step.is_finite() {
        Ok(())
    } else {
        Err(SphereError::NonPositiveStep(step.to_f64().unwrap_or(f64::NAN)))
    }
}
