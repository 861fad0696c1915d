//! Classical fourth-order Runge-Kutta over fixed-size states.

use crate::error::Result;
use crate::scalar::Scalar;

/// One RK4 step of size `h` for `y' = f(y)`.
pub fn rk4_step<T, const N: usize, F>(y: &[T; N], h: T, mut f: F) -> Result<[T; N]>
where
    T: Scalar,
    F: FnMut(&[T; N]) -> Result<[T; N]>,
{
    let half = h * T::lit(0.5);
    let axpy = |a: &[T; N], k: &[T; N], s: T| -> [T; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] = a[i] + k[i] * s;
        }
        out
    };
    let k1 = f(y)?;
    let k2 = f(&axpy(y, &k1, half))?;
    let k3 = f(&axpy(y, &k2, half))?;
    let k4 = f(&axpy(y, &k3, h))?;
    let sixth = h / T::lit(6.0);
    let mut out = *y;
    for i in 0..N {
        out[i] = y[i] + sixth * (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]);
    }
    Ok(out)
}
