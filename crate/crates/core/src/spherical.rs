//! Latitude / longitude / heading model of the same vehicle.
//!
//! Per unit arc length:
//!
//! ```text
//! dL/ds   = cos(psi)
//! dl/ds   = sin(psi) / cos(L)
//! dpsi/ds = tan(L) sin(psi) + u / eta,   u in [-1, 1]
//! ```
//!
//! Heading is measured from local north toward local east, so `u = +1` turns
//! right. The frame of a configuration is `X` outward radial, `T` along the
//! heading, `N = X x T`; with that chart the frame model sees geodesic
//! curvature `-u / eta`.

use crate::control::{check_step, substeps, ControlSchedule};
use crate::error::{Result, SphereError};
use crate::ode::rk4_step;
use crate::sabban::SabbanParams;
use crate::scalar::{wrap_angle, Scalar};
use crate::so3::{cross, dot, Matrix3, Rotation, Vec3};

/// Exclusion band around the poles, in radians of latitude.
pub const POLE_GUARD: f64 = 1e-6;

/// Chart coordinates of a configuration, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalConfig<T> {
    pub lat: T,
    pub lon: T,
    pub heading: T,
}

impl<T: Scalar> SphericalConfig<T> {
    /// Checks the pole guard and wraps longitude and heading into `(-pi, pi]`.
    pub fn new(lat: T, lon: T, heading: T) -> Result<Self> {
        if !(lat.is_finite() && lon.is_finite() && heading.is_finite()) {
            return Err(SphereError::InvalidParameter("non-finite configuration".into()));
        }
        check_pole(lat)?;
        Ok(Self {
            lat,
            lon: wrap_angle(lon),
            heading: wrap_angle(heading),
        })
    }

    pub fn from_degrees(lat_deg: T, lon_deg: T, heading_deg: T) -> Result<Self> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians(), heading_deg.to_radians())
    }

    pub fn to_degrees(&self) -> (T, T, T) {
        (
            self.lat.to_degrees(),
            self.lon.to_degrees(),
            self.heading.to_degrees(),
        )
    }

    fn as_array(&self) -> [T; 3] {
        [self.lat, self.lon, self.heading]
    }
}

fn check_pole<T: Scalar>(lat: T) -> Result<()> {
    if lat.abs() < T::FRAC_PI_2() - T::lit(POLE_GUARD) {
        Ok(())
    } else {
        Err(SphereError::SingularChart {
            lat: lat.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Turn-rate parameter of the chart model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalParams<T> {
    pub eta: T,
}

impl<T: Scalar> SphericalParams<T> {
    pub fn new(eta: T) -> Result<Self> {
        if eta > T::zero() && eta.is_finite() {
            Ok(Self { eta })
        } else {
            Err(SphereError::InvalidParameter(format!("eta = {eta} must be > 0")))
        }
    }

    /// Radius of the tightest turn, `eta / sqrt(1 + eta^2)`.
    pub fn tight_radius(&self) -> T {
        self.eta / (T::one() + self.eta * self.eta).sqrt()
    }

    /// Matching curvature bound of the frame model, `u_max = 1 / eta`.
    pub fn u_max(&self) -> T {
        T::one() / self.eta
    }

    pub fn sabban(&self) -> SabbanParams<T> {
        SabbanParams { u_max: self.u_max() }
    }

    pub fn from_sabban(p: &SabbanParams<T>) -> Self {
        Self {
            eta: T::one() / p.u_max,
        }
    }
}

/// Geodesic curvature the frame model sees for chart control `u`.
pub fn sabban_curvature<T: Scalar>(u: T, p: &SphericalParams<T>) -> T {
    -u / p.eta
}

/// Chart control producing frame-model curvature `kappa`.
pub fn spherical_control<T: Scalar>(kappa: T, p: &SphericalParams<T>) -> T {
    -kappa * p.eta
}

/// Right-hand side `(dL, dl, dpsi)` per unit arc length.
pub fn rhs<T: Scalar>(c: &SphericalConfig<T>, u: T, p: &SphericalParams<T>) -> Result<[T; 3]> {
    rhs_raw(c.as_array(), u, p.eta)
}

fn rhs_raw<T: Scalar>(y: [T; 3], u: T, eta: T) -> Result<[T; 3]> {
    let [lat, _, psi] = y;
    check_pole(lat)?;
    let (sp, cp) = psi.sin_cos();
    Ok([cp, sp / lat.cos(), lat.tan() * sp + u / eta])
}

/// RK4 integration of the chart model, calling `visit(s, config, u)` after
/// every step (and once at `s = 0`). Longitude and heading are wrapped after
/// each step.
pub fn integrate_with<T, F>(
    c0: &SphericalConfig<T>,
    control: &ControlSchedule<T>,
    p: &SphericalParams<T>,
    s_end: T,
    step: T,
    mut visit: F,
) -> Result<SphericalConfig<T>>
where
    T: Scalar,
    F: FnMut(T, &SphericalConfig<T>, T),
{
    check_step(step)?;
    let pieces = control.clipped(s_end)?;
    let mut c = *c0;
    let mut s = T::zero();
    visit(s, &c, pieces.first().map_or(T::zero(), |q| q.u));
    for piece in pieces {
        let n = substeps(piece.length, step);
        let h = piece.length / T::from_usize(n).unwrap();
        let start = s;
        for k in 1..=n {
            let next = rk4_step(&c.as_array(), h, |y| rhs_raw(*y, piece.u, p.eta));
            let s_next = start + h * T::from_usize(k).unwrap();
            let breach = || SphereError::PoleBreach {
                s: s_next.to_f64().unwrap_or(f64::NAN),
            };
            let y = next.map_err(|_| breach())?;
            check_pole(y[0]).map_err(|_| breach())?;
            c = SphericalConfig {
                lat: y[0],
                lon: wrap_angle(y[1]),
                heading: wrap_angle(y[2]),
            };
            s = s_next;
            visit(s, &c, piece.u);
        }
    }
    Ok(c)
}

/// RK4 integration of the chart model under a piecewise-constant control.
pub fn integrate<T: Scalar>(
    c0: &SphericalConfig<T>,
    control: &ControlSchedule<T>,
    p: &SphericalParams<T>,
    s_end: T,
    step: T,
) -> Result<SphericalConfig<T>> {
    integrate_with(c0, control, p, s_end, step, |_, _, _| {})
}

/// Local north and east unit tangents at `(lat, lon)`.
pub fn local_tangents<T: Scalar>(lat: T, lon: T) -> (Vec3<T>, Vec3<T>) {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    let north = [-sl * co, -sl * so, cl];
    let east = [-so, co, T::zero()];
    (north, east)
}

/// Frame `(X, T, N)` of a chart configuration.
pub fn to_rotation<T: Scalar>(c: &SphericalConfig<T>) -> Result<Rotation<T>> {
    check_pole(c.lat)?;
    let (sl, cl) = c.lat.sin_cos();
    let (so, co) = c.lon.sin_cos();
    let x = [cl * co, cl * so, sl];
    let (north, east) = local_tangents(c.lat, c.lon);
    let (sp, cp) = c.heading.sin_cos();
    let t = [
        cp * north[0] + sp * east[0],
        cp * north[1] + sp * east[1],
        cp * north[2] + sp * east[2],
    ];
    let n = cross(x, t);
    Ok(Rotation::from_matrix_unchecked(Matrix3::from_columns(x, t, n)))
}

/// Chart coordinates of a frame; fails within the pole guard.
pub fn from_rotation<T: Scalar>(r: &Rotation<T>) -> Result<SphericalConfig<T>> {
    let x = r.x();
    let lat = x[2].max(-T::one()).min(T::one()).asin();
    check_pole(lat)?;
    // atan2 on the horizontal components keeps full precision near the equator
    let lat = x[2].atan2((x[0] * x[0] + x[1] * x[1]).sqrt());
    let lon = x[1].atan2(x[0]);
    let (north, east) = local_tangents(lat, lon);
    let t = r.t();
    let heading = dot(t, east).atan2(dot(t, north));
    SphericalConfig::new(lat, lon, heading)
}

fn rot_z<T: Scalar>(a: T) -> Matrix3<T> {
    let (s, c) = a.sin_cos();
    let (z, o) = (T::zero(), T::one());
    Matrix3::new([[c, -s, z], [s, c, z], [z, z, o]])
}

fn rot_y<T: Scalar>(a: T) -> Matrix3<T> {
    let (s, c) = a.sin_cos();
    let (z, o) = (T::zero(), T::one());
    Matrix3::new([[c, z, s], [z, o, z], [-s, z, c]])
}

/// `R_z(lon) R_y(-lat - pi/2)`: aligns the inertial axes with the local
/// (north, east, radially inward) body axes.
pub fn net_rotation<T: Scalar>(lat: T, lon: T) -> Rotation<T> {
    Rotation::from_matrix_unchecked(rot_z(lon) * rot_y(-lat - T::FRAC_PI_2()))
}

/// Body angular-velocity matrix `R_net^T dR_net/dt` for latitude/longitude
/// rates `(d_lat, d_lon)`.
pub fn body_angular_velocity<T: Scalar>(lat: T, _lon: T, d_lat: T, d_lon: T) -> Matrix3<T> {
    let (sl, cl) = lat.sin_cos();
    let z = T::zero();
    Matrix3::new([
        [z, sl * d_lon, -d_lat],
        [-sl * d_lon, z, -cl * d_lon],
        [d_lat, cl * d_lon, z],
    ])
}
