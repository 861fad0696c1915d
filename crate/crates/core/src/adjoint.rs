//! Costate dynamics, Hamiltonians and switching laws of both models.
//!
//! Frame model: `h1' = -k h2`, `h2' = H12 + k h1`, `H12' = -h2` with
//! Hamiltonian `-lambda + h1 - k H12` and `k = -u_max sign(H12)`.
//!
//! Chart model: costates `(lam_L, lam_l, lam_psi)` with Hamiltonian
//! `e + lam_L cos psi + lam_l sin psi / cos L + lam_psi tan L sin psi + lam_psi u / eta`
//! and `u = sign(lam_psi)`.

use crate::error::{Result, SphereError};
use crate::scalar::Scalar;
use crate::spherical::{SphericalConfig, SphericalParams};

/// Half-width of the band around zero in which a switching function counts as zero.
pub const SWITCH_DEAD_BAND: f64 = 1e-10;

/// A switching event is a singular-arc entry when both the switching
/// function and its derivative are below this magnitude.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Cost multiplier of the Maximum Principle.
///
/// The frame model writes it as `lambda in {0, 1}`, the chart model as
/// `e in {-1, 0}`; the two are related by `e = -lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostMultiplier {
    /// `lambda = 1`, `e = -1`.
    Normal,
    /// `lambda = 0`, `e = 0`.
    Abnormal,
}

impl CostMultiplier {
    pub fn lambda<T: Scalar>(self) -> T {
        match self {
            CostMultiplier::Normal => T::one(),
            CostMultiplier::Abnormal => T::zero(),
        }
    }

    pub fn e<T: Scalar>(self) -> T {
        -self.lambda::<T>()
    }
}

/// Costates `(h1, h2, H12)` of the frame model with its multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SabbanAdjoint<T> {
    pub h1: T,
    pub h2: T,
    pub h12: T,
    pub multiplier: CostMultiplier,
}

impl<T: Scalar> SabbanAdjoint<T> {
    /// Completes `(h2, H12)` with the `h1` that puts the Hamiltonian at zero
    /// for curvature `kappa`: `h1 = lambda + kappa H12`.
    pub fn on_zero_level(h2: T, h12: T, kappa: T, multiplier: CostMultiplier) -> Self {
        Self {
            h1: multiplier.lambda::<T>() + kappa * h12,
            h2,
            h12,
            multiplier,
        }
    }

    /// `dH12/ds = -h2`.
    pub fn dh12(&self) -> T {
        -self.h2
    }

    pub fn is_trivial(&self) -> bool {
        self.h1 == T::zero()
            && self.h2 == T::zero()
            && self.h12 == T::zero()
            && self.multiplier == CostMultiplier::Abnormal
    }
}

/// Costates `(lam_L, lam_l, lam_psi)` of the chart model with its multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAdjoint<T> {
    pub lam_lat: T,
    pub lam_lon: T,
    pub lam_heading: T,
    pub multiplier: CostMultiplier,
}

impl<T: Scalar> SphericalAdjoint<T> {
    /// Solves for `(lam_L, lam_l)` given `lam_psi`, its derivative and the
    /// control, such that the Hamiltonian vanishes and the `lam_psi` equation
    /// reproduces `dlam_heading`.
    pub fn on_zero_level(
        c: &SphericalConfig<T>,
        lam_heading: T,
        dlam_heading: T,
        u: T,
        multiplier: CostMultiplier,
        p: &SphericalParams<T>,
    ) -> Result<Self> {
        check_chart(c)?;
        let (sp, cp) = c.heading.sin_cos();
        let cl = c.lat.cos();
        let tl = c.lat.tan();
        let e = multiplier.e::<T>();
        // rows: [sin psi, -cos psi] and [cos psi, sin psi] acting on (lam_L, lam_l / cos L)
        let d = dlam_heading + lam_heading * tl * cp;
        let h = -e - lam_heading * tl * sp - lam_heading * u / p.eta;
        let lam_lat = sp * d + cp * h;
        let scaled_lon = -cp * d + sp * h;
        Ok(Self {
            lam_lat,
            lam_lon: scaled_lon * cl,
            lam_heading,
            multiplier,
        })
    }
}

fn check_chart<T: Scalar>(c: &SphericalConfig<T>) -> Result<()> {
    SphericalConfig::new(c.lat, c.lon, c.heading).map(|_| ())
}

/// `(dh1, dh2, dH12)` for curvature `kappa`.
pub fn sabban_adjoint_rhs<T: Scalar>(a: &SabbanAdjoint<T>, kappa: T) -> [T; 3] {
    [-kappa * a.h2, a.h12 + kappa * a.h1, -a.h2]
}

/// Closed-form solution of `H12'' + (1 + k^2) H12 = -lambda k` over a
/// constant-curvature arc. Returns `(H12(s), H12'(s))`.
pub fn h12_closed_form<T: Scalar>(
    h12_0: T,
    dh12_0: T,
    kappa: T,
    multiplier: CostMultiplier,
    s: T,
) -> (T, T) {
    let w2 = T::one() + kappa * kappa;
    let w = w2.sqrt();
    let particular = -multiplier.lambda::<T>() * kappa / w2;
    let a = h12_0 - particular;
    let b = dh12_0 / w;
    let (sn, cs) = (w * s).sin_cos();
    (particular + a * cs + b * sn, w * (b * cs - a * sn))
}

/// `(dlam_L, dlam_l, dlam_psi)` along the chart model.
pub fn spherical_adjoint_rhs<T: Scalar>(
    c: &SphericalConfig<T>,
    a: &SphericalAdjoint<T>,
    _u: T,
    _eta: T,
) -> Result<[T; 3]> {
    check_chart(c)?;
    Ok(spherical_adjoint_rhs_raw(c.lat, c.heading, a))
}

pub(crate) fn spherical_adjoint_rhs_raw<T: Scalar>(lat: T, psi: T, a: &SphericalAdjoint<T>) -> [T; 3] {
    let (sp, cp) = psi.sin_cos();
    let (sl, cl) = lat.sin_cos();
    let c2 = cl * cl;
    [
        -a.lam_lon * sp / c2 * sl - a.lam_heading * sp / c2,
        T::zero(),
        a.lam_lat * sp - a.lam_lon * cp / cl - a.lam_heading * (sl / cl) * cp,
    ]
}

/// Output of a switching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Switching<T> {
    /// Saturated control with the given value.
    Bang(T),
    /// Switching function inside the dead band; a singular arc is possible.
    Singular,
}

/// Frame-model switching law: `-u_max` for `H12 > 0`, `+u_max` for `H12 < 0`.
///
/// Inside the dead band the normal case reports [`Switching::Singular`]
/// (great-circle arc, curvature 0) and the abnormal case is rejected.
pub fn switching_control_sabban<T: Scalar>(
    h12: T,
    multiplier: CostMultiplier,
    u_max: T,
) -> Result<Switching<T>> {
    if h12 > T::lit(SWITCH_DEAD_BAND) {
        Ok(Switching::Bang(-u_max))
    } else if h12 < -T::lit(SWITCH_DEAD_BAND) {
        Ok(Switching::Bang(u_max))
    } else {
        match multiplier {
            CostMultiplier::Normal => Ok(Switching::Singular),
            CostMultiplier::Abnormal => Err(SphereError::AbnormalSingular),
        }
    }
}

/// Chart-model switching law: `u = sign(lam_psi)`; zero only on a normal singular arc.
pub fn switching_control_spherical<T: Scalar>(
    lam_heading: T,
    multiplier: CostMultiplier,
) -> Result<Switching<T>> {
    if lam_heading > T::lit(SWITCH_DEAD_BAND) {
        Ok(Switching::Bang(T::one()))
    } else if lam_heading < -T::lit(SWITCH_DEAD_BAND) {
        Ok(Switching::Bang(-T::one()))
    } else {
        match multiplier {
            CostMultiplier::Normal => Ok(Switching::Singular),
            CostMultiplier::Abnormal => Err(SphereError::AbnormalSingular),
        }
    }
}

/// `-lambda + h1 - kappa H12`.
pub fn hamiltonian_sabban<T: Scalar>(a: &SabbanAdjoint<T>, kappa: T) -> T {
    -a.multiplier.lambda::<T>() + a.h1 - kappa * a.h12
}

/// Chart-model Hamiltonian.
pub fn hamiltonian_spherical<T: Scalar>(
    c: &SphericalConfig<T>,
    a: &SphericalAdjoint<T>,
    u: T,
    eta: T,
) -> T {
    let (sp, cp) = c.heading.sin_cos();
    let (sl, cl) = c.lat.sin_cos();
    a.multiplier.e::<T>()
        + a.lam_lat * cp
        + a.lam_lon * sp / cl
        + a.lam_heading * (sl / cl) * sp
        + a.lam_heading * u / eta
}

/// Costates on a singular arc (`lam_psi == 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularArcCostates<T> {
    pub lam_lat: T,
    pub lam_lon: T,
    /// False when every costate and the multiplier vanish.
    pub nontrivial: bool,
}

/// `lam_L = -e cos psi`, `lam_l = -e cos L sin psi`, the unique solution of
/// the singular-arc conditions away from the poles.
pub fn singular_arc_solution<T: Scalar>(
    c: &SphericalConfig<T>,
    multiplier: CostMultiplier,
) -> Result<SingularArcCostates<T>> {
    check_chart(c)?;
    let e = multiplier.e::<T>();
    let (sp, cp) = c.heading.sin_cos();
    let lam_lat = -e * cp;
    let lam_lon = -e * c.lat.cos() * sp;
    Ok(SingularArcCostates {
        lam_lat,
        lam_lon,
        nontrivial: multiplier == CostMultiplier::Normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::rk4_step;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const N: CostMultiplier = CostMultiplier::Normal;
    const A: CostMultiplier = CostMultiplier::Abnormal;

    fn sab(h1: f64, h2: f64, h12: f64) -> SabbanAdjoint<f64> {
        SabbanAdjoint { h1, h2, h12, multiplier: N }
    }

    #[test]
    fn multiplier_mapping() {
        assert_eq!(N.lambda::<f64>(), 1.0);
        assert_eq!(N.e::<f64>(), -1.0);
        assert_eq!(A.lambda::<f64>(), 0.0);
        assert_eq!(A.e::<f64>(), 0.0);
    }

    #[test]
    fn sabban_rhs_examples() {
        assert_eq!(sabban_adjoint_rhs(&sab(0.0, 0.0, 0.0), 1.7), [0.0, 0.0, 0.0]);
        assert_eq!(sabban_adjoint_rhs(&sab(1.0, 0.0, 0.0), 0.0), [0.0, 0.0, 0.0]);
        assert_eq!(sabban_adjoint_rhs(&sab(0.0, 1.0, 0.0), 2.0), [-2.0, 0.0, -1.0]);
    }

    #[test]
    fn closed_form_examples() {
        for s in [0.0, 0.3, 2.0, 9.0] {
            assert_eq!(h12_closed_form(0.0, 0.0, 0.0, N, s), (0.0, 0.0));
            let (h, dh) = h12_closed_form(-0.5, 0.0, 1.0, N, s);
            assert_abs_diff_eq!(h, -0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(dh, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_form_satisfies_ode_by_finite_differences() {
        let h = 1e-4;
        for (h0, d0, k, m) in [(0.3, -0.2, 1.7, N), (-0.1, 0.8, -1.0, A), (0.05, 0.0, 0.0, N)] {
            for s in [0.4, 1.3, 3.7] {
                let f = |x| h12_closed_form(h0, d0, k, m, x).0;
                let second = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
                let residual = second + (1.0 + k * k) * f(s) + m.lambda::<f64>() * k;
                assert!(residual.abs() < 1e-6, "residual {residual}");
                let first = (f(s + h) - f(s - h)) / (2.0 * h);
                assert_abs_diff_eq!(first, h12_closed_form(h0, d0, k, m, s).1, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn closed_form_matches_integrated_costates() {
        for (h2, h12, k, m) in [(0.4, -0.3, 1.0, N), (-0.2, 0.6, -3f64.sqrt(), N), (0.5, 0.1, 2.0, A)] {
            let a0 = SabbanAdjoint::on_zero_level(h2, h12, k, m);
            let step = 1e-3;
            let mut y = [a0.h1, a0.h2, a0.h12];
            for i in 1..=2000 {
                y = rk4_step(&y, step, |y| {
                    Ok(sabban_adjoint_rhs(&SabbanAdjoint { h1: y[0], h2: y[1], h12: y[2], multiplier: m }, k))
                })
                .unwrap();
                let (hc, dhc) = h12_closed_form(h12, a0.dh12(), k, m, i as f64 * step);
                assert!((y[2] - hc).abs() < 1e-9);
                assert!((-y[1] - dhc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spherical_rhs_examples() {
        let c = SphericalConfig::new(0.0, 0.0, FRAC_PI_2).unwrap();
        let zero = SphericalAdjoint { lam_lat: 0.0, lam_lon: 0.0, lam_heading: 0.0, multiplier: A };
        assert_eq!(spherical_adjoint_rhs(&c, &zero, 1.0, 1.0).unwrap(), [0.0, 0.0, 0.0]);
        let a = SphericalAdjoint { lam_lat: 1.0, lam_lon: 0.0, lam_heading: 0.0, multiplier: N };
        let d = spherical_adjoint_rhs(&c, &a, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-16);
        assert_eq!(d[1], 0.0);
        assert_abs_diff_eq!(d[2], 1.0, epsilon = 1e-16);
    }

    #[test]
    fn spherical_rhs_pole_guard() {
        let c = SphericalConfig { lat: FRAC_PI_2, lon: 0.0, heading: 0.0 };
        let a = SphericalAdjoint { lam_lat: 1.0, lam_lon: 0.0, lam_heading: 0.0, multiplier: N };
        assert!(spherical_adjoint_rhs(&c, &a, 0.0, 1.0).is_err());
    }

    #[test]
    fn sabban_switching_examples() {
        assert_eq!(switching_control_sabban(0.3, N, 2.0).unwrap(), Switching::Bang(-2.0));
        assert_eq!(switching_control_sabban(-0.3, A, 2.0).unwrap(), Switching::Bang(2.0));
        assert_eq!(switching_control_sabban(0.0, N, 2.0).unwrap(), Switching::Singular);
        assert_eq!(switching_control_sabban(5e-11, N, 2.0).unwrap(), Switching::Singular);
        assert_eq!(switching_control_sabban(0.0, A, 2.0), Err(SphereError::AbnormalSingular));
    }

    #[test]
    fn spherical_switching_examples() {
        assert_eq!(switching_control_spherical(0.2, N).unwrap(), Switching::Bang(1.0));
        assert_eq!(switching_control_spherical(-0.2, A).unwrap(), Switching::Bang(-1.0));
        assert_eq!(switching_control_spherical(0.0, N).unwrap(), Switching::Singular);
        assert_eq!(switching_control_spherical(0.0, A), Err(SphereError::AbnormalSingular));
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian_sabban(&sab(1.0, 0.0, 0.0), 3.3), 0.0);
        assert_eq!(hamiltonian_sabban(&sab(1.0, 0.0, -0.5), 1.0), 0.5);
        let c = SphericalConfig::new(0.2, 0.1, 0.3).unwrap();
        let zero = SphericalAdjoint { lam_lat: 0.0, lam_lon: 0.0, lam_heading: 0.0, multiplier: A };
        assert_eq!(hamiltonian_spherical(&c, &zero, 1.0, 1.0), 0.0);
        let c0 = SphericalConfig::new(0.0, 0.0, 0.0).unwrap();
        let a = SphericalAdjoint { lam_lat: 1.0, lam_lon: 0.0, lam_heading: 0.0, multiplier: N };
        for u in [-1.0, 0.0, 1.0] {
            assert_eq!(hamiltonian_spherical(&c0, &a, u, 0.7), 0.0);
        }
    }

    #[test]
    fn singular_arc_examples() {
        let c = SphericalConfig::new(0.3, 0.0, 1.0).unwrap();
        let s = singular_arc_solution(&c, A).unwrap();
        assert_eq!((s.lam_lat, s.lam_lon), (0.0, 0.0));
        assert!(!s.nontrivial);
        let c = SphericalConfig::new(0.0, 0.4, FRAC_PI_2).unwrap();
        let s = singular_arc_solution(&c, N).unwrap();
        assert_abs_diff_eq!(s.lam_lat, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.lam_lon, 1.0, epsilon = 1e-16);
        assert!(s.nontrivial);
    }

    #[test]
    fn zero_level_constructors() {
        let a = SabbanAdjoint::on_zero_level(0.3, -0.4, 2.0, N);
        assert_abs_diff_eq!(hamiltonian_sabban(&a, 2.0), 0.0, epsilon = 1e-16);
        let p = SphericalParams::new(0.6).unwrap();
        let c = SphericalConfig::new(0.4, -1.0, 2.2).unwrap();
        let b = SphericalAdjoint::on_zero_level(&c, 0.25, -0.7, 1.0, N, &p).unwrap();
        assert_abs_diff_eq!(hamiltonian_spherical(&c, &b, 1.0, p.eta), 0.0, epsilon = 1e-14);
        let d = spherical_adjoint_rhs(&c, &b, 1.0, p.eta).unwrap();
        assert_abs_diff_eq!(d[2], -0.7, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn singular_arc_identities(
            lat in -1.5f64..1.5, psi in -3.14f64..3.14, normal in any::<bool>(),
        ) {
            let m = if normal { N } else { A };
            let c = SphericalConfig::new(lat, 0.0, psi).unwrap();
            let s = singular_arc_solution(&c, m).unwrap();
            let e = m.e::<f64>();
            let (sp, cp) = psi.sin_cos();
            let cl = lat.cos();
            let first = s.lam_lat * sp - s.lam_lon * cp / cl;
            let second = s.lam_lat * cp + s.lam_lon * sp / cl + e;
            prop_assert!(first.abs() < 1e-12);
            prop_assert!(second.abs() < 1e-12);
        }
    }
}
