//! Forward generation of extremals: state and costate integrated together
//! under the switching law, with switching events located by bisection.

use crate::adjoint::{
    sabban_adjoint_rhs, spherical_adjoint_rhs_raw, CostMultiplier, SabbanAdjoint,
    SphericalAdjoint, SINGULAR_TOL, SWITCH_DEAD_BAND,
};
use crate::control::check_step;
use crate::error::{Result, SphereError};
use crate::ode::rk4_step;
use crate::sabban::{control_generator, SabbanParams, Segment, SegmentKind};
use crate::scalar::{wrap_angle, Scalar};
use crate::so3::{Matrix3, Rotation};
use crate::spherical::{SphericalConfig, SphericalParams, POLE_GUARD};
use crate::word::{is_family_word, letters, PathWord};

/// Width in arc length to which switching instants are bisected.
pub const EVENT_TOL: f64 = 1e-10;

/// Switching-function crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRecord<T> {
    pub s_switch: T,
    /// Switching function (`H12` or `lam_psi`) just after the event.
    pub value: T,
    /// Its arc-length derivative.
    pub rate: T,
    pub control_before: T,
    pub control_after: T,
}

/// Result of checking a synthesized word against the candidate family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordClass {
    InFamily(PathWord),
    Counterexample(String),
}

impl WordClass {
    pub fn in_family(&self) -> bool {
        matches!(self, WordClass::InFamily(_))
    }

    pub fn word(&self) -> String {
        match self {
            WordClass::InFamily(w) => w.to_string(),
            WordClass::Counterexample(w) => w.clone(),
        }
    }
}

fn classify(kinds: &[SegmentKind]) -> WordClass {
    if is_family_word(kinds) {
        WordClass::InFamily(PathWord::from_kinds(kinds).expect("checked"))
    } else {
        WordClass::Counterexample(letters(kinds))
    }
}

/// A state-costate system whose control is selected by the sign of a scalar
/// switching function.
trait SwitchedSystem<T: Scalar, const N: usize> {
    fn rhs(&self, y: &[T; N], control: T) -> Result<[T; N]>;
    fn switching(&self, y: &[T; N]) -> T;
    fn switching_rate(&self, y: &[T; N]) -> T;
    fn bang(&self, positive: bool) -> T;
    fn singular(&self) -> Result<T>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Regime {
    Bang { positive: bool },
    Singular,
}

struct SwitchedRun<T, const N: usize> {
    /// `(s, state, control)` at every grid point.
    samples: Vec<(T, [T; N], T)>,
    events: Vec<SwitchRecord<T>>,
    /// `(control, length)` per constant-control piece.
    pieces: Vec<(T, T)>,
}

fn initial_regime<T: Scalar, const N: usize, S: SwitchedSystem<T, N>>(
    sys: &S,
    y: &[T; N],
) -> Result<(Regime, T)> {
    let v = sys.switching(y);
    let band = T::lit(SWITCH_DEAD_BAND);
    if v > band || v < -band {
        let positive = v > T::zero();
        return Ok((Regime::Bang { positive }, sys.bang(positive)));
    }
    let rate = sys.switching_rate(y);
    if rate.abs() < T::lit(SINGULAR_TOL) {
        Ok((Regime::Singular, sys.singular()?))
    } else {
        let positive = rate > T::zero();
        Ok((Regime::Bang { positive }, sys.bang(positive)))
    }
}

fn breach<T: Scalar>(e: SphereError, s: T) -> SphereError {
    match e {
        SphereError::SingularChart { .. } => SphereError::PoleBreach {
            s: s.to_f64().unwrap_or(f64::NAN),
        },
        other => other,
    }
}

fn run_switched<T: Scalar, const N: usize, S: SwitchedSystem<T, N>>(
    sys: &S,
    y0: [T; N],
    s_end: T,
    step: T,
) -> Result<SwitchedRun<T, N>> {
    check_step(step)?;
    if !(s_end >= T::zero()) {
        return Err(SphereError::NegativeArcLength(s_end.to_f64().unwrap_or(f64::NAN)));
    }
    let (mut regime, mut control) = initial_regime(sys, &y0)?;
    let mut y = y0;
    let mut samples = vec![(T::zero(), y, control)];
    let mut events = Vec::new();
    let mut pieces = Vec::new();
    let mut piece_start = T::zero();
    if s_end == T::zero() {
        return Ok(SwitchedRun { samples, events, pieces });
    }
    let n = (s_end / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = s_end / T::from_usize(n).unwrap();
    let crossed = |regime: Regime, v: T| match regime {
        Regime::Bang { positive: true } => v < T::zero(),
        Regime::Bang { positive: false } => v > T::zero(),
        Regime::Singular => false,
    };
    for k in 1..=n {
        let grid = h * T::from_usize(k).unwrap();
        let mut s = h * T::from_usize(k - 1).unwrap();
        let mut remaining = h;
        while remaining > T::zero() {
            let y_try = rk4_step(&y, remaining, |x| sys.rhs(x, control)).map_err(|e| breach(e, s))?;
            if !crossed(regime, sys.switching(&y_try)) {
                y = y_try;
                break;
            }
            let (mut lo, mut hi) = (T::zero(), remaining);
            let mut y_hi = y_try;
            while hi - lo > T::lit(EVENT_TOL) {
                let mid = (lo + hi) * T::lit(0.5);
                let y_mid = rk4_step(&y, mid, |x| sys.rhs(x, control)).map_err(|e| breach(e, s))?;
                if crossed(regime, sys.switching(&y_mid)) {
                    hi = mid;
                    y_hi = y_mid;
                } else {
                    lo = mid;
                }
            }
            y = y_hi;
            s = s + hi;
            remaining = remaining - hi;
            let value = sys.switching(&y);
            let rate = sys.switching_rate(&y);
            let before = control;
            if value.abs() < T::lit(SINGULAR_TOL) && rate.abs() < T::lit(SINGULAR_TOL) {
                regime = Regime::Singular;
                control = sys.singular()?;
            } else {
                let positive = match regime {
                    Regime::Bang { positive } => !positive,
                    Regime::Singular => unreachable!("singular arcs do not switch"),
                };
                regime = Regime::Bang { positive };
                control = sys.bang(positive);
            }
            pieces.push((before, s - piece_start));
            piece_start = s;
            events.push(SwitchRecord {
                s_switch: s,
                value,
                rate,
                control_before: before,
                control_after: control,
            });
        }
        samples.push((grid, y, control));
    }
    pieces.push((control, s_end - piece_start));
    Ok(SwitchedRun { samples, events, pieces })
}

struct FrameSystem<T> {
    u_max: T,
    multiplier: CostMultiplier,
}

impl<T: Scalar> SwitchedSystem<T, 12> for FrameSystem<T> {
    fn rhs(&self, y: &[T; 12], kappa: T) -> Result<[T; 12]> {
        let g = Matrix3::from_row_major(y[..9].try_into().unwrap());
        let dg = (g * control_generator(kappa)).to_row_major();
        let a = SabbanAdjoint {
            h1: y[9],
            h2: y[10],
            h12: y[11],
            multiplier: self.multiplier,
        };
        let da = sabban_adjoint_rhs(&a, kappa);
        let mut out = [T::zero(); 12];
        out[..9].copy_from_slice(&dg);
        out[9..].copy_from_slice(&da);
        Ok(out)
    }

    fn switching(&self, y: &[T; 12]) -> T {
        y[11]
    }

    fn switching_rate(&self, y: &[T; 12]) -> T {
        -y[10]
    }

    fn bang(&self, positive: bool) -> T {
        if positive {
            -self.u_max
        } else {
            self.u_max
        }
    }

    fn singular(&self) -> Result<T> {
        match self.multiplier {
            CostMultiplier::Normal => Ok(T::zero()),
            CostMultiplier::Abnormal => Err(SphereError::AbnormalSingular),
        }
    }
}

struct ChartSystem<T> {
    eta: T,
    multiplier: CostMultiplier,
}

impl<T: Scalar> SwitchedSystem<T, 6> for ChartSystem<T> {
    fn rhs(&self, y: &[T; 6], u: T) -> Result<[T; 6]> {
        let [lat, _, psi, lam_lat, lam_lon, lam_heading] = *y;
        if !(lat.abs() < T::FRAC_PI_2() - T::lit(POLE_GUARD)) {
            return Err(SphereError::SingularChart {
                lat: lat.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (sp, cp) = psi.sin_cos();
        let a = SphericalAdjoint {
            lam_lat,
            lam_lon,
            lam_heading,
            multiplier: self.multiplier,
        };
        let da = spherical_adjoint_rhs_raw(lat, psi, &a);
        Ok([
            cp,
            sp / lat.cos(),
            lat.tan() * sp + u / self.eta,
            da[0],
            da[1],
            da[2],
        ])
    }

    fn switching(&self, y: &[T; 6]) -> T {
        y[5]
    }

    fn switching_rate(&self, y: &[T; 6]) -> T {
        let a = SphericalAdjoint {
            lam_lat: y[3],
            lam_lon: y[4],
            lam_heading: y[5],
            multiplier: self.multiplier,
        };
        spherical_adjoint_rhs_raw(y[0], y[2], &a)[2]
    }

    fn bang(&self, positive: bool) -> T {
        if positive {
            T::one()
        } else {
            -T::one()
        }
    }

    fn singular(&self) -> Result<T> {
        match self.multiplier {
            CostMultiplier::Normal => Ok(T::zero()),
            CostMultiplier::Abnormal => Err(SphereError::AbnormalSingular),
        }
    }
}

/// State and costates of a frame-model extremal at one arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalSample<T> {
    pub s: T,
    pub frame: Rotation<T>,
    pub adjoint: SabbanAdjoint<T>,
    pub kappa: T,
}

/// Frame-model extremal.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremal<T> {
    /// Samples on the uniform grid of the integration step.
    pub samples: Vec<ExtremalSample<T>>,
    pub switches: Vec<SwitchRecord<T>>,
    pub segments: Vec<Segment<T>>,
    pub classification: WordClass,
}

/// Co-integrates frame and costates from `(g0, a0)` over `[0, s_max]` with
/// curvature chosen by the switching law.
pub fn synthesize_extremal<T: Scalar>(
    a0: &SabbanAdjoint<T>,
    g0: &Rotation<T>,
    params: &SabbanParams<T>,
    s_max: T,
    step: T,
) -> Result<Extremal<T>> {
    if a0.is_trivial() {
        return Err(SphereError::InvalidParameter("trivial costate".into()));
    }
    let sys = FrameSystem {
        u_max: params.u_max,
        multiplier: a0.multiplier,
    };
    let mut y0 = [T::zero(); 12];
    y0[..9].copy_from_slice(&g0.matrix().to_row_major());
    y0[9] = a0.h1;
    y0[10] = a0.h2;
    y0[11] = a0.h12;
    let run = run_switched(&sys, y0, s_max, step)?;
    let samples = run
        .samples
        .iter()
        .map(|(s, y, kappa)| ExtremalSample {
            s: *s,
            frame: Rotation::from_matrix_unchecked(Matrix3::from_row_major(
                y[..9].try_into().unwrap(),
            )),
            adjoint: SabbanAdjoint {
                h1: y[9],
                h2: y[10],
                h12: y[11],
                multiplier: a0.multiplier,
            },
            kappa: *kappa,
        })
        .collect();
    let segments: Vec<Segment<T>> = run
        .pieces
        .iter()
        .filter(|(_, len)| *len > T::zero())
        .map(|&(kappa, length)| Segment {
            kind: SegmentKind::from_curvature(kappa),
            length,
        })
        .collect();
    let kinds: Vec<SegmentKind> = segments.iter().map(|s| s.kind).collect();
    Ok(Extremal {
        samples,
        switches: run.events,
        segments,
        classification: classify(&kinds),
    })
}

/// State and costates of a chart-model extremal at one arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalExtremalSample<T> {
    pub s: T,
    pub config: SphericalConfig<T>,
    pub adjoint: SphericalAdjoint<T>,
    pub u: T,
}

/// Chart-model extremal.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalExtremal<T> {
    pub samples: Vec<SphericalExtremalSample<T>>,
    pub switches: Vec<SwitchRecord<T>>,
    /// `(u, length)` per constant-control piece.
    pub pieces: Vec<(T, T)>,
}

/// Co-integrates the chart model and its costates with `u = sign(lam_psi)`.
///
/// Leaving the chart (pole guard) ends the run with
/// [`SphereError::PoleBreach`].
pub fn synthesize_spherical_extremal<T: Scalar>(
    c0: &SphericalConfig<T>,
    a0: &SphericalAdjoint<T>,
    p: &SphericalParams<T>,
    s_max: T,
    step: T,
) -> Result<SphericalExtremal<T>> {
    let sys = ChartSystem {
        eta: p.eta,
        multiplier: a0.multiplier,
    };
    let y0 = [
        c0.lat,
        c0.lon,
        c0.heading,
        a0.lam_lat,
        a0.lam_lon,
        a0.lam_heading,
    ];
    let run = run_switched(&sys, y0, s_max, step)?;
    let samples = run
        .samples
        .iter()
        .map(|(s, y, u)| SphericalExtremalSample {
            s: *s,
            config: SphericalConfig {
                lat: y[0],
                lon: wrap_angle(y[1]),
                heading: wrap_angle(y[2]),
            },
            adjoint: SphericalAdjoint {
                lam_lat: y[3],
                lam_lon: y[4],
                lam_heading: y[5],
                multiplier: a0.multiplier,
            },
            u: *u,
        })
        .collect();
    Ok(SphericalExtremal {
        samples,
        switches: run.events,
        pieces: run.pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::{h12_closed_form, hamiltonian_sabban, hamiltonian_spherical};
    use crate::sabban::propagate_segment;
    use crate::so3::{exp_rotation, rotation_distance};

    const N: CostMultiplier = CostMultiplier::Normal;

    #[test]
    fn constant_particular_solution_is_one_turn() {
        let p = SabbanParams::<f64>::new(1.0).unwrap();
        let a0 = SabbanAdjoint::on_zero_level(0.0, -0.5, 1.0, N);
        let ex = synthesize_extremal(&a0, &Rotation::identity(), &p, 6.0, 1e-3).unwrap();
        assert!(ex.switches.is_empty());
        assert_eq!(ex.classification.word(), "L");
        assert!(ex.classification.in_family());
        assert!((ex.segments[0].length - 6.0).abs() < 1e-12);
        let end = ex.samples.last().unwrap();
        assert!((end.adjoint.h12 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_start_is_great_circle() {
        let p = SabbanParams::<f64>::new(1.0).unwrap();
        let a0 = SabbanAdjoint { h1: 1.0, h2: 0.0, h12: 0.0, multiplier: N };
        let ex = synthesize_extremal(&a0, &Rotation::identity(), &p, 6.0, 1e-3).unwrap();
        assert_eq!(ex.classification.word(), "G");
        let end = ex.samples.last().unwrap();
        let exact = propagate_segment(&Rotation::identity(), 0.0, 6.0);
        assert!(rotation_distance(&end.frame, &exact) < 1e-9);
    }

    #[test]
    fn abnormal_singular_start_is_rejected() {
        let p = SabbanParams::<f64>::new(1.0).unwrap();
        let a0 = SabbanAdjoint { h1: 0.5, h2: 0.0, h12: 0.0, multiplier: CostMultiplier::Abnormal };
        assert_eq!(
            synthesize_extremal(&a0, &Rotation::identity(), &p, 1.0, 1e-3),
            Err(SphereError::AbnormalSingular)
        );
    }

    #[test]
    fn switch_points_match_closed_form_roots() {
        let p = SabbanParams::new(3f64.sqrt()).unwrap();
        let a0 = SabbanAdjoint::on_zero_level(0.9, 0.2, -p.u_max, N);
        let ex = synthesize_extremal(&a0, &exp_rotation([0.2, 0.1, 0.4], 1.0), &p, 2.0, 1e-3).unwrap();
        assert!(!ex.switches.is_empty());
        let first = ex.switches[0];
        // the first root of the closed-form H12 on the initial arc
        let (h, _) = h12_closed_form(0.2, -0.9, -p.u_max, N, first.s_switch);
        assert!(h.abs() < 1e-9);
        assert_eq!(first.control_before, -p.u_max);
        assert_eq!(first.control_after, p.u_max);
        for s in &ex.samples {
            assert!(hamiltonian_sabban(&s.adjoint, s.kappa).abs() < 1e-8);
        }
        // h2 = -dH12/ds against the closed form on the first arc
        for s in ex.samples.iter().take_while(|x| x.s < first.s_switch) {
            let (_, dh) = h12_closed_form(0.2, -0.9, -p.u_max, N, s.s);
            assert!((s.adjoint.h2 + dh).abs() < 1e-9);
        }
    }

    #[test]
    fn frame_follows_emitted_segments() {
        let p = SabbanParams::<f64>::new(1.0).unwrap();
        let a0 = SabbanAdjoint::on_zero_level(-0.7, 0.1, -1.0, N);
        let g0 = exp_rotation([0.3, -0.2, 0.5], 0.8);
        let ex = synthesize_extremal(&a0, &g0, &p, 5.0, 1e-3).unwrap();
        let mut g = g0;
        for seg in &ex.segments {
            g = propagate_segment(&g, seg.kind.curvature(p.u_max), seg.length);
        }
        assert!(rotation_distance(&g, &ex.samples.last().unwrap().frame) < 1e-8);
    }

    #[test]
    fn spherical_extremal_conserves_hamiltonian() {
        let p = SphericalParams::<f64>::new(1.0).unwrap();
        let c0 = SphericalConfig::new(0.1, 0.0, 1.0).unwrap();
        let a0 = SphericalAdjoint::on_zero_level(&c0, 0.1, -1.5, 1.0, N, &p).unwrap();
        let max_h = |step: f64| {
            let ex = synthesize_spherical_extremal(&c0, &a0, &p, 4.0, step).unwrap();
            assert_eq!(ex.switches.len(), 2);
            for s in &ex.samples {
                assert_eq!(s.adjoint.lam_lon, a0.lam_lon);
            }
            ex.samples
                .iter()
                .map(|s| hamiltonian_spherical(&s.config, &s.adjoint, s.u, p.eta).abs())
                .fold(0.0, f64::max)
        };
        // the path climbs to lat ~1.25 where the chart is stiff; the drift
        // must be truncation error of fourth order
        let coarse = max_h(1e-3);
        let fine = max_h(5e-4);
        assert!(coarse < 1e-5, "{coarse}");
        assert!(coarse / fine > 12.0, "{coarse} {fine}");
    }
}
