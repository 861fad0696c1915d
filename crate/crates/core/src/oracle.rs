//! Independent checks: brute-force grid oracle for path lengths, the
//! cross-model equivalence harness, and turn-geometry audits.

use rayon::prelude::*;
use serde::Serialize;

use crate::adjoint::{
    sabban_adjoint_rhs, spherical_adjoint_rhs_raw, CostMultiplier, SabbanAdjoint,
    SphericalAdjoint,
};
use crate::control::{check_step, substeps, ControlSchedule};
use crate::error::{Result, SphereError};
use crate::extremal::{synthesize_extremal, synthesize_spherical_extremal};
use crate::ode::rk4_step;
use crate::sabban::{
    control_generator, generator_axis, integrate_frame_with, propagate_segment, SabbanParams,
    SegmentKind,
};
use crate::scalar::Scalar;
use crate::so3::{cross, dot, exp_rotation, norm, rotation_distance, Matrix3, Rotation, Vec3};
use crate::spherical::{
    integrate_with, rhs, sabban_curvature, to_rotation, SphericalConfig, SphericalParams,
    POLE_GUARD,
};
use crate::word::{enumerate_words, letters, PathWord};

#[derive(Debug, Clone, PartialEq)]
pub struct GridOracleConfig {
    /// Grid points per segment length, over one period.
    pub lengths_per_axis: usize,
    pub words: Vec<PathWord>,
    /// Compass-search restarts per kept grid cell.
    pub refine: usize,
    /// Residual below which a refined point counts as a solution.
    pub accept_tol: f64,
    /// Also scan every four-segment word at `four_segment_resolution`.
    pub four_segment: bool,
    pub four_segment_resolution: usize,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        Self {
            lengths_per_axis: 60,
            words: enumerate_words(),
            refine: 3,
            accept_tol: 1e-6,
            four_segment: false,
            four_segment_resolution: 24,
        }
    }
}

impl GridOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lengths_per_axis < 8 || (self.four_segment && self.four_segment_resolution < 8) {
            return Err(SphereError::InvalidParameter("grid resolution must be at least 8".into()));
        }
        Ok(())
    }
}

/// Shortest path found by the grid oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCandidate<T> {
    pub length: T,
    /// Letter string; four-segment words are outside [`PathWord`].
    pub word: String,
    pub lengths: Vec<T>,
    pub residual: T,
}

fn angle_from_trace<T: Scalar>(tr: T) -> T {
    ((tr - T::one()) * T::lit(0.5)).max(-T::one()).min(T::one()).acos()
}

fn frobenius_inner<T: Scalar>(a: &Matrix3<T>, b: &Matrix3<T>) -> T {
    let mut acc = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            acc = acc + a.m[i][j] * b.m[i][j];
        }
    }
    acc
}

/// Residual angle at every grid cell, row-major over the segment indices.
fn scan_grid<T: Scalar>(tables: &[Vec<Rotation<T>>], target: &Rotation<T>) -> Vec<T> {
    let k = tables.len();
    let n = tables[0].len();
    let mut out = Vec::with_capacity(n.pow(k as u32));
    fn rec<T: Scalar>(
        tables: &[Vec<Rotation<T>>],
        prefix: Rotation<T>,
        target: &Rotation<T>,
        out: &mut Vec<T>,
    ) {
        if tables.len() == 1 {
            // tr((P E)^T R) = <E, P^T R>
            let q = *(prefix.inverse() * *target).matrix();
            for e in &tables[0] {
                out.push(angle_from_trace(frobenius_inner(e.matrix(), &q)));
            }
        } else {
            for e in &tables[0] {
                rec(&tables[1..], prefix * *e, target, out);
            }
        }
    }
    rec(tables, Rotation::identity(), target, &mut out);
    out
}

fn unflatten(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    let mut v = vec![0; k];
    for slot in v.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    v
}

fn flatten(v: &[usize], n: usize) -> usize {
    v.iter().fold(0, |acc, i| acc * n + i)
}

fn is_local_min<T: Scalar>(grid: &[T], cell: &[usize], n: usize) -> bool {
    let k = cell.len();
    let here = grid[flatten(cell, n)];
    let mut nb = vec![0usize; k];
    for code in 0..3usize.pow(k as u32) {
        let mut c = code;
        let mut center = true;
        for (d, slot) in nb.iter_mut().enumerate() {
            let off = c % 3;
            c /= 3;
            center &= off == 1;
            *slot = (cell[d] + n + off - 1) % n;
        }
        if !center && grid[flatten(&nb, n)] < here {
            return false;
        }
    }
    true
}

fn endpoint<T: Scalar>(axes: &[Vec3<T>], t: &[T]) -> Rotation<T> {
    axes.iter()
        .zip(t)
        .fold(Rotation::identity(), |g, (a, s)| g * exp_rotation(*a, *s))
}

/// Derivative-free compass search on the residual, lengths kept nonnegative.
fn compass<T: Scalar>(axes: &[Vec3<T>], mut t: Vec<T>, h0: &[T], target: &Rotation<T>, restarts: usize) -> (Vec<T>, T) {
    let f = |t: &[T]| rotation_distance(&endpoint(axes, t), target);
    let mut best = f(&t);
    let floor = T::lit(1e-13);
    for _ in 0..restarts.max(1) {
        let mut h: Vec<T> = h0.to_vec();
        while h.iter().any(|x| *x > floor) && best > floor {
            let mut moved = false;
            for i in 0..t.len() {
                for sign in [T::one(), -T::one()] {
                    let mut trial = t.clone();
                    trial[i] = (trial[i] + sign * h[i]).max(T::zero());
                    let v = f(&trial);
                    if v < best {
                        best = v;
                        t = trial;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                for x in h.iter_mut() {
                    *x = *x * T::lit(0.5);
                }
            }
        }
    }
    (t, best)
}

fn scan_word<T: Scalar>(
    kinds: &[SegmentKind],
    target: &Rotation<T>,
    params: &SabbanParams<T>,
    n: usize,
    cfg: &GridOracleConfig,
) -> Option<OracleCandidate<T>> {
    let k = kinds.len();
    let axes: Vec<Vec3<T>> = kinds.iter().map(|c| generator_axis(c.curvature(params.u_max))).collect();
    let deltas: Vec<T> = kinds
        .iter()
        .map(|c| c.period(params.u_max) / T::from_usize(n).unwrap())
        .collect();
    let tables: Vec<Vec<Rotation<T>>> = axes
        .iter()
        .zip(&deltas)
        .map(|(a, d)| (0..n).map(|i| exp_rotation(*a, *d * T::from_usize(i).unwrap())).collect())
        .collect();
    let grid = scan_grid(&tables, target);
    // the grid cell nearest an exact solution is within half a spacing per
    // axis, and each axis moves the endpoint at rate |a_i|
    let tau: T = axes
        .iter()
        .zip(&deltas)
        .map(|(a, d)| norm(*a) * *d * T::lit(0.5))
        .sum::<T>()
        + T::lit(1e-12);
    let mut cells: Vec<(T, Vec<usize>)> = grid
        .iter()
        .enumerate()
        .filter(|(_, r)| **r < tau)
        .map(|(i, _)| unflatten(i, n, k))
        .filter(|c| is_local_min(&grid, c, n))
        .map(|c| {
            let len: T = c
                .iter()
                .zip(&deltas)
                .map(|(i, d)| *d * T::from_usize(*i).unwrap())
                .sum();
            (len, c)
        })
        .collect();
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    let span: T = deltas.iter().copied().sum();
    let h0: Vec<T> = deltas.iter().map(|d| *d * T::lit(0.5)).collect();
    let mut best: Option<OracleCandidate<T>> = None;
    for (len, cell) in cells {
        if let Some(b) = &best {
            if len - span > b.length {
                break;
            }
        }
        let t0: Vec<T> = cell
            .iter()
            .zip(&deltas)
            .map(|(i, d)| *d * T::from_usize(*i).unwrap())
            .collect();
        let (t, residual) = compass(&axes, t0, &h0, target, cfg.refine);
        if !(residual < T::lit(cfg.accept_tol)) {
            continue;
        }
        let length: T = t.iter().copied().sum();
        if best.as_ref().is_none_or(|b| length < b.length) {
            best = Some(OracleCandidate {
                length,
                word: letters(kinds),
                lengths: t,
                residual,
            });
        }
    }
    best
}

fn four_segment_words() -> Vec<Vec<SegmentKind>> {
    use SegmentKind::*;
    let all = [LeftTurn, RightTurn, GreatCircle];
    let mut out = vec![Vec::new()];
    for _ in 0..4 {
        out = out
            .into_iter()
            .flat_map(|w: Vec<SegmentKind>| {
                all.iter()
                    .filter(|k| w.last() != Some(*k))
                    .map(|k| {
                        let mut v = w.clone();
                        v.push(*k);
                        v
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

/// Minimum path length over the configured words by exhaustive grid scan
/// and local refinement. Works from the identity like the planner.
pub fn grid_min_length<T: Scalar>(
    target: &Rotation<T>,
    params: &SabbanParams<T>,
    cfg: &GridOracleConfig,
) -> Result<OracleCandidate<T>> {
    cfg.validate()?;
    let mut jobs: Vec<(Vec<SegmentKind>, usize)> = cfg
        .words
        .iter()
        .map(|w| (w.kinds().to_vec(), cfg.lengths_per_axis))
        .collect();
    if cfg.four_segment {
        jobs.extend(
            four_segment_words()
                .into_iter()
                .map(|w| (w, cfg.four_segment_resolution)),
        );
    }
    let found: Vec<OracleCandidate<T>> = jobs
        .par_iter()
        .filter_map(|(kinds, n)| scan_word(kinds, target, params, *n, cfg))
        .collect();
    found
        .into_iter()
        .min_by(|a, b| {
            a.length
                .partial_cmp(&b.length)
                .unwrap()
                .then_with(|| a.word.cmp(&b.word))
        })
        .ok_or_else(|| SphereError::NoSolution("grid oracle found no refined candidate".into()))
}

/// Initial costate data shared by both models: `lam_psi(0) = H12(0)` and
/// its arc-length derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostateSeed<T> {
    pub lam_heading: T,
    pub dlam_heading: T,
    pub multiplier: CostMultiplier,
}

impl<T: Scalar> Default for CostateSeed<T> {
    fn default() -> Self {
        Self {
            lam_heading: T::lit(0.5),
            dlam_heading: T::lit(-0.5),
            multiplier: CostMultiplier::Normal,
        }
    }
}

/// Matched costates of both models on the zero level of their Hamiltonians.
pub fn matched_costates<T: Scalar>(
    c0: &SphericalConfig<T>,
    seed: &CostateSeed<T>,
    u0: T,
    p: &SphericalParams<T>,
) -> Result<(SphericalAdjoint<T>, SabbanAdjoint<T>)> {
    let sph = SphericalAdjoint::on_zero_level(c0, seed.lam_heading, seed.dlam_heading, u0, seed.multiplier, p)?;
    let sab = SabbanAdjoint::on_zero_level(
        -seed.dlam_heading,
        seed.lam_heading,
        sabban_curvature(u0, p),
        seed.multiplier,
    );
    Ok((sph, sab))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport<T> {
    /// Largest `rotation_distance` between the two models over all samples.
    pub max_config_deviation: T,
    pub final_config_deviation: T,
    /// Largest `|lam_psi - H12|` over all samples.
    pub max_adjoint_deviation: T,
    pub step: T,
    pub samples: usize,
    /// Arc length at which the chart model hit the pole guard, if it did.
    pub pole_breach: Option<T>,
    /// Highest `|lat|` reached by the chart model.
    pub max_abs_lat: T,
}

/// [`check_equivalence_with`] using [`CostateSeed::default`].
pub fn check_equivalence<T: Scalar>(
    c0: &SphericalConfig<T>,
    control: &ControlSchedule<T>,
    s_end: T,
    eta: T,
    step: T,
) -> Result<EquivalenceReport<T>> {
    check_equivalence_with(c0, control, s_end, eta, step, &CostateSeed::default())
}

/// Integrates both models and their costates in lockstep from matched
/// initial conditions under the same control (`kappa = -u / eta`).
///
/// A pole breach of the chart model ends the comparison at the breach and is
/// reported in the result.
pub fn check_equivalence_with<T: Scalar>(
    c0: &SphericalConfig<T>,
    control: &ControlSchedule<T>,
    s_end: T,
    eta: T,
    step: T,
    seed: &CostateSeed<T>,
) -> Result<EquivalenceReport<T>> {
    check_step(step)?;
    let p = SphericalParams::new(eta)?;
    let pieces = control.clipped(s_end)?;
    let u0 = pieces.first().map_or(T::zero(), |q| q.u);
    let (a_sph, a_sab) = matched_costates(c0, seed, u0, &p)?;
    let g0 = to_rotation(c0)?;
    let mut ys = [c0.lat, c0.lon, c0.heading, a_sph.lam_lat, a_sph.lam_lon, a_sph.lam_heading];
    let mut yf = [T::zero(); 12];
    yf[..9].copy_from_slice(&g0.matrix().to_row_major());
    yf[9] = a_sab.h1;
    yf[10] = a_sab.h2;
    yf[11] = a_sab.h12;

    let mut report = EquivalenceReport {
        max_config_deviation: T::zero(),
        final_config_deviation: T::zero(),
        max_adjoint_deviation: (ys[5] - yf[11]).abs(),
        step,
        samples: 1,
        pole_breach: None,
        max_abs_lat: c0.lat.abs(),
    };
    let mut s = T::zero();
    let guard = T::FRAC_PI_2() - T::lit(POLE_GUARD);
    'pieces: for piece in pieces {
        let u = piece.u;
        let kappa = sabban_curvature(u, &p);
        let gen = control_generator(kappa);
        let n = substeps(piece.length, step);
        let h = piece.length / T::from_usize(n).unwrap();
        let start = s;
        for k in 1..=n {
            let s_next = start + h * T::from_usize(k).unwrap();
            let next = rk4_step(&ys, h, |y| {
                if !(y[0].abs() < guard) {
                    return Err(SphereError::SingularChart { lat: 0.0 });
                }
                let (sp, cp) = y[2].sin_cos();
                let a = SphericalAdjoint {
                    lam_lat: y[3],
                    lam_lon: y[4],
                    lam_heading: y[5],
                    multiplier: seed.multiplier,
                };
                let da = spherical_adjoint_rhs_raw(y[0], y[2], &a);
                Ok([cp, sp / y[0].cos(), y[0].tan() * sp + u / eta, da[0], da[1], da[2]])
            });
            let ys_next = match next {
                Ok(v) if v[0].abs() < guard => v,
                _ => {
                    report.pole_breach = Some(s_next);
                    break 'pieces;
                }
            };
            yf = rk4_step(&yf, h, |y| {
                let g = Matrix3::from_row_major(y[..9].try_into().unwrap());
                let a = SabbanAdjoint {
                    h1: y[9],
                    h2: y[10],
                    h12: y[11],
                    multiplier: seed.multiplier,
                };
                let da = sabban_adjoint_rhs(&a, kappa);
                let mut out = [T::zero(); 12];
                out[..9].copy_from_slice(&(g * gen).to_row_major());
                out[9..].copy_from_slice(&da);
                Ok(out)
            })?;
            ys = ys_next;
            s = s_next;
            let cs = SphericalConfig {
                lat: ys[0],
                lon: ys[1],
                heading: ys[2],
            };
            let gf = Rotation::from_matrix_unchecked(Matrix3::from_row_major(yf[..9].try_into().unwrap()));
            let dev = rotation_distance(&to_rotation(&cs)?, &gf);
            report.max_config_deviation = report.max_config_deviation.max(dev);
            report.final_config_deviation = dev;
            report.max_adjoint_deviation = report.max_adjoint_deviation.max((ys[5] - yf[11]).abs());
            report.samples += 1;
            report.max_abs_lat = report.max_abs_lat.max(ys[0].abs());
        }
    }
    Ok(report)
}

/// Comparison of the switching functions of matched extremals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointComparison<T> {
    /// Largest `|lam_psi - H12|` on the common grid.
    pub max_deviation: T,
    /// Largest finite-difference residual of
    /// `lam_psi'' + (1 + u^2/eta^2) lam_psi + e u / eta` away from switches.
    pub max_ode_residual: T,
    pub switches_chart: usize,
    pub switches_frame: usize,
    /// Highest `|lat|` reached; the chart is ill-conditioned near the poles.
    pub max_abs_lat: T,
}

/// Synthesizes the chart-model extremal from `(c0, seed)` and the frame-model
/// extremal from the matched initial data with `u_max = 1/eta`, and compares
/// their switching functions.
pub fn compare_adjoint_flows<T: Scalar>(
    c0: &SphericalConfig<T>,
    seed: &CostateSeed<T>,
    eta: T,
    s_max: T,
    step: T,
) -> Result<AdjointComparison<T>> {
    let p = SphericalParams::new(eta)?;
    let pick = if seed.lam_heading != T::zero() {
        seed.lam_heading
    } else {
        seed.dlam_heading
    };
    let u0 = if pick > T::zero() {
        T::one()
    } else if pick < T::zero() {
        -T::one()
    } else {
        T::zero()
    };
    let (a_sph, a_sab) = matched_costates(c0, seed, u0, &p)?;
    let chart = synthesize_spherical_extremal(c0, &a_sph, &p, s_max, step)?;
    let frame = synthesize_extremal(&a_sab, &to_rotation(c0)?, &p.sabban(), s_max, step)?;
    let max_deviation = chart
        .samples
        .iter()
        .zip(&frame.samples)
        .map(|(a, b)| (a.adjoint.lam_heading - b.adjoint.h12).abs())
        .fold(T::zero(), T::max);
    let e = seed.multiplier.e::<T>();
    let switches: Vec<T> = chart.switches.iter().map(|r| r.s_switch).collect();
    let mut max_ode_residual = T::zero();
    for w in chart.samples.windows(3) {
        let (lo, hi) = (w[0].s, w[2].s);
        if switches.iter().any(|s| *s >= lo - T::lit(1e-9) && *s <= hi + T::lit(1e-9)) {
            continue;
        }
        let h = w[1].s - w[0].s;
        let u = w[1].u;
        let second = (w[2].adjoint.lam_heading - T::lit(2.0) * w[1].adjoint.lam_heading
            + w[0].adjoint.lam_heading)
            / (h * h);
        let res = second + (T::one() + u * u / (eta * eta)) * w[1].adjoint.lam_heading + e * u / eta;
        max_ode_residual = max_ode_residual.max(res.abs());
    }
    Ok(AdjointComparison {
        max_deviation,
        max_ode_residual,
        switches_chart: chart.switches.len(),
        switches_frame: frame.switches.len(),
        max_abs_lat: chart.samples.iter().map(|x| x.config.lat.abs()).fold(T::zero(), T::max),
    })
}

/// Which model and parameter a geometry audit runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TurnModel<T> {
    /// Frame model with curvature `u` itself.
    Sabban { u_max: T },
    /// Chart model with `u in {-1, 0, 1}`.
    Spherical { eta: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnGeometry<T> {
    pub fitted_radius: T,
    pub expected_radius: T,
    /// RMS distance of the samples from the fitted plane.
    pub plane_rms: T,
    /// Distance of the fitted plane from the sphere center.
    pub plane_offset: T,
}

/// Number of RK4 steps per audited turn.
const AUDIT_STEPS: usize = 4096;

/// Integrates one full turn with constant control and fits a circle to the
/// traced positions.
pub fn audit_turn_geometry<T: Scalar>(u: T, model: TurnModel<T>) -> Result<TurnGeometry<T>> {
    let (points, expected) = match model {
        TurnModel::Sabban { u_max } => {
            if u.abs() > u_max * (T::one() + T::lit(1e-12)) {
                return Err(SphereError::InvalidParameter(format!("|u| = {u} exceeds u_max = {u_max}")));
            }
            let r = T::one() / (T::one() + u * u).sqrt();
            let period = T::two_pi() * r;
            let mut pts = Vec::with_capacity(AUDIT_STEPS + 1);
            integrate_frame_with(
                &Rotation::identity(),
                &ControlSchedule::constant(u, period),
                period,
                period / T::from_usize(AUDIT_STEPS).unwrap(),
                |_, g, _| pts.push(g.x()),
            )?;
            (pts, r)
        }
        TurnModel::Spherical { eta } => {
            let p = SphericalParams::new(eta)?;
            if !(u == T::zero() || u.abs() == T::one()) {
                return Err(SphereError::InvalidParameter(format!("chart control must be -1, 0 or 1, got {u}")));
            }
            let r = if u == T::zero() { T::one() } else { p.tight_radius() };
            let period = T::two_pi() * r;
            // heading north from the equator keeps the circle clear of the poles
            let c0 = SphericalConfig::new(T::zero(), T::zero(), T::zero())?;
            let mut pts = Vec::with_capacity(AUDIT_STEPS + 1);
            integrate_with(
                &c0,
                &ControlSchedule::constant(u, period),
                &p,
                period,
                period / T::from_usize(AUDIT_STEPS).unwrap(),
                |_, c, _| {
                    let (sl, cl) = c.lat.sin_cos();
                    let (so, co) = c.lon.sin_cos();
                    pts.push([cl * co, cl * so, sl]);
                },
            )?;
            (pts, r)
        }
    };
    // drop the closing sample so the remaining ones are uniform over the turn
    let pts = &points[..points.len() - 1];
    let m = T::from_usize(pts.len()).unwrap();
    let mut centroid = [T::zero(); 3];
    for q in pts {
        for i in 0..3 {
            centroid[i] = centroid[i] + q[i] / m;
        }
    }
    let rel: Vec<Vec3<T>> = pts
        .iter()
        .map(|q| [q[0] - centroid[0], q[1] - centroid[1], q[2] - centroid[2]])
        .collect();
    let mut normal = [T::zero(); 3];
    for i in 0..rel.len() {
        let c = cross(rel[i], rel[(i + 1) % rel.len()]);
        for j in 0..3 {
            normal[j] = normal[j] + c[j];
        }
    }
    let nn = norm(normal);
    let normal = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
    let mut sq_plane = T::zero();
    let mut sq_radius = T::zero();
    for v in &rel {
        let d = dot(*v, normal);
        sq_plane = sq_plane + d * d;
        sq_radius = sq_radius + dot(*v, *v) - d * d;
    }
    Ok(TurnGeometry {
        fitted_radius: (sq_radius / m).sqrt(),
        expected_radius: expected,
        plane_rms: (sq_plane / m).sqrt(),
        plane_offset: dot(centroid, normal).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HandednessReport<T> {
    pub eta: T,
    /// `dpsi/ds` at the start for `u = +1` and `u = -1`.
    pub dpsi_plus: T,
    pub dpsi_minus: T,
    /// Largest distance between the chart trace for `u = +1` and the
    /// frame model's closed form with `kappa = -u_max`.
    pub trace_deviation: T,
    pub passed: bool,
}

/// Checks that `u = +1` turns the heading clockwise at rate `1/eta` and maps
/// to frame curvature `-u_max`.
pub fn audit_handedness<T: Scalar>(eta: T) -> Result<HandednessReport<T>> {
    let p = SphericalParams::new(eta)?;
    let c0 = SphericalConfig::new(T::zero(), T::zero(), T::FRAC_PI_2())?;
    let dpsi_plus = rhs(&c0, T::one(), &p)?[2];
    let dpsi_minus = rhs(&c0, -T::one(), &p)?[2];
    let g0 = to_rotation(&c0)?;
    let kappa = sabban_curvature(T::one(), &p);
    let arc = T::lit(0.5);
    let mut trace_deviation = T::zero();
    let mut failure = None;
    integrate_with(
        &c0,
        &ControlSchedule::constant(T::one(), arc),
        &p,
        arc,
        T::lit(1e-3),
        |s, c, _| match to_rotation(c) {
            Ok(g) => {
                trace_deviation = trace_deviation.max(rotation_distance(&g, &propagate_segment(&g0, kappa, s)));
            }
            Err(e) => failure = Some(e),
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let tol = T::lit(1e-12);
    let passed = (dpsi_plus - T::one() / eta).abs() < tol
        && (dpsi_minus + T::one() / eta).abs() < tol
        && kappa == -p.u_max()
        && trace_deviation < T::lit(1e-7);
    Ok(HandednessReport {
        eta,
        dpsi_plus,
        dpsi_minus,
        trace_deviation,
        passed,
    })
}
