//! Named verification suites with seeded sampling, as run by `verify`.
//!
//! Every check compares a nonnegative error measure against a tolerance and
//! passes when the measure is strictly below it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adjoint::{
    h12_closed_form, hamiltonian_sabban, hamiltonian_spherical, sabban_adjoint_rhs,
    singular_arc_solution, switching_control_spherical, CostMultiplier, SabbanAdjoint,
    SphericalAdjoint,
};
use crate::control::{ControlPiece, ControlSchedule};
use crate::error::{Result, SphereError};
use crate::extremal::{synthesize_extremal, synthesize_spherical_extremal};
use crate::ode::rk4_step;
use crate::oracle::{
    audit_handedness, audit_turn_geometry, check_equivalence, compare_adjoint_flows,
    grid_min_length, CostateSeed, GridOracleConfig, TurnModel,
};
use crate::planner::{mirror_rotation, plan, word_endpoint, SolverConfig};
use crate::sabban::SabbanParams;
use crate::so3::{exp_rotation, norm, scale, Rotation};
use crate::spherical::{body_angular_velocity, net_rotation, SphericalConfig, SphericalParams};
use crate::word::enumerate_words;

/// Samples whose chart trajectory climbs above this latitude are redrawn:
/// the chart model is ill-conditioned near the poles.
pub const LAT_MARGIN: f64 = 80.0 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Equivalence,
    Extremal,
    Geometry,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Equivalence, Suite::Extremal, Suite::Geometry, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Equivalence => "equivalence",
            Suite::Extremal => "extremal",
            Suite::Geometry => "geometry",
            Suite::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SphereError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| SphereError::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub metrics: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

struct Builder {
    override_tol: Option<f64>,
    checks: Vec<Check>,
    metrics: BTreeMap<String, f64>,
}

impl Builder {
    fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let tolerance = self.override_tol.unwrap_or(tolerance);
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value < tolerance,
        });
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

/// Runs one suite. `tolerance` replaces every check's tolerance.
pub fn run_suite(suite: Suite, seed: u64, tolerance: Option<f64>) -> Result<SuiteReport> {
    let mut b = Builder {
        override_tol: tolerance,
        checks: Vec::new(),
        metrics: BTreeMap::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Equivalence => equivalence(&mut b, &mut rng)?,
        Suite::Extremal => extremal(&mut b, &mut rng)?,
        Suite::Geometry => geometry(&mut b, &mut rng)?,
        Suite::Oracle => oracle(&mut b, &mut rng)?,
    }
    let passed = b.checks.iter().filter(|c| c.passed).count();
    Ok(SuiteReport {
        suite,
        seed,
        failed: b.checks.len() - passed,
        passed,
        checks: b.checks,
        metrics: b.metrics,
    })
}

fn random_config(rng: &mut ChaCha8Rng) -> SphericalConfig<f64> {
    SphericalConfig::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    )
    .expect("inside the chart")
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation<f64> {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = norm(v);
        if n > 1e-3 && n <= 1.0 {
            return exp_rotation(scale(v, 1.0 / n), rng.random_range(0.0..PI));
        }
    }
}

fn random_bang_schedule(rng: &mut ChaCha8Rng) -> ControlSchedule<f64> {
    let pieces = (0..3)
        .map(|_| ControlPiece {
            u: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            length: rng.random_range(0.0..2.0 * PI / 3.0),
        })
        .collect();
    ControlSchedule::new(pieces).expect("valid pieces")
}

fn equivalence(b: &mut Builder, rng: &mut ChaCha8Rng) -> Result<()> {
    let eq = SphericalConfig::new(0.0, 0.0, PI / 2.0)?;
    let r = check_equivalence(&eq, &ControlSchedule::constant(0.0, PI), PI, 1.0, 1e-3)?;
    b.check("equator_great_circle", r.max_config_deviation, 1e-8);
    let bang = ControlSchedule::new(vec![
        ControlPiece { u: 1.0, length: 1.0 },
        ControlPiece { u: -1.0, length: 1.0 },
    ])?;
    let c1 = SphericalConfig::new(0.2, 0.3, 0.4)?;
    let r = check_equivalence(&c1, &bang, 2.0, 1.0, 1e-3)?;
    b.check("bang_bang_example", r.max_config_deviation, 1e-7);
    let r = check_equivalence(&c1, &bang, 0.0, 1.0, 1e-3)?;
    b.check("zero_length", r.max_config_deviation, 1e-15);

    let (mut max_final, mut max_config, mut max_adjoint) = (0.0f64, 0.0f64, 0.0f64);
    let (mut coarse, mut fine) = (0.0, 0.0);
    let (mut kept, mut rejected) = (0, 0);
    while kept < 20 {
        let c0 = random_config(rng);
        let ctl = random_bang_schedule(rng);
        let s_end = ctl.total_length();
        let r = check_equivalence(&c0, &ctl, s_end, 1.0, 1e-3)?;
        if r.pole_breach.is_some() || r.max_abs_lat > LAT_MARGIN {
            rejected += 1;
            continue;
        }
        kept += 1;
        max_final = max_final.max(r.final_config_deviation);
        max_config = max_config.max(r.max_config_deviation);
        max_adjoint = max_adjoint.max(r.max_adjoint_deviation);
        coarse += check_equivalence(&c0, &ctl, s_end, 1.0, 0.02)?.final_config_deviation;
        fine += check_equivalence(&c0, &ctl, s_end, 1.0, 0.01)?.final_config_deviation;
    }
    let order = (coarse / fine).log2();
    b.check("random_final_deviation", max_final, 1e-6);
    b.check("random_adjoint_deviation", max_adjoint, 1e-6);
    b.check("convergence_order", (order - 4.0).abs(), 0.5);
    b.metric("max_config_deviation", max_config);
    b.metric("max_final_deviation", max_final);
    b.metric("max_adjoint_deviation", max_adjoint);
    b.metric("convergence_order", order);
    b.metric("rejected_samples", rejected as f64);
    Ok(())
}

fn rk4_adjoint_deviation(a0: SabbanAdjoint<f64>, kappa: f64, length: f64, step: f64) -> Result<f64> {
    let n = (length / step).ceil() as usize;
    let h = length / n as f64;
    let mut y = [a0.h1, a0.h2, a0.h12];
    let mut worst = 0.0f64;
    for k in 1..=n {
        y = rk4_step(&y, h, |y| {
            Ok(sabban_adjoint_rhs(
                &SabbanAdjoint {
                    h1: y[0],
                    h2: y[1],
                    h12: y[2],
                    multiplier: a0.multiplier,
                },
                kappa,
            ))
        })?;
        let (h12, dh12) = h12_closed_form(a0.h12, -a0.h2, kappa, a0.multiplier, h * k as f64);
        worst = worst.max((h12 - y[2]).abs()).max((dh12 + y[1]).abs());
    }
    Ok(worst)
}

fn random_zero_level_adjoint(rng: &mut ChaCha8Rng, u_max: f64) -> SabbanAdjoint<f64> {
    let h2 = rng.random_range(-1.0..1.0);
    let h12: f64 = rng.random_range(-1.0..1.0);
    let kappa = if h12 > 0.0 { -u_max } else { u_max };
    SabbanAdjoint::on_zero_level(h2, h12, kappa, CostMultiplier::Normal)
}

fn extremal(b: &mut Builder, rng: &mut ChaCha8Rng) -> Result<()> {
    let u_max = 3f64.sqrt();
    let params = SabbanParams::new(u_max)?;
    let mut worst = 0.0f64;
    for kappa in [-u_max, 0.0, u_max] {
        for _ in 0..5 {
            let a0 = SabbanAdjoint::on_zero_level(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                kappa,
                CostMultiplier::Normal,
            );
            worst = worst.max(rk4_adjoint_deviation(a0, kappa, 2.0 * PI, 1e-3)?);
        }
    }
    b.check("closed_form_vs_rk4", worst, 1e-9);
    let (h, _) = h12_closed_form(-0.5f64, 0.0, 1.0, CostMultiplier::Normal, 3.7);
    b.check("particular_solution", (h + 0.5).abs(), 1e-12);

    let mut drift = 0.0f64;
    let mut counterexamples = 0usize;
    let family_samples = 200;
    for i in 0..family_samples {
        let a0 = random_zero_level_adjoint(rng, u_max);
        let g0 = random_rotation(rng);
        let ex = synthesize_extremal(&a0, &g0, &params, 6.0, 1e-3)?;
        if i < 20 {
            for s in &ex.samples {
                drift = drift.max(hamiltonian_sabban(&s.adjoint, s.kappa).abs());
            }
        }
        if !ex.classification.in_family() {
            counterexamples += 1;
        }
    }
    b.check("hamiltonian_sabban_drift", drift, 1e-8);

    let sp = SphericalParams::new(1.0)?;
    let (mut drift, mut kept) = (0.0f64, 0);
    while kept < 20 {
        let c0 = random_config(rng);
        let lp: f64 = rng.random_range(-1.0..1.0);
        let a0 = SphericalAdjoint::on_zero_level(&c0, lp, rng.random_range(-1.0..1.0), lp.signum(), CostMultiplier::Normal, &sp)?;
        let ex = match synthesize_spherical_extremal(&c0, &a0, &sp, 2.0 * PI, 1e-3) {
            Ok(ex) if ex.samples.iter().all(|s| s.config.lat.abs() <= LAT_MARGIN) => ex,
            Ok(_) | Err(SphereError::PoleBreach { .. }) => continue,
            Err(e) => return Err(e),
        };
        kept += 1;
        for s in &ex.samples {
            drift = drift.max(hamiltonian_spherical(&s.config, &s.adjoint, s.u, sp.eta).abs());
        }
    }
    b.check("hamiltonian_spherical_drift", drift, 1e-8);

    let (mut dev, mut res, mut kept) = (0.0f64, 0.0f64, 0);
    while kept < 10 {
        let c0 = random_config(rng);
        let seed = CostateSeed {
            lam_heading: rng.random_range(-1.0..1.0),
            dlam_heading: rng.random_range(-1.0..1.0),
            multiplier: CostMultiplier::Normal,
        };
        match compare_adjoint_flows(&c0, &seed, 1.0, 2.0 * PI, 1e-3) {
            Ok(c) if c.max_abs_lat <= LAT_MARGIN => {
                kept += 1;
                dev = dev.max(c.max_deviation);
                res = res.max(c.max_ode_residual);
            }
            Ok(_) | Err(SphereError::PoleBreach { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    b.check("switching_function_agreement", dev, 1e-6);
    b.check("switching_function_ode_residual", res, 1e-5);

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = random_config(rng);
        let s = singular_arc_solution(&c, CostMultiplier::Normal)?;
        let (sp, cp) = c.heading.sin_cos();
        let cl = c.lat.cos();
        let first = s.lam_lat * sp - s.lam_lon * cp / cl;
        let second = s.lam_lat * cp + s.lam_lon * sp / cl - 1.0;
        worst = worst.max(first.abs()).max(second.abs());
    }
    b.check("singular_arc_identities", worst, 1e-12);
    let rejected = matches!(
        switching_control_spherical(0.0, CostMultiplier::Abnormal),
        Err(SphereError::AbnormalSingular)
    );
    b.check("abnormal_singular_rejected", if rejected { 0.0 } else { 1.0 }, 0.5);

    b.check("family_coverage_counterexamples", counterexamples as f64, 1.0);
    b.metric("family_samples", family_samples as f64);
    b.metric("family_counterexamples", counterexamples as f64);
    Ok(())
}

fn geometry(b: &mut Builder, rng: &mut ChaCha8Rng) -> Result<()> {
    let cases = [
        ("radius_sabban_u1", 1.0, TurnModel::Sabban { u_max: 1.0 }),
        ("radius_sabban_sqrt3", 3f64.sqrt(), TurnModel::Sabban { u_max: 3f64.sqrt() }),
        ("radius_spherical_eta1", 1.0, TurnModel::Spherical { eta: 1.0 }),
        ("radius_spherical_eta_inv_sqrt3", 1.0, TurnModel::Spherical { eta: 1.0 / 3f64.sqrt() }),
    ];
    let mut worst_rms = 0.0f64;
    for (name, u, model) in cases {
        let g = audit_turn_geometry(u, model)?;
        b.check(name, (g.fitted_radius - g.expected_radius).abs(), 1e-8);
        b.metric(&format!("{name}_fitted"), g.fitted_radius);
        worst_rms = worst_rms.max(g.plane_rms);
    }
    let g = audit_turn_geometry(0.0f64, TurnModel::Sabban { u_max: 1.0 })?;
    b.check("great_circle_radius", (g.fitted_radius - 1.0).abs(), 1e-9);
    b.check("great_circle_plane_offset", g.plane_offset, 1e-9);
    worst_rms = worst_rms.max(g.plane_rms);
    b.check("plane_rms", worst_rms, 1e-9);

    for eta in [1.0, 1.0 / 3f64.sqrt()] {
        let h = audit_handedness(eta)?;
        let rate = ((h.dpsi_plus - 1.0 / eta).abs()).max((h.dpsi_minus + 1.0 / eta).abs());
        b.check(&format!("handedness_rate_eta_{eta:.4}"), rate, 1e-12);
        b.check(&format!("handedness_trace_eta_{eta:.4}"), h.trace_deviation, 1e-7);
    }

    let mut worst = 0.0f64;
    let h = 1e-6;
    for _ in 0..100 {
        let (lat, lon) = (rng.random_range(-1.4..1.4), rng.random_range(-PI..PI));
        let (dlat, dlon) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r0 = net_rotation(lat, lon);
        let r1 = net_rotation(lat + h * dlat, lon + h * dlon);
        let fd = *r0.inverse().matrix() * (*r1.matrix() - *r0.matrix()).scaled(1.0 / h);
        worst = worst.max(fd.max_abs_diff(&body_angular_velocity(lat, lon, dlat, dlon)));
    }
    b.check("angular_velocity_fd", worst, 1e-5);
    Ok(())
}

fn oracle(b: &mut Builder, rng: &mut ChaCha8Rng) -> Result<()> {
    let params = SabbanParams::new(3f64.sqrt())?;
    let cfg = SolverConfig::default();
    let ocfg = GridOracleConfig::default();
    let (mut residual, mut excess, mut mirror) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..10 {
        let target = random_rotation(rng);
        let res = plan(&target, &params, &cfg)?;
        let o = grid_min_length(&target, &params, &ocfg)?;
        residual = residual.max(res.best.residual);
        excess = excess.max(res.best.total_length - o.length);
        let m = plan(&mirror_rotation(&target), &params, &cfg)?;
        let diff = if m.best.word == res.best.word.mirrored() {
            m.best
                .lengths
                .iter()
                .zip(&res.best.lengths)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        mirror = mirror.max(diff);
    }
    b.check("plan_residual", residual, 1e-9);
    b.check("plan_minus_oracle", excess.max(0.0), 2e-3);
    b.check("mirror_symmetry", mirror, 1e-9);
    b.metric("max_plan_minus_oracle", excess);
    b.metric("max_plan_residual", residual);

    let words = enumerate_words();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = &words[rng.random_range(0..words.len())];
        let lengths: Vec<f64> = w
            .kinds()
            .iter()
            .map(|k| rng.random_range(0.0..k.period(params.u_max)))
            .collect();
        let generated: f64 = lengths.iter().sum();
        let res = plan(&word_endpoint(w, &lengths, &params)?, &params, &cfg)?;
        worst = worst.max(res.best.total_length - generated);
    }
    b.check("round_trip_excess", worst.max(0.0), 1e-7);
    b.metric("max_round_trip_excess", worst);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn geometry_passes_and_zero_tolerance_fails() {
        let r = run_suite(Suite::Geometry, 42, None).unwrap();
        assert!(r.all_passed(), "{r:#?}");
        let r = run_suite(Suite::Geometry, 42, Some(0.0)).unwrap();
        assert_eq!(r.passed, 0);
        assert_eq!(r.failed, r.checks.len());
    }
}
