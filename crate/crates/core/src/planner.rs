//! Boundary-value solver over the candidate word family and shortest-path
//! selection.
//!
//! The planner works in the body frame of the start configuration: a word
//! with lengths `t` reaches `exp(t1 A1) exp(t2 A2) ...` from the identity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SphereError};
use crate::sabban::{generator_axis, SabbanParams, SegmentKind};
use crate::scalar::Scalar;
use crate::so3::{exp_rotation, left_jacobian_inverse, log_vector, norm, Rotation, Vec3};
use crate::word::{enumerate_words, PathWord};

/// Slack on the `r <= 1/2` and `r = 1/sqrt(2)` domain tests.
const DOMAIN_SLACK: f64 = 1e-12;

/// Candidates whose total lengths differ by less than this count as tied.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Starting points per unknown, spread uniformly over one period.
    pub grid_per_axis: usize,
    pub max_iterations: usize,
    /// Residual below which a solution is accepted.
    pub accept_tol: f64,
    /// Length vectors closer than this (max norm) are duplicates.
    pub dedup_tol: f64,
    /// Proceed when the tight radius lies outside the proven domain.
    pub allow_out_of_domain: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_per_axis: 12,
            max_iterations: 50,
            accept_tol: 1e-9,
            dedup_tol: 1e-6,
            allow_out_of_domain: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePath<T> {
    pub word: PathWord,
    pub lengths: Vec<T>,
    pub total_length: T,
    pub residual: T,
}

/// Solver outcome for one word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordDiagnostics {
    pub word: String,
    pub starts: usize,
    pub converged: usize,
    pub solutions: usize,
    /// Smallest residual seen from any start.
    pub best_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerResult<T> {
    pub best: CandidatePath<T>,
    /// Accepted candidates of every word, sorted by word then lengths.
    pub all_solutions: Vec<CandidatePath<T>>,
    pub diagnostics: Vec<WordDiagnostics>,
    /// The tight radius lies outside the proven domain and the caller
    /// overrode the check.
    pub out_of_domain: bool,
}

/// Tight radius is in `(0, 1/2]` or equals `1/sqrt(2)`.
pub fn radius_in_domain<T: Scalar>(params: &SabbanParams<T>) -> bool {
    let r = params.radius().to_f64().unwrap_or(f64::NAN);
    (r > 0.0 && r <= 0.5 + DOMAIN_SLACK) || (r - std::f64::consts::FRAC_1_SQRT_2).abs() < DOMAIN_SLACK
}

fn axes<T: Scalar>(word: &PathWord, u_max: T) -> Vec<Vec3<T>> {
    word.kinds()
        .iter()
        .map(|k| generator_axis(k.curvature(u_max)))
        .collect()
}

/// Composition of the word's segments from the identity.
pub fn word_endpoint<T: Scalar>(
    word: &PathWord,
    lengths: &[T],
    params: &SabbanParams<T>,
) -> Result<Rotation<T>> {
    if lengths.len() != word.len() {
        return Err(SphereError::InvalidParameter(format!(
            "word {word} needs {} lengths, got {}",
            word.len(),
            lengths.len()
        )));
    }
    if let Some(t) = lengths.iter().find(|t| !(**t >= T::zero())) {
        return Err(SphereError::NegativeArcLength(t.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(compose(&axes(word, params.u_max), lengths))
}

fn compose<T: Scalar>(axes: &[Vec3<T>], t: &[T]) -> Rotation<T> {
    axes.iter()
        .zip(t)
        .fold(Rotation::identity(), |g, (a, s)| g * exp_rotation(*a, *s))
}

/// `log(E(t)^T R)` and its Jacobian columns.
fn residual_and_jacobian<T: Scalar>(
    axes: &[Vec3<T>],
    t: &[T],
    target: &Rotation<T>,
) -> (Vec3<T>, Vec<Vec3<T>>) {
    let k = axes.len();
    let factors: Vec<Rotation<T>> = axes.iter().zip(t).map(|(a, s)| exp_rotation(*a, *s)).collect();
    // suffix[i] = E_{i+1} ... E_k
    let mut suffix = vec![Rotation::identity(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = factors[i] * suffix[i + 1];
    }
    let r = log_vector(&(suffix[0].inverse() * *target));
    let jl_inv = left_jacobian_inverse(r);
    let cols = (0..k)
        .map(|i| {
            let w = suffix[i + 1].inverse().apply(axes[i]);
            let c = jl_inv.apply(w);
            [-c[0], -c[1], -c[2]]
        })
        .collect();
    (r, cols)
}

/// Solves the small symmetric system `m x = b` by Gaussian elimination with
/// partial pivoting.
fn solve_small<T: Scalar>(mut m: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if !(m[piv][col].abs() > T::zero()) {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[row][c] = m[row][c] - f * v;
            }
            let v = b[col];
            b[row] = b[row] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc = acc - m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

fn normalize_lengths<T: Scalar>(t: &mut [T], periods: &[T]) {
    for (s, p) in t.iter_mut().zip(periods) {
        if *s < T::zero() {
            *s = T::zero();
        } else if *s > *p + T::lit(1e-9) {
            *s = *s - (*s / *p).floor() * *p;
        }
    }
}

/// Damped Gauss-Newton from one start. Returns `(lengths, residual)`.
fn newton<T: Scalar>(
    axes: &[Vec3<T>],
    periods: &[T],
    mut t: Vec<T>,
    target: &Rotation<T>,
    cfg: &SolverConfig,
) -> (Vec<T>, T) {
    let k = t.len();
    let stop = T::lit(cfg.accept_tol * 1e-4);
    let (mut r, mut cols) = residual_and_jacobian(axes, &t, target);
    let mut rn = norm(r);
    for _ in 0..cfg.max_iterations {
        if rn < stop {
            break;
        }
        let mut jtj = vec![vec![T::zero(); k]; k];
        let mut jtr = vec![T::zero(); k];
        for i in 0..k {
            for j in 0..k {
                jtj[i][j] = (0..3).map(|c| cols[i][c] * cols[j][c]).sum();
            }
            jtr[i] = -(0..3).map(|c| cols[i][c] * r[c]).sum::<T>();
        }
        let scale = (0..k).map(|i| jtj[i][i]).sum::<T>() + T::one();
        for (i, row) in jtj.iter_mut().enumerate() {
            row[i] = row[i] + scale * T::lit(1e-14);
        }
        let Some(delta) = solve_small(jtj, jtr) else {
            break;
        };
        let mut alpha = T::one();
        let mut improved = false;
        for _ in 0..30 {
            let mut trial: Vec<T> = t.iter().zip(&delta).map(|(a, d)| *a + alpha * *d).collect();
            normalize_lengths(&mut trial, periods);
            let (r_new, cols_new) = residual_and_jacobian(axes, &trial, target);
            let n_new = norm(r_new);
            if n_new < rn {
                // a nonzero local minimum: progress has stalled
                let stalled = n_new > rn * T::lit(0.999) && n_new > T::lit(1e-6);
                t = trial;
                r = r_new;
                cols = cols_new;
                rn = n_new;
                improved = !stalled;
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        if !improved {
            break;
        }
    }
    (t, rn)
}

/// Every distinct solution of one word reaching `target`.
pub fn solve_word<T: Scalar>(
    word: &PathWord,
    target: &Rotation<T>,
    params: &SabbanParams<T>,
    cfg: &SolverConfig,
) -> Vec<CandidatePath<T>> {
    solve_word_with_diagnostics(word, target, params, cfg).0
}

fn grid_starts<T: Scalar>(periods: &[T], per_axis: usize) -> Vec<Vec<T>> {
    let n = per_axis.max(1);
    let mut starts = vec![Vec::new()];
    for p in periods {
        let step = *p / T::from_usize(n).unwrap();
        starts = starts
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |i| {
                    let mut v = s.clone();
                    v.push(step * T::from_usize(i).unwrap());
                    v
                })
            })
            .collect();
    }
    starts
}

fn cmp_lengths<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn solve_word_with_diagnostics<T: Scalar>(
    word: &PathWord,
    target: &Rotation<T>,
    params: &SabbanParams<T>,
    cfg: &SolverConfig,
) -> (Vec<CandidatePath<T>>, WordDiagnostics) {
    let axes = axes(word, params.u_max);
    let periods: Vec<T> = word.kinds().iter().map(|k| k.period(params.u_max)).collect();
    let starts = grid_starts(&periods, cfg.grid_per_axis);
    let runs: Vec<(Vec<T>, T)> = starts
        .par_iter()
        .map(|s| newton(&axes, &periods, s.clone(), target, cfg))
        .collect();
    let accept = T::lit(cfg.accept_tol);
    let best_residual = runs
        .iter()
        .map(|(_, r)| r.to_f64().unwrap_or(f64::INFINITY))
        .fold(f64::INFINITY, f64::min);
    let mut found: Vec<CandidatePath<T>> = Vec::new();
    let mut converged = 0;
    for (t, _) in runs {
        // residual re-measured on the composed endpoint
        let residual = crate::so3::rotation_distance(&compose(&axes, &t), target);
        if !(residual < accept) || t.iter().any(|s| *s < T::zero()) {
            continue;
        }
        converged += 1;
        let dup = found.iter().any(|c| {
            c.lengths
                .iter()
                .zip(&t)
                .all(|(a, b)| (*a - *b).abs() < T::lit(cfg.dedup_tol))
        });
        if !dup {
            found.push(CandidatePath {
                word: word.clone(),
                total_length: t.iter().copied().sum(),
                lengths: t,
                residual,
            });
        }
    }
    found.sort_by(|a, b| cmp_lengths(&a.lengths, &b.lengths));
    let diag = WordDiagnostics {
        word: word.to_string(),
        starts: starts.len(),
        converged,
        solutions: found.len(),
        best_residual,
    };
    (found, diag)
}

fn select_best<T: Scalar>(all: &[CandidatePath<T>]) -> Option<CandidatePath<T>> {
    let min = all
        .iter()
        .map(|c| c.total_length)
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))))?;
    all.iter()
        .filter(|c| c.total_length <= min + T::lit(TIE_TOL))
        .min_by(|a, b| {
            a.word
                .cmp(&b.word)
                .then_with(|| cmp_lengths(&a.lengths, &b.lengths))
        })
        .cloned()
}

/// Shortest candidate-family path from the identity to `target`.
pub fn plan<T: Scalar>(
    target: &Rotation<T>,
    params: &SabbanParams<T>,
    cfg: &SolverConfig,
) -> Result<PlannerResult<T>> {
    let out_of_domain = !radius_in_domain(params);
    if out_of_domain && !cfg.allow_out_of_domain {
        return Err(SphereError::OutOfDomain {
            radius: params.radius().to_f64().unwrap_or(f64::NAN),
        });
    }
    let words = enumerate_words();
    let per_word: Vec<(Vec<CandidatePath<T>>, WordDiagnostics)> = words
        .par_iter()
        .map(|w| solve_word_with_diagnostics(w, target, params, cfg))
        .collect();
    let mut all_solutions = Vec::new();
    let mut diagnostics = Vec::new();
    for (sols, diag) in per_word {
        all_solutions.extend(sols);
        diagnostics.push(diag);
    }
    all_solutions.sort_by(|a, b| {
        a.word
            .cmp(&b.word)
            .then_with(|| cmp_lengths(&a.lengths, &b.lengths))
    });
    let best = select_best(&all_solutions).ok_or_else(|| {
        let detail = diagnostics
            .iter()
            .map(|d| format!("{}: best residual {:.3e}", d.word, d.best_residual))
            .collect::<Vec<_>>()
            .join("; ");
        SphereError::NoSolution(detail)
    })?;
    Ok(PlannerResult {
        best,
        all_solutions,
        diagnostics,
        out_of_domain,
    })
}

/// Plans from `start` to `goal` by working in the start's body frame.
pub fn plan_between<T: Scalar>(
    start: &Rotation<T>,
    goal: &Rotation<T>,
    params: &SabbanParams<T>,
    cfg: &SolverConfig,
) -> Result<PlannerResult<T>> {
    plan(&(start.inverse() * *goal), params, cfg)
}

/// Conjugation by `diag(1, 1, -1)`, which exchanges left and right turns.
pub fn mirror_rotation<T: Scalar>(r: &Rotation<T>) -> Rotation<T> {
    let mut m = *r.matrix();
    for i in 0..3 {
        for j in 0..3 {
            if (i == 2) != (j == 2) {
                m.m[i][j] = -m.m[i][j];
            }
        }
    }
    Rotation::from_matrix_unchecked(m)
}

/// `(kind, length)` pairs of a candidate, for tracing.
pub fn candidate_segments<T: Scalar>(c: &CandidatePath<T>) -> Vec<(SegmentKind, T)> {
    c.word.kinds().iter().copied().zip(c.lengths.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{exp_rotation, rotation_distance};
    use std::f64::consts::PI;

    fn params() -> SabbanParams<f64> {
        SabbanParams::new(3f64.sqrt()).unwrap()
    }

    fn w(s: &str) -> PathWord {
        s.parse().unwrap()
    }

    #[test]
    fn endpoints_of_full_periods() {
        let p = params();
        let id = Rotation::identity();
        assert!(rotation_distance(&word_endpoint(&w("LGR"), &[0.0; 3], &p).unwrap(), &id) < 1e-15);
        assert!(rotation_distance(&word_endpoint(&w("G"), &[2.0 * PI], &p).unwrap(), &id) < 1e-12);
        assert!(rotation_distance(&word_endpoint(&w("L"), &[2.0 * PI / 2.0], &p).unwrap(), &id) < 1e-12);
        assert!(word_endpoint(&w("LG"), &[1.0], &p).is_err());
        assert!(word_endpoint(&w("LG"), &[1.0, -0.1], &p).is_err());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let p = params();
        let word = w("LRL");
        let ax = axes(&word, p.u_max);
        let target = exp_rotation([0.3, -0.8, 0.2], 1.1);
        let t = vec![0.4, 1.3, 0.9];
        let (_, cols) = residual_and_jacobian(&ax, &t, &target);
        let h = 1e-6;
        for i in 0..3 {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[i] += h;
            tm[i] -= h;
            let (rp, _) = residual_and_jacobian(&ax, &tp, &target);
            let (rm, _) = residual_and_jacobian(&ax, &tm, &target);
            for c in 0..3 {
                let fd = (rp[c] - rm[c]) / (2.0 * h);
                assert!((fd - cols[i][c]).abs() < 1e-7, "col {i} comp {c}: {fd} vs {}", cols[i][c]);
            }
        }
    }

    #[test]
    fn identity_target_for_great_circle() {
        let sols = solve_word(&w("G"), &Rotation::identity(), &params(), &SolverConfig::default());
        let lens: Vec<f64> = sols.iter().map(|c| c.lengths[0]).collect();
        assert!(lens.iter().any(|l| l.abs() < 1e-9));
        assert!(lens.iter().any(|l| (l - 2.0 * PI).abs() < 1e-9));
    }

    #[test]
    fn round_trip_lgr() {
        let p = params();
        let target = word_endpoint(&w("LGR"), &[0.3, 0.7, 0.4], &p).unwrap();
        let sols = solve_word(&w("LGR"), &target, &p, &SolverConfig::default());
        assert!(sols.iter().any(|c| {
            c.lengths.iter().zip([0.3, 0.7, 0.4]).all(|(a, b)| (a - b).abs() < 1e-7)
        }));
        for c in &sols {
            assert!(c.residual < 1e-9);
        }
    }

    #[test]
    fn plan_identity_is_zero_length_g() {
        let res = plan(&Rotation::identity(), &params(), &SolverConfig::default()).unwrap();
        assert!(res.best.total_length.abs() < 1e-12);
        assert_eq!(res.best.word.to_string(), "G");
        assert_eq!(res.diagnostics.len(), 15);
    }

    #[test]
    fn tiny_rotation_gives_tiny_path() {
        // small advance along the great circle through the start
        let target = exp_rotation([0.0, 0.0, 1.0], 1e-3);
        let res = plan(&target, &params(), &SolverConfig::default()).unwrap();
        assert!((res.best.total_length - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn domain_rules() {
        assert!(radius_in_domain(&SabbanParams::from_radius(0.5).unwrap()));
        assert!(radius_in_domain(&SabbanParams::from_radius(0.2).unwrap()));
        assert!(radius_in_domain(&SabbanParams::new(1.0).unwrap()));
        let p = SabbanParams::from_radius(0.6).unwrap();
        assert!(!radius_in_domain(&p));
        assert!(matches!(
            plan(&Rotation::identity(), &p, &SolverConfig::default()),
            Err(SphereError::OutOfDomain { .. })
        ));
        let cfg = SolverConfig {
            allow_out_of_domain: true,
            ..SolverConfig::default()
        };
        assert!(plan(&Rotation::identity(), &p, &cfg).unwrap().out_of_domain);
    }

    #[test]
    fn mirror_swaps_turns() {
        let p = params();
        let a = word_endpoint(&w("LGR"), &[0.3, 0.7, 0.4], &p).unwrap();
        let b = word_endpoint(&w("RGL"), &[0.3, 0.7, 0.4], &p).unwrap();
        assert!(rotation_distance(&mirror_rotation(&a), &b) < 1e-14);
    }

    #[test]
    fn small_solver_agrees_with_substitution() {
        let m = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x = solve_small(m.clone(), vec![5.0, 3.0, 6.0]).unwrap();
        for (row, b) in m.iter().zip([5.0, 3.0, 6.0]) {
            let v: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((v - b).abs() < 1e-12);
        }
    }
}
