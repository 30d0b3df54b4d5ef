//! Winding-vector enumeration and resonant-torus root finding.
//!
//! Two stationary systems are solved on the NHIM (`I = 0`):
//!
//! * fixed time `t`: `Omega(J) = 2 pi m / t` for `J`;
//! * fixed energy `E`: `H(0, J) = E` together with `Omega(J) tau = 2 pi m`
//!   for `(J, tau)`.
//!
//! Both use a damped Newton iteration from a deterministic list of starts,
//! with steps clipped to the box `[j_floor, j_cap]` and backtracking whenever
//! the residual does not decrease.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{OtocError, Result};
use crate::normal_form::{ActionPoint, ActionPolynomial};

/// Integer winding numbers `m` of a resonant torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindingVector(pub Vec<i64>);

impl WindingVector {
    pub fn new(m: impl Into<Vec<i64>>) -> Self {
        WindingVector(m.into())
    }

    /// `|m_1| + .. + |m_f|`.
    pub fn depth(&self) -> usize {
        self.0.iter().map(|m| m.unsigned_abs() as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&m| m as f64))
    }
}

impl std::fmt::Display for WindingVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// How a torus was selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    /// `tau` equals a prescribed observation time.
    FixedTime,
    /// `(J, tau)` solve the energy-shell stationary conditions at `energy`.
    FixedEnergy { energy: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonantTorus {
    pub winding: WindingVector,
    pub j: DVector<f64>,
    pub tau: f64,
    /// `Lambda(0, J)`.
    pub lambda: f64,
    /// `Omega(0, J)`.
    pub omega: DVector<f64>,
    /// `dOmega/dJ` at `(0, J)`.
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub mode: SolveMode,
    /// Some action was in `(-negative_tol, 0)` and was clamped to zero.
    pub clamped: bool,
}

impl ResonantTorus {
    pub fn point(&self) -> ActionPoint {
        ActionPoint::on_nhim(&self.j)
    }

    /// `max_k |Omega_k - 2 pi m_k / tau|`.
    pub fn frequency_residual(&self) -> f64 {
        let target = self.winding.as_vector() * (2.0 * PI / self.tau);
        (&self.omega - target).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Step-shrink factor used while backtracking.
    pub damping: f64,
    /// Start vectors; empty selects the default ladder `{0.1, 1, 2.5}^f`.
    pub initial_guesses: Vec<Vec<f64>>,
    /// Upper bound for iterates.
    pub j_cap: f64,
    /// Lower bound for iterates.
    pub j_floor: f64,
    /// Roots with actions in `(-negative_tol, 0)` are clamped to zero.
    pub negative_tol: f64,
    /// Roots closer than this in the infinity norm are merged.
    pub dedup_tol: f64,
    pub singular_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iter: 50,
            damping: 0.5,
            initial_guesses: Vec::new(),
            j_cap: 50.0,
            j_floor: -0.5,
            negative_tol: 1e-9,
            dedup_tol: 1e-6,
            singular_tol: 1e-14,
        }
    }
}

const LADDER: [f64; 3] = [0.1, 1.0, 2.5];
const MIN_STEP: f64 = 1e-12;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(OtocError::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(OtocError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(OtocError::InvalidConfig("damping must lie in (0, 1)".into()));
        }
        if !(self.j_floor < 0.0 && self.j_cap > 0.0) {
            return Err(OtocError::InvalidConfig("need j_floor < 0 < j_cap".into()));
        }
        Ok(())
    }

    /// Explicit starts, or the Cartesian ladder `{0.1, 1.0, 2.5}^f`.
    pub fn starts(&self, f: usize) -> Result<Vec<DVector<f64>>> {
        if !self.initial_guesses.is_empty() {
            return self
                .initial_guesses
                .iter()
                .map(|g| {
                    if g.len() == f {
                        Ok(DVector::from_column_slice(g))
                    } else {
                        Err(OtocError::DimensionMismatch {
                            expected: f,
                            found: g.len(),
                        })
                    }
                })
                .collect();
        }
        let mut out = Vec::with_capacity(LADDER.len().pow(f as u32));
        let mut idx = vec![0usize; f];
        loop {
            out.push(DVector::from_iterator(f, idx.iter().map(|&i| LADDER[i])));
            let mut k = f;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < LADDER.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// All integer vectors of length `f` with `1 <= |m|_1 <= m_max`, in
/// lexicographic order.
pub fn enumerate_windings(f: usize, m_max: usize) -> Vec<WindingVector> {
    fn rec(prefix: &mut Vec<i64>, left: i64, f: usize, out: &mut Vec<WindingVector>) {
        if prefix.len() == f {
            if prefix.iter().any(|&m| m != 0) {
                out.push(WindingVector(prefix.clone()));
            }
            return;
        }
        for m in -left..=left {
            prefix.push(m);
            rec(prefix, left - m.abs(), f, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(f), m_max as i64, f, &mut out);
    out
}

enum StartOutcome {
    Converged { x: DVector<f64>, iterations: usize },
    Singular(f64),
    /// Newton wants to leave the box through the lower action bound.
    BlockedBelow,
    Failed,
}

/// Generic damped Newton iteration over `x`, where `bounds[k]` limits each
/// component and `system` returns `(residual, jacobian)` or a singularity.
fn damped_newton<F>(
    mut x: DVector<f64>,
    bounds: &[(f64, f64)],
    cfg: &SolverConfig,
    system: F,
) -> StartOutcome
where
    F: Fn(&DVector<f64>) -> std::result::Result<(DVector<f64>, DMatrix<f64>), f64>,
{
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        x[k] = x[k].clamp(lo, hi);
    }
    let mut iterations = 0;
    loop {
        let (res, jac) = match system(&x) {
            Ok(v) => v,
            Err(det) => return StartOutcome::Singular(det),
        };
        let norm = res.amax();
        if !norm.is_finite() {
            return StartOutcome::Failed;
        }
        if norm <= cfg.tol {
            return StartOutcome::Converged { x, iterations };
        }
        if iterations >= cfg.max_iter {
            return StartOutcome::Failed;
        }
        let step = match jac.lu().solve(&(-&res)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return StartOutcome::Singular(0.0),
        };
        let mut alpha: f64 = 1.0;
        let mut blocked_below = false;
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if step[k] > 0.0 {
                alpha = alpha.min((hi - x[k]) / step[k]);
            } else if step[k] < 0.0 {
                let a = (lo - x[k]) / step[k];
                if a < MIN_STEP {
                    blocked_below = true;
                }
                alpha = alpha.min(a);
            }
        }
        if alpha < MIN_STEP {
            return if blocked_below {
                StartOutcome::BlockedBelow
            } else {
                StartOutcome::Failed
            };
        }
        let next = loop {
            let trial = &x + &step * alpha;
            let trial_norm = match system(&trial) {
                Ok((r, _)) => r.amax(),
                Err(_) => f64::INFINITY,
            };
            if trial_norm < norm {
                break Some(trial);
            }
            alpha *= cfg.damping;
            if alpha < MIN_STEP {
                break None;
            }
        };
        match next {
            Some(n) => x = n,
            None => return StartOutcome::Failed,
        }
        iterations += 1;
    }
}

fn jacobian_checked(poly: &ActionPolynomial, pt: &ActionPoint, cfg: &SolverConfig) -> std::result::Result<DMatrix<f64>, f64> {
    let jac = poly.frequency_jacobian(pt).map_err(|_| f64::NAN)?;
    let det = jac.determinant();
    if !(det.abs() >= cfg.singular_tol) {
        return Err(det);
    }
    Ok(jac)
}

/// Starting point from the quadratic truncation at the origin, when it is
/// invertible.
fn linearized_fixed_time(poly: &ActionPolynomial, target: &DVector<f64>) -> Option<DVector<f64>> {
    let origin = ActionPoint::origin(poly.bath_modes());
    let c0 = poly.frequency_jacobian(&origin).ok()?;
    let w0 = poly.bath_frequencies(&origin).ok()?;
    if c0.determinant().abs() < 1e-14 {
        return None;
    }
    c0.lu().solve(&(target - w0))
}

/// Exact stationary point of the quadratic truncation
/// `E0 + omega.J + J^T C0 J / 2` at energy `e`.
fn linearized_fixed_energy(poly: &ActionPolynomial, m: &DVector<f64>, e: f64) -> Option<(DVector<f64>, f64)> {
    let origin = ActionPoint::origin(poly.bath_modes());
    let c0 = poly.frequency_jacobian(&origin).ok()?;
    let w0 = poly.bath_frequencies(&origin).ok()?;
    if c0.determinant().abs() < 1e-14 {
        return None;
    }
    let lu = c0.lu();
    let u = lu.solve(m)?;
    let v = lu.solve(&w0)?;
    let s2 = (2.0 * (e - poly.saddle_energy()) + w0.dot(&v)) / m.dot(&u);
    if !(s2 > 0.0) {
        return None;
    }
    let s = s2.sqrt();
    Some((u * s - v, 2.0 * PI / s))
}

fn finish_roots(
    roots: Vec<(DVector<f64>, f64, usize)>,
    poly: &ActionPolynomial,
    m: &WindingVector,
    mode: SolveMode,
    cfg: &SolverConfig,
) -> Result<Vec<ResonantTorus>> {
    let mut unique: Vec<(DVector<f64>, f64, usize)> = Vec::new();
    for r in roots {
        let dup = unique.iter().any(|u| {
            (&u.0 - &r.0).amax() < cfg.dedup_tol && (u.1 - r.1).abs() < cfg.dedup_tol
        });
        if !dup {
            unique.push(r);
        }
    }
    let mut out = Vec::new();
    for (mut j, tau, iterations) in unique {
        if tau <= 0.0 || j.iter().any(|&v| v < -cfg.negative_tol) {
            continue;
        }
        let mut clamped = false;
        for v in j.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                clamped = true;
            }
        }
        let pt = ActionPoint::on_nhim(&j);
        let lambda = poly.lyapunov_exponent(&pt)?;
        let omega = poly.bath_frequencies(&pt)?;
        let jacobian = poly.frequency_jacobian(&pt)?;
        let mut torus = ResonantTorus {
            winding: m.clone(),
            j,
            tau,
            lambda,
            omega,
            jacobian,
            iterations,
            residual_norm: 0.0,
            mode,
            clamped,
        };
        torus.residual_norm = torus.frequency_residual();
        if let SolveMode::FixedEnergy { energy } = mode {
            let shell = (poly.eval(&pt)? - energy).abs();
            torus.residual_norm = torus.residual_norm.max(shell);
        }
        out.push(torus);
    }
    Ok(out)
}

fn no_root(m: &WindingVector, singular: Option<f64>, any_other: bool) -> OtocError {
    match singular {
        Some(det) if !any_other => OtocError::SingularJacobian(det),
        _ => OtocError::NoRoot {
            winding: m.0.clone(),
        },
    }
}

/// Solves `Omega(0, J) = 2 pi m / t`.
///
/// Returns every distinct physical root; an empty vector means the iteration
/// converged only to tori with negative actions.
pub fn solve_resonance_fixed_time(
    poly: &ActionPolynomial,
    m: &WindingVector,
    t: f64,
    cfg: &SolverConfig,
) -> Result<Vec<ResonantTorus>> {
    cfg.validate()?;
    let f = poly.bath_modes();
    if m.len() != f {
        return Err(OtocError::DimensionMismatch {
            expected: f,
            found: m.len(),
        });
    }
    if !(t > 0.0) {
        return Err(OtocError::InvalidConfig(format!("observation time must be positive, got {t}")));
    }
    let target = m.as_vector() * (2.0 * PI / t);
    let mut starts = Vec::new();
    if cfg.initial_guesses.is_empty() {
        starts.extend(linearized_fixed_time(poly, &target));
    }
    starts.extend(cfg.starts(f)?);

    let bounds = vec![(cfg.j_floor, cfg.j_cap); f];
    let system = |x: &DVector<f64>| {
        let pt = ActionPoint::on_nhim(x);
        let jac = jacobian_checked(poly, &pt, cfg)?;
        let omega = poly.bath_frequencies(&pt).map_err(|_| f64::NAN)?;
        Ok((omega - &target, jac))
    };

    let mut roots = Vec::new();
    let mut singular = None;
    let mut other_failure = false;
    let mut blocked_below = false;
    for s in starts {
        match damped_newton(s, &bounds, cfg, system) {
            StartOutcome::Converged { x, iterations } => roots.push((x, t, iterations)),
            StartOutcome::Singular(det) => singular = Some(det),
            StartOutcome::BlockedBelow => blocked_below = true,
            StartOutcome::Failed => other_failure = true,
        }
    }
    if roots.is_empty() {
        if blocked_below {
            // the iteration heads for negative actions: no physical torus
            return Ok(Vec::new());
        }
        return Err(no_root(m, singular, other_failure));
    }
    finish_roots(roots, poly, m, SolveMode::FixedTime, cfg)
}

/// Solves `H(0, J) = E` and `Omega(0, J) tau = 2 pi m` for `(J, tau)`.
pub fn solve_resonance_fixed_energy(
    poly: &ActionPolynomial,
    m: &WindingVector,
    energy: f64,
    cfg: &SolverConfig,
) -> Result<Vec<ResonantTorus>> {
    cfg.validate()?;
    let f = poly.bath_modes();
    if m.len() != f {
        return Err(OtocError::DimensionMismatch {
            expected: f,
            found: m.len(),
        });
    }
    let saddle = poly.saddle_energy();
    if !(energy > saddle) {
        return Err(OtocError::BelowSaddle { energy, saddle });
    }
    let mv = m.as_vector();
    let two_pi_m = &mv * (2.0 * PI);

    let mut starts: Vec<DVector<f64>> = Vec::new();
    let push = |starts: &mut Vec<DVector<f64>>, j: &DVector<f64>, tau: f64| {
        let mut x = DVector::zeros(f + 1);
        x.rows_mut(0, f).copy_from(j);
        x[f] = tau;
        starts.push(x);
    };
    if cfg.initial_guesses.is_empty() {
        if let Some((j, tau)) = linearized_fixed_energy(poly, &mv, energy) {
            push(&mut starts, &j, tau);
        }
    }
    for j in cfg.starts(f)? {
        let omega = poly.bath_frequencies(&ActionPoint::on_nhim(&j))?;
        let tau = two_pi_m.dot(&omega) / omega.dot(&omega);
        if tau.is_finite() && tau > 0.0 {
            push(&mut starts, &j, tau);
        }
    }

    let mut bounds = vec![(cfg.j_floor, cfg.j_cap); f];
    bounds.push((f64::MIN_POSITIVE, f64::INFINITY));
    let system = |x: &DVector<f64>| {
        let j = x.rows(0, f).into_owned();
        let tau = x[f];
        let pt = ActionPoint::on_nhim(&j);
        let jac_omega = jacobian_checked(poly, &pt, cfg)?;
        let omega = poly.bath_frequencies(&pt).map_err(|_| f64::NAN)?;
        let h = poly.eval(&pt).map_err(|_| f64::NAN)?;
        let mut res = DVector::zeros(f + 1);
        res[0] = h - energy;
        let freq_res = &omega - &two_pi_m / tau;
        res.rows_mut(1, f).copy_from(&freq_res);
        let mut jac = DMatrix::zeros(f + 1, f + 1);
        jac.view_mut((0, 0), (1, f)).copy_from(&omega.transpose());
        jac.view_mut((1, 0), (f, f)).copy_from(&jac_omega);
        jac.view_mut((1, f), (f, 1)).copy_from(&(&two_pi_m / (tau * tau)));
        Ok((res, jac))
    };

    let mut roots = Vec::new();
    let mut singular = None;
    let mut other_failure = false;
    let mut blocked_below = false;
    for s in starts {
        match damped_newton(s, &bounds, cfg, system) {
            StartOutcome::Converged { x, iterations } => {
                roots.push((x.rows(0, f).into_owned(), x[f], iterations))
            }
            StartOutcome::Singular(det) => singular = Some(det),
            StartOutcome::BlockedBelow => blocked_below = true,
            StartOutcome::Failed => other_failure = true,
        }
    }
    if roots.is_empty() {
        if blocked_below {
            // the iteration heads for negative actions: no physical torus
            return Ok(Vec::new());
        }
        return Err(no_root(m, singular, other_failure));
    }
    finish_roots(roots, poly, m, SolveMode::FixedEnergy { energy }, cfg)
}
