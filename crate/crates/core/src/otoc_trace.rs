//! Coherent orbit sum for the microcanonical OTOC `C_E(t)`.
//!
//! `C_E(t) = (hbar^2 / 4) sum_gamma W_gamma(t)` over resonant tori with
//! `0 < |m|_1 <= m_max`, summed in lexicographic winding order so the
//! result does not depend on how the work was scheduled.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::amplitude::{orbit_contribution, OrbitContribution};
use crate::error::{OtocError, Result};
use crate::normal_form::ActionPolynomial;
use crate::resonance::{
    enumerate_windings, solve_resonance_fixed_energy, solve_resonance_fixed_time, ResonantTorus,
    SolveMode, SolverConfig, WindingVector,
};
use crate::stability::{gutzwiller_stability_factor_ln, ButterflyMode, EXP_GUARD};

/// Relative tolerance for treating an orbit period as equal to `t`.
const PERIOD_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// Energy-shell tori with their own periods; weight
    /// `e^{2 Lambda t} A cos(..) / (2 sinh(Lambda tau / 2))`.
    General,
    /// Tori with period equal to the observation time; weight
    /// `A e^{1.5 Lambda t} cos(..)`.
    #[default]
    Resonant,
}

impl FromStr for TraceMode {
    type Err = OtocError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(TraceMode::General),
            "resonant" => Ok(TraceMode::Resonant),
            other => Err(OtocError::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for TraceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceMode::General => "general",
            TraceMode::Resonant => "resonant",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub energy: f64,
    pub hbar: f64,
    pub m_max: usize,
    pub t_grid: Vec<f64>,
    pub mode: TraceMode,
    /// Sum in log-magnitude/sign form to survive large exponents.
    pub log_space: bool,
    /// Growth factor used by general mode.
    pub butterfly: ButterflyMode,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            energy: -0.5,
            hbar: 0.05,
            m_max: 5,
            t_grid: linspace(2.0, 6.0, 81),
            mode: TraceMode::Resonant,
            log_space: false,
            butterfly: ButterflyMode::Asymptotic,
        }
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
        }
    }
}

impl TraceConfig {
    pub fn validate(&self, poly: &ActionPolynomial) -> Result<()> {
        if !(self.hbar > 0.0) {
            return Err(OtocError::InvalidConfig(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.t_grid.is_empty() {
            return Err(OtocError::InvalidConfig("empty time grid".into()));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OtocError::InvalidConfig("time grid must be finite and strictly increasing".into()));
        }
        if self.mode == TraceMode::Resonant && self.t_grid[0] <= 0.0 {
            return Err(OtocError::InvalidConfig("resonant mode needs positive times".into()));
        }
        if self.mode == TraceMode::General && !(self.energy > poly.saddle_energy()) {
            return Err(OtocError::BelowSaddle {
                energy: self.energy,
                saddle: poly.saddle_energy(),
            });
        }
        Ok(())
    }
}

/// Signed weight as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWeight {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogWeight {
    fn new(ln_magnitude: f64, cosine: f64) -> Self {
        if cosine == 0.0 {
            LogWeight {
                ln_abs: f64::NEG_INFINITY,
                sign: 0.0,
            }
        } else {
            LogWeight {
                ln_abs: ln_magnitude + cosine.abs().ln(),
                sign: cosine.signum(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

fn cosine(c: &OrbitContribution, hbar: f64) -> f64 {
    (c.action / hbar - FRAC_PI_2 * c.maslov as f64).cos()
}

fn amplitude_at(c: &OrbitContribution, hbar: f64) -> f64 {
    if hbar == c.hbar {
        c.amplitude
    } else {
        c.amplitude * (hbar / c.hbar).sqrt()
    }
}

fn resonant_ln(c: &OrbitContribution, t: f64, hbar: f64) -> Result<LogWeight> {
    match c.torus.mode {
        SolveMode::FixedTime if (c.torus.tau - t).abs() <= PERIOD_MATCH_TOL * t.abs().max(1.0) => {}
        SolveMode::FixedTime => {
            return Err(OtocError::ModeMismatch(format!(
                "torus period {} differs from observation time {t}",
                c.torus.tau
            )))
        }
        SolveMode::FixedEnergy { .. } => {
            return Err(OtocError::ModeMismatch(
                "resonant weight needs a torus solved at fixed time".into(),
            ))
        }
    }
    let ln = amplitude_at(c, hbar).ln() + 1.5 * c.torus.lambda * t;
    Ok(LogWeight::new(ln, cosine(c, hbar)))
}

fn general_ln(c: &OrbitContribution, t_otoc: f64, hbar: f64, butterfly: ButterflyMode) -> Result<LogWeight> {
    if !matches!(c.torus.mode, SolveMode::FixedEnergy { .. }) {
        return Err(OtocError::ModeMismatch(
            "general weight needs a torus solved on the energy shell".into(),
        ));
    }
    let lam = c.torus.lambda;
    let growth = match butterfly {
        ButterflyMode::Asymptotic => 2.0 * lam * t_otoc,
        // 4 cosh^2(x) = e^{2x} (1 + e^{-2x})^2
        ButterflyMode::Exact => {
            let x = (lam * t_otoc).abs();
            2.0 * x + 2.0 * (-2.0 * x).exp().ln_1p()
        }
    };
    let ln = growth + gutzwiller_stability_factor_ln(lam, c.torus.tau)? + amplitude_at(c, hbar).ln();
    Ok(LogWeight::new(ln, cosine(c, hbar)))
}

fn finite(w: LogWeight) -> Result<f64> {
    if w.ln_abs > EXP_GUARD {
        return Err(OtocError::InfOverflow(w.ln_abs));
    }
    Ok(w.value())
}

/// `A e^{1.5 Lambda t} cos(S / hbar - pi mu / 2)` for a torus with period `t`.
pub fn orbit_weight_resonant(c: &OrbitContribution, t: f64, hbar: f64) -> Result<f64> {
    finite(resonant_ln(c, t, hbar)?)
}

/// `e^{2 Lambda t_otoc} A cos(S / hbar - pi mu / 2) / (2 sinh(Lambda tau / 2))`
/// for an energy-shell torus, `e^{2 Lambda t}` replaced by `4 cosh^2` when
/// `butterfly` is exact.
pub fn orbit_weight_general(c: &OrbitContribution, t_otoc: f64, hbar: f64, butterfly: ButterflyMode) -> Result<f64> {
    finite(general_ln(c, t_otoc, hbar, butterfly)?)
}

/// One row of the per-orbit audit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord {
    /// Index into the time grid.
    pub t_index: usize,
    pub t: f64,
    pub contribution: OrbitContribution,
    pub weight: f64,
    pub log_weight: LogWeight,
}

/// A winding that produced no usable orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipRecord {
    /// `None` when the failure is independent of `t`.
    pub t: Option<f64>,
    pub winding: WindingVector,
    pub reason: OtocError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries {
    pub t: Vec<f64>,
    pub c_e: Vec<f64>,
    /// `partials[k][i] = C^{(k)}(t_i)` for `k = 0..=m_max`; `partials[0]` is zero.
    pub partials: Vec<Vec<f64>>,
    /// `residuals[k - 1][i] = |C^{(k)} - C^{(k-1)}|` for `k = 1..=m_max`.
    pub residuals: Vec<Vec<f64>>,
    pub orbit_count: usize,
    /// In `(t, winding, root)` order.
    pub contributions: Vec<OrbitRecord>,
    pub skips: Vec<SkipRecord>,
    /// Times at which no orbit contributed.
    pub empty_times: Vec<f64>,
    pub hbar: f64,
    pub m_max: usize,
}

impl TraceSeries {
    pub fn is_empty_everywhere(&self) -> bool {
        self.empty_times.len() == self.t.len()
    }

    /// `|C^{(k)} - C^{(k-1)}|` recomputed from the stored partials.
    pub fn convergence_residual(&self, k: usize) -> Result<Vec<f64>> {
        convergence_residual(self, k)
    }

    /// `(hbar^2 / 4) sum W` restricted to one winding vector.
    pub fn winding_series(&self, m: &WindingVector) -> Vec<f64> {
        let mut acc = vec![Kahan::default(); self.t.len()];
        for r in self.contributions.iter().filter(|r| &r.contribution.torus.winding == m) {
            acc[r.t_index].add(r.weight);
        }
        let scale = 0.25 * self.hbar * self.hbar;
        acc.iter().map(|k| scale * k.sum()).collect()
    }

    /// Winding with the largest `sum_t |W|`.
    pub fn dominant_winding(&self) -> Option<WindingVector> {
        let mut totals: Vec<(WindingVector, f64)> = Vec::new();
        for r in &self.contributions {
            let m = &r.contribution.torus.winding;
            match totals.iter_mut().find(|(w, _)| w == m) {
                Some((_, s)) => *s += r.weight.abs(),
                None => totals.push((m.clone(), r.weight.abs())),
            }
        }
        totals
            .into_iter()
            .fold(None, |best: Option<(WindingVector, f64)>, (m, s)| match best {
                Some((_, b)) if b >= s => best,
                _ => Some((m, s)),
            })
            .map(|(m, _)| m)
    }
}

pub fn convergence_residual(series: &TraceSeries, k: usize) -> Result<Vec<f64>> {
    if k < 1 || k > series.m_max {
        return Err(OtocError::DepthOutOfRange {
            depth: k,
            m_max: series.m_max,
        });
    }
    Ok(series.partials[k]
        .iter()
        .zip(&series.partials[k - 1])
        .map(|(a, b)| (a - b).abs())
        .collect())
}

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum
    }
}

/// `(hbar^2 / 4) sum_i w_i`, in compensated arithmetic.
fn scaled_sum(weights: &[LogWeight], hbar: f64, log_space: bool) -> f64 {
    let scale = 0.25 * hbar * hbar;
    if !log_space {
        let mut k = Kahan::default();
        for w in weights {
            k.add(w.value());
        }
        return scale * k.sum();
    }
    let peak = weights
        .iter()
        .filter(|w| w.sign != 0.0)
        .map(|w| w.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut k = Kahan::default();
    for w in weights.iter().filter(|w| w.sign != 0.0) {
        k.add(w.sign * (w.ln_abs - peak).exp());
    }
    let s = k.sum();
    if s == 0.0 {
        return 0.0;
    }
    s.signum() * (scale.ln() + peak + s.abs().ln()).exp()
}

type SolvedItem = (Vec<OrbitContribution>, Vec<SkipRecord>);

fn solve_item(
    poly: &ActionPolynomial,
    m: &WindingVector,
    t: Option<f64>,
    cfg: &TraceConfig,
    solver: &SolverConfig,
) -> SolvedItem {
    let roots: Result<Vec<ResonantTorus>> = match t {
        Some(t) => solve_resonance_fixed_time(poly, m, t, solver),
        None => solve_resonance_fixed_energy(poly, m, cfg.energy, solver),
    };
    let mut skips = Vec::new();
    let mut out = Vec::new();
    match roots {
        Ok(tori) => {
            for torus in &tori {
                match orbit_contribution(poly, torus, cfg.hbar) {
                    Ok(c) => out.push(c),
                    Err(reason) => skips.push(SkipRecord {
                        t,
                        winding: m.clone(),
                        reason,
                    }),
                }
            }
        }
        Err(reason) => skips.push(SkipRecord {
            t,
            winding: m.clone(),
            reason,
        }),
    }
    (out, skips)
}

/// Enumerates, solves and sums every orbit up to depth `cfg.m_max` at each
/// observation time.
///
/// Per-orbit failures are recorded in `skips` and never abort the sweep.
pub fn assemble_trace(poly: &ActionPolynomial, cfg: &TraceConfig, solver: &SolverConfig) -> Result<TraceSeries> {
    cfg.validate(poly)?;
    solver.validate()?;
    let f = poly.bath_modes();
    let windings = enumerate_windings(f, cfg.m_max);
    let nt = cfg.t_grid.len();

    // per time index: (winding index, contribution, weight) in enumeration order
    let mut per_t: Vec<Vec<(usize, OrbitContribution, LogWeight)>> = vec![Vec::new(); nt];
    let mut skips = Vec::new();

    match cfg.mode {
        TraceMode::Resonant => {
            let items: Vec<(usize, usize)> = (0..nt)
                .flat_map(|ti| (0..windings.len()).map(move |wi| (ti, wi)))
                .collect();
            let solved: Vec<SolvedItem> = items
                .par_iter()
                .map(|&(ti, wi)| solve_item(poly, &windings[wi], Some(cfg.t_grid[ti]), cfg, solver))
                .collect();
            for (&(ti, wi), (contribs, sk)) in items.iter().zip(solved) {
                skips.extend(sk);
                for c in contribs {
                    match resonant_ln(&c, cfg.t_grid[ti], cfg.hbar) {
                        Ok(w) => per_t[ti].push((wi, c, w)),
                        Err(reason) => skips.push(SkipRecord {
                            t: Some(cfg.t_grid[ti]),
                            winding: windings[wi].clone(),
                            reason,
                        }),
                    }
                }
            }
        }
        TraceMode::General => {
            let solved: Vec<SolvedItem> = windings
                .par_iter()
                .map(|m| solve_item(poly, m, None, cfg, solver))
                .collect();
            for (wi, (contribs, sk)) in solved.into_iter().enumerate() {
                skips.extend(sk);
                for c in contribs {
                    for (ti, &t) in cfg.t_grid.iter().enumerate() {
                        match general_ln(&c, t, cfg.hbar, cfg.butterfly) {
                            Ok(w) => per_t[ti].push((wi, c.clone(), w)),
                            Err(reason) => skips.push(SkipRecord {
                                t: Some(t),
                                winding: windings[wi].clone(),
                                reason,
                            }),
                        }
                    }
                }
            }
            // restore (winding, root) order within each time slice
            for slice in &mut per_t {
                slice.sort_by_key(|(wi, _, _)| *wi);
            }
        }
    }

    for s in &skips {
        log::debug!(
            "skipped {} at t={:?}: {}",
            s.winding,
            s.t,
            s.reason
        );
    }

    let depth: Vec<usize> = windings.iter().map(WindingVector::depth).collect();
    let mut partials = vec![vec![0.0; nt]; cfg.m_max + 1];
    let mut empty_times = Vec::new();
    let mut contributions = Vec::new();
    let mut orbit_count = 0;
    for (ti, slice) in per_t.into_iter().enumerate() {
        let t = cfg.t_grid[ti];
        if slice.is_empty() {
            log::debug!("empty orbit sum at t = {t}");
            empty_times.push(t);
        }
        for k in 1..=cfg.m_max {
            let ws: Vec<LogWeight> = slice
                .iter()
                .filter(|(wi, _, _)| depth[*wi] <= k)
                .map(|(_, _, w)| *w)
                .collect();
            partials[k][ti] = scaled_sum(&ws, cfg.hbar, cfg.log_space);
        }
        orbit_count += slice.len();
        for (_, c, w) in slice {
            contributions.push(OrbitRecord {
                t_index: ti,
                t,
                weight: w.value(),
                log_weight: w,
                contribution: c,
            });
        }
    }
    if !empty_times.is_empty() {
        log::warn!(
            "empty orbit sum at {} of {} observation times (first t = {})",
            empty_times.len(),
            nt,
            empty_times[0]
        );
    }
    let residuals: Vec<Vec<f64>> = (1..=cfg.m_max)
        .map(|k| {
            partials[k]
                .iter()
                .zip(&partials[k - 1])
                .map(|(a, b)| (a - b).abs())
                .collect()
        })
        .collect();

    Ok(TraceSeries {
        t: cfg.t_grid.clone(),
        c_e: partials[cfg.m_max].clone(),
        partials,
        residuals,
        orbit_count,
        contributions,
        skips,
        empty_times,
        hbar: cfg.hbar,
        m_max: cfg.m_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Regression of `ln|C|` on every window point.
    Direct,
    /// Regression through the local maxima of `|C|`.
    Envelope,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::Direct => "direct",
            FitMethod::Envelope => "envelope",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Points that entered the regression.
    pub points: usize,
    pub method: FitMethod,
}

pub const MIN_FIT_POINTS: usize = 8;

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Envelope regression regardless of sign changes.
pub fn fit_growth_envelope(t: &[f64], c: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    let (x, y) = window_points(t, c, window)?;
    let mut ex = Vec::new();
    let mut ey = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, d) = (y[i - 1].abs(), y[i].abs(), y[i + 1].abs());
        if b > 0.0 && b >= a && b >= d && (b > a || b > d) {
            ex.push(x[i]);
            ey.push(b.ln());
        }
    }
    if ex.len() < 3 {
        return Err(OtocError::InsufficientData(format!(
            "{} local maxima in window, need 3",
            ex.len()
        )));
    }
    let (slope, intercept) = least_squares(&ex, &ey);
    Ok(GrowthFit {
        slope,
        intercept,
        window,
        points: ex.len(),
        method: FitMethod::Envelope,
    })
}

fn window_points(t: &[f64], c: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.len() != c.len() {
        return Err(OtocError::DimensionMismatch {
            expected: t.len(),
            found: c.len(),
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(c)
        .filter(|(ti, _)| **ti >= window.0 && **ti <= window.1)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if x.len() < MIN_FIT_POINTS {
        return Err(OtocError::InsufficientData(format!(
            "{} grid points in [{}, {}], need {MIN_FIT_POINTS}",
            x.len(),
            window.0,
            window.1
        )));
    }
    Ok((x, y))
}

/// Direct least-squares slope of `ln|C|`; only errors with `ZeroCrossing`
/// if the series vanishes or changes sign in the window.
pub fn fit_growth_direct(t: &[f64], c: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    let (x, y) = window_points(t, c, window)?;
    let s0 = y[0].signum();
    if y.iter().any(|v| *v == 0.0 || !v.is_finite() || v.signum() != s0) {
        return Err(OtocError::ZeroCrossing);
    }
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let (slope, intercept) = least_squares(&x, &ly);
    Ok(GrowthFit {
        slope,
        intercept,
        window,
        points: x.len(),
        method: FitMethod::Direct,
    })
}

/// Slope of `ln|C_E|` over `window`, falling back to the envelope of local
/// maxima when the series crosses zero.
pub fn fit_growth_exponent(t: &[f64], c: &[f64], window: (f64, f64)) -> Result<GrowthFit> {
    match fit_growth_direct(t, c, window) {
        Err(OtocError::ZeroCrossing) => fit_growth_envelope(t, c, window),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::eckart_morse_synthetic;
    use nalgebra::{DMatrix, DVector};

    const LAM: f64 = 0.7350;

    fn contribution(action: f64, maslov: i64, tau: f64, mode: SolveMode) -> OrbitContribution {
        OrbitContribution {
            torus: ResonantTorus {
                winding: WindingVector::new([1, 0]),
                j: DVector::from_column_slice(&[0.5, 0.5]),
                tau,
                lambda: LAM,
                omega: DVector::from_column_slice(&[1.0, 1.0]),
                jacobian: DMatrix::identity(2, 2),
                iterations: 1,
                residual_norm: 0.0,
                mode,
                clamped: false,
            },
            action,
            maslov,
            amplitude: 0.3,
            stability_factor: 0.0,
            phase: 0.0,
            signature: 0,
            gaussian_phase: 0.0,
            hbar: 0.05,
        }
    }

    #[test]
    fn pure_maslov_phase() {
        let c = contribution(0.0, 2, 3.0, SolveMode::FixedTime);
        let w = orbit_weight_resonant(&c, 3.0, 0.05).unwrap();
        let expect = -0.3 * (1.5 * LAM * 3.0f64).exp();
        assert!((w - expect).abs() < 1e-14 * expect.abs());
    }

    #[test]
    fn mode_checks() {
        let c = contribution(0.0, 2, 3.0, SolveMode::FixedTime);
        assert!(matches!(orbit_weight_resonant(&c, 3.5, 0.05), Err(OtocError::ModeMismatch(_))));
        assert!(matches!(
            orbit_weight_general(&c, 3.0, 0.05, ButterflyMode::Asymptotic),
            Err(OtocError::ModeMismatch(_))
        ));
        let g = contribution(0.0, 2, 3.0, SolveMode::FixedEnergy { energy: -0.5 });
        assert!(matches!(orbit_weight_resonant(&g, 3.0, 0.05), Err(OtocError::ModeMismatch(_))));
    }

    #[test]
    fn general_weight_at_zero_time_and_maslov_shift() {
        let tau = 4.0;
        let g = contribution(0.0, 0, tau, SolveMode::FixedEnergy { energy: -0.5 });
        let w = orbit_weight_general(&g, 0.0, 0.05, ButterflyMode::Asymptotic).unwrap();
        let expect = 0.3 / (2.0 * (0.5 * LAM * tau).sinh());
        assert!((w - expect).abs() < 1e-14 * expect);
        let shifted = contribution(0.0, 2, tau, SolveMode::FixedEnergy { energy: -0.5 });
        let ws = orbit_weight_general(&shifted, 0.0, 0.05, ButterflyMode::Asymptotic).unwrap();
        assert!((w + ws).abs() < 1e-14 * expect);
    }

    #[test]
    fn general_matches_resonant_at_long_periods() {
        for tau in [8.0 / LAM, 10.0 / LAM, 14.0 / LAM] {
            let g = contribution(0.37, 4, tau, SolveMode::FixedEnergy { energy: -0.5 });
            let r = contribution(0.37, 4, tau, SolveMode::FixedTime);
            let wg = orbit_weight_general(&g, tau, 0.05, ButterflyMode::Asymptotic).unwrap();
            let wr = orbit_weight_resonant(&r, tau, 0.05).unwrap();
            assert!((wg / wr - 1.0).abs() < 2e-3);
        }
    }

    #[test]
    fn slope_of_pure_exponential() {
        let t = linspace(2.0, 6.0, 81);
        let c: Vec<f64> = t.iter().map(|t| 0.01 * (1.5 * LAM * t).exp()).collect();
        let fit = fit_growth_exponent(&t, &c, (2.0, 6.0)).unwrap();
        assert_eq!(fit.method, FitMethod::Direct);
        assert!((fit.slope - 1.1025).abs() < 1e-6);
        let flat = vec![3.0; t.len()];
        assert!(fit_growth_exponent(&t, &flat, (2.0, 6.0)).unwrap().slope.abs() < 1e-12);
        assert!(matches!(
            fit_growth_exponent(&t[..5], &c[..5], (2.0, 6.0)),
            Err(OtocError::InsufficientData(_))
        ));
    }

    #[test]
    fn beat_pattern_envelope() {
        let t = linspace(2.0, 6.0, 801);
        // two orbits with fixed, different actions: no sign change, exact slope
        let c: Vec<f64> = t
            .iter()
            .map(|t| (1.5 * LAM * t).exp() * (0.3 * (1.0f64).cos() + 0.2 * (2.5f64).cos()))
            .collect();
        let fit = fit_growth_exponent(&t, &c, (2.0, 6.0)).unwrap();
        assert!((fit.slope / (1.5 * LAM) - 1.0).abs() < 1e-12);
        // phases drifting at different rates; eight beats in the window
        let beat = 4.0 * std::f64::consts::PI;
        let c: Vec<f64> = t
            .iter()
            .map(|t| (1.5 * LAM * t).exp() * ((40.0 * t).cos() + 0.2 * ((40.0 + beat) * t + 1.0).cos()))
            .collect();
        let fit = fit_growth_exponent(&t, &c, (2.0, 6.0)).unwrap();
        assert_eq!(fit.method, FitMethod::Envelope);
        assert!((fit.slope / (1.5 * LAM) - 1.0).abs() < 0.02, "{}", fit.slope);
    }

    #[test]
    fn zero_depth_is_empty() {
        let poly = eckart_morse_synthetic();
        let cfg = TraceConfig {
            m_max: 0,
            t_grid: linspace(2.0, 3.0, 5),
            ..TraceConfig::default()
        };
        let s = assemble_trace(&poly, &cfg, &SolverConfig::default()).unwrap();
        assert!(s.c_e.iter().all(|&c| c == 0.0));
        assert!(s.is_empty_everywhere());
        assert!(matches!(s.convergence_residual(1), Err(OtocError::DepthOutOfRange { .. })));
    }

    #[test]
    fn audit_reconstructs_sum() {
        let poly = eckart_morse_synthetic();
        let cfg = TraceConfig {
            m_max: 3,
            t_grid: linspace(2.0, 4.0, 9),
            ..TraceConfig::default()
        };
        let s = assemble_trace(&poly, &cfg, &SolverConfig::default()).unwrap();
        assert!(s.orbit_count > 0);
        for (i, c) in s.c_e.iter().enumerate() {
            let sum: f64 = s.contributions.iter().filter(|r| r.t_index == i).map(|r| r.weight).sum();
            let rebuilt = 0.25 * cfg.hbar * cfg.hbar * sum;
            assert!((rebuilt - c).abs() <= 1e-10 * c.abs().max(1e-30));
        }
        for k in 1..=3 {
            assert_eq!(s.convergence_residual(k).unwrap(), s.residuals[k - 1]);
        }
        let log = assemble_trace(&poly, &TraceConfig { log_space: true, ..cfg.clone() }, &SolverConfig::default()).unwrap();
        for (a, b) in log.c_e.iter().zip(&s.c_e) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-30));
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let poly = eckart_morse_synthetic();
        let cfg = TraceConfig {
            t_grid: vec![2.0, 2.0],
            ..TraceConfig::default()
        };
        assert!(assemble_trace(&poly, &cfg, &SolverConfig::default()).is_err());
        let cfg = TraceConfig {
            mode: TraceMode::General,
            energy: -2.0,
            ..TraceConfig::default()
        };
        assert!(matches!(
            assemble_trace(&poly, &cfg, &SolverConfig::default()),
            Err(OtocError::BelowSaddle { .. })
        ));
    }
}
