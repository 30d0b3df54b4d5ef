//! The oracle table printed by `nhim-otoc check`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    cofactor_determinant, ehrenfest_time, finite_difference_check, integrate_flow_and_variations,
    quantum_otoc_inverted_oscillator, reaction_trace_determinant_extended, PhaseState, QuantumGridConfig,
};
use crate::amplitude::bordered_hessian;
use crate::error::Result;
use crate::normal_form::{
    eckart_morse_synthetic, ActionPoint, ActionPolynomial, ComplexMonomialTable, MonomialRecord,
    DEFAULT_CONVERSION_TOL,
};
use crate::otoc_trace::{fit_growth_direct, linspace};
use crate::reaction_trace::{reaction_trace_analytic, reaction_trace_quadrature, ReactionTraceConfig};
use crate::resonance::{solve_resonance_fixed_time, ResonantTorus, SolveMode, SolverConfig, WindingVector};
use crate::stability::{bath_monodromy, reaction_monodromy, symplectic_defect, symplectic_form};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<44} {:>12.3e} {:>10.1e}  {}",
            self.name,
            self.measured,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

fn row(name: &'static str, measured: f64, tolerance: f64) -> CheckRow {
    CheckRow {
        name,
        measured,
        tolerance,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial of degree <= 3 in `(I, J_1, J_2)` with O(1) linear part.
pub fn random_cubic(r: &mut impl Rng) -> ActionPolynomial {
    let mut p = ActionPolynomial::linear(r.gen_range(-1.0..0.0), r.gen_range(0.5..1.0), &[r.gen_range(1.0..2.0), r.gen_range(1.0..2.0)]);
    for a in 0..=3u32 {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                if a + b + c >= 2 {
                    p.add_term(&[a, b, c], r.gen_range(-0.1..0.1)).expect("3 exponents");
                }
            }
        }
    }
    p
}

fn conversion() -> Result<f64> {
    let table = ComplexMonomialTable::new(
        4,
        vec![
            MonomialRecord::new([1, 1, 0, 0], [1, 1, 0, 0], num_complex::Complex64::new(0.0, -0.012334)),
            MonomialRecord::new([0, 0, 1, 0], [0, 0, 1, 0], num_complex::Complex64::new(0.0, 1.267290)),
            MonomialRecord::new([2, 0, 0, 0], [2, 0, 0, 0], num_complex::Complex64::new(0.118039, 0.0)),
        ],
    )?;
    let p = table.to_action_polynomial(DEFAULT_CONVERSION_TOL)?;
    let b2 = p.coefficient(&[1, 1, 0, 0]);
    let w3 = p.coefficient(&[0, 0, 1, 0]);
    let a = 2.0 * p.coefficient(&[2, 0, 0, 0]);
    Ok([(b2, -0.0123), (w3, 1.2673), (a, 0.2361)]
        .iter()
        .map(|(v, t)| (v - t).abs())
        .fold(0.0, f64::max))
}

/// Largest relative finite-difference error over 100 points in `[0, 2]^3`,
/// half on the synthetic Eckart-Morse polynomial and half on random cubics.
pub fn gradient_sweep(seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let em = eckart_morse_synthetic();
    let mut worst = 0.0f64;
    for n in 0..100 {
        let pt = ActionPoint::new(r.gen_range(0.0..2.0), [r.gen_range(0.0..2.0), r.gen_range(0.0..2.0)]);
        let poly = if n % 2 == 0 { em.clone() } else { random_cubic(&mut r) };
        worst = worst.max(finite_difference_check(&poly, &pt, 1e-5)?.max());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromySweep {
    pub block_error: f64,
    pub cross: f64,
    pub symplectic: f64,
}

/// Integrated against analytic monodromy at `points` random NHIM points of
/// the synthetic Eckart-Morse polynomial, at `t = 3` and `t = 6`.
pub fn monodromy_sweep(seed: u64, points: usize) -> Result<MonodromySweep> {
    let poly = eckart_morse_synthetic();
    let f = poly.bath_modes();
    let w = symplectic_form(f);
    let mut r = rng(seed);
    let mut out = MonodromySweep {
        block_error: 0.0,
        cross: 0.0,
        symplectic: 0.0,
    };
    for _ in 0..points {
        let j: Vec<f64> = (0..f).map(|_| r.gen_range(0.0..2.0)).collect();
        let theta: Vec<f64> = (0..f).map(|_| r.gen_range(0.0..std::f64::consts::TAU)).collect();
        let z0 = PhaseState::new(0.0, 0.0, theta, j.clone());
        let pt = ActionPoint::new(0.0, j);
        for t in [3.0, 6.0] {
            let flow = integrate_flow_and_variations(&poly, &z0, t, 0.01)?;
            let m = &flow.monodromy;
            let reac = reaction_monodromy(poly.lyapunov_exponent(&pt)?, t)?;
            let bath = bath_monodromy(&poly.frequency_jacobian(&pt)?, t)?;
            let mut analytic = DMatrix::zeros(2 + 2 * f, 2 + 2 * f);
            analytic.view_mut((0, 0), (2, 2)).copy_from(&reac.0);
            analytic.view_mut((2, 2), (2 * f, 2 * f)).copy_from(&bath.0);
            out.block_error = out.block_error.max((m - &analytic).amax());
            out.cross = out
                .cross
                .max(m.view((0, 2), (2, 2 * f)).amax())
                .max(m.view((2, 0), (2 * f, 2)).amax());
            out.symplectic = out.symplectic.max(symplectic_defect(m, &w));
        }
    }
    Ok(out)
}

/// Max relative error of the extended-precision `|det(M_reac - 1)|` against
/// `4 sinh^2(x / 2)` on `x = 0.1, 0.2, .., 20`.
pub fn trace_determinant_sweep() -> f64 {
    (1..=200)
        .map(|i| {
            let x = 0.1 * i as f64;
            let identity = 4.0 * (0.5 * x).sinh().powi(2);
            (reaction_trace_determinant_extended(x) / identity - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Random torus with symmetric, well-conditioned `dOmega/dJ`.
pub fn random_torus(r: &mut impl Rng, f: usize) -> ResonantTorus {
    let c = loop {
        let a = DMatrix::from_fn(f, f, |_, _| r.gen_range(-1.0..1.0));
        let c: DMatrix<f64> = (&a + a.transpose()) * 0.5;
        if c.clone().symmetric_eigenvalues().iter().all(|e| e.abs() > 0.05) {
            break c;
        }
    };
    let omega = DVector::from_fn(f, |_, _| r.gen_range(-2.0..2.0));
    ResonantTorus {
        winding: WindingVector::new(vec![1; f]),
        j: DVector::from_element(f, 1.0),
        tau: r.gen_range(0.5..6.0),
        lambda: 0.735,
        omega,
        jacobian: c,
        iterations: 0,
        residual_norm: 0.0,
        mode: SolveMode::FixedTime,
        clamped: false,
    }
}

/// Max relative disagreement among the LU, Schur and cofactor determinants
/// of the bordered Hessian over `n` random inputs per `f in {1, 2, 3}`.
pub fn schur_sweep(seed: u64, n: usize) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for f in 1..=3 {
        let mut done = 0;
        while done < n {
            let torus = random_torus(&mut r, f);
            let Ok(h) = bordered_hessian(&torus) else { continue };
            let cof = cofactor_determinant(&h.matrix).abs();
            let d = h.det_direct.abs();
            let s = h.det_schur.abs();
            worst = worst.max((d - s).abs() / d).max((cof - s).abs() / cof);
            done += 1;
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTraceSweep {
    /// `max_tau | |Tr| / (1 / (2 sinh)) - 1 |` over `tau in [4, 6]`.
    pub magnitude: f64,
    /// Relative change of `d ln|Tr| / d tau` between the two cutoffs.
    pub slope_sensitivity: f64,
}

pub fn reaction_trace_sweep(cfg: &ReactionTraceConfig, lambda: f64) -> Result<ReactionTraceSweep> {
    let taus = linspace(4.0, 6.0, 21);
    let mut magnitude = 0.0f64;
    let mut ln_small = Vec::new();
    let mut ln_large = Vec::new();
    let wide = ReactionTraceConfig {
        q_max: 2.0 * cfg.q_max,
        quadrature_points: 2 * cfg.quadrature_points - 1,
        ..cfg.clone()
    };
    for &tau in &taus {
        let tr = reaction_trace_quadrature(lambda, tau, cfg)?.norm();
        magnitude = magnitude.max((tr / reaction_trace_analytic(lambda, tau)? - 1.0).abs());
        ln_small.push(tr);
        ln_large.push(reaction_trace_quadrature(lambda, tau, &wide)?.norm());
    }
    let s1 = fit_growth_direct(&taus, &ln_small, (4.0, 6.0))?.slope;
    let s2 = fit_growth_direct(&taus, &ln_large, (4.0, 6.0))?.slope;
    Ok(ReactionTraceSweep {
        magnitude,
        slope_sensitivity: (s1 / s2 - 1.0).abs(),
    })
}

/// Linear `Omega(J) = omega + C J`: solver root against `C^{-1}(2 pi m / t - omega)`.
pub fn linear_solver_error() -> Result<f64> {
    let poly = ActionPolynomial::linear(-1.0, 0.7, &[1.5, 1.1])
        .with_term(&[0, 2, 0], 0.05)?
        .with_term(&[0, 1, 1], 0.01)?
        .with_term(&[0, 0, 2], 0.04)?;
    let c = poly.frequency_jacobian(&ActionPoint::origin(2))?;
    let mut worst = 0.0f64;
    for (m, t) in [([1i64, 1i64], 3.5), ([2, 1], 4.0), ([1, 2], 5.5)] {
        let m = WindingVector::new(m);
        let target = m.as_vector() * (std::f64::consts::TAU / t) - DVector::from_column_slice(&[1.5, 1.1]);
        // Cramer's rule, independent of the solver's factorization
        let det = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
        let exact = DVector::from_column_slice(&[
            (target[0] * c[(1, 1)] - c[(0, 1)] * target[1]) / det,
            (c[(0, 0)] * target[1] - target[0] * c[(1, 0)]) / det,
        ]);
        let roots = solve_resonance_fixed_time(&poly, &m, t, &SolverConfig::default())?;
        for root in roots {
            worst = worst.max((&root.j - &exact).amax());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCheck {
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    pub window: (f64, f64),
    pub slope: f64,
    pub c0_error: f64,
    pub norm_defect: f64,
}

/// Grid OTOC of the inverted oscillator sampled on `[0] + [1/lambda, 0.8 t_E]`.
pub fn quantum_check(lambda: f64, hbar: f64, l: f64, samples: usize) -> Result<QuantumCheck> {
    let t_e = ehrenfest_time(lambda, l, hbar);
    let window = (1.0 / lambda, 0.8 * t_e);
    let mut t = vec![0.0];
    t.extend(linspace(window.0, window.1, samples));
    let cfg = QuantumGridConfig::auto(lambda, hbar, l, t);
    let q = quantum_otoc_inverted_oscillator(&cfg)?;
    let slope = fit_growth_direct(&q.t[1..], &q.c[1..], window)?.slope;
    Ok(QuantumCheck {
        c0_error: (q.c[0] - hbar * hbar).abs() / (hbar * hbar),
        t: q.t,
        c: q.c,
        window,
        slope,
        norm_defect: q.norm_defect,
    })
}

/// Runs every oracle; `quick` skips the quantum grid.
pub fn run_suite(quick: bool) -> Result<Vec<CheckRow>> {
    let mut rows = vec![row("conversion dictionary (4 decimals)", conversion()?, 5e-5)];
    rows.push(row("gradients vs central differences", gradient_sweep(7)?, 1e-6));
    let mono = monodromy_sweep(11, 20)?;
    rows.push(row("monodromy blocks vs RK4 variational flow", mono.block_error, 1e-6));
    rows.push(row("monodromy cross-block entries", mono.cross, 1e-8));
    rows.push(row("monodromy symplectic defect", mono.symplectic, 1e-8));
    rows.push(row("|det(M_reac - 1)| vs 4 sinh^2", trace_determinant_sweep(), 1e-10));
    rows.push(row("bordered Hessian Schur vs direct", schur_sweep(13, 1000)?, 1e-10));
    let tr = reaction_trace_sweep(&ReactionTraceConfig::default(), 0.7350)?;
    rows.push(row("reaction trace magnitude, tau in [4, 6]", tr.magnitude, 0.05));
    rows.push(row("reaction trace cutoff slope sensitivity", tr.slope_sensitivity, 0.02));
    rows.push(row("resonance solver vs linear closed form", linear_solver_error()?, 1e-10));
    if !quick {
        let q = quantum_check(0.7350, 0.05, 20.0, 16)?;
        rows.push(row("quantum OTOC slope / (2 lambda) - 1", (q.slope / (2.0 * 0.7350) - 1.0).abs(), 0.15));
        rows.push(row("quantum OTOC C(0) / hbar^2 - 1", q.c0_error, 1e-8));
        rows.push(row("quantum norm conservation", q.norm_defect, 1e-10));
    }
    Ok(rows)
}
