//! Grid OTOC of the 1D inverted oscillator `H = p^2/2 - lambda^2 q^2/2`.
//!
//! `C(t) = || [q(t), p] psi ||^2` with `q(t) = U^dagger q U`, evaluated by
//! Strang split-step propagation on a periodic FFT grid. The initial state is
//! the Gaussian `psi ~ exp(-lambda q^2 / (2 hbar))` centred on the saddle.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{OtocError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGridConfig {
    /// System length entering `t_E = ln(L / hbar) / lambda`.
    pub l: f64,
    /// Half-width of the periodic position box.
    pub box_half_length: f64,
    /// Grid size; a power of two, at least 256.
    pub n_points: usize,
    pub lambda: f64,
    pub hbar: f64,
    /// Increasing sample times, `t >= 0`, below `t_E`.
    pub t_grid: Vec<f64>,
    /// Largest propagation step.
    pub dt: f64,
    /// Probability allowed near the box edges (in position or momentum).
    pub leak_tol: f64,
}

impl QuantumGridConfig {
    /// Grid that keeps the spreading packet inside the box, in position and
    /// momentum, up to the last sample time.
    pub fn auto(lambda: f64, hbar: f64, l: f64, t_grid: Vec<f64>) -> Self {
        let t_max = t_grid.last().copied().unwrap_or(0.0);
        let spread = (2.0 * lambda * t_max).cosh().sqrt();
        let sigma_q = (hbar / (2.0 * lambda)).sqrt() * spread;
        let sigma_p = (hbar * lambda / 2.0).sqrt() * spread;
        let box_half_length = 7.0 * sigma_q;
        let k_max = 7.0 * sigma_p / hbar;
        let needed = (2.0 * box_half_length * k_max / PI).ceil() as usize;
        QuantumGridConfig {
            l,
            box_half_length,
            n_points: needed.next_power_of_two().max(256),
            lambda,
            hbar,
            t_grid,
            dt: 0.04,
            leak_tol: 1e-6,
        }
    }

    pub fn ehrenfest_time(&self) -> f64 {
        ehrenfest_time(self.lambda, self.l, self.hbar)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OtocError::InvalidConfig(m));
        if !(self.lambda > 0.0 && self.hbar > 0.0 && self.l > self.hbar) {
            return bad(format!(
                "need lambda > 0, hbar > 0, L > hbar; got lambda={}, hbar={}, L={}",
                self.lambda, self.hbar, self.l
            ));
        }
        if !self.n_points.is_power_of_two() || self.n_points < 256 {
            return bad(format!("n_points must be a power of two >= 256, got {}", self.n_points));
        }
        if !(self.box_half_length > 0.0 && self.dt > 0.0) {
            return bad("box_half_length and dt must be positive".into());
        }
        if self.t_grid.iter().any(|t| !(*t >= 0.0)) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t_grid must be non-negative and strictly increasing".into());
        }
        if let Some(&t) = self.t_grid.last() {
            if t >= self.ehrenfest_time() {
                return bad(format!("t = {t} is not below t_E = {}", self.ehrenfest_time()));
            }
        }
        Ok(())
    }
}

/// `ln(L / hbar) / lambda`.
pub fn ehrenfest_time(lambda: f64, l: f64, hbar: f64) -> f64 {
    (l / hbar).ln() / lambda
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOtoc {
    pub t: Vec<f64>,
    pub c: Vec<f64>,
    /// `max_t | ||U psi||^2 - 1 |`.
    pub norm_defect: f64,
    /// Largest probability found near the position or momentum edges.
    pub edge_leak: f64,
}

struct Grid {
    n: usize,
    dx: f64,
    q: Vec<f64>,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    hbar: f64,
    lambda: f64,
}

impl Grid {
    fn new(cfg: &QuantumGridConfig) -> Self {
        let n = cfg.n_points;
        let dx = 2.0 * cfg.box_half_length / n as f64;
        let q = (0..n).map(|i| -cfg.box_half_length + dx * i as f64).collect();
        let dk = 2.0 * PI / (n as f64 * dx);
        let k = (0..n)
            .map(|i| if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * dk)
            .collect();
        let mut planner = FftPlanner::new();
        Grid {
            n,
            dx,
            q,
            k,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            hbar: cfg.hbar,
            lambda: cfg.lambda,
        }
    }

    fn norm2(&self, psi: &[Complex64]) -> f64 {
        psi.iter().map(Complex64::norm_sqr).sum::<f64>() * self.dx
    }

    fn apply_q(&self, psi: &mut [Complex64]) {
        for (v, q) in psi.iter_mut().zip(&self.q) {
            *v *= q;
        }
    }

    /// `p = -i hbar d/dq`, spectrally.
    fn apply_p(&self, psi: &mut [Complex64]) {
        self.fwd.process(psi);
        let s = self.hbar / self.n as f64;
        for (v, k) in psi.iter_mut().zip(&self.k) {
            *v *= k * s;
        }
        self.inv.process(psi);
    }

    /// Evolves by `t` (negative for `U^dagger`) in steps no longer than `dt`.
    fn propagate(&self, psi: &mut [Complex64], t: f64, dt: f64) {
        if t == 0.0 {
            return;
        }
        let steps = (t.abs() / dt).ceil() as usize;
        let h = t / steps as f64;
        // exp(-i V h / (2 hbar)), V = -lambda^2 q^2 / 2
        let half_v: Vec<Complex64> = self
            .q
            .iter()
            .map(|q| Complex64::from_polar(1.0, 0.25 * self.lambda * self.lambda * q * q * h / self.hbar))
            .collect();
        // exp(-i hbar k^2 h / 2) with the 1/n of the inverse transform folded in
        let kin: Vec<Complex64> = self
            .k
            .iter()
            .map(|k| Complex64::from_polar(1.0 / self.n as f64, -0.5 * self.hbar * k * k * h))
            .collect();
        for _ in 0..steps {
            for (v, w) in psi.iter_mut().zip(&half_v) {
                *v *= w;
            }
            self.fwd.process(psi);
            for (v, w) in psi.iter_mut().zip(&kin) {
                *v *= w;
            }
            self.inv.process(psi);
            for (v, w) in psi.iter_mut().zip(&half_v) {
                *v *= w;
            }
        }
    }

    /// Probability in the outer tenth of the box, in position and momentum.
    fn edge_probability(&self, psi: &[Complex64]) -> f64 {
        let total = self.norm2(psi);
        let q_edge = 0.9 * self.q[self.n - 1].abs();
        let pos: f64 = psi
            .iter()
            .zip(&self.q)
            .filter(|(_, q)| q.abs() > q_edge)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            * self.dx;
        let mut spec = psi.to_vec();
        self.fwd.process(&mut spec);
        let k_edge = 0.9 * self.k[self.n / 2].abs();
        let s_total: f64 = spec.iter().map(Complex64::norm_sqr).sum();
        let mom: f64 = spec
            .iter()
            .zip(&self.k)
            .filter(|(_, k)| k.abs() > k_edge)
            .map(|(v, _)| v.norm_sqr())
            .sum();
        (pos / total).max(mom / s_total)
    }
}

/// Samples `C(t)` on `cfg.t_grid`.
pub fn quantum_otoc_inverted_oscillator(cfg: &QuantumGridConfig) -> Result<QuantumOtoc> {
    cfg.validate()?;
    let grid = Grid::new(cfg);

    let width = cfg.lambda / (2.0 * cfg.hbar);
    let mut psi: Vec<Complex64> = grid
        .q
        .iter()
        .map(|q| Complex64::new((-width * q * q).exp(), 0.0))
        .collect();
    let norm = grid.norm2(&psi).sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    let mut p_psi = psi.clone();
    grid.apply_p(&mut p_psi);

    // forward states advanced incrementally along the grid
    let mut u_psi = psi.clone();
    let mut u_p_psi = p_psi;
    let mut t_prev = 0.0;
    let mut c = Vec::with_capacity(cfg.t_grid.len());
    let mut norm_defect = 0.0f64;
    let mut edge_leak = 0.0f64;
    for &t in &cfg.t_grid {
        grid.propagate(&mut u_psi, t - t_prev, cfg.dt);
        grid.propagate(&mut u_p_psi, t - t_prev, cfg.dt);
        t_prev = t;
        norm_defect = norm_defect.max((grid.norm2(&u_psi) - 1.0).abs());
        let leak = grid.edge_probability(&u_psi);
        edge_leak = edge_leak.max(leak);
        if leak > cfg.leak_tol {
            return Err(OtocError::GridTooSmall(format!(
                "probability {leak:e} near the box edge at t = {t}"
            )));
        }

        // U^dagger q U p psi
        let mut first = u_p_psi.clone();
        grid.apply_q(&mut first);
        grid.propagate(&mut first, -t, cfg.dt);
        // p U^dagger q U psi
        let mut second = u_psi.clone();
        grid.apply_q(&mut second);
        grid.propagate(&mut second, -t, cfg.dt);
        grid.apply_p(&mut second);

        let diff: f64 = first
            .iter()
            .zip(&second)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * grid.dx;
        c.push(diff);
    }
    Ok(QuantumOtoc {
        t: cfg.t_grid.clone(),
        c,
        norm_defect,
        edge_leak,
    })
}

/// `hbar^2 cosh^2(lambda t)`, exact for this Hamiltonian and state.
pub fn inverted_oscillator_otoc_exact(lambda: f64, hbar: f64, t: f64) -> f64 {
    let c = (lambda * t).cosh();
    hbar * hbar * c * c
}
