//! Diagonal of the inverted-oscillator propagator and its trace over a
//! finite neighbourhood `[-q_max, q_max]` of the saddle.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{OtocError, Result};
use crate::stability::{gutzwiller_stability_factor, DEGENERATE_ORBIT_EPS};

/// Edge treatment of the integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Sharp boundary at `|q| = q_max`.
    Hard,
    /// Weight `cos^2` rolling from 1 to 0 across the outer `fraction` of each
    /// half-interval.
    CosineTaper { fraction: f64 },
}

impl Window {
    pub const DEFAULT_TAPER: f64 = 0.3;

    fn weight(&self, q: f64, q_max: f64) -> f64 {
        match *self {
            Window::Hard => 1.0,
            Window::CosineTaper { fraction } => {
                let inner = q_max * (1.0 - fraction);
                let a = q.abs();
                if a <= inner {
                    1.0
                } else {
                    let c = (FRAC_PI_2 * (a - inner) / (q_max - inner)).cos();
                    c * c
                }
            }
        }
    }
}

impl Default for Window {
    fn default() -> Self {
        Window::CosineTaper {
            fraction: Self::DEFAULT_TAPER,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Hard => f.write_str("hard"),
            Window::CosineTaper { fraction } => write!(f, "taper:{fraction}"),
        }
    }
}

impl FromStr for Window {
    type Err = OtocError;

    /// `hard`, `taper` or `taper:<fraction>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || OtocError::InvalidConfig(format!("unknown window `{s}`"));
        match s {
            "hard" => Ok(Window::Hard),
            "taper" => Ok(Window::default()),
            _ => {
                let frac = s.strip_prefix("taper:").ok_or_else(bad)?;
                let fraction = frac.parse().map_err(|_| bad())?;
                Ok(Window::CosineTaper { fraction })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionTraceConfig {
    pub q_max: f64,
    /// Starting Simpson grid; odd.
    pub quadrature_points: usize,
    pub hbar: f64,
    pub window: Window,
    /// Relative change under point doubling accepted as converged.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for ReactionTraceConfig {
    fn default() -> Self {
        ReactionTraceConfig {
            q_max: 1.5,
            quadrature_points: 20001,
            hbar: 0.05,
            window: Window::default(),
            tol: 1e-8,
            max_doublings: 6,
        }
    }
}

impl ReactionTraceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_max > 0.0 && self.q_max.is_finite()) {
            return Err(OtocError::InvalidConfig(format!("q_max must be positive, got {}", self.q_max)));
        }
        if self.quadrature_points < 3 || self.quadrature_points % 2 == 0 {
            return Err(OtocError::InvalidConfig(format!(
                "quadrature_points must be odd and >= 3, got {}",
                self.quadrature_points
            )));
        }
        if !(self.hbar > 0.0) {
            return Err(OtocError::InvalidConfig(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.tol > 0.0) {
            return Err(OtocError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if let Window::CosineTaper { fraction } = self.window {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(OtocError::InvalidConfig(format!("taper fraction must lie in (0, 1], got {fraction}")));
            }
        }
        Ok(())
    }
}

fn check_orbit(lambda: f64, tau: f64) -> Result<f64> {
    let x = lambda * tau;
    if !(x >= DEGENERATE_ORBIT_EPS) {
        return Err(OtocError::DegenerateOrbit(x));
    }
    Ok(x)
}

/// `(Lambda / (2 pi i hbar sinh(Lambda tau)))^{1/2}`, principal branch.
fn prefactor(lambda: f64, x: f64, hbar: f64) -> Complex64 {
    let modulus = (lambda / (2.0 * PI * hbar * x.sinh())).sqrt();
    Complex64::from_polar(modulus, -FRAC_PI_4)
}

/// Coefficient `kappa` of the chirp `exp(i kappa q^2)`.
fn chirp_rate(lambda: f64, x: f64, hbar: f64) -> f64 {
    // (cosh x - 1) / sinh x = tanh(x / 2), finite for any x
    lambda * (0.5 * x).tanh() / hbar
}

/// `K_reac(q_u, q_u, tau)`.
pub fn kreac_diagonal(q_u: f64, tau: f64, lambda: f64, hbar: f64) -> Result<Complex64> {
    if !(hbar > 0.0) {
        return Err(OtocError::InvalidConfig(format!("hbar must be positive, got {hbar}")));
    }
    let x = check_orbit(lambda, tau)?;
    let phase = chirp_rate(lambda, x, hbar) * q_u * q_u;
    Ok(prefactor(lambda, x, hbar) * Complex64::from_polar(1.0, phase))
}

fn simpson(kappa: f64, cfg: &ReactionTraceConfig, points: usize) -> Complex64 {
    let (a, n) = (-cfg.q_max, points - 1);
    let h = 2.0 * cfg.q_max / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let q = a + h * i as f64;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += Complex64::from_polar(w * cfg.window.weight(q, cfg.q_max), kappa * q * q);
    }
    sum * (h / 3.0)
}

/// Composite Simpson integral of the propagator diagonal, doubled until the
/// relative change falls below `cfg.tol`; returns the Richardson-corrected
/// value.
pub fn reaction_trace_quadrature(lambda: f64, tau: f64, cfg: &ReactionTraceConfig) -> Result<Complex64> {
    cfg.validate()?;
    let x = check_orbit(lambda, tau)?;
    let kappa = chirp_rate(lambda, x, cfg.hbar);
    let pre = prefactor(lambda, x, cfg.hbar);

    let mut points = cfg.quadrature_points;
    let mut prev = simpson(kappa, cfg, points);
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        points = 2 * points - 1;
        let next = simpson(kappa, cfg, points);
        change = (next - prev).norm() / next.norm().max(f64::MIN_POSITIVE);
        if change <= cfg.tol {
            return Ok(pre * (next + (next - prev) / 15.0));
        }
        prev = next;
    }
    Err(OtocError::QuadratureNotConverged(change))
}

/// `1 / (2 sinh(Lambda tau / 2))`.
pub fn reaction_trace_analytic(lambda: f64, tau: f64) -> Result<f64> {
    gutzwiller_stability_factor(lambda, tau)
}

/// Large-`Lambda tau` form `e^{-Lambda tau / 2}`.
pub fn reaction_trace_asymptotic(lambda: f64, tau: f64) -> Result<f64> {
    let x = check_orbit(lambda, tau)?;
    Ok((-0.5 * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAM: f64 = 0.7350;

    #[test]
    fn modulus_is_constant_in_q() {
        let k0 = kreac_diagonal(0.0, 3.0, LAM, 0.05).unwrap();
        let expect = (LAM / (2.0 * PI * 0.05 * (LAM * 3.0).sinh())).sqrt();
        assert!((k0.norm() - expect).abs() < 1e-15);
        for q in [-1.4, -0.3, 0.7, 1.5] {
            let k = kreac_diagonal(q, 3.0, LAM, 0.05).unwrap();
            assert!((k.norm() - k0.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn chirp_phase_matches_direct_expression() {
        let (tau, hbar) = (3.0, 0.05);
        let k0 = kreac_diagonal(0.0, tau, LAM, hbar).unwrap();
        let k1 = kreac_diagonal(1.0, tau, LAM, hbar).unwrap();
        let x = LAM * tau;
        let direct = LAM * (x.cosh() - 1.0) / (hbar * x.sinh());
        let measured = (k1 / k0).arg();
        let wrapped = (direct + PI).rem_euclid(2.0 * PI) - PI;
        assert!((measured - wrapped).abs() < 1e-12, "{measured} vs {wrapped}");
    }

    #[test]
    fn analytic_forms() {
        let tau = 2.0 * 0.5f64.asinh() / LAM;
        assert!((reaction_trace_analytic(LAM, tau).unwrap() - 1.0).abs() < 1e-14);
        let tau = 8.0 / LAM;
        let ratio = reaction_trace_analytic(LAM, tau).unwrap() / reaction_trace_asymptotic(LAM, tau).unwrap();
        assert!((ratio - 1.0).abs() < 2e-3);
        assert_eq!(
            reaction_trace_analytic(LAM, 4.3).unwrap(),
            gutzwiller_stability_factor(LAM, 4.3).unwrap()
        );
    }

    #[test]
    fn zero_period_is_degenerate() {
        let cfg = ReactionTraceConfig::default();
        assert!(matches!(
            reaction_trace_quadrature(LAM, 0.0, &cfg),
            Err(OtocError::DegenerateOrbit(_))
        ));
        assert!(matches!(kreac_diagonal(0.1, 1e-12, LAM, 0.05), Err(OtocError::DegenerateOrbit(_))));
    }

    #[test]
    fn quadrature_tracks_analytic_magnitude() {
        let cfg = ReactionTraceConfig::default();
        let tr = reaction_trace_quadrature(LAM, 5.0, &cfg).unwrap();
        let exact = reaction_trace_analytic(LAM, 5.0).unwrap();
        assert!((tr.norm() / exact - 1.0).abs() < 0.05);
    }

    #[test]
    fn window_parsing() {
        assert_eq!("hard".parse::<Window>().unwrap(), Window::Hard);
        assert_eq!("taper".parse::<Window>().unwrap(), Window::default());
        assert_eq!(
            "taper:0.1".parse::<Window>().unwrap(),
            Window::CosineTaper { fraction: 0.1 }
        );
        assert!("box".parse::<Window>().is_err());
        let w = Window::CosineTaper { fraction: 0.25 };
        assert_eq!(w.to_string().parse::<Window>().unwrap(), w);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ReactionTraceConfig::default();
        cfg.quadrature_points = 20000;
        assert!(cfg.validate().is_err());
        cfg.quadrature_points = 3;
        assert!(cfg.validate().is_ok());
        cfg.q_max = 0.0;
        assert!(cfg.validate().is_err());
    }
}
