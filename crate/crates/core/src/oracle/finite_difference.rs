//! Central-difference check of the analytic derivatives of `H(I, J)`.

use nalgebra::DVector;

use crate::error::Result;
use crate::normal_form::{ActionPoint, ActionPolynomial};

/// Largest error per quantity, relative to the largest analytic entry of
/// that quantity (floored at 1 ulp-scale to keep all-zero blocks finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub lambda: f64,
    pub omega: f64,
    pub jacobian: f64,
}

impl FdReport {
    pub fn max(&self) -> f64 {
        self.lambda.max(self.omega).max(self.jacobian)
    }
}

fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(f64::MIN_POSITIVE);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / scale)
        .fold(0.0, f64::max)
}

fn shifted(pt: &ActionPoint, idx: usize, delta: f64) -> ActionPoint {
    let mut p = pt.clone();
    if idx == 0 {
        p.i += delta;
    } else {
        p.j[idx - 1] += delta;
    }
    p
}

/// Differences `Lambda` and `Omega` from `eval`, and `dOmega/dJ` from
/// `bath_frequencies`, at step `h`.
pub fn finite_difference_check(poly: &ActionPolynomial, pt: &ActionPoint, h: f64) -> Result<FdReport> {
    let f = poly.bath_modes();
    let central = |idx: usize| -> Result<f64> {
        let up = poly.eval(&shifted(pt, idx, h))?;
        let down = poly.eval(&shifted(pt, idx, -h))?;
        Ok((up - down) / (2.0 * h))
    };

    let lambda = poly.lyapunov_exponent(pt)?;
    let lambda_fd = central(0)?;

    let omega = poly.bath_frequencies(pt)?;
    let omega_fd = (1..=f).map(central).collect::<Result<Vec<_>>>()?;

    let jac = poly.frequency_jacobian(pt)?;
    let mut jac_fd = Vec::with_capacity(f * f);
    let mut jac_an = Vec::with_capacity(f * f);
    for l in 0..f {
        let up: DVector<f64> = poly.bath_frequencies(&shifted(pt, l + 1, h))?;
        let down = poly.bath_frequencies(&shifted(pt, l + 1, -h))?;
        for k in 0..f {
            jac_fd.push((up[k] - down[k]) / (2.0 * h));
            jac_an.push(jac[(k, l)]);
        }
    }

    Ok(FdReport {
        lambda: rel_err(&[lambda], &[lambda_fd]),
        omega: rel_err(omega.as_slice(), &omega_fd),
        jacobian: rel_err(&jac_an, &jac_fd),
    })
}
