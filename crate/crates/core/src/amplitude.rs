//! Per-orbit ingredients of the bath trace: classical action, Maslov index,
//! the bordered Hessian of the bath phase and the Berry-Tabor amplitude.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{OtocError, Result};
use crate::normal_form::ActionPolynomial;
use crate::resonance::{ResonantTorus, WindingVector};
use crate::stability::gutzwiller_stability_factor;

pub const SINGULAR_DET_TOL: f64 = 1e-14;

/// Hessian of `Phi(J, tau) = J.2 pi m - H(0, J) tau + E tau` at a
/// stationary point.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedHessian {
    /// `[[-tau dOmega/dJ, -Omega], [-Omega^T, 0]]`.
    pub matrix: DMatrix<f64>,
    /// Determinant by LU factorization of `matrix`.
    pub det_direct: f64,
    /// `det(A) (D - C A^{-1} B)` with `A = -tau dOmega/dJ`.
    pub det_schur: f64,
    /// `det(dOmega/dJ)`.
    pub jacobian_det: f64,
    /// `Omega^T (dOmega/dJ)^{-1} Omega`.
    pub border_curvature: f64,
    /// `#positive - #negative` eigenvalues.
    pub signature: i32,
}

/// `S = J.2 pi m - H(0, J) tau`.
pub fn classical_action(torus: &ResonantTorus, poly: &ActionPolynomial) -> Result<f64> {
    let h = poly.eval(&torus.point())?;
    Ok(2.0 * PI * torus.winding.as_vector().dot(&torus.j) - h * torus.tau)
}

/// Two caustics per libration in every bath mode: `mu = 2 sum_k m_k`.
pub fn maslov_index(m: &WindingVector) -> i64 {
    2 * m.0.iter().sum::<i64>()
}

pub fn bordered_hessian(torus: &ResonantTorus) -> Result<BorderedHessian> {
    let f = torus.j.len();
    let c = &torus.jacobian;
    if c.nrows() != f || c.ncols() != f || torus.omega.len() != f {
        return Err(OtocError::DimensionMismatch {
            expected: f,
            found: c.nrows(),
        });
    }
    let jacobian_det = c.determinant();
    if !(jacobian_det.abs() > SINGULAR_DET_TOL) {
        return Err(OtocError::SingularJacobian(jacobian_det));
    }
    let tau = torus.tau;
    let mut matrix = DMatrix::zeros(f + 1, f + 1);
    matrix.view_mut((0, 0), (f, f)).copy_from(&(c * -tau));
    matrix.view_mut((0, f), (f, 1)).copy_from(&(-&torus.omega));
    matrix.view_mut((f, 0), (1, f)).copy_from(&(-torus.omega.transpose()));
    let det_direct = matrix.determinant();
    if !(det_direct.abs() >= SINGULAR_DET_TOL) {
        return Err(OtocError::DegenerateHessian(det_direct));
    }

    let a = c * -tau;
    let a_lu = a.clone().lu();
    let b = -&torus.omega;
    let a_inv_b = a_lu
        .solve(&b)
        .ok_or(OtocError::SingularJacobian(jacobian_det))?;
    // D - C A^{-1} B with D = 0, C = B^T
    let schur = -b.dot(&a_inv_b);
    let det_schur = a_lu.determinant() * schur;

    let c_inv_omega = c
        .clone()
        .lu()
        .solve(&torus.omega)
        .ok_or(OtocError::SingularJacobian(jacobian_det))?;
    let border_curvature = torus.omega.dot(&c_inv_omega);

    let eig = SymmetricEigen::new(matrix.clone());
    let signature = eig
        .eigenvalues
        .iter()
        .map(|&v| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 })
        .sum();

    Ok(BorderedHessian {
        matrix,
        det_direct,
        det_schur,
        jacobian_det,
        border_curvature,
        signature,
    })
}

/// `A = (2 pi hbar)^{1/2} |det dOmega/dJ|^{1/2} / |det H|^{1/2}`.
pub fn berry_tabor_amplitude(hess: &BorderedHessian, hbar: f64) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(OtocError::InvalidConfig(format!("hbar must be positive, got {hbar}")));
    }
    if !(hess.det_direct.abs() >= SINGULAR_DET_TOL) {
        return Err(OtocError::DegenerateHessian(hess.det_direct));
    }
    Ok((2.0 * PI * hbar).sqrt() * (hess.jacobian_det.abs() / hess.det_direct.abs()).sqrt())
}

/// Reduced form `(2 pi hbar)^{1/2} / (tau^{(f-1)/2} |Omega^T (dOmega/dJ)^{-1} Omega|^{1/2})`.
pub fn berry_tabor_amplitude_reduced(hess: &BorderedHessian, tau: f64, hbar: f64) -> Result<f64> {
    let f = hess.matrix.nrows() - 1;
    if !(hess.border_curvature.abs() >= SINGULAR_DET_TOL) {
        return Err(OtocError::DegenerateHessian(hess.border_curvature));
    }
    Ok((2.0 * PI * hbar).sqrt() / (tau.powf(0.5 * (f as f64 - 1.0)) * hess.border_curvature.abs().sqrt()))
}

/// Everything one orbit contributes to the trace, before the time-dependent
/// growth factor.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitContribution {
    pub torus: ResonantTorus,
    /// Classical action `S`.
    pub action: f64,
    pub maslov: i64,
    /// Bath-only Berry-Tabor amplitude, positive.
    pub amplitude: f64,
    /// `1 / (2 sinh(Lambda tau / 2))`.
    pub stability_factor: f64,
    /// `S / hbar - pi mu / 2`.
    pub phase: f64,
    /// Signature of the bordered Hessian.
    pub signature: i32,
    /// Phase carried by the Gaussian prefactors, `pi sigma_H / 4 - pi f / 4`.
    /// Logged only; the weight uses `phase`.
    pub gaussian_phase: f64,
    pub hbar: f64,
}

pub fn orbit_contribution(poly: &ActionPolynomial, torus: &ResonantTorus, hbar: f64) -> Result<OrbitContribution> {
    let hess = bordered_hessian(torus)?;
    let amplitude = berry_tabor_amplitude(&hess, hbar)?;
    let action = classical_action(torus, poly)?;
    let maslov = maslov_index(&torus.winding);
    let stability_factor = gutzwiller_stability_factor(torus.lambda, torus.tau)?;
    let f = torus.j.len() as f64;
    Ok(OrbitContribution {
        torus: torus.clone(),
        action,
        maslov,
        amplitude,
        stability_factor,
        phase: action / hbar - FRAC_PI_2 * maslov as f64,
        signature: hess.signature,
        gaussian_phase: FRAC_PI_4 * (f64::from(hess.signature) - f),
        hbar,
    })
}
