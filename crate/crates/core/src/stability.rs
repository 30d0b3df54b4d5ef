//! Monodromy blocks on the NHIM and the factors derived from them.
//!
//! On `q_u = p_u = 0` the linearized flow is block diagonal: a hyperbolic
//! `2x2` reaction block and a `2f x 2f` shear for the bath.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{OtocError, Result};

/// Largest exponent (natural-log scale) accepted before reporting overflow.
pub const EXP_GUARD: f64 = 700.0;

/// Below this `Lambda * tau` the stability factor is treated as divergent.
pub const DEGENERATE_ORBIT_EPS: f64 = 1e-8;

/// `[[cosh, sinh], [sinh, cosh]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionBlock(pub Matrix2<f64>);

impl ReactionBlock {
    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    /// `dq(t)/dq(0)`.
    pub fn qq(&self) -> f64 {
        self.0[(0, 0)]
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// `|det(M - 1)|` by direct 2x2 expansion.
    pub fn trace_determinant(&self) -> f64 {
        (self.0 - Matrix2::identity()).determinant().abs()
    }
}

/// `[[1, dOmega/dJ t], [0, 1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathBlock(pub DMatrix<f64>);

impl BathBlock {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn bath_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    /// Upper-right `f x f` block.
    pub fn shear(&self) -> DMatrix<f64> {
        let f = self.bath_modes();
        self.0.view((0, f), (f, f)).into_owned()
    }
}

/// Which form of the growth factor `hbar^2 |M_qq(t)|^2` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ButterflyMode {
    /// `hbar^2 cosh^2(Lambda t)`.
    Exact,
    /// `(hbar^2 / 4) e^{2 Lambda t}`.
    #[default]
    Asymptotic,
}

impl std::str::FromStr for ButterflyMode {
    type Err = OtocError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ButterflyMode::Exact),
            "asymptotic" => Ok(ButterflyMode::Asymptotic),
            other => Err(OtocError::InvalidConfig(format!("unknown butterfly mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ButterflyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ButterflyMode::Exact => "exact",
            ButterflyMode::Asymptotic => "asymptotic",
        })
    }
}

pub fn reaction_monodromy(lambda: f64, t: f64) -> Result<ReactionBlock> {
    let x = lambda * t;
    if !x.is_finite() || x.abs() > EXP_GUARD {
        return Err(OtocError::InfOverflow(x));
    }
    let (c, s) = (x.cosh(), x.sinh());
    Ok(ReactionBlock(Matrix2::new(c, s, s, c)))
}

pub fn bath_monodromy(domega_dj: &DMatrix<f64>, t: f64) -> Result<BathBlock> {
    let f = domega_dj.nrows();
    if domega_dj.ncols() != f {
        return Err(OtocError::DimensionMismatch {
            expected: f,
            found: domega_dj.ncols(),
        });
    }
    let mut m = DMatrix::identity(2 * f, 2 * f);
    m.view_mut((0, f), (f, f)).copy_from(&(domega_dj * t));
    Ok(BathBlock(m))
}

/// `1 / (2 sinh(Lambda tau / 2)) = |det(M_reac(tau) - 1)|^{-1/2}`.
pub fn gutzwiller_stability_factor(lambda: f64, tau: f64) -> Result<f64> {
    let x = lambda * tau;
    if !(x >= DEGENERATE_ORBIT_EPS) {
        return Err(OtocError::DegenerateOrbit(x));
    }
    Ok(0.5 / (0.5 * x).sinh())
}

/// Natural log of [`gutzwiller_stability_factor`], finite for any `Lambda tau`.
pub fn gutzwiller_stability_factor_ln(lambda: f64, tau: f64) -> Result<f64> {
    let x = lambda * tau;
    if !(x >= DEGENERATE_ORBIT_EPS) {
        return Err(OtocError::DegenerateOrbit(x));
    }
    // 2 sinh(x/2) = e^{x/2} (1 - e^{-x})
    Ok(-0.5 * x - (-(-x).exp()).ln_1p())
}

/// `hbar^2 |M_qq(t)|^2` in the requested form.
pub fn butterfly_weight(lambda: f64, t: f64, hbar: f64, mode: ButterflyMode) -> Result<f64> {
    let ln = butterfly_weight_ln(lambda, t, hbar, mode)?;
    if ln > EXP_GUARD {
        return Err(OtocError::InfOverflow(ln));
    }
    Ok(match mode {
        ButterflyMode::Exact => {
            let c = (lambda * t).cosh();
            hbar * hbar * c * c
        }
        ButterflyMode::Asymptotic => 0.25 * hbar * hbar * (2.0 * lambda * t).exp(),
    })
}

/// Natural log of [`butterfly_weight`]; the weight is always positive.
pub fn butterfly_weight_ln(lambda: f64, t: f64, hbar: f64, mode: ButterflyMode) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(OtocError::InvalidConfig(format!("hbar must be positive, got {hbar}")));
    }
    let x = (lambda * t).abs();
    if !x.is_finite() {
        return Err(OtocError::InfOverflow(x));
    }
    let base = 2.0 * hbar.ln() + 2.0 * x - 4f64.ln();
    Ok(match mode {
        // cosh^2 x = e^{2x} (1 + e^{-2x})^2 / 4
        ButterflyMode::Exact => base + 2.0 * (-2.0 * x).exp().ln_1p(),
        ButterflyMode::Asymptotic => 2.0 * hbar.ln() + 2.0 * lambda * t - 4f64.ln(),
    })
}

/// Standard symplectic form for `(q_u, p_u, theta_1..f, J_1..f)`.
pub fn symplectic_form(f: usize) -> DMatrix<f64> {
    let n = 2 + 2 * f;
    let mut w = DMatrix::zeros(n, n);
    w[(0, 1)] = 1.0;
    w[(1, 0)] = -1.0;
    for k in 0..f {
        w[(2 + k, 2 + f + k)] = 1.0;
        w[(2 + f + k, 2 + k)] = -1.0;
    }
    w
}

/// Max entry of `M^T W M - W`.
pub fn symplectic_defect(m: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    (m.transpose() * w * m - w).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reaction_identity_at_zero_time() {
        assert_eq!(reaction_monodromy(0.735, 0.0).unwrap().0, Matrix2::identity());
    }

    #[test]
    fn reaction_group_property_and_determinant() {
        let lam = 0.735;
        for &(t, s) in &[(0.3, 1.1), (2.0, 3.5), (-1.0, 4.0)] {
            let a = reaction_monodromy(lam, t).unwrap().0;
            let b = reaction_monodromy(lam, s).unwrap().0;
            let ab = reaction_monodromy(lam, t + s).unwrap().0;
            let prod = a * b;
            for k in 0..4 {
                assert!((prod[k] - ab[k]).abs() <= 1e-12 * ab[k].abs().max(1.0));
            }
            assert_relative_eq!(a.determinant(), 1.0, epsilon = 1e-12);
            assert_eq!(a, a.transpose());
        }
    }

    #[test]
    fn reaction_overflow_guard() {
        assert!(matches!(reaction_monodromy(1.0, 701.0), Err(OtocError::InfOverflow(_))));
    }

    #[test]
    fn bath_shear_structure() {
        let c = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]);
        assert_eq!(bath_monodromy(&c, 0.0).unwrap().0, DMatrix::identity(4, 4));
        assert_eq!(
            bath_monodromy(&DMatrix::zeros(2, 2), 7.0).unwrap().0,
            DMatrix::identity(4, 4)
        );
        let m = bath_monodromy(&c, 2.0).unwrap();
        assert_eq!(m.shear(), &c * 2.0);
        let n = m.0.clone() - DMatrix::identity(4, 4);
        assert_eq!(&n * &n, DMatrix::zeros(4, 4));
        assert!(bath_monodromy(&DMatrix::zeros(2, 3), 1.0).is_err());
    }

    #[test]
    fn bath_block_is_symplectic() {
        let c = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]);
        let m = bath_monodromy(&c, 3.0).unwrap().0;
        let mut full = DMatrix::identity(6, 6);
        full.view_mut((2, 2), (4, 4)).copy_from(&m);
        assert!(symplectic_defect(&full, &symplectic_form(2)) < 1e-12);
    }

    #[test]
    fn stability_factor_matches_determinant() {
        // beyond Lambda tau ~ 12 the double-precision entries of M - 1 cancel
        // to worse than 1e-10; the extended-precision oracle covers [0.1, 20]
        let lam = 0.735;
        let mut x = 0.1;
        while x <= 12.0 {
            let tau = x / lam;
            let det = reaction_monodromy(lam, tau).unwrap().trace_determinant();
            let s = (0.5 * x).sinh();
            assert!((det - 4.0 * s * s).abs() <= 1e-10 * det);
            let factor = gutzwiller_stability_factor(lam, tau).unwrap();
            assert_relative_eq!(factor, det.powf(-0.5), max_relative = 1e-10);
            x += 0.1;
        }
    }

    #[test]
    fn stability_factor_special_values() {
        let tau = 2.0 * 0.5f64.asinh();
        assert_relative_eq!(gutzwiller_stability_factor(1.0, tau).unwrap(), 1.0, epsilon = 1e-15);
        for x in [8.0, 10.0, 15.0] {
            let f = gutzwiller_stability_factor(1.0, x).unwrap();
            assert!((f / (-0.5 * x).exp() - 1.0).abs() < 2e-3);
            let ln = gutzwiller_stability_factor_ln(1.0, x).unwrap();
            assert_relative_eq!(ln, f.ln(), max_relative = 1e-13);
        }
        assert!(matches!(
            gutzwiller_stability_factor(0.7, 1e-9),
            Err(OtocError::DegenerateOrbit(_))
        ));
        assert!(gutzwiller_stability_factor_ln(1.0, 2000.0).unwrap().is_finite());
    }

    #[test]
    fn butterfly_values() {
        let hbar = 0.05;
        assert_eq!(butterfly_weight(0.735, 0.0, hbar, ButterflyMode::Exact).unwrap(), hbar * hbar);
        let exact = butterfly_weight(1.0, 10.0, hbar, ButterflyMode::Exact).unwrap();
        let asym = butterfly_weight(1.0, 10.0, hbar, ButterflyMode::Asymptotic).unwrap();
        let r = exact / asym;
        assert!((1.0..=1.0 + 1e-8).contains(&r), "ratio {r}");
        assert!(matches!(
            butterfly_weight(1.0, 400.0, hbar, ButterflyMode::Exact),
            Err(OtocError::InfOverflow(_))
        ));
        assert!(butterfly_weight_ln(1.0, 400.0, hbar, ButterflyMode::Exact).unwrap().is_finite());
    }

    #[test]
    fn butterfly_log_slope_is_two_lambda() {
        let (lam, hbar) = (0.7350, 0.05);
        let ts: Vec<f64> = (0..=40).map(|k| 3.0 + 0.05 * f64::from(k)).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| butterfly_weight(lam, t, hbar, ButterflyMode::Exact).unwrap().ln())
            .collect();
        let n = ts.len() as f64;
        let (mt, my) = (ts.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - mt) * (y - my)).sum();
        let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
        assert!((sxy / sxx / (2.0 * lam) - 1.0).abs() < 0.01);
    }
}
