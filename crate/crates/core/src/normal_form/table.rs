//! Complex monomial tables `h_{alpha beta}` over `(x, xi)` and their
//! conversion to action polynomials.
//!
//! With `I = x_1 xi_1` and `J_k = i x_k xi_k`, a resonant monomial
//! `h (x_1 xi_1)^{n_1} prod_k (x_k xi_k)^{n_k}` becomes
//! `h (-i)^N I^{n_1} prod_k J_k^{n_k}` with `N = sum_{k>=2} n_k`.

use std::collections::HashSet;

use num_complex::Complex64;

use super::ActionPolynomial;
use crate::error::{OtocError, Result};

pub const DEFAULT_CONVERSION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialRecord {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub coeff: Complex64,
}

impl MonomialRecord {
    pub fn new(alpha: impl Into<Vec<u32>>, beta: impl Into<Vec<u32>>, coeff: Complex64) -> Self {
        MonomialRecord {
            alpha: alpha.into(),
            beta: beta.into(),
            coeff,
        }
    }

    pub fn is_resonant(&self) -> bool {
        self.alpha == self.beta
    }
}

/// Raw normal-form output over `d = f + 1` degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMonomialTable {
    dof: usize,
    records: Vec<MonomialRecord>,
}

/// `(-i)^n`.
fn minus_i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

impl ComplexMonomialTable {
    /// Validates record shapes and rejects duplicate `(alpha, beta)` keys.
    pub fn new(dof: usize, records: Vec<MonomialRecord>) -> Result<Self> {
        if dof < 2 {
            return Err(OtocError::MalformedTable(format!(
                "need a saddle and at least one bath mode, got {dof} degrees of freedom"
            )));
        }
        let mut seen = HashSet::new();
        for r in &records {
            if r.alpha.len() != dof || r.beta.len() != dof {
                return Err(OtocError::DimensionMismatch {
                    expected: dof,
                    found: r.alpha.len().max(r.beta.len()),
                });
            }
            if !(r.coeff.re.is_finite() && r.coeff.im.is_finite()) {
                return Err(OtocError::MalformedTable(format!(
                    "non-finite coefficient for alpha={:?} beta={:?}",
                    r.alpha, r.beta
                )));
            }
            if !seen.insert((r.alpha.clone(), r.beta.clone())) {
                return Err(OtocError::MalformedTable(format!(
                    "duplicate record alpha={:?} beta={:?}",
                    r.alpha, r.beta
                )));
            }
        }
        Ok(ComplexMonomialTable { dof, records })
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn records(&self) -> &[MonomialRecord] {
        &self.records
    }

    /// Keeps only resonant monomials and maps them onto action powers.
    pub fn to_action_polynomial(&self, tol: f64) -> Result<ActionPolynomial> {
        if !(tol > 0.0) {
            return Err(OtocError::InvalidConfig(format!("tol must be positive, got {tol}")));
        }
        let mut poly = ActionPolynomial::new(self.dof - 1);
        for r in &self.records {
            if !r.is_resonant() {
                if r.coeff.norm() > tol {
                    return Err(OtocError::NonResonantMonomial {
                        alpha: r.alpha.clone(),
                        beta: r.beta.clone(),
                        magnitude: r.coeff.norm(),
                    });
                }
                continue;
            }
            let bath_order: u32 = r.alpha[1..].iter().sum();
            let converted = r.coeff * minus_i_pow(bath_order);
            if converted.im.abs() > tol {
                return Err(OtocError::ComplexResidue {
                    exponents: r.alpha.clone(),
                    imag: converted.im,
                });
            }
            poly.add_term(&r.alpha, converted.re)?;
        }
        Ok(poly)
    }

    /// Inverse map: one resonant record per polynomial term.
    pub fn from_action_polynomial(poly: &ActionPolynomial) -> Self {
        let records = poly
            .terms()
            .map(|(e, c)| {
                let bath_order: u32 = e[1..].iter().sum();
                // h = c / (-i)^N = c * i^N
                let h = Complex64::new(c, 0.0) * minus_i_pow(bath_order).conj();
                MonomialRecord::new(e.to_vec(), e.to_vec(), h)
            })
            .collect();
        ComplexMonomialTable {
            dof: poly.bath_modes() + 1,
            records,
        }
    }
}

/// Converts with the default tolerance.
pub fn convert_to_action_polynomial(table: &ComplexMonomialTable, tol: f64) -> Result<ActionPolynomial> {
    table.to_action_polynomial(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(alpha: [u32; 3], h: Complex64) -> ActionPolynomial {
        ComplexMonomialTable::new(3, vec![MonomialRecord::new(alpha, alpha, h)])
            .unwrap()
            .to_action_polynomial(DEFAULT_CONVERSION_TOL)
            .unwrap()
    }

    #[test]
    fn reaction_bath_coupling() {
        let p = single([1, 1, 0], Complex64::new(0.0, -0.012334));
        let b2 = p.coefficient(&[1, 1, 0]);
        assert!((b2 + 0.012334).abs() < 1e-15);
        assert_eq!(format!("{b2:.4}"), "-0.0123");
    }

    #[test]
    fn bath_frequency() {
        let p = single([0, 0, 1], Complex64::new(0.0, 1.267290));
        assert_eq!(format!("{:.4}", p.coefficient(&[0, 0, 1])), "1.2673");
    }

    #[test]
    fn saddle_anharmonicity() {
        let p = single([2, 0, 0], Complex64::new(0.118039, 0.0));
        let half_a = p.coefficient(&[2, 0, 0]);
        assert_eq!(half_a, 0.118039);
        assert_eq!(format!("{:.4}", 2.0 * half_a), "0.2361");
    }

    #[test]
    fn rejects_non_resonant() {
        let t = ComplexMonomialTable::new(
            3,
            vec![MonomialRecord::new([1, 0, 0], [0, 1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        assert!(matches!(
            t.to_action_polynomial(1e-10),
            Err(OtocError::NonResonantMonomial { .. })
        ));
    }

    #[test]
    fn tiny_non_resonant_is_dropped() {
        let t = ComplexMonomialTable::new(
            3,
            vec![MonomialRecord::new([1, 0, 0], [0, 1, 0], Complex64::new(1e-14, 0.0))],
        )
        .unwrap();
        assert_eq!(t.to_action_polynomial(1e-10).unwrap().term_count(), 0);
    }

    #[test]
    fn rejects_complex_residue() {
        // a real coefficient on x_2 xi_2 would give an imaginary frequency
        let t = ComplexMonomialTable::new(
            3,
            vec![MonomialRecord::new([0, 1, 0], [0, 1, 0], Complex64::new(1.8, 0.0))],
        )
        .unwrap();
        assert!(matches!(
            t.to_action_polynomial(1e-10),
            Err(OtocError::ComplexResidue { .. })
        ));
    }

    #[test]
    fn rejects_duplicates_and_bad_shapes() {
        let r = MonomialRecord::new([1, 0, 0], [1, 0, 0], Complex64::new(0.7, 0.0));
        assert!(ComplexMonomialTable::new(3, vec![r.clone(), r.clone()]).is_err());
        let short = MonomialRecord::new([1, 0], [1, 0], Complex64::new(0.7, 0.0));
        assert!(ComplexMonomialTable::new(3, vec![short]).is_err());
    }

    #[test]
    fn higher_order_signs_follow_minus_i_power() {
        // N = 2: (x2 xi2)^2 = -J2^2, so h = -0.025 gives +0.025 J2^2
        let p = single([0, 2, 0], Complex64::new(-0.025, 0.0));
        assert_eq!(p.coefficient(&[0, 2, 0]), 0.025);
        // N = 3: (-i)^3 = i, so h = -i c gives c
        let p = single([1, 2, 1], Complex64::new(0.0, -0.3));
        assert!((p.coefficient(&[1, 2, 1]) - 0.3).abs() < 1e-15);
    }
}
