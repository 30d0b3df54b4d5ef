//! Normal-form Hamiltonian in action variables.
//!
//! The Hamiltonian is a sparse real polynomial `H(I, J_1, .., J_f)` in the
//! reaction action `I` and the bath actions `J_k`. Every exponent tuple has
//! `f + 1` entries, the first belonging to `I`. Derivatives are taken
//! analytically term by term, so `Lambda = dH/dI`, `Omega = dH/dJ` and the
//! frequency Jacobian `dOmega/dJ` are exact for the stored polynomial.

mod format;
mod presets;
mod table;

pub use format::{
    parse_action_polynomial, parse_coefficient_table, read_action_polynomial,
    read_coefficient_table, write_action_polynomial, write_coefficient_table,
};
pub use presets::{
    eckart_morse_quoted, eckart_morse_synthetic, ECKART_MORSE_QUOTED_NF, ECKART_MORSE_SYNTHETIC_NF,
    SYNTHETIC_BATH_CURVATURE,
};
pub use table::{
    convert_to_action_polynomial, ComplexMonomialTable, MonomialRecord, DEFAULT_CONVERSION_TOL,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{OtocError, Result};

/// A point in action space.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPoint {
    /// Reaction action; zero on the NHIM.
    pub i: f64,
    /// Bath actions.
    pub j: DVector<f64>,
}

impl ActionPoint {
    pub fn new(i: f64, j: impl Into<Vec<f64>>) -> Self {
        ActionPoint {
            i,
            j: DVector::from_vec(j.into()),
        }
    }

    /// Point on the NHIM (`I = 0`).
    pub fn on_nhim(j: &DVector<f64>) -> Self {
        ActionPoint { i: 0.0, j: j.clone() }
    }

    pub fn with_reaction(mut self, i: f64) -> Self {
        self.i = i;
        self
    }

    pub fn origin(f: usize) -> Self {
        ActionPoint {
            i: 0.0,
            j: DVector::zeros(f),
        }
    }

    pub fn bath_count(&self) -> usize {
        self.j.len()
    }

    /// True when every bath action is non-negative.
    pub fn is_physical(&self) -> bool {
        self.j.iter().all(|&v| v >= 0.0)
    }

    fn coordinate(&self, idx: usize) -> f64 {
        if idx == 0 {
            self.i
        } else {
            self.j[idx - 1]
        }
    }
}

/// Sparse real polynomial in `(I, J_1, .., J_f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPolynomial {
    f: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl ActionPolynomial {
    /// Empty polynomial with `f` bath modes.
    pub fn new(f: usize) -> Self {
        assert!(f > 0, "at least one bath mode is required");
        ActionPolynomial {
            f,
            terms: BTreeMap::new(),
        }
    }

    /// `E0 + lambda I + sum_k omega_k J_k`.
    pub fn linear(saddle_energy: f64, lambda: f64, omega: &[f64]) -> Self {
        let mut poly = ActionPolynomial::new(omega.len());
        poly.add_term(&vec![0; omega.len() + 1], saddle_energy)
            .expect("dimensions are consistent");
        let e = poly.unit(0);
        poly.add_term(&e, lambda).expect("dimensions are consistent");
        for (k, &w) in omega.iter().enumerate() {
            let e = poly.unit(k + 1);
            poly.add_term(&e, w).expect("dimensions are consistent");
        }
        poly
    }

    /// Builder-style variant of [`add_term`](Self::add_term).
    pub fn with_term(mut self, exponents: &[u32], coeff: f64) -> Result<Self> {
        self.add_term(exponents, coeff)?;
        Ok(self)
    }

    /// Adds `coeff` to the coefficient of the given monomial.
    pub fn add_term(&mut self, exponents: &[u32], coeff: f64) -> Result<()> {
        if exponents.len() != self.f + 1 {
            return Err(OtocError::DimensionMismatch {
                expected: self.f + 1,
                found: exponents.len(),
            });
        }
        if !coeff.is_finite() {
            return Err(OtocError::InvalidConfig(format!(
                "non-finite coefficient for {exponents:?}"
            )));
        }
        *self.terms.entry(exponents.to_vec()).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn bath_modes(&self) -> usize {
        self.f
    }

    /// Coefficient of a monomial, zero if absent.
    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn saddle_energy(&self) -> f64 {
        self.coefficient(&vec![0; self.f + 1])
    }

    pub fn linear_rate(&self) -> f64 {
        self.coefficient(&self.unit(0))
    }

    pub fn linear_frequencies(&self) -> DVector<f64> {
        DVector::from_iterator(self.f, (1..=self.f).map(|k| self.coefficient(&self.unit(k))))
    }

    fn unit(&self, idx: usize) -> Vec<u32> {
        let mut e = vec![0; self.f + 1];
        e[idx] = 1;
        e
    }

    fn check(&self, pt: &ActionPoint) -> Result<()> {
        if pt.bath_count() != self.f {
            return Err(OtocError::DimensionMismatch {
                expected: self.f,
                found: pt.bath_count(),
            });
        }
        Ok(())
    }

    fn power_table(&self, pt: &ActionPoint) -> Vec<Vec<f64>> {
        let max_deg = self
            .terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        (0..=self.f)
            .map(|idx| {
                let x = pt.coordinate(idx);
                let mut row = Vec::with_capacity(max_deg + 1);
                let mut acc = 1.0;
                for _ in 0..=max_deg {
                    row.push(acc);
                    acc *= x;
                }
                row
            })
            .collect()
    }

    /// Mixed partial derivative with the given derivative orders per
    /// coordinate (`orders[0]` for `I`).
    pub fn derivative(&self, pt: &ActionPoint, orders: &[u32]) -> Result<f64> {
        self.check(pt)?;
        if orders.len() != self.f + 1 {
            return Err(OtocError::DimensionMismatch {
                expected: self.f + 1,
                found: orders.len(),
            });
        }
        let powers = self.power_table(pt);
        Ok(self.derivative_with(&powers, orders))
    }

    fn derivative_with(&self, powers: &[Vec<f64>], orders: &[u32]) -> f64 {
        let mut sum = 0.0;
        'terms: for (exps, &c) in &self.terms {
            let mut value = c;
            for (idx, (&n, &d)) in exps.iter().zip(orders).enumerate() {
                if d > n {
                    continue 'terms;
                }
                // falling factorial n (n-1) .. (n-d+1)
                for r in 0..d {
                    value *= f64::from(n - r);
                }
                value *= powers[idx][(n - d) as usize];
            }
            sum += value;
        }
        sum
    }

    /// `H(I, J)`.
    pub fn eval(&self, pt: &ActionPoint) -> Result<f64> {
        self.derivative(pt, &vec![0; self.f + 1])
    }

    /// `Lambda(I, J) = dH/dI`.
    pub fn lyapunov_exponent(&self, pt: &ActionPoint) -> Result<f64> {
        self.derivative(pt, &self.unit(0))
    }

    /// `Omega(I, J) = dH/dJ`.
    pub fn bath_frequencies(&self, pt: &ActionPoint) -> Result<DVector<f64>> {
        self.check(pt)?;
        let powers = self.power_table(pt);
        Ok(DVector::from_iterator(
            self.f,
            (1..=self.f).map(|k| self.derivative_with(&powers, &self.unit(k))),
        ))
    }

    /// `dOmega/dJ`, symmetric by construction.
    pub fn frequency_jacobian(&self, pt: &ActionPoint) -> Result<DMatrix<f64>> {
        let full = self.hessian(pt)?;
        Ok(full.view((1, 1), (self.f, self.f)).into_owned())
    }

    /// Full `(f+1) x (f+1)` Hessian of `H` in `(I, J)`.
    pub fn hessian(&self, pt: &ActionPoint) -> Result<DMatrix<f64>> {
        self.check(pt)?;
        let powers = self.power_table(pt);
        let n = self.f + 1;
        let mut h = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let mut orders = vec![0u32; n];
                orders[a] += 1;
                orders[b] += 1;
                let v = self.derivative_with(&powers, &orders);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quoted() -> ActionPolynomial {
        eckart_morse_quoted()
    }

    #[test]
    fn eckart_morse_values() {
        let p = quoted();
        let origin = ActionPoint::origin(2);
        assert_eq!(p.eval(&origin).unwrap(), -0.9875);
        let e = p.eval(&ActionPoint::new(0.0, [1.0, 0.0])).unwrap();
        assert!((e - 0.8350).abs() < 1e-12);
        assert!((p.lyapunov_exponent(&origin).unwrap() - 0.7350).abs() < 1e-15);
        let lam = p.lyapunov_exponent(&ActionPoint::new(0.0, [1.0, 0.0])).unwrap();
        assert_eq!(format!("{lam:.4}"), "0.7227");
        let w = p.bath_frequencies(&origin).unwrap();
        assert!((w[0] - 1.8225).abs() < 1e-12);
        assert_eq!(format!("{:.4}", w[1]), "1.2673");
    }

    #[test]
    fn linear_poly_has_constant_frequencies_and_zero_jacobian() {
        let p = ActionPolynomial::linear(0.1, 0.7, &[1.5, 1.2]);
        for pt in [ActionPoint::new(0.3, [2.0, 4.0]), ActionPoint::new(-1.0, [0.0, 7.0])] {
            assert_eq!(p.bath_frequencies(&pt).unwrap().as_slice(), &[1.5, 1.2]);
            assert_eq!(p.frequency_jacobian(&pt).unwrap(), DMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn single_quadratic_term() {
        let c = 0.37;
        let p = ActionPolynomial::new(2).with_term(&[0, 2, 0], 0.5 * c).unwrap();
        let m = p.frequency_jacobian(&ActionPoint::new(0.2, [1.1, 3.0])).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[c, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let p = quoted();
        let bad = ActionPoint::new(0.0, [1.0, 2.0, 3.0]);
        assert!(matches!(p.eval(&bad), Err(OtocError::DimensionMismatch { .. })));
        assert!(matches!(p.lyapunov_exponent(&bad), Err(OtocError::DimensionMismatch { .. })));
        assert!(matches!(p.bath_frequencies(&bad), Err(OtocError::DimensionMismatch { .. })));
        assert!(matches!(p.frequency_jacobian(&bad), Err(OtocError::DimensionMismatch { .. })));
        let mut q = ActionPolynomial::new(2);
        assert!(q.add_term(&[1, 0], 1.0).is_err());
    }

    #[test]
    fn origin_gives_constant_term() {
        let p = ActionPolynomial::new(3)
            .with_term(&[0, 0, 0, 0], 4.25)
            .unwrap()
            .with_term(&[2, 1, 0, 3], -1.0)
            .unwrap();
        assert_eq!(p.eval(&ActionPoint::origin(3)).unwrap(), 4.25);
    }
}
