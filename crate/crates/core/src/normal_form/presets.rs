//! Built-in Eckart-Morse coefficient sets.

use super::{parse_coefficient_table, ActionPolynomial, DEFAULT_CONVERSION_TOL};

/// Diagonal bath curvature `c` of the synthetic preset. Not a published
/// value: it only makes `dOmega/dJ` invertible for demonstrations.
pub const SYNTHETIC_BATH_CURVATURE: f64 = 0.05;

pub const ECKART_MORSE_QUOTED_NF: &str = include_str!("../../data/eckart_morse_quoted.nf");
pub const ECKART_MORSE_SYNTHETIC_NF: &str = include_str!("../../data/eckart_morse_synthetic.nf");

fn load(text: &str) -> ActionPolynomial {
    parse_coefficient_table(text)
        .and_then(|t| t.to_action_polynomial(DEFAULT_CONVERSION_TOL))
        .expect("shipped coefficient file is valid")
}

/// Quoted Eckart-Morse terms: `E0, lambda, omega_2, omega_3, a, b_2, b_3`.
pub fn eckart_morse_quoted() -> ActionPolynomial {
    load(ECKART_MORSE_QUOTED_NF)
}

/// Quoted terms plus the synthetic `0.5 c (J_2^2 + J_3^2)` curvature.
pub fn eckart_morse_synthetic() -> ActionPolynomial {
    load(ECKART_MORSE_SYNTHETIC_NF)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_adds_only_the_curvature() {
        let q = eckart_morse_quoted();
        let s = eckart_morse_synthetic();
        assert_eq!(s.term_count(), q.term_count() + 2);
        assert_eq!(s.coefficient(&[0, 2, 0]), 0.5 * SYNTHETIC_BATH_CURVATURE);
        assert_eq!(s.coefficient(&[0, 0, 2]), 0.5 * SYNTHETIC_BATH_CURVATURE);
        for (e, c) in q.terms() {
            assert_eq!(s.coefficient(e), c);
        }
    }
}
