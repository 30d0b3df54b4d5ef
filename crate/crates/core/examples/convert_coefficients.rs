//! Complex normal-form coefficients to an action polynomial.
//!
//! `cargo run --example convert_coefficients [table.nf]`

use nhim_otoc::normal_form::{
    read_coefficient_table, write_action_polynomial, DEFAULT_CONVERSION_TOL, ECKART_MORSE_QUOTED_NF,
};

fn main() -> nhim_otoc::Result<()> {
    let table = match std::env::args().nth(1) {
        Some(path) => read_coefficient_table(path)?,
        None => nhim_otoc::normal_form::parse_coefficient_table(ECKART_MORSE_QUOTED_NF)?,
    };
    let poly = table.to_action_polynomial(DEFAULT_CONVERSION_TOL)?;
    print!("{}", write_action_polynomial(&poly, &[format!("{} terms", poly.term_count())]));
    Ok(())
}
