//! Lambda, Omega and dOmega/dJ at a few bath actions, checked against
//! central differences.

use nhim_otoc::normal_form::{eckart_morse_synthetic, ActionPoint};
use nhim_otoc::oracle::finite_difference_check;

fn main() -> nhim_otoc::Result<()> {
    let poly = eckart_morse_synthetic();
    for j in [[0.0, 0.0], [0.5, 0.2], [1.0, 1.0], [2.0, 0.5]] {
        let pt = ActionPoint::new(0.0, j);
        let omega = poly.bath_frequencies(&pt)?;
        let fd = finite_difference_check(&poly, &pt, 1e-5)?;
        println!(
            "J = {:?}: H = {:.6}, Lambda = {:.6}, Omega = ({:.6}, {:.6}), fd rel err {:.1e}",
            j,
            poly.eval(&pt)?,
            poly.lyapunov_exponent(&pt)?,
            omega[0],
            omega[1],
            fd.max()
        );
        println!("  dOmega/dJ = {}", poly.frequency_jacobian(&pt)?);
    }
    Ok(())
}
