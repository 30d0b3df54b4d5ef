//! Closed-form monodromy blocks against the integrated variational flow.

use nalgebra::DMatrix;
use nhim_otoc::normal_form::{eckart_morse_synthetic, ActionPoint};
use nhim_otoc::oracle::{integrate_flow_and_variations, PhaseState};
use nhim_otoc::stability::{
    bath_monodromy, gutzwiller_stability_factor, reaction_monodromy, symplectic_defect, symplectic_form,
};

fn main() -> nhim_otoc::Result<()> {
    let poly = eckart_morse_synthetic();
    let j = [0.8, 1.4];
    let pt = ActionPoint::new(0.0, j);
    let lambda = poly.lyapunov_exponent(&pt)?;
    for t in [1.0, 3.0, 6.0] {
        let reac = reaction_monodromy(lambda, t)?;
        let bath = bath_monodromy(&poly.frequency_jacobian(&pt)?, t)?;
        let mut analytic = DMatrix::zeros(6, 6);
        analytic.view_mut((0, 0), (2, 2)).copy_from(reac.matrix());
        analytic.view_mut((2, 2), (4, 4)).copy_from(bath.matrix());

        let flow = integrate_flow_and_variations(&poly, &PhaseState::on_nhim(&j), t, 0.01)?;
        println!(
            "t = {t}: M_qq = {:.6e}, |M - M_rk4| = {:.1e}, symplectic defect {:.1e}, 1/(2 sinh) = {:.6e}",
            reac.qq(),
            (&flow.monodromy - &analytic).amax(),
            symplectic_defect(&flow.monodromy, &symplectic_form(2)),
            gutzwiller_stability_factor(lambda, t)?
        );
    }
    Ok(())
}
