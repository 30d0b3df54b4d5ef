//! Action, Maslov index, bordered Hessian and Berry-Tabor amplitude of the
//! tori that contribute at one observation time.

use nhim_otoc::amplitude::{bordered_hessian, orbit_contribution};
use nhim_otoc::normal_form::eckart_morse_synthetic;
use nhim_otoc::resonance::{enumerate_windings, solve_resonance_fixed_time, SolverConfig};

fn main() -> nhim_otoc::Result<()> {
    let poly = eckart_morse_synthetic();
    let (t, hbar) = (5.0, 0.05);
    println!("m, J, S, mu, det_direct, det_schur, sigma_H, A");
    for m in enumerate_windings(2, 5) {
        let Ok(tori) = solve_resonance_fixed_time(&poly, &m, t, &SolverConfig::default()) else {
            continue;
        };
        for torus in tori {
            let h = bordered_hessian(&torus)?;
            let c = orbit_contribution(&poly, &torus, hbar)?;
            println!(
                "{:?}, ({:.3}, {:.3}), {:.5}, {}, {:.4e}, {:.4e}, {}, {:.4e}",
                m.0, torus.j[0], torus.j[1], c.action, c.maslov, h.det_direct, h.det_schur, h.signature, c.amplitude
            );
        }
    }
    Ok(())
}
