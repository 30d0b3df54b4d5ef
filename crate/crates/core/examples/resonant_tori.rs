//! Resonant tori at a fixed observation time and on an energy shell.

use nhim_otoc::normal_form::eckart_morse_synthetic;
use nhim_otoc::resonance::{
    enumerate_windings, solve_resonance_fixed_energy, solve_resonance_fixed_time, SolverConfig, WindingVector,
};

fn main() -> nhim_otoc::Result<()> {
    let poly = eckart_morse_synthetic();
    let cfg = SolverConfig::default();
    let t = 4.0;
    println!("fixed time t = {t}");
    let mut absent = 0;
    for m in enumerate_windings(2, 5) {
        match solve_resonance_fixed_time(&poly, &m, t, &cfg) {
            Ok(tori) if tori.is_empty() => absent += 1,
            Ok(tori) => {
                for torus in tori {
                    println!(
                        "  m = {:?}: J = ({:.4}, {:.4}), Lambda = {:.4}, residual {:.1e}",
                        m.0, torus.j[0], torus.j[1], torus.lambda, torus.frequency_residual()
                    );
                }
            }
            Err(_) => absent += 1,
        }
    }
    println!("  {absent} windings without a physical torus");

    let m = WindingVector::new([10, 7]);
    for e in [-0.6, -0.5, -0.4] {
        for torus in solve_resonance_fixed_energy(&poly, &m, e, &cfg)? {
            println!(
                "E = {e}: m = {:?}, J = ({:.4}, {:.4}), tau = {:.4}",
                m.0, torus.j[0], torus.j[1], torus.tau
            );
        }
    }
    Ok(())
}
