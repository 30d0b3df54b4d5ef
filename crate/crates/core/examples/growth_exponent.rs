//! Log-slope of `C_E(t)`, for the full sum and for the dominant winding alone.

use nhim_otoc::normal_form::eckart_morse_synthetic;
use nhim_otoc::otoc_trace::{assemble_trace, fit_growth_exponent, TraceConfig};
use nhim_otoc::resonance::SolverConfig;

fn main() -> nhim_otoc::Result<()> {
    let poly = eckart_morse_synthetic();
    let s = assemble_trace(&poly, &TraceConfig::default(), &SolverConfig::default())?;
    let window = (2.0, 6.0);
    let full = fit_growth_exponent(&s.t, &s.c_e, window)?;
    println!(
        "full sum: slope {:.4} ({}, {} points); 1.5 Lambda(0) = {:.4}",
        full.slope,
        full.method,
        full.points,
        1.5 * poly.linear_rate()
    );
    if let Some(m) = s.dominant_winding() {
        let single = s.winding_series(&m);
        let lambdas: Vec<f64> = s
            .contributions
            .iter()
            .filter(|r| r.contribution.torus.winding == m)
            .map(|r| r.contribution.torus.lambda)
            .collect();
        match fit_growth_exponent(&s.t, &single, window) {
            Ok(fit) => println!(
                "winding {:?} ({} tori): slope {:.4}, 1.5 Lambda over its tori {:.4}..{:.4}",
                m.0,
                lambdas.len(),
                fit.slope,
                1.5 * lambdas.iter().cloned().fold(f64::INFINITY, f64::min),
                1.5 * lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            ),
            Err(e) => println!("winding {:?}: {e}", m.0),
        }
    }
    Ok(())
}
