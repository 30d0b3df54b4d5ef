//! `C_E(t)` from resonant tori, with per-depth convergence residuals.

use nhim_otoc::normal_form::eckart_morse_synthetic;
use nhim_otoc::otoc_trace::{assemble_trace, TraceConfig};
use nhim_otoc::resonance::SolverConfig;

fn main() -> nhim_otoc::Result<()> {
    let s = assemble_trace(&eckart_morse_synthetic(), &TraceConfig::default(), &SolverConfig::default())?;
    println!("{} orbit terms, {} skipped windings", s.orbit_count, s.skips.len());
    for (i, t) in s.t.iter().enumerate().step_by(8) {
        let res: Vec<String> = s.residuals.iter().map(|r| format!("{:.1e}", r[i])).collect();
        println!("t = {t:.2}: C_E = {:+.6e}, residuals [{}]", s.c_e[i], res.join(", "));
    }
    if let Some(m) = s.dominant_winding() {
        println!("dominant winding {:?}", m.0);
    }
    Ok(())
}
