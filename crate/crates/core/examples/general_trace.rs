//! Energy-shell tori with their own periods. The first admissible winding on
//! the preset shell is deep, so the sum is taken to depth 17.

use nhim_otoc::normal_form::eckart_morse_synthetic;
use nhim_otoc::otoc_trace::{assemble_trace, linspace, TraceConfig, TraceMode};
use nhim_otoc::resonance::SolverConfig;
use nhim_otoc::stability::ButterflyMode;

fn main() -> nhim_otoc::Result<()> {
    let cfg = TraceConfig {
        mode: TraceMode::General,
        m_max: 17,
        t_grid: linspace(2.0, 6.0, 9),
        butterfly: ButterflyMode::Exact,
        ..TraceConfig::default()
    };
    let s = assemble_trace(&eckart_morse_synthetic(), &cfg, &SolverConfig::default())?;
    let mut windings: Vec<_> = s.contributions.iter().map(|r| r.contribution.torus.winding.0.clone()).collect();
    windings.dedup();
    println!("{} orbit terms from windings {:?}", s.orbit_count, windings);
    for (t, c) in s.t.iter().zip(&s.c_e) {
        println!("t = {t:.1}: C_E = {c:+.6e}");
    }
    Ok(())
}
