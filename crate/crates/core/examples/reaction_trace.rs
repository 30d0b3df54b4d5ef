//! Diagonal trace of the inverted-oscillator propagator: quadrature against
//! the stability factor, with the smooth and the hard cutoff.

use nhim_otoc::reaction_trace::{
    reaction_trace_analytic, reaction_trace_asymptotic, reaction_trace_quadrature, ReactionTraceConfig, Window,
};

fn main() -> nhim_otoc::Result<()> {
    let lambda = 0.7350;
    let taper = ReactionTraceConfig::default();
    let hard = ReactionTraceConfig {
        window: Window::Hard,
        ..ReactionTraceConfig::default()
    };
    println!("tau, |Tr| taper, |Tr| hard, 1/(2 sinh), e^(-L tau/2)");
    for tau in [2.0, 3.0, 4.0, 5.0, 6.0] {
        println!(
            "{tau}, {:.6e}, {:.6e}, {:.6e}, {:.6e}",
            reaction_trace_quadrature(lambda, tau, &taper)?.norm(),
            reaction_trace_quadrature(lambda, tau, &hard)?.norm(),
            reaction_trace_analytic(lambda, tau)?,
            reaction_trace_asymptotic(lambda, tau)?
        );
    }
    Ok(())
}
