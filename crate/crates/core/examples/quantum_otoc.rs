//! Grid OTOC of the inverted oscillator against `hbar^2 cosh^2(lambda t)`.

use nhim_otoc::oracle::{inverted_oscillator_otoc_exact, quantum_otoc_inverted_oscillator, QuantumGridConfig};
use nhim_otoc::otoc_trace::linspace;

fn main() -> nhim_otoc::Result<()> {
    let (lambda, hbar, l) = (0.7350, 0.05, 20.0);
    let mut cfg = QuantumGridConfig::auto(lambda, hbar, l, vec![]);
    let t_e = cfg.ehrenfest_time();
    cfg = QuantumGridConfig::auto(lambda, hbar, l, linspace(0.0, 0.8 * t_e, 9));
    println!("t_E = {t_e:.3}, grid {} points on [-{:.2}, {:.2}]", cfg.n_points, cfg.box_half_length, cfg.box_half_length);
    let q = quantum_otoc_inverted_oscillator(&cfg)?;
    for (t, c) in q.t.iter().zip(&q.c) {
        let exact = inverted_oscillator_otoc_exact(lambda, hbar, *t);
        println!("t = {t:.3}: C = {c:.6e}, exact {exact:.6e}, ratio {:.6}", c / exact);
    }
    println!("norm defect {:.1e}, edge probability {:.1e}", q.norm_defect, q.edge_leak);
    Ok(())
}
