//! Every independent check, as printed by `nhim-otoc check`.
//!
//! `cargo run --release --example oracle_suite [--quick]`

fn main() -> nhim_otoc::Result<()> {
    let quick = std::env::args().any(|a| a == "--quick");
    let rows = nhim_otoc::oracle::run_suite(quick)?;
    for r in &rows {
        println!("{r}");
    }
    if rows.iter().any(|r| !r.passed()) {
        std::process::exit(3);
    }
    Ok(())
}
