//! Stacks two-photon elements on |N,N> and reports the heralded state.
//!
//! Run with an optional photon number: `cargo run --example even_noon -- 6`.

use noonsim::protocols::{build_even_circuit, optimal_schedule, resolve_phase_roots, run_circuit, PhaseVariant};

fn main() -> noonsim::Result<()> {
    let n: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    for variant in [PhaseVariant::RootsEven, PhaseVariant::ExactTarget] {
        let phases = resolve_phase_roots(n, variant)?;
        let circuit = build_even_circuit(n, &optimal_schedule(n)?, &phases)?;
        let report = run_circuit(&circuit)?;
        println!("{variant:?}: phases {:.4?}", phases.phases);
        println!("  per-element herald probabilities {}", report.element_probabilities.iter().map(|p| format!("{p:.4e}")).collect::<Vec<_>>().join(", "));
        println!("  P = {:.6e}  F = {:.12}  φ = {:.6}", report.success_probability, report.fidelity, report.achieved_phase);
        println!("  output {}", report.output.branches()[0].state);
    }
    Ok(())
}
