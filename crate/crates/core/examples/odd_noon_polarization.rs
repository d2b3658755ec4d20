//! Odd N via single-photon subtraction through a polarizing beam splitter,
//! with the herald photon read in the diagonal basis or polarization-blind.

use noonsim::protocols::*;

fn main() -> noonsim::Result<()> {
    for n in [3, 5] {
        let phases = resolve_phase_roots(n, PhaseVariant::RootsOdd)?;
        for basis in [DetectionBasis::DiagonalProjection, DetectionBasis::PolarizationInsensitive] {
            let report = run_circuit(&build_odd_circuit(n, &optimal_schedule(n)?, &phases, basis)?)?;
            println!(
                "N = {n} {basis:?}: P = {:.4e}, F = {:.6}, {} branch(es)",
                report.success_probability,
                report.fidelity,
                report.output.len()
            );
        }
    }
    Ok(())
}
