//! Lossy, non-resolving detectors: raising the tap transmission buys
//! fidelity at the cost of herald rate.

use noonsim::measurement::DetectorModel;
use noonsim::protocols::{asymptotic_probability, build_even_circuit, resolve_phase_roots, run_circuit, PhaseVariant};

fn main() -> noonsim::Result<()> {
    let phases = resolve_phase_roots(2, PhaseVariant::RootsEven)?;
    println!("{:>5} {:>5} {:>10} {:>12}", "eta", "t", "fidelity", "probability");
    for eta in [0.5, 0.8, 1.0] {
        let detector = DetectorModel::new(eta, false)?;
        for t in [0.5, 0.6, 0.7, 0.8, 0.9, 0.95] {
            let r = run_circuit(&build_even_circuit(2, &[t], &phases)?.with_detector(detector))?;
            println!("{eta:>5.2} {t:>5.2} {:>10.6} {:>12.4e}", r.fidelity, r.success_probability);
        }
    }
    println!("π_4 at η = 0.5: {:.6e}", asymptotic_probability(4, 0.5));
    Ok(())
}
