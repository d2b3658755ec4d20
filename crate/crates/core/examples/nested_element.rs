//! Feeds |N::0> into both the main and ancilla ports of one two-photon
//! element and heralds |2N-2::0>.

use std::f64::consts::PI;

use noonsim::protocols::{nested_element, target_noon};

fn main() -> noonsim::Result<()> {
    for n in [2u32, 3, 4] {
        let noon = target_noon(n, 0, 0.0);
        for phase in [0.0, PI / f64::from(n)] {
            let r = nested_element(&noon, &noon, 0.5, phase)?;
            println!(
                "N = {n}, φ = {phase:.4}: |{}::0> with F = {:.9}, P = {:.4e}",
                r.target_photons, r.fidelity, r.success_probability
            );
        }
    }
    Ok(())
}
