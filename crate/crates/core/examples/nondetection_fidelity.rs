//! Heralding on "no click": a detector of efficiency η lets the unwanted
//! one-photon branch through with weight 1 - η.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use noonsim::fock::{ModeLabel, PureState};
use noonsim::measurement::{apply_povm, build_efficiency_povm, fidelity, DetectorModel, EnsembleState};
use noonsim::protocols::target_noon;

fn main() -> noonsim::Result<()> {
    let reg = vec![ModeLabel::scalar(0), ModeLabel::scalar(1), ModeLabel::scalar(2)];
    // (|2::0>|0> + |1,1>|1>)/√2: the wanted state only when mode 2 is empty.
    let c = |x: f64| Complex64::new(x, 0.0);
    let state = PureState::from_terms(
        reg.clone(),
        [(vec![2, 0, 0], c(0.5)), (vec![0, 2, 0], c(0.5)), (vec![1, 1, 1], c(FRAC_1_SQRT_2))],
    )?;
    let target = target_noon(2, 0, 0.0);
    for eta in [1.0, 0.9, 0.7, 0.5, 0.0] {
        let none = build_efficiency_povm(DetectorModel::new(eta, true)?, 0, 1)?;
        let (out, p) = apply_povm(&EnsembleState::pure(state.clone()), reg[2], &none)?;
        println!("η = {eta:.1}: P(no click) = {p:.3}, F = {:.6}", fidelity(&out, &target)?);
    }
    Ok(())
}
