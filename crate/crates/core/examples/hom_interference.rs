//! Two photons meeting on a balanced beam splitter never leave by
//! different ports.

use noonsim::fock::{ModeLabel, PureState};
use noonsim::measurement::condition_coincidence;
use noonsim::optics::{apply_beam_splitter, BeamSplitterSpec};

fn main() -> noonsim::Result<()> {
    let (a, b) = (ModeLabel::scalar(0), ModeLabel::scalar(1));
    let input = PureState::basis_state(&[1, 1], vec![a, b])?;
    for t in [0.5, 0.6, 0.8] {
        let out = apply_beam_splitter(&input, &BeamSplitterSpec::new(a, b, t)?)?;
        let (_, p11) = condition_coincidence(&out, &[(a, 1), (b, 1)])?;
        println!("t = {t:.1}: {out}");
        println!("         P(1,1) = {p11:.6}");
    }
    Ok(())
}
