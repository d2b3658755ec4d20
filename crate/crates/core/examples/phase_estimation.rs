//! Shot-noise vs Heisenberg scaling, closed form and sampled.

use std::f64::consts::FRAC_PI_2;

use noonsim::estimation::{monte_carlo_phase_estimate, precision_limits, ProbeKind, ProbeSpec};

fn main() -> noonsim::Result<()> {
    println!("{:>3} {:>13} {:>10} {:>10} {:>10}", "N", "probe", "Δφ", "sampled", "limit");
    for n in [1, 2, 4, 9, 16] {
        let phi = FRAC_PI_2 / f64::from(n);
        let (shot, heisenberg) = precision_limits(n);
        for (kind, limit) in [(ProbeKind::Uncorrelated, shot), (ProbeKind::Entangled, heisenberg)] {
            let probe = ProbeSpec::new(kind, n, phi)?;
            let mc = monte_carlo_phase_estimate(probe, 100_000, 1)?;
            println!("{n:>3} {kind:>13} {:>10.6} {:>10.6} {limit:>10.6}", probe.delta_phi().value(), mc.delta_phi.value());
        }
    }
    Ok(())
}
