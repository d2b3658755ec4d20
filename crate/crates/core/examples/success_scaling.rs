//! Closed-form success probability against its Stirling form and the full
//! simulation.

use num_traits::ToPrimitive;

use noonsim::protocols::closed_form::{analytic_success_probability, rational_string, stirling_limit};
use noonsim::protocols::{build_even_circuit, optimal_schedule, resolve_phase_roots, run_circuit, PhaseVariant};

fn main() -> noonsim::Result<()> {
    println!("{:>3} {:>40} {:>12} {:>12} {:>9} {:>12}", "N", "exact", "", "stirling", "ratio", "simulated");
    for n in (2..=16).step_by(2) {
        let exact = analytic_success_probability(n)?;
        let e = exact.to_f64().unwrap_or(f64::NAN);
        let s = stirling_limit(n);
        let sim = if n <= 8 {
            let phases = resolve_phase_roots(n, PhaseVariant::ExactTarget)?;
            format!("{:.4e}", run_circuit(&build_even_circuit(n, &optimal_schedule(n)?, &phases)?)?.success_probability)
        } else {
            "-".into()
        };
        println!("{n:>3} {:>40} {e:>12.4e} {s:>12.4e} {:>9.6} {sim:>12}", rational_string(&exact), e / s);
    }
    Ok(())
}
