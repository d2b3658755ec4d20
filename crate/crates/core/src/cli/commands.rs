use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::config::{CommandKind, RunConfig};
use super::report::{Cell, Report};
use super::CliError;
use crate::estimation::{monte_carlo_phase_estimate, precision_limits, ProbeSpec};
use crate::measurement::DetectorModel;
use crate::protocols::closed_form::{
    analytic_success_probability, asymptotic_probability, optimal_transmission, rational_string, stirling_limit,
};
use crate::protocols::{build_even_circuit, build_odd_circuit, resolve_phase_roots, run_circuit};

/// Result of a command: the report and whether every verification passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
}

/// Runs `config` on the current rayon pool.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.command {
        CommandKind::Verify | CommandKind::Detector => simulate(config),
        CommandKind::Scan if config.closed_form => Ok(Outcome { report: closed_form_scan(config), passed: true }),
        CommandKind::Scan => simulate(config),
        CommandKind::Estimate => estimate(config),
        CommandKind::Scaling => Ok(Outcome { report: scaling(config), passed: true }),
    }
}

const SIM_COLUMNS: [&str; 16] = [
    "n",
    "elements",
    "t",
    "eta",
    "resolving",
    "phase_variant",
    "basis",
    "success_probability",
    "fidelity",
    "achieved_phase",
    "closed_form",
    "closed_form_exact",
    "asymptotic",
    "ratio",
    "threshold",
    "passed",
];

#[derive(Clone, Copy, Debug)]
struct Point {
    n: u32,
    t: f64,
    eta: f64,
}

fn simulate(config: &RunConfig) -> Result<Outcome, CliError> {
    let points: Vec<Point> = config
        .n
        .iter()
        .flat_map(|&n| {
            config
                .t
                .values_for(n)
                .into_iter()
                .flat_map(move |t| config.eta.iter().map(move |&eta| Point { n, t, eta }))
        })
        .collect();
    let rows = points.par_iter().map(|p| simulate_point(config, *p)).collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(config, SIM_COLUMNS.to_vec());
    let mut passed = true;
    for (row, ok) in rows {
        passed &= ok.unwrap_or(true);
        report.push(row);
    }
    Ok(Outcome { report, passed })
}

fn simulate_point(config: &RunConfig, p: Point) -> Result<(Vec<Cell>, Option<bool>), CliError> {
    let variant = config.phase_variant.resolve(p.n);
    let schedule = resolve_phase_roots(p.n, variant)?;
    let even = p.n.is_multiple_of(2);
    let elements = if even { p.n / 2 } else { p.n } as usize;
    let ts = vec![p.t; elements];
    let circuit = if even {
        build_even_circuit(p.n, &ts, &schedule)?
    } else {
        build_odd_circuit(p.n, &ts, &schedule, config.basis.resolve())?
    };
    let detector = DetectorModel::new(p.eta, config.resolving())?;
    let r = run_circuit(&circuit.with_detector(detector))?;
    let exact = if even { Some(analytic_success_probability(p.n)?) } else { None };
    let closed = exact.as_ref().and_then(|e| e.to_f64());
    let verifying = config.command == CommandKind::Verify;
    let ok = verifying.then_some(r.fidelity >= config.threshold);
    let row = vec![
        Cell::Int(i64::from(p.n)),
        Cell::Int(elements as i64),
        Cell::real(p.t),
        Cell::real(p.eta),
        Cell::Bool(config.resolving()),
        Cell::text(config.phase_variant.name()),
        if even { Cell::Null } else { Cell::text(config.basis.name()) },
        Cell::real(r.success_probability),
        Cell::real(r.fidelity),
        Cell::real(r.achieved_phase),
        Cell::opt_real(closed),
        exact.as_ref().map_or(Cell::Null, |e| Cell::text(rational_string(e))),
        Cell::real(asymptotic_probability(p.n, p.eta)),
        Cell::opt_real(closed.filter(|c| *c > 0.0).map(|c| r.success_probability / c)),
        if verifying { Cell::real(config.threshold) } else { Cell::Null },
        ok.map_or(Cell::Null, Cell::Bool),
    ];
    Ok((row, ok))
}

fn closed_form_scan(config: &RunConfig) -> Report {
    let mut report = Report::new(config, vec!["n", "t", "eta", "closed_form", "closed_form_exact", "asymptotic"]);
    for &n in &config.n {
        let exact = analytic_success_probability(n).ok();
        for &eta in &config.eta {
            report.push(vec![
                Cell::Int(i64::from(n)),
                Cell::opt_real(optimal_transmission(n).ok()),
                Cell::real(eta),
                Cell::opt_real(exact.as_ref().and_then(|e| e.to_f64())),
                exact.as_ref().map_or(Cell::Null, |e| Cell::text(rational_string(e))),
                Cell::real(asymptotic_probability(n, eta)),
            ]);
        }
    }
    report
}

fn scaling(config: &RunConfig) -> Report {
    let mut report = Report::new(config, vec!["n", "eta", "exact", "exact_rational", "stirling", "ratio", "asymptotic"]);
    for &n in &config.n {
        let exact = analytic_success_probability(n).ok();
        let exact_f = exact.as_ref().and_then(|e| e.to_f64());
        let limit = stirling_limit(n);
        for &eta in &config.eta {
            report.push(vec![
                Cell::Int(i64::from(n)),
                Cell::real(eta),
                Cell::opt_real(exact_f),
                exact.as_ref().map_or(Cell::Null, |e| Cell::text(rational_string(e))),
                Cell::real(limit),
                Cell::opt_real(exact_f.map(|e| e / limit)),
                Cell::real(asymptotic_probability(n, eta)),
            ]);
        }
    }
    report
}

fn estimate(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = Report::new(
        config,
        vec![
            "kind",
            "n",
            "phi",
            "trials",
            "mean",
            "variance",
            "delta_phi",
            "mc_mean",
            "mc_variance",
            "mc_delta_phi",
            "singular",
            "shot_noise",
            "heisenberg",
        ],
    );
    for &kind in &config.kinds {
        for &n in &config.n {
            let phis = config.phi.clone().unwrap_or_else(|| vec![std::f64::consts::FRAC_PI_2 / f64::from(n)]);
            for phi in phis {
                let probe = ProbeSpec::new(kind, n, phi)?;
                let closed = probe.delta_phi();
                let mc = monte_carlo_phase_estimate(probe, config.trials, config.seed)?;
                let (shot, heisenberg) = precision_limits(n);
                report.push(vec![
                    Cell::text(kind.to_string()),
                    Cell::Int(i64::from(n)),
                    Cell::real(phi),
                    Cell::Int(config.trials as i64),
                    Cell::real(probe.mean(phi)),
                    Cell::real(probe.variance(phi)),
                    Cell::real(closed.value()),
                    Cell::real(mc.mean),
                    Cell::real(mc.variance),
                    Cell::real(mc.delta_phi.value()),
                    Cell::Bool(closed.is_singular()),
                    Cell::real(shot),
                    Cell::real(heisenberg),
                ]);
            }
        }
    }
    Ok(Outcome { report, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{BasisChoice, TSpec};

    fn col(o: &Outcome, name: &str) -> Vec<f64> {
        o.report.column(name).unwrap().iter().map(|c| c.as_f64().unwrap_or(f64::NAN)).collect()
    }

    #[test]
    fn verify_examples() {
        let c = RunConfig { n: vec![2], t: TSpec::Values(vec![0.5]), ..Default::default() };
        let o = execute(&c).unwrap();
        assert!(o.passed);
        assert!((col(&o, "success_probability")[0] - 1.0 / 16.0).abs() < 1e-12);
        assert!((col(&o, "fidelity")[0] - 1.0).abs() < 1e-12);

        let c = RunConfig { n: vec![3], ..Default::default() };
        assert!(execute(&c).unwrap().passed);

        let c = RunConfig { n: vec![5], ..Default::default() };
        let o = execute(&c).unwrap();
        assert!((col(&o, "t")[0] - 0.8).abs() < 1e-15);
        assert_eq!(o.report.column("elements").unwrap()[0], &Cell::Int(5));

        let c = RunConfig { n: vec![3], basis: BasisChoice::Insensitive, ..Default::default() };
        assert!(!execute(&c).unwrap().passed);
    }

    #[test]
    fn scan_examples() {
        let c = RunConfig {
            command: CommandKind::Scan,
            n: vec![2],
            t: TSpec::Values(vec![0.3, 0.4, 0.5, 0.6, 0.7]),
            ..Default::default()
        };
        let p = col(&execute(&c).unwrap(), "success_probability");
        let best = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 2);

        let c = RunConfig { command: CommandKind::Scan, closed_form: true, n: (2..=16).step_by(2).collect(), ..Default::default() };
        let p = col(&execute(&c).unwrap(), "closed_form");
        assert!(p.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn detector_examples() {
        let c = RunConfig { command: CommandKind::Detector, n: vec![2], eta: vec![1.0], resolving: Some(true), ..Default::default() };
        assert!((col(&execute(&c).unwrap(), "fidelity")[0] - 1.0).abs() < 1e-12);
        // A click detector cannot reject three-photon taps even at unit efficiency.
        let c = RunConfig { command: CommandKind::Detector, n: vec![2], eta: vec![1.0], ..Default::default() };
        assert!((col(&execute(&c).unwrap(), "fidelity")[0] - 4.0 / 9.0).abs() < 1e-12);

        let c = RunConfig {
            command: CommandKind::Detector,
            n: vec![2],
            eta: vec![0.5],
            t: TSpec::Values(vec![0.5, 0.6, 0.7, 0.8, 0.9, 0.95]),
            ..Default::default()
        };
        let f = col(&execute(&c).unwrap(), "fidelity");
        assert!(f.windows(2).all(|w| w[1] >= w[0]), "{f:?}");

        let c = RunConfig { command: CommandKind::Detector, n: vec![4], eta: vec![0.5], ..Default::default() };
        let pi = col(&execute(&c).unwrap(), "asymptotic")[0];
        let expect = (32.0 * std::f64::consts::PI).sqrt() * (0.5 / (4.0 * std::f64::consts::E)).powi(4);
        assert!((pi - expect).abs() < 1e-15 * expect.max(1e-300) * 10.0);
    }

    #[test]
    fn estimate_examples() {
        let c = RunConfig { command: CommandKind::Estimate, n: vec![1, 4, 9], trials: 1000, ..Default::default() };
        let o = execute(&c).unwrap();
        let d = col(&o, "delta_phi");
        let expect = [1.0, 0.5, 1.0 / 3.0, 1.0, 0.25, 1.0 / 9.0];
        assert!(d.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-6), "{d:?}");

        let c = RunConfig { command: CommandKind::Estimate, n: vec![2], phi: Some(vec![0.0]), trials: 10, ..Default::default() };
        let o = execute(&c).unwrap();
        assert_eq!(o.report.column("singular").unwrap()[1], &Cell::Bool(true));
        assert_eq!(o.report.column("delta_phi").unwrap()[1], &Cell::Null);
    }

    #[test]
    fn scaling_examples() {
        let c = RunConfig { command: CommandKind::Scaling, n: vec![8], ..Default::default() };
        let o = execute(&c).unwrap();
        assert!((col(&o, "exact")[0] - 7.33e-8).abs() < 0.01e-8);
        assert!((col(&o, "stirling")[0] - 7.26e-8).abs() < 0.01e-8);
        assert_eq!(col(&o, "asymptotic")[0], col(&o, "stirling")[0]);
    }
}
