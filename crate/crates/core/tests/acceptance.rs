//! Acceptance criteria 1-10. Each test prints one `PASS`/`FAIL` line with
//! the measured values, then asserts. Tolerances are fixed below.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use noonsim::estimation::*;
use noonsim::fock::{ModeLabel, PureState};
use noonsim::measurement::{condition_coincidence, DetectorModel};
use noonsim::optics::{apply_beam_splitter, BeamSplitterSpec};
use noonsim::protocols::closed_form::*;
use noonsim::protocols::*;

const FIDELITY_TOL: f64 = 1e-9;
const HOM_NULL_TOL: f64 = 1e-14;
const HOM_SPLIT_TOL: f64 = 1e-12;
const PROBABILITY_TOL: f64 = 1e-12;
const CLOSED_FORM_FACTOR: f64 = 4.0;
const ARGMAX_TOL: f64 = 1e-6;
const RATIO_WINDOW: (f64, f64) = (0.98, 1.0);
const ESTIMATE_TOL: f64 = 1e-6;
const MONTE_CARLO_REL: f64 = 0.10;
const MONTE_CARLO_TRIALS: u64 = 100_000;
const MONTE_CARLO_SEED: u64 = 20_240_601;
const DETECTOR_FIDELITY_MIN: f64 = 0.9;
const FIXTURE_TOL: f64 = 1e-9;

fn verdict(id: &str, pass: bool, elapsed: Duration, limit: Duration, detail: String) {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "ACCEPTANCE {id} {}: {detail} [{:.3}s, limit {}s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "criterion {id}: {detail}");
    assert!(in_time, "criterion {id}: took {elapsed:?}, limit {limit:?}");
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[test]
fn criterion_01_hom_null() {
    let start = Instant::now();
    let ab = vec![ModeLabel::scalar(0), ModeLabel::scalar(1)];
    let input = PureState::basis_state(&[1, 1], ab.clone()).unwrap();
    let out = apply_beam_splitter(&input, &BeamSplitterSpec::balanced(ab[0], ab[1]).unwrap()).unwrap();
    let (_, coincidence) = condition_coincidence(&out, &[(ab[0], 1), (ab[1], 1)]).unwrap();
    let p20 = out.amplitude(&[2, 0]).norm_sqr();
    let p02 = out.amplitude(&[0, 2]).norm_sqr();
    let pass = coincidence <= HOM_NULL_TOL && (p20 - 0.5).abs() <= HOM_SPLIT_TOL && (p02 - 0.5).abs() <= HOM_SPLIT_TOL;
    verdict(
        "1",
        pass,
        start.elapsed(),
        Duration::from_secs(1),
        format!("HOM null: P(1,1) = {coincidence:e}, P(2,0) = {p20}, P(0,2) = {p02}"),
    );
}

#[test]
fn criterion_02_even_protocol() {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2u32, 4, 6, 8] {
        let ts = optimal_schedule(n).unwrap();
        let exact = run_circuit(&build_even_circuit(n, &ts, &resolve_phase_roots(n, PhaseVariant::ExactTarget).unwrap()).unwrap()).unwrap();
        let roots = run_circuit(&build_even_circuit(n, &ts, &resolve_phase_roots(n, PhaseVariant::RootsEven).unwrap()).unwrap()).unwrap();
        let roots_phase_ok = phase_distance(roots.achieved_phase, 0.0) < FIDELITY_TOL || phase_distance(roots.achieved_phase, PI) < FIDELITY_TOL;
        pass &= exact.fidelity >= 1.0 - FIDELITY_TOL
            && roots.fidelity >= 1.0 - FIDELITY_TOL
            && phase_distance(exact.achieved_phase, 0.0) < FIDELITY_TOL
            && roots_phase_ok;
        parts.push(format!(
            "N={n}: F_exact={:.12} φ={:.3}, F_roots={:.12} φ={:.3}",
            exact.fidelity, exact.achieved_phase, roots.fidelity, roots.achieved_phase
        ));
    }
    verdict("2", pass, start.elapsed(), Duration::from_secs(120), format!("even protocol; {}", parts.join("; ")));
}

fn odd_fidelity(n: u32, basis: DetectionBasis) -> f64 {
    let s = resolve_phase_roots(n, PhaseVariant::RootsOdd).unwrap();
    run_circuit(&build_odd_circuit(n, &optimal_schedule(n).unwrap(), &s, basis).unwrap()).unwrap().fidelity
}

#[test]
fn criterion_03a_odd_protocol_diagonal_basis() {
    let start = Instant::now();
    let f: Vec<f64> = [3, 5].iter().map(|&n| odd_fidelity(n, DetectionBasis::DiagonalProjection)).collect();
    let pass = f.iter().all(|&x| x >= 1.0 - FIDELITY_TOL);
    verdict(
        "3a",
        pass,
        start.elapsed(),
        Duration::from_secs(60),
        format!("odd protocol, diagonal basis: F(3) = {:.12}, F(5) = {:.12}", f[0], f[1]),
    );
}

/// The required value is 1/2. The simulated value is `1/C(2N, N)`: the
/// click polarization marks which arm lost the photon, so the output is a
/// mixture of `|N-k, k>` Fock states and only the `k = 0, N` terms overlap
/// the target.
#[test]
fn criterion_03b_odd_protocol_insensitive_basis() {
    let start = Instant::now();
    let f: Vec<f64> = [3, 5].iter().map(|&n| odd_fidelity(n, DetectionBasis::PolarizationInsensitive)).collect();
    let pass = f.iter().all(|&x| (x - 0.5).abs() <= FIDELITY_TOL);
    verdict(
        "3b",
        pass,
        start.elapsed(),
        Duration::from_secs(60),
        format!("odd protocol, insensitive basis: F(3) = {:.12}, F(5) = {:.12}, required 0.5 ± 1e-9", f[0], f[1]),
    );
}

#[test]
fn criterion_04_closed_form_probability() {
    let start = Instant::now();
    let p2 = analytic_success_probability(2).unwrap();
    let p4 = analytic_success_probability(4).unwrap();
    let mut pass = p2 == rat(1, 16) && p4 == rat(3, 4096);
    let sim2 = run_circuit(&build_even_circuit(2, &[0.5], &resolve_phase_roots(2, PhaseVariant::RootsEven).unwrap()).unwrap())
        .unwrap()
        .success_probability;
    pass &= (sim2 - 1.0 / 16.0).abs() <= PROBABILITY_TOL;
    let mut parts = vec![format!("p(2) = {}, p(4) = {}, simulated p(2) = {sim2}", rational_string(&p2), rational_string(&p4))];
    for n in [4u32, 6] {
        let s = resolve_phase_roots(n, PhaseVariant::ExactTarget).unwrap();
        let sim = run_circuit(&build_even_circuit(n, &optimal_schedule(n).unwrap(), &s).unwrap()).unwrap().success_probability;
        let closed = analytic_success_probability(n).unwrap().to_f64().unwrap();
        let ratio = sim / closed;
        pass &= (1.0 / CLOSED_FORM_FACTOR..=CLOSED_FORM_FACTOR).contains(&ratio);
        parts.push(format!("N={n}: simulated {sim:.6e}, closed form {closed:.6e}, ratio {ratio:.6}"));
    }
    verdict("4", pass, start.elapsed(), Duration::from_secs(60), parts.join("; "));
}

/// Golden-section search on [0, 1], then a 1e-9 grid around the result.
fn numeric_argmax(n: u32) -> f64 {
    let f = |t: f64| transmission_objective(n, t);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let centre = 0.5 * (lo + hi);
    (-2000..=2000)
        .map(|i| centre + f64::from(i) * 1e-9)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap()
}

#[test]
fn criterion_05_optimal_transmission() {
    let start = Instant::now();
    let worst = (2..=64u32)
        .map(|n| (numeric_argmax(n) - optimal_transmission(n).unwrap()).abs())
        .fold(0.0, f64::max);
    verdict(
        "5",
        worst <= ARGMAX_TOL,
        start.elapsed(),
        Duration::from_secs(5),
        format!("optimal transmission: max |argmax - (N-1)/N| over N = 2..64 is {worst:e}"),
    );
}

fn exact_over_asymptotic(n: u32) -> f64 {
    analytic_success_probability(n).unwrap().to_f64().unwrap() / asymptotic_probability(n, 1.0)
}

/// The required window is [0.98, 1.0]. Stirling's formula underestimates
/// `N!` by the factor `1 + 1/(12N) + ...`, so exact/asymptotic is above 1 at
/// every N (about 1.0105 at N = 8).
#[test]
fn criterion_06a_asymptotic_ratio_window() {
    let start = Instant::now();
    let ratio = exact_over_asymptotic(8);
    let pass = (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&ratio);
    verdict(
        "6a",
        pass,
        start.elapsed(),
        Duration::from_secs(5),
        format!(
            "exact/asymptotic at N=8 is {ratio:.6} (asymptotic/exact {:.6}), required within [{}, {}]",
            1.0 / ratio,
            RATIO_WINDOW.0,
            RATIO_WINDOW.1
        ),
    );
}

#[test]
fn criterion_06b_asymptotic_convergence_and_efficiency() {
    let start = Instant::now();
    let ratios: Vec<f64> = (2..=64).step_by(2).map(exact_over_asymptotic).collect();
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let converging = gaps.windows(2).all(|w| w[1] < w[0]);
    let exact_scaling = (1..=64u32).all(|n| {
        [0.1, 0.25, 0.5, 0.75, 0.9]
            .iter()
            .all(|&eta| asymptotic_probability(n, eta) == asymptotic_probability(n, 1.0) * eta.powi(n as i32))
    });
    verdict(
        "6b",
        converging && exact_scaling,
        start.elapsed(),
        Duration::from_secs(5),
        format!(
            "|exact/asymptotic - 1| strictly decreasing over N = 2..64 ({:.6} -> {:.6}): {converging}; π_N(η) = π_N(1) η^N exactly: {exact_scaling}",
            ratios[0],
            ratios[ratios.len() - 1]
        ),
    );
}

#[test]
fn criterion_07_estimation_limits() {
    let start = Instant::now();
    let mut worst_closed: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    for n in 1..=10u32 {
        let nf = f64::from(n);
        let cases = [
            (ProbeKind::Uncorrelated, PI / 3.0, 1.0 / nf.sqrt()),
            (ProbeKind::Entangled, PI / (2.0 * nf), 1.0 / nf),
        ];
        for (kind, phi, expect) in cases {
            let probe = ProbeSpec::new(kind, n, phi).unwrap();
            worst_closed = worst_closed.max((probe.delta_phi().value() - expect).abs());
            let mc = monte_carlo_phase_estimate(probe, MONTE_CARLO_TRIALS, MONTE_CARLO_SEED).unwrap();
            worst_mc = worst_mc.max((mc.delta_phi.value() - expect).abs() / expect);
        }
    }
    verdict(
        "7",
        worst_closed <= ESTIMATE_TOL && worst_mc <= MONTE_CARLO_REL,
        start.elapsed(),
        Duration::from_secs(30),
        format!("estimation limits: max closed-form error {worst_closed:e}, max Monte Carlo relative error {worst_mc:.4}"),
    );
}

#[test]
fn criterion_08_detector_tradeoff() {
    let start = Instant::now();
    // (t, fidelity) frozen from the first verified run.
    let fixtures = [
        (0.5, 16.0 / 49.0),
        (0.6, 4.0 / 9.0),
        (0.7, 0.572_680_788_897_005_1),
        (0.8, 256.0 / 361.0),
        (0.9, 144.0 / 169.0),
        (0.95, 0.925_492_709_501_682_5),
    ];
    let s = resolve_phase_roots(2, PhaseVariant::RootsEven).unwrap();
    let detector = DetectorModel::new(0.5, false).unwrap();
    let f: Vec<f64> = fixtures
        .iter()
        .map(|&(t, _)| run_circuit(&build_even_circuit(2, &[t], &s).unwrap().with_detector(detector)).unwrap().fidelity)
        .collect();
    let monotone = f.windows(2).all(|w| w[1] >= w[0]);
    let last = f[f.len() - 1];
    let matches = f.iter().zip(&fixtures).all(|(x, (_, y))| (x - y).abs() <= FIXTURE_TOL);
    verdict(
        "8",
        monotone && last > DETECTOR_FIDELITY_MIN && matches,
        start.elapsed(),
        Duration::from_secs(60),
        format!("N=2, η=0.5, click detectors: F(t) = {f:.6?}; monotone {monotone}; fixtures {matches}"),
    );
}

#[test]
fn criterion_09_nested_element() {
    let start = Instant::now();
    let two = target_noon(2, 0, 0.0);
    let three = target_noon(3, 0, 0.0);
    let r2 = nested_element(&two, &two, 0.5, PI / 2.0).unwrap();
    let r3 = nested_element(&three, &three, 0.5, PI / 3.0).unwrap();
    let pass = r2.fidelity >= 1.0 - FIDELITY_TOL
        && r2.target_photons == 2
        && r3.fidelity >= 1.0 - FIDELITY_TOL
        && r3.target_photons == 4;
    verdict(
        "9",
        pass,
        start.elapsed(),
        Duration::from_secs(30),
        format!(
            "nested: |2::0> pair -> F = {:.12} vs |{}::0>; |3::0> pair -> F = {:.12} vs |{}::0>",
            r2.fidelity, r2.target_photons, r3.fidelity, r3.target_photons
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let runs: [&[&str]; 5] = [
        &["verify", "--n", "2,3,4,5,6"],
        &["scan", "--n", "2", "--t", "0.3,0.4,0.5,0.6,0.7", "--format", "json"],
        &["detector", "--n", "2", "--eta", "0.5", "--t", "0.5,0.6,0.7,0.8,0.9,0.95"],
        &["estimate", "--n", "1,4,9", "--trials", "100000", "--seed", "7", "--workers", "2"],
        &["scaling", "--n", "2..=64:2"],
    ];
    let mut identical = 0;
    for args in runs {
        let a = Command::new(env!("CARGO_BIN_EXE_noonsim")).args(args).output().unwrap();
        let b = Command::new(env!("CARGO_BIN_EXE_noonsim")).args(args).output().unwrap();
        if a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty() {
            identical += 1;
        }
    }
    verdict(
        "10",
        identical == runs.len(),
        start.elapsed(),
        Duration::from_secs(120),
        format!("determinism: {identical}/{} CLI runs byte-identical on repeat", runs.len()),
    );
}
