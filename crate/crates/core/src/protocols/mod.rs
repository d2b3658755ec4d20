//! Detection-heralded construction of two-mode `|N::0>` states.
//!
//! Three element kinds are built here, all acting on main modes `a` and `b`:
//!
//! * **even**: tap two photons from `a` or `b` onto ancillas `c`, `d`,
//!   recombine the ancillas on a 50:50 splitter and herald on one click in
//!   each output. Since `|1,1>` cannot produce a coincidence there, the
//!   heralded action on the main modes is `∝ a² + e^{iφ} b²`.
//! * **odd**: tap one photon, rotate the `b` tap to V, merge both taps on a
//!   polarizing beam splitter and herald on a single click in the common
//!   port; the empty port is traced out. With a diagonal-basis herald the
//!   action is `∝ a + e^{iφ} b`.
//! * **nested**: the even element with `|N::0>` states fed into both the
//!   main and the ancilla ports.
//!
//! Elements are evaluated one at a time. Each brings in its own ancillas,
//! which are measured or traced out before the next element starts, so the
//! live registry never grows beyond the main modes plus one element's
//! ancillas.

pub mod closed_form;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeLabel, PureState};
use crate::measurement::{apply_detector, trace_out_mode, DetectorModel, EnsembleState};
use crate::optics::{apply_element, BeamSplitterSpec, ElementSpec, PolarizingBeamSplitter};

pub use closed_form::{
    analytic_success_probability, asymptotic_probability, optimal_transmission, reflection_distribution,
    stirling_limit, transmission_objective,
};

/// Main modes for unpolarized protocols.
pub const MAIN_MODES: [ModeLabel; 2] = [ModeLabel::scalar(0), ModeLabel::scalar(1)];

/// Main modes for the polarization-based odd protocol.
pub const POLARIZED_MAIN_MODES: [ModeLabel; 2] = [ModeLabel::h(0), ModeLabel::h(1)];

/// `(|P,Q> + e^{iφ}|Q,P>)/√2` on [`MAIN_MODES`]. For `P == Q` this is the
/// single ket `|P,P>`.
pub fn target_noon(p: u32, q: u32, phase: f64) -> PureState {
    target_noon_on(MAIN_MODES, p, q, phase).expect("main modes form a valid registry")
}

pub fn target_noon_on(modes: [ModeLabel; 2], p: u32, q: u32, phase: f64) -> Result<PureState> {
    let registry = modes.to_vec();
    if p == q {
        return PureState::basis_state(&[p, p], registry);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_terms(
        registry,
        [(vec![p, q], Complex64::new(s, 0.0)), (vec![q, p], Complex64::from_polar(s, phase))],
    )
}

/// Fidelity against `|N::0>^φ` maximized over `φ`, with the maximizing `φ`.
///
/// With `α_i`, `β_i` the `|N,0>` and `|0,N>` amplitudes of branch `i`,
/// `F(φ) = ½ Σ w_i (|α_i|² + |β_i|²) + Re(e^{-iφ} C)` for
/// `C = Σ w_i conj(α_i) β_i`, so the optimum is `φ = arg C`.
pub fn noon_fidelity(ensemble: &EnsembleState, n: u32) -> (f64, f64) {
    if n == 0 {
        let f: f64 = ensemble.branches().iter().map(|b| b.weight * b.state.amplitude(&[0, 0]).norm_sqr()).sum();
        return (f.clamp(0.0, 1.0), 0.0);
    }
    let mut diag = 0.0;
    let mut coherence = Complex64::new(0.0, 0.0);
    for b in ensemble.branches() {
        let alpha = b.state.amplitude(&[n, 0]);
        let beta = b.state.amplitude(&[0, n]);
        diag += b.weight * (alpha.norm_sqr() + beta.norm_sqr());
        coherence += alpha.conj() * beta * b.weight;
    }
    let fidelity = (0.5 * diag + coherence.norm()).clamp(0.0, 1.0);
    let phase = if coherence.norm() > 1e-12 { wrap_phase(coherence.arg()) } else { 0.0 };
    (fidelity, phase)
}

/// Maps an angle into `[0, 2π)`, snapping values within 1e-12 of 0 or `2π`
/// to 0.
pub fn wrap_phase(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w < 1e-12 || TAU - w < 1e-12 {
        0.0
    } else {
        w
    }
}

/// Circular distance between two angles.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseVariant {
    /// `φ_k = 4πk/N`, `k = 1..N/2`.
    RootsEven,
    /// `φ_k = 2πk/N`, `k = 1..N`.
    RootsOdd,
    /// Phases whose factor product is exactly `x^M + y^M`.
    ExactTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub phases: Vec<f64>,
    pub variant: PhaseVariant,
}

impl PhaseSchedule {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Phase schedule for an `N`-photon stack.
///
/// For the even protocol there are `M = N/2` factors `x + e^{iφ_k} y` with
/// `x = a²`, `y = b²`; for the odd one `M = N` with `x = a`, `y = b`. The
/// exact-target phases put `-e^{iφ_k}` on the roots of `z^M = -1`, so that
/// `Π_k (x + e^{iφ_k} y) = x^M + y^M` for either parity of `M`.
pub fn resolve_phase_roots(n: u32, variant: PhaseVariant) -> Result<PhaseSchedule> {
    if n < 2 {
        return Err(Error::TooFewPhotons(n as usize));
    }
    let nf = f64::from(n);
    let phases = match variant {
        PhaseVariant::RootsEven => {
            if !n.is_multiple_of(2) {
                return Err(Error::Parity { n: n as usize, expected: "roots-even" });
            }
            (1..=n / 2).map(|k| 4.0 * PI * f64::from(k) / nf).collect()
        }
        PhaseVariant::RootsOdd => {
            if n.is_multiple_of(2) {
                return Err(Error::Parity { n: n as usize, expected: "roots-odd" });
            }
            (1..=n).map(|k| 2.0 * PI * f64::from(k) / nf).collect()
        }
        PhaseVariant::ExactTarget => {
            let factors = if n.is_multiple_of(2) { n / 2 } else { n };
            let m = f64::from(factors);
            let mut p: Vec<f64> = (1..=factors)
                .map(|k| wrap_phase(PI + PI * f64::from(2 * k - 1) / m))
                .collect();
            p.sort_by(f64::total_cmp);
            p
        }
    };
    Ok(PhaseSchedule { phases, variant })
}

/// How the odd element's single click is registered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionBasis {
    /// Click photon projected onto `(|H> + |V>)/√2`.
    DiagonalProjection,
    /// Click counted regardless of polarization.
    PolarizationInsensitive,
}

/// A detector over one or more sub-modes that must register `clicks`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub modes: Vec<ModeLabel>,
    pub clicks: usize,
}

/// One stacked element: ancillas are joined in `ancilla_state`, the optical
/// elements act, detectors herald, and `traced` modes go to the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGroup {
    pub ancilla_state: PureState,
    pub elements: Vec<ElementSpec>,
    pub detections: Vec<Detection>,
    pub traced: Vec<ModeLabel>,
    pub transmission: f64,
    pub phase: f64,
}

impl ElementGroup {
    pub fn ancillas(&self) -> &[ModeLabel] {
        self.ancilla_state.registry()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub main_modes: [ModeLabel; 2],
    pub input: PureState,
    pub groups: Vec<ElementGroup>,
    pub detector: DetectorModel,
    /// Photon number of the intended `|N::0>` output.
    pub target_photons: u32,
}

impl Circuit {
    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = detector;
        self
    }

    pub fn transmissions(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.transmission).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.phase).collect()
    }

    /// Every detection must sit on the group's own ancillas.
    pub fn validate(&self) -> Result<()> {
        if self.input.registry() != self.main_modes.as_slice() {
            return Err(Error::RegistryMismatch);
        }
        for g in &self.groups {
            for d in &g.detections {
                for m in &d.modes {
                    if self.main_modes.contains(m) {
                        return Err(Error::DetectsMainMode(*m));
                    }
                    if !g.ancillas().contains(m) {
                        return Err(Error::UnknownMode(*m));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolReport {
    pub output: EnsembleState,
    pub success_probability: f64,
    /// Fidelity against `|N::0>^φ`, maximized over `φ`.
    pub fidelity: f64,
    pub achieved_phase: f64,
    pub element_probabilities: Vec<f64>,
    pub target_photons: u32,
    pub transmissions: Vec<f64>,
    pub phases: Vec<f64>,
}

impl ProtocolReport {
    pub fn target(&self) -> Result<PureState> {
        let modes = [self.output.registry()[0], self.output.registry()[1]];
        target_noon_on(modes, self.target_photons, 0, self.achieved_phase)
    }
}

fn check_schedule(elements: usize, transmissions: &[f64], phases: &PhaseSchedule) -> Result<()> {
    if transmissions.len() != elements {
        return Err(Error::ScheduleLength { expected: elements, got: transmissions.len() });
    }
    if phases.len() != elements {
        return Err(Error::ScheduleLength { expected: elements, got: phases.len() });
    }
    for &t in transmissions {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidTransmission(t));
        }
    }
    Ok(())
}

/// `(N-1)/N` for every element of an `N`-photon stack.
pub fn optimal_schedule(n: u32) -> Result<Vec<f64>> {
    let t = optimal_transmission(n)?;
    let elements = if n.is_multiple_of(2) { n / 2 } else { n };
    Ok(vec![t; elements as usize])
}

fn tap_and_recombine(a: ModeLabel, b: ModeLabel, c: ModeLabel, d: ModeLabel, t: f64) -> Result<Vec<ElementSpec>> {
    Ok(vec![
        ElementSpec::BeamSplitter(BeamSplitterSpec::new(a, c, t)?),
        ElementSpec::BeamSplitter(BeamSplitterSpec::new(b, d, t)?),
    ])
}

/// Even-`N` stack of `N/2` two-photon elements on `|N,N>`.
///
/// The tunable phase of element `k` sits on the `b` tap arm, at half the
/// schedule angle, so element `k` acts on the main modes as exactly
/// `a² + e^{iφ_k} b²` and the stack as the ordered product of those factors.
pub fn build_even_circuit(n: u32, transmissions: &[f64], phases: &PhaseSchedule) -> Result<Circuit> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Parity { n: n as usize, expected: "even" });
    }
    if phases.variant == PhaseVariant::RootsOdd {
        return Err(Error::Parity { n: n as usize, expected: "roots-odd" });
    }
    check_schedule((n / 2) as usize, transmissions, phases)?;
    let [a, b] = MAIN_MODES;
    let groups = transmissions
        .iter()
        .zip(&phases.phases)
        .enumerate()
        .map(|(k, (&t, &phi))| {
            let c = ModeLabel::scalar(2 + 2 * k as u16);
            let d = ModeLabel::scalar(3 + 2 * k as u16);
            let mut elements = tap_and_recombine(a, b, c, d, t)?;
            elements.push(ElementSpec::PhaseShift { mode: d, angle: phi / 2.0 });
            elements.push(ElementSpec::BeamSplitter(BeamSplitterSpec::balanced(c, d)?));
            Ok(ElementGroup {
                ancilla_state: PureState::vacuum(vec![c, d])?,
                elements,
                detections: vec![Detection { modes: vec![c], clicks: 1 }, Detection { modes: vec![d], clicks: 1 }],
                traced: vec![],
                transmission: t,
                phase: phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Circuit {
        main_modes: MAIN_MODES,
        input: PureState::basis_state(&[n, n], MAIN_MODES.to_vec())?,
        groups,
        detector: DetectorModel::perfect(),
        target_photons: n,
    })
}

/// Odd-`N` stack of `N` single-photon elements on `|N,N>` (H polarized).
///
/// Per element: taps on `(a, c)` and `(b, d)`, the schedule phase on the `d`
/// tap, a π/2 rotation turning the `d` photon to V, a PBS sending both taps
/// into port `c`, one click there, and port `d` traced out. Port `c` reaches
/// the herald with `a` photons as H and `b` photons as `i`·V, so the `d` arm
/// phase is offset by `-π/2` to make the diagonal-basis action exactly
/// `a + e^{iφ_k} b`.
pub fn build_odd_circuit(n: u32, transmissions: &[f64], phases: &PhaseSchedule, basis: DetectionBasis) -> Result<Circuit> {
    if n.is_multiple_of(2) {
        return Err(Error::Parity { n: n as usize, expected: "odd" });
    }
    if phases.variant == PhaseVariant::RootsEven {
        return Err(Error::Parity { n: n as usize, expected: "roots-even" });
    }
    check_schedule(n as usize, transmissions, phases)?;
    let [a, b] = POLARIZED_MAIN_MODES;
    let groups = transmissions
        .iter()
        .zip(&phases.phases)
        .enumerate()
        .map(|(k, (&t, &phi))| {
            let c = 2 + 2 * k as u16;
            let d = 3 + 2 * k as u16;
            let ancillas = vec![ModeLabel::h(c), ModeLabel::v(c), ModeLabel::h(d), ModeLabel::v(d)];
            let mut elements = tap_and_recombine(a, b, ModeLabel::h(c), ModeLabel::h(d), t)?;
            elements.push(ElementSpec::PhaseShift { mode: ModeLabel::h(d), angle: phi - FRAC_PI_2 });
            elements.push(ElementSpec::PolarizationRotation { spatial: d, angle: FRAC_PI_2 });
            elements.push(ElementSpec::PolarizingBeamSplitter(PolarizingBeamSplitter { input_1: c, input_2: d }));
            let detections = match basis {
                DetectionBasis::DiagonalProjection => {
                    // Rotate so the diagonal component lands in H.
                    elements.push(ElementSpec::PolarizationRotation { spatial: c, angle: -FRAC_PI_4 });
                    vec![
                        Detection { modes: vec![ModeLabel::h(c)], clicks: 1 },
                        Detection { modes: vec![ModeLabel::v(c)], clicks: 0 },
                    ]
                }
                DetectionBasis::PolarizationInsensitive => {
                    vec![Detection { modes: vec![ModeLabel::h(c), ModeLabel::v(c)], clicks: 1 }]
                }
            };
            Ok(ElementGroup {
                ancilla_state: PureState::vacuum(ancillas)?,
                elements,
                detections,
                traced: vec![ModeLabel::h(d), ModeLabel::v(d)],
                transmission: t,
                phase: phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Circuit {
        main_modes: POLARIZED_MAIN_MODES,
        input: PureState::basis_state(&[n, n], POLARIZED_MAIN_MODES.to_vec())?,
        groups,
        detector: DetectorModel::perfect(),
        target_photons: n,
    })
}

/// Runs one element on an ensemble; returns the heralded ensemble and the
/// conditional probability of the herald.
fn run_group(ensemble: &EnsembleState, group: &ElementGroup, detector: DetectorModel) -> Result<(EnsembleState, f64)> {
    let mut ens = ensemble.extend_with(&group.ancilla_state)?;
    ens = ens.try_map_states(|s| group.elements.iter().try_fold(s.clone(), |acc, e| apply_element(&acc, e)))?;
    let mut probability = 1.0;
    for det in &group.detections {
        let (next, p) = apply_detector(&ens, &det.modes, detector, det.clicks)?;
        ens = next;
        probability *= p;
    }
    for &m in &group.traced {
        ens = trace_out_mode(&ens, m)?;
    }
    ens.consolidate();
    if ens.is_empty() {
        probability = 0.0;
    }
    Ok((ens, probability))
}

/// Runs every element in order. A herald with probability zero ends the run
/// with an empty output and success probability 0.
pub fn run_circuit(circuit: &Circuit) -> Result<ProtocolReport> {
    circuit.validate()?;
    let (input, _) = circuit.input.normalize();
    let mut ens = EnsembleState::pure(input);
    let mut element_probabilities = Vec::with_capacity(circuit.groups.len());
    for group in &circuit.groups {
        let (next, p) = run_group(&ens, group, circuit.detector)?;
        ens = next;
        element_probabilities.push(p);
        if p == 0.0 {
            break;
        }
    }
    let success_probability = element_probabilities.iter().product();
    let (fidelity, achieved_phase) = noon_fidelity(&ens, circuit.target_photons);
    Ok(ProtocolReport {
        output: ens,
        success_probability,
        fidelity,
        achieved_phase,
        element_probabilities,
        target_photons: circuit.target_photons,
        transmissions: circuit.transmissions(),
        phases: circuit.phases(),
    })
}

/// Unnormalized heralded action of one element on a pure input, for
/// perfect detectors. Errors if the herald leaves a mixture.
pub fn herald_action(group: &ElementGroup, input: &PureState) -> Result<PureState> {
    let (normalized, norm) = input.normalize();
    if norm == 0.0 {
        return Ok(normalized);
    }
    let (out, p) = run_group(&EnsembleState::pure(normalized), group, DetectorModel::perfect())?;
    match out.branches() {
        [] => PureState::zero(out.registry().to_vec()),
        [only] => Ok(only.state.scale(Complex64::new(norm * p.sqrt(), 0.0))),
        many => Err(Error::NotSingleBranch(many.len())),
    }
}

/// Returns `N` if `state` is a two-mode state supported on `|N,0>`, `|0,N>`.
fn noon_photons(state: &PureState) -> Result<u32> {
    if state.registry().len() != 2 || state.is_zero() {
        return Err(Error::NotNoonForm);
    }
    let n = state.max_photons();
    if n == 0 {
        return Err(Error::NotNoonForm);
    }
    for (k, _) in state.terms() {
        let occ = k.occupations();
        if !(occ == [n, 0] || occ == [0, n]) {
            return Err(Error::NotNoonForm);
        }
    }
    Ok(n)
}

/// The two-photon element with `|N::0>` states in both the main ports
/// (`left`, on `a`, `b`) and the ancilla ports (`right`, on `c`, `d`).
///
/// `phase` is applied to main mode `b` before the taps. Heralding on a
/// two-fold coincidence, the cross terms `|N-1,N-1±...>` cancel when
/// `e^{iNφ} = -1` at `t = 1/2`, leaving `|2N-2::0>`.
pub fn build_nested_circuit(left: &PureState, right: &PureState, transmission: f64, phase: f64) -> Result<Circuit> {
    let n_left = noon_photons(left)?;
    let n_right = noon_photons(right)?;
    if n_left != n_right {
        return Err(Error::MismatchedInputs(n_left as usize, n_right as usize));
    }
    let [a, b] = MAIN_MODES;
    let (c, d) = (ModeLabel::scalar(2), ModeLabel::scalar(3));
    let mut elements = vec![ElementSpec::PhaseShift { mode: b, angle: phase }];
    elements.extend(tap_and_recombine(a, b, c, d, transmission)?);
    elements.push(ElementSpec::BeamSplitter(BeamSplitterSpec::balanced(c, d)?));
    let group = ElementGroup {
        ancilla_state: right.relabel(vec![c, d])?,
        elements,
        detections: vec![Detection { modes: vec![c], clicks: 1 }, Detection { modes: vec![d], clicks: 1 }],
        traced: vec![],
        transmission,
        phase,
    };
    Ok(Circuit {
        main_modes: MAIN_MODES,
        input: left.relabel(MAIN_MODES.to_vec())?,
        groups: vec![group],
        detector: DetectorModel::perfect(),
        target_photons: 2 * n_left - 2,
    })
}

pub fn nested_element(left: &PureState, right: &PureState, transmission: f64, phase: f64) -> Result<ProtocolReport> {
    run_circuit(&build_nested_circuit(left, right, transmission, phase)?)
}
