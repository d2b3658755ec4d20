//! Photon counting, detector POVMs, post-selection and mixed states.
//!
//! Mixed states are kept as ensembles of pure branches. Every measurement
//! here is diagonal in the Fock basis of the measured modes, so each
//! measured occupation pattern becomes its own pure branch and the measured
//! modes are dropped from the registry.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{BasisState, ModeLabel, PureState};

/// Branches whose amplitudes agree this closely are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Above this many branches an ensemble is re-expressed through the
/// eigenbasis of its density matrix.
pub const COMPRESS_ABOVE: usize = 256;

/// Eigen-branches with weight below this are dropped during compression.
const COMPRESS_CUTOFF: f64 = 1e-15;

/// Largest Hilbert-space support for which compression is attempted.
const COMPRESS_MAX_DIM: usize = 1024;

/// Photodetector with binomial loss and no dark counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    efficiency: f64,
    resolving: bool,
}

impl DetectorModel {
    pub fn new(efficiency: f64, resolving: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidEfficiency(efficiency));
        }
        Ok(Self { efficiency, resolving })
    }

    /// Unit efficiency with single-photon resolution.
    pub fn perfect() -> Self {
        Self { efficiency: 1.0, resolving: true }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn resolving(&self) -> bool {
        self.resolving
    }

    pub fn dark_rate(&self) -> f64 {
        0.0
    }
}

/// Diagonal POVM element `Σ_n c_n |n><n|` for a given click outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmElement {
    clicks: usize,
    coefficients: Vec<f64>,
    resolving: bool,
}

impl PovmElement {
    /// `coefficients[n]` is `c_{k,n}`; the photon bound is `len - 1`.
    pub fn from_coefficients(clicks: usize, coefficients: Vec<f64>, resolving: bool) -> Result<Self> {
        if let Some(&bad) = coefficients.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidCoefficient(bad));
        }
        Ok(Self { clicks, coefficients, resolving })
    }

    pub fn clicks(&self) -> usize {
        self.clicks
    }

    pub fn resolving(&self) -> bool {
        self.resolving
    }

    pub fn photon_bound(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> Result<f64> {
        self.coefficients
            .get(n)
            .copied()
            .ok_or(Error::PhotonBoundExceeded { occupation: n, bound: self.photon_bound() })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that a binomial-loss detector registers `k` of `n` photons.
pub fn click_probability(efficiency: f64, k: usize, n: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial(n, k) * efficiency.powi(k as i32) * (1.0 - efficiency).powi((n - k) as i32)
}

/// POVM element for `clicks` registered photons, tabulated up to `photon_bound`.
///
/// Resolving detectors get `c_{k,n} = C(n,k) η^k (1-η)^{n-k}`. A
/// non-resolving detector only distinguishes "no click" from "click", so any
/// `clicks >= 1` yields the element `Σ_{k>=1} c_{k,n} = 1 - (1-η)^n`.
pub fn build_efficiency_povm(model: DetectorModel, clicks: usize, photon_bound: usize) -> Result<PovmElement> {
    if clicks > photon_bound {
        return Err(Error::ClicksAboveBound { clicks, bound: photon_bound });
    }
    let eta = model.efficiency();
    let coefficients = (0..=photon_bound)
        .map(|n| {
            if model.resolving() || clicks == 0 {
                click_probability(eta, clicks, n)
            } else {
                (1.0 - (1.0 - eta).powi(n as i32)).clamp(0.0, 1.0)
            }
        })
        .collect();
    PovmElement::from_coefficients(clicks, coefficients, model.resolving())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub weight: f64,
    pub state: PureState,
}

/// `ρ = Σ_i w_i |ψ_i><ψ_i|` with unit-norm branches and weights summing to 1.
/// An ensemble without branches is the zero-probability marker.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    registry: Vec<ModeLabel>,
    branches: Vec<Branch>,
}

impl EnsembleState {
    pub fn pure(state: PureState) -> Self {
        Self::from_branches(state.registry().to_vec(), vec![(1.0, state)]).expect("single branch has a consistent registry")
    }

    /// Normalizes every branch, folding its squared norm into the weight,
    /// then normalizes the weights.
    pub fn from_branches(registry: Vec<ModeLabel>, branches: Vec<(f64, PureState)>) -> Result<Self> {
        let mut out = Vec::with_capacity(branches.len());
        for (w, s) in branches {
            if s.registry() != registry.as_slice() {
                return Err(Error::RegistryMismatch);
            }
            let (s, norm) = s.normalize();
            let w = w * norm * norm;
            if w > 0.0 {
                out.push(Branch { weight: w, state: s });
            }
        }
        let total: f64 = out.iter().map(|b| b.weight).sum();
        for b in &mut out {
            b.weight /= total;
        }
        Ok(Self { registry, branches: out })
    }

    pub fn empty(registry: Vec<ModeLabel>) -> Self {
        Self { registry, branches: Vec::new() }
    }

    pub fn registry(&self) -> &[ModeLabel] {
        &self.registry
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Applies a map to every branch state (used for unitaries).
    pub fn try_map_states<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&PureState) -> Result<PureState>,
    {
        let mut registry = self.registry.clone();
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let s = f(&b.state)?;
            registry = s.registry().to_vec();
            branches.push(Branch { weight: b.weight, state: s });
        }
        Ok(Self { registry, branches })
    }

    /// Tensors fresh modes in state `ancilla` onto every branch.
    pub fn extend_with(&self, ancilla: &PureState) -> Result<Self> {
        let mut out = self.try_map_states(|s| s.tensor_product(ancilla))?;
        if out.branches.is_empty() {
            let mut registry = self.registry.clone();
            registry.extend_from_slice(ancilla.registry());
            out.registry = registry;
        }
        Ok(out)
    }

    /// Merges numerically identical branches and, if the ensemble is still
    /// large, rebuilds it from the density-matrix eigenbasis.
    pub fn consolidate(&mut self) {
        self.merge_identical();
        if self.branches.len() > COMPRESS_ABOVE {
            self.compress();
        }
    }

    fn merge_identical(&mut self) {
        let mut merged: Vec<Branch> = Vec::with_capacity(self.branches.len());
        'outer: for b in self.branches.drain(..) {
            for m in merged.iter_mut() {
                if same_state(&m.state, &b.state) {
                    m.weight += b.weight;
                    continue 'outer;
                }
            }
            merged.push(b);
        }
        self.branches = merged;
    }

    /// Replaces the branches by the eigen-decomposition of `ρ`. Any
    /// decomposition of the same `ρ` is physically equivalent.
    fn compress(&mut self) {
        let mut index: BTreeMap<BasisState, usize> = BTreeMap::new();
        for b in &self.branches {
            for (k, _) in b.state.terms() {
                let next = index.len();
                index.entry(k.clone()).or_insert(next);
            }
        }
        let dim = index.len();
        if dim > COMPRESS_MAX_DIM {
            return;
        }
        // Canonical basis order.
        let keys: Vec<BasisState> = index.keys().cloned().collect();
        let pos: BTreeMap<&BasisState, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for b in &self.branches {
            let v: Vec<(usize, Complex64)> = b.state.terms().map(|(k, a)| (pos[k], *a)).collect();
            for &(i, ai) in &v {
                for &(j, aj) in &v {
                    rho[(i, j)] += ai * aj.conj() * b.weight;
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(rho);
        let mut pairs: Vec<(f64, usize)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > COMPRESS_CUTOFF)
            .map(|(i, &l)| (l, i))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let branches = pairs
            .into_iter()
            .map(|(l, col)| {
                let terms = keys
                    .iter()
                    .enumerate()
                    .map(|(i, k)| (k.occupations().to_vec(), eig.eigenvectors[(i, col)]));
                (l, PureState::from_terms(self.registry.clone(), terms).expect("keys match registry"))
            })
            .collect();
        *self = Self::from_branches(self.registry.clone(), branches).expect("registry unchanged");
    }
}

fn same_state(a: &PureState, b: &PureState) -> bool {
    a.num_terms() == b.num_terms()
        && a.terms()
            .zip(b.terms())
            .all(|((ka, va), (kb, vb))| ka == kb && (va - vb).norm() <= MERGE_TOLERANCE)
}

/// Projects `mode` onto `n` photons and removes it from the registry.
/// Returns the renormalized conditional state and the outcome probability;
/// a zero-probability outcome yields the zero marker.
pub fn project_photon_number(state: &PureState, mode: ModeLabel, n: u32) -> Result<(PureState, f64)> {
    let idx = state.mode_index(mode)?;
    let mut registry = state.registry().to_vec();
    registry.remove(idx);
    let kept = state.flat_map_terms(registry, |key, amp, emit| {
        if key.get(idx) == n {
            emit(key.without(idx), amp);
        }
    });
    let total = state.norm_sqr();
    let (kept, norm) = kept.normalize();
    let probability = if total > 0.0 { norm * norm / total } else { 0.0 };
    Ok((kept, probability))
}

/// Sequential exact projections of several modes. The joint probability is
/// the product of the conditional ones.
pub fn condition_coincidence(state: &PureState, pattern: &[(ModeLabel, u32)]) -> Result<(PureState, f64)> {
    for (i, (m, _)) in pattern.iter().enumerate() {
        state.mode_index(*m)?;
        if pattern[..i].iter().any(|(o, _)| o == m) {
            return Err(Error::OverlappingPattern(*m));
        }
    }
    let mut current = state.clone();
    let mut probability = 1.0;
    for &(mode, n) in pattern {
        let (next, p) = project_photon_number(&current, mode, n)?;
        current = next;
        probability *= p;
    }
    if probability == 0.0 {
        let (zero, _) = current.scale(Complex64::new(0.0, 0.0)).normalize();
        return Ok((zero, 0.0));
    }
    Ok((current, probability))
}

/// Splits every branch by the joint occupation of `modes`, weighting each
/// piece by `weight(total occupation)`, and drops the measured modes.
fn split_measure<F>(ensemble: &EnsembleState, modes: &[ModeLabel], mut weight: F) -> Result<(EnsembleState, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut indices = Vec::with_capacity(modes.len());
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::OverlappingPattern(*m));
        }
        indices.push(
            ensemble
                .registry
                .iter()
                .position(|r| r == m)
                .ok_or(Error::UnknownMode(*m))?,
        );
    }
    let mut sorted = indices.clone();
    sorted.sort_unstable();
    let registry: Vec<ModeLabel> = ensemble
        .registry
        .iter()
        .enumerate()
        .filter(|(i, _)| !sorted.contains(i))
        .map(|(_, m)| *m)
        .collect();

    let mut out = Vec::new();
    let mut probability = 0.0;
    for b in &ensemble.branches {
        let mut groups: BTreeMap<Vec<u32>, Vec<(Vec<u32>, Complex64)>> = BTreeMap::new();
        for (key, amp) in b.state.terms() {
            let pattern: Vec<u32> = indices.iter().map(|&i| key.get(i)).collect();
            groups
                .entry(pattern)
                .or_default()
                .push((key.without_all(&sorted).occupations().to_vec(), *amp));
        }
        for (pattern, terms) in groups {
            let total: u32 = pattern.iter().sum();
            let c = weight(total as usize)?;
            if c == 0.0 {
                continue;
            }
            let piece = PureState::from_terms(registry.clone(), terms)?;
            // `from_branches` folds the piece's squared norm into the weight.
            let p = b.weight * c * piece.norm_sqr();
            if p > 0.0 {
                probability += p;
                out.push((b.weight * c, piece));
            }
        }
    }
    let ensemble = EnsembleState::from_branches(registry, out)?;
    Ok((ensemble, probability))
}

/// Applies a diagonal POVM element to `mode` of every branch.
pub fn apply_povm(ensemble: &EnsembleState, mode: ModeLabel, element: &PovmElement) -> Result<(EnsembleState, f64)> {
    apply_povm_joint(ensemble, &[mode], element)
}

/// POVM on a detector that counts the total photon number across several
/// sub-modes (e.g. both polarizations of one spatial mode) without
/// resolving them.
pub fn apply_povm_joint(ensemble: &EnsembleState, modes: &[ModeLabel], element: &PovmElement) -> Result<(EnsembleState, f64)> {
    let (mut out, p) = split_measure(ensemble, modes, |n| element.coefficient(n))?;
    out.merge_identical();
    Ok((out, p))
}

/// Detection with a [`DetectorModel`] over `modes`, requiring `clicks`.
pub fn apply_detector(ensemble: &EnsembleState, modes: &[ModeLabel], model: DetectorModel, clicks: usize) -> Result<(EnsembleState, f64)> {
    let bound = ensemble
        .branches
        .iter()
        .map(|b| b.state.max_photons() as usize)
        .max()
        .unwrap_or(0)
        .max(clicks);
    let element = build_efficiency_povm(model, clicks, bound)?;
    apply_povm_joint(ensemble, modes, &element)
}

/// `Σ_i w_i |<target|ψ_i>|²` with the target normalized first.
pub fn fidelity(ensemble: &EnsembleState, target: &PureState) -> Result<f64> {
    if ensemble.registry() != target.registry() {
        return Err(Error::RegistryMismatch);
    }
    let (target, norm) = target.normalize();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut f = 0.0;
    for b in &ensemble.branches {
        f += b.weight * target.inner_product(&b.state)?.norm_sqr();
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Partial trace over `mode`: coherence between its occupations is lost.
pub fn trace_out_mode(ensemble: &EnsembleState, mode: ModeLabel) -> Result<EnsembleState> {
    let (mut out, _) = split_measure(ensemble, &[mode], |_| Ok(1.0))?;
    out.merge_identical();
    Ok(out)
}
