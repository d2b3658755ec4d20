//! Multimode bosonic states in the occupation-number basis.
//!
//! A [`PureState`] is a sparse map from [`BasisState`] keys to complex
//! amplitudes over an ordered registry of [`ModeLabel`]s. The map is a
//! `BTreeMap`, so iteration order (and anything rendered from it) is
//! canonical. Every constructor and operation drops amplitudes whose
//! magnitude falls below [`PRUNE_THRESHOLD`].
//!
//! No photon-number truncation is applied anywhere: linear optics conserves
//! photon number, so the live occupations are bounded by the input.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are removed from sparse states.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    None,
    H,
    V,
}

/// A spatial mode, optionally split into polarization sub-modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub spatial: u16,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub const fn new(spatial: u16, polarization: Polarization) -> Self {
        Self { spatial, polarization }
    }

    /// Unpolarized mode.
    pub const fn scalar(spatial: u16) -> Self {
        Self::new(spatial, Polarization::None)
    }

    pub const fn h(spatial: u16) -> Self {
        Self::new(spatial, Polarization::H)
    }

    pub const fn v(spatial: u16) -> Self {
        Self::new(spatial, Polarization::V)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarization {
            Polarization::None => write!(f, "m{}", self.spatial),
            Polarization::H => write!(f, "m{}H", self.spatial),
            Polarization::V => write!(f, "m{}V", self.spatial),
        }
    }
}

/// Checks label uniqueness and that no spatial index mixes `None` with H/V.
pub fn validate_registry(registry: &[ModeLabel]) -> Result<()> {
    for (i, m) in registry.iter().enumerate() {
        for other in &registry[i + 1..] {
            if other == m {
                return Err(Error::DuplicateMode(*m));
            }
            if other.spatial == m.spatial
                && (other.polarization == Polarization::None) != (m.polarization == Polarization::None)
            {
                return Err(Error::MixedPolarization(m.spatial));
            }
        }
    }
    Ok(())
}

/// Photon counts per mode, ordered like the owning registry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState(Vec<u32>);

impl BasisState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub(crate) fn occupations_mut(&mut self) -> &mut Vec<u32> {
        &mut self.0
    }

    /// Copy with the entry at `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let mut occ = self.0.clone();
        occ.remove(index);
        Self(occ)
    }

    /// Copy with the entries at the (sorted, unique) `indices` removed.
    pub fn without_all(&self, indices: &[usize]) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !indices.contains(i))
                .map(|(_, &n)| n)
                .collect(),
        )
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Sparse pure state. An empty term map is the zero-state marker.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    registry: Vec<ModeLabel>,
    terms: BTreeMap<BasisState, Complex64>,
}

impl PureState {
    /// The zero vector over `registry`; flagged by [`PureState::is_zero`].
    pub fn zero(registry: Vec<ModeLabel>) -> Result<Self> {
        validate_registry(&registry)?;
        Ok(Self { registry, terms: BTreeMap::new() })
    }

    pub fn vacuum(registry: Vec<ModeLabel>) -> Result<Self> {
        let n = registry.len();
        Self::basis_state(&vec![0; n], registry)
    }

    pub fn basis_state(occupations: &[u32], registry: Vec<ModeLabel>) -> Result<Self> {
        Self::from_terms(registry, [(occupations.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Builds a state from (occupations, amplitude) pairs; repeated keys add.
    pub fn from_terms<I>(registry: Vec<ModeLabel>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        validate_registry(&registry)?;
        let mut map = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != registry.len() {
                return Err(Error::LengthMismatch { expected: registry.len(), got: occ.len() });
            }
            *map.entry(BasisState(occ)).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::from_map(registry, map))
    }

    /// Internal constructor; the caller guarantees the registry is valid and
    /// that keys match its length.
    pub(crate) fn from_map(registry: Vec<ModeLabel>, mut terms: BTreeMap<BasisState, Complex64>) -> Self {
        terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Self { registry, terms }
    }

    pub fn registry(&self) -> &[ModeLabel] {
        &self.registry
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisState, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        self.terms
            .get(&BasisState(occupations.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn mode_index(&self, mode: ModeLabel) -> Result<usize> {
        self.registry
            .iter()
            .position(|m| *m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    /// Largest total photon number over all terms (0 for the zero state).
    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(BasisState::total).max().unwrap_or(0)
    }

    /// Total photon number if every term agrees on it.
    pub fn definite_photon_number(&self) -> Option<u32> {
        let mut totals = self.terms.keys().map(BasisState::total);
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    /// Returns the unit-norm state and the original norm. A zero input comes
    /// back as the zero marker with norm 0.
    pub fn normalize(&self) -> (Self, f64) {
        let norm = self.norm();
        if norm == 0.0 {
            return (Self { registry: self.registry.clone(), terms: BTreeMap::new() }, 0.0);
        }
        (self.scale(Complex64::new(1.0 / norm, 0.0)), norm)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * factor)).collect();
        Self::from_map(self.registry.clone(), terms)
    }

    /// Vector sum; registries must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        let mut terms = self.terms.clone();
        for (k, a) in &other.terms {
            *terms.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Ok(Self::from_map(self.registry.clone(), terms))
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Applies a creation or annihilation operator `repetitions` times.
    /// The result is not normalized.
    pub fn apply_ladder(&self, mode: ModeLabel, kind: Ladder, repetitions: u32) -> Result<Self> {
        let idx = self.mode_index(mode)?;
        let mut terms = BTreeMap::new();
        for (key, amp) in &self.terms {
            let n = key.get(idx);
            let (new_n, factor) = match kind {
                Ladder::Annihilate => {
                    if n < repetitions {
                        continue;
                    }
                    let f: f64 = (0..repetitions).map(|j| f64::from(n - j)).product();
                    (n - repetitions, f.sqrt())
                }
                Ladder::Create => {
                    let f: f64 = (1..=repetitions).map(|j| f64::from(n + j)).product();
                    (n + repetitions, f.sqrt())
                }
            };
            let mut new_key = key.clone();
            new_key.occupations_mut()[idx] = new_n;
            *terms.entry(new_key).or_insert(Complex64::new(0.0, 0.0)) += amp * factor;
        }
        Ok(Self::from_map(self.registry.clone(), terms))
    }

    /// `self ⊗ other` with registries concatenated in that order.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        let mut registry = self.registry.clone();
        registry.extend_from_slice(&other.registry);
        validate_registry(&registry)?;
        let mut terms = BTreeMap::new();
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                let mut occ = ka.0.clone();
                occ.extend_from_slice(&kb.0);
                terms.insert(BasisState(occ), a * b);
            }
        }
        Ok(Self::from_map(registry, terms))
    }

    /// Same amplitudes over a relabelled registry of equal length.
    pub fn relabel(&self, registry: Vec<ModeLabel>) -> Result<Self> {
        if registry.len() != self.registry.len() {
            return Err(Error::LengthMismatch { expected: self.registry.len(), got: registry.len() });
        }
        validate_registry(&registry)?;
        Ok(Self { registry, terms: self.terms.clone() })
    }

    /// Applies `f` to every term, accumulating the emitted terms into a new
    /// state over `registry`.
    pub(crate) fn flat_map_terms<F>(&self, registry: Vec<ModeLabel>, mut f: F) -> Self
    where
        F: FnMut(&BasisState, Complex64, &mut dyn FnMut(BasisState, Complex64)),
    {
        let mut terms: BTreeMap<BasisState, Complex64> = BTreeMap::new();
        for (key, amp) in &self.terms {
            f(key, *amp, &mut |k, a| {
                *terms.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a;
            });
        }
        Self::from_map(registry, terms)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, k)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_modes() -> Vec<ModeLabel> {
        vec![ModeLabel::scalar(0), ModeLabel::scalar(1)]
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_states() {
        let vac = PureState::basis_state(&[0, 0], two_modes()).unwrap();
        assert!((vac.norm() - 1.0).abs() < 1e-15);
        let s = PureState::basis_state(&[2, 2], two_modes()).unwrap();
        assert_eq!(s.inner_product(&s).unwrap(), c(1.0, 0.0));
        let s = PureState::basis_state(&[4, 4], two_modes()).unwrap();
        assert_eq!(s.definite_photon_number(), Some(8));
    }

    #[test]
    fn basis_state_length_mismatch() {
        let err = PureState::basis_state(&[1, 2, 3], two_modes()).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { expected: 2, got: 3 });
    }

    #[test]
    fn registry_rules() {
        let dup = vec![ModeLabel::scalar(0), ModeLabel::scalar(0)];
        assert!(matches!(PureState::vacuum(dup), Err(Error::DuplicateMode(_))));
        let mixed = vec![ModeLabel::scalar(3), ModeLabel::h(3)];
        assert!(matches!(PureState::vacuum(mixed), Err(Error::MixedPolarization(3))));
        let fine = vec![ModeLabel::h(3), ModeLabel::v(3), ModeLabel::scalar(4)];
        assert!(PureState::vacuum(fine).is_ok());
    }

    #[test]
    fn inner_products() {
        let a = PureState::basis_state(&[2, 0], two_modes()).unwrap();
        let b = PureState::basis_state(&[0, 2], two_modes()).unwrap();
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0, 0.0));
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        let s = FRAC_1_SQRT_2;
        let noon = PureState::from_terms(two_modes(), [(vec![2, 0], c(s, 0.0)), (vec![0, 2], c(s, 0.0))]).unwrap();
        assert!((noon.inner_product(&noon).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let other = PureState::basis_state(&[1], vec![ModeLabel::scalar(0)]).unwrap();
        assert_eq!(a.inner_product(&other), Err(Error::RegistryMismatch));
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = PureState::basis_state(&[1, 0], two_modes()).unwrap().scale(c(0.0, 1.0));
        let b = PureState::basis_state(&[1, 0], two_modes()).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, -1.0));
        assert_eq!(b.inner_product(&a).unwrap(), c(0.0, 1.0));
    }

    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ladder_examples() {
        let one = vec![ModeLabel::scalar(0)];
        let s = PureState::basis_state(&[1], one.clone()).unwrap();
        let r = s.apply_ladder(one[0], Ladder::Annihilate, 1).unwrap();
        assert_eq!(r.amplitude(&[0]), c(1.0, 0.0));

        let s = PureState::basis_state(&[4], one.clone()).unwrap();
        let r = s.apply_ladder(one[0], Ladder::Annihilate, 1).unwrap();
        assert!((r.amplitude(&[3]) - c(2.0, 0.0)).norm() < 1e-15);

        // Oracle: two single-step annihilations, sqrt(4) * sqrt(3).
        let s = PureState::basis_state(&[4, 4], two_modes()).unwrap();
        let stepwise = s
            .apply_ladder(ModeLabel::scalar(0), Ladder::Annihilate, 1)
            .unwrap()
            .apply_ladder(ModeLabel::scalar(0), Ladder::Annihilate, 1)
            .unwrap();
        let r = s.apply_ladder(ModeLabel::scalar(0), Ladder::Annihilate, 2).unwrap();
        assert!((r.amplitude(&[2, 4]) - c(12f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((stepwise.amplitude(&[2, 4]) - r.amplitude(&[2, 4])).norm() < 1e-14);
    }

    #[test]
    fn annihilating_vacuum_gives_zero_marker() {
        let s = PureState::vacuum(two_modes()).unwrap();
        let r = s.apply_ladder(ModeLabel::scalar(1), Ladder::Annihilate, 1).unwrap();
        assert!(r.is_zero());
        assert!(matches!(
            s.apply_ladder(ModeLabel::scalar(7), Ladder::Create, 1),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn tensor_examples() {
        let a = PureState::basis_state(&[2, 2], two_modes()).unwrap();
        let b = PureState::vacuum(vec![ModeLabel::scalar(2), ModeLabel::scalar(3)]).unwrap();
        let ab = a.tensor_product(&b).unwrap();
        assert_eq!(ab.amplitude(&[2, 2, 0, 0]), c(1.0, 0.0));
        assert_eq!(ab.registry().len(), 4);

        let v1 = PureState::vacuum(vec![ModeLabel::scalar(0)]).unwrap();
        let v2 = PureState::vacuum(vec![ModeLabel::scalar(1)]).unwrap();
        assert!((v1.tensor_product(&v2).unwrap().norm() - 1.0).abs() < 1e-15);

        let s = FRAC_1_SQRT_2;
        let sup = PureState::from_terms(vec![ModeLabel::scalar(0)], [(vec![1], c(s, 0.0)), (vec![0], c(s, 0.0))]).unwrap();
        let one = PureState::basis_state(&[1], vec![ModeLabel::scalar(1)]).unwrap();
        let t = sup.tensor_product(&one).unwrap();
        assert!((t.amplitude(&[1, 1]) - c(s, 0.0)).norm() < 1e-15);
        assert!((t.amplitude(&[0, 1]) - c(s, 0.0)).norm() < 1e-15);

        assert!(matches!(a.tensor_product(&a), Err(Error::DuplicateMode(_))));
    }

    #[test]
    fn normalize_examples() {
        let s = PureState::basis_state(&[1, 0], two_modes()).unwrap().scale(c(2.0, 0.0));
        let (n, norm) = s.normalize();
        assert!((norm - 2.0).abs() < 1e-15);
        assert!((n.amplitude(&[1, 0]) - c(1.0, 0.0)).norm() < 1e-15);

        let z = PureState::zero(two_modes()).unwrap();
        let (n, norm) = z.normalize();
        assert!(n.is_zero());
        assert_eq!(norm, 0.0);

        let s = PureState::from_terms(two_modes(), [(vec![2, 0], c(3.0, 0.0)), (vec![0, 2], c(4.0, 0.0))]).unwrap();
        let (n, norm) = s.normalize();
        assert!((norm - 5.0).abs() < 1e-15);
        assert!((n.amplitude(&[2, 0]).re - 0.6).abs() < 1e-15);
        assert!((n.amplitude(&[0, 2]).re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pruning_drops_tiny_amplitudes() {
        let s = PureState::from_terms(two_modes(), [(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1e-15, 0.0))]).unwrap();
        assert_eq!(s.num_terms(), 1);
    }

    fn arb_state(modes: usize, max_n: u32) -> impl Strategy<Value = PureState> {
        prop::collection::vec(
            (prop::collection::vec(0..=max_n, modes), -1.0f64..1.0, -1.0f64..1.0),
            1..6,
        )
        .prop_map(move |terms| {
            let registry = (0..modes as u16).map(ModeLabel::scalar).collect();
            PureState::from_terms(registry, terms.into_iter().map(|(o, re, im)| (o, Complex64::new(re, im)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ladder_commutator_is_identity(occ in prop::collection::vec(0u32..6, 1..4), which in 0usize..3) {
            let registry: Vec<_> = (0..occ.len() as u16).map(ModeLabel::scalar).collect();
            let mode = registry[which % occ.len()];
            let s = PureState::basis_state(&occ, registry).unwrap();
            let ad_a = s.apply_ladder(mode, Ladder::Annihilate, 1).unwrap().apply_ladder(mode, Ladder::Create, 1).unwrap();
            let a_ad = s.apply_ladder(mode, Ladder::Create, 1).unwrap().apply_ladder(mode, Ladder::Annihilate, 1).unwrap();
            let diff = a_ad.add(&ad_a.scale(Complex64::new(-1.0, 0.0))).unwrap();
            let err = diff.add(&s.scale(Complex64::new(-1.0, 0.0))).unwrap();
            prop_assert!(err.norm() < 1e-12);
        }

        #[test]
        fn tensor_norm_is_multiplicative(a in arb_state(2, 3), b in arb_state(1, 3)) {
            let b = b.relabel(vec![ModeLabel::scalar(5)]).unwrap();
            let ab = a.tensor_product(&b).unwrap();
            prop_assert!((ab.norm() - a.norm() * b.norm()).abs() < 1e-12);
        }

        #[test]
        fn normalize_round_trip(a in arb_state(3, 2)) {
            let (n, norm) = a.normalize();
            let back = n.scale(Complex64::new(norm, 0.0));
            for (k, amp) in a.terms() {
                prop_assert!((back.amplitude(k.occupations()) - amp).norm() < 1e-12);
            }
            prop_assert_eq!(a.is_zero(), norm == 0.0);
        }

        #[test]
        fn self_overlap_positive_definite(a in arb_state(2, 3)) {
            let ip = a.inner_product(&a).unwrap();
            prop_assert!(ip.im.abs() < 1e-12);
            prop_assert!(ip.re >= 0.0);
            prop_assert_eq!(ip.re == 0.0, a.is_zero());
        }
    }
}
