//! Passive linear-optical elements acting in place on [`PureState`]s.
//!
//! Every element is a linear map on creation operators,
//! `a_i† -> Σ_j U[i][j] a_j†`, over a handful of modes. It is applied term by
//! term by expanding the transformed monomial; modes outside the element are
//! untouched.
//!
//! Beam-splitter convention for intensity transmission `t` and `r = 1 - t`:
//!
//! ```text
//! a† -> -√t a† + i√r b†
//! b† ->  i√r a† - √t b†
//! ```
//!
//! At `t = 1/2` this is the symmetric 50:50 splitter under which `|1,1>`
//! leaves as `-i(|2,0> + |0,2>)/√2`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{BasisState, ModeLabel, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub mode_a: ModeLabel,
    pub mode_b: ModeLabel,
    transmission: f64,
}

impl BeamSplitterSpec {
    pub fn new(mode_a: ModeLabel, mode_b: ModeLabel, transmission: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::InvalidTransmission(transmission));
        }
        if mode_a.polarization != mode_b.polarization {
            return Err(Error::CrossPolarization(mode_a, mode_b));
        }
        Ok(Self { mode_a, mode_b, transmission })
    }

    pub fn balanced(mode_a: ModeLabel, mode_b: ModeLabel) -> Result<Self> {
        Self::new(mode_a, mode_b, 0.5)
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn reflection(&self) -> f64 {
        1.0 - self.transmission
    }

    /// Creation-operator matrix; row `i` is the image of input mode `i`.
    pub fn mode_matrix(&self) -> DMatrix<Complex64> {
        let t = Complex64::new(-self.transmission.sqrt(), 0.0);
        let r = Complex64::new(0.0, self.reflection().sqrt());
        DMatrix::from_row_slice(2, 2, &[t, r, r, t])
    }
}

/// Polarizing beam splitter joining two polarized spatial modes.
///
/// H light keeps its spatial index (transmitted); V light swaps to the other
/// input's index (reflected) and picks up a factor `i`. So the transmitted
/// port of `input_1` is `input_1` and its reflected port is `input_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarizingBeamSplitter {
    pub input_1: u16,
    pub input_2: u16,
}

impl PolarizingBeamSplitter {
    pub fn transmitted_port(&self) -> u16 {
        self.input_1
    }

    pub fn reflected_port(&self) -> u16 {
        self.input_2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ElementSpec {
    BeamSplitter(BeamSplitterSpec),
    PhaseShift { mode: ModeLabel, angle: f64 },
    PolarizationRotation { spatial: u16, angle: f64 },
    PolarizingBeamSplitter(PolarizingBeamSplitter),
}

pub fn apply_element(state: &PureState, element: &ElementSpec) -> Result<PureState> {
    match element {
        ElementSpec::BeamSplitter(spec) => apply_beam_splitter(state, spec),
        ElementSpec::PhaseShift { mode, angle } => apply_phase_shift(state, *mode, *angle),
        ElementSpec::PolarizationRotation { spatial, angle } => apply_polarization_rotation(state, *spatial, *angle),
        ElementSpec::PolarizingBeamSplitter(spec) => apply_pbs(state, spec),
    }
}

pub fn apply_beam_splitter(state: &PureState, spec: &BeamSplitterSpec) -> Result<PureState> {
    apply_mode_matrix(state, &[spec.mode_a, spec.mode_b], &spec.mode_matrix())
}

/// Multiplies each term by `e^{i n angle}`, `n` being the mode's occupation.
pub fn apply_phase_shift(state: &PureState, mode: ModeLabel, angle: f64) -> Result<PureState> {
    let idx = state.mode_index(mode)?;
    Ok(state.flat_map_terms(state.registry().to_vec(), |key, amp, emit| {
        let n = f64::from(key.get(idx));
        emit(key.clone(), amp * Complex64::from_polar(1.0, n * angle));
    }))
}

/// `H† -> cos θ H† + sin θ V†`, `V† -> -sin θ H† + cos θ V†` on one spatial mode.
pub fn apply_polarization_rotation(state: &PureState, spatial: u16, angle: f64) -> Result<PureState> {
    let (h, v) = polarization_pair(state, spatial)?;
    let (s, c) = angle.sin_cos();
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(c, 0.0), Complex64::new(s, 0.0), Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    );
    apply_mode_matrix(state, &[h, v], &m)
}

pub fn apply_pbs(state: &PureState, spec: &PolarizingBeamSplitter) -> Result<PureState> {
    polarization_pair(state, spec.input_1)?;
    polarization_pair(state, spec.input_2)?;
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let swap = DMatrix::from_row_slice(2, 2, &[zero, i, i, zero]);
    apply_mode_matrix(state, &[ModeLabel::v(spec.input_1), ModeLabel::v(spec.input_2)], &swap)
}

fn polarization_pair(state: &PureState, spatial: u16) -> Result<(ModeLabel, ModeLabel)> {
    let h = ModeLabel::h(spatial);
    let v = ModeLabel::v(spatial);
    if state.mode_index(h).is_err() || state.mode_index(v).is_err() {
        return Err(Error::MissingPolarization(spatial));
    }
    Ok((h, v))
}

/// Applies `a_i† -> Σ_j matrix[(i, j)] a_j†` over `modes`.
///
/// Each term `Π (a_i†)^{n_i} / √(n_i!)` is expanded by multiplying in one
/// transformed creation operator at a time, then rescaled by `√(Π p_j!)` for
/// the output occupations `p_j`.
pub fn apply_mode_matrix(state: &PureState, modes: &[ModeLabel], matrix: &DMatrix<Complex64>) -> Result<PureState> {
    let k = modes.len();
    if matrix.nrows() != k || matrix.ncols() != k {
        return Err(Error::MatrixShape { rows: matrix.nrows(), cols: matrix.ncols(), modes: k });
    }
    let indices = modes
        .iter()
        .map(|m| state.mode_index(*m))
        .collect::<Result<Vec<_>>>()?;
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::DuplicateMode(*m));
        }
    }

    let mut cache: HashMap<Vec<u32>, Vec<(Vec<u32>, Complex64)>> = HashMap::new();
    Ok(state.flat_map_terms(state.registry().to_vec(), |key, amp, emit| {
        let inputs: Vec<u32> = indices.iter().map(|&i| key.get(i)).collect();
        let expansion = cache
            .entry(inputs.clone())
            .or_insert_with(|| expand_monomial(&inputs, matrix));
        for (outputs, coeff) in expansion.iter() {
            let mut occ = key.occupations().to_vec();
            for (slot, &i) in indices.iter().enumerate() {
                occ[i] = outputs[slot];
            }
            emit(BasisState::new(occ), amp * coeff);
        }
    }))
}

/// Expands the normalized input monomial into normalized output Fock terms.
fn expand_monomial(inputs: &[u32], matrix: &DMatrix<Complex64>) -> Vec<(Vec<u32>, Complex64)> {
    let k = inputs.len();
    let mut poly: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; k], Complex64::new(1.0, 0.0));
    for (i, &n) in inputs.iter().enumerate() {
        for _ in 0..n {
            let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
            for (exp, c) in &poly {
                for j in 0..k {
                    let u = matrix[(i, j)];
                    if u == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut e = exp.clone();
                    e[j] += 1;
                    *next.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c * u;
                }
            }
            poly = next;
        }
    }
    let input_norm: f64 = inputs.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
    poly.into_iter()
        .map(|(exp, c)| {
            let out_norm: f64 = exp.iter().map(|&p| factorial(p)).product::<f64>().sqrt();
            (exp, c * (out_norm / input_norm))
        })
        .collect()
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
