use thiserror::Error;

use crate::fock::ModeLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected {expected} occupations for the mode registry, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mode {0} is not in the registry")]
    UnknownMode(ModeLabel),

    #[error("spatial mode {0} has no H/V polarization sub-modes")]
    MissingPolarization(u16),

    #[error("mode {0} appears more than once in the registry")]
    DuplicateMode(ModeLabel),

    #[error("spatial mode {0} mixes unpolarized and polarized labels")]
    MixedPolarization(u16),

    #[error("mode registries differ")]
    RegistryMismatch,

    #[error("cannot pair {0} with {1}: polarization labels differ")]
    CrossPolarization(ModeLabel, ModeLabel),

    #[error("transmission {0} is outside [0, 1]")]
    InvalidTransmission(f64),

    #[error("detector efficiency {0} is outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("POVM coefficient {0} is outside [0, 1]")]
    InvalidCoefficient(f64),

    #[error("{clicks} clicks requested but the photon bound is {bound}")]
    ClicksAboveBound { clicks: usize, bound: usize },

    #[error("occupation {occupation} exceeds the POVM photon bound {bound}")]
    PhotonBoundExceeded { occupation: usize, bound: usize },

    #[error("mode {0} is listed twice in the detection pattern")]
    OverlappingPattern(ModeLabel),

    #[error("mode matrix is {rows}x{cols} but {modes} modes were given")]
    MatrixShape { rows: usize, cols: usize, modes: usize },

    #[error("N = {n} does not match the {expected} variant")]
    Parity { n: usize, expected: &'static str },

    #[error("schedule length {got} does not match the required {expected}")]
    ScheduleLength { expected: usize, got: usize },

    #[error("N = {0} is below the minimum of 2")]
    TooFewPhotons(usize),

    #[error("inputs carry different photon numbers ({0} vs {1})")]
    MismatchedInputs(usize, usize),

    #[error("input is not a two-mode |N::0> state")]
    NotNoonForm,

    #[error("detection references main mode {0}")]
    DetectsMainMode(ModeLabel),

    #[error("herald produced {0} branches where one was expected")]
    NotSingleBranch(usize),

    #[error("a probe needs at least one photon")]
    EmptyProbe,

    #[error("phase {0} is outside [0, 2π)")]
    InvalidPhase(f64),

    #[error("at least one trial is required")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
