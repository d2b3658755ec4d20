//! Phase estimation with uncorrelated and `|N::0>` probes.
//!
//! Outcomes are modelled as ±1 eigenvalues of the measured observable. An
//! uncorrelated probe is `N` independent two-outcome systems with mean
//! `cos φ` each; an entangled probe is one system with mean `cos Nφ`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Central-difference step for `d<A>/dφ`.
pub const DERIVATIVE_STEP: f64 = 1e-5;
/// Derivatives below this magnitude are reported as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
/// Trials per RNG substream. Fixed so results do not depend on the number of
/// worker threads.
pub const BATCH_SIZE: u64 = 4096;
/// Recorded in report headers.
pub const RNG_ID: &str = "ChaCha8 (rand_chacha 0.9), stream = batch index";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    Uncorrelated,
    Entangled,
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ProbeKind::Uncorrelated => "uncorrelated",
            ProbeKind::Entangled => "entangled",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    pub n: u32,
    pub phi: f64,
}

impl ProbeSpec {
    pub fn new(kind: ProbeKind, n: u32, phi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyProbe);
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::InvalidPhase(phi));
        }
        Ok(Self { kind, n, phi })
    }

    pub fn mean(&self, phi: f64) -> f64 {
        statistics(self.kind, self.n, phi).0
    }

    pub fn variance(&self, phi: f64) -> f64 {
        statistics(self.kind, self.n, phi).1
    }

    /// Closed-form `Δφ` at the probe's phase.
    pub fn delta_phi(&self) -> DeltaPhi {
        phase_uncertainty(|p| self.mean(p), |p| self.variance(p), self.phi)
    }
}

/// `(N cos φ, N sin² φ)`.
pub fn uncorrelated_statistics(n: u32, phi: f64) -> (f64, f64) {
    let n = f64::from(n);
    (n * phi.cos(), n * phi.sin().powi(2))
}

/// `(cos Nφ, sin² Nφ)`.
pub fn entangled_statistics(n: u32, phi: f64) -> (f64, f64) {
    let x = f64::from(n) * phi;
    (x.cos(), x.sin().powi(2))
}

fn statistics(kind: ProbeKind, n: u32, phi: f64) -> (f64, f64) {
    match kind {
        ProbeKind::Uncorrelated => uncorrelated_statistics(n, phi),
        ProbeKind::Entangled => entangled_statistics(n, phi),
    }
}

/// Phase uncertainty, or the derivative that made it undefined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaPhi {
    Finite(f64),
    Singular { derivative: f64 },
}

impl DeltaPhi {
    /// The value, or NaN when singular.
    pub fn value(&self) -> f64 {
        match self {
            DeltaPhi::Finite(v) => *v,
            DeltaPhi::Singular { .. } => f64::NAN,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, DeltaPhi::Singular { .. })
    }
}

impl fmt::Display for DeltaPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaPhi::Finite(v) => write!(f, "{v}"),
            DeltaPhi::Singular { derivative } => write!(f, "singular (d<A>/dφ = {derivative:e})"),
        }
    }
}

pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    (f(x + DERIVATIVE_STEP) - f(x - DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP)
}

/// `ΔA / |d<A>/dφ|`, with the derivative from a central difference.
pub fn phase_uncertainty<M, V>(mean: M, variance: V, phi: f64) -> DeltaPhi
where
    M: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    let derivative = central_difference(mean, phi);
    if derivative.abs() < DEGENERACY_THRESHOLD {
        return DeltaPhi::Singular { derivative };
    }
    DeltaPhi::Finite(variance(phi).max(0.0).sqrt() / derivative.abs())
}

/// `(1/√N, 1/N)`.
pub fn precision_limits(n: u32) -> (f64, f64) {
    let n = f64::from(n);
    (1.0 / n.sqrt(), 1.0 / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub mean: f64,
    pub variance: f64,
    pub delta_phi: DeltaPhi,
}

/// Empirical mean and variance of the observable over `trials` probe
/// preparations, propagated to `Δφ` with the closed-form slope.
///
/// Trials are split into batches of [`BATCH_SIZE`]; batch `i` draws from
/// ChaCha8 seeded with `seed` on stream `i`. Per-batch sums are integers, so
/// the reduction is exact and independent of scheduling.
pub fn monte_carlo_phase_estimate(probe: ProbeSpec, trials: u64, seed: u64) -> Result<EstimationResult> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let (systems, p_plus) = match probe.kind {
        ProbeKind::Uncorrelated => (probe.n, (1.0 + probe.phi.cos()) / 2.0),
        ProbeKind::Entangled => (1, (1.0 + (f64::from(probe.n) * probe.phi).cos()) / 2.0),
    };
    let batches = trials.div_ceil(BATCH_SIZE);
    let (sum, sum_sq) = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let count = BATCH_SIZE.min(trials - batch * BATCH_SIZE);
            let mut sum = 0i128;
            let mut sum_sq = 0i128;
            for _ in 0..count {
                let a: i64 = (0..systems).map(|_| if rng.random::<f64>() < p_plus { 1 } else { -1 }).sum();
                sum += i128::from(a);
                sum_sq += i128::from(a * a);
            }
            (sum, sum_sq)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = i128::from(trials);
    let mean = sum as f64 / trials as f64;
    let variance = ((n * sum_sq - sum * sum) as f64 / (n as f64 * n as f64)).max(0.0);
    let derivative = central_difference(|p| probe.mean(p), probe.phi);
    let delta_phi = if derivative.abs() < DEGENERACY_THRESHOLD {
        DeltaPhi::Singular { derivative }
    } else {
        DeltaPhi::Finite(variance.sqrt() / derivative.abs())
    };
    Ok(EstimationResult { mean, variance, delta_phi })
}
