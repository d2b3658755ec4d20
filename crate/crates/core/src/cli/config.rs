use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};

use crate::estimation::ProbeKind;
use crate::protocols::{DetectionBasis, PhaseVariant};

use super::CliError;

pub const DEFAULT_CAP: u32 = 8;
pub const DEFAULT_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Verify,
    Scan,
    Detector,
    Estimate,
    Scaling,
}

impl CommandKind {
    /// Whether the command runs the Fock-space simulator (and so is capped).
    pub fn simulates(self, closed_form: bool) -> bool {
        match self {
            CommandKind::Verify | CommandKind::Detector => true,
            CommandKind::Scan => !closed_form,
            CommandKind::Estimate | CommandKind::Scaling => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VariantChoice {
    /// Roots-of-unity phases `4πk/N` (even) or `2πk/N` (odd).
    Paper,
    /// Phases whose product is exactly `a^N + b^N`.
    Exact,
}

impl VariantChoice {
    pub fn resolve(self, n: u32) -> PhaseVariant {
        match (self, n.is_multiple_of(2)) {
            (VariantChoice::Exact, _) => PhaseVariant::ExactTarget,
            (VariantChoice::Paper, true) => PhaseVariant::RootsEven,
            (VariantChoice::Paper, false) => PhaseVariant::RootsOdd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantChoice::Paper => "paper",
            VariantChoice::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Diagonal,
    Insensitive,
}

impl BasisChoice {
    pub fn resolve(self) -> DetectionBasis {
        match self {
            BasisChoice::Diagonal => DetectionBasis::DiagonalProjection,
            BasisChoice::Insensitive => DetectionBasis::PolarizationInsensitive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisChoice::Diagonal => "diagonal",
            BasisChoice::Insensitive => "insensitive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Beam-splitter transmission: the per-N optimum or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TSpec {
    #[serde(serialize_with = "serialize_optimal")]
    Optimal,
    Values(Vec<f64>),
}

fn serialize_optimal<S: serde::Serializer>(s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str("optimal")
}

impl TSpec {
    pub fn values_for(&self, n: u32) -> Vec<f64> {
        match self {
            TSpec::Optimal => vec![f64::from(n - 1) / f64::from(n)],
            TSpec::Values(v) => v.clone(),
        }
    }
}

impl std::str::FromStr for TSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.trim() == "optimal" {
            Ok(TSpec::Optimal)
        } else {
            Ok(TSpec::Values(parse_reals(s, "t")?))
        }
    }
}

impl<'de> Deserialize<'de> for TSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Reals::deserialize(d)? {
            Reals::One(x) => Ok(TSpec::Values(vec![x])),
            Reals::List(v) => Ok(TSpec::Values(v)),
            Reals::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Reals {
    One(f64),
    List(Vec<f64>),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Counts {
    One(u32),
    List(Vec<u32>),
    Text(String),
}

fn deserialize_counts<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u32>, D::Error> {
    match Counts::deserialize(d)? {
        Counts::One(n) => Ok(vec![n]),
        Counts::List(v) => Ok(v),
        Counts::Text(s) => parse_counts(&s).map_err(serde::de::Error::custom),
    }
}

fn deserialize_reals<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    match Reals::deserialize(d)? {
        Reals::One(x) => Ok(vec![x]),
        Reals::List(v) => Ok(v),
        Reals::Text(s) => parse_reals(&s, "value").map_err(serde::de::Error::custom),
    }
}

fn deserialize_opt_reals<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    deserialize_reals(d).map(Some)
}

/// `"4"`, `"2,4,6"`, `"2..=8"`, `"2..9"` or `"2..=64:2"` (step).
pub fn parse_counts(s: &str) -> Result<Vec<u32>, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("n: cannot parse {s:?}"));
    let out: Vec<u32> = if let Some((lo, rest)) = s.split_once("..") {
        let (inclusive, rest) = match rest.strip_prefix('=') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let (hi, step) = match rest.split_once(':') {
            Some((h, st)) => (h, st.trim().parse::<u32>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        if step == 0 {
            return Err(CliError::Usage("n: range step must be positive".into()));
        }
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if inclusive {
            (lo..=hi).step_by(step as usize).collect()
        } else {
            (lo..hi).step_by(step as usize).collect()
        }
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(CliError::Usage(format!("n: range {s:?} is empty")));
    }
    Ok(out)
}

pub fn parse_reals(s: &str, field: &str) -> Result<Vec<f64>, CliError> {
    let out = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{field}: cannot parse {x:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(CliError::Usage(format!("{field}: empty list")));
    }
    Ok(out)
}

/// Full run description. Accepted as a JSON document (unknown keys are
/// rejected) and overridden field by field from command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(deserialize_with = "deserialize_counts")]
    pub n: Vec<u32>,
    pub t: TSpec,
    #[serde(deserialize_with = "deserialize_reals")]
    pub eta: Vec<f64>,
    pub phase_variant: VariantChoice,
    pub basis: BasisChoice,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
    /// Minimum fidelity for `verify` to succeed.
    pub threshold: f64,
    /// Largest N the simulator accepts.
    pub cap: u32,
    /// Estimation phases; `None` picks `π/(2N)` for each N.
    #[serde(deserialize_with = "deserialize_opt_reals")]
    pub phi: Option<Vec<f64>>,
    pub kinds: Vec<ProbeKind>,
    /// Photon-number-resolving detectors; `None` means resolving everywhere
    /// except the `detector` command.
    pub resolving: Option<bool>,
    /// `scan` only: evaluate closed forms instead of simulating.
    pub closed_form: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Verify,
            n: vec![2],
            t: TSpec::Optimal,
            eta: vec![1.0],
            phase_variant: VariantChoice::Exact,
            basis: BasisChoice::Diagonal,
            trials: 100_000,
            seed: 0,
            out: None,
            format: Format::Csv,
            workers: None,
            threshold: DEFAULT_THRESHOLD,
            cap: DEFAULT_CAP,
            phi: None,
            kinds: vec![ProbeKind::Uncorrelated, ProbeKind::Entangled],
            resolving: None,
            closed_form: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn resolving(&self) -> bool {
        self.resolving.unwrap_or(self.command != CommandKind::Detector)
    }

    /// Field-level checks; simulation commands also enforce the cap.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.n.is_empty() {
            return usage("n: range is empty".into());
        }
        let simulates = self.command.simulates(self.closed_form);
        let min_n = if self.command == CommandKind::Estimate { 1 } else { 2 };
        if let Some(&n) = self.n.iter().find(|&&n| n < min_n) {
            return usage(format!("n: {n} is below the minimum of {min_n}"));
        }
        if simulates {
            if let Some(&n) = self.n.iter().find(|&&n| n > self.cap) {
                return usage(format!("n: {n} exceeds the simulation cap of {} (raise with --cap)", self.cap));
            }
        }
        if let TSpec::Values(v) = &self.t {
            if v.is_empty() {
                return usage("t: empty list".into());
            }
            if let Some(t) = v.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return usage(format!("t: {t} is outside [0, 1]"));
            }
        }
        if self.eta.is_empty() {
            return usage("eta: empty grid".into());
        }
        if let Some(e) = self.eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return usage(format!("eta: {e} is outside [0, 1]"));
        }
        if self.command == CommandKind::Estimate {
            if self.trials == 0 {
                return usage("trials: must be at least 1".into());
            }
            if self.kinds.is_empty() {
                return usage("kinds: empty list".into());
            }
            if let Some(phi) = &self.phi {
                if phi.is_empty() {
                    return usage("phi: empty list".into());
                }
                if let Some(p) = phi.iter().find(|p| !(0.0..std::f64::consts::TAU).contains(*p)) {
                    return usage(format!("phi: {p} is outside [0, 2π)"));
                }
            }
        }
        if self.workers == Some(0) {
            return usage("workers: must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return usage(format!("threshold: {} is outside [0, 1]", self.threshold));
        }
        Ok(())
    }
}
