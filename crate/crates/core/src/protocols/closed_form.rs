//! Closed-form success probabilities for the stacked two-photon tap.
//!
//! Quantities with rational inputs are evaluated exactly with
//! [`BigRational`]; conversion to `f64` happens only at the edges.

use std::f64::consts::{E, PI};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `p_k(N) = C(N,k) t^{N-k} r^k` for `k = 0..=N`, with `r = 1 - t`.
pub fn reflection_distribution(n: u32, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidTransmission(t));
    }
    let r = 1.0 - t;
    let mut binom = 1.0;
    Ok((0..=n)
        .map(|k| {
            if k > 0 {
                binom *= f64::from(n - k + 1) / f64::from(k);
            }
            binom * t.powi((n - k) as i32) * r.powi(k as i32)
        })
        .collect())
}

/// Exact version of [`reflection_distribution`] for rational `t`.
pub fn reflection_distribution_exact(n: u32, t: &BigRational) -> Result<Vec<BigRational>> {
    if t < &BigRational::zero() || t > &BigRational::one() {
        return Err(Error::InvalidTransmission(t.to_f64().unwrap_or(f64::NAN)));
    }
    let r = BigRational::one() - t;
    Ok((0..=n)
        .map(|k| BigRational::from_integer(binomial(n, k)) * pow(t, n - k) * pow(&r, k))
        .collect())
}

/// The single-tap objective `t^{2N-2} (1-t)^2` maximized by
/// [`optimal_transmission`].
pub fn transmission_objective(n: u32, t: f64) -> f64 {
    t.powi(2 * n as i32 - 2) * (1.0 - t).powi(2)
}

/// `(N-1)/N`, the transmission that maximizes the chance of splitting off
/// exactly two photons from one beam and none from the other.
pub fn optimal_transmission(n: u32) -> Result<f64> {
    Ok(optimal_transmission_exact(n)?.to_f64().expect("finite ratio"))
}

pub fn optimal_transmission_exact(n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::TooFewPhotons(n as usize));
    }
    Ok(BigRational::new(BigInt::from(n - 1), BigInt::from(n)))
}

/// `2 (1/4)^N N! / N^N`, exact.
pub fn analytic_success_probability(n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::TooFewPhotons(n as usize));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Parity { n: n as usize, expected: "even" });
    }
    let n_big = BigInt::from(n);
    let numerator = BigInt::from(2) * factorial(n);
    let denominator = num_traits::pow(BigInt::from(4), n as usize) * num_traits::pow(n_big, n as usize);
    Ok(BigRational::new(numerator, denominator))
}

/// Stirling form of the success probability, `√(8πN) (1/4e)^N`.
pub fn stirling_limit(n: u32) -> f64 {
    let n = f64::from(n);
    (8.0 * PI * n).sqrt() * (1.0 / (4.0 * E)).powf(n)
}

/// `π_N = √(8πN) (η/4e)^N`, evaluated as [`stirling_limit`] times `η^N` so
/// the efficiency scaling is exact in floating point too.
pub fn asymptotic_probability(n: u32, efficiency: f64) -> f64 {
    stirling_limit(n) * efficiency.powi(n as i32)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial(n: u32, k: u32) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn pow(base: &BigRational, exp: u32) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Lowest-terms `p/q` rendering.
pub fn rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}
