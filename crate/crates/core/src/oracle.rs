//! Sampling oracle for the MD-LHV-LHS bound.
//!
//! Alice answers deterministically (response type χ) and Bob holds a qubit
//! state whose ±1 biases for y₁, y₂ trace the ellipse
//! 2p(+|y₁) − 1 = cos(ξ + β), 2p(+|y₂) − 1 = cos(ξ − β). After the setting
//! reweighting, each (χ, ξ) contributes a correlator vector whose entries
//! may reach magnitude 2(1 − p), so vectors here are not behaviors.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::CorrelatorVector;
use crate::error::{check_range, Error, Result};
use crate::inequality::{check_p, local_bound, md_operator};

/// Number of evenly spaced ξ values drawn from during sampling.
pub const XI_GRID_POINTS: usize = 720;

/// Margin allowed above the bound before a sweep fails.
pub const BOUND_SLACK: f64 = 1e-9;

/// Alice's deterministic response types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResponseType {
    /// a = +1 for both settings.
    AllPlus,
    /// a = −1 for both settings.
    AllMinus,
    /// a = +1 for x₁, −1 for x₂.
    PlusMinus,
    /// a = −1 for x₁, +1 for x₂.
    MinusPlus,
}

impl ResponseType {
    pub const ALL: [Self; 4] = [Self::AllPlus, Self::AllMinus, Self::PlusMinus, Self::MinusPlus];

    /// χ index 1..=4.
    pub fn from_index(chi: u8) -> Result<Self> {
        match chi {
            1 => Ok(Self::AllPlus),
            2 => Ok(Self::AllMinus),
            3 => Ok(Self::PlusMinus),
            4 => Ok(Self::MinusPlus),
            _ => Err(Error::Invalid(format!("response type chi = {chi} not in 1..=4"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::AllPlus => 1,
            Self::AllMinus => 2,
            Self::PlusMinus => 3,
            Self::MinusPlus => 4,
        }
    }

    /// Alice's outcome signs for (x₁, x₂).
    fn signs(self) -> (f64, f64) {
        match self {
            Self::AllPlus => (1.0, 1.0),
            Self::AllMinus => (-1.0, -1.0),
            Self::PlusMinus => (1.0, -1.0),
            Self::MinusPlus => (-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalStrategy {
    pub chi: ResponseType,
    pub xi: f64,
    pub beta: f64,
    /// Setting weight of x₁ (1 − p).
    pub p1: f64,
    /// Setting weight of x₂ (p).
    pub p2: f64,
}

impl ExtremalStrategy {
    /// Strategy with p₁ = 1 − p, p₂ = p.
    pub fn new(chi: ResponseType, xi: f64, beta: f64, p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Self::with_weights(chi, xi, beta, 1.0 - p, p)
    }

    pub fn with_weights(chi: ResponseType, xi: f64, beta: f64, p1: f64, p2: f64) -> Result<Self> {
        check_range("beta", beta, 0.0, FRAC_PI_2, "[0, pi/2]")?;
        check_range("p1", p1, 0.0, 1.0, "[0, 1]")?;
        check_range("p2", p2, 0.0, 1.0, "[0, 1]")?;
        if (p1 + p2 - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("p1 + p2 = {} != 1", p1 + p2)));
        }
        if !xi.is_finite() {
            return Err(Error::Invalid("xi must be finite".into()));
        }
        Ok(Self { chi, xi, beta, p1, p2 })
    }
}

/// β from the projector overlap μ = Tr[Π₊^{y₁} Π₊^{y₂}]: arctan(√(1−μ)/√μ).
pub fn beta_from_overlap(mu: f64) -> Result<f64> {
    check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
    Ok((1.0 - mu).sqrt().atan2(mu.sqrt()))
}

/// Bob's biases (2p(+|y₁) − 1, 2p(+|y₂) − 1) on the ellipse.
pub fn ellipse_point(xi: f64, beta: f64) -> (f64, f64) {
    ((xi + beta).cos(), (xi - beta).cos())
}

/// u₁² + u₂² − 2u₁u₂ cos 2β − sin² 2β for the ellipse point at ξ; zero up to
/// rounding.
pub fn ellipse_residual(xi: f64, beta: f64) -> f64 {
    let (u1, u2) = ellipse_point(xi, beta);
    u1 * u1 + u2 * u2 - 2.0 * u1 * u2 * (2.0 * beta).cos() - (2.0 * beta).sin().powi(2)
}

/// Reweighted correlator vector of a single extremal strategy.
pub fn extremal_correlators(s: &ExtremalStrategy) -> CorrelatorVector {
    let (cp, cm) = ellipse_point(s.xi, s.beta);
    let (a1, a2) = s.chi.signs();
    CorrelatorVector::new(
        2.0 * a1 * s.p1 * cp,
        2.0 * a1 * s.p1 * cm,
        2.0 * a2 * s.p2 * cp,
        2.0 * a2 * s.p2 * cm,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMixture {
    weights: Vec<(ExtremalStrategy, f64)>,
}

impl StrategyMixture {
    pub fn new(weights: Vec<(ExtremalStrategy, f64)>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("empty strategy mixture".into()));
        }
        if let Some((_, w)) = weights.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::Invalid(format!("negative mixture weight {w}")));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!("mixture weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn single(s: ExtremalStrategy) -> Self {
        Self {
            weights: vec![(s, 1.0)],
        }
    }

    pub fn components(&self) -> &[(ExtremalStrategy, f64)] {
        &self.weights
    }
}

pub fn mixture_correlators(m: &StrategyMixture) -> CorrelatorVector {
    m.weights
        .iter()
        .fold(CorrelatorVector::default(), |acc, (s, w)| {
            acc.plus(extremal_correlators(s).scaled(*w))
        })
}

/// Equal mixture of χ₁ and χ₃ at ξ = −π/4, β = π/4. Its operator value is
/// exactly 4p(1−p).
pub fn saturating_mixture(p: f64) -> Result<StrategyMixture> {
    let xi = -FRAC_PI_4;
    StrategyMixture::new(vec![
        (ExtremalStrategy::new(ResponseType::AllPlus, xi, FRAC_PI_4, p)?, 0.5),
        (ExtremalStrategy::new(ResponseType::PlusMinus, xi, FRAC_PI_4, p)?, 0.5),
    ])
}

/// Operator for arbitrary β with setting weights p₁ (x₁) and p₂ (x₂).
pub fn general_beta_operator(c: &CorrelatorVector, p1: f64, p2: f64, beta: f64) -> Result<f64> {
    check_range("p1", p1, 0.0, 1.0, "[0, 1]")?;
    check_range("p2", p2, 0.0, 1.0, "[0, 1]")?;
    if (p1 + p2 - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("p1 + p2 = {} != 1", p1 + p2)));
    }
    if !(beta > 0.0 && beta < FRAC_PI_2) {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "(0, pi/2)",
        });
    }
    let cos2b = (2.0 * beta).cos();
    let quad = |u1: f64, u2: f64| (u1 * u1 + u2 * u2 - 2.0 * u1 * u2 * cos2b).max(0.0);
    let alpha1 = quad(p2 * c.e11 + p1 * c.e21, p2 * c.e12 + p1 * c.e22);
    let alpha2 = quad(p2 * c.e11 - p1 * c.e21, p2 * c.e12 - p1 * c.e22);
    Ok(alpha1.sqrt() + alpha2.sqrt())
}

/// 4p₁p₂ sin 2β.
pub fn general_beta_bound(p1: f64, p2: f64, beta: f64) -> f64 {
    4.0 * p1 * p2 * (2.0 * beta).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub p: f64,
    pub samples: usize,
    #[serde(rename = "maxI")]
    pub max_i: f64,
    pub bound: f64,
    pub pass: bool,
    pub seed: u64,
    /// Operator value of [`saturating_mixture`] at the same `p`.
    #[serde(rename = "saturatingI")]
    pub saturating_i: f64,
}

/// Random mixture for sample `index`; each index owns its RNG stream so
/// results do not depend on evaluation order or thread count.
pub fn sample_mixture(p: f64, beta: f64, seed: u64, index: u64) -> Result<StrategyMixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let components = rng.gen_range(1..=4);
    let mut raw = Vec::with_capacity(components);
    for _ in 0..components {
        let chi = ResponseType::ALL[rng.gen_range(0..4)];
        let xi = if rng.gen_bool(0.5) {
            TAU * rng.gen_range(0..XI_GRID_POINTS) as f64 / XI_GRID_POINTS as f64
        } else {
            rng.gen_range(0.0..TAU)
        };
        let w: f64 = if components == 1 { 1.0 } else { rng.gen_range(1e-6..1.0) };
        raw.push((ExtremalStrategy::new(chi, xi, beta, p)?, w));
    }
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    StrategyMixture::new(raw.into_iter().map(|(s, w)| (s, w / total)).collect())
}

fn check_sweep_args(p: f64, samples: usize) -> Result<()> {
    check_p(p)?;
    if p == 0.0 {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "(0, 0.5]",
        });
    }
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    Ok(())
}

/// Largest operator value over `samples` random MD-LHV-LHS mixtures at
/// β = π/4, compared against 4p(1−p).
pub fn bound_sweep(p: f64, samples: usize, seed: u64) -> Result<SweepReport> {
    check_sweep_args(p, samples)?;
    let max_i = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = mixture_correlators(&sample_mixture(p, FRAC_PI_4, seed, i)?);
            md_operator(&c, p)
        })
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
    let bound = local_bound(p)?;
    let saturating_i = md_operator(&mixture_correlators(&saturating_mixture(p)?), p)?;
    Ok(SweepReport {
        p,
        samples,
        max_i,
        bound,
        pass: max_i <= bound + BOUND_SLACK,
        seed,
        saturating_i,
    })
}

/// As [`bound_sweep`] for arbitrary β, using the general-β operator and the
/// bound 4p₁p₂ sin 2β. Returns (max value, bound).
pub fn bound_sweep_beta(p: f64, beta: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_sweep_args(p, samples)?;
    let (p1, p2) = (1.0 - p, p);
    let max_i = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = mixture_correlators(&sample_mixture(p, beta, seed, i)?);
            general_beta_operator(&c, p1, p2, beta)
        })
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
    Ok((max_i, general_beta_bound(p1, p2, beta)))
}
