//! The measurement-dependent LHV-LHS inequality √α₁ + √α₂ ≤ 4p(1−p), its
//! closed forms for the PR box and the tilted family, and the randomness
//! rate of the randomness-certifying family.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::behavior::CorrelatorVector;
use crate::error::{check_range, Error, Result};

/// Measurement-dependence parameters: `p` bounds Alice's setting choice in
/// the inequality, `l` bounds p(x|λ) from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdParams {
    p: f64,
    l: f64,
}

impl MdParams {
    pub fn new(p: f64, l: f64) -> Result<Self> {
        Ok(Self {
            p: check_p(p)?,
            l: check_range("l", l, 0.0, 0.5, "[0, 0.5]")?,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// p = 0.5: no measurement dependence.
    pub fn is_measurement_independent(&self) -> bool {
        self.p == 0.5
    }
}

pub(crate) fn check_p(p: f64) -> Result<f64> {
    check_range("p", p, 0.0, 0.5, "[0, 0.5]")
}

/// (α₁, α₂) for measurement-dependence parameter `p`.
pub fn alphas(c: &CorrelatorVector, p: f64) -> Result<(f64, f64)> {
    let p = check_p(p)?;
    let q = 1.0 - p;
    let s1 = p * c.e11 + q * c.e21;
    let s2 = p * c.e12 + q * c.e22;
    let d1 = p * c.e11 - q * c.e21;
    let d2 = p * c.e12 - q * c.e22;
    Ok((s1 * s1 + s2 * s2, d1 * d1 + d2 * d2))
}

/// I = √α₁ + √α₂.
pub fn md_operator(c: &CorrelatorVector, p: f64) -> Result<f64> {
    let (a1, a2) = alphas(c, p)?;
    Ok(a1.sqrt() + a2.sqrt())
}

/// 4p(1 − p).
pub fn local_bound(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    Ok(4.0 * p * (1.0 - p))
}

/// md_operator − local_bound; positive values rule out an MD-LHV-LHS model.
pub fn violation(c: &CorrelatorVector, p: f64) -> Result<f64> {
    Ok(md_operator(c, p)? - local_bound(p)?)
}

/// 2√(2 − 4p(1−p)).
pub fn pr_closed_form(p: f64) -> Result<f64> {
    let p = check_p(p)?;
    Ok(2.0 * (2.0 - 4.0 * p * (1.0 - p)).sqrt())
}

fn check_delta(delta: f64) -> Result<f64> {
    if delta > 0.0 && delta <= FRAC_PI_6 {
        Ok(delta)
    } else {
        Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "(0, pi/6]",
        })
    }
}

/// Closed-form operator value of the tilted extremal behavior.
pub fn tilted_closed_form(delta: f64, p: f64) -> Result<f64> {
    let delta = check_delta(delta)?;
    let p = check_p(p)?;
    let (s, c2) = (delta.sin(), delta.cos().powi(2));
    let t1 = 2.0 * (p - 1.0) * s + p;
    let t2 = p - 2.0 * (p - 1.0) * s;
    let pm = (p - 1.0) * (p - 1.0);
    Ok((c2 * (t1 * t1 + pm)).sqrt() + (c2 * (t2 * t2 + pm)).sqrt())
}

/// I_δ = ⟨A₀B₀⟩ + (⟨A₀B₁⟩ + ⟨A₁B₀⟩)/sin δ − ⟨A₁B₁⟩/cos 2δ.
pub fn tilted_bell_value(c: &CorrelatorVector, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < FRAC_PI_4) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "(0, pi/4)",
        });
    }
    let s = delta.sin();
    let c2 = (2.0 * delta).cos();
    if s == 0.0 {
        return Err(Error::DivisionByZero("sin(delta) = 0"));
    }
    if c2.abs() < f64::EPSILON {
        return Err(Error::DivisionByZero("cos(2 delta) = 0"));
    }
    Ok(c.e11 + (c.e12 + c.e21) / s - c.e22 / c2)
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let h = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.log2() };
    h(x) + h(1.0 - x)
}

const ARCCOS_SLACK: f64 = 1e-12;

/// Argument of the binary entropy in the randomness rate.
pub fn randomness_entropy_argument(gamma: f64) -> Result<f64> {
    check_range("gamma", gamma, 0.0, PI / 12.0, "[0, pi/12]")?;
    let s = (3.0 * gamma).sin() + 3.0 * (gamma + FRAC_PI_6).cos();
    let mut arg = -s / (2.0 * SQRT_2);
    if arg.abs() > 1.0 {
        if arg.abs() - 1.0 > ARCCOS_SLACK {
            return Err(Error::OutOfRange {
                name: "arccos argument",
                value: arg,
                range: "[-1, 1]",
            });
        }
        arg = arg.clamp(-1.0, 1.0);
    }
    Ok(0.5 + 0.5 * s - 3.0 / SQRT_2 * (arg.acos() / 3.0).cos())
}

/// Device-independent randomness rate r(γ) = 1 + H_b[·] in bits per round.
pub fn randomness_rate(gamma: f64) -> Result<f64> {
    let x = randomness_entropy_argument(gamma)?;
    if !(-ARCCOS_SLACK..=1.0 + ARCCOS_SLACK).contains(&x) {
        return Err(Error::OutOfRange {
            name: "entropy argument",
            value: x,
            range: "[0, 1]",
        });
    }
    Ok(1.0 + binary_entropy(x.clamp(0.0, 1.0)))
}
