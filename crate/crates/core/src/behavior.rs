//! Bipartite behaviors p(ab|xy) with two binary-outcome settings per party.
//!
//! Arrays are indexed `[x][y][a][b]`; setting index 0 is x₁ (y₁) and
//! outcome index 0 is the +1 outcome, index 1 the −1 outcome.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::kernel::{outcome_projector, pauli_observable, phi_plus, tensor, Direction, TwoQubitState};
use crate::tolerance::Tolerances;

pub type ProbabilityTable = [[[[f64; 2]; 2]; 2]; 2];

/// Sign of the outcome stored at array index `i` (0 ↔ +1, 1 ↔ −1).
pub const fn outcome_sign(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Behavior {
    probabilities: ProbabilityTable,
}

impl Behavior {
    pub fn new(probabilities: ProbabilityTable) -> Result<Self> {
        Self::with_tolerances(probabilities, &Tolerances::default())
    }

    pub fn with_tolerances(probabilities: ProbabilityTable, tol: &Tolerances) -> Result<Self> {
        for x in 0..2 {
            for y in 0..2 {
                let mut total = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let v = probabilities[x][y][a][b];
                        if !v.is_finite() || v < -tol.negativity {
                            return Err(Error::Invalid(format!(
                                "probabilities[{x}][{y}][{a}][{b}] = {v} is not a valid probability"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > tol.normalization {
                    return Err(Error::Invalid(format!(
                        "probabilities[{x}][{y}] sums to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(Self { probabilities })
    }

    /// Every entry 1/4.
    pub fn uniform() -> Self {
        Self {
            probabilities: [[[[0.25; 2]; 2]; 2]; 2],
        }
    }

    pub fn probabilities(&self) -> &ProbabilityTable {
        &self.probabilities
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.probabilities[x][y][a][b]
    }

    /// Alice's marginal p(a|x, y).
    pub fn alice_marginal(&self, x: usize, y: usize, a: usize) -> f64 {
        self.probabilities[x][y][a].iter().sum()
    }

    /// Bob's marginal p(b|x, y).
    pub fn bob_marginal(&self, x: usize, y: usize, b: usize) -> f64 {
        (0..2).map(|a| self.probabilities[x][y][a][b]).sum()
    }
}

/// (⟨x₁y₁⟩, ⟨x₁y₂⟩, ⟨x₂y₁⟩, ⟨x₂y₂⟩).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelatorVector {
    pub e11: f64,
    pub e12: f64,
    pub e21: f64,
    pub e22: f64,
}

impl CorrelatorVector {
    pub const fn new(e11: f64, e12: f64, e21: f64, e22: f64) -> Self {
        Self { e11, e12, e21, e22 }
    }

    /// Correlators of the PR box.
    pub const PR: Self = Self::new(1.0, 1.0, 1.0, -1.0);

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.e11, self.e12, self.e21, self.e22]
    }

    /// ⟨x_{x+1} y_{y+1}⟩ by zero-based setting indices.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.to_array()[2 * x + y]
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * s))
    }

    pub fn plus(self, other: Self) -> Self {
        let a = self.to_array();
        let b = other.to_array();
        Self::from_array([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn correlators(b: &Behavior) -> CorrelatorVector {
    let mut e = [0.0; 4];
    for x in 0..2 {
        for y in 0..2 {
            e[2 * x + y] = (0..2)
                .flat_map(|a| (0..2).map(move |bb| (a, bb)))
                .map(|(a, bb)| outcome_sign(a) * outcome_sign(bb) * b.get(x, y, a, bb))
                .sum();
        }
    }
    CorrelatorVector::from_array(e)
}

/// e11 + e12 + e21 − e22.
pub fn chsh_value(b: &Behavior) -> f64 {
    let c = correlators(b);
    c.e11 + c.e12 + c.e21 - c.e22
}

/// p(ab|xy) = Tr[(Π_a^x ⊗ Π_b^y) ρ] with Π_a^x = (I + a n̂·σ)/2.
pub fn behavior_from_quantum(
    state: &TwoQubitState,
    alice: &[Direction; 2],
    bob: &[Direction; 2],
) -> Result<Behavior> {
    let mut table: ProbabilityTable = [[[[0.0; 2]; 2]; 2]; 2];
    for (x, n) in alice.iter().enumerate() {
        for (y, m) in bob.iter().enumerate() {
            for a in 0..2 {
                let pa = outcome_projector(n, a == 0);
                for b in 0..2 {
                    let pb = outcome_projector(m, b == 0);
                    let joint = tensor(&pa, &pb);
                    table[x][y][a][b] = joint.trace_product(state.density())?.re;
                }
            }
        }
    }
    Behavior::new(table)
}

/// Correlators computed directly as Tr[(n̂·σ ⊗ m̂·σ) ρ].
pub fn quantum_correlators(
    state: &TwoQubitState,
    alice: &[Direction; 2],
    bob: &[Direction; 2],
) -> Result<CorrelatorVector> {
    let mut e = [0.0; 4];
    for (x, n) in alice.iter().enumerate() {
        for (y, m) in bob.iter().enumerate() {
            let obs = tensor(&pauli_observable(n), &pauli_observable(m));
            e[2 * x + y] = crate::kernel::expectation(state, &obs)?;
        }
    }
    Ok(CorrelatorVector::from_array(e))
}

/// PR box: outputs perfectly correlated except anticorrelated for x₂y₂.
pub fn pr_box() -> Behavior {
    let mut table: ProbabilityTable = [[[[0.0; 2]; 2]; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            let want_product = if x == 1 && y == 1 { -1.0 } else { 1.0 };
            for a in 0..2 {
                for b in 0..2 {
                    if outcome_sign(a) * outcome_sign(b) == want_product {
                        table[x][y][a][b] = 0.5;
                    }
                }
            }
        }
    }
    Behavior { probabilities: table }
}

/// Measurement settings of the tilted extremal family, in the order
/// (x₁, x₂), (y₁, y₂).
pub fn tilted_settings(delta: f64) -> ([Direction; 2], [Direction; 2]) {
    (
        [Direction::z(), Direction::planar(FRAC_PI_2 + delta)],
        [Direction::x(), Direction::planar(-delta)],
    )
}

/// Behavior of |Φ⁺⟩ with x₁ = σz, x₂ = −sin δ σz + cos δ σx, y₁ = σx,
/// y₂ = cos δ σz − sin δ σx, for 0 < δ ≤ π/6.
pub fn tilted_behavior(delta: f64) -> Result<Behavior> {
    if !(delta > 0.0 && delta <= FRAC_PI_6) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "(0, pi/6]",
        });
    }
    let (alice, bob) = tilted_settings(delta);
    behavior_from_quantum(&phi_plus(), &alice, &bob)
}

/// Settings of the randomness-certifying family, in the order
/// (x̃₁, x̃₂), (ỹ₁, ỹ₂).
pub fn randomness_settings(gamma: f64) -> ([Direction; 2], [Direction; 2]) {
    (
        [Direction::z(), Direction::planar(2.0 * PI / 3.0 - 2.0 * gamma)],
        [
            Direction::planar(FRAC_PI_2 - 3.0 * gamma),
            Direction::planar(-(FRAC_PI_6 + gamma)),
        ],
    )
}

/// Behavior of |Φ⁺⟩ with x̃₁ = σz, ỹ₁ = sin 3γ σz + cos 3γ σx,
/// x̃₂ = cos(2π/3 − 2γ) σz + sin(2π/3 − 2γ) σx and
/// ỹ₂ = cos(π/6 + γ) σz − sin(π/6 + γ) σx, for 0 ≤ γ ≤ π/12.
pub fn randomness_behavior(gamma: f64) -> Result<Behavior> {
    check_range("gamma", gamma, 0.0, PI / 12.0, "[0, pi/12]")?;
    let (alice, bob) = randomness_settings(gamma);
    behavior_from_quantum(&phi_plus(), &alice, &bob)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoSignallingReport {
    /// max |p(a|x,y₁) − p(a|x,y₂)| over a, x.
    pub alice_deviation: f64,
    /// max |p(b|x₁,y) − p(b|x₂,y)| over b, y.
    pub bob_deviation: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

pub fn no_signalling_check(b: &Behavior) -> NoSignallingReport {
    no_signalling_check_with(b, &Tolerances::default())
}

pub fn no_signalling_check_with(b: &Behavior, tol: &Tolerances) -> NoSignallingReport {
    let mut alice: f64 = 0.0;
    let mut bob: f64 = 0.0;
    for i in 0..2 {
        for o in 0..2 {
            alice = alice.max((b.alice_marginal(i, 0, o) - b.alice_marginal(i, 1, o)).abs());
            bob = bob.max((b.bob_marginal(0, i, o) - b.bob_marginal(1, i, o)).abs());
        }
    }
    let max_deviation = alice.max(bob);
    NoSignallingReport {
        alice_deviation: alice,
        bob_deviation: bob,
        max_deviation,
        pass: max_deviation <= tol.no_signalling,
    }
}
