//! Maximizing the MD operator over the pure family cos θ|00⟩ − sin θ|11⟩
//! with projective qubit measurements, and figure-curve generation.

pub mod simplex;

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{behavior_from_quantum, correlators, randomness_behavior, CorrelatorVector};
use crate::error::{check_range, Result};
use crate::inequality::{
    check_p, local_bound, md_operator, pr_closed_form, randomness_rate, tilted_closed_form,
};
use crate::kernel::{expectation, pauli_observable, pure_state, tensor, Direction, TwoQubitState};

use self::simplex::{minimize, SimplexOptions};

/// State angle plus measurement directions (n̂₁, n̂₂) for Alice and
/// (m̂₁, m̂₂) for Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumAnsatz {
    pub theta: f64,
    pub alice: [Direction; 2],
    pub bob: [Direction; 2],
}

impl QuantumAnsatz {
    pub fn new(theta: f64, alice: [Direction; 2], bob: [Direction; 2]) -> Result<Self> {
        check_range("theta", theta, 0.0, FRAC_PI_2, "[0, pi/2]")?;
        Ok(Self { theta, alice, bob })
    }

    /// All four directions in the x–z plane, angles measured from +z.
    pub fn planar(theta: f64, angles: [f64; 4]) -> Result<Self> {
        Self::new(
            theta,
            [Direction::planar(angles[0]), Direction::planar(angles[1])],
            [Direction::planar(angles[2]), Direction::planar(angles[3])],
        )
    }

    pub fn state(&self) -> Result<TwoQubitState> {
        pure_state(self.theta)
    }

    pub fn correlators(&self) -> Result<CorrelatorVector> {
        Ok(correlators(&behavior_from_quantum(&self.state()?, &self.alice, &self.bob)?))
    }

    /// Polar angle from +z and azimuth from +x of every direction, in the
    /// order n̂₁, n̂₂, m̂₁, m̂₂.
    pub fn angles(&self) -> [(f64, f64); 4] {
        let dirs = [self.alice[0], self.alice[1], self.bob[0], self.bob[1]];
        dirs.map(|d| {
            let [x, y, z] = d.components();
            (z.clamp(-1.0, 1.0).acos(), y.atan2(x))
        })
    }
}

/// Operator value of the behavior produced by `ansatz`.
pub fn quantum_value(ansatz: &QuantumAnsatz, p: f64) -> Result<f64> {
    md_operator(&ansatz.correlators()?, p)
}

/// Correlation tensor T_ij = Tr[(σ_i ⊗ σ_j) ρ] of a two-qubit state, so that
/// ⟨(n̂·σ) ⊗ (m̂·σ)⟩ = n̂ᵀ T m̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor([[f64; 3]; 3]);

impl CorrelationTensor {
    pub fn of(state: &TwoQubitState) -> Result<Self> {
        let axes = [Direction::x(), Direction::new(0.0, 1.0, 0.0)?, Direction::z()];
        let mut t = [[0.0; 3]; 3];
        for (i, a) in axes.iter().enumerate() {
            for (j, b) in axes.iter().enumerate() {
                t[i][j] = expectation(state, &tensor(&pauli_observable(a), &pauli_observable(b)))?;
            }
        }
        Ok(Self(t))
    }

    /// Closed form for cos θ|00⟩ − sin θ|11⟩: diag(−sin 2θ, sin 2θ, 1).
    pub fn pure_family(theta: f64) -> Self {
        let s = (2.0 * theta).sin();
        Self([[-s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn correlation(&self, n: &Direction, m: &Direction) -> f64 {
        let n = n.components();
        let m = m.components();
        (0..3)
            .map(|i| n[i] * (0..3).map(|j| self.0[i][j] * m[j]).sum::<f64>())
            .sum()
    }

    pub fn correlators(&self, alice: &[Direction; 2], bob: &[Direction; 2]) -> CorrelatorVector {
        CorrelatorVector::new(
            self.correlation(&alice[0], &bob[0]),
            self.correlation(&alice[0], &bob[1]),
            self.correlation(&alice[1], &bob[0]),
            self.correlation(&alice[1], &bob[1]),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizerConfig {
    /// Local refinements started from the best coarse-grid points.
    pub restarts: usize,
    /// Additional refinements from seeded random starting points.
    pub random_starts: usize,
    /// Grid points per parameter in the coarse scan.
    pub grid_density: usize,
    /// Convergence tolerance on the operator value.
    pub tol: f64,
    pub seed: u64,
    /// Search Bloch-sphere directions instead of x–z plane directions.
    pub full_sphere: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            random_starts: 4,
            grid_density: 12,
            tol: 1e-7,
            seed: 0,
            full_sphere: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub p: f64,
    pub value: f64,
    /// value − 4p(1−p), for kinds that report a violation.
    pub violation: Option<f64>,
    /// Randomness rate r(γ), for the randomness kind.
    pub rate: Option<f64>,
    pub argmax: Option<QuantumAnsatz>,
}

impl CurvePoint {
    fn plain(p: f64, value: f64) -> Self {
        Self {
            p,
            value,
            violation: None,
            rate: None,
            argmax: None,
        }
    }
}

// Parameter layout: planar [θ, n₁, n₂, m₁, m₂];
// full sphere [θ, polar/azimuth pairs for n₁, n₂, m₁, m₂].
fn decode(params: &[f64], full_sphere: bool) -> (f64, [Direction; 2], [Direction; 2]) {
    let theta = params[0].clamp(0.0, FRAC_PI_2);
    let dir = |k: usize| {
        if full_sphere {
            Direction::spherical(params[1 + 2 * k], params[2 + 2 * k])
        } else {
            Direction::planar(params[1 + k])
        }
    };
    (theta, [dir(0), dir(1)], [dir(2), dir(3)])
}

fn objective(params: &[f64], p: f64, full_sphere: bool) -> f64 {
    let (theta, alice, bob) = decode(params, full_sphere);
    let t = CorrelationTensor::pure_family(theta);
    md_operator(&t.correlators(&alice, &bob), p).expect("p validated by caller")
}

fn planar_to_sphere(params: &[f64]) -> Vec<f64> {
    let mut out = vec![params[0]];
    for &a in &params[1..5] {
        out.extend([a, 0.0]);
    }
    out
}

/// Best `keep` points of the coarse planar grid, ordered by value then grid
/// index.
fn coarse_grid(p: f64, density: usize, keep: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = density.max(2);
    let thetas: Vec<f64> = (0..n).map(|k| FRAC_PI_2 * k as f64 / (n - 1) as f64).collect();
    let angles: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let dirs: Vec<Direction> = angles.iter().map(|&a| Direction::planar(a)).collect();

    let per_theta: Vec<Vec<(f64, usize, Vec<f64>)>> = thetas
        .par_iter()
        .enumerate()
        .map(|(ti, &theta)| -> Result<_> {
            let t = CorrelationTensor::pure_family(theta);
            let mut best: Vec<(f64, usize, Vec<f64>)> = Vec::with_capacity(keep + 1);
            let mut index = ti * n.pow(4);
            for a1 in 0..n {
                for a2 in 0..n {
                    for b1 in 0..n {
                        for b2 in 0..n {
                            let c = t.correlators(&[dirs[a1], dirs[a2]], &[dirs[b1], dirs[b2]]);
                            let v = md_operator(&c, p)?;
                            if best.len() < keep || v > best[best.len() - 1].0 {
                                let params =
                                    vec![theta, angles[a1], angles[a2], angles[b1], angles[b2]];
                                best.push((v, index, params));
                                best.sort_by(rank);
                                best.truncate(keep);
                            }
                            index += 1;
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut all: Vec<_> = per_theta.into_iter().flatten().collect();
    all.sort_by(rank);
    all.truncate(keep);
    Ok(all.into_iter().map(|(v, _, x)| (v, x)).collect())
}

fn rank(a: &(f64, usize, Vec<f64>), b: &(f64, usize, Vec<f64>)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Largest operator value found by a coarse grid scan followed by
/// Nelder–Mead refinement from the best grid points and from seeded random
/// starts. Deterministic for a fixed configuration.
pub fn quantum_max(p: f64, config: &OptimizerConfig) -> Result<CurvePoint> {
    let p = check_p(p)?;
    let keep = config.restarts.max(1);
    let grid = coarse_grid(p, config.grid_density, keep)?;

    let dim = if config.full_sphere { 9 } else { 5 };
    let mut starts: Vec<Vec<f64>> = grid
        .iter()
        .map(|(_, x)| if config.full_sphere { planar_to_sphere(x) } else { x.clone() })
        .collect();
    for i in 0..config.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect();
        x[0] = rng.gen_range(0.0..FRAC_PI_2);
        starts.push(x);
    }

    let opts = SimplexOptions {
        step: TAU / (2 * config.grid_density.max(2)) as f64,
        f_tol: config.tol * 1e-3,
        x_tol: 1e-8,
        max_iterations: 20_000,
    };
    let full = config.full_sphere;
    let refined: Vec<(f64, Vec<f64>)> = starts
        .par_iter()
        .map(|x0| {
            let m = minimize(|x| -objective(x, p, full), x0, &opts);
            (-m.value, m.x)
        })
        .collect();

    // Ties keep the earliest start so the result is reproducible.
    let (_, best_x) = refined
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one start");
    let (theta, alice, bob) = decode(&best_x, full);
    let ansatz = QuantumAnsatz::new(theta, alice, bob)?;
    let value = quantum_value(&ansatz, p)?;
    Ok(CurvePoint {
        p,
        value,
        violation: Some(value - local_bound(p)?),
        rate: None,
        argmax: Some(ansatz),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    Local,
    PrBox,
    Quantum,
    Tilted { delta: f64 },
    Randomness { gamma: f64 },
}

/// Evenly spaced grid from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| {
            if i == steps - 1 {
                max
            } else {
                min + (max - min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

pub fn curve(kind: CurveKind, p_grid: &[f64], config: &OptimizerConfig) -> Result<Vec<CurvePoint>> {
    for &p in p_grid {
        check_p(p)?;
    }
    let randomness_correlators = match kind {
        CurveKind::Randomness { gamma } => Some((correlators(&randomness_behavior(gamma)?), randomness_rate(gamma)?)),
        _ => None,
    };
    if let CurveKind::Tilted { delta } = kind {
        tilted_closed_form(delta, 0.5)?;
    }

    p_grid
        .iter()
        .map(|&p| -> Result<CurvePoint> {
            let bound = local_bound(p)?;
            Ok(match kind {
                CurveKind::Local => CurvePoint::plain(p, bound),
                CurveKind::PrBox => CurvePoint::plain(p, pr_closed_form(p)?),
                CurveKind::Quantum => quantum_max(p, config)?,
                CurveKind::Tilted { delta } => {
                    let value = tilted_closed_form(delta, p)?;
                    CurvePoint {
                        violation: Some(value - bound),
                        ..CurvePoint::plain(p, value)
                    }
                }
                CurveKind::Randomness { .. } => {
                    let (c, r) = randomness_correlators.expect("computed above");
                    let value = md_operator(&c, p)?;
                    CurvePoint {
                        violation: Some(value - bound),
                        rate: Some(r),
                        ..CurvePoint::plain(p, value)
                    }
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{tilted_settings, quantum_correlators};
    use crate::kernel::phi_plus;
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn small_config() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 6,
            random_starts: 2,
            grid_density: 8,
            ..Default::default()
        }
    }

    #[test]
    fn correlation_tensor_matches_trace_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let theta = rng.gen_range(0.0..FRAC_PI_2);
            let state = pure_state(theta).unwrap();
            let t = CorrelationTensor::of(&state).unwrap();
            let closed = CorrelationTensor::pure_family(theta);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((t.0[i][j] - closed.0[i][j]).abs() < 1e-12);
                }
            }
            let d = || Direction::spherical(rand::random::<f64>() * 3.0, rand::random::<f64>() * 6.0);
            let alice = [d(), d()];
            let bob = [d(), d()];
            let direct = quantum_correlators(&state, &alice, &bob).unwrap();
            let via_behavior = correlators(&behavior_from_quantum(&state, &alice, &bob).unwrap());
            assert!(t.correlators(&alice, &bob).max_abs_diff(&direct) < 1e-12);
            assert!(via_behavior.max_abs_diff(&direct) < 1e-10);
        }
    }

    #[test]
    fn product_state_value_is_bounded_by_deterministic_max() {
        // e_xy = a_x b_y, so I ≤ 2√2·max(p, 1−p); aligned z settings reach it.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for p in [0.1f64, 0.3, 0.5] {
            let cap = 2.0 * SQRT_2 * p.max(1.0 - p);
            for _ in 0..100 {
                let mut d = || Direction::spherical(rng.gen_range(0.0..3.2), rng.gen_range(0.0..TAU));
                let ansatz = QuantumAnsatz::new(0.0, [d(), d()], [d(), d()]).unwrap();
                assert!(quantum_value(&ansatz, p).unwrap() <= cap + 1e-12);
            }
        }
        let z = Direction::z();
        let aligned = QuantumAnsatz::new(0.0, [z, z], [z, z.negated()]).unwrap();
        assert!((quantum_value(&aligned, 0.5).unwrap() - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bell_state_planar_reaches_sqrt_two() {
        // cos(a + b) correlations; orthogonal pairs for both parties.
        let a = QuantumAnsatz::planar(FRAC_PI_4, [0.0, FRAC_PI_2, 0.0, -FRAC_PI_2]).unwrap();
        let v = quantum_value(&a, 0.5).unwrap();
        assert!((v - SQRT_2).abs() < 1e-9, "{v}");
        assert!((v - tilted_closed_form(1e-9, 0.5).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn p_zero_value_against_zero_bound() {
        let a = QuantumAnsatz::planar(0.5, [0.1, 0.2, 0.3, 0.4]).unwrap();
        let v = quantum_value(&a, 0.0).unwrap();
        assert!(v >= 0.0);
        assert_eq!(local_bound(0.0).unwrap(), 0.0);
    }

    #[test]
    fn quantum_max_beats_local_bound_at_half() {
        let pt = quantum_max(0.5, &small_config()).unwrap();
        assert!(pt.value > 1.0 + 0.4);
        assert!((pt.value - SQRT_2).abs() < 1e-3, "{}", pt.value);
        assert!(pt.argmax.is_some());
    }

    #[test]
    fn quantum_max_is_deterministic() {
        let cfg = small_config();
        let a = quantum_max(0.3, &cfg).unwrap();
        let b = quantum_max(0.3, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.argmax, b.argmax);
    }

    #[test]
    fn tilted_settings_are_in_search_space() {
        // The tilted behavior from |Φ⁺⟩ is a feasible point, so the optimum
        // must not fall below it.
        let delta = 0.3;
        let (alice, bob) = tilted_settings(delta);
        let c = quantum_correlators(&phi_plus(), &alice, &bob).unwrap();
        let p = 0.4;
        let best = quantum_max(p, &small_config()).unwrap();
        assert!(best.value >= md_operator(&c, p).unwrap() - 1e-6);
    }

    #[test]
    fn curve_closed_forms() {
        let cfg = OptimizerConfig::default();
        let local = curve(CurveKind::Local, &[0.0, 0.25, 0.5], &cfg).unwrap();
        let v: Vec<f64> = local.iter().map(|c| c.value).collect();
        assert_eq!(v, vec![0.0, 0.75, 1.0]);

        let pr = curve(CurveKind::PrBox, &[0.0, 0.5], &cfg).unwrap();
        assert!((pr[0].value - 2.0 * SQRT_2).abs() < 1e-15);
        assert_eq!(pr[1].value, 2.0);

        let tilted = curve(CurveKind::Tilted { delta: std::f64::consts::FRAC_PI_6 }, &[0.5], &cfg).unwrap();
        assert!((tilted[0].violation.unwrap() - 0.4012).abs() < 1e-4);

        let rnd = curve(CurveKind::Randomness { gamma: 0.1 }, &[0.2, 0.5], &cfg).unwrap();
        assert!(rnd.iter().all(|c| c.rate.is_some() && c.violation.is_some()));

        assert!(curve(CurveKind::Local, &[0.7], &cfg).is_err());
        assert!(curve(CurveKind::Tilted { delta: 1.0 }, &[0.5], &cfg).is_err());
    }

    #[test]
    fn linear_grid_endpoints() {
        assert_eq!(linear_grid(0.0, 0.5, 3), vec![0.0, 0.25, 0.5]);
        assert_eq!(linear_grid(0.1, 0.5, 1), vec![0.1]);
        assert_eq!(*linear_grid(0.0, 0.5, 26).last().unwrap(), 0.5);
    }
}
