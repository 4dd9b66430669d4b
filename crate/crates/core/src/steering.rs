//! Assemblages, measurement-dependent local-hidden-state models, and the
//! measurement-dependent weight.

use rand::Rng;

use crate::behavior::{Behavior, ProbabilityTable};
use crate::error::{check_range, Error, Result};
use crate::kernel::{
    outcome_projector, partial_trace_first, tensor, ComplexMatrix, Direction, TwoQubitState,
};
use crate::tolerance::Tolerances;

/// Bob's unnormalized conditional states σ_{a|x}, stored `[x][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    elements: [[ComplexMatrix; 2]; 2],
}

impl Assemblage {
    pub fn new(elements: [[ComplexMatrix; 2]; 2]) -> Result<Self> {
        Self::with_tolerances(elements, &Tolerances::default())
    }

    /// Checks positivity of every element and Σ_a Tr σ_{a|x} = 1 for each x.
    pub fn with_tolerances(elements: [[ComplexMatrix; 2]; 2], tol: &Tolerances) -> Result<Self> {
        for (x, row) in elements.iter().enumerate() {
            for sigma in row {
                if sigma.rows() != 2 || sigma.cols() != 2 {
                    return Err(Error::Shape("assemblage elements must be 2x2".into()));
                }
                let dev = sigma.hermitian_deviation();
                if dev > tol.psd {
                    return Err(Error::NotHermitian(dev));
                }
                let min = sigma.min_eigenvalue()?;
                if min < -tol.psd {
                    return Err(Error::NotPsd(min));
                }
            }
            let total: f64 = row.iter().map(|s| s.trace().re).sum();
            if (total - 1.0).abs() > tol.normalization {
                return Err(Error::Normalization {
                    setting: x + 1,
                    total,
                });
            }
        }
        Ok(Self { elements })
    }

    /// σ_{a|x} with zero-based indices (a = 0 is the + outcome).
    pub fn element(&self, x: usize, a: usize) -> &ComplexMatrix {
        &self.elements[x][a]
    }

    pub fn elements(&self) -> &[[ComplexMatrix; 2]; 2] {
        &self.elements
    }

    /// p(a|x) = Tr σ_{a|x}.
    pub fn marginal(&self, x: usize, a: usize) -> f64 {
        self.elements[x][a].trace().re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for x in 0..2 {
            for a in 0..2 {
                d = d.max(
                    self.elements[x][a]
                        .max_abs_diff(&other.elements[x][a])
                        .unwrap_or(f64::INFINITY),
                );
            }
        }
        d
    }
}

/// σ_{a|x} = Tr_A[(Π_a^x ⊗ I) ρ_AB].
pub fn assemblage_from_state(state: &TwoQubitState, alice: &[Direction; 2]) -> Result<Assemblage> {
    let id = ComplexMatrix::identity(2);
    let build = |x: usize, a: usize| -> Result<ComplexMatrix> {
        let op = tensor(&outcome_projector(&alice[x], a == 0), &id);
        partial_trace_first(&op.matmul(state.density())?)
    };
    Assemblage::new([
        [build(0, 0)?, build(0, 1)?],
        [build(1, 0)?, build(1, 1)?],
    ])
}

/// Discrete measurement-dependent local-hidden-state model.
///
/// `p_lambda_given_x[x][λ]`, `p_a_given_x_lambda[x][λ][a]` and
/// `states[x][λ]` (normalized 2x2 densities).
#[derive(Debug, Clone, PartialEq)]
pub struct MdLhsModel {
    lambdas: usize,
    p_lambda_given_x: [Vec<f64>; 2],
    p_a_given_x_lambda: [Vec<[f64; 2]>; 2],
    states: [Vec<ComplexMatrix>; 2],
}

impl MdLhsModel {
    pub fn new(
        p_lambda_given_x: [Vec<f64>; 2],
        p_a_given_x_lambda: [Vec<[f64; 2]>; 2],
        states: [Vec<ComplexMatrix>; 2],
    ) -> Result<Self> {
        Self::with_tolerances(p_lambda_given_x, p_a_given_x_lambda, states, &Tolerances::default())
    }

    pub fn with_tolerances(
        p_lambda_given_x: [Vec<f64>; 2],
        p_a_given_x_lambda: [Vec<[f64; 2]>; 2],
        states: [Vec<ComplexMatrix>; 2],
        tol: &Tolerances,
    ) -> Result<Self> {
        let lambdas = p_lambda_given_x[0].len();
        if lambdas == 0 {
            return Err(Error::Invalid("model needs at least one hidden variable".into()));
        }
        for x in 0..2 {
            if p_lambda_given_x[x].len() != lambdas
                || p_a_given_x_lambda[x].len() != lambdas
                || states[x].len() != lambdas
            {
                return Err(Error::Shape(format!(
                    "every table must have {lambdas} hidden-variable entries"
                )));
            }
            check_distribution(&p_lambda_given_x[x], tol)
                .map_err(|e| Error::Invalid(format!("p(lambda|x{}): {e}", x + 1)))?;
            for (l, pa) in p_a_given_x_lambda[x].iter().enumerate() {
                check_distribution(pa, tol)
                    .map_err(|e| Error::Invalid(format!("p(a|x{}, lambda{l}): {e}", x + 1)))?;
            }
            for (l, rho) in states[x].iter().enumerate() {
                check_qubit_density(rho, tol)
                    .map_err(|e| Error::Invalid(format!("rho(lambda{l}|x{}): {e}", x + 1)))?;
            }
        }
        Ok(Self {
            lambdas,
            p_lambda_given_x,
            p_a_given_x_lambda,
            states,
        })
    }

    /// Measurement-independent special case: p(λ|x) = p(λ), ρ_{λ|x} = ρ_λ.
    pub fn measurement_independent(
        p_lambda: Vec<f64>,
        p_a_given_x_lambda: [Vec<[f64; 2]>; 2],
        states: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        Self::new(
            [p_lambda.clone(), p_lambda],
            p_a_given_x_lambda,
            [states.clone(), states],
        )
    }

    /// Random model with `lambdas` hidden variables and mixed Bloch-ball
    /// states; p(λ|x₁) and p(λ|x₂) are drawn independently.
    pub fn random<R: Rng + ?Sized>(lambdas: usize, rng: &mut R) -> Self {
        assert!(lambdas > 0);
        let dist = |rng: &mut R| -> Vec<f64> {
            let w: Vec<f64> = (0..lambdas).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        };
        let p_lambda_given_x = [dist(rng), dist(rng)];
        let p_a = |rng: &mut R| -> Vec<[f64; 2]> {
            (0..lambdas)
                .map(|_| {
                    let p: f64 = rng.gen();
                    [p, 1.0 - p]
                })
                .collect()
        };
        let p_a_given_x_lambda = [p_a(rng), p_a(rng)];
        let states = [
            (0..lambdas).map(|_| random_qubit_density(rng)).collect(),
            (0..lambdas).map(|_| random_qubit_density(rng)).collect(),
        ];
        Self::new(p_lambda_given_x, p_a_given_x_lambda, states)
            .expect("randomly generated model is valid")
    }

    pub fn lambdas(&self) -> usize {
        self.lambdas
    }

    pub fn p_lambda_given_x(&self, x: usize, lambda: usize) -> f64 {
        self.p_lambda_given_x[x][lambda]
    }

    pub fn p_a_given_x_lambda(&self, a: usize, x: usize, lambda: usize) -> f64 {
        self.p_a_given_x_lambda[x][lambda][a]
    }

    pub fn state(&self, x: usize, lambda: usize) -> &ComplexMatrix {
        &self.states[x][lambda]
    }

    pub fn lambda_distribution(&self, x: usize) -> &[f64] {
        &self.p_lambda_given_x[x]
    }

    /// Σ_λ p(λ|x) p(a|xλ), indexed `[x][a]`.
    pub fn outcome_marginals(&self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for (x, row) in m.iter_mut().enumerate() {
            for (a, v) in row.iter_mut().enumerate() {
                *v = (0..self.lambdas)
                    .map(|l| self.p_lambda_given_x[x][l] * self.p_a_given_x_lambda[x][l][a])
                    .sum();
            }
        }
        m
    }
}

fn check_distribution(p: &[f64], tol: &Tolerances) -> std::result::Result<(), String> {
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -tol.negativity) {
        return Err(format!("entry {v} is negative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol.normalization {
        return Err(format!("sums to {s}"));
    }
    Ok(())
}

fn check_qubit_density(rho: &ComplexMatrix, tol: &Tolerances) -> std::result::Result<(), String> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err("not 2x2".into());
    }
    if (rho.trace().re - 1.0).abs() > tol.normalization {
        return Err(format!("trace {}", rho.trace()));
    }
    if !rho.is_psd(tol.psd) {
        return Err("not positive semidefinite".into());
    }
    Ok(())
}

/// (I + r·σ)/2 with r uniform in the unit ball.
pub fn random_qubit_density<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let (polar, azimuth) = (
        (1.0 - 2.0 * rng.gen::<f64>()).acos(),
        std::f64::consts::TAU * rng.gen::<f64>(),
    );
    let radius = rng.gen::<f64>().cbrt();
    let n = Direction::spherical(polar, azimuth);
    let id = ComplexMatrix::identity(2).scale(0.5);
    &id + &crate::kernel::pauli_observable(&n).scale(0.5 * radius)
}

/// σ_{a|x} = Σ_λ p(λ|x) p(a|xλ) ρ_{λ|x}.
pub fn assemblage_from_mdlhs(model: &MdLhsModel) -> Result<Assemblage> {
    let build = |x: usize, a: usize| -> ComplexMatrix {
        (0..model.lambdas).fold(ComplexMatrix::zeros(2, 2), |acc, l| {
            let w = model.p_lambda_given_x[x][l] * model.p_a_given_x_lambda[x][l][a];
            &acc + &model.states[x][l].scale(w)
        })
    };
    Assemblage::new([[build(0, 0), build(0, 1)], [build(1, 0), build(1, 1)]])
}

/// p(ab|xy) = Tr[Π_b^y σ_{a|x}].
pub fn behavior_from_assemblage(asm: &Assemblage, bob: &[Direction; 2]) -> Result<Behavior> {
    let mut table: ProbabilityTable = [[[[0.0; 2]; 2]; 2]; 2];
    for x in 0..2 {
        for (y, m) in bob.iter().enumerate() {
            for b in 0..2 {
                let proj = outcome_projector(m, b == 0);
                for a in 0..2 {
                    table[x][y][a][b] = proj.trace_product(asm.element(x, a))?.re;
                }
            }
        }
    }
    Behavior::new(table)
}

/// Largest entry difference between the behavior obtained through the
/// model's assemblage and the explicit hidden-variable sum
/// Σ_λ p(λ|x) p(a|xλ) Tr[Π_b^y ρ_{λ|x}].
pub fn mdlhv_decomposition_check(model: &MdLhsModel, bob: &[Direction; 2]) -> Result<f64> {
    let via_assemblage = behavior_from_assemblage(&assemblage_from_mdlhs(model)?, bob)?;

    let mut residual: f64 = 0.0;
    for x in 0..2 {
        for (y, m) in bob.iter().enumerate() {
            for b in 0..2 {
                let proj = outcome_projector(m, b == 0);
                let bob_probs: Vec<f64> = (0..model.lambdas)
                    .map(|l| proj.trace_product(model.state(x, l)).map(|z| z.re))
                    .collect::<Result<_>>()?;
                for a in 0..2 {
                    let direct: f64 = (0..model.lambdas)
                        .map(|l| {
                            model.p_lambda_given_x(x, l)
                                * model.p_a_given_x_lambda(a, x, l)
                                * bob_probs[l]
                        })
                        .sum();
                    residual = residual.max((via_assemblage.get(x, y, a, b) - direct).abs());
                }
            }
        }
    }
    Ok(residual)
}

/// Mixing weights η^{a|x}, stored `[x][a]` with a = 0 the + outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaTable {
    values: [[f64; 2]; 2],
}

impl EtaTable {
    pub fn new(plus_x1: f64, minus_x1: f64, plus_x2: f64, minus_x2: f64) -> Self {
        Self {
            values: [[plus_x1, minus_x1], [plus_x2, minus_x2]],
        }
    }

    pub fn uniform(eta: f64) -> Self {
        Self::new(eta, eta, eta, eta)
    }

    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.values[x][a]
    }

    /// η^{−|x₂} / η^{−|x₁}.
    pub fn minus_ratio(&self) -> Result<f64> {
        let denom = self.values[0][1];
        if denom == 0.0 {
            return Err(Error::DivisionByZero("eta^{-|x1} = 0"));
        }
        Ok(self.values[1][1] / denom)
    }

    fn check(&self, lo_open: bool) -> Result<()> {
        for v in self.values.iter().flatten() {
            let ok = if lo_open {
                *v > 0.0 && *v < 1.0
            } else {
                (0.0..=1.0).contains(v)
            };
            if !ok {
                return Err(Error::OutOfRange {
                    name: "eta",
                    value: *v,
                    range: if lo_open { "(0, 1)" } else { "[0, 1]" },
                });
            }
        }
        Ok(())
    }
}

/// σ_{a|x} = (1 − η^{a|x}) γ_{a|x} + η^{a|x} σ^{MD-LHS}_{a|x}.
///
/// Fails with [`Error::Normalization`] when outcome-dependent weights break
/// Σ_a Tr σ_{a|x} = 1.
pub fn mix_assemblages(steerable: &Assemblage, mdlhs: &Assemblage, eta: &EtaTable) -> Result<Assemblage> {
    eta.check(false)?;
    let mix = |x: usize, a: usize| -> ComplexMatrix {
        let w = eta.get(x, a);
        &steerable.element(x, a).scale(1.0 - w) + &mdlhs.element(x, a).scale(w)
    };
    Assemblage::new([[mix(0, 0), mix(0, 1)], [mix(1, 0), mix(1, 1)]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    pub eta: EtaTable,
    pub p_lambda_x1: Vec<f64>,
    pub p_lambda_x2: Vec<f64>,
}

impl WeightParams {
    pub fn new(eta: EtaTable, p_lambda_x1: Vec<f64>, p_lambda_x2: Vec<f64>) -> Result<Self> {
        let tol = Tolerances::default();
        if p_lambda_x1.len() != p_lambda_x2.len() || p_lambda_x1.is_empty() {
            return Err(Error::Shape("p(lambda|x1) and p(lambda|x2) need equal, nonzero length".into()));
        }
        if eta.get(0, 1) == 0.0 {
            return Err(Error::DivisionByZero("eta^{-|x1} = 0"));
        }
        eta.check(true)?;
        for (x, p) in [&p_lambda_x1, &p_lambda_x2].into_iter().enumerate() {
            check_distribution(p, &tol)
                .map_err(|e| Error::Invalid(format!("p(lambda|x{}): {e}", x + 1)))?;
        }
        Ok(Self {
            eta,
            p_lambda_x1,
            p_lambda_x2,
        })
    }
}

/// 𝒲 = Σ_λ [p(λ|x₁) − (η^{−|x₂}/η^{−|x₁}) p(λ|x₂)]. Signed; not clamped.
pub fn md_weight(params: &WeightParams) -> Result<f64> {
    let ratio = params.eta.minus_ratio()?;
    Ok(params
        .p_lambda_x1
        .iter()
        .zip(&params.p_lambda_x2)
        .map(|(p1, p2)| p1 - ratio * p2)
        .sum())
}

/// 𝒲 at the two extreme settings p(x₁|λ) = l and p(x₁|λ) = 1 − l.
pub fn weight_limit_values(l: f64, p_x1: f64, eta_ratio: f64) -> Result<(f64, f64)> {
    check_range("l", l, 0.0, 0.5, "[0, 0.5]")?;
    if p_x1 == 0.0 || p_x1 == 1.0 {
        return Err(Error::DivisionByZero("p(x1) must lie strictly inside (0, 1)"));
    }
    check_range("p(x1)", p_x1, 0.0, 1.0, "(0, 1)")?;
    if !(eta_ratio.is_finite() && eta_ratio > 0.0) {
        return Err(Error::OutOfRange {
            name: "eta ratio",
            value: eta_ratio,
            range: "(0, inf)",
        });
    }
    let p_x2 = 1.0 - p_x1;
    let low = l / p_x1 - eta_ratio * (1.0 - l) / p_x2;
    let high = (1.0 - l) / p_x1 - eta_ratio * l / p_x2;
    Ok((low, high))
}

/// Upper bound on 𝒲 for the mixed assemblage to stay MD-steerable:
/// (1/η^{−|x₁}) [p(+|x₂)(η^{+|x₂} + η^{−|x₂}) − p(+|x₁)(η^{+|x₁} + η^{−|x₁})].
pub fn weight_bound(p_plus_x1: f64, p_plus_x2: f64, eta: &EtaTable) -> Result<f64> {
    check_range("p(+|x1)", p_plus_x1, 0.0, 1.0, "[0, 1]")?;
    check_range("p(+|x2)", p_plus_x2, 0.0, 1.0, "[0, 1]")?;
    let denom = eta.get(0, 1);
    if denom == 0.0 {
        return Err(Error::DivisionByZero("eta^{-|x1} = 0"));
    }
    eta.check(true)?;
    // Each η sum is divided before multiplying so that equal weights give
    // exactly 2[p(+|x₂) − p(+|x₁)].
    let w2 = (eta.get(1, 0) + eta.get(1, 1)) / denom;
    let w1 = (eta.get(0, 0) + eta.get(0, 1)) / denom;
    Ok(p_plus_x2 * w2 - p_plus_x1 * w1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::pure_state;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn half_identity() -> ComplexMatrix {
        ComplexMatrix::identity(2).scale(0.5)
    }

    fn quarter_assemblage() -> Assemblage {
        let q = ComplexMatrix::identity(2).scale(0.25);
        Assemblage::new([[q.clone(), q.clone()], [q.clone(), q]]).unwrap()
    }

    fn ket0_projector() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[1.0, 0.0])
    }

    #[test]
    fn bell_state_assemblage() {
        let asm = assemblage_from_state(&pure_state(FRAC_PI_4).unwrap(), &[Direction::z(), Direction::x()])
            .unwrap();
        let want = ket0_projector().scale(0.5);
        assert!(asm.element(0, 0).max_abs_diff(&want).unwrap() < 1e-12);
        for x in 0..2 {
            assert!((asm.marginal(x, 0) + asm.marginal(x, 1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_assemblage_is_unsteerable() {
        let n = Direction::planar(0.8);
        let asm = assemblage_from_state(&pure_state(0.0).unwrap(), &[n, Direction::x()]).unwrap();
        let p_plus = 0.5 * (1.0 + 0.8f64.cos());
        let want = ket0_projector().scale(p_plus);
        assert!(asm.element(0, 0).max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn maximally_mixed_single_lambda_model() {
        let model = MdLhsModel::measurement_independent(
            vec![1.0],
            [vec![[0.5, 0.5]], vec![[0.5, 0.5]]],
            vec![half_identity()],
        )
        .unwrap();
        let asm = assemblage_from_mdlhs(&model).unwrap();
        assert!(asm.max_abs_diff(&quarter_assemblage()) < 1e-15);
        let b = behavior_from_assemblage(&asm, &[Direction::z(), Direction::x()]).unwrap();
        assert_eq!(b, Behavior::uniform());
        assert_eq!(mdlhv_decomposition_check(&model, &[Direction::z(), Direction::x()]).unwrap(), 0.0);
    }

    #[test]
    fn measurement_independent_reduction() {
        let rho0 = ket0_projector();
        let rho1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        let p_a = [vec![[1.0, 0.0], [0.2, 0.8]], vec![[0.6, 0.4], [0.0, 1.0]]];
        let model = MdLhsModel::measurement_independent(
            vec![0.3, 0.7],
            p_a.clone(),
            vec![rho0.clone(), rho1.clone()],
        )
        .unwrap();
        let asm = assemblage_from_mdlhs(&model).unwrap();
        // Standard LHS sum Σ_λ p(λ) p(a|xλ) ρ_λ.
        for x in 0..2 {
            for a in 0..2 {
                let want = &rho0.scale(0.3 * p_a[x][0][a]) + &rho1.scale(0.7 * p_a[x][1][a]);
                assert!(asm.element(x, a).max_abs_diff(&want).unwrap() < 1e-15);
            }
        }
    }

    #[test]
    fn measurement_dependent_model_stays_normalized() {
        let rho = half_identity();
        let model = MdLhsModel::new(
            [vec![0.9, 0.1], vec![0.2, 0.8]],
            [vec![[1.0, 0.0], [0.0, 1.0]], vec![[0.5, 0.5], [0.3, 0.7]]],
            [vec![rho.clone(), ket0_projector()], vec![ket0_projector(), rho]],
        )
        .unwrap();
        let asm = assemblage_from_mdlhs(&model).unwrap();
        for x in 0..2 {
            assert!((asm.marginal(x, 0) + asm.marginal(x, 1) - 1.0).abs() < 1e-12);
        }
        let m = model.outcome_marginals();
        assert!((m[0][0] - 0.9).abs() < 1e-15);
        assert!((m[1][0] - (0.2 * 0.5 + 0.8 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        let rho = half_identity();
        let unnormalized = MdLhsModel::new(
            [vec![0.5, 0.6], vec![0.5, 0.5]],
            [vec![[1.0, 0.0]; 2], vec![[1.0, 0.0]; 2]],
            [vec![rho.clone(); 2], vec![rho.clone(); 2]],
        );
        assert!(unnormalized.is_err());
        let bad_state = MdLhsModel::new(
            [vec![1.0], vec![1.0]],
            [vec![[1.0, 0.0]], vec![[1.0, 0.0]]],
            [vec![ComplexMatrix::diagonal(&[1.5, -0.5])], vec![rho]],
        );
        assert!(bad_state.is_err());
    }

    #[test]
    fn bell_assemblage_behavior() {
        let asm = assemblage_from_state(&pure_state(FRAC_PI_4).unwrap(), &[Direction::z(), Direction::x()])
            .unwrap();
        let bob = [Direction::z(), Direction::planar(0.4)];
        let b = behavior_from_assemblage(&asm, &bob).unwrap();
        assert!((b.get(0, 0, 0, 0) - 0.5).abs() < 1e-12);
        for x in 0..2 {
            for a in 0..2 {
                for y in 0..2 {
                    assert!((b.alice_marginal(x, y, a) - asm.marginal(x, a)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_models_satisfy_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let model = MdLhsModel::random(4, &mut rng);
            let bob = [Direction::planar(rng.gen()), Direction::spherical(rng.gen(), rng.gen())];
            assert!(mdlhv_decomposition_check(&model, &bob).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn mixture_endpoints() {
        let steer =
            assemblage_from_state(&pure_state(FRAC_PI_4).unwrap(), &[Direction::z(), Direction::x()]).unwrap();
        let lhs = quarter_assemblage();
        assert_eq!(mix_assemblages(&steer, &lhs, &EtaTable::uniform(1.0)).unwrap().max_abs_diff(&lhs), 0.0);
        assert_eq!(mix_assemblages(&steer, &lhs, &EtaTable::uniform(0.0)).unwrap().max_abs_diff(&steer), 0.0);
        let half = mix_assemblages(&lhs, &lhs, &EtaTable::uniform(0.5)).unwrap();
        assert!(half.max_abs_diff(&lhs) < 1e-16);
    }

    #[test]
    fn outcome_dependent_eta_can_break_normalization() {
        let steer =
            assemblage_from_state(&pure_state(FRAC_PI_4).unwrap(), &[Direction::z(), Direction::x()]).unwrap();
        // σ_{+|x₁} = |0><0|/2 and σ_{−|x₁} = |1><1|/2; an all-in-σ_{+} LHS part
        // moves weight between outcomes unevenly.
        let p = ket0_projector();
        let z = ComplexMatrix::zeros(2, 2);
        let lhs = Assemblage::new([[p.clone(), z.clone()], [p, z]]).unwrap();
        let err = mix_assemblages(&steer, &lhs, &EtaTable::new(0.9, 0.1, 0.5, 0.5)).unwrap_err();
        assert!(matches!(err, Error::Normalization { setting: 1, .. }), "{err}");
        assert!(mix_assemblages(&steer, &lhs, &EtaTable::uniform(1.5)).is_err());
    }

    #[test]
    fn weight_examples() {
        let p = vec![0.25, 0.75];
        let w = |m1: f64, m2: f64, p1: Vec<f64>, p2: Vec<f64>| {
            md_weight(&WeightParams::new(EtaTable::new(0.5, m1, 0.5, m2), p1, p2).unwrap()).unwrap()
        };
        assert_eq!(w(0.4, 0.4, p.clone(), p.clone()), 0.0);
        assert!((w(0.6, 0.3, p.clone(), p.clone()) - 0.5).abs() < 1e-15);
        assert!(w(0.4, 0.4, vec![0.7, 0.3], vec![0.4, 0.6]).abs() < 1e-15);
        // Negative values are legitimate.
        assert!(w(0.3, 0.6, p.clone(), p) < 0.0);
    }

    #[test]
    fn weight_params_validation() {
        let p = vec![1.0];
        assert!(matches!(
            WeightParams::new(EtaTable::new(0.5, 0.0, 0.5, 0.5), p.clone(), p.clone()),
            Err(Error::DivisionByZero(_))
        ));
        assert!(WeightParams::new(EtaTable::uniform(1.0), p.clone(), p.clone()).is_err());
        assert!(WeightParams::new(EtaTable::uniform(0.5), p.clone(), vec![0.5, 0.5]).is_err());
        assert!(WeightParams::new(EtaTable::uniform(0.5), vec![0.9], p).is_err());
    }

    #[test]
    fn weight_limit_examples() {
        assert_eq!(weight_limit_values(0.5, 0.5, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(weight_limit_values(0.25, 0.5, 1.0).unwrap(), (-1.0, 1.0));
        assert_eq!(weight_limit_values(0.0, 0.5, 1.0).unwrap(), (-2.0, 2.0));
        assert!(matches!(weight_limit_values(0.2, 0.0, 1.0), Err(Error::DivisionByZero(_))));
        assert!(matches!(weight_limit_values(0.2, 1.0, 1.0), Err(Error::DivisionByZero(_))));
        assert!(weight_limit_values(0.6, 0.5, 1.0).is_err());
    }

    #[test]
    fn weight_bound_examples() {
        assert!((weight_bound(0.5, 0.8, &EtaTable::uniform(0.5)).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(weight_bound(0.4, 0.4, &EtaTable::uniform(0.3)).unwrap(), 0.0);
        let eta = EtaTable::new(0.3, 0.5, 0.4, 0.2);
        assert!((weight_bound(0.4, 0.7, &eta).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            weight_bound(0.4, 0.7, &EtaTable::new(0.3, 0.0, 0.4, 0.2)),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn assemblage_rejects_non_psd() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        m[(1, 0)] = Complex64::new(0.5, 0.0);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        let q = ComplexMatrix::diagonal(&[0.5, 0.0]);
        assert!(matches!(
            Assemblage::new([[m, q.clone()], [q.clone(), q]]),
            Err(Error::NotPsd(_))
        ));
    }
}
