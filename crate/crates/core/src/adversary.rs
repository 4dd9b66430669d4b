//! Hidden-variable bias on Alice's setting choice.
//!
//! An adversary holding λ picks p(x|λ) per value of λ; averaged over p(λ)
//! the settings can still look uniform to Alice.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::tolerance::Tolerances;

/// Two hidden-variable values with p(λ₁) = sin²δ_λ, p(λ₂) = cos²δ_λ and
/// p(x₁|λ₁) = cos²θ_λ, p(x₁|λ₂) = cos²φ_λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasModel {
    pub theta_lambda: f64,
    pub phi_lambda: f64,
    pub delta_lambda: f64,
}

impl BiasModel {
    pub fn new(theta_lambda: f64, phi_lambda: f64, delta_lambda: f64) -> Result<Self> {
        if ![theta_lambda, phi_lambda, delta_lambda].iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("bias angles must be finite".into()));
        }
        Ok(Self {
            theta_lambda,
            phi_lambda,
            delta_lambda,
        })
    }

    pub fn setting_bias(&self) -> SettingBias {
        let c2 = |t: f64| t.cos().powi(2);
        let s2 = |t: f64| t.sin().powi(2);
        SettingBias {
            p_lambda: vec![s2(self.delta_lambda), c2(self.delta_lambda)],
            p_x_given_lambda: vec![
                [c2(self.theta_lambda), s2(self.theta_lambda)],
                [c2(self.phi_lambda), s2(self.phi_lambda)],
            ],
        }
    }
}

/// Any number of hidden-variable values: p(λ) and rows p(x|λ) = [p(x₁|λ), p(x₂|λ)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SettingBias {
    pub p_lambda: Vec<f64>,
    pub p_x_given_lambda: Vec<[f64; 2]>,
}

impl SettingBias {
    pub fn new(p_lambda: Vec<f64>, p_x_given_lambda: Vec<[f64; 2]>) -> Result<Self> {
        let tol = Tolerances::default();
        if p_lambda.is_empty() || p_lambda.len() != p_x_given_lambda.len() {
            return Err(Error::Shape("p(lambda) and p(x|lambda) need equal, nonzero length".into()));
        }
        let s: f64 = p_lambda.iter().sum();
        if p_lambda.iter().any(|v| *v < -tol.negativity) || (s - 1.0).abs() > tol.normalization {
            return Err(Error::Invalid(format!("p(lambda) is not a distribution (sum {s})")));
        }
        check_rows(&p_x_given_lambda, &tol)?;
        Ok(Self {
            p_lambda,
            p_x_given_lambda,
        })
    }

    /// p(x) = Σ_λ p(x|λ) p(λ) for x₁, x₂.
    pub fn marginal(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (pl, row) in self.p_lambda.iter().zip(&self.p_x_given_lambda) {
            m[0] += pl * row[0];
            m[1] += pl * row[1];
        }
        m
    }

    /// Largest l with l ≤ p(x|λ) ≤ 1 − l for every entry.
    pub fn max_l(&self) -> f64 {
        self.p_x_given_lambda
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .clamp(0.0, 0.5)
    }

    /// p(x|λ) identical for every λ.
    pub fn is_measurement_independent(&self, tol: f64) -> bool {
        let first = self.p_x_given_lambda[0];
        self.p_x_given_lambda
            .iter()
            .all(|row| (row[0] - first[0]).abs() <= tol && (row[1] - first[1]).abs() <= tol)
    }

    pub fn report(&self) -> ConstraintReport {
        let [p_x1, p_x2] = self.marginal();
        ConstraintReport {
            p_lambda: self.p_lambda.clone(),
            p_x_given_lambda: self.p_x_given_lambda.clone(),
            p_x1,
            p_x2,
            max_l: self.max_l(),
            independent: self.is_measurement_independent(Tolerances::default().equality),
        }
    }
}

fn check_rows(rows: &[[f64; 2]], tol: &Tolerances) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite() || *v < -tol.negativity)
            || (row[0] + row[1] - 1.0).abs() > tol.normalization
        {
            return Err(Error::Invalid(format!(
                "p(x|lambda{}) = {row:?} is not a distribution",
                i + 1
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SettingMarginals {
    pub p_x1: f64,
    pub p_x2: f64,
    pub p_lambda: [f64; 2],
    /// `[λ][x]`.
    pub p_x_given_lambda: [[f64; 2]; 2],
}

pub fn marginal_setting_prob(m: &BiasModel) -> SettingMarginals {
    let bias = m.setting_bias();
    let [p_x1, p_x2] = bias.marginal();
    SettingMarginals {
        p_x1,
        p_x2,
        p_lambda: [bias.p_lambda[0], bias.p_lambda[1]],
        p_x_given_lambda: [bias.p_x_given_lambda[0], bias.p_x_given_lambda[1]],
    }
}

/// Whether every p(x|λ) lies in [l, 1 − l].
pub fn md_bound_check(p_x_given_lambda: &[[f64; 2]], l: f64) -> Result<bool> {
    check_range("l", l, 0.0, 0.5, "[0, 0.5]")?;
    check_rows(p_x_given_lambda, &Tolerances::default())?;
    Ok(p_x_given_lambda
        .iter()
        .flatten()
        .all(|&v| v >= l && v <= 1.0 - l))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintReport {
    pub p_lambda: Vec<f64>,
    pub p_x_given_lambda: Vec<[f64; 2]>,
    pub p_x1: f64,
    pub p_x2: f64,
    #[serde(rename = "maxL")]
    pub max_l: f64,
    /// p(x|λ) does not depend on λ.
    pub independent: bool,
}

impl ConstraintReport {
    /// Settings look uniform to Alice although they depend on λ.
    pub fn masquerades_as_free_choice(&self, tol: f64) -> bool {
        (self.p_x1 - 0.5).abs() <= tol && !self.independent
    }
}

pub fn constraint_report(model: &BiasModel) -> ConstraintReport {
    model.setting_bias().report()
}
