//! File formats: behavior and model JSON, curve CSV/JSON.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{Behavior, ProbabilityTable};
use crate::kernel::ComplexMatrix;
use crate::optimizer::{CurveKind, CurvePoint};
use crate::steering::MdLhsModel;
use crate::tolerance::Tolerances;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct RawBehavior {
    probabilities: Vec<Vec<Vec<Vec<f64>>>>,
}

fn expect_len<T>(v: &[T], path: &str) -> Result<(), FormatError> {
    if v.len() == 2 {
        Ok(())
    } else {
        Err(FormatError::Invalid(format!(
            "{path} has {} entries, expected 2",
            v.len()
        )))
    }
}

/// Parses `{"probabilities": [x][y][a][b]}`; errors name the first invalid
/// index.
pub fn parse_behavior(json: &str, tol: &Tolerances) -> Result<Behavior, FormatError> {
    let raw: RawBehavior = serde_json::from_str(json)?;
    let mut table: ProbabilityTable = [[[[0.0; 2]; 2]; 2]; 2];
    expect_len(&raw.probabilities, "probabilities")?;
    for (x, py) in raw.probabilities.iter().enumerate() {
        expect_len(py, &format!("probabilities[{x}]"))?;
        for (y, pa) in py.iter().enumerate() {
            expect_len(pa, &format!("probabilities[{x}][{y}]"))?;
            for (a, pb) in pa.iter().enumerate() {
                expect_len(pb, &format!("probabilities[{x}][{y}][{a}]"))?;
                for (b, v) in pb.iter().enumerate() {
                    table[x][y][a][b] = *v;
                }
            }
        }
    }
    Behavior::with_tolerances(table, tol).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn behavior_to_json(b: &Behavior) -> String {
    serde_json::to_string_pretty(b).expect("plain numeric data serializes")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawModel {
    lambdas: usize,
    /// `[x][λ]`
    p_lambda_given_x: Vec<Vec<f64>>,
    /// `[x][λ][a]`
    p_a_given_x_lambda: Vec<Vec<[f64; 2]>>,
    /// `[x][λ]`, each four (re, im) pairs in row-major order.
    states: Vec<Vec<[[f64; 2]; 4]>>,
}

pub fn parse_model(json: &str, tol: &Tolerances) -> Result<MdLhsModel, FormatError> {
    let raw: RawModel = serde_json::from_str(json)?;
    expect_len(&raw.p_lambda_given_x, "pLambdaGivenX")?;
    expect_len(&raw.p_a_given_x_lambda, "pAGivenXLambda")?;
    expect_len(&raw.states, "states")?;
    for x in 0..2 {
        for (name, len) in [
            ("pLambdaGivenX", raw.p_lambda_given_x[x].len()),
            ("pAGivenXLambda", raw.p_a_given_x_lambda[x].len()),
            ("states", raw.states[x].len()),
        ] {
            if len != raw.lambdas {
                return Err(FormatError::Invalid(format!(
                    "{name}[{x}] has {len} entries, expected lambdas = {}",
                    raw.lambdas
                )));
            }
        }
    }
    let to_matrix = |entries: &[[f64; 2]; 4]| {
        ComplexMatrix::from_vec(2, 2, entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .expect("four entries")
    };
    let [s0, s1]: [Vec<ComplexMatrix>; 2] = [0, 1].map(|x| raw.states[x].iter().map(to_matrix).collect());
    let [l0, l1]: [Vec<f64>; 2] = [0, 1].map(|x| raw.p_lambda_given_x[x].clone());
    let [a0, a1]: [Vec<[f64; 2]>; 2] = [0, 1].map(|x| raw.p_a_given_x_lambda[x].clone());
    MdLhsModel::with_tolerances([l0, l1], [a0, a1], [s0, s1], tol)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn model_to_json(m: &MdLhsModel) -> String {
    let n = m.lambdas();
    let raw = RawModel {
        lambdas: n,
        p_lambda_given_x: (0..2).map(|x| m.lambda_distribution(x).to_vec()).collect(),
        p_a_given_x_lambda: (0..2)
            .map(|x| {
                (0..n)
                    .map(|l| [m.p_a_given_x_lambda(0, x, l), m.p_a_given_x_lambda(1, x, l)])
                    .collect()
            })
            .collect(),
        states: (0..2)
            .map(|x| {
                (0..n)
                    .map(|l| {
                        let e = m.state(x, l).entries();
                        [0, 1, 2, 3].map(|i| [e[i].re, e[i].im])
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("plain numeric data serializes")
}

/// `%.{digits}g`-style formatting with '.' as decimal separator.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Significant digits used for curve output.
pub const CURVE_DIGITS: usize = 10;

fn curve_header(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Local | CurveKind::PrBox => "p,value",
        CurveKind::Tilted { .. } => "p,value,delta",
        CurveKind::Randomness { .. } => "p,value,delta,r",
        CurveKind::Quantum => {
            "p,value,delta,theta,n1_polar,n1_azimuth,n2_polar,n2_azimuth,m1_polar,m1_azimuth,m2_polar,m2_azimuth"
        }
    }
}

/// One CSV row per point. The `delta` column is the violation value − 4p(1−p).
pub fn write_curve_csv<W: Write>(kind: CurveKind, points: &[CurvePoint], mut out: W) -> Result<(), FormatError> {
    writeln!(out, "{}", curve_header(kind))?;
    let f = |v: f64| format_significant(v, CURVE_DIGITS);
    for pt in points {
        let mut cols = vec![f(pt.p), f(pt.value)];
        match kind {
            CurveKind::Local | CurveKind::PrBox => {}
            CurveKind::Tilted { .. } => cols.push(f(pt.violation.unwrap_or(f64::NAN))),
            CurveKind::Randomness { .. } => {
                cols.push(f(pt.violation.unwrap_or(f64::NAN)));
                cols.push(f(pt.rate.unwrap_or(f64::NAN)));
            }
            CurveKind::Quantum => {
                cols.push(f(pt.violation.unwrap_or(f64::NAN)));
                if let Some(a) = &pt.argmax {
                    cols.push(f(a.theta));
                    for (polar, azimuth) in a.angles() {
                        cols.push(f(polar));
                        cols.push(f(azimuth));
                    }
                }
            }
        }
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub p: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// (polar, azimuth) of n̂₁, n̂₂, m̂₁, m̂₂.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<[f64; 2]>>,
}

impl From<&CurvePoint> for CurveRecord {
    fn from(pt: &CurvePoint) -> Self {
        Self {
            p: pt.p,
            value: pt.value,
            delta: pt.violation,
            r: pt.rate,
            theta: pt.argmax.map(|a| a.theta),
            angles: pt
                .argmax
                .map(|a| a.angles().iter().map(|&(x, y)| [x, y]).collect()),
        }
    }
}

pub fn write_curve_json<W: Write>(points: &[CurvePoint], out: W) -> Result<(), FormatError> {
    let records: Vec<CurveRecord> = points.iter().map(CurveRecord::from).collect();
    serde_json::to_writer_pretty(out, &records)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::pr_box;
    use crate::optimizer::{curve, OptimizerConfig};

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 10), "0");
        assert_eq!(format_significant(0.75, 10), "0.75");
        assert_eq!(format_significant(2.0 * 2f64.sqrt(), 10), "2.828427125");
        assert_eq!(format_significant(-1.0, 10), "-1");
        assert_eq!(format_significant(1.5e-7, 10), "1.5e-7");
        assert_eq!(format_significant(123456.0, 3), "1.23e5");
        assert_eq!(format_significant(0.000123456789012, 10), "0.000123456789");
    }

    #[test]
    fn behavior_round_trip() {
        let b = pr_box();
        let back = parse_behavior(&behavior_to_json(&b), &Tolerances::default()).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn behavior_shape_errors_name_index() {
        let json = r#"{"probabilities": [[[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25]]],[[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]]]}"#;
        let err = parse_behavior(json, &Tolerances::default()).unwrap_err().to_string();
        assert!(err.contains("probabilities[0][1][1]"), "{err}");

        let json = r#"{"probabilities": [[[[0.5,0.25],[0.5,-0.25]],[[0.25,0.25],[0.25,0.25]]],[[[0.25,0.25],[0.25,0.25]],[[0.25,0.25],[0.25,0.25]]]]}"#;
        let err = parse_behavior(json, &Tolerances::default()).unwrap_err().to_string();
        assert!(err.contains("probabilities[0][0][1][1]"), "{err}");

        assert!(matches!(
            parse_behavior("{not json", &Tolerances::default()),
            Err(FormatError::Json(_))
        ));
    }

    #[test]
    fn model_round_trip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = MdLhsModel::random(3, &mut rng);
        let back = parse_model(&model_to_json(&m), &Tolerances::default()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn model_length_mismatch() {
        let json = r#"{"lambdas": 2, "pLambdaGivenX": [[1.0],[1.0]], "pAGivenXLambda": [[[1,0]],[[1,0]]],
            "states": [[[[1,0],[0,0],[0,0],[0,0]]],[[[1,0],[0,0],[0,0],[0,0]]]]}"#;
        let err = parse_model(json, &Tolerances::default()).unwrap_err().to_string();
        assert!(err.contains("pLambdaGivenX[0]"), "{err}");
    }

    #[test]
    fn local_curve_csv() {
        let pts = curve(CurveKind::Local, &[0.0, 0.25, 0.5], &OptimizerConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(CurveKind::Local, &pts, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p,value\n0,0\n0.25,0.75\n0.5,1\n");
    }
}
