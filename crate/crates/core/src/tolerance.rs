//! Numerical slack used by every validity check in the crate.

use std::str::FromStr;

use crate::error::Error;

/// Environment variable read by [`Tolerances::from_env`].
pub const TOLERANCE_ENV: &str = "MDSTEER_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed negative eigenvalue when testing positive semidefiniteness.
    pub psd: f64,
    /// Equality of values that are identical in exact arithmetic.
    pub equality: f64,
    /// Slack on probability sums and traces.
    pub normalization: f64,
    /// Maximum marginal deviation accepted as no-signalling.
    pub no_signalling: f64,
    /// Allowed negative probability entry.
    pub negativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-10,
            equality: 1e-12,
            normalization: 1e-10,
            no_signalling: 1e-9,
            negativity: 1e-12,
        }
    }
}

impl Tolerances {
    /// Defaults, overridden by `MDSTEER_TOL` when it is set and parses.
    pub fn from_env() -> Result<Self, Error> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(s) if !s.trim().is_empty() => s.parse(),
            _ => Ok(Self::default()),
        }
    }
}

/// Accepts either a bare number, which replaces every field, or a list of
/// `name=value` pairs separated by commas, e.g. `psd=1e-8,no_signalling=1e-6`.
impl FromStr for Tolerances {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |what: &str| Error::Invalid(format!("bad {TOLERANCE_ENV} value: {what}"));
        let parse_num = |v: &str| -> Result<f64, Error> {
            let x: f64 = v.trim().parse().map_err(|_| bad(v))?;
            if x.is_finite() && x >= 0.0 {
                Ok(x)
            } else {
                Err(bad(v))
            }
        };

        let s = s.trim();
        if !s.contains('=') {
            let x = parse_num(s)?;
            return Ok(Self {
                psd: x,
                equality: x,
                normalization: x,
                no_signalling: x,
                negativity: x,
            });
        }

        let mut tol = Self::default();
        for pair in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| bad(pair))?;
            let value = parse_num(value)?;
            match key.trim() {
                "psd" => tol.psd = value,
                "equality" => tol.equality = value,
                "normalization" => tol.normalization = value,
                "no_signalling" => tol.no_signalling = value,
                "negativity" => tol.negativity = value,
                other => return Err(bad(other)),
            }
        }
        Ok(tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_number_sets_all_fields() {
        let t: Tolerances = "1e-6".parse().unwrap();
        assert_eq!(t.psd, 1e-6);
        assert_eq!(t.no_signalling, 1e-6);
    }

    #[test]
    fn pairs_override_selected_fields() {
        let t: Tolerances = "psd=1e-8, no_signalling=1e-5".parse().unwrap();
        assert_eq!(t.psd, 1e-8);
        assert_eq!(t.no_signalling, 1e-5);
        assert_eq!(t.equality, Tolerances::default().equality);
    }

    #[test]
    fn rejects_garbage() {
        assert!("psd=abc".parse::<Tolerances>().is_err());
        assert!("foo=1".parse::<Tolerances>().is_err());
        assert!("-1".parse::<Tolerances>().is_err());
    }
}
