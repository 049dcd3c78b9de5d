//! Potentials named in a config, and the plain-text coefficient table.

use std::path::Path;

use bloch_core::torus::{PeriodicScalarField, TorusLattice, TWO_PI};
use num_complex::Complex64;
use thiserror::Error;

use crate::config::{ConfigError, PotentialConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("line {line}: expected `n1 n2 re im`, got {fields} fields")]
    FieldCount { line: usize, fields: usize },
    #[error("line {line}: bad mode index {text:?}")]
    Index { line: usize, text: String },
    #[error("line {line}: bad coefficient {text:?}")]
    Value { line: usize, text: String },
    #[error("line {line}: mode ({n1}, {n2}) listed twice")]
    Duplicate { line: usize, n1: i64, n2: i64 },
    #[error("table has no modes")]
    Empty,
}

/// Largest accepted `|n_j|`; anything beyond cannot be held by a supported
/// grid anyway.
pub const MAX_MODE_INDEX: i64 = 2048;

/// Decodes a whitespace-separated table of `n1 n2 re im` rows. Blank lines
/// and `#` comments are skipped.
pub fn decode_coefficients(text: &str) -> Result<Vec<([i64; 2], Complex64)>, DecodeError> {
    let mut out: Vec<([i64; 2], Complex64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(DecodeError::FieldCount {
                line,
                fields: fields.len(),
            });
        }
        let index = |s: &str| -> Result<i64, DecodeError> {
            s.parse::<i64>()
                .ok()
                .filter(|n| n.abs() <= MAX_MODE_INDEX)
                .ok_or_else(|| DecodeError::Index {
                    line,
                    text: s.to_string(),
                })
        };
        let value = |s: &str| -> Result<f64, DecodeError> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| DecodeError::Value {
                    line,
                    text: s.to_string(),
                })
        };
        let n = [index(fields[0])?, index(fields[1])?];
        let c = Complex64::new(value(fields[2])?, value(fields[3])?);
        if out.iter().any(|(m, _)| *m == n) {
            return Err(DecodeError::Duplicate {
                line,
                n1: n[0],
                n2: n[1],
            });
        }
        out.push((n, c));
    }
    if out.is_empty() {
        return Err(DecodeError::Empty);
    }
    Ok(out)
}

/// Builds the potential on `lattice`; relative coefficient files are read
/// from `base_dir`.
pub fn build_potential(
    config: &PotentialConfig,
    lattice: &TorusLattice,
    base_dir: &Path,
) -> Result<PeriodicScalarField, ConfigError> {
    Ok(match config {
        PotentialConfig::Zero => PeriodicScalarField::zero(lattice),
        PotentialConfig::Constant { c } => {
            PeriodicScalarField::constant(lattice, Complex64::new(*c, 0.0))
        }
        PotentialConfig::Mathieu { a } => {
            let a = *a;
            PeriodicScalarField::from_real_fn(lattice, move |s| 2.0 * a * (TWO_PI * s[0]).cos())
        }
        PotentialConfig::Cos2d { a, b } => {
            let (a, b) = (*a, *b);
            PeriodicScalarField::from_real_fn(lattice, move |s| {
                2.0 * a * (TWO_PI * s[0]).cos() + 2.0 * b * (TWO_PI * s[1]).cos()
            })
        }
        PotentialConfig::Coefficients { modes, file } => {
            let mut all: Vec<([i64; 2], Complex64)> = modes
                .iter()
                .map(|m| {
                    let n = [m.n[0], m.n.get(1).copied().unwrap_or(0)];
                    (n, Complex64::new(m.re, m.im))
                })
                .collect();
            if let Some(path) = file {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                all.extend(decode_coefficients(&text)?);
            }
            if lattice.dim() == 1 && all.iter().any(|(n, _)| n[1] != 0) {
                return Err(ConfigError::Invalid(
                    "second mode index must be 0 on a circle".into(),
                ));
            }
            PeriodicScalarField::from_modes(lattice, &all)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_table_with_comments() {
        let text = "# mathieu\n 1 0 0.5 0\n\n-1 0 0.5 0.0  # conjugate\n";
        let modes = decode_coefficients(text).unwrap();
        assert_eq!(modes.len(), 2);
        assert_eq!(modes[1], ([-1, 0], Complex64::new(0.5, 0.0)));
    }

    #[test]
    fn decode_errors_carry_line_numbers() {
        assert_eq!(
            decode_coefficients("1 0 0.5\n"),
            Err(DecodeError::FieldCount { line: 1, fields: 3 })
        );
        assert!(matches!(
            decode_coefficients("\n1 x 0.5 0\n"),
            Err(DecodeError::Index { line: 2, .. })
        ));
        assert!(matches!(
            decode_coefficients("1 0 nan 0\n"),
            Err(DecodeError::Value { line: 1, .. })
        ));
        assert!(matches!(
            decode_coefficients("1 0 1 0\n1 0 2 0\n"),
            Err(DecodeError::Duplicate { line: 2, .. })
        ));
        assert_eq!(decode_coefficients("# nothing\n"), Err(DecodeError::Empty));
        assert!(matches!(
            decode_coefficients("99999 0 1 0"),
            Err(DecodeError::Index { .. })
        ));
    }

    #[test]
    fn mathieu_has_two_modes() {
        let lattice = TorusLattice::line(1.0, 4, 32).unwrap();
        let u = build_potential(
            &PotentialConfig::Mathieu { a: 1.5 },
            &lattice,
            Path::new("."),
        )
        .unwrap();
        assert!((u.coeff([1, 0]) - 1.5).norm() < 1e-14);
        assert!((u.coeff([-1, 0]) - 1.5).norm() < 1e-14);
        assert!(u.coeff([2, 0]).norm() < 1e-14);
    }
}
