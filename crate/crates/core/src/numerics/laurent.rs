use num_complex::Complex64;

use super::{CMatrix, NumericsError};

const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentFit {
    /// `(power, coefficient)` in the order the powers were requested.
    pub coefficients: Vec<(i32, Complex64)>,
    /// Largest `|y_j - Σ c_p λ_j^p|`.
    pub max_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

impl LaurentFit {
    pub fn coefficient(&self, power: i32) -> Option<Complex64> {
        self.coefficients
            .iter()
            .find(|(p, _)| *p == power)
            .map(|&(_, c)| c)
    }

    pub fn evaluate(&self, lambda: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .map(|&(p, c)| c * lambda.powi(p))
            .sum()
    }
}

/// Least-squares fit `y ≈ Σ_p c_p λ^p` over the given integer powers.
///
/// Columns are scaled to unit maximum before the SVD solve so that widely
/// different magnitudes of `λ^p` do not masquerade as rank deficiency.
pub fn fit_laurent(
    lambdas: &[Complex64],
    values: &[Complex64],
    powers: &[i32],
) -> Result<LaurentFit, NumericsError> {
    let unknowns = powers.len();
    let required = 2 * unknowns;
    if lambdas.len() != values.len() || lambdas.len() < required || unknowns == 0 {
        return Err(NumericsError::TooFewSamples {
            required,
            unknowns,
            actual: lambdas.len().min(values.len()),
        });
    }
    for (i, a) in lambdas.iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) || lambdas[..i].contains(a) {
            return Err(NumericsError::DegenerateSamples);
        }
    }

    let rows = lambdas.len();
    let mut design = CMatrix::from_fn(rows, unknowns, |i, j| lambdas[i].powi(powers[j]));
    let mut scales = vec![1.0; unknowns];
    for (j, scale) in scales.iter_mut().enumerate() {
        let m = design.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 && m.is_finite() {
            *scale = m;
            design.column_mut(j).iter_mut().for_each(|z| *z /= m);
        }
    }
    let rhs = CMatrix::from_fn(rows, 1, |i, _| values[i]);

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(NumericsError::RankDeficient { condition });
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|_| NumericsError::RankDeficient { condition })?;

    let coefficients: Vec<(i32, Complex64)> = powers
        .iter()
        .enumerate()
        .map(|(j, &p)| (p, solution[(j, 0)] / scales[j]))
        .collect();
    let fitted = &design * &solution;
    let max_residual = (0..rows)
        .map(|i| (fitted[(i, 0)] - values[i]).norm())
        .fold(0.0, f64::max);
    Ok(LaurentFit {
        coefficients,
        max_residual,
        condition,
    })
}
