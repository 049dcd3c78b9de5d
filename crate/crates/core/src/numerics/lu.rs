use num_complex::Complex64;

use super::{frobenius, CMatrix, NumericsError};

/// `det = exp(log_magnitude + i·phase)`; a singular matrix has
/// `log_magnitude = -∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_magnitude: f64,
    /// In `(-π, π]`.
    pub phase: f64,
}

impl LogDet {
    pub fn is_singular(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn log10_magnitude(&self) -> f64 {
        self.log_magnitude / std::f64::consts::LN_10
    }

    /// `det(self) / det(reference)`.
    pub fn relative_to(&self, reference: &LogDet) -> LogDet {
        LogDet {
            log_magnitude: self.log_magnitude - reference.log_magnitude,
            phase: wrap_phase(self.phase - reference.phase),
        }
    }

    /// `det(self) · det(other)`.
    pub fn times(&self, other: &LogDet) -> LogDet {
        LogDet {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: wrap_phase(self.phase + other.phase),
        }
    }

    pub fn value(&self) -> Complex64 {
        if self.is_singular() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

fn wrap_phase(phase: f64) -> f64 {
    use std::f64::consts::PI;
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Partial-pivoting LU factorisation `PA = LU`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMatrix,
    pivots: Vec<usize>,
    odd_permutation: bool,
    singular: bool,
}

impl LuFactor {
    pub fn new(a: &CMatrix) -> Result<Self, NumericsError> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(NumericsError::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        let mut lu = a.clone();
        let mut pivots = Vec::with_capacity(n);
        let mut odd = false;
        let mut singular = false;
        for k in 0..n {
            let (mut best, mut best_abs) = (k, lu[(k, k)].norm());
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            pivots.push(best);
            if best != k {
                lu.swap_rows(k, best);
                odd = !odd;
            }
            let pivot = lu[(k, k)];
            if pivot.norm() == 0.0 || !pivot.norm().is_finite() {
                singular = true;
                continue;
            }
            let inv = pivot.inv();
            for i in k + 1..n {
                lu[(i, k)] *= inv;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self {
            lu,
            pivots,
            odd_permutation: odd,
            singular,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Accumulates `log|u_kk|` and `arg u_kk` pivot by pivot, so neither
    /// overflow nor underflow of the product is possible.
    pub fn logdet(&self) -> LogDet {
        if self.singular {
            return LogDet {
                log_magnitude: f64::NEG_INFINITY,
                phase: 0.0,
            };
        }
        let mut log_magnitude = 0.0;
        let mut phase = if self.odd_permutation { std::f64::consts::PI } else { 0.0 };
        for k in 0..self.lu.nrows() {
            let u = self.lu[(k, k)];
            log_magnitude += u.norm().ln();
            phase += u.arg();
        }
        LogDet {
            log_magnitude,
            phase: wrap_phase(phase),
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, NumericsError> {
        if self.singular {
            return Err(NumericsError::Singular);
        }
        let n = self.lu.nrows();
        let mut x = b.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for i in 0..n {
            let acc: Complex64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= acc;
        }
        for i in (0..n).rev() {
            let acc: Complex64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - acc) / self.lu[(i, i)];
        }
        Ok(x)
    }
}

pub fn logdet(a: &CMatrix) -> Result<LogDet, NumericsError> {
    Ok(LuFactor::new(a)?.logdet())
}

/// Log-determinant of a diagonal matrix.
pub fn diagonal_logdet(diagonal: &[Complex64]) -> LogDet {
    if diagonal.iter().any(|d| d.norm() == 0.0) {
        return LogDet {
            log_magnitude: f64::NEG_INFINITY,
            phase: 0.0,
        };
    }
    LogDet {
        log_magnitude: diagonal.iter().map(|d| d.norm().ln()).sum(),
        phase: wrap_phase(diagonal.iter().map(|d| d.arg()).sum()),
    }
}

#[derive(Debug, Clone)]
pub struct KernelVector {
    /// Unit Euclidean norm.
    pub vector: Vec<Complex64>,
    /// `‖Av‖ / ‖A‖_F`.
    pub residual: f64,
}

/// Approximate null vector of a (nearly) singular matrix by inverse
/// iteration. An exactly singular factorisation is perturbed by a relative
/// `1e-14` diagonal shift.
pub fn kernel_vector(a: &CMatrix) -> Result<KernelVector, NumericsError> {
    let n = a.nrows();
    let norm = frobenius(a);
    if n == 0 {
        return Err(NumericsError::Singular);
    }
    if norm == 0.0 {
        let mut vector = vec![Complex64::new(0.0, 0.0); n];
        vector[0] = Complex64::new(1.0, 0.0);
        return Ok(KernelVector {
            vector,
            residual: 0.0,
        });
    }
    let mut lu = LuFactor::new(a)?;
    if lu.is_singular() {
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] += Complex64::new(norm * 1e-14, 0.0);
        }
        lu = LuFactor::new(&shifted)?;
    }
    // Deterministic start vector with no special alignment.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.37 * (i as f64 + 1.0).sqrt()))
        .collect();
    normalize(&mut x);
    let mut best = KernelVector {
        vector: x.clone(),
        residual: f64::INFINITY,
    };
    for _ in 0..4 {
        x = lu.solve(&x)?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        normalize(&mut x);
        let residual = apply_norm(a, &x) / norm;
        if residual < best.residual {
            best = KernelVector {
                vector: x.clone(),
                residual,
            };
        }
    }
    Ok(best)
}

fn normalize(x: &mut [Complex64]) {
    let s: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|z| *z /= s);
    }
}

fn apply_norm(a: &CMatrix, x: &[Complex64]) -> f64 {
    let n = a.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += a[(i, j)] * x[j];
        }
        total += acc.norm_sqr();
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// Laplace expansion along the first row.
    fn cofactor_det(a: &CMatrix) -> Complex64 {
        let n = a.nrows();
        if n == 1 {
            return a[(0, 0)];
        }
        let mut total = c(0.0, 0.0);
        for j in 0..n {
            let minor = a.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += a[(0, j)] * cofactor_det(&minor) * sign;
        }
        total
    }

    #[test]
    fn identity_has_zero_logdet() {
        let d = logdet(&CMatrix::identity(7, 7)).unwrap();
        assert_eq!(d.log_magnitude, 0.0);
        assert_eq!(d.phase, 0.0);
    }

    #[test]
    fn diagonal_two() {
        let a = CMatrix::identity(2, 2) * c(2.0, 0.0);
        let d = logdet(&a).unwrap();
        assert!((d.log_magnitude - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn matches_cofactor_expansion() {
        for (seed, n) in [(1, 3), (2, 6), (3, 8)] {
            let a = random_matrix(n, seed);
            let exact = cofactor_det(&a);
            let got = logdet(&a).unwrap().value();
            let rel = (got - exact).norm() / exact.norm();
            assert!(rel < 1e-10, "n={n}: relative error {rel}");
        }
    }

    #[test]
    fn singular_matrix_reports_negative_infinity() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(logdet(&a).unwrap().is_singular());
        assert_eq!(logdet(&a).unwrap().value(), c(0.0, 0.0));
    }

    #[test]
    fn solve_recovers_solution() {
        let a = random_matrix(12, 5);
        let x: Vec<Complex64> = (0..12).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let b: Vec<Complex64> = (0..12)
            .map(|i| (0..12).map(|j| a[(i, j)] * x[j]).sum())
            .collect();
        let got = LuFactor::new(&a).unwrap().solve(&b).unwrap();
        let err = got.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        // rank-one perturbation that kills the direction (1, -1, 0, ...)
        let n = 6;
        let mut a = random_matrix(n, 8);
        let v: Vec<Complex64> = (0..n).map(|i| c(1.0 + i as f64, 0.5)).collect();
        let av: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum()).collect();
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] -= av[i] * v[j].conj() / vv;
            }
        }
        let k = kernel_vector(&a).unwrap();
        assert!(k.residual < 1e-13, "residual {}", k.residual);
    }

    #[test]
    fn phase_arithmetic_wraps() {
        let a = LogDet { log_magnitude: 1.0, phase: 3.0 };
        let b = LogDet { log_magnitude: 0.5, phase: 3.0 };
        let p = a.times(&b);
        assert!(p.phase > -std::f64::consts::PI && p.phase <= std::f64::consts::PI);
        assert!((p.value() - a.value() * b.value()).norm() < 1e-12);
        let q = a.relative_to(&b);
        assert!((q.value() - a.value() / b.value()).norm() < 1e-12);
    }
}
