use num_complex::Complex64;

use super::{frobenius, hermitian_defect, CMatrix, NumericsError};

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const MAX_QL_SWEEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenSelection {
    All,
    /// The `k` smallest eigenvalues.
    Lowest(usize),
}

#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` belongs to `eigenvalues[j]`.
    pub eigenvectors: Option<CMatrix>,
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Householder reduction to a complex tridiagonal matrix, a diagonal phase
/// change that makes the off-diagonal real and nonnegative, then implicit QL
/// with Wilkinson shifts on the real symmetric tridiagonal.
pub fn eigh(
    a: &CMatrix,
    selection: EigenSelection,
    vectors: bool,
) -> Result<HermitianSpectrum, NumericsError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(NumericsError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOLERANCE {
        return Err(NumericsError::NotHermitian { defect });
    }
    if n == 0 {
        return Ok(HermitianSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: vectors.then(|| CMatrix::zeros(0, 0)),
        });
    }

    // Column-major working copy of the Hermitian part.
    let mut h: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        })
        .collect();
    let mut q = vectors.then(|| identity(n));
    let (diag, offdiag) = tridiagonalize(n, &mut h, q.as_mut());

    // Phase change T = D S D* with S real.
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let alpha = offdiag[k];
        let r = alpha.norm();
        e[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * (alpha / r) } else { phases[k] };
    }
    let mut d = diag;
    let mut z = vectors.then(|| vec![0.0; n * n]);
    if let Some(z) = z.as_mut() {
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
    }
    tql2(n, &mut d, &mut e, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let keep = match selection {
        EigenSelection::All => n,
        EigenSelection::Lowest(k) => k.min(n),
    };
    let order = &order[..keep];
    let eigenvalues = order.iter().map(|&i| d[i]).collect();

    let eigenvectors = match (q, z) {
        (Some(q), Some(z)) => {
            // v = Q D z, column `col` of the output is eigenvector order[col].
            let mut out = CMatrix::zeros(n, keep);
            let mut scaled = vec![Complex64::new(0.0, 0.0); n];
            for (col, &src) in order.iter().enumerate() {
                for k in 0..n {
                    // z stored row-major: z[row * n + column]
                    scaled[k] = phases[k] * z[k * n + src];
                }
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += q[k * n + i] * scaled[k];
                    }
                    out[(i, col)] = acc;
                }
            }
            Some(out)
        }
        _ => None,
    };

    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl HermitianSpectrum {
    /// Largest `‖Av - λv‖ / ‖A‖` over the returned pairs.
    pub fn max_residual(&self, a: &CMatrix) -> Option<f64> {
        let vectors = self.eigenvectors.as_ref()?;
        let norm = frobenius(a).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = vectors.column(j);
            let r = a * v - v * Complex64::new(lambda, 0.0);
            worst = worst.max(r.norm() / norm);
        }
        Some(worst)
    }
}

fn identity(n: usize) -> Vec<Complex64> {
    let mut q = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        q[i * n + i] = Complex64::new(1.0, 0.0);
    }
    q
}

/// Householder reduction of the column-major Hermitian `h`. Returns the real
/// diagonal and the subdiagonal `T[k+1, k]`; accumulates `Q` (column-major,
/// `A = Q T Q*`) when given.
fn tridiagonalize(
    n: usize,
    h: &mut [Complex64],
    mut q: Option<&mut Vec<Complex64>>,
) -> (Vec<f64>, Vec<Complex64>) {
    let zero = Complex64::new(0.0, 0.0);
    let at = |i: usize, j: usize| j * n + i;
    let mut offdiag = vec![zero; n];
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let norm: f64 = (start..n).map(|i| h[at(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = h[at(start, k)];
        let tail: f64 = (start + 1..n).map(|i| h[at(i, k)].norm_sqr()).sum();
        if norm == 0.0 || tail == 0.0 {
            offdiag[k] = x0;
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;

        for i in start..n {
            v[i] = h[at(i, k)];
        }
        v[start] -= alpha;
        let vnorm: f64 = (start..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v[start..n].iter_mut() {
            *vi /= vnorm;
        }

        // p = B v on the trailing block, B Hermitian.
        for i in start..n {
            let mut acc = zero;
            for j in start..n {
                acc += h[at(i, j)] * v[j];
            }
            p[i] = acc;
        }
        let kappa: Complex64 = (start..n).map(|i| v[i].conj() * p[i]).sum();
        let kappa = kappa.re;
        for i in start..n {
            p[i] -= v[i] * kappa;
        }
        // B -= 2 (v w* + w v*)
        for j in start..n {
            let vj = v[j].conj() * 2.0;
            let wj = p[j].conj() * 2.0;
            for i in start..n {
                h[at(i, j)] -= v[i] * wj + p[i] * vj;
            }
        }
        offdiag[k] = alpha;
        for i in start..n {
            h[at(i, k)] = zero;
            h[at(k, i)] = zero;
        }
        h[at(start, k)] = alpha;
        h[at(k, start)] = alpha.conj();

        if let Some(q) = q.as_deref_mut() {
            // Q_trailing -= 2 (Q_trailing v) v*
            for i in 0..n {
                let mut acc = zero;
                for j in start..n {
                    acc += q[at(i, j)] * v[j];
                }
                let acc = acc * 2.0;
                for j in start..n {
                    q[at(i, j)] -= acc * v[j].conj();
                }
            }
        }
    }
    if n >= 2 {
        offdiag[n - 2] = h[at(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| h[at(i, i)].re).collect();
    (diag, offdiag)
}

/// Implicit QL on the symmetric tridiagonal `(d, e)` with `e[k] = T[k+1, k]`
/// (`e[n-1]` ignored). `z` is row-major and accumulates the rotations.
fn tql2(
    n: usize,
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut [f64]>,
) -> Result<(), NumericsError> {
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(NumericsError::EigenNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let row = k * n;
                            let zh = z[row + i + 1];
                            z[row + i + 1] = s * z[row + i] + c * zh;
                            z[row + i] = c * z[row + i] - s * zh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
