//! Surfaces in R³ from zero modes of the Dirac operator with real potential.
//!
//! For `𝒟ψ = 0` the matrix-valued form `i(F dz + F* dz̄)` with
//! `F = [[ψ₁ψ̄₂, -ψ̄₂²], [ψ₁², -ψ₁ψ̄₂]]` is closed. Its integral `X` is
//! anti-Hermitian and traceless, `X = [[ix³, -x¹ - ix²], [x¹ - ix², -ix³]]`,
//! and `(x¹, x², x³)` is a conformal immersion with `e^α = |ψ₁|² + |ψ₂|²`
//! and mean curvature `H = 2U e^{-α}`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::dirac::{nearest_zero_mode, DiracError, DiracPencil};
use crate::torus::{
    FluxVector, ModeWindow, MultiplierMap, PeriodicScalarField, TorusError, TorusLattice, TWO_PI,
};

/// Default bound on [`closedness_residual`] accepted by
/// [`integrate_immersion`].
pub const CLOSEDNESS_THRESHOLD: f64 = 1e-6;
/// Points with `|ψ₁|² + |ψ₂|²` below this are degenerate.
pub const DEGENERATE_DENSITY: f64 = 1e-10;
const MULTIPLIER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeierstrassError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
    #[error("spinor data needs a two-dimensional lattice")]
    NotPlanar,
    #[error("multipliers must be ±1, got quasimomentum component {0}")]
    NonRealMultiplier(f64),
    #[error("grid of size {grid_size} cannot hold bilinear densities of nmax {nmax} (need {required})")]
    GridTooCoarse {
        grid_size: usize,
        nmax: usize,
        required: usize,
    },
    #[error("kernel vector has {actual} entries, window needs {expected}")]
    KernelLength { expected: usize, actual: usize },
    #[error("potential must be real for surfaces in R³")]
    ComplexPotential,
    #[error("closedness residual {residual:e} exceeds threshold {threshold:e}")]
    NotClosed { residual: f64, threshold: f64 },
    #[error("base point ({0}, {1}) lies outside the grid")]
    BasePoint(usize, usize),
}

/// A spinor `ψ_c = e^{iκ·s} φ_c` with `κ ∈ {0, π}²` and periodic `φ_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    lattice: TorusLattice,
    kappa: [f64; 2],
    phi: [PeriodicScalarField; 2],
}

fn spin_kappa(k: f64) -> Result<f64, WeierstrassError> {
    let reduced = k.rem_euclid(TWO_PI);
    for target in [0.0, TWO_PI / 2.0, TWO_PI] {
        if (reduced - target).abs() <= MULTIPLIER_TOLERANCE {
            return Ok(target % TWO_PI);
        }
    }
    Err(WeierstrassError::NonRealMultiplier(k))
}

/// Densities of nmax-band-limited spinors need `grid ≥ 4·nmax + 4`.
pub fn required_grid(nmax: usize) -> usize {
    4 * nmax + 4
}

impl SpinorField {
    pub fn new(
        kappa: [f64; 2],
        phi1: PeriodicScalarField,
        phi2: PeriodicScalarField,
    ) -> Result<Self, WeierstrassError> {
        let lattice = *phi1.lattice();
        if lattice.dim() != 2 {
            return Err(WeierstrassError::NotPlanar);
        }
        if phi2.lattice().grid_shape() != lattice.grid_shape() || phi2.lattice().periods() != lattice.periods() {
            return Err(TorusError::LatticeMismatch.into());
        }
        Ok(Self {
            lattice,
            kappa: [spin_kappa(kappa[0])?, spin_kappa(kappa[1])?],
            phi: [phi1, phi2],
        })
    }

    /// Spinor from an interleaved kernel vector on `window` (entry `2i + c`
    /// is component `c` of mode `window.mode(i)`), sampled on `lattice`.
    pub fn from_kernel(
        lattice: &TorusLattice,
        window: ModeWindow,
        flux: &FluxVector,
        kernel: &[Complex64],
    ) -> Result<Self, WeierstrassError> {
        if kernel.len() != 2 * window.len() {
            return Err(WeierstrassError::KernelLength {
                expected: 2 * window.len(),
                actual: kernel.len(),
            });
        }
        let reach = window
            .iter()
            .map(|n| n[0].unsigned_abs().max(n[1].unsigned_abs()) as usize)
            .max()
            .unwrap_or(0);
        if lattice.grid_size() < required_grid(reach) {
            return Err(WeierstrassError::GridTooCoarse {
                grid_size: lattice.grid_size(),
                nmax: reach,
                required: required_grid(reach),
            });
        }
        let component = |c: usize| {
            let modes: Vec<([i64; 2], Complex64)> =
                window.iter().enumerate().map(|(i, n)| (n, kernel[2 * i + c])).collect();
            PeriodicScalarField::from_modes(lattice, &modes)
        };
        let pair = flux.as_pair();
        if pair[0].im.abs() > MULTIPLIER_TOLERANCE || pair[1].im.abs() > MULTIPLIER_TOLERANCE {
            return Err(WeierstrassError::NonRealMultiplier(pair[0].im.max(pair[1].im)));
        }
        Self::new([pair[0].re, pair[1].re], component(0)?, component(1)?)
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn kappa(&self) -> [f64; 2] {
        self.kappa
    }

    pub fn periodic_parts(&self) -> &[PeriodicScalarField; 2] {
        &self.phi
    }

    pub fn multipliers(&self) -> MultiplierMap {
        FluxVector::real(&self.kappa).expect("finite").multipliers()
    }

    /// Same spinor on another grid of the same lattice.
    pub fn with_grid_size(&self, grid_size: usize) -> Result<Self, WeierstrassError> {
        let lattice = self.lattice.with_grid_size(grid_size)?;
        Ok(Self {
            lattice,
            kappa: self.kappa,
            phi: [self.phi[0].resampled(&lattice)?, self.phi[1].resampled(&lattice)?],
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            lattice: self.lattice,
            kappa: self.kappa,
            phi: [self.phi[0].scaled(factor), self.phi[1].scaled(factor)],
        }
    }

    fn phase(&self, s: [f64; 2]) -> Complex64 {
        Complex64::new(0.0, self.kappa[0] * s[0] + self.kappa[1] * s[1]).exp()
    }

    fn phases(&self) -> Vec<Complex64> {
        let [g1, g2] = self.lattice.grid_shape();
        (0..g1)
            .flat_map(|i| (0..g2).map(move |j| (i, j)))
            .map(|(i, j)| self.phase(self.lattice.grid_point(i, j)))
            .collect()
    }

    /// `(ψ₁, ψ₂)` at the grid points.
    pub fn samples(&self) -> [Vec<Complex64>; 2] {
        let phases = self.phases();
        let mul = |f: &PeriodicScalarField| -> Vec<Complex64> {
            f.to_samples().iter().zip(&phases).map(|(v, p)| v * p).collect()
        };
        [mul(&self.phi[0]), mul(&self.phi[1])]
    }

    /// `(ψ₁, ψ₂)` at an arbitrary point in lattice coordinates.
    pub fn evaluate(&self, s: [f64; 2]) -> [Complex64; 2] {
        let p = self.phase(s);
        [p * self.phi[0].evaluate(s), p * self.phi[1].evaluate(s)]
    }

    /// `e^α = |ψ₁|² + |ψ₂|²` at a point.
    pub fn density(&self, s: [f64; 2]) -> f64 {
        let [a, b] = self.evaluate(s);
        a.norm_sqr() + b.norm_sqr()
    }

    /// The spinor whose pair `w = (ψ̄₂, ψ₁)` is replaced by `A w`. For
    /// `A ∈ SU(2)` the integrated surface transforms as `X → A X A*`.
    pub fn su2_rotated(&self, a: [[Complex64; 2]; 2]) -> Result<Self, WeierstrassError> {
        let [psi1, psi2] = self.samples();
        let phases = self.phases();
        let mut phi1 = Vec::with_capacity(psi1.len());
        let mut phi2 = Vec::with_capacity(psi1.len());
        for ((p1, p2), ph) in psi1.iter().zip(&psi2).zip(&phases) {
            let w = [p2.conj(), *p1];
            let w1 = a[0][0] * w[0] + a[0][1] * w[1];
            let w2 = a[1][0] * w[0] + a[1][1] * w[1];
            // Multipliers are real, so ψ̄ carries the same phase class.
            phi1.push(w2 / ph);
            phi2.push(w1.conj() / ph);
        }
        Self::new(
            self.kappa,
            PeriodicScalarField::from_samples(&self.lattice, &phi1)?,
            PeriodicScalarField::from_samples(&self.lattice, &phi2)?,
        )
    }

    /// `F` entries `[ψ₁ψ̄₂, -ψ̄₂², ψ₁², -ψ₁ψ̄₂]` as periodic fields.
    fn bilinears(&self) -> Result<[PeriodicScalarField; 4], WeierstrassError> {
        let [psi1, psi2] = self.samples();
        let build = |f: &dyn Fn(Complex64, Complex64) -> Complex64| {
            let v: Vec<Complex64> = psi1.iter().zip(&psi2).map(|(a, b)| f(*a, *b)).collect();
            PeriodicScalarField::from_samples(&self.lattice, &v)
        };
        Ok([
            build(&|a, b| a * b.conj())?,
            build(&|_, b| -(b.conj() * b.conj()))?,
            build(&|a, _| a * a)?,
            build(&|a, b| -(a * b.conj()))?,
        ])
    }
}

/// Spinor defined by its periodic parts' Fourier modes.
pub fn spinor_from_modes(
    lattice: &TorusLattice,
    kappa: [f64; 2],
    modes1: &[([i64; 2], Complex64)],
    modes2: &[([i64; 2], Complex64)],
) -> Result<SpinorField, WeierstrassError> {
    SpinorField::new(
        kappa,
        PeriodicScalarField::from_modes(lattice, modes1)?,
        PeriodicScalarField::from_modes(lattice, modes2)?,
    )
}

/// Kernel spinor of `𝒟` with potential `U - λ₀`, where `λ₀` is the
/// eigenvalue of the Hermitian matrix `D(U, κ, 0)` nearest zero. Returns the
/// shifted potential, `λ₀`, and the spinor sampled on `U`'s grid.
pub fn shift_to_kernel(
    potential: &PeriodicScalarField,
    kappa: [f64; 2],
) -> Result<(PeriodicScalarField, f64, SpinorField), WeierstrassError> {
    if !potential.is_real() {
        return Err(WeierstrassError::ComplexPotential);
    }
    let kappa = [spin_kappa(kappa[0])?, spin_kappa(kappa[1])?];
    let flux = FluxVector::real(&kappa)?;
    let pencil = DiracPencil::new(potential)?;
    let (lambda, vector) = nearest_zero_mode(&pencil, &flux)?;
    let shifted = potential.add_constant(Complex64::new(-lambda, 0.0));
    let spinor = SpinorField::from_kernel(potential.lattice(), pencil.window(), &flux, &vector)?;
    Ok((shifted, lambda, spinor))
}

fn wirtinger(f: &PeriodicScalarField) -> (PeriodicScalarField, PeriodicScalarField) {
    let [fx, fy] = f.gradient();
    let i = Complex64::i();
    let d = fx.add(&fy.scaled(-i)).expect("same grid").scaled(Complex64::new(0.5, 0.0));
    let dbar = fx.add(&fy.scaled(i)).expect("same grid").scaled(Complex64::new(0.5, 0.0));
    (d, dbar)
}

/// Max over the grid of `|Uψ₁ + ∂ψ₂|` and `|-∂̄ψ₁ + Ūψ₂|`, by spectral
/// differentiation.
pub fn dirac_residual(
    potential: &PeriodicScalarField,
    spinor: &SpinorField,
) -> Result<f64, WeierstrassError> {
    let lattice = spinor.lattice();
    if potential.lattice().grid_shape() != lattice.grid_shape() {
        return Err(TorusError::LatticeMismatch.into());
    }
    let xi = lattice.cartesian([
        Complex64::new(spinor.kappa[0], 0.0),
        Complex64::new(spinor.kappa[1], 0.0),
    ]);
    let i = Complex64::i();
    let a = (xi[0] + i * xi[1]) * 0.5;
    let b = (xi[0] - i * xi[1]) * 0.5;
    let [phi1, phi2] = &spinor.phi;
    let (d2, _) = wirtinger(phi2);
    let (_, dbar1) = wirtinger(phi1);
    let u = potential.to_samples();
    let (p1, p2) = (phi1.to_samples(), phi2.to_samples());
    let (d2, dbar1) = (d2.to_samples(), dbar1.to_samples());
    let mut worst: f64 = 0.0;
    for k in 0..u.len() {
        let r1 = u[k] * p1[k] + d2[k] + i * b * p2[k];
        let r2 = -(dbar1[k] + i * a * p1[k]) + u[k].conj() * p2[k];
        worst = worst.max(r1.norm()).max(r2.norm());
    }
    Ok(worst)
}

/// Max over the grid and matrix entries of `|∂̄f - ∂g|` for the integrand
/// `f dz + g dz̄ = i(F dz + F* dz̄)`.
pub fn closedness_residual(spinor: &SpinorField) -> Result<f64, WeierstrassError> {
    let f = spinor.bilinears()?;
    let i = Complex64::i();
    let mut worst: f64 = 0.0;
    for (idx, entry) in f.iter().enumerate() {
        // (F*)_{rc} = conj(F_{cr})
        let transpose = [0, 2, 1, 3][idx];
        let g = f[transpose].conj();
        let (_, dbar_f) = wirtinger(&entry.scaled(i));
        let (d_g, _) = wirtinger(&g.scaled(i));
        let a = dbar_f.to_samples();
        let b = d_g.to_samples();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).norm());
        }
    }
    Ok(worst)
}

/// `∫₀^{k/g} f` for `k = 0..=g` of a periodic line sampled at `g` points.
fn line_antiderivative(planner: &mut FftPlanner<f64>, line: &[Complex64]) -> Vec<Complex64> {
    let g = line.len();
    let mut c = line.to_vec();
    planner.plan_fft_forward(g).process(&mut c);
    c.iter_mut().for_each(|z| *z /= g as f64);
    let half = (g / 2) as i64;
    (0..=g)
        .map(|k| {
            let s = k as f64 / g as f64;
            let mut acc = c[0] * s;
            for (idx, coeff) in c.iter().enumerate().skip(1) {
                let n = if (idx as i64) < (g as i64 + 1) / 2 {
                    idx as i64
                } else {
                    idx as i64 - g as i64
                };
                if n == -half && g % 2 == 0 {
                    continue;
                }
                let w = TWO_PI * n as f64;
                acc += coeff * (Complex64::new(0.0, w * s).exp() - 1.0) / Complex64::new(0.0, w);
            }
            acc
        })
        .collect()
}

type Mat2 = [Complex64; 4];

/// Point of R³ from the anti-Hermitian form.
pub fn decode(x: &Mat2) -> [f64; 3] {
    [x[2].re, -x[2].im, x[0].im]
}

/// Anti-Hermitian traceless matrix `[X₁₁, X₁₂, X₂₁, X₂₂]` of a point.
pub fn encode(p: [f64; 3]) -> Mat2 {
    let i = Complex64::i();
    [
        i * p[2],
        -(p[0] + i * p[1]),
        Complex64::new(p[0], -p[1]),
        -i * p[2],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionMesh {
    /// Cells per side; vertices are `(G+1)²`, row-major in `(s₁, s₂)`.
    pub grid_size: usize,
    pub vertices: Vec<[f64; 3]>,
    /// `P_j = X(s + e_j) - X(s)`, averaged over base points.
    pub periods: [[f64; 3]; 2],
    /// Largest deviation of `P_j` over base points.
    pub period_spread: [f64; 2],
    /// Largest vertex distance between the two integration orders.
    pub path_defect: f64,
    pub closedness: f64,
    /// `e^{2α}` from the spinor density, at each grid point.
    pub conformal_factor: Vec<f64>,
    /// Mean curvature from the first and second fundamental forms of the
    /// immersion; `None` where the spinor density vanishes.
    pub mean_curvature: Vec<Option<f64>>,
    /// `√(EG - F²)` in lattice coordinates, at each grid point.
    pub area_element: Vec<f64>,
    pub multipliers: MultiplierMap,
}

impl ImmersionMesh {
    pub fn vertex(&self, i: usize, j: usize) -> [f64; 3] {
        self.vertices[i * (self.grid_size + 1) + j]
    }

    pub fn degenerate_cells(&self) -> usize {
        self.mean_curvature.iter().filter(|h| h.is_none()).count()
    }

    pub fn to_obj(&self) -> String {
        let g = self.grid_size;
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.15e} {:.15e} {:.15e}", v[0], v[1], v[2]);
        }
        let id = |i: usize, j: usize| i * (g + 1) + j + 1;
        for i in 0..g {
            for j in 0..g {
                let _ = writeln!(
                    out,
                    "f {} {} {} {}",
                    id(i, j),
                    id(i + 1, j),
                    id(i + 1, j + 1),
                    id(i, j + 1)
                );
            }
        }
        out
    }
}

/// Integrates the Weierstrass form over one fundamental domain. Route A
/// integrates along `s₁` on the base row and then along every `s₂` line;
/// route B does the transpose and is kept only as a check. The mesh is
/// translated so that vertex `base` sits at `x0`.
pub fn integrate_immersion(
    spinor: &SpinorField,
    potential: &PeriodicScalarField,
    base: (usize, usize),
    x0: [f64; 3],
    threshold: f64,
) -> Result<ImmersionMesh, WeierstrassError> {
    if !potential.is_real() {
        return Err(WeierstrassError::ComplexPotential);
    }
    let lattice = *spinor.lattice();
    let [g, g2] = lattice.grid_shape();
    if g != g2 || potential.lattice().grid_shape() != [g, g2] {
        return Err(TorusError::LatticeMismatch.into());
    }
    if base.0 > g || base.1 > g {
        return Err(WeierstrassError::BasePoint(base.0, base.1));
    }
    let closedness = closedness_residual(spinor)?;
    if !(closedness <= threshold) {
        return Err(WeierstrassError::NotClosed {
            residual: closedness,
            threshold,
        });
    }

    // Integrand along s_j: G_j = i(F e_j + F* ē_j), entries [11, 12, 21, 22].
    let f: Vec<Vec<Complex64>> = spinor.bilinears()?.iter().map(|e| e.to_samples()).collect();
    let i = Complex64::i();
    let periods = lattice.periods();
    let along = |e: Complex64| -> Vec<Mat2> {
        (0..g * g)
            .map(|k| {
                let mut m = [Complex64::new(0.0, 0.0); 4];
                for (idx, slot) in m.iter_mut().enumerate() {
                    let t = [0, 2, 1, 3][idx];
                    *slot = i * (f[idx][k] * e + f[t][k].conj() * e.conj());
                }
                m
            })
            .collect()
    };
    let g_1 = along(periods[0]);
    let g_2 = along(periods[1]);

    let integrate = |field: &[Mat2], fixed: usize, axis: usize| -> Vec<Mat2> {
        let mut planner = FftPlanner::new();
        let mut out = vec![[Complex64::new(0.0, 0.0); 4]; g + 1];
        for e in 0..4 {
            let line: Vec<Complex64> = (0..g)
                .map(|t| {
                    let k = if axis == 0 { t * g + fixed % g } else { (fixed % g) * g + t };
                    field[k][e]
                })
                .collect();
            for (o, v) in out.iter_mut().zip(line_antiderivative(&mut planner, &line)) {
                o[e] = v;
            }
        }
        out
    };
    let add = |a: &Mat2, b: &Mat2| -> Mat2 { [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]] };

    // Route A: X(i, j) = ∫ G₁ along row s₂ = 0, then ∫ G₂ along column i.
    let base_row = integrate(&g_1, 0, 0);
    let route_a: Vec<Vec<Mat2>> = (0..=g)
        .into_par_iter()
        .map(|r| {
            integrate(&g_2, r, 1)
                .iter()
                .map(|v| add(&base_row[r], v))
                .collect()
        })
        .collect();
    // Route B: column s₁ = 0 first, then rows.
    let base_col = integrate(&g_2, 0, 1);
    let route_b: Vec<Vec<Mat2>> = (0..=g)
        .into_par_iter()
        .map(|c| {
            integrate(&g_1, c, 0)
                .iter()
                .map(|v| add(&base_col[c], v))
                .collect()
        })
        .collect();

    let mut path_defect: f64 = 0.0;
    for r in 0..=g {
        for c in 0..=g {
            let a = decode(&route_a[r][c]);
            let b = decode(&route_b[c][r]);
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            path_defect = path_defect.max(d);
        }
    }

    let mut points: Vec<[f64; 3]> = Vec::with_capacity((g + 1) * (g + 1));
    for row in &route_a {
        for m in row {
            points.push(decode(m));
        }
    }
    let at = |r: usize, c: usize| points[r * (g + 1) + c];
    let shift = {
        let b = at(base.0, base.1);
        [x0[0] - b[0], x0[1] - b[1], x0[2] - b[2]]
    };
    let vertices: Vec<[f64; 3]> = points
        .iter()
        .map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]])
        .collect();

    let diff = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let p1: Vec<[f64; 3]> = (0..=g).map(|c| diff(at(g, c), at(0, c))).collect();
    let p2: Vec<[f64; 3]> = (0..=g).map(|r| diff(at(r, g), at(r, 0))).collect();
    let summarize = |ps: &[[f64; 3]]| {
        let mut mean = [0.0; 3];
        for p in ps {
            (0..3).for_each(|k| mean[k] += p[k] / ps.len() as f64);
        }
        let spread = ps
            .iter()
            .map(|p| {
                let d = diff(*p, mean);
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            })
            .fold(0.0, f64::max);
        (mean, spread)
    };
    let (m1, s1) = summarize(&p1);
    let (m2, s2) = summarize(&p2);

    let (mean_curvature, area_element) = fundamental_forms(&lattice, &g_1, &g_2, spinor)?;
    let [psi1, psi2] = spinor.samples();
    let conformal_factor = (0..g * g)
        .map(|k| (psi1[k].norm_sqr() + psi2[k].norm_sqr()).powi(2))
        .collect();

    Ok(ImmersionMesh {
        grid_size: g,
        vertices,
        periods: [m1, m2],
        period_spread: [s1, s2],
        path_defect,
        closedness,
        conformal_factor,
        mean_curvature,
        area_element,
        multipliers: spinor.multipliers(),
    })
}

/// Mean curvature `(E N - 2F M + G L) / 2(EG - F²)` and area element from
/// the tangent fields `∂X/∂s_j` and their spectral derivatives.
fn fundamental_forms(
    lattice: &TorusLattice,
    g_1: &[Mat2],
    g_2: &[Mat2],
    spinor: &SpinorField,
) -> Result<(Vec<Option<f64>>, Vec<f64>), WeierstrassError> {
    let components = |field: &[Mat2]| -> Result<Vec<PeriodicScalarField>, TorusError> {
        (0..3)
            .map(|c| {
                let samples: Vec<f64> = field.iter().map(|m| decode(m)[c]).collect();
                PeriodicScalarField::from_real_samples(lattice, &samples)
            })
            .collect()
    };
    let t1 = components(g_1)?;
    let t2 = components(g_2)?;
    let samples = |fs: &[PeriodicScalarField]| -> Vec<Vec<f64>> { fs.iter().map(|f| f.to_real_samples()).collect() };
    let x11 = samples(&t1.iter().map(|f| f.derivative(0)).collect::<Vec<_>>());
    let x12 = samples(&t1.iter().map(|f| f.derivative(1)).collect::<Vec<_>>());
    let x22 = samples(&t2.iter().map(|f| f.derivative(1)).collect::<Vec<_>>());
    let (t1, t2) = (samples(&t1), samples(&t2));
    let [psi1, psi2] = spinor.samples();
    let at = |v: &[Vec<f64>], k: usize| [v[0][k], v[1][k], v[2][k]];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut curvature = Vec::with_capacity(psi1.len());
    let mut area = Vec::with_capacity(psi1.len());
    for k in 0..psi1.len() {
        let (a, b) = (at(&t1, k), at(&t2, k));
        let (e, f, g) = (dot(a, a), dot(a, b), dot(b, b));
        let det = e * g - f * f;
        area.push(det.max(0.0).sqrt());
        let density = psi1[k].norm_sqr() + psi2[k].norm_sqr();
        if density < DEGENERATE_DENSITY || det <= 0.0 {
            curvature.push(None);
            continue;
        }
        let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let norm = det.sqrt();
        let n = [cross[0] / norm, cross[1] / norm, cross[2] / norm];
        let (l, m, nn) = (dot(at(&x11, k), n), dot(at(&x12, k), n), dot(at(&x22, k), n));
        curvature.push(Some((e * nn - 2.0 * f * m + g * l) / (2.0 * det)));
    }
    Ok((curvature, area))
}

/// Largest relative mismatch between squared mesh edge lengths and
/// `e^{2α}|Δz|²` evaluated at the edge midpoints.
pub fn metric_defect(mesh: &ImmersionMesh, spinor: &SpinorField) -> f64 {
    let g = mesh.grid_size;
    let lattice = spinor.lattice();
    let h = 1.0 / g as f64;
    let step = [lattice.periods()[0].norm() * h, lattice.periods()[1].norm() * h];
    let rows: Vec<f64> = (0..=g)
        .into_par_iter()
        .map(|r| {
            let mut worst: f64 = 0.0;
            for c in 0..=g {
                for (axis, (dr, dc)) in [(1usize, 0usize), (0, 1)].into_iter().enumerate() {
                    if r + dr > g || c + dc > g {
                        continue;
                    }
                    let a = mesh.vertex(r, c);
                    let b = mesh.vertex(r + dr, c + dc);
                    let chord = (0..3).map(|k| (b[k] - a[k]).powi(2)).sum::<f64>();
                    let mid = [(r as f64 + 0.5 * dr as f64) * h, (c as f64 + 0.5 * dc as f64) * h];
                    let e_alpha = spinor.density(mid);
                    let expected = e_alpha * e_alpha * step[axis] * step[axis];
                    if e_alpha >= DEGENERATE_DENSITY {
                        worst = worst.max((chord / expected - 1.0).abs());
                    }
                }
            }
            worst
        })
        .collect();
    rows.into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WillmoreValues {
    /// `4∫U²` by grid quadrature.
    pub direct: f64,
    /// `∫H² dA` with `H` and `dA` from the immersion's fundamental forms,
    /// over the non-degenerate grid points.
    pub geometric: Option<f64>,
}

impl WillmoreValues {
    pub fn relative_gap(&self) -> Option<f64> {
        self.geometric
            .map(|g| (g - self.direct).abs() / self.direct.abs().max(f64::MIN_POSITIVE))
    }
}

pub fn willmore(
    potential: &PeriodicScalarField,
    mesh: Option<&ImmersionMesh>,
) -> Result<WillmoreValues, WeierstrassError> {
    if !potential.is_real() {
        return Err(WeierstrassError::ComplexPotential);
    }
    let lattice = potential.lattice();
    let u = potential.to_real_samples();
    let direct = 4.0 * lattice.volume() * u.iter().map(|x| x * x).sum::<f64>() / u.len() as f64;
    let geometric = mesh.map(|m| {
        let cell = 1.0 / (m.grid_size * m.grid_size) as f64;
        m.mean_curvature
            .iter()
            .zip(&m.area_element)
            .filter_map(|(h, da)| h.map(|h| h * h * da * cell))
            .sum()
    });
    Ok(WillmoreValues { direct, geometric })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn antiderivative_of_trig_line() {
        let g = 16;
        let line: Vec<Complex64> = (0..g)
            .map(|k| c(1.0 + (TWO_PI * 3.0 * k as f64 / g as f64).cos(), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        let out = line_antiderivative(&mut planner, &line);
        for (k, v) in out.iter().enumerate() {
            let s = k as f64 / g as f64;
            let exact = s + (TWO_PI * 3.0 * s).sin() / (TWO_PI * 3.0);
            assert!((v.re - exact).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = [0.3, -1.2, 2.5];
        assert_eq!(decode(&encode(p)), p);
    }

    #[test]
    fn spin_quasimomenta() {
        assert_eq!(spin_kappa(0.0).unwrap(), 0.0);
        assert!((spin_kappa(-TWO_PI / 2.0).unwrap() - TWO_PI / 2.0).abs() < 1e-15);
        assert_eq!(spin_kappa(3.0 * TWO_PI).unwrap(), 0.0);
        assert!(spin_kappa(1.0).is_err());
    }

    #[test]
    fn constant_spinor_gives_a_plane() {
        let lattice = TorusLattice::unit_square(1, 8).unwrap();
        let s = spinor_from_modes(&lattice, [0.0, 0.0], &[([0, 0], c(1.0, 0.0))], &[]).unwrap();
        let u = PeriodicScalarField::zero(&lattice);
        assert!(dirac_residual(&u, &s).unwrap() < 1e-15);
        let mesh = integrate_immersion(&s, &u, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
        for r in 0..=8 {
            for col in 0..=8 {
                let v = mesh.vertex(r, col);
                // x₁ - ix₂ = i(x + iy) for ψ = (1, 0).
                let (x, y) = (r as f64 / 8.0, col as f64 / 8.0);
                assert!((v[0] + y).abs() < 1e-14 && (v[1] + x).abs() < 1e-14 && v[2].abs() < 1e-14);
            }
        }
        assert!(mesh.mean_curvature.iter().all(|h| h.is_some_and(|h| h.abs() < 1e-12)));
        assert!(mesh.conformal_factor.iter().all(|e| (e - 1.0).abs() < 1e-14));
    }
}
