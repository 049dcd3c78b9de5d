//! Bloch-substituted magnetic Schrödinger operators
//! `L(κ) = (-i∇ + 𝒜₀ + Σ κ_m ω_m)² + U` on flat tori, assembled in a
//! Fourier–Galerkin basis.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{
    diagonal_logdet, eigh, logdet, newton_zero, CMatrix, EigenSelection, LogDet,
    NewtonOptions, NumericsError,
};
use crate::torus::{
    fft_grid, reduced_center, FluxVector, HarmonicOneForm, ModeWindow, PeriodicScalarField,
    TorusError, TorusLattice,
};

/// Energy shift `ε` of the free reference operator `L_free(κ) + ε` used to
/// normalise determinants.
pub const REFERENCE_SHIFT: f64 = 1.0;

/// Default spectral agreement tolerance.
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;
/// Tolerance used once some `|κ_m| > 10`.
pub const WIDE_SPECTRAL_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchrodingerError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("{0} must live on the potential's lattice")]
    LatticeMismatch(&'static str),
    #[error("{forms} harmonic form(s) but {flux} flux component(s)")]
    FluxCount { forms: usize, flux: usize },
    #[error("base vector potential needs {expected} component(s), got {actual}")]
    BasePotentialComponents { expected: usize, actual: usize },
    #[error("the Hermitian eigensolver needs real flux and real coefficients")]
    NotSelfAdjoint,
    #[error("requested {requested} eigenvalues from a {available}-mode truncation")]
    TooManyBands { requested: usize, available: usize },
    #[error("free reference operator is singular at this flux")]
    SingularReference,
    #[error("no forms: the standard basis is required here")]
    NonStandardForms,
}

pub fn spectral_tolerance(flux: &FluxVector) -> f64 {
    if flux.max_abs() > 10.0 {
        WIDE_SPECTRAL_TOLERANCE
    } else {
        SPECTRAL_TOLERANCE
    }
}

/// Potential, base vector potential and harmonic forms; the flux is supplied
/// per assembly.
#[derive(Debug, Clone)]
pub struct SchrodingerSetup {
    lattice: TorusLattice,
    potential: PeriodicScalarField,
    base: Option<Vec<PeriodicScalarField>>,
    forms: Vec<HarmonicOneForm>,
}

impl SchrodingerSetup {
    /// Standard forms `ω_m = ds_m`, no base vector potential.
    pub fn new(potential: PeriodicScalarField) -> Self {
        let lattice = *potential.lattice();
        Self {
            lattice,
            forms: HarmonicOneForm::standard_basis(&lattice),
            potential,
            base: None,
        }
    }

    pub fn with_forms(mut self, forms: Vec<HarmonicOneForm>) -> Result<Self, SchrodingerError> {
        for form in &forms {
            if let Some(phi) = form.exact() {
                if phi.lattice() != &self.lattice {
                    return Err(SchrodingerError::LatticeMismatch("exact part"));
                }
            }
        }
        self.forms = forms;
        Ok(self)
    }

    /// Cartesian components of `𝒜₀`, one per dimension.
    pub fn with_base_potential(
        mut self,
        components: Vec<PeriodicScalarField>,
    ) -> Result<Self, SchrodingerError> {
        if components.len() != self.lattice.dim() {
            return Err(SchrodingerError::BasePotentialComponents {
                expected: self.lattice.dim(),
                actual: components.len(),
            });
        }
        if components.iter().any(|c| c.lattice() != &self.lattice) {
            return Err(SchrodingerError::LatticeMismatch("base vector potential"));
        }
        self.base = Some(components);
        Ok(self)
    }

    /// Same data on a lattice with truncation radius `nmax`.
    pub fn with_nmax(&self, nmax: usize) -> Result<Self, SchrodingerError> {
        let lattice = self.lattice.with_nmax(nmax)?;
        let forms = self
            .forms
            .iter()
            .map(|f| {
                let mut g = HarmonicOneForm::new(f.constant());
                if let Some(phi) = f.exact() {
                    g = g.with_exact(phi.resampled(&lattice)?);
                }
                Ok(g)
            })
            .collect::<Result<Vec<_>, TorusError>>()?;
        let base = match &self.base {
            Some(b) => Some(
                b.iter()
                    .map(|c| c.resampled(&lattice))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        Ok(Self {
            lattice,
            potential: self.potential.resampled(&lattice)?,
            base,
            forms,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn potential(&self) -> &PeriodicScalarField {
        &self.potential
    }

    pub fn forms(&self) -> &[HarmonicOneForm] {
        &self.forms
    }

    pub fn base_potential(&self) -> Option<&[PeriodicScalarField]> {
        self.base.as_deref()
    }

    fn check_flux(&self, flux: &FluxVector) -> Result<(), SchrodingerError> {
        if flux.len() != self.forms.len() {
            return Err(SchrodingerError::FluxCount {
                forms: self.forms.len(),
                flux: flux.len(),
            });
        }
        Ok(())
    }

    /// Mean Cartesian vector potential `a_c` at this flux.
    pub fn constant_potential(&self, flux: &FluxVector) -> [Complex64; 2] {
        let mut a = [Complex64::new(0.0, 0.0); 2];
        if let Some(base) = &self.base {
            for (axis, c) in base.iter().enumerate() {
                a[axis] += c.mean();
            }
        }
        for (form, k) in self.forms.iter().zip(flux.components()) {
            let w = form.cartesian_constant(&self.lattice);
            a[0] += k * w[0];
            a[1] += k * w[1];
        }
        a
    }

    /// Window whose centre brings the constant part of the vector potential
    /// into the first zone, so that the spectrum is a function of the
    /// multipliers alone at every truncation.
    pub fn reduced_window(&self, flux: &FluxVector) -> ModeWindow {
        let t = self.lattice.lattice_components(self.constant_potential(flux));
        ModeWindow::new(
            self.lattice.dim(),
            self.lattice.nmax(),
            reduced_center(self.lattice.dim(), t),
        )
    }

    /// Whether real flux yields a Hermitian matrix.
    pub fn has_real_coefficients(&self) -> bool {
        self.potential.is_real()
            && self.base.iter().flatten().all(|c| c.is_real())
            && self
                .forms
                .iter()
                .all(|f| f.exact().map_or(true, |phi| phi.is_real()))
    }

    pub fn assemble(&self, flux: &FluxVector) -> Result<BlochSchrodingerOperator, SchrodingerError> {
        self.assemble_in(flux, self.reduced_window(flux))
    }

    /// Galerkin matrix on an explicit mode window:
    /// `δ_nm (G_m + a_c)² + ã_{n-m}·(G_n + G_m + 2a_c) + (ã·ã)_{n-m} + U_{n-m}`
    /// with `ã` the fluctuating part of the total vector potential.
    pub fn assemble_in(
        &self,
        flux: &FluxVector,
        window: ModeWindow,
    ) -> Result<BlochSchrodingerOperator, SchrodingerError> {
        self.check_flux(flux)?;
        let lattice = &self.lattice;
        let a_c = self.constant_potential(flux);
        let fluct = self.fluctuating_potential(flux)?;
        let square = match &fluct {
            Some([ax, ay]) => Some(ax.product(ax)?.add(&ay.product(ay)?)?),
            None => None,
        };

        let modes: Vec<[i64; 2]> = window.iter().collect();
        let wavevectors: Vec<[f64; 2]> = modes.iter().map(|&n| lattice.mode_wavevector(n)).collect();
        let size = modes.len();
        let mut matrix = CMatrix::zeros(size, size);
        for (j, (&m, gm)) in modes.iter().zip(&wavevectors).enumerate() {
            for (i, (&n, gn)) in modes.iter().zip(&wavevectors).enumerate() {
                let k = [n[0] - m[0], n[1] - m[1]];
                let mut entry = self.potential.coeff(k);
                if let (Some([ax, ay]), Some(sq)) = (&fluct, &square) {
                    let wx = gn[0] + gm[0] + 2.0 * a_c[0];
                    let wy = gn[1] + gm[1] + 2.0 * a_c[1];
                    entry += ax.coeff(k) * wx + ay.coeff(k) * wy + sq.coeff(k);
                }
                if i == j {
                    let px = gm[0] + a_c[0];
                    let py = gm[1] + a_c[1];
                    entry += px * px + py * py;
                }
                matrix[(i, j)] = entry;
            }
        }
        let self_adjoint = flux.is_physical() && self.has_real_coefficients();
        Ok(BlochSchrodingerOperator {
            matrix,
            window,
            flux: flux.clone(),
            self_adjoint,
            free_diagonal: wavevectors
                .iter()
                .map(|g| {
                    let px = g[0] + a_c[0];
                    let py = g[1] + a_c[1];
                    px * px + py * py
                })
                .collect(),
        })
    }

    /// `ã = (𝒜₀ - mean) + Σ κ_m ∇φ_m`, or `None` when identically zero.
    fn fluctuating_potential(
        &self,
        flux: &FluxVector,
    ) -> Result<Option<[PeriodicScalarField; 2]>, SchrodingerError> {
        let mut parts: Vec<[PeriodicScalarField; 2]> = Vec::new();
        if let Some(base) = &self.base {
            let zero = PeriodicScalarField::zero(&self.lattice);
            let ax = base[0].add_constant(-base[0].mean());
            let ay = match base.get(1) {
                Some(c) => c.add_constant(-c.mean()),
                None => zero,
            };
            parts.push([ax, ay]);
        }
        for (form, k) in self.forms.iter().zip(flux.components()) {
            if let Some(phi) = form.exact() {
                let [gx, gy] = phi.gradient();
                parts.push([gx.scaled(*k), gy.scaled(*k)]);
            }
        }
        let mut iter = parts.into_iter();
        let Some(mut acc) = iter.next() else {
            return Ok(None);
        };
        for [x, y] in iter {
            acc = [acc[0].add(&x)?, acc[1].add(&y)?];
        }
        Ok(Some(acc))
    }

    /// Lowest `count` eigenvalues at real flux.
    pub fn spectrum(&self, flux: &FluxVector, count: usize) -> Result<Vec<f64>, SchrodingerError> {
        self.assemble(flux)?.eigenvalues(count)
    }
}

/// Assembled Galerkin matrix of `L(κ)` on a mode window.
#[derive(Debug, Clone)]
pub struct BlochSchrodingerOperator {
    matrix: CMatrix,
    window: ModeWindow,
    flux: FluxVector,
    self_adjoint: bool,
    free_diagonal: Vec<Complex64>,
}

impl BlochSchrodingerOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn flux(&self) -> &FluxVector {
        &self.flux
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>, SchrodingerError> {
        if !self.self_adjoint {
            return Err(SchrodingerError::NotSelfAdjoint);
        }
        let available = self.matrix.nrows();
        if count > available {
            return Err(SchrodingerError::TooManyBands {
                requested: count,
                available,
            });
        }
        Ok(eigh(&self.matrix, EigenSelection::Lowest(count), false)?.eigenvalues)
    }

    /// `det(L(κ) - E) / det(L_free(κ) + ε)` with `L_free` the kinetic part
    /// at the same constant vector potential.
    pub fn relative_determinant(&self, energy: Complex64) -> Result<LogDet, SchrodingerError> {
        let shifted_free: Vec<Complex64> =
            self.free_diagonal.iter().map(|d| d + REFERENCE_SHIFT).collect();
        let reference = diagonal_logdet(&shifted_free);
        if reference.is_singular() {
            return Err(SchrodingerError::SingularReference);
        }
        let mut shifted = self.matrix.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] -= energy;
        }
        Ok(logdet(&shifted)?.relative_to(&reference))
    }
}

#[derive(Debug, Clone)]
pub struct DispersionRow {
    pub flux: Vec<f64>,
    pub energies: Vec<f64>,
}

/// Lowest `band_count` eigenvalues at every flux of a real grid, bands
/// sorted by value. Rows come back in grid order.
pub fn dispersion_sweep(
    setup: &SchrodingerSetup,
    grid: &[FluxVector],
    band_count: usize,
) -> Result<Vec<DispersionRow>, SchrodingerError> {
    grid.par_iter()
        .map(|flux| {
            if !flux.is_physical() {
                return Err(SchrodingerError::NotSelfAdjoint);
            }
            Ok(DispersionRow {
                flux: flux.components().iter().map(|k| k.re).collect(),
                energies: setup.spectrum(flux, band_count)?,
            })
        })
        .collect()
}

/// Largest deviation among the lowest ten eigenvalues when `dφ` is added to
/// the first form.
pub fn gauge_check(
    setup: &SchrodingerSetup,
    flux: &FluxVector,
    phi: &PeriodicScalarField,
) -> Result<f64, SchrodingerError> {
    if phi.lattice() != setup.lattice() {
        return Err(SchrodingerError::LatticeMismatch("gauge function"));
    }
    let mut forms = setup.forms().to_vec();
    let Some(first) = forms.first_mut() else {
        return Err(SchrodingerError::NonStandardForms);
    };
    let exact = match first.exact() {
        Some(existing) => existing.add(phi)?,
        None => phi.clone(),
    };
    *first = HarmonicOneForm::new(first.constant()).with_exact(exact);
    let gauged = setup.clone().with_forms(forms)?;

    let count = 10.min(setup.lattice().mode_count());
    let before = setup.spectrum(flux, count)?;
    let after = gauged.spectrum(flux, count)?;
    Ok(before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Relative Frobenius distance between the Aharonov–Bohm assembly with
/// standard forms and flux `κ`, and `-Δ + U` acting on Bloch waves
/// `e^{iκ·s}` with quasimomenta `κ`, assembled independently by applying
/// the operator to each basis function on the quadrature grid.
pub fn theorem3_check(
    potential: &PeriodicScalarField,
    flux: &FluxVector,
) -> Result<f64, SchrodingerError> {
    let magnetic = SchrodingerSetup::new(potential.clone());
    let operator = magnetic.assemble(flux)?;
    let bloch = bloch_substituted_matrix(potential, flux, operator.window())?;
    let norm = crate::numerics::frobenius(operator.matrix());
    let diff = crate::numerics::frobenius(&(operator.matrix() - &bloch));
    Ok(if norm == 0.0 { diff } else { diff / norm })
}

fn bloch_substituted_matrix(
    potential: &PeriodicScalarField,
    flux: &FluxVector,
    window: ModeWindow,
) -> Result<CMatrix, SchrodingerError> {
    let lattice = potential.lattice();
    let dim = lattice.dim();
    if flux.len() != dim {
        return Err(SchrodingerError::FluxCount {
            forms: dim,
            flux: flux.len(),
        });
    }
    let kappa = flux.components();
    // Inverse metric g^{jk} = e*_j · e*_k.
    let mut metric = [[0.0; 2]; 2];
    for (j, row) in metric.iter_mut().enumerate().take(dim) {
        for (k, g) in row.iter_mut().enumerate().take(dim) {
            let (a, b) = (lattice.dual_vector(j), lattice.dual_vector(k));
            *g = a[0] * b[0] + a[1] * b[1];
        }
    }
    let shape = lattice.grid_shape();
    let samples = potential.to_samples();
    let total = samples.len() as f64;
    let modes: Vec<[i64; 2]> = window.iter().collect();
    let wrap = |n: i64, g: usize| n.rem_euclid(g as i64) as usize;
    let mut matrix = CMatrix::zeros(modes.len(), modes.len());
    for (j, &m) in modes.iter().enumerate() {
        // Potential times the basis function, back to Fourier space.
        let mut column: Vec<Complex64> = (0..shape[0])
            .flat_map(|a| (0..shape[1]).map(move |b| (a, b)))
            .zip(&samples)
            .map(|((a, b), u)| {
                let s = lattice.grid_point(a, b);
                let phase = crate::torus::TWO_PI * (m[0] as f64 * s[0] + m[1] as f64 * s[1]);
                u * Complex64::from_polar(1.0, phase)
            })
            .collect();
        fft_grid(shape, &mut column, false);
        for (i, &n) in modes.iter().enumerate() {
            let slot = wrap(n[0], shape[0]) * shape[1] + wrap(n[1], shape[1]);
            matrix[(i, j)] = column[slot] / total;
        }
        let t: Vec<Complex64> = (0..dim)
            .map(|l| kappa[l] + crate::torus::TWO_PI * m[l] as f64)
            .collect();
        let mut kinetic = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            for b in 0..dim {
                kinetic += t[a] * t[b] * metric[a][b];
            }
        }
        matrix[(j, j)] += kinetic;
    }
    Ok(matrix)
}

#[derive(Debug, Clone)]
pub struct SliceColumn {
    pub flux: FluxVector,
    pub energies: Vec<f64>,
    pub determinants: Vec<LogDet>,
    /// Zeros in `E` of the relative determinant, ascending by real part.
    pub zeros: Vec<Complex64>,
}

/// Relative determinant `det(L(κ) - E)/det(L_free(κ) + ε)` sampled on an
/// energy grid for each flux of a path, with its zeros in `E`.
///
/// At self-adjoint points the determinant is real; sign changes are
/// bracketed, narrowed by bisection and polished with Newton. Elsewhere
/// local minima of `|det|` seed Newton in the complex `E` plane.
pub fn bloch_variety_slice(
    setup: &SchrodingerSetup,
    path: &[FluxVector],
    energy_range: (f64, f64),
    samples: usize,
) -> Result<Vec<SliceColumn>, SchrodingerError> {
    let (lo, hi) = energy_range;
    let samples = samples.max(2);
    let energies: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect();
    path.par_iter()
        .map(|flux| slice_column(setup, flux, &energies))
        .collect()
}

fn slice_column(
    setup: &SchrodingerSetup,
    flux: &FluxVector,
    energies: &[f64],
) -> Result<SliceColumn, SchrodingerError> {
    let operator = setup.assemble(flux)?;
    let determinants = energies
        .iter()
        .map(|&e| operator.relative_determinant(Complex64::new(e, 0.0)))
        .collect::<Result<Vec<_>, _>>()?;
    let value = |e: Complex64| {
        operator
            .relative_determinant(e)
            .map(|d| d.value())
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let mut zeros = Vec::new();
    if operator.is_self_adjoint() {
        scan_real_axis(&operator, &value, energies, &determinants, 3, &mut zeros)?;
    } else {
        let mags: Vec<f64> = determinants.iter().map(|d| d.log_magnitude).collect();
        for i in 1..mags.len().saturating_sub(1) {
            if mags[i] < mags[i - 1] && mags[i] <= mags[i + 1] {
                let seed = Complex64::new(energies[i], 0.0);
                if let Ok(root) = newton_zero(value, seed, polish_options()) {
                    let step = energies[1] - energies[0];
                    if (root.z - seed).norm() < 4.0 * step.abs().max(1.0)
                        && !zeros.iter().any(|z: &Complex64| (z - root.z).norm() < 1e-8)
                    {
                        zeros.push(root.z);
                    }
                }
            }
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(SliceColumn {
        flux: flux.clone(),
        energies: energies.to_vec(),
        determinants,
        zeros,
    })
}

/// Sign-change scan of a real determinant. Interior local minima of `|det|`
/// without a sign change are resampled more finely, since a close pair of
/// zeros can hide inside one step; at the last level Newton is tried there
/// directly, which also catches zeros of even multiplicity.
fn scan_real_axis(
    operator: &BlochSchrodingerOperator,
    value: &impl Fn(Complex64) -> Complex64,
    energies: &[f64],
    determinants: &[LogDet],
    depth: usize,
    zeros: &mut Vec<Complex64>,
) -> Result<(), SchrodingerError> {
    let sign = |d: &LogDet| if d.is_singular() { 0.0 } else { d.phase.cos().signum() };
    let push = |z: f64, zeros: &mut Vec<Complex64>| {
        let scale = 1e-9 * z.abs().max(1.0);
        if !zeros.iter().any(|w| (w.re - z).abs() < scale) {
            zeros.push(Complex64::new(z, 0.0));
        }
    };
    for (i, d) in determinants.iter().enumerate() {
        if d.is_singular() {
            push(energies[i], zeros);
        }
    }
    for (i, w) in determinants.windows(2).enumerate() {
        if sign(&w[0]) * sign(&w[1]) < 0.0 {
            push(refine_bracket(value, energies[i], energies[i + 1]), zeros);
        }
    }
    for i in 1..determinants.len().saturating_sub(1) {
        let (l, m, r) = (&determinants[i - 1], &determinants[i], &determinants[i + 1]);
        let local_min = m.log_magnitude < l.log_magnitude && m.log_magnitude <= r.log_magnitude;
        if !local_min || sign(l) != sign(m) || sign(m) != sign(r) || m.is_singular() {
            continue;
        }
        let (a, b) = (energies[i - 1], energies[i + 1]);
        if depth == 0 {
            // Locate the extremum; a sign flip there splits a close pair
            // into two brackets.
            let s = sign(m);
            let c = golden_minimum(|x| s * value(Complex64::new(x, 0.0)).re, a, b);
            let fc = s * value(Complex64::new(c, 0.0)).re;
            if fc < 0.0 {
                push(refine_bracket(value, a, c), zeros);
                push(refine_bracket(value, c, b), zeros);
                continue;
            }
            let seed = Complex64::new(c, 0.0);
            if let Ok(root) = newton_zero(value, seed, polish_options()) {
                if root.z.re > a && root.z.re < b && root.z.im.abs() < 1e-8 * root.z.re.abs().max(1.0) {
                    push(root.z.re, zeros);
                }
            }
            continue;
        }
        let fine: Vec<f64> = (0..=32).map(|j| a + (b - a) * j as f64 / 32.0).collect();
        let dets = fine
            .iter()
            .map(|&e| operator.relative_determinant(Complex64::new(e, 0.0)))
            .collect::<Result<Vec<_>, _>>()?;
        scan_real_axis(operator, value, &fine, &dets, depth - 1, zeros)?;
    }
    Ok(())
}

fn polish_options() -> NewtonOptions {
    NewtonOptions {
        tol: 1e-13,
        max_iter: 40,
        fd_step: 1e-6,
    }
}

/// Minimiser of a unimodal `f` on `[a, b]` by golden-section search.
fn golden_minimum(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Zero of a real-valued (up to rounding) function with a sign change on
/// `[a, b]`: bisection down to a narrow bracket, then Newton. A Newton
/// result that leaves the bracket is discarded in favour of bisection.
fn refine_bracket(f: &impl Fn(Complex64) -> Complex64, mut a: f64, mut b: f64) -> f64 {
    let real = |x: f64| f(Complex64::new(x, 0.0)).re;
    let mut fa = real(a);
    let width = 1e-4 * a.abs().max(b.abs()).max(1.0);
    while b - a > width {
        let mid = 0.5 * (a + b);
        let fm = real(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let seed = Complex64::new(0.5 * (a + b), 0.0);
    match newton_zero(f, seed, polish_options()) {
        Ok(root) if root.z.re >= a && root.z.re <= b => root.z.re,
        _ => {
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = real(mid);
                if fa.signum() == fm.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
    }
}
