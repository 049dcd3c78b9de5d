//! The Dirac operator `𝒟 = [[U, ∂], [-∂̄, Ū]]` on a flat two-torus under
//! Bloch conditions: determinant pencil, zero-energy spectral curve, and
//! the asymptotic coefficient `C₀` of the logarithmic multipliers.
//!
//! Chart: `z = x + iy`, `∂ = (∂_x - i∂_y)/2`, `∂̄ = (∂_x + i∂_y)/2`. On the
//! plane wave `e^{iξ·x}` the symbols are `σ(∂) = i b` and `σ(∂̄) = i a` with
//! `a = (ξ₁ + iξ₂)/2`, `b = (ξ₁ - iξ₂)/2`, so each free mode contributes the
//! block `[[U - E, ib], [-ia, Ū - E]]` with determinant `(U-E)(Ū-E) - ab`.
//!
//! Curve points are reported in Cartesian wavevector units `k` with
//! `ψ = e^{2πi k·x} φ`, i.e. quasimomenta `κ_j = 2π k·e_j`.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    diagonal_logdet, eigh, fit_laurent, kernel_vector, logdet, newton_zero, CMatrix,
    EigenSelection, LaurentFit, LogDet, NewtonOptions, NumericsError,
};
use crate::torus::{FluxVector, ModeWindow, MultiplierMap, PeriodicScalarField, TorusError, TorusLattice, TWO_PI};

/// Imaginary energy shift `iε` of the free reference used while tracing.
pub const TRACE_REFERENCE_SHIFT: f64 = 1.0;
/// Newton tolerance on the relative determinant.
pub const CURVE_TOLERANCE: f64 = 1e-10;
/// Accepted curve points satisfy `|relative det| ≤` this.
pub const CURVE_DETERMINANT_BOUND: f64 = 1e-8;
/// Accepted kernel vectors satisfy `‖Mv‖ ≤` this `· ‖M‖`.
pub const KERNEL_RESIDUAL_BOUND: f64 = 1e-7;
const MAX_HALVINGS: usize = 6;
/// A curve offset `|k₂ ∓ ik₁|` may grow by at most this factor per step.
const BRANCH_GUARD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiracError {
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("the Dirac operator needs a two-dimensional lattice")]
    NotPlanar,
    #[error("quasimomentum needs two components, got {0}")]
    FluxComponents(usize),
    #[error("free reference operator is singular at this point")]
    SingularReference,
    #[error("lambda range must satisfy 0 < lambda_min < lambda_max, got [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("a trace needs at least {required} points, got {actual}")]
    TooFewPoints { required: usize, actual: usize },
    #[error("trace mixes branches")]
    MixedBranches,
    #[error("zero lattice vector")]
    ZeroVector,
    #[error("fit residuals grow with lambda: the lambda range is too small")]
    ResidualGrowth,
    #[error("kernel residual {residual:e} exceeds the certificate bound")]
    KernelCertificate { residual: f64 },
}

/// Asymptotic end of the zero-energy curve: `+` where `k₂ ≈ ik₁`, `-` where
/// `k₂ ≈ -ik₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// `(a, b) = ((ξ₁ + iξ₂)/2, (ξ₁ - iξ₂)/2)`.
pub fn rotated(xi: [Complex64; 2]) -> (Complex64, Complex64) {
    let i = Complex64::i();
    ((xi[0] + i * xi[1]) * 0.5, (xi[0] - i * xi[1]) * 0.5)
}

/// Quasimomenta `κ_j = 2π k·e_j` of a Cartesian point `k`.
pub fn flux_of(lattice: &TorusLattice, k: [Complex64; 2]) -> FluxVector {
    let xi = [k[0] * TWO_PI, k[1] * TWO_PI];
    let t = lattice.lattice_components(xi);
    FluxVector::new(t.to_vec()).expect("finite")
}

/// Cartesian point `k` of quasimomenta `κ`.
pub fn point_of(lattice: &TorusLattice, flux: &FluxVector) -> [Complex64; 2] {
    let xi = lattice.cartesian(flux.as_pair());
    [xi[0] / TWO_PI, xi[1] / TWO_PI]
}

/// Potential-dependent part of the Dirac matrix on a fixed mode window;
/// the free symbols are added per `(κ, E)`.
#[derive(Debug, Clone)]
pub struct DiracPencil {
    lattice: TorusLattice,
    window: ModeWindow,
    coupling: CMatrix,
    potential_is_real: bool,
}

impl DiracPencil {
    /// Window centred at mode `0`: the basis is `e^{i(κ + 2πn)·s}`.
    pub fn new(potential: &PeriodicScalarField) -> Result<Self, DiracError> {
        let lattice = *potential.lattice();
        Self::with_window(potential, lattice.modes())
    }

    pub fn with_window(potential: &PeriodicScalarField, window: ModeWindow) -> Result<Self, DiracError> {
        let lattice = *potential.lattice();
        if lattice.dim() != 2 {
            return Err(DiracError::NotPlanar);
        }
        let modes: Vec<[i64; 2]> = window.iter().collect();
        let size = 2 * modes.len();
        let mut coupling = CMatrix::zeros(size, size);
        for (j, m) in modes.iter().enumerate() {
            for (i, n) in modes.iter().enumerate() {
                let k = [n[0] - m[0], n[1] - m[1]];
                let u = potential.coeff(k);
                let u_bar = potential.coeff([-k[0], -k[1]]).conj();
                coupling[(2 * i, 2 * j)] = u;
                coupling[(2 * i + 1, 2 * j + 1)] = u_bar;
            }
        }
        Ok(Self {
            lattice,
            window,
            coupling,
            potential_is_real: potential.is_real(),
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn window(&self) -> ModeWindow {
        self.window
    }

    pub fn dimension(&self) -> usize {
        self.coupling.nrows()
    }

    /// Rotated free symbols `(a_n, b_n)` of each window mode.
    pub fn free_symbols(&self, flux: &FluxVector) -> Result<Vec<(Complex64, Complex64)>, DiracError> {
        let kappa = check_flux(flux)?;
        Ok(self
            .window
            .iter()
            .map(|n| {
                let t = [
                    kappa[0] + TWO_PI * n[0] as f64,
                    kappa[1] + TWO_PI * n[1] as f64,
                ];
                rotated(self.lattice.cartesian(t))
            })
            .collect())
    }

    pub fn matrix(&self, flux: &FluxVector, energy: Complex64) -> Result<CMatrix, DiracError> {
        let i = Complex64::i();
        let mut m = self.coupling.clone();
        for (idx, (a, b)) in self.free_symbols(flux)?.into_iter().enumerate() {
            let r = 2 * idx;
            m[(r, r)] -= energy;
            m[(r + 1, r + 1)] -= energy;
            m[(r, r + 1)] += i * b;
            m[(r + 1, r)] -= i * a;
        }
        Ok(m)
    }

    /// Log-determinant of the free operator at `(κ, E_ref)`.
    pub fn free_logdet(&self, flux: &FluxVector, reference_energy: Complex64) -> Result<LogDet, DiracError> {
        let blocks: Vec<Complex64> = self
            .free_symbols(flux)?
            .into_iter()
            .map(|(a, b)| reference_energy * reference_energy - a * b)
            .collect();
        Ok(diagonal_logdet(&blocks))
    }

    /// `det D(U, κ, E) / det D(0, κ, E_ref)`.
    pub fn relative_determinant(
        &self,
        flux: &FluxVector,
        energy: Complex64,
        reference_energy: Complex64,
    ) -> Result<LogDet, DiracError> {
        let reference = self.free_logdet(flux, reference_energy)?;
        if reference.is_singular() {
            return Err(DiracError::SingularReference);
        }
        Ok(logdet(&self.matrix(flux, energy)?)?.relative_to(&reference))
    }
}

fn check_flux(flux: &FluxVector) -> Result<[Complex64; 2], DiracError> {
    if flux.len() != 2 {
        return Err(DiracError::FluxComponents(flux.len()));
    }
    Ok(flux.as_pair())
}

/// Assembled Dirac matrix at `(κ, E)` on the centred window.
#[derive(Debug, Clone)]
pub struct BlochDiracOperator {
    pub flux: FluxVector,
    pub energy: Complex64,
    pub window: ModeWindow,
    /// Interleaved: row `2i + c` is spinor component `c` of window mode `i`.
    pub matrix: CMatrix,
}

pub fn assemble_dirac(
    potential: &PeriodicScalarField,
    flux: &FluxVector,
    energy: Complex64,
) -> Result<BlochDiracOperator, DiracError> {
    let pencil = DiracPencil::new(potential)?;
    Ok(BlochDiracOperator {
        flux: flux.clone(),
        energy,
        window: pencil.window(),
        matrix: pencil.matrix(flux, energy)?,
    })
}

/// `det D(U, κ, E) / det D(0, κ, E)`; fails where the free operator is
/// singular (shift `E` and retry).
pub fn dirac_determinant(
    potential: &PeriodicScalarField,
    flux: &FluxVector,
    energy: Complex64,
) -> Result<LogDet, DiracError> {
    DiracPencil::new(potential)?.relative_determinant(flux, energy, energy)
}

/// As [`dirac_determinant`] with the reference taken at `E + iε`, which is
/// nonsingular for every real `κ`.
pub fn dirac_determinant_shifted(
    potential: &PeriodicScalarField,
    flux: &FluxVector,
    energy: Complex64,
    epsilon: f64,
) -> Result<LogDet, DiracError> {
    DiracPencil::new(potential)?.relative_determinant(
        flux,
        energy,
        energy + Complex64::new(0.0, epsilon),
    )
}

#[derive(Debug, Clone)]
pub struct SpectralCurvePoint {
    /// Cartesian point `(k₁, k₂)`.
    pub k: [Complex64; 2],
    pub flux: FluxVector,
    pub branch: Branch,
    /// Local parameter at the end: `σ(∂)` on branch `+`, `σ(∂̄)` on `-`.
    pub lambda: Complex64,
    /// Relative determinant at `k` (reference shifted by `iε`).
    pub determinant: LogDet,
    /// Unit kernel vector on the pencil window.
    pub kernel: Vec<Complex64>,
    pub kernel_residual: f64,
    pub multipliers: MultiplierMap,
}

impl SpectralCurvePoint {
    /// Distance from the free end, `|k₂ ∓ ik₁|`.
    pub fn offset(&self) -> f64 {
        (self.k[1] - Complex64::i() * self.branch.sign() * self.k[0]).norm()
    }
}

pub fn multipliers(point: &SpectralCurvePoint) -> MultiplierMap {
    point.flux.multipliers()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub branch: Branch,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub tolerance: f64,
}

impl TraceOptions {
    /// `λ ∈ [λ_min, 4λ_min]` with `λ_min = 8(1 + ‖U‖_∞)`.
    pub fn for_potential(potential: &PeriodicScalarField, branch: Branch) -> Self {
        let lambda_min = default_lambda_min(potential);
        Self {
            branch,
            lambda_min,
            lambda_max: 4.0 * lambda_min,
            steps: 16,
            epsilon: TRACE_REFERENCE_SHIFT,
            tolerance: CURVE_TOLERANCE,
        }
    }

    /// Nominal, geometrically spaced real parameter values.
    pub fn nominal_lambdas(&self) -> Vec<f64> {
        let n = self.steps.max(1);
        if n == 1 {
            return vec![self.lambda_min];
        }
        let ratio = self.lambda_max / self.lambda_min;
        (0..n)
            .map(|j| self.lambda_min * ratio.powf(j as f64 / (n - 1) as f64))
            .collect()
    }
}

pub fn default_lambda_min(potential: &PeriodicScalarField) -> f64 {
    8.0 * (1.0 + potential.max_abs())
}

/// `k₁` of the free end at nominal parameter `λ`: `ξ₁ = -iλ`.
pub fn nominal_k1(lambda: f64) -> Complex64 {
    Complex64::new(0.0, -lambda / TWO_PI)
}

/// Free seed `k₂ = ±ik₁`.
pub fn free_k2(k1: Complex64, branch: Branch) -> Complex64 {
    Complex64::i() * branch.sign() * k1
}

/// Local parameter of a curve point, from its `n = 0` symbols.
pub fn local_parameter(k: [Complex64; 2], branch: Branch) -> Complex64 {
    let (a, b) = rotated([k[0] * TWO_PI, k[1] * TWO_PI]);
    match branch {
        Branch::Plus => Complex64::i() * b,
        Branch::Minus => Complex64::i() * a,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceFailure {
    Newton { lambda: f64, error: String },
    BranchJump { lambda: f64, offset: f64, previous: f64 },
    Certificate { lambda: f64, determinant: f64, kernel: f64 },
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub options: TraceOptions,
    pub points: Vec<SpectralCurvePoint>,
    /// Why the trace stopped early, if it did.
    pub failure: Option<TraceFailure>,
}

/// Follows one end of the zero-energy curve. For each nominal `λ` the point
/// `k₁` is fixed on the free end and `k₂` is solved by Newton on the
/// relative determinant, seeded from the previous solution (the free seed
/// at the first step). On failure the step is halved up to six times.
pub fn trace_curve(
    potential: &PeriodicScalarField,
    options: &TraceOptions,
) -> Result<Trace, DiracError> {
    let pencil = DiracPencil::new(potential)?;
    trace_with_pencil(&pencil, options)
}

pub fn trace_with_pencil(pencil: &DiracPencil, options: &TraceOptions) -> Result<Trace, DiracError> {
    if !(options.lambda_min > 0.0 && options.lambda_max > options.lambda_min) {
        return Err(DiracError::InvalidRange {
            min: options.lambda_min,
            max: options.lambda_max,
        });
    }
    let lattice = *pencil.lattice();
    let branch = options.branch;
    let reference = Complex64::new(0.0, options.epsilon);
    let zero = Complex64::new(0.0, 0.0);
    let newton = NewtonOptions {
        tol: options.tolerance,
        max_iter: 60,
        fd_step: 1e-6,
    };
    let solve = |lambda: f64, seed: Complex64| -> Result<Complex64, NumericsError> {
        let k1 = nominal_k1(lambda);
        let f = |k2: Complex64| {
            let flux = flux_of(&lattice, [k1, k2]);
            pencil
                .relative_determinant(&flux, zero, reference)
                .map(|d| d.value())
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        newton_zero(f, seed, newton).map(|r| r.z)
    };

    let mut points: Vec<SpectralCurvePoint> = Vec::new();
    let mut failure = None;
    // Last accepted (λ, k₂) used for continuation, including sub-steps.
    let mut last: Option<(f64, Complex64)> = None;

    'targets: for target in options.nominal_lambdas() {
        let mut halvings = 0;
        loop {
            let (lambda, seed) = match last {
                None => (target, free_k2(nominal_k1(target), branch)),
                Some((prev, k2_prev)) => {
                    let step = (target - prev) / (1u64 << halvings) as f64;
                    let lambda = prev + step;
                    let shift = free_k2(nominal_k1(lambda), branch) - free_k2(nominal_k1(prev), branch);
                    (lambda, k2_prev + shift)
                }
            };
            match solve(lambda, seed) {
                Ok(k2) => {
                    last = Some((lambda, k2));
                    halvings = 0;
                    if (lambda - target).abs() <= 1e-12 * target {
                        let point = curve_point(pencil, [nominal_k1(target), k2], branch, reference)?;
                        let det = point.determinant.value().norm();
                        if det > CURVE_DETERMINANT_BOUND || point.kernel_residual > KERNEL_RESIDUAL_BOUND {
                            failure = Some(TraceFailure::Certificate {
                                lambda: target,
                                determinant: det,
                                kernel: point.kernel_residual,
                            });
                            break 'targets;
                        }
                        if let Some(prev) = points.last() {
                            let (now, before) = (point.offset(), prev.offset());
                            if now > BRANCH_GUARD * before + 1e-9 {
                                failure = Some(TraceFailure::BranchJump {
                                    lambda: target,
                                    offset: now,
                                    previous: before,
                                });
                                break 'targets;
                            }
                        }
                        points.push(point);
                        continue 'targets;
                    }
                }
                Err(err) => {
                    halvings += 1;
                    if last.is_none() || halvings > MAX_HALVINGS {
                        failure = Some(TraceFailure::Newton {
                            lambda,
                            error: err.to_string(),
                        });
                        break 'targets;
                    }
                }
            }
        }
    }
    Ok(Trace {
        options: options.clone(),
        points,
        failure,
    })
}

fn curve_point(
    pencil: &DiracPencil,
    k: [Complex64; 2],
    branch: Branch,
    reference: Complex64,
) -> Result<SpectralCurvePoint, DiracError> {
    let lattice = pencil.lattice();
    let flux = flux_of(lattice, k);
    let zero = Complex64::new(0.0, 0.0);
    let determinant = pencil.relative_determinant(&flux, zero, reference)?;
    let kernel = kernel_vector(&pencil.matrix(&flux, zero)?)?;
    Ok(SpectralCurvePoint {
        k,
        multipliers: flux.multipliers(),
        flux,
        branch,
        lambda: local_parameter(k, branch),
        determinant,
        kernel: kernel.vector,
        kernel_residual: kernel.residual,
    })
}

/// Point of the `n = 0` free-mode curve for constant `U = c`:
/// `(ξ₁² + ξ₂²)/4 = c²`, with `ξ₂` the root closest to `±iξ₁`.
pub fn constant_potential_k2(c: Complex64, k1: Complex64, branch: Branch) -> Complex64 {
    let xi1 = k1 * TWO_PI;
    let root = (c * c * 4.0 - xi1 * xi1).sqrt();
    let target = Complex64::i() * branch.sign() * xi1;
    let xi2 = if (root - target).norm() <= (-root - target).norm() {
        root
    } else {
        -root
    };
    xi2 / TWO_PI
}

/// Sign and scale relating the fitted `λ⁻¹` coefficient to `C₀`, fixed once
/// against the constant-potential curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// `C₀ = factor · c₋₁`.
    pub factor: Complex64,
    /// The `λ` convention: `λ = lambda_scale · σ`, with `σ` the symbol of
    /// `∂` (branch `+`) or `∂̄` (branch `-`) at the `n = 0` mode.
    pub lambda_scale: Complex64,
}

impl Calibration {
    /// Fits exact constant-potential data (`U = 1`, unit square) and
    /// compares with `C₀ = -1`.
    pub fn from_closed_form() -> Self {
        let lattice = TorusLattice::unit_square(1, 8).expect("static lattice");
        let c = Complex64::new(1.0, 0.0);
        let lambdas: Vec<f64> = (0..12).map(|j| 10.0 + 5.0 * j as f64).collect();
        let points: Vec<(Complex64, Complex64)> = lambdas
            .iter()
            .map(|&l| {
                let k1 = nominal_k1(l);
                let k2 = constant_potential_k2(c, k1, Branch::Plus);
                let flux = flux_of(&lattice, [k1, k2]);
                let log_mu = Complex64::i() * flux.components()[0];
                (local_parameter([k1, k2], Branch::Plus), log_mu)
            })
            .collect();
        let (l, y): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        let fit = fit_laurent(&l, &y, &[1, -1]).expect("well-posed calibration fit");
        let c_minus = fit.coefficient(-1).expect("requested power");
        Self {
            factor: Complex64::new(-1.0, 0.0) / c_minus,
            lambda_scale: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct C0Fit {
    pub c0: Complex64,
    /// Fitted coefficient of `λ`, divided by the expected `v` (or `v̄`).
    pub linear_ratio: Complex64,
    pub fit: LaurentFit,
    pub calibration: Calibration,
}

/// Default number of odd tail terms `λ⁻³, λ⁻⁵, …` in [`fit_c0`].
pub const DEFAULT_TAIL_TERMS: usize = 2;

/// Fits `log μ(v)(λ) = λ·v + c₋₁·v̄/λ + Σ d_j λ^{-2j-1}` over a traced branch
/// and returns the calibrated `C₀`. The expansion is odd in `λ`, so the tail
/// carries odd powers only. On branch `-` the roles of `v` and `v̄` swap.
/// `v` is a lattice vector in generator coordinates.
pub fn fit_c0(
    lattice: &TorusLattice,
    points: &[SpectralCurvePoint],
    v: [i64; 2],
    tail_terms: usize,
    calibration: &Calibration,
) -> Result<C0Fit, DiracError> {
    let mut powers = vec![1, -1];
    powers.extend((1..=tail_terms as i32).map(|j| -2 * j - 1));
    let powers = &powers[..];
    let required = 2 * powers.len();
    if points.len() < required {
        return Err(DiracError::TooFewPoints {
            required,
            actual: points.len(),
        });
    }
    let branch = points[0].branch;
    if points.iter().any(|p| p.branch != branch) {
        return Err(DiracError::MixedBranches);
    }
    if v == [0, 0] {
        return Err(DiracError::ZeroVector);
    }
    let lambdas: Vec<Complex64> = points.iter().map(|p| p.lambda).collect();
    let values: Vec<Complex64> = points
        .iter()
        .map(|p| {
            let kappa = p.flux.components();
            Complex64::i() * (kappa[0] * v[0] as f64 + kappa[1] * v[1] as f64)
        })
        .collect();
    let fit = fit_laurent(&lambdas, &values, powers)?;
    check_residual_trend(&lambdas, &values, &fit)?;

    let vc = complex_period(lattice, v);
    let (leading, trailing) = match branch {
        Branch::Plus => (vc, vc.conj()),
        Branch::Minus => (vc.conj(), vc),
    };
    let c_minus = fit.coefficient(-1).expect("requested power") / trailing;
    Ok(C0Fit {
        c0: calibration.factor * c_minus,
        linear_ratio: fit.coefficient(1).expect("requested power") / leading,
        fit,
        calibration: *calibration,
    })
}

/// `v₁e₁ + v₂e₂` as a complex number.
pub fn complex_period(lattice: &TorusLattice, v: [i64; 2]) -> Complex64 {
    let (e1, e2) = (lattice.period_vector(0), lattice.period_vector(1));
    Complex64::new(
        v[0] as f64 * e1[0] + v[1] as f64 * e2[0],
        v[0] as f64 * e1[1] + v[1] as f64 * e2[1],
    )
}

fn check_residual_trend(
    lambdas: &[Complex64],
    values: &[Complex64],
    fit: &LaurentFit,
) -> Result<(), DiracError> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&i, &j| lambdas[i].norm().total_cmp(&lambdas[j].norm()));
    let half = order.len() / 2;
    let mean = |idx: &[usize]| {
        idx.iter()
            .map(|&i| (fit.evaluate(lambdas[i]) - values[i]).norm())
            .sum::<f64>()
            / idx.len() as f64
    };
    let (near, far) = (mean(&order[..half]), mean(&order[half..]));
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if far > 10.0 * near && far > 1e-10 * scale.max(1.0) {
        return Err(DiracError::ResidualGrowth);
    }
    Ok(())
}

/// `-(1/Area)∫U²` by grid quadrature.
pub fn c0_integral(potential: &PeriodicScalarField) -> Complex64 {
    let samples = potential.to_samples();
    let mean: Complex64 = samples.iter().map(|u| u * u).sum::<Complex64>() / samples.len() as f64;
    -mean
}

/// Eigenpair of the Hermitian matrix `D(U, κ, 0)` (real `U`, real `κ`) with
/// eigenvalue closest to zero. Since `D(U + c) = D(U) + c`, the vector is a
/// kernel of the operator with potential `U - eigenvalue`.
pub fn nearest_zero_mode(
    pencil: &DiracPencil,
    flux: &FluxVector,
) -> Result<(f64, Vec<Complex64>), DiracError> {
    let m = pencil.matrix(flux, Complex64::new(0.0, 0.0))?;
    let spectrum = eigh(&m, EigenSelection::All, true)?;
    let vectors = spectrum.eigenvectors.expect("requested");
    let (idx, value) = spectrum
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty spectrum");
    Ok((value, vectors.column(idx).iter().copied().collect()))
}

impl DiracPencil {
    pub fn potential_is_real(&self) -> bool {
        self.potential_is_real
    }
}

/// Quadratic form on `H₁(T²; Z₂)` attached to a spin structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticFormZ2 {
    /// `q(0), q(e₁), q(e₂), q(e₁+e₂)`.
    pub values: [u8; 4],
}

/// Intersection form `w·w' = w₁w'₂ + w₂w'₁ (mod 2)`.
pub fn intersection(w: [u8; 2], v: [u8; 2]) -> u8 {
    (w[0] * v[1] + w[1] * v[0]) % 2
}

impl QuadraticFormZ2 {
    /// `q = q₀ + ν` with `q₀(e₁) = q₀(e₂) = q₀(e₁+e₂) = 1`.
    pub fn from_homomorphism(nu: [u8; 2]) -> Self {
        let nu = [nu[0] % 2, nu[1] % 2];
        let mut values = [0u8; 4];
        for (idx, w) in Self::classes().iter().enumerate() {
            let q0 = (w[0] + w[1] + w[0] * w[1]) % 2;
            let linear = (nu[0] * w[0] + nu[1] * w[1]) % 2;
            values[idx] = (q0 + linear) % 2;
        }
        Self { values }
    }

    /// `0, e₁, e₂, e₁+e₂`.
    pub fn classes() -> [[u8; 2]; 4] {
        [[0, 0], [1, 0], [0, 1], [1, 1]]
    }

    pub fn value(&self, w: [u8; 2]) -> u8 {
        self.values[(w[0] % 2 + 2 * (w[1] % 2)) as usize]
    }

    /// Checks `q(w+w') = q(w) + q(w') + w·w'` over all pairs.
    pub fn is_quadratic(&self) -> bool {
        let classes = Self::classes();
        classes.iter().all(|&w| {
            classes.iter().all(|&v| {
                let sum = [(w[0] + v[0]) % 2, (w[1] + v[1]) % 2];
                self.value(sum) == (self.value(w) + self.value(v) + intersection(w, v)) % 2
            })
        })
    }

    /// Arf invariant: the majority value of `q`.
    pub fn arf(&self) -> u8 {
        let ones: u8 = self.values.iter().sum();
        u8::from(ones >= 3)
    }
}

/// `q₀ + ν` for the homomorphism read off a multiplier map in `{±1}²`.
pub fn spinor_form(nu: [u8; 2]) -> QuadraticFormZ2 {
    QuadraticFormZ2::from_homomorphism(nu)
}
