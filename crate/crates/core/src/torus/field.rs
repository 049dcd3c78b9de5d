use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{TorusError, TorusLattice, TWO_PI};

/// A periodic function on the torus, held as its full grid spectrum.
///
/// Coefficients are stored in FFT order, normalised so that
/// `f(s) = Σ_n c_n e^{2πi n·s}`. Every mode the quadrature grid resolves is
/// kept, which makes sample/coefficient round trips exact and gives the
/// Galerkin assembly access to the differences `n - m` of window modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicScalarField {
    lattice: TorusLattice,
    coeffs: Vec<Complex64>,
    real: bool,
}

fn frequency(k: usize, g: usize) -> i64 {
    if k < g.div_ceil(2) {
        k as i64
    } else {
        k as i64 - g as i64
    }
}

fn slot(n: i64, g: usize) -> Option<usize> {
    let half = (g / 2) as i64;
    if g == 1 {
        return (n == 0).then_some(0);
    }
    if n < -half || n >= half {
        return None;
    }
    Some(n.rem_euclid(g as i64) as usize)
}

/// Unnormalised in-place transform of a row-major `[g1][g2]` grid.
pub(crate) fn fft_grid(shape: [usize; 2], data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = |planner: &mut FftPlanner<f64>, len: usize| {
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    };
    let [g1, g2] = shape;
    if g2 > 1 {
        let fft = plan(&mut planner, g2);
        for row in data.chunks_exact_mut(g2) {
            fft.process(row);
        }
    }
    if g1 > 1 {
        let fft = plan(&mut planner, g1);
        let mut column = vec![Complex64::new(0.0, 0.0); g1];
        for j in 0..g2 {
            for i in 0..g1 {
                column[i] = data[i * g2 + j];
            }
            fft.process(&mut column);
            for i in 0..g1 {
                data[i * g2 + j] = column[i];
            }
        }
    }
}

impl PeriodicScalarField {
    pub fn from_samples(lattice: &TorusLattice, samples: &[Complex64]) -> Result<Self, TorusError> {
        let expected = lattice.sample_count();
        if samples.len() != expected {
            return Err(TorusError::SampleCount {
                expected,
                actual: samples.len(),
            });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TorusError::NonFinite);
        }
        let mut coeffs = samples.to_vec();
        fft_grid(lattice.grid_shape(), &mut coeffs, false);
        let scale = 1.0 / expected as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Ok(Self {
            lattice: *lattice,
            coeffs,
            real: samples.iter().all(|z| z.im == 0.0),
        })
    }

    pub fn from_real_samples(lattice: &TorusLattice, samples: &[f64]) -> Result<Self, TorusError> {
        let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_samples(lattice, &complex)
    }

    /// Samples `f` at the grid points (lattice coordinates).
    pub fn from_fn(lattice: &TorusLattice, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let [g1, g2] = lattice.grid_shape();
        let samples: Vec<Complex64> = (0..g1)
            .flat_map(|i| (0..g2).map(move |j| (i, j)))
            .map(|(i, j)| f(lattice.grid_point(i, j)))
            .collect();
        Self::from_samples(lattice, &samples).expect("grid-sized sample vector")
    }

    pub fn from_real_fn(lattice: &TorusLattice, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut field = Self::from_fn(lattice, |s| Complex64::new(f(s), 0.0));
        field.real = true;
        field
    }

    /// Field with the listed Fourier coefficients and zeros elsewhere. The
    /// field is flagged real when the list is conjugate-symmetric.
    pub fn from_modes(
        lattice: &TorusLattice,
        modes: &[([i64; 2], Complex64)],
    ) -> Result<Self, TorusError> {
        let mut field = Self::zero(lattice);
        let [g1, g2] = lattice.grid_shape();
        for &(n, value) in modes {
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(TorusError::NonFinite);
            }
            let unresolved = TorusError::UnresolvedMode {
                mode: n,
                grid_size: lattice.grid_size(),
            };
            let a = slot(n[0], g1).ok_or_else(|| unresolved.clone())?;
            let b = slot(n[1], g2).ok_or(unresolved)?;
            field.coeffs[a * g2 + b] += value;
        }
        field.real = field.real_symmetry_defect() <= 1e-14;
        Ok(field)
    }

    pub fn zero(lattice: &TorusLattice) -> Self {
        Self {
            lattice: *lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.sample_count()],
            real: true,
        }
    }

    pub fn constant(lattice: &TorusLattice, value: Complex64) -> Self {
        let mut field = Self::zero(lattice);
        field.coeffs[0] = value;
        field.real = value.im == 0.0;
        field
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Raw coefficients in FFT order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `e^{2πi n·s}`; zero for modes outside the grid band.
    pub fn coeff(&self, n: [i64; 2]) -> Complex64 {
        let [g1, g2] = self.lattice.grid_shape();
        match (slot(n[0], g1), slot(n[1], g2)) {
            (Some(a), Some(b)) => self.coeffs[a * g2 + b],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates `(n, c_n)` over every stored mode.
    pub fn modes(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        let [g1, g2] = self.lattice.grid_shape();
        self.coeffs.iter().enumerate().map(move |(idx, &c)| {
            let (a, b) = (idx / g2, idx % g2);
            ([frequency(a, g1), frequency(b, g2)], c)
        })
    }

    pub fn to_samples(&self) -> Vec<Complex64> {
        let mut samples = self.coeffs.clone();
        fft_grid(self.lattice.grid_shape(), &mut samples, true);
        if self.real {
            samples.iter_mut().for_each(|z| z.im = 0.0);
        }
        samples
    }

    pub fn to_real_samples(&self) -> Vec<f64> {
        self.to_samples().into_iter().map(|z| z.re).collect()
    }

    /// Spectral interpolation at arbitrary lattice coordinates.
    pub fn evaluate(&self, s: [f64; 2]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (n, c) in self.modes() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase = TWO_PI * (n[0] as f64 * s[0] + n[1] as f64 * s[1]);
            total += c * Complex64::from_polar(1.0, phase);
        }
        if self.real {
            Complex64::new(total.re, 0.0)
        } else {
            total
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn integral(&self) -> Complex64 {
        self.coeffs[0] * self.lattice.volume()
    }

    /// Mean of `|f|²` over the torus (Parseval).
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_samples().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_n |c_{-n} - conj(c_n)|`.
    pub fn real_symmetry_defect(&self) -> f64 {
        let [g1, g2] = self.lattice.grid_shape();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let (a, b) = (idx / g2, idx % g2);
                let partner = ((g1 - a) % g1) * g2 + (g2 - b) % g2;
                (self.coeffs[partner] - c.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Derivative along the lattice coordinate `s_j`. The unpaired Nyquist
    /// mode is dropped.
    pub fn derivative(&self, j: usize) -> Self {
        let g = self.lattice.grid_shape();
        let half = (g[j] / 2) as i64;
        let mut out = self.clone();
        let g2 = g[1];
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let k = if j == 0 { idx / g2 } else { idx % g2 };
            let n = frequency(k, g[j]);
            if n == -half && g[j] > 1 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, TWO_PI * n as f64);
            }
        }
        out
    }

    /// Cartesian gradient `(∂_x f, ∂_y f)`.
    pub fn gradient(&self) -> [Self; 2] {
        let dim = self.lattice.dim();
        let partials: Vec<Self> = (0..dim).map(|j| self.derivative(j)).collect();
        let component = |axis: usize| {
            let mut acc = Self::zero(&self.lattice);
            acc.real = self.real;
            for (j, p) in partials.iter().enumerate() {
                let w = self.lattice.dual_vector(j)[axis];
                acc.coeffs
                    .iter_mut()
                    .zip(&p.coeffs)
                    .for_each(|(a, b)| *a += b * w);
            }
            acc
        };
        [component(0), component(1)]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            lattice: self.lattice,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            real: self.real && factor.im == 0.0,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        if !self.lattice.same_grid(&other.lattice) {
            return Err(TorusError::LatticeMismatch);
        }
        Ok(Self {
            lattice: self.lattice,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            real: self.real && other.real,
        })
    }

    pub fn add_constant(&self, value: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out.real = self.real && value.im == 0.0;
        out
    }

    pub fn conj(&self) -> Self {
        let samples: Vec<Complex64> = self.to_samples().iter().map(|z| z.conj()).collect();
        let mut out = Self::from_samples(&self.lattice, &samples).expect("same grid");
        out.real = self.real;
        out
    }

    /// Pointwise product on the grid. Exact when the two spectra together
    /// stay below the grid Nyquist frequency.
    pub fn product(&self, other: &Self) -> Result<Self, TorusError> {
        if !self.lattice.same_grid(&other.lattice) {
            return Err(TorusError::LatticeMismatch);
        }
        let a = self.to_samples();
        let b = other.to_samples();
        let samples: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = Self::from_samples(&self.lattice, &samples)?;
        out.real = self.real && other.real;
        Ok(out)
    }

    /// Same samples re-expressed on another lattice with identical periods
    /// (used when the truncation radius changes but the grid does not need
    /// to). Modes that do not fit are an error.
    pub fn resampled(&self, lattice: &TorusLattice) -> Result<Self, TorusError> {
        if lattice.dim() != self.lattice.dim() || lattice.periods() != self.lattice.periods() {
            return Err(TorusError::LatticeMismatch);
        }
        let modes: Vec<([i64; 2], Complex64)> = self
            .modes()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        let mut out = Self::from_modes(lattice, &modes)?;
        out.real = self.real;
        Ok(out)
    }
}
