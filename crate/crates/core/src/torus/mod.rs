//! Flat tori `R/LZ` and `C/(Z e1 + Z e2)`: lattices, Fourier mode windows,
//! sampled periodic fields, harmonic one-forms and quasimomenta.
//!
//! Points of the torus are addressed by lattice coordinates `s ∈ [0,1)^dim`,
//! `x = s1 e1 + s2 e2`. The coordinate functions `s_j` lift to the linear
//! functions `h_j` on the universal cover, so that a shift by the generator
//! `T_j` increases `h_j` by exactly one. Plane waves are `e^{2πi n·s}` and
//! their Cartesian wavevector is `2π Σ n_j e*_j` with `e*_j` the dual basis.

mod field;
mod forms;

use num_complex::Complex64;
use thiserror::Error;

pub(crate) use field::fft_grid;
pub use field::PeriodicScalarField;
pub use forms::{lift_bloch, BlochLift, FluxVector, HarmonicOneForm, MultiplierMap};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("lattice dimension must be 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("expected {expected} period(s), got {actual}")]
    PeriodCount { expected: usize, actual: usize },
    #[error("degenerate or negatively oriented lattice: Im(conj(e1) e2) = {orientation}")]
    Degenerate { orientation: f64 },
    #[error("period must be positive and finite, got {0}")]
    NonPositivePeriod(f64),
    #[error("Fourier truncation radius must be at least 1")]
    EmptyTruncation,
    #[error("grid size {grid_size} must be a power of two")]
    GridNotPowerOfTwo { grid_size: usize },
    #[error("grid size {grid_size} too coarse for nmax {nmax}: need at least {required}")]
    GridTooCoarse {
        grid_size: usize,
        nmax: usize,
        required: usize,
    },
    #[error("expected {expected} grid samples, got {actual}")]
    SampleCount { expected: usize, actual: usize },
    #[error("fields live on different lattices")]
    LatticeMismatch,
    #[error("mode {mode:?} is not resolved by a grid of size {grid_size}")]
    UnresolvedMode { mode: [i64; 2], grid_size: usize },
    #[error("expected {expected} flux component(s), got {actual}")]
    FluxCount { expected: usize, actual: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("lift needs at least two copies per direction, got {0}")]
    TooFewCopies(usize),
}

/// Period lattice of a flat torus together with its Fourier truncation and
/// quadrature grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusLattice {
    dim: usize,
    periods: [Complex64; 2],
    dual: [[f64; 2]; 2],
    nmax: usize,
    grid_size: usize,
}

impl TorusLattice {
    /// Builds a lattice of dimension 1 (`periods = [L]`, real) or 2
    /// (`periods = [e1, e2]`).
    pub fn new(
        dim: usize,
        periods: &[Complex64],
        nmax: usize,
        grid_size: usize,
    ) -> Result<Self, TorusError> {
        if dim != 1 && dim != 2 {
            return Err(TorusError::UnsupportedDimension(dim));
        }
        if periods.len() != dim {
            return Err(TorusError::PeriodCount {
                expected: dim,
                actual: periods.len(),
            });
        }
        if periods.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(TorusError::NonFinite);
        }
        if nmax == 0 {
            return Err(TorusError::EmptyTruncation);
        }
        if !grid_size.is_power_of_two() {
            return Err(TorusError::GridNotPowerOfTwo { grid_size });
        }
        let required = 4 * nmax + 2;
        if grid_size < required {
            return Err(TorusError::GridTooCoarse {
                grid_size,
                nmax,
                required,
            });
        }

        let (periods, dual) = if dim == 1 {
            let length = periods[0].re;
            if !(length > 0.0) || periods[0].im != 0.0 {
                return Err(TorusError::NonPositivePeriod(length));
            }
            (
                [Complex64::new(length, 0.0), Complex64::new(0.0, 0.0)],
                [[1.0 / length, 0.0], [0.0, 0.0]],
            )
        } else {
            let (e1, e2) = (periods[0], periods[1]);
            let orientation = (e1.conj() * e2).im;
            if !(orientation > 0.0) {
                return Err(TorusError::Degenerate { orientation });
            }
            // Rows of the inverse of [e1 e2] (columns) form the dual basis.
            let det = e1.re * e2.im - e2.re * e1.im;
            (
                [e1, e2],
                [
                    [e2.im / det, -e2.re / det],
                    [-e1.im / det, e1.re / det],
                ],
            )
        };

        Ok(Self {
            dim,
            periods,
            dual,
            nmax,
            grid_size,
        })
    }

    pub fn line(period: f64, nmax: usize, grid_size: usize) -> Result<Self, TorusError> {
        Self::new(1, &[Complex64::new(period, 0.0)], nmax, grid_size)
    }

    pub fn planar(
        e1: Complex64,
        e2: Complex64,
        nmax: usize,
        grid_size: usize,
    ) -> Result<Self, TorusError> {
        Self::new(2, &[e1, e2], nmax, grid_size)
    }

    /// The unit square torus `C/(Z + iZ)`.
    pub fn unit_square(nmax: usize, grid_size: usize) -> Result<Self, TorusError> {
        Self::planar(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), nmax, grid_size)
    }

    /// Same periods with a different truncation radius; the grid is enlarged
    /// to the smallest admissible power of two when needed.
    pub fn with_nmax(&self, nmax: usize) -> Result<Self, TorusError> {
        let grid = self.grid_size.max((4 * nmax + 2).next_power_of_two());
        Self::new(self.dim, &self.periods[..self.dim], nmax, grid)
    }

    pub fn with_grid_size(&self, grid_size: usize) -> Result<Self, TorusError> {
        Self::new(self.dim, &self.periods[..self.dim], self.nmax, grid_size)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn periods(&self) -> &[Complex64] {
        &self.periods[..self.dim]
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Area of the fundamental domain (length in dimension 1).
    pub fn volume(&self) -> f64 {
        if self.dim == 1 {
            self.periods[0].re
        } else {
            (self.periods[0].conj() * self.periods[1]).im.abs()
        }
    }

    /// Cartesian dual basis vector `e*_j`, `e*_j · e_k = δ_jk`.
    pub fn dual_vector(&self, j: usize) -> [f64; 2] {
        self.dual[j]
    }

    /// Cartesian vector of a period, `e_j` as `(Re, Im)`.
    pub fn period_vector(&self, j: usize) -> [f64; 2] {
        [self.periods[j].re, self.periods[j].im]
    }

    /// Cartesian (complexified) wavevector `Σ_j t_j e*_j`.
    pub fn cartesian(&self, t: [Complex64; 2]) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (j, tj) in t.iter().enumerate().take(self.dim) {
            out[0] += tj * self.dual[j][0];
            out[1] += tj * self.dual[j][1];
        }
        out
    }

    /// Lattice-coordinate components `t_j = ξ · e_j` of a Cartesian vector.
    pub fn lattice_components(&self, xi: [Complex64; 2]) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (j, o) in out.iter_mut().enumerate().take(self.dim) {
            let e = self.period_vector(j);
            *o = xi[0] * e[0] + xi[1] * e[1];
        }
        out
    }

    /// Wavevector of the plane wave `e^{2πi n·s}`.
    pub fn mode_wavevector(&self, n: [i64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (j, &nj) in n.iter().enumerate().take(self.dim) {
            let t = TWO_PI * nj as f64;
            out[0] += t * self.dual[j][0];
            out[1] += t * self.dual[j][1];
        }
        out
    }

    /// Number of grid samples per direction `(s1, s2)`; 1 along the unused
    /// direction of a line.
    pub fn grid_shape(&self) -> [usize; 2] {
        if self.dim == 1 {
            [self.grid_size, 1]
        } else {
            [self.grid_size, self.grid_size]
        }
    }

    pub fn sample_count(&self) -> usize {
        let [a, b] = self.grid_shape();
        a * b
    }

    /// Lattice coordinates of grid sample `(i, j)`.
    pub fn grid_point(&self, i: usize, j: usize) -> [f64; 2] {
        let g = self.grid_size as f64;
        [i as f64 / g, if self.dim == 1 { 0.0 } else { j as f64 / g }]
    }

    /// Cartesian position of lattice coordinates `s`.
    pub fn position(&self, s: [f64; 2]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (j, &sj) in s.iter().enumerate().take(self.dim) {
            let e = self.period_vector(j);
            x[0] += sj * e[0];
            x[1] += sj * e[1];
        }
        x
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.sample_count() as f64
    }

    /// The centred truncation window `|n_j| ≤ nmax`.
    pub fn modes(&self) -> ModeWindow {
        ModeWindow::new(self.dim, self.nmax, [0, 0])
    }

    pub fn mode_count(&self) -> usize {
        self.modes().len()
    }

    pub(crate) fn same_grid(&self, other: &TorusLattice) -> bool {
        self == other
    }
}

/// Square block of Fourier modes `center + [-nmax, nmax]^dim` with a fixed
/// bijection onto matrix indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeWindow {
    dim: usize,
    nmax: usize,
    center: [i64; 2],
}

impl ModeWindow {
    pub fn new(dim: usize, nmax: usize, center: [i64; 2]) -> Self {
        let center = if dim == 1 { [center[0], 0] } else { center };
        Self { dim, nmax, center }
    }

    pub fn center(&self) -> [i64; 2] {
        self.center
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    fn side(&self) -> usize {
        2 * self.nmax + 1
    }

    pub fn len(&self) -> usize {
        if self.dim == 1 {
            self.side()
        } else {
            self.side() * self.side()
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mode(&self, index: usize) -> [i64; 2] {
        let r = self.nmax as i64;
        if self.dim == 1 {
            [index as i64 - r + self.center[0], 0]
        } else {
            let side = self.side();
            [
                (index / side) as i64 - r + self.center[0],
                (index % side) as i64 - r + self.center[1],
            ]
        }
    }

    pub fn index(&self, n: [i64; 2]) -> Option<usize> {
        let r = self.nmax as i64;
        let a = n[0] - self.center[0] + r;
        let side = self.side() as i64;
        if !(0..side).contains(&a) {
            return None;
        }
        if self.dim == 1 {
            return (n[1] == 0).then_some(a as usize);
        }
        let b = n[1] - self.center[1] + r;
        if !(0..side).contains(&b) {
            return None;
        }
        Some((a * side + b) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }
}

/// Window centred so that the constant part `t` (lattice components) of the
/// total wavevector lands in the first zone: `t_j + 2π n_j` with `n` centred
/// at `-round(Re t_j / 2π)`.
pub fn reduced_center(dim: usize, t: [Complex64; 2]) -> [i64; 2] {
    let mut c = [0i64; 2];
    for j in 0..dim {
        c[j] = -(t[j].re / TWO_PI).round() as i64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_square_has_unit_area() {
        let lattice = TorusLattice::unit_square(8, 64).unwrap();
        assert!((lattice.volume() - 1.0).abs() < 1e-15);
        assert_eq!(lattice.mode_count(), 17 * 17);
    }

    #[test]
    fn collinear_periods_are_rejected() {
        let err = TorusLattice::planar(c(1.0, 0.0), c(1.0, 0.0), 4, 32).unwrap_err();
        assert!(matches!(err, TorusError::Degenerate { .. }));
        let err = TorusLattice::planar(c(0.0, 1.0), c(1.0, 0.0), 4, 32).unwrap_err();
        assert!(matches!(err, TorusError::Degenerate { .. }), "negative orientation");
    }

    #[test]
    fn line_mode_count() {
        let lattice = TorusLattice::line(1.0, 16, 128).unwrap();
        assert_eq!(lattice.mode_count(), 33);
    }

    #[test]
    fn grid_constraints() {
        assert!(matches!(
            TorusLattice::line(1.0, 16, 64),
            Err(TorusError::GridTooCoarse { required: 66, .. })
        ));
        assert!(matches!(
            TorusLattice::line(1.0, 4, 24),
            Err(TorusError::GridNotPowerOfTwo { .. })
        ));
        assert!(matches!(
            TorusLattice::line(1.0, 0, 8),
            Err(TorusError::EmptyTruncation)
        ));
        assert!(matches!(
            TorusLattice::line(-1.0, 2, 16),
            Err(TorusError::NonPositivePeriod(_))
        ));
        assert!(matches!(
            TorusLattice::new(3, &[], 2, 16),
            Err(TorusError::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn dual_basis_is_biorthogonal() {
        let lattice = TorusLattice::planar(c(1.3, 0.2), c(0.4, 0.9), 2, 16).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let d = lattice.dual_vector(j);
                let e = lattice.period_vector(k);
                let dot = d[0] * e[0] + d[1] * e[1];
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-14);
            }
        }
        assert!((lattice.volume() - (1.3 * 0.9 - 0.4 * 0.2)).abs() < 1e-14);
    }

    #[test]
    fn window_indexing_is_a_bijection() {
        let w = ModeWindow::new(2, 3, [2, -1]);
        for i in 0..w.len() {
            assert_eq!(w.index(w.mode(i)), Some(i));
        }
        assert_eq!(w.index([6, 0]), None);
        let w1 = ModeWindow::new(1, 4, [-3, 7]);
        assert_eq!(w1.center(), [-3, 0]);
        for i in 0..w1.len() {
            assert_eq!(w1.index(w1.mode(i)), Some(i));
        }
        assert_eq!(w1.index([0, 1]), None);
    }

    #[test]
    fn reduced_center_lands_in_first_zone() {
        let t = [c(50.0, 0.3), c(-7.0, 0.0)];
        let center = reduced_center(2, t);
        for j in 0..2 {
            let shifted = t[j].re + TWO_PI * center[j] as f64;
            assert!(shifted.abs() <= std::f64::consts::PI + 1e-12);
        }
    }
}
