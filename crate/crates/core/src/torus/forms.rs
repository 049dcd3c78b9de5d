use num_complex::Complex64;

use super::{PeriodicScalarField, TorusError, TorusLattice, TWO_PI};

/// Closed one-form `ω = Σ_k A_k ds_k + dφ`: a constant harmonic part in
/// lattice coordinates plus an optional exact part.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOneForm {
    constant: [f64; 2],
    exact: Option<PeriodicScalarField>,
}

impl HarmonicOneForm {
    pub fn new(constant: [f64; 2]) -> Self {
        Self {
            constant,
            exact: None,
        }
    }

    /// `ω_m = ds_m`, dual to the generator `Z_m`.
    pub fn standard(m: usize) -> Self {
        let mut constant = [0.0; 2];
        constant[m] = 1.0;
        Self::new(constant)
    }

    /// The standard basis `ω_1, …, ω_dim`.
    pub fn standard_basis(lattice: &TorusLattice) -> Vec<Self> {
        (0..lattice.dim()).map(Self::standard).collect()
    }

    pub fn with_exact(mut self, phi: PeriodicScalarField) -> Self {
        self.exact = Some(phi);
        self
    }

    pub fn constant(&self) -> [f64; 2] {
        self.constant
    }

    pub fn exact(&self) -> Option<&PeriodicScalarField> {
        self.exact.as_ref()
    }

    /// Cartesian coefficients of the harmonic part, `Σ_k A_k e*_k`.
    pub fn cartesian_constant(&self, lattice: &TorusLattice) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..lattice.dim() {
            let d = lattice.dual_vector(k);
            out[0] += self.constant[k] * d[0];
            out[1] += self.constant[k] * d[1];
        }
        out
    }

    /// `∮_{Z_j} ω` by trapezoidal line integration along `s_j` at the base
    /// row of the grid. The exact part contributes only rounding.
    pub fn periods(&self, lattice: &TorusLattice) -> Vec<f64> {
        (0..lattice.dim())
            .map(|j| {
                let mut total = self.constant[j];
                if let Some(phi) = &self.exact {
                    let d = phi.derivative(j).to_samples();
                    let [_, g2] = lattice.grid_shape();
                    let g = lattice.grid_size();
                    let line: f64 = (0..g)
                        .map(|i| if j == 0 { d[i * g2].re } else { d[i].re })
                        .sum();
                    total += line / g as f64;
                }
                total
            })
            .collect()
    }
}

/// Quasimomenta `(κ_1, …, κ_N)`, one per generator of `H_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxVector(Vec<Complex64>);

impl FluxVector {
    pub fn new(components: Vec<Complex64>) -> Result<Self, TorusError> {
        if components.is_empty() || components.len() > 2 {
            return Err(TorusError::FluxCount {
                expected: 2,
                actual: components.len(),
            });
        }
        if components.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TorusError::NonFinite);
        }
        Ok(Self(components))
    }

    pub fn real(components: &[f64]) -> Result<Self, TorusError> {
        Self::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Padded to two components.
    pub fn as_pair(&self) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        out[..self.0.len()].copy_from_slice(&self.0);
        out
    }

    /// Physical fluxes are real.
    pub fn is_physical(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    /// `κ + 2π k e_m`.
    pub fn shifted(&self, m: usize, k: i64) -> Self {
        let mut out = self.0.clone();
        out[m] += TWO_PI * k as f64;
        Self(out)
    }

    pub fn multipliers(&self) -> MultiplierMap {
        MultiplierMap::from_flux(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_len(&self, lattice: &TorusLattice) -> Result<(), TorusError> {
        if self.0.len() != lattice.dim() {
            return Err(TorusError::FluxCount {
                expected: lattice.dim(),
                actual: self.0.len(),
            });
        }
        Ok(())
    }
}

/// Deck-transformation eigenvalues `μ_m = e^{iκ_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierMap(Vec<Complex64>);

impl MultiplierMap {
    pub fn from_flux(flux: &FluxVector) -> Self {
        Self(
            flux.components()
                .iter()
                .map(|k| (Complex64::i() * k).exp())
                .collect(),
        )
    }

    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    /// Largest componentwise distance, relative to the multiplier size.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(1.0))
            .fold(0.0, f64::max)
    }

    /// `Some(ν)` with `μ = (-1)^ν` when every multiplier is ±1 within `tol`.
    pub fn sign_homomorphism(&self, tol: f64) -> Option<Vec<u8>> {
        self.0
            .iter()
            .map(|m| {
                if (m - 1.0).norm() <= tol {
                    Some(0)
                } else if (m + 1.0).norm() <= tol {
                    Some(1)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// A Bloch function sampled on a block of `copies[0] × copies[1]`
/// fundamental domains of the cover.
#[derive(Debug, Clone)]
pub struct BlochLift {
    grid: [usize; 2],
    copies: [usize; 2],
    values: Vec<Complex64>,
}

impl BlochLift {
    pub fn shape(&self) -> [usize; 2] {
        [self.grid[0] * self.copies[0], self.grid[1] * self.copies[1]]
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.shape()[1] + j]
    }

    /// `max |ψ(T_k x) - e^{iκ_k} ψ(x)|` over all points whose translate is
    /// still inside the block.
    pub fn floquet_defect(&self, flux: &FluxVector) -> f64 {
        let [n1, n2] = self.shape();
        let mut worst: f64 = 0.0;
        for (k, kappa) in flux.components().iter().enumerate() {
            let mu = (Complex64::i() * kappa).exp();
            let (di, dj) = if k == 0 { (self.grid[0], 0) } else { (0, self.grid[1]) };
            for i in 0..n1.saturating_sub(di) {
                for j in 0..n2.saturating_sub(dj) {
                    let d = self.value(i + di, j + dj) - mu * self.value(i, j);
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }
}

/// `ψ = e^{i Σ κ_m h_m} φ` on a block of copies of the fundamental domain,
/// with `h_m` the linear lifts of the lattice coordinates.
pub fn lift_bloch(
    lattice: &TorusLattice,
    flux: &FluxVector,
    phi: &PeriodicScalarField,
    copies: [usize; 2],
) -> Result<BlochLift, TorusError> {
    flux.check_len(lattice)?;
    if phi.lattice() != lattice {
        return Err(TorusError::LatticeMismatch);
    }
    let copies = if lattice.dim() == 1 { [copies[0], 1] } else { copies };
    for &c in &copies[..lattice.dim()] {
        if c < 2 {
            return Err(TorusError::TooFewCopies(c));
        }
    }
    let grid = lattice.grid_shape();
    let samples = phi.to_samples();
    let kappa = flux.as_pair();
    let g = lattice.grid_size() as f64;
    let shape = [grid[0] * copies[0], grid[1] * copies[1]];
    let mut values = Vec::with_capacity(shape[0] * shape[1]);
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            let h = [i as f64 / g, if lattice.dim() == 1 { 0.0 } else { j as f64 / g }];
            let phase = Complex64::i() * (kappa[0] * h[0] + kappa[1] * h[1]);
            let base = samples[(i % grid[0]) * grid[1] + (j % grid[1])];
            values.push(phase.exp() * base);
        }
    }
    Ok(BlochLift {
        grid,
        copies,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(lattice: &TorusLattice, seed: u64) -> PeriodicScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Complex64> = (0..lattice.sample_count())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        PeriodicScalarField::from_samples(lattice, &samples).unwrap()
    }

    #[test]
    fn zero_flux_lift_is_periodic() {
        let lattice = TorusLattice::unit_square(2, 16).unwrap();
        let phi = random_field(&lattice, 1);
        let flux = FluxVector::zero(2);
        let lift = lift_bloch(&lattice, &flux, &phi, [2, 3]).unwrap();
        assert!(lift.floquet_defect(&flux) < 1e-15);
    }

    #[test]
    fn full_turn_multiplier_is_trivial() {
        let lattice = TorusLattice::unit_square(2, 16).unwrap();
        let phi = PeriodicScalarField::constant(&lattice, Complex64::new(1.0, 0.0));
        let flux = FluxVector::real(&[TWO_PI, 0.0]).unwrap();
        let lift = lift_bloch(&lattice, &flux, &phi, [2, 2]).unwrap();
        assert!(lift.floquet_defect(&FluxVector::zero(2)) < 1e-12);
    }

    #[test]
    fn third_turn_floquet_condition() {
        let lattice = TorusLattice::unit_square(3, 16).unwrap();
        let phi = random_field(&lattice, 7);
        let flux = FluxVector::real(&[std::f64::consts::PI / 3.0, 0.0]).unwrap();
        let lift = lift_bloch(&lattice, &flux, &phi, [3, 2]).unwrap();
        assert!(lift.floquet_defect(&flux) < 1e-12);
        assert!(lift.floquet_defect(&FluxVector::zero(2)) > 0.1);
    }

    #[test]
    fn lift_rejects_single_copy() {
        let lattice = TorusLattice::line(1.0, 2, 16).unwrap();
        let phi = PeriodicScalarField::zero(&lattice);
        let flux = FluxVector::zero(1);
        assert!(matches!(
            lift_bloch(&lattice, &flux, &phi, [1, 1]),
            Err(TorusError::TooFewCopies(1))
        ));
    }

    #[test]
    fn exact_parts_do_not_change_periods() {
        let lattice = TorusLattice::planar(Complex64::new(1.0, 0.0), Complex64::new(0.2, 1.1), 4, 32)
            .unwrap();
        let phi = PeriodicScalarField::from_real_fn(&lattice, |s| {
            0.3 * (TWO_PI * s[0]).sin() + 0.7 * (TWO_PI * (s[0] - 2.0 * s[1])).cos()
        });
        for m in 0..2 {
            let plain = HarmonicOneForm::standard(m).periods(&lattice);
            let gauged = HarmonicOneForm::standard(m)
                .with_exact(phi.clone())
                .periods(&lattice);
            for j in 0..2 {
                let expected = if j == m { 1.0 } else { 0.0 };
                assert!((plain[j] - expected).abs() < 1e-15);
                assert!((gauged[j] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn multipliers_are_invariant_under_dual_shifts() {
        let flux = FluxVector::new(vec![Complex64::new(0.4, 0.2), Complex64::new(-1.0, 0.0)]).unwrap();
        let base = flux.multipliers();
        for m in 0..2 {
            for k in [-3, 1, 5] {
                assert!(base.distance(&flux.shifted(m, k).multipliers()) < 1e-13);
            }
        }
        assert!(!flux.is_physical());
    }

    #[test]
    fn sign_homomorphism_of_half_turns() {
        let pi = std::f64::consts::PI;
        let flux = FluxVector::real(&[pi, 0.0]).unwrap();
        assert_eq!(flux.multipliers().sign_homomorphism(1e-12), Some(vec![1, 0]));
        let flux = FluxVector::real(&[0.5, 0.0]).unwrap();
        assert_eq!(flux.multipliers().sign_homomorphism(1e-12), None);
    }
}
