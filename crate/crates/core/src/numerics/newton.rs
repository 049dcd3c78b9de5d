use num_complex::Complex64;

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step relative to `max(1, |z|)`.
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub z: Complex64,
    pub value: Complex64,
    pub iterations: usize,
}

/// Newton's method for a holomorphic scalar function with a central
/// finite-difference derivative.
///
/// Converged when the last step is below `tol·max(1, |z|)` and
/// `|f(z)| ≤ tol·|f(z0)|`; measuring `|f|` against its starting value makes
/// the result independent of a constant rescaling of `f`.
pub fn newton_zero<F>(
    mut f: F,
    z0: Complex64,
    options: NewtonOptions,
) -> Result<NewtonRoot, NumericsError>
where
    F: FnMut(Complex64) -> Complex64,
{
    let finite = |w: Complex64| w.re.is_finite() && w.im.is_finite();
    let mut z = z0;
    let mut value = f(z);
    if !finite(value) {
        return Err(NumericsError::NonFiniteValue { z });
    }
    let scale = value.norm();
    if scale == 0.0 {
        return Ok(NewtonRoot {
            z,
            value,
            iterations: 0,
        });
    }
    for iteration in 1..=options.max_iter {
        let h = options.fd_step * z.norm().max(1.0);
        let derivative = (f(z + h) - f(z - h)) / (2.0 * h);
        if !finite(derivative) || derivative.norm() == 0.0 {
            return Err(NumericsError::DerivativeUnderflow { z });
        }
        let step = value / derivative;
        z -= step;
        value = f(z);
        if !finite(value) {
            return Err(NumericsError::NonFiniteValue { z });
        }
        let small_step = step.norm() <= options.tol * z.norm().max(1.0);
        if (small_step && value.norm() <= options.tol * scale) || value.norm() == 0.0 {
            return Ok(NewtonRoot {
                z,
                value,
                iterations: iteration,
            });
        }
    }
    Err(NumericsError::NewtonNoConvergence {
        iterations: options.max_iter,
        residual: value.norm(),
    })
}
