//! Run configuration: a strict TOML schema and its validation.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use bloch_core::torus::{TorusError, TorusLattice};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::DecodeError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config schema: {0}")]
    Schema(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("lattice: {0}")]
    Lattice(#[from] TorusError),
    #[error("coefficient table: {0}")]
    Coefficients(#[from] DecodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Dispersion,
    GaugeCheck,
    BlochSlice,
    DiracCurve,
    FitC0,
    Weierstrass,
    Willmore,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Dispersion => "dispersion",
            TaskKind::GaugeCheck => "gauge-check",
            TaskKind::BlochSlice => "bloch-slice",
            TaskKind::DiracCurve => "dirac-curve",
            TaskKind::FitC0 => "fit-c0",
            TaskKind::Weierstrass => "weierstrass",
            TaskKind::Willmore => "willmore",
        }
    }

    fn needs_plane(self) -> bool {
        matches!(
            self,
            TaskKind::DiracCurve | TaskKind::FitC0 | TaskKind::Weierstrass
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub lattice: LatticeConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub gauge: GaugeConfig,
    #[serde(default)]
    pub slice: SliceConfig,
    #[serde(default)]
    pub curve: CurveConfig,
    #[serde(default)]
    pub weierstrass: WeierstrassConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Generators as `[re, im]`; one entry for a circle, two for a torus.
    pub periods: Vec<[f64; 2]>,
    pub nmax: usize,
    /// Defaults to the smallest power of two `≥ 4·nmax + 4`.
    #[serde(default)]
    pub grid_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub n: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Constant {
        c: f64,
    },
    /// `U = 2a cos 2πs₁`.
    Mathieu {
        a: f64,
    },
    /// `U = 2a cos 2πs₁ + 2b cos 2πs₂`.
    Cos2d {
        a: f64,
        b: f64,
    },
    /// Explicit Fourier modes, inline or from a whitespace table
    /// `n₁ n₂ re im` (path relative to the config file).
    Coefficients {
        #[serde(default)]
        modes: Vec<ModeEntry>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
}

fn default_samples() -> usize {
    64
}
fn default_bands() -> usize {
    4
}
fn default_kappa_min() -> f64 {
    -PI
}
fn default_kappa_max() -> f64 {
    PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Points per axis of the half-open κ grid `[kappa_min, kappa_max)`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bands")]
    pub bands: usize,
    #[serde(default = "default_kappa_min")]
    pub kappa_min: f64,
    #[serde(default = "default_kappa_max")]
    pub kappa_max: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            bands: default_bands(),
            kappa_min: default_kappa_min(),
            kappa_max: default_kappa_max(),
        }
    }
}

fn default_gauge_amplitude() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// Flux components; zeros when absent.
    #[serde(default)]
    pub kappa: Vec<f64>,
    /// `φ = amplitude · sin 2πs₁`.
    #[serde(default = "default_gauge_amplitude")]
    pub amplitude: f64,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            kappa: Vec::new(),
            amplitude: default_gauge_amplitude(),
        }
    }
}

fn default_energy_min() -> f64 {
    -5.0
}
fn default_energy_max() -> f64 {
    60.0
}
fn default_energy_samples() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    /// Real parts of the flux at each path point.
    #[serde(default)]
    pub path: Vec<Vec<f64>>,
    /// Imaginary parts, same shape as `path` when given.
    #[serde(default)]
    pub path_imag: Vec<Vec<f64>>,
    #[serde(default = "default_energy_min")]
    pub energy_min: f64,
    #[serde(default = "default_energy_max")]
    pub energy_max: f64,
    #[serde(default = "default_energy_samples")]
    pub samples: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            path: Vec::new(),
            path_imag: Vec::new(),
            energy_min: default_energy_min(),
            energy_max: default_energy_max(),
            samples: default_energy_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    Plus,
    Minus,
    Both,
}

fn default_steps() -> usize {
    16
}
fn default_epsilon() -> f64 {
    bloch_core::dirac::TRACE_REFERENCE_SHIFT
}
fn default_curve_tolerance() -> f64 {
    bloch_core::dirac::CURVE_TOLERANCE
}
fn default_tail_terms() -> usize {
    bloch_core::dirac::DEFAULT_TAIL_TERMS
}
fn default_branch() -> BranchChoice {
    BranchChoice::Both
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    #[serde(default = "default_branch")]
    pub branch: BranchChoice,
    /// Defaults to `8(1 + ‖U‖_∞)`.
    #[serde(default)]
    pub lambda_min: Option<f64>,
    /// Defaults to `4·lambda_min`.
    #[serde(default)]
    pub lambda_max: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_curve_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_tail_terms")]
    pub tail_terms: usize,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            branch: default_branch(),
            lambda_min: None,
            lambda_max: None,
            steps: default_steps(),
            epsilon: default_epsilon(),
            tolerance: default_curve_tolerance(),
            tail_terms: default_tail_terms(),
        }
    }
}

fn default_spin() -> [u8; 2] {
    [1, 1]
}
fn default_closedness() -> f64 {
    bloch_core::weierstrass::CLOSEDNESS_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassConfig {
    /// `ν ∈ {0,1}²`; the spinor has quasimomentum `κ = πν`.
    #[serde(default = "default_spin")]
    pub spin: [u8; 2],
    #[serde(default = "default_closedness")]
    pub closedness_threshold: f64,
    #[serde(default)]
    pub base: [usize; 2],
    #[serde(default)]
    pub origin: [f64; 3],
}

impl Default for WeierstrassConfig {
    fn default() -> Self {
        Self {
            spin: default_spin(),
            closedness_threshold: default_closedness(),
            base: [0, 0],
            origin: [0.0; 3],
        }
    }
}

fn default_verify_samples() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random quasimomenta per randomized check.
    #[serde(default = "default_verify_samples")]
    pub samples: usize,
    /// Bands compared by the spectral checks.
    #[serde(default = "default_bands")]
    pub bands: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_verify_samples(),
            bands: default_bands(),
        }
    }
}

/// Parses and validates a config without touching the file system.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| ConfigError::Schema(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Smallest power of two holding the bilinear densities of an
/// `nmax`-truncated spinor.
pub fn default_grid_size(nmax: usize) -> usize {
    (4 * nmax + 4).next_power_of_two()
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn finite(name: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.lattice.periods.len()
    }

    pub fn grid_size(&self) -> usize {
        self.lattice
            .grid_size
            .unwrap_or_else(|| default_grid_size(self.lattice.nmax))
    }

    pub fn build_lattice(&self) -> Result<TorusLattice, ConfigError> {
        let periods: Vec<Complex64> = self
            .lattice
            .periods
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Ok(TorusLattice::new(
            self.dim(),
            &periods,
            self.lattice.nmax,
            self.grid_size(),
        )?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let dim = self.dim();
        if dim != 1 && dim != 2 {
            return Err(invalid(format!(
                "lattice.periods needs 1 or 2 entries, got {dim}"
            )));
        }
        if self.lattice.nmax > 64 {
            return Err(invalid("lattice.nmax above 64 is not supported"));
        }
        if self.lattice.grid_size.is_some_and(|g| g > 4096) {
            return Err(invalid("lattice.grid_size above 4096 is not supported"));
        }
        self.build_lattice()?;
        if self.task.needs_plane() && dim != 2 {
            return Err(invalid(format!(
                "task {} needs a two-dimensional lattice",
                self.task.name()
            )));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        match &self.potential {
            PotentialConfig::Zero => {}
            PotentialConfig::Constant { c } => finite("potential.c", *c)?,
            PotentialConfig::Mathieu { a } => finite("potential.a", *a)?,
            PotentialConfig::Cos2d { a, b } => {
                finite("potential.a", *a)?;
                finite("potential.b", *b)?;
                if dim != 2 {
                    return Err(invalid("cos2d potential needs a two-dimensional lattice"));
                }
            }
            PotentialConfig::Coefficients { modes, file } => {
                if modes.is_empty() && file.is_none() {
                    return Err(invalid("coefficient potential needs modes or a file"));
                }
                for m in modes {
                    if m.n.len() != dim {
                        return Err(invalid(format!(
                            "mode index {:?} does not match dimension {dim}",
                            m.n
                        )));
                    }
                    finite("mode coefficient", m.re)?;
                    finite("mode coefficient", m.im)?;
                }
            }
        }

        let d = &self.dispersion;
        if d.samples == 0 || d.samples > 4096 {
            return Err(invalid("dispersion.samples must be in 1..=4096"));
        }
        finite("dispersion.kappa_min", d.kappa_min)?;
        finite("dispersion.kappa_max", d.kappa_max)?;
        if d.kappa_max <= d.kappa_min {
            return Err(invalid("dispersion.kappa_max must exceed kappa_min"));
        }
        let modes = (2 * self.lattice.nmax + 1).pow(dim as u32);
        for (name, bands) in [
            ("dispersion.bands", d.bands),
            ("verify.bands", self.verify.bands),
        ] {
            if bands == 0 || bands > modes {
                return Err(invalid(format!("{name} must be in 1..={modes}")));
            }
        }

        if !self.gauge.kappa.is_empty() && self.gauge.kappa.len() != dim {
            return Err(invalid("gauge.kappa must have one entry per period"));
        }
        self.gauge
            .kappa
            .iter()
            .try_for_each(|k| finite("gauge.kappa", *k))?;
        finite("gauge.amplitude", self.gauge.amplitude)?;

        let s = &self.slice;
        for p in s.path.iter().chain(&s.path_imag) {
            if p.len() != dim {
                return Err(invalid("slice path points need one entry per period"));
            }
            p.iter().try_for_each(|k| finite("slice.path", *k))?;
        }
        if !s.path_imag.is_empty() && s.path_imag.len() != s.path.len() {
            return Err(invalid("slice.path_imag must match slice.path"));
        }
        finite("slice.energy_min", s.energy_min)?;
        finite("slice.energy_max", s.energy_max)?;
        if s.energy_max <= s.energy_min || s.samples < 2 || s.samples > 100_000 {
            return Err(invalid(
                "slice needs energy_min < energy_max and 2..=100000 samples",
            ));
        }

        let c = &self.curve;
        if c.steps < 2 || c.steps > 10_000 {
            return Err(invalid("curve.steps must be in 2..=10000"));
        }
        for (name, v) in [
            ("curve.lambda_min", c.lambda_min),
            ("curve.lambda_max", c.lambda_max),
        ] {
            if let Some(x) = v {
                if !(x.is_finite() && x > 0.0) {
                    return Err(invalid(format!("{name} must be positive")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (c.lambda_min, c.lambda_max) {
            if hi <= lo {
                return Err(invalid("curve.lambda_max must exceed lambda_min"));
            }
        }
        if !(c.epsilon.is_finite() && c.epsilon > 0.0) {
            return Err(invalid("curve.epsilon must be positive"));
        }
        if !(c.tolerance.is_finite() && c.tolerance > 0.0) {
            return Err(invalid("curve.tolerance must be positive"));
        }
        if c.tail_terms > 4 {
            return Err(invalid("curve.tail_terms must be at most 4"));
        }
        let needed = 2 * (2 + c.tail_terms);
        if matches!(self.task, TaskKind::DiracCurve | TaskKind::FitC0) && c.steps < needed {
            return Err(invalid(format!(
                "curve.steps must be at least {needed} for the C0 fit"
            )));
        }

        let w = &self.weierstrass;
        if w.spin.iter().any(|&v| v > 1) {
            return Err(invalid("weierstrass.spin entries must be 0 or 1"));
        }
        if !(w.closedness_threshold.is_finite() && w.closedness_threshold > 0.0) {
            return Err(invalid("weierstrass.closedness_threshold must be positive"));
        }
        w.origin
            .iter()
            .try_for_each(|x| finite("weierstrass.origin", *x))?;
        if w.base.iter().any(|&b| b > self.grid_size()) {
            return Err(invalid("weierstrass.base lies outside the grid"));
        }
        if self.task == TaskKind::Weierstrass && self.grid_size() < 4 * self.lattice.nmax + 4 {
            return Err(invalid(format!(
                "weierstrass needs grid_size >= {}",
                4 * self.lattice.nmax + 4
            )));
        }
        if self.verify.samples == 0 || self.verify.samples > 64 {
            return Err(invalid("verify.samples must be in 1..=64"));
        }
        Ok(())
    }
}
