//! One function per task kind. Each returns its artifacts and summary; the
//! caller writes them.

use std::f64::consts::PI;

use bloch_core::dirac::{
    c0_integral, fit_c0, trace_curve, Branch, Calibration, Trace, TraceOptions,
};
use bloch_core::schrodinger::{
    bloch_variety_slice, dispersion_sweep, gauge_check, spectral_tolerance, SchrodingerSetup,
    SPECTRAL_TOLERANCE,
};
use bloch_core::torus::{FluxVector, PeriodicScalarField, TorusLattice, TWO_PI};
use bloch_core::weierstrass::{dirac_residual, integrate_immersion, shift_to_kernel, willmore};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{BranchChoice, RunConfig, TaskKind};
use crate::output::{pair, Artifact, Cell, Csv, Summary};

pub const DISPERSION_HEADER: &str = "kappa_1,kappa_2,band,energy";
pub const CURVE_HEADER: &str =
    "lambda_re,lambda_im,k1_re,k1_im,k2_re,k2_im,det_log10,mu1_re,mu1_im,mu2_re,mu2_im,branch";
pub const SLICE_HEADER: &str =
    "kappa_1_re,kappa_1_im,kappa_2_re,kappa_2_im,energy,det_log10,det_phase";
pub const ZEROS_HEADER: &str = "kappa_1_re,kappa_1_im,kappa_2_re,kappa_2_im,energy_re,energy_im";
pub const FIT_HEADER: &str =
    "nmax,branch,v_1,v_2,c0_re,c0_im,c0_integral_re,c0_integral_im,linear_ratio_re,linear_ratio_im,max_residual";
/// Willmore two-route agreement.
pub const WILLMORE_TOLERANCE: f64 = 1e-10;
/// Accepted change of a reported quantity when the truncation doubles.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-7;

#[derive(Debug)]
pub struct TaskOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: Summary,
    /// Task-specific results and every resolved default.
    pub metadata: Value,
}

pub struct Inputs<'a> {
    pub config: &'a RunConfig,
    pub lattice: TorusLattice,
    pub potential: PeriodicScalarField,
}

pub fn run_task(inputs: &Inputs<'_>) -> TaskOutput {
    let cfg = inputs.config;
    let mut summary = Summary::new(
        cfg.task.name(),
        inputs.lattice.nmax(),
        inputs.lattice.grid_size(),
    );
    let mut metadata = json!({});
    let artifacts = match cfg.task {
        TaskKind::Dispersion => dispersion(inputs, &mut summary, &mut metadata),
        TaskKind::GaugeCheck => gauge(inputs, &mut summary, &mut metadata),
        TaskKind::BlochSlice => slice(inputs, &mut summary, &mut metadata),
        TaskKind::DiracCurve => curve(inputs, &mut summary, &mut metadata),
        TaskKind::FitC0 => fit(inputs, &mut summary, &mut metadata),
        TaskKind::Weierstrass => surface(inputs, &mut summary, &mut metadata),
        TaskKind::Willmore => willmore_task(inputs, &mut summary, &mut metadata),
    };
    TaskOutput {
        artifacts,
        summary,
        metadata,
    }
}

fn flux_components(k: &FluxVector) -> [Complex64; 2] {
    let c = k.components();
    [c[0], c.get(1).copied().unwrap_or_default()]
}

fn dispersion(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    let cfg = &inputs.config.dispersion;
    let dim = inputs.lattice.dim();
    let axis: Vec<f64> = (0..cfg.samples)
        .map(|j| cfg.kappa_min + (cfg.kappa_max - cfg.kappa_min) * j as f64 / cfg.samples as f64)
        .collect();
    let grid: Vec<FluxVector> = if dim == 1 {
        axis.iter()
            .map(|&k| FluxVector::real(&[k]).expect("finite"))
            .collect()
    } else {
        axis.iter()
            .flat_map(|&a| {
                axis.iter()
                    .map(move |&b| FluxVector::real(&[a, b]).expect("finite"))
            })
            .collect()
    };
    summary
        .tolerances
        .insert("spectral".into(), SPECTRAL_TOLERANCE);
    meta["kappa_axis"] = json!({ "min": cfg.kappa_min, "max": cfg.kappa_max, "samples": cfg.samples, "closed": false });
    meta["bands"] = json!(cfg.bands);
    let setup = SchrodingerSetup::new(inputs.potential.clone());
    match dispersion_sweep(&setup, &grid, cfg.bands) {
        Ok(rows) => {
            let mut csv = Csv::new(DISPERSION_HEADER);
            for row in &rows {
                let k2 = row.flux.get(1).copied().unwrap_or(0.0);
                for (band, e) in row.energies.iter().enumerate() {
                    csv.row(&[
                        Cell::F(row.flux[0]),
                        Cell::F(k2),
                        Cell::U(band),
                        Cell::F(*e),
                    ]);
                }
            }
            vec![csv.finish("dispersion.csv")]
        }
        Err(e) => {
            summary.failures.push(format!("dispersion sweep: {e}"));
            Vec::new()
        }
    }
}

fn gauge(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    let cfg = &inputs.config.gauge;
    let dim = inputs.lattice.dim();
    let kappa = if cfg.kappa.is_empty() {
        vec![0.0; dim]
    } else {
        cfg.kappa.clone()
    };
    let flux = FluxVector::real(&kappa).expect("validated");
    let amplitude = cfg.amplitude;
    let phi = PeriodicScalarField::from_real_fn(&inputs.lattice, move |s| {
        amplitude * (TWO_PI * s[0]).sin()
    });
    let tol = spectral_tolerance(&flux);
    summary.tolerances.insert("gauge".into(), tol);
    let setup = SchrodingerSetup::new(inputs.potential.clone());
    match gauge_check(&setup, &flux, &phi) {
        Ok(dev) => {
            meta["gauge_deviation"] = json!(dev);
            meta["kappa"] = json!(kappa);
            meta["gauge_function"] = json!(format!("{amplitude} sin(2 pi s1)"));
            if !(dev <= tol) {
                summary
                    .failures
                    .push(format!("gauge deviation {dev:e} exceeds {tol:e}"));
            }
        }
        Err(e) => summary.failures.push(format!("gauge check: {e}")),
    }
    Vec::new()
}

fn slice(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    let cfg = &inputs.config.slice;
    let dim = inputs.lattice.dim();
    let path: Vec<FluxVector> = if cfg.path.is_empty() {
        vec![FluxVector::zero(dim)]
    } else {
        cfg.path
            .iter()
            .enumerate()
            .map(|(i, re)| {
                let im = cfg.path_imag.get(i);
                let comps = re
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| Complex64::new(r, im.map_or(0.0, |v| v[j])))
                    .collect();
                FluxVector::new(comps).expect("validated")
            })
            .collect()
    };
    summary.epsilon = Some(bloch_core::schrodinger::REFERENCE_SHIFT);
    summary.tolerances.insert("zero_polish".into(), 1e-13);
    meta["energy_range"] = json!([cfg.energy_min, cfg.energy_max]);
    meta["energy_samples"] = json!(cfg.samples);
    let setup = SchrodingerSetup::new(inputs.potential.clone());
    match bloch_variety_slice(&setup, &path, (cfg.energy_min, cfg.energy_max), cfg.samples) {
        Ok(columns) => {
            let mut values = Csv::new(SLICE_HEADER);
            let mut zeros = Csv::new(ZEROS_HEADER);
            for col in &columns {
                let [k1, k2] = flux_components(&col.flux);
                let lead = [
                    Cell::F(k1.re),
                    Cell::F(k1.im),
                    Cell::F(k2.re),
                    Cell::F(k2.im),
                ];
                for (e, d) in col.energies.iter().zip(&col.determinants) {
                    let mut row = lead.to_vec();
                    row.extend([Cell::F(*e), Cell::F(d.log10_magnitude()), Cell::F(d.phase)]);
                    values.row(&row);
                }
                for z in &col.zeros {
                    let mut row = lead.to_vec();
                    row.extend([Cell::F(z.re), Cell::F(z.im)]);
                    zeros.row(&row);
                }
            }
            vec![values.finish("slice.csv"), zeros.finish("zeros.csv")]
        }
        Err(e) => {
            summary.failures.push(format!("slice: {e}"));
            Vec::new()
        }
    }
}

fn branches(choice: BranchChoice) -> Vec<Branch> {
    match choice {
        BranchChoice::Plus => vec![Branch::Plus],
        BranchChoice::Minus => vec![Branch::Minus],
        BranchChoice::Both => vec![Branch::Plus, Branch::Minus],
    }
}

fn trace_options(
    inputs: &Inputs<'_>,
    potential: &PeriodicScalarField,
    branch: Branch,
) -> TraceOptions {
    let cfg = &inputs.config.curve;
    let mut opts = TraceOptions::for_potential(potential, branch);
    if let Some(lo) = cfg.lambda_min {
        opts.lambda_min = lo;
        opts.lambda_max = 4.0 * lo;
    }
    if let Some(hi) = cfg.lambda_max {
        opts.lambda_max = hi;
    }
    opts.steps = cfg.steps;
    opts.epsilon = cfg.epsilon;
    opts.tolerance = cfg.tolerance;
    opts
}

fn trace_all(
    inputs: &Inputs<'_>,
    potential: &PeriodicScalarField,
) -> Vec<(Branch, Result<Trace, String>)> {
    use rayon::prelude::*;
    branches(inputs.config.curve.branch)
        .into_par_iter()
        .map(|b| {
            let opts = trace_options(inputs, potential, b);
            (b, trace_curve(potential, &opts).map_err(|e| e.to_string()))
        })
        .collect()
}

fn curve_rows(csv: &mut Csv, trace: &Trace) {
    for p in &trace.points {
        let mu = p.multipliers.values();
        csv.row(&[
            Cell::F(p.lambda.re),
            Cell::F(p.lambda.im),
            Cell::F(p.k[0].re),
            Cell::F(p.k[0].im),
            Cell::F(p.k[1].re),
            Cell::F(p.k[1].im),
            Cell::F(p.determinant.log10_magnitude()),
            Cell::F(mu[0].re),
            Cell::F(mu[0].im),
            Cell::F(mu[1].re),
            Cell::F(mu[1].im),
            Cell::S(p.branch.tag()),
        ]);
    }
}

fn curve_tolerances(summary: &mut Summary, inputs: &Inputs<'_>) {
    summary.epsilon = Some(inputs.config.curve.epsilon);
    summary
        .tolerances
        .insert("newton".into(), inputs.config.curve.tolerance);
    summary.tolerances.insert(
        "curve_determinant".into(),
        bloch_core::dirac::CURVE_DETERMINANT_BOUND,
    );
    summary.tolerances.insert(
        "kernel_residual".into(),
        bloch_core::dirac::KERNEL_RESIDUAL_BOUND,
    );
}

fn trace_meta(trace: &Trace) -> Value {
    json!({
        "branch": trace.options.branch.tag(),
        "lambda_min": trace.options.lambda_min,
        "lambda_max": trace.options.lambda_max,
        "steps": trace.options.steps,
        "points": trace.points.len(),
        "failure": trace.failure.as_ref().map(|f| format!("{f:?}")),
    })
}

fn curve(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    curve_tolerances(summary, inputs);
    let calibration = Calibration::from_closed_form();
    let target = c0_integral(&inputs.potential);
    summary.c0_integral = Some(pair(target));
    meta["calibration"] = json!({ "factor": pair(calibration.factor), "lambda_scale": pair(calibration.lambda_scale) });
    let mut csv = Csv::new(CURVE_HEADER);
    let mut traces = Vec::new();
    let mut fits = Vec::new();
    for (branch, result) in trace_all(inputs, &inputs.potential) {
        match result {
            Ok(trace) => {
                if let Some(f) = &trace.failure {
                    summary
                        .failures
                        .push(format!("branch {} truncated: {f:?}", branch.tag()));
                }
                curve_rows(&mut csv, &trace);
                match fit_c0(
                    &inputs.lattice,
                    &trace.points,
                    [1, 0],
                    inputs.config.curve.tail_terms,
                    &calibration,
                ) {
                    Ok(fit) => {
                        if summary.c0_fitted.is_none() {
                            summary.c0_fitted = Some(pair(fit.c0));
                        }
                        fits.push(json!({ "branch": branch.tag(), "c0": pair(fit.c0), "max_residual": fit.fit.max_residual }));
                    }
                    Err(e) => summary
                        .failures
                        .push(format!("branch {} fit: {e}", branch.tag())),
                }
                traces.push(trace_meta(&trace));
            }
            Err(e) => summary
                .failures
                .push(format!("branch {} trace: {e}", branch.tag())),
        }
    }
    meta["traces"] = json!(traces);
    meta["fits"] = json!(fits);
    vec![csv.finish("curve.csv")]
}

fn fit(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    curve_tolerances(summary, inputs);
    summary
        .tolerances
        .insert("nmax_halving".into(), CONVERGENCE_TOLERANCE);
    let calibration = Calibration::from_closed_form();
    let nmax = inputs.lattice.nmax();
    let levels: Vec<usize> = if nmax >= 2 {
        vec![nmax / 2, nmax]
    } else {
        vec![nmax]
    };
    let mut csv = Csv::new(FIT_HEADER);
    let vectors = [[1i64, 0], [0, 1], [1, 1]];
    let mut by_level: Vec<Vec<Option<Complex64>>> = Vec::new();
    for &level in &levels {
        let lattice = inputs
            .lattice
            .with_nmax(level)
            .expect("coarser truncation fits the grid");
        let potential = match inputs.potential.resampled(&lattice) {
            Ok(u) => u,
            Err(_) => inputs.potential.clone(),
        };
        let target = c0_integral(&potential);
        let mut row_values = Vec::new();
        for (branch, result) in trace_all(inputs, &potential) {
            let trace = match result {
                Ok(t) => t,
                Err(e) => {
                    summary
                        .failures
                        .push(format!("nmax {level} branch {} trace: {e}", branch.tag()));
                    row_values.extend(vectors.iter().map(|_| None));
                    continue;
                }
            };
            if let Some(f) = &trace.failure {
                summary.failures.push(format!(
                    "nmax {level} branch {} truncated: {f:?}",
                    branch.tag()
                ));
            }
            for v in vectors {
                match fit_c0(
                    &lattice,
                    &trace.points,
                    v,
                    inputs.config.curve.tail_terms,
                    &calibration,
                ) {
                    Ok(f) => {
                        csv.row(&[
                            Cell::U(level),
                            Cell::S(branch.tag()),
                            Cell::I(v[0]),
                            Cell::I(v[1]),
                            Cell::F(f.c0.re),
                            Cell::F(f.c0.im),
                            Cell::F(target.re),
                            Cell::F(target.im),
                            Cell::F(f.linear_ratio.re),
                            Cell::F(f.linear_ratio.im),
                            Cell::F(f.fit.max_residual),
                        ]);
                        if level == nmax && summary.c0_fitted.is_none() {
                            summary.c0_fitted = Some(pair(f.c0));
                            summary.c0_integral = Some(pair(target));
                        }
                        row_values.push(Some(f.c0));
                    }
                    Err(e) => {
                        summary
                            .failures
                            .push(format!("nmax {level} branch {} v {v:?}: {e}", branch.tag()));
                        row_values.push(None);
                    }
                }
            }
        }
        by_level.push(row_values);
    }
    if by_level.len() == 2 {
        let change = by_level[0]
            .iter()
            .zip(&by_level[1])
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).norm()))
            .fold(0.0, f64::max);
        meta["nmax_halving_change"] = json!(change);
    }
    meta["calibration"] = json!({ "factor": pair(calibration.factor), "lambda_scale": pair(calibration.lambda_scale) });
    meta["levels"] = json!(levels);
    vec![csv.finish("fits.csv")]
}

fn surface(inputs: &Inputs<'_>, summary: &mut Summary, meta: &mut Value) -> Vec<Artifact> {
    let cfg = &inputs.config.weierstrass;
    let kappa = [PI * cfg.spin[0] as f64, PI * cfg.spin[1] as f64];
    summary
        .tolerances
        .insert("closedness".into(), cfg.closedness_threshold);
    summary
        .tolerances
        .insert("willmore_relative".into(), WILLMORE_TOLERANCE);
    let (shifted, lambda, spinor) = match shift_to_kernel(&inputs.potential, kappa) {
        Ok(v) => v,
        Err(e) => {
            summary.failures.push(format!("kernel: {e}"));
            return Vec::new();
        }
    };
    meta["potential_shift"] = json!(-lambda);
    meta["spin"] = json!(cfg.spin);
    if let Ok(r) = dirac_residual(&shifted, &spinor) {
        meta["dirac_residual"] = json!(r);
    }
    let base = (cfg.base[0], cfg.base[1]);
    let mesh = match integrate_immersion(
        &spinor,
        &shifted,
        base,
        cfg.origin,
        cfg.closedness_threshold,
    ) {
        Ok(m) => m,
        Err(e) => {
            summary.failures.push(format!("integration: {e}"));
            return Vec::new();
        }
    };
    summary.periods = Some(mesh.periods);
    let w = willmore(&shifted, Some(&mesh)).expect("real potential");
    summary.willmore_direct = Some(w.direct);
    summary.willmore_geometric = w.geometric;
    if let Some(gap) = w.relative_gap() {
        if gap > WILLMORE_TOLERANCE {
            summary
                .failures
                .push(format!("willmore routes differ by {gap:e}"));
        }
    }
    let multipliers: Vec<[f64; 2]> = mesh.multipliers.values().iter().map(|z| pair(*z)).collect();
    let sidecar = json!({
        "grid_size": mesh.grid_size,
        "vertices": mesh.vertices.len(),
        "periods": mesh.periods,
        "period_spread": mesh.period_spread,
        "path_defect": mesh.path_defect,
        "closedness": mesh.closedness,
        "degenerate_cells": mesh.degenerate_cells(),
        "willmore_direct": w.direct,
        "willmore_geometric": w.geometric,
        "multipliers": multipliers,
        "potential_shift": -lambda,
    });
    meta["mesh"] = sidecar.clone();
    vec![
        Artifact::text("mesh.obj", mesh.to_obj()),
        Artifact::json("mesh.json", &sidecar),
    ]
}

fn willmore_task(inputs: &Inputs<'_>, summary: &mut Summary, _meta: &mut Value) -> Vec<Artifact> {
    match willmore(&inputs.potential, None) {
        Ok(w) => summary.willmore_direct = Some(w.direct),
        Err(e) => summary.failures.push(format!("willmore: {e}")),
    }
    Vec::new()
}
