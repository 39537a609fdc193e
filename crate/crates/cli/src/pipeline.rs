//! eigenframe → generators → corrections → checks, assembled into a report.

use std::path::Path;

use geompert::corrections::{
    crosscheck_linear, eigenvalue_route_deviation, hermitian_rs_corrections, relative_deviation,
    state_route_deviation,
};
use geompert::generators::hierarchy_residuals;
use geompert::oracle::{
    exact_spectrum_sweep, fd_eigenvalue_derivatives, log_samples, series_residual_order,
    DEFAULT_FD_STEP, DEFAULT_WINDOW, SLOPE_ALLOWANCE,
};
use geompert::spectral::max_abs;
use geompert::{
    eigenframe, perturbation_series, solve_generators_with_gauge, FrameOptions, Gauge,
    GeneratorSeries, PerturbationSeries, PolynomialHamiltonian,
};

use crate::document::ModelDocument;
use crate::error::{CliError, Stage};
use crate::numfmt::{pair, Num};
use crate::report::{
    sweep_csv, Check, Coefficient, FrameSummary, Measurement, Relation, Report, StateSeries,
    SweepRow,
};

pub const HIERARCHY_TOL: f64 = 1e-8;
pub const STATE_ROUTE_TOL: f64 = 1e-12;
pub const EIGENVALUE_ROUTE_TOL: f64 = 1e-11;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const FD_TOL: f64 = 1e-5;
/// Finite differences are compared up to this order.
pub const FD_MAX_ORDER: usize = 3;

/// Which groups of checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSet {
    /// Hierarchy residuals, route equivalence, and closed-form comparisons.
    pub internal: bool,
    /// Comparisons against exact diagonalization of `H(q)`.
    pub oracle: bool,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub order: usize,
    pub gauge: Gauge,
    pub frame: FrameOptions,
    pub checks: CheckSet,
    pub window: (f64, f64),
    /// Samples across `window`, log-spaced.
    pub window_points: usize,
}

impl Settings {
    pub fn new(order: usize) -> Self {
        Settings {
            order,
            gauge: Gauge::ZeroDiagonal,
            frame: FrameOptions::default(),
            checks: CheckSet {
                internal: true,
                oracle: false,
            },
            window: DEFAULT_WINDOW,
            window_points: default_window_points(DEFAULT_WINDOW),
        }
    }
}

/// 12 log-spaced samples per decade, ends included.
pub fn default_window_points(window: (f64, f64)) -> usize {
    log_samples(window.0, window.1, geompert::oracle::DEFAULT_POINTS_PER_DECADE).len()
}

/// `points` log-spaced samples spanning `window`, ends included.
pub fn window_samples(window: (f64, f64), points: usize) -> Vec<f64> {
    let (lo, hi) = window;
    let n = points.max(2);
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Everything computed for one model, before any output is written.
#[derive(Debug, Clone)]
pub struct Computation {
    pub report: Report,
    pub series: Vec<PerturbationSeries>,
}

fn solve(h: &PolynomialHamiltonian, settings: &Settings) -> Result<(GeneratorSeries, Vec<PerturbationSeries>), CliError> {
    let frame = eigenframe(h.h0(), settings.frame).map_err(CliError::at(Stage::Eigenframe))?;
    let gens = solve_generators_with_gauge(h, &frame, settings.order.max(1), &settings.gauge)
        .map_err(CliError::at(Stage::Generators))?;
    let series = (0..h.dim())
        .map(|n| perturbation_series(&gens, n, settings.order))
        .collect::<geompert::Result<Vec<_>>>()
        .map_err(CliError::at(Stage::Corrections))?;
    Ok((gens, series))
}

fn internal_checks(
    h: &PolynomialHamiltonian,
    gens: &GeneratorSeries,
    series: &[PerturbationSeries],
    order: usize,
) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let gen_scale = gens
        .k0()
        .iter()
        .chain(gens.k1())
        .map(max_abs)
        .fold(1.0, f64::max)
        * h.scale().max(1.0);
    let hierarchy = hierarchy_residuals(h, gens)
        .into_iter()
        .enumerate()
        .map(|(l, r)| Measurement::new(format!("order {l}"), r / gen_scale, Relation::AtMost, HIERARCHY_TOL))
        .collect();
    checks.push(Check::new("hierarchy_residual", hierarchy));

    let mut routes = Vec::new();
    for n in 0..h.dim() {
        let s = state_route_deviation(gens, n, order).map_err(CliError::at(Stage::Corrections))?;
        let e = eigenvalue_route_deviation(gens, n, order).map_err(CliError::at(Stage::Corrections))?;
        routes.push(Measurement::new(format!("state {n} vectors"), s, Relation::AtMost, STATE_ROUTE_TOL));
        routes.push(Measurement::new(format!("state {n} eigenvalues"), e, Relation::AtMost, EIGENVALUE_ROUTE_TOL));
    }
    checks.push(Check::new("route_equivalence", routes));

    if h.degree() == 1 {
        let report = crosscheck_linear(h, gens.frame().options()).map_err(CliError::at(Stage::Corrections))?;
        let m = report
            .states
            .iter()
            .map(|s| Measurement::new(format!("state {}", s.state), s.max_deviation, Relation::AtMost, report.tolerance))
            .collect();
        checks.push(Check::new("linear_crosscheck", m));
    }

    if h.is_hermitian(1e-12 * h.scale().max(1.0)) {
        let mut m = Vec::new();
        for s in series {
            let worst = s.eigenvalue_corrections[1..]
                .iter()
                .map(|v| v.im.abs() / v.norm().max(1.0))
                .fold(0.0, f64::max);
            m.push(Measurement::new(format!("state {} imaginary part", s.state), worst, Relation::AtMost, HERMITIAN_TOL));
        }
        if h.degree() == 1 && order >= 1 {
            let textbook = hermitian_rs_corrections(h.h0(), &h.terms()[1]).map_err(CliError::at(Stage::Corrections))?;
            for (s, tb) in series.iter().zip(&textbook) {
                let worst = (1..=order.min(3))
                    .map(|k| relative_deviation(s.eigenvalue_corrections[k], tb[k - 1], 1.0))
                    .fold(0.0, f64::max);
                m.push(Measurement::new(format!("state {} textbook", s.state), worst, Relation::AtMost, HERMITIAN_TOL));
            }
        }
        checks.push(Check::new("hermitian_reduction", m));
    }
    Ok(checks)
}

fn oracle_checks(
    h: &PolynomialHamiltonian,
    series: &[PerturbationSeries],
    settings: &Settings,
) -> Result<Vec<Check>, CliError> {
    let mut qs = vec![0.0];
    qs.extend(window_samples(settings.window, settings.window_points));
    let curve = exact_spectrum_sweep(h, &qs, settings.frame).map_err(CliError::at(Stage::Oracle))?;

    let mut slopes = Vec::new();
    for s in series {
        for k in 1..=settings.order {
            let label = format!("state {} order {k}", s.state);
            let threshold = k as f64 + SLOPE_ALLOWANCE;
            match series_residual_order(&curve, s, s.state, k, settings.window) {
                Ok(slope) => slopes.push(Measurement::new(label, slope, Relation::AtLeast, threshold)),
                // too few samples above the floor: the truncated series matches
                // the exact curve to rounding over the window
                Err(geompert::Error::ResidualUnderflow { floor }) => slopes.push(Measurement::unmeasured(
                    label,
                    Relation::AtLeast,
                    threshold,
                    true,
                    format!("residual below {floor:e} across the window"),
                )),
                Err(e) => return Err(CliError::at(Stage::Oracle)(e)),
            }
        }
    }

    let mut fd = Vec::new();
    for s in series {
        for k in 1..=settings.order.min(FD_MAX_ORDER) {
            let est = fd_eigenvalue_derivatives(h, s.state, k, DEFAULT_FD_STEP, settings.frame)
                .map_err(CliError::at(Stage::Oracle))?;
            let c = s.eigenvalue_corrections[k];
            let dev = (est - c).norm() / c.norm().max(1.0);
            fd.push(Measurement::new(format!("state {} order {k}", s.state), dev, Relation::AtMost, FD_TOL));
        }
    }
    Ok(vec![
        Check::new("residual_order", slopes),
        Check::new("finite_difference", fd),
    ])
}

fn assemble(doc: &ModelDocument, settings: &Settings, gens: &GeneratorSeries, series: &[PerturbationSeries], checks: Vec<Check>) -> Report {
    let frame = gens.frame();
    Report {
        model: doc.name.clone(),
        order: settings.order,
        gauge: settings.gauge.tag().to_string(),
        frame: FrameSummary {
            dim: frame.dim(),
            eigenvalues: frame.eigenvalues().iter().map(|z| pair(*z)).collect(),
            min_gap: Num(frame.min_gap()),
        },
        series: series
            .iter()
            .map(|s| StateSeries {
                state: s.state,
                eigenvalue_corrections: s
                    .eigenvalue_corrections
                    .iter()
                    .enumerate()
                    .map(|(k, z)| Coefficient { k, re: Num(z.re), im: Num(z.im) })
                    .collect(),
            })
            .collect(),
        verdict: Report::verdict_of(&checks),
        verification: checks,
    }
}

/// Runs the full pipeline with the checks enabled in `settings`.
pub fn run_pipeline(doc: &ModelDocument, settings: &Settings) -> Result<Computation, CliError> {
    let h = doc.hamiltonian()?;
    let (gens, series) = solve(&h, settings)?;
    let mut checks = Vec::new();
    if settings.checks.internal {
        checks.extend(internal_checks(&h, &gens, &series, settings.order)?);
    }
    if settings.checks.oracle {
        checks.extend(oracle_checks(&h, &series, settings)?);
    }
    let report = assemble(doc, settings, &gens, &series, checks);
    Ok(Computation { report, series })
}

/// Exact spectrum on `points` evenly spaced `q ∈ [0, q_max]`, with the
/// distance of each eigenvalue from its order-`K` series.
pub fn run_sweep(doc: &ModelDocument, settings: &Settings, q_max: f64, points: usize) -> Result<(Computation, String), CliError> {
    let computation = run_pipeline(doc, settings)?;
    let h = doc.hamiltonian()?;
    let qs: Vec<f64> = (0..points)
        .map(|i| q_max * i as f64 / (points - 1) as f64)
        .collect();
    let curve = exact_spectrum_sweep(&h, &qs, settings.frame).map_err(CliError::at(Stage::Oracle))?;
    let mut rows = Vec::with_capacity(qs.len() * h.dim());
    for (i, &q) in qs.iter().enumerate() {
        for s in &computation.series {
            let z = curve.values(s.state)[i];
            rows.push(SweepRow {
                q,
                n: s.state,
                re: z.re,
                im: z.im,
                residual: (z - s.eigenvalue_at(q)).norm(),
            });
        }
    }
    Ok((computation, sweep_csv(&rows)))
}

/// Writes every file, or none if the directory cannot be prepared. Each
/// file goes to a temporary name first and is renamed into place.
pub fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        std::fs::write(&tmp, contents).map_err(|source| CliError::Write {
            path: tmp.clone(),
            source,
        })?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, fin) in staged {
        std::fs::rename(&tmp, &fin).map_err(|source| CliError::Write { path: fin, source })?;
    }
    Ok(())
}

/// Frame options with the degeneracy threshold taken from
/// `GEOMPERT_GAP_TOL` when set.
pub fn frame_options_from_env(value: Option<&str>) -> Result<FrameOptions, CliError> {
    let options = FrameOptions::default();
    match value {
        None => Ok(options),
        Some(text) => match text.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(options.with_gap_tol(t)),
            _ => Err(CliError::GapTolerance {
                value: text.to_string(),
            }),
        },
    }
}
