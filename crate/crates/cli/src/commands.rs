use std::path::Path;

use log::info;
use murel::measure::io::load_measure;
use murel::metrics::probes::{axis_range, axis_step};
use murel::metrics::{
    delta_alpha_smeared_closed_form, error_bar_decomposition, global_noise_error, observable_distance,
    resolution_width, DivergenceScan, ProbeConfig, ResolutionSweep,
};
use murel::observables::schema::{ObservableSpec, StateSource};
use murel::observables::{Axis, CovariantSource, ObservableModel};
use murel::state::io::save_wave_function;
use murel::state::{make_momentum_point, make_point, test_ensemble, Grid, MixedState};
use murel::transport::{optimal_coupling_lp, wasserstein, wasserstein_inf};
use murel::verify::{
    c_alpha_beta_with, default_ground_grid, demonstrate_sharp_marginal_divergence, run_suite, verify_connections,
    verify_covariant_error_ur, verify_covariant_metric_ur, verify_noise_ur, verify_overall_width_ur,
    verify_preparation_ur, verify_pushforward_joint_ur, write_reports_csv, DivergenceDemo, SuiteOptions,
    VerificationReport,
};
use murel::{Error, GlobalConfig, PointMap, Result};
use serde_json::json;

use crate::output::Output;
use crate::{AxisArg, Common, DemoKind, MetricKind, Relation};

fn config(c: &Common) -> Result<GlobalConfig> {
    GlobalConfig::new(c.hbar, c.cutoff, c.seed)
}

fn working_grid(c: &Common) -> Result<Grid> {
    match c.grid {
        Some((x0, dx, n)) => Grid::new(x0, dx, n, c.hbar),
        None => Grid::symmetric(32.0, 2048, c.hbar),
    }
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
/// Returns the text and the directory that resolves relative paths.
fn json_arg(arg: &str) -> Result<(String, std::path::PathBuf)> {
    if arg.trim_start().starts_with('{') {
        return Ok((arg.to_string(), std::env::current_dir()?));
    }
    let path = Path::new(arg);
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((std::fs::read_to_string(path)?, base))
}

fn build_state(arg: &str, grid: &Grid) -> Result<MixedState> {
    let (text, base) = json_arg(arg)?;
    let source: StateSource =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("state description: {e}")))?;
    source.build(&base, grid)
}

fn build_observable(arg: &str, grid: &Grid) -> Result<ObservableModel> {
    let (text, base) = json_arg(arg)?;
    ObservableSpec::from_json(&text)?.build(&base, grid)
}

pub fn measure(c: &Common, file: &Path) -> Result<Output> {
    let m = load_measure(file)?;
    let alpha = c.alpha.unwrap_or(1.0);
    let (center, deviation) = m.alpha_center(alpha)?;
    let interval = m.shortest_interval(c.eps)?;
    Output::scalars(json!({
        "atoms": m.len(),
        "mean": m.mean(),
        "std_deviation": m.std_deviation(),
        "alpha": alpha,
        "alpha_deviation": deviation,
        "alpha_center": center,
        "eps": c.eps,
        "overall_width": interval.width,
        "shortest_interval_lo": interval.lo(),
        "shortest_interval_hi": interval.hi(),
    }))
}

pub fn wasserstein_cmd(c: &Common, a: &Path, b: &Path, exact: bool) -> Result<Output> {
    let (ma, mb) = (load_measure(a)?, load_measure(b)?);
    let alpha = c.alpha.unwrap_or(1.0);
    let distance = if alpha == f64::INFINITY { wasserstein_inf(&ma, &mb) } else { wasserstein(&ma, &mb, alpha)? };
    let mut report =
        json!({ "alpha": if alpha.is_finite() { json!(alpha) } else { json!("inf") }, "distance": distance });
    if exact {
        if !alpha.is_finite() {
            return Err(Error::domain("the transportation LP needs a finite alpha"));
        }
        let (coupling, cost) = optimal_coupling_lp(&ma, &mb, alpha)?;
        report["lp_cost"] = json!(cost);
        report["lp_distance"] = json!(cost.powf(1.0 / alpha));
        let entries: Vec<_> = (0..coupling.rows())
            .flat_map(|i| (0..coupling.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| coupling.get(i, j) > 0.0)
            .map(|(i, j)| json!([coupling.row_atoms[i], coupling.col_atoms[j], coupling.get(i, j)]))
            .collect();
        report["coupling"] = json!(entries);
    }
    Output::scalars(report)
}

pub fn state(c: &Common, arg: &str, save_wave: Option<&Path>) -> Result<Output> {
    let grid = working_grid(c)?;
    let s = build_state(arg, &grid)?;
    if let Some(path) = save_wave {
        if !s.is_pure() {
            return Err(Error::domain("only pure states can be saved as a wave function"));
        }
        save_wave_function(&s.components()[0].1, path)?;
    }
    let (q, p) = (s.position_distribution(), s.momentum_distribution());
    let alpha = c.alpha.unwrap_or(2.0);
    let beta = c.beta.unwrap_or(alpha);
    let summary = json!({
        "components": s.components().len(),
        "position_mean": q.mean(), "position_std": q.std_deviation(),
        "momentum_mean": p.mean(), "momentum_std": p.std_deviation(),
        "alpha": alpha, "beta": beta,
        "position_alpha_deviation": q.alpha_deviation(alpha)?,
        "momentum_beta_deviation": p.alpha_deviation(beta)?,
        "eps": c.eps,
        "position_overall_width": q.overall_width(c.eps)?,
        "momentum_overall_width": p.overall_width(c.eps)?,
    });
    let mut rows = Vec::with_capacity(q.len() + p.len());
    for (axis, m) in [("position", &q), ("momentum", &p)] {
        rows.extend(m.iter().map(|(x, w)| vec![axis.to_string(), x.to_string(), w.to_string()]));
    }
    let json = json!({
        "grid": grid,
        "summary": summary,
        "position": { "x": q.atoms(), "w": q.weights() },
        "momentum": { "p": p.atoms(), "w": p.weights() },
    });
    Output::new(json, &["axis", "x", "w"], rows)
}

pub fn groundstate(c: &Common, tol: f64, points: usize) -> Result<Output> {
    let grid = match c.grid {
        Some((x0, dx, n)) => Grid::new(x0, dx, n, 1.0)?,
        None => default_ground_grid(points)?,
    };
    let alpha = c.alpha.unwrap_or(2.0);
    let beta = c.beta.unwrap_or(alpha);
    let opts = murel::state::GroundStateOptions { tol, ..Default::default() };
    let (report, _) = c_alpha_beta_with(alpha, beta, &grid, &opts)?;
    info!("ground state ({alpha}, {beta}): g = {}, residual {}", report.g, report.residual);
    Output::scalars(report)
}

fn resolve_axis(obs: &ObservableModel, axis: Option<AxisArg>) -> Axis {
    match axis {
        Some(AxisArg::Position) => Axis::Position,
        Some(AxisArg::Momentum) => Axis::Momentum,
        None => obs.axis().unwrap_or(Axis::Position),
    }
}

fn probe_ensemble(grid: &Grid, seed: u64, size: usize) -> Result<Vec<MixedState>> {
    let mut ensemble = test_ensemble(grid, seed, size)?;
    for f in [-0.25, 0.0, 0.25] {
        ensemble.push(make_point(grid, f * grid.extent())?.into());
        ensemble.push(make_momentum_point(grid, f * 2.0 * grid.p_max())?.into());
    }
    Ok(ensemble)
}

pub fn metric(
    c: &Common,
    kind: MetricKind,
    arg: &str,
    axis: Option<AxisArg>,
    size: usize,
    trace: bool,
) -> Result<Output> {
    let cfg = config(c)?;
    let grid = working_grid(c)?;
    let obs = build_observable(arg, &grid)?;
    let axis = resolve_axis(&obs, axis);
    let sharp = ObservableModel::sharp(axis);
    let cutoff = cfg.cutoff_for(axis_range(&grid, axis));
    let mut report = json!({ "kind": format!("{kind:?}"), "observable": obs.name(), "axis": axis, "grid": grid });
    match kind {
        MetricKind::Distance => {
            let alpha = c.alpha.unwrap_or(1.0);
            let mut scan = DivergenceScan::toward_edge(&grid, axis);
            scan.w_cutoff = cutoff;
            let ensemble = probe_ensemble(&grid, cfg.rng_seed, size)?;
            let est = observable_distance(&obs, &sharp, alpha, &ensemble, Some(&scan))?;
            report["alpha"] = json!(alpha);
            report["estimate"] = json!(est);
            if let Some(noise) = obs.smearing() {
                report["closed_form"] = json!(delta_alpha_smeared_closed_form(noise, alpha)?);
            }
        }
        MetricKind::ErrorBar => {
            let delta = c.delta.unwrap_or(2.0 * axis_step(&grid, axis));
            let mut pc = ProbeConfig::new(&grid, axis, c.eps, delta).with_seed(cfg.rng_seed);
            pc.w_cutoff = cutoff;
            pc.trace = trace;
            report["eps"] = json!(c.eps);
            report["delta"] = json!(delta);
            report["estimate"] = json!(error_bar_decomposition(&obs, &sharp, &pc, &grid)?);
        }
        MetricKind::Resolution => {
            let pc = ProbeConfig::new(&grid, axis, c.eps, 2.0 * axis_step(&grid, axis));
            let mut sweep = ResolutionSweep::new(&grid, axis, pc.x_samples, 0.05 * axis_range(&grid, axis));
            sweep.w_cutoff = cutoff;
            report["eps"] = json!(c.eps);
            report["estimate"] = json!(resolution_width(&obs, c.eps, &sweep, &grid)?);
        }
        MetricKind::Noise => {
            let ensemble = probe_ensemble(&grid, cfg.rng_seed, size)?;
            report["estimate"] = json!(global_noise_error(&sharp, &obs, &ensemble)?);
        }
    }
    Output::scalars(report)
}

fn vacuum_or(tau: Option<&str>, grid: &Grid) -> Result<std::sync::Arc<CovariantSource>> {
    let state = match tau {
        Some(arg) => build_state(arg, grid)?,
        None => murel::state::make_gaussian(grid, 0.0, 0.0, 1.0)?.into(),
    };
    CovariantSource::new(state)
}

fn reports_output(reports: Vec<VerificationReport>) -> Result<Output> {
    let mut csv = Vec::new();
    write_reports_csv(&mut csv, &reports)?;
    let text = String::from_utf8(csv).map_err(|e| Error::Internal(e.to_string()))?;
    let mut lines = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = lines.headers()?.iter().map(str::to_string).collect();
    let rows = lines
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Output::new(reports, &header, rows)
}

pub fn verify(
    c: &Common,
    suite: bool,
    relation: Option<Relation>,
    state: Option<&str>,
    tau: Option<&str>,
) -> Result<Output> {
    let cfg = config(c)?;
    if suite {
        let reports = run_suite(&SuiteOptions::new(cfg.rng_seed, cfg.hbar))?;
        let failures = reports.iter().filter(|r| !r.pass).count();
        info!("suite: {} reports, {failures} not passing", reports.len());
        return reports_output(reports);
    }
    let relation = relation.ok_or_else(|| Error::domain("verify needs --suite all or --relation"))?;
    let grid = working_grid(c)?;
    let eps1 = c.eps;
    let eps2 = c.eps2.unwrap_or(eps1);
    let alpha = c.alpha.unwrap_or(2.0);
    let beta = c.beta.unwrap_or(alpha);
    let constant = |a: f64, b: f64| -> Result<f64> {
        let opts = murel::state::GroundStateOptions::default();
        Ok(c_alpha_beta_with(a, b, &default_ground_grid(2048)?, &opts)?.0.c)
    };
    let reports = match relation {
        Relation::Preparation => {
            let s = build_state(state.ok_or_else(|| Error::domain("--state is required"))?, &grid)?;
            vec![verify_preparation_ur(&s, alpha, beta, constant(alpha, beta)?)?]
        }
        Relation::OverallWidth => {
            let s = build_state(state.ok_or_else(|| Error::domain("--state is required"))?, &grid)?;
            vec![verify_overall_width_ur(&s, eps1, eps2)?]
        }
        Relation::Covariant => verify_covariant_error_ur(&vacuum_or(tau, &grid)?, eps1, eps2)?.to_vec(),
        Relation::Metric => {
            vec![verify_covariant_metric_ur(&vacuum_or(tau, &grid)?, alpha, beta, constant(alpha, beta)?)?]
        }
        Relation::Noise => vec![verify_noise_ur(&vacuum_or(tau, &grid)?)?],
        Relation::Connections => {
            let instances = murel::verify::random_instances(&grid, cfg.rng_seed, 5);
            verify_connections(&instances, &grid)?
        }
        Relation::Pushforward => {
            let maps = [
                PointMap::ShiftCos { amplitude: 0.5, frequency: 1.0 },
                PointMap::ShiftCos { amplitude: 0.25, frequency: 2.0 },
            ];
            vec![verify_pushforward_joint_ur(&vacuum_or(tau, &grid)?, maps, eps1, eps2)?]
        }
    };
    let reports = reports.into_iter().map(|r| r.with_seed(cfg.rng_seed)).collect();
    reports_output(reports)
}

pub fn demo(c: &Common, kind: DemoKind) -> Result<Output> {
    match kind {
        DemoKind::SharpMarginal => {
            let mut demo = DivergenceDemo::new(c.hbar)?;
            if let Some(eps2) = c.eps2 {
                demo.eps2 = eps2;
            }
            let trace = demonstrate_sharp_marginal_divergence(&demo)?;
            let mut rows: Vec<Vec<String>> = trace
                .captures
                .iter()
                .map(|r| vec!["captured_mass".into(), r.boost.to_string(), r.window.to_string(), r.mass.to_string()])
                .collect();
            for t in &trace.tents {
                rows.push(vec!["tent_lower_bound".into(), t.n.to_string(), String::new(), t.lower_bound.to_string()]);
                rows.push(vec!["wasserstein_1".into(), t.n.to_string(), String::new(), t.wasserstein.to_string()]);
            }
            Output::new(trace, &["series", "n", "window", "value"], rows)
        }
    }
}
