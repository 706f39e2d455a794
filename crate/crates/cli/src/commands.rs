//! One function per command, each turning a [`RunConfig`] into a [`Report`].

use fisher_dirichlet::curvature::principal_curvatures;
use fisher_dirichlet::curvature::{conjecture_report, gaussian_2d, Grid, LOWER_BOUND, LOWER_BOUND_SLACK};
use fisher_dirichlet::embedding::{unit_normal, Embedding};
use fisher_dirichlet::frechet::{frechet_mean, frechet_objective, MeanOptions};
use fisher_dirichlet::geodesics::{
    diagonal_geodesic, diagonal_q, geodesic_ivp, log_map_with, GeodesicPath, ShootingOptions,
};
use fisher_dirichlet::geometry::{beta_pdf, christoffel, energy, metric, metric_inverse, min_eigenvalue};
use fisher_dirichlet::specfun::log_grid;
use fisher_dirichlet::{Family, Point, Tangent};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig, Scale, Span};
use crate::report::{Cell, Report, Table};
use crate::svg::{self, Axes, ColorMap, Curve};
use crate::{figures, validate, CliError};

pub const DEFAULT_SAMPLES: usize = 101;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_RANGE: Span = Span { lo: 1e-3, hi: 1e3 };
pub const DEFAULT_RES: usize = 200;
/// Interior abscissae of the density plots.
const DENSITY_SAMPLES: usize = 199;

pub fn run(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Metric => metric_cmd(cfg),
        Command::Geodesic => geodesic_cmd(cfg),
        Command::Connect => connect_cmd(cfg),
        Command::Distance => distance_cmd(cfg),
        Command::Mean => mean_cmd(cfg),
        Command::CurvatureGrid => curvature_grid_cmd(cfg),
        Command::Embed => embed_cmd(cfg),
        Command::Diagonal => diagonal_cmd(cfg),
        Command::Validate => validate::run(cfg),
        Command::Figures => figures::run(cfg),
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

/// A point from user input, checked against `--dimension`.
pub fn point(cfg: &RunConfig, coords: &[f64], flag: &str) -> Result<Point, CliError> {
    if let Some(n) = cfg.dimension {
        if n != coords.len() {
            return Err(usage(format!(
                "--{flag} has {} coordinates but --dimension is {n}",
                coords.len()
            )));
        }
    }
    Point::new(coords.to_vec()).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn point_or_ones(cfg: &RunConfig) -> Result<Point, CliError> {
    match &cfg.point {
        Some(c) => point(cfg, c, "point"),
        None => point(cfg, &vec![1.0; cfg.dimension.unwrap_or(2)], "dimension"),
    }
}

fn samples(cfg: &RunConfig) -> Result<usize, CliError> {
    match cfg.samples.unwrap_or(DEFAULT_SAMPLES) {
        n if n >= 2 => Ok(n),
        n => Err(usage(format!("--samples must be at least 2, got {n}"))),
    }
}

fn tolerance(cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.tol.unwrap_or(DEFAULT_TOL) {
        t if t > 0.0 && t.is_finite() => Ok(t),
        t => Err(usage(format!("--tol must be positive, got {t}"))),
    }
}

/// Grid abscissae over `range` with `res` points.
pub fn axis(range: Span, res: usize, scale: Scale) -> Result<Vec<f64>, CliError> {
    if !(range.lo > 0.0 && range.lo < range.hi && range.hi.is_finite()) {
        return Err(usage(format!("--range must satisfy 0 < lo < hi, got {range}")));
    }
    if res < 2 {
        return Err(usage(format!("--res must be at least 2, got {res}")));
    }
    Ok(match scale {
        Scale::Log => log_grid(range.lo, range.hi, res),
        Scale::Linear => (0..res)
            .map(|i| range.lo + (range.hi - range.lo) * i as f64 / (res - 1) as f64)
            .collect(),
    })
}

/// [`Grid::tabulate`] with rows evaluated in parallel, in index order.
pub fn tabulate_parallel(
    xs: &[f64],
    ys: &[f64],
    f: impl Fn(f64, f64) -> fisher_dirichlet::Result<f64> + Sync,
) -> Result<Grid, CliError> {
    let values = xs
        .par_iter()
        .map(|&x| {
            ys.iter()
                .map(|&y| f(x, y))
                .collect::<fisher_dirichlet::Result<Vec<f64>>>()
        })
        .collect::<fisher_dirichlet::Result<Vec<_>>>()?;
    Ok(Grid {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        values,
    })
}

/// Long-format table `x, y, <value>` of a grid.
pub fn grid_table(name: &str, value: &str, grid: &Grid) -> Table {
    let mut t = Table::new(name, ["x", "y", value]);
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t.push(vec![grid.xs[i].into(), grid.ys[j].into(), v.into()]);
        }
    }
    t
}

fn coordinate_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// `t, x1…xn, v1…vn, energy` along a path.
pub fn path_table(name: &str, mf: &Family, path: &GeodesicPath) -> Table {
    let n = path.start().dim();
    let mut cols = vec!["t".to_string()];
    cols.extend(coordinate_names("x", n));
    cols.extend(coordinate_names("v", n));
    cols.push("energy".into());
    let mut t = Table::new(name, cols);
    for ((time, p), v) in path.times.iter().zip(&path.points).zip(&path.velocities) {
        let mut row: Vec<Cell> = vec![(*time).into()];
        row.extend(p.coords().iter().map(|&c| Cell::from(c)));
        row.extend(v.components().iter().map(|&c| Cell::from(c)));
        row.push(energy(mf, p.coords(), v.components()).into());
        t.push(row);
    }
    t
}

/// Coordinates against time, one curve each.
pub fn path_figure(title: &str, path: &GeodesicPath) -> Result<String, CliError> {
    let n = path.start().dim();
    let curves: Vec<Curve> = (0..n)
        .map(|i| {
            let pts = path
                .times
                .iter()
                .zip(&path.points)
                .map(|(&t, p)| (t, p.coords()[i]))
                .collect();
            Curve::new(&format!("x{}", i + 1), pts, i)
        })
        .collect();
    Ok(svg::line_plot(&Axes::new(title, "t", "coordinate"), &curves)?)
}

/// Interior abscissae `(k + 1)/(m + 1)` of the density plots.
pub fn density_abscissae() -> Vec<f64> {
    (1..=DENSITY_SAMPLES)
        .map(|k| k as f64 / (DENSITY_SAMPLES + 1) as f64)
        .collect()
}

/// Beta densities of two-dimensional points, one column each.
pub fn density_table(name: &str, labelled: &[(String, Point)]) -> Result<Table, CliError> {
    let mut cols = vec!["s".to_string()];
    cols.extend(labelled.iter().map(|(l, _)| l.clone()));
    let mut t = Table::new(name, cols);
    for s in density_abscissae() {
        let mut row = vec![Cell::from(s)];
        for (_, p) in labelled {
            row.push(beta_pdf(p, s)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

/// The columns after the first of a density table as curves.
pub fn density_curves(table: &Table) -> Vec<Vec<(f64, f64)>> {
    let value = |c: &Cell| match c {
        Cell::Float(v) => *v,
        _ => f64::NAN,
    };
    (1..table.columns.len())
        .map(|k| table.rows.iter().map(|r| (value(&r[0]), value(&r[k]))).collect())
        .collect()
}

fn metric_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let p = point_or_ones(cfg)?;
    let n = p.dim();
    let (g, inv) = (metric(&mf, &p), metric_inverse(&mf, &p));
    let gamma = christoffel(&mf, &p);
    let mut t = Table::new("metric", ["i", "j", "metric", "inverse"]);
    for i in 0..n {
        for j in 0..n {
            t.push(vec![i.into(), j.into(), g.get(i, j).into(), inv.get(i, j).into()]);
        }
    }
    let mut c = Table::new("christoffel", ["k", "i", "j", "gamma"]);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                c.push(vec![k.into(), i.into(), j.into(), gamma.get(k, i, j).into()]);
            }
        }
    }
    let mut r = Report::new(
        "metric",
        json!({
            "family": mf.to_string(),
            "point": p.coords(),
            "metric": g.matrix().rows(),
            "inverse": inv.matrix().rows(),
            "min-eigenvalue": min_eigenvalue(&mf, &p),
        }),
    );
    r.tables = vec![t, c];
    Ok(r)
}

fn geodesic_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let p = point(cfg, &require(&cfg.point, "point")?, "point")?;
    let v = require(&cfg.velocity, "velocity")?;
    let v = Tangent::new(p.clone(), v).map_err(|e| usage(format!("--velocity: {e}")))?;
    let t_end = cfg.time.unwrap_or(1.0);
    let path = geodesic_ivp(&mf, &p, &v, t_end, samples(cfg)?)?;
    let mut r = Report::new(
        "geodesic",
        json!({
            "family": mf.to_string(),
            "start": p.coords(),
            "velocity": v.components(),
            "time": t_end,
            "end": path.end().coords(),
            "energy": path.energy,
            "energy-drift": path.energy_drift(&mf),
            "min-coordinate": path.min_coordinate(),
        }),
    );
    r.figures
        .push(("geodesic".into(), path_figure("geodesic coordinates", &path)?));
    r.tables.push(path_table("geodesic", &mf, &path));
    Ok(r)
}

/// Shooting options from the config.
fn shooting(cfg: &RunConfig) -> Result<ShootingOptions, CliError> {
    let mut opts = ShootingOptions {
        tol: tolerance(cfg)?,
        ..ShootingOptions::default()
    };
    if let Some(m) = cfg.max_iterations {
        opts.max_iterations = m;
    }
    Ok(opts)
}

fn endpoints(cfg: &RunConfig) -> Result<(Point, Point), CliError> {
    let p = point(cfg, &require(&cfg.from, "from")?, "from")?;
    let q = point(cfg, &require(&cfg.to, "to")?, "to")?;
    if p.dim() != q.dim() {
        return Err(usage("--from and --to have different dimensions"));
    }
    Ok((p, q))
}

fn connect_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let (p, q) = endpoints(cfg)?;
    let shot = log_map_with(&mf, &p, &q, &shooting(cfg)?)?;
    let path = geodesic_ivp(&mf, &p, &shot.initial_velocity, 1.0, samples(cfg)?)?;
    let dist = energy(&mf, p.coords(), shot.initial_velocity.components())
        .max(0.0)
        .sqrt();
    let mut r = Report::new(
        "connect",
        json!({
            "family": mf.to_string(),
            "from": p.coords(),
            "to": q.coords(),
            "initial-velocity": shot.initial_velocity.components(),
            "distance": dist,
            "iterations": shot.iterations,
            "residual": shot.residual,
        }),
    );
    r.tables.push(path_table("connect", &mf, &path));
    if p.dim() == 2 {
        let stops = [0.0, 0.25, 0.5, 0.75, 1.0];
        let stop_path = geodesic_ivp(&mf, &p, &shot.initial_velocity, 1.0, stops.len())?;
        let labelled: Vec<(String, Point)> = stops
            .iter()
            .zip(&stop_path.points)
            .map(|(t, pt)| (format!("t={t}"), pt.clone()))
            .collect();
        let table = density_table("connect-densities", &labelled)?;
        let curves: Vec<Curve> = density_curves(&table)
            .into_iter()
            .zip(&labelled)
            .enumerate()
            .map(|(k, (pts, (label, pt)))| {
                let c = pt.coords();
                Curve::new(&format!("{label} ({:.3}, {:.3})", c[0], c[1]), pts, k)
            })
            .collect();
        let axes = Axes::new("beta densities along the geodesic", "s", "density");
        r.figures
            .push(("connect-densities".into(), svg::line_plot(&axes, &curves)?));
        r.tables.push(table);
    }
    r.figures
        .push(("connect-path".into(), path_figure("geodesic coordinates", &path)?));
    Ok(r)
}

fn distance_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let (p, q) = endpoints(cfg)?;
    let shot = log_map_with(&mf, &p, &q, &shooting(cfg)?)?;
    let dist = energy(&mf, p.coords(), shot.initial_velocity.components())
        .max(0.0)
        .sqrt();
    let mut t = Table::new("distance", ["distance", "iterations", "residual"]);
    t.push(vec![dist.into(), shot.iterations.into(), shot.residual.into()]);
    let mut r = Report::new(
        "distance",
        json!({
            "family": mf.to_string(),
            "from": p.coords(),
            "to": q.coords(),
            "distance": dist,
            "iterations": shot.iterations,
            "residual": shot.residual,
        }),
    );
    r.tables.push(t);
    Ok(r)
}

fn mean_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let raw = require(&cfg.points, "points")?;
    let pts = raw
        .iter()
        .enumerate()
        .map(|(i, c)| point(cfg, c, &format!("points[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let weights = cfg.weights.as_deref();
    let mut opts = MeanOptions {
        tol: tolerance(cfg)?,
        ..MeanOptions::default()
    };
    if let Some(m) = cfg.max_iterations {
        opts.max_iterations = m;
    }
    let res = frechet_mean(&mf, &pts, weights, &opts)?;
    let euclid = Point::euclidean_mean(&pts, weights)?;
    let f_mean = frechet_objective(&mf, &res.mean, &pts, weights)?;
    let f_euclid = frechet_objective(&mf, &euclid, &pts, weights)?;

    let n = res.mean.dim();
    let mut cols = vec!["kind".to_string()];
    cols.extend(coordinate_names("x", n));
    cols.push("objective".into());
    let mut t = Table::new("mean", cols);
    for (kind, p, f) in [("frechet", &res.mean, f_mean), ("euclidean", &euclid, f_euclid)] {
        let mut row = vec![Cell::from(kind)];
        row.extend(p.coords().iter().map(|&c| Cell::from(c)));
        row.push(f.into());
        t.push(row);
    }
    let mut r = Report::new(
        "mean",
        json!({
            "family": mf.to_string(),
            "points": raw,
            "weights": cfg.weights,
            "mean": res.mean.coords(),
            "iterations": res.iterations,
            "gradient-norm": res.final_gradient_norm,
            "variance": res.variance,
            "objective": f_mean,
            "euclidean-mean": euclid.coords(),
            "euclidean-objective": f_euclid,
        }),
    );
    r.tables.push(t);
    if n == 2 {
        let (table, svg) = mean_densities("mean-densities", &pts, &res.mean, &euclid)?;
        r.figures.push(("mean-densities".into(), svg));
        r.tables.push(table);
    }
    Ok(r)
}

/// Densities of the inputs (thin), the Fréchet mean (solid red) and the
/// Euclidean mean (dashed red).
pub fn mean_densities(name: &str, pts: &[Point], mean: &Point, euclid: &Point) -> Result<(Table, String), CliError> {
    let label = |p: &Point| format!("({}, {})", p.coords()[0], p.coords()[1]);
    let mut labelled: Vec<(String, Point)> = pts.iter().map(|p| (label(p), p.clone())).collect();
    labelled.push(("frechet".into(), mean.clone()));
    labelled.push(("euclidean".into(), euclid.clone()));
    let table = density_table(name, &labelled)?;
    let k = pts.len();
    let curves: Vec<Curve> = density_curves(&table)
        .into_iter()
        .enumerate()
        .map(|(i, c)| match i {
            i if i < k => Curve::new(&labelled[i].0, c, [0, 2, 3, 4, 5, 6, 7][i % 7]).width(1.0),
            i if i == k => Curve::new("Frechet mean", c, 1).width(2.5),
            _ => Curve::new("Euclidean mean", c, 1).width(2.0).dashed(),
        })
        .collect();
    let svg = svg::line_plot(&Axes::new("Frechet and Euclidean means", "s", "density"), &curves)?;
    Ok((table, svg))
}

fn curvature_grid_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let scale = cfg.scale.unwrap_or_default();
    let xs = axis(
        cfg.range.unwrap_or(DEFAULT_RANGE),
        cfg.res.unwrap_or(DEFAULT_RES),
        scale,
    )?;
    let grid = tabulate_parallel(&xs, &xs, |x, y| gaussian_2d(&mf, x, y))?;
    let report = conjecture_report(&grid);
    let mut r = Report::new(
        "curvature-grid",
        json!({
            "family": mf.to_string(),
            "range": [xs[0], xs[xs.len() - 1]],
            "res": xs.len(),
            "min": report.min,
            "argmin": [report.argmin.0, report.argmin.1],
            "max": grid.max().2,
            "non-negative-cells": report.non_negative,
            "lower-bound": LOWER_BOUND,
            "cells-below-lower-bound": report.below_lower_bound,
            "lower-bound-holds": report.min >= LOWER_BOUND - LOWER_BOUND_SLACK,
            "increases-along-x": report.increasing_in_x,
            "increases-along-y": report.increasing_in_y,
        }),
    );
    let mut axes = Axes::new("sectional curvature K(x, y)", "x", "y");
    axes.log_x = scale == Scale::Log;
    axes.log_y = axes.log_x;
    let svg = svg::heatmap(&axes, &grid.xs, &grid.ys, &grid.values, ColorMap::Sequential)?;
    r.figures.push(("curvature-grid".into(), svg));
    r.tables.push(grid_table("curvature-grid", "k", &grid));
    Ok(r)
}

fn embed_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let p = point_or_ones(cfg)?;
    let emb = Embedding::new(mf);
    let e = emb.embed(&p);
    let normal = unit_normal(&mf, &p);
    let mut t = Table::new("embed", ["index", "y", "normal"]);
    for (i, (&y, &nu)) in e.y.iter().zip(normal.components()).enumerate() {
        t.push(vec![i.into(), y.into(), nu.into()]);
    }
    let mut r = Report::new(
        "embed",
        json!({
            "family": mf.to_string(),
            "point": p.coords(),
            "embedded": e.y,
            "graph-residual": emb.graph_residual(&e)?,
            "unit-normal": normal.components(),
            "principal-curvatures": principal_curvatures(&mf, &p),
        }),
    );
    r.tables.push(t);
    Ok(r)
}

fn diagonal_cmd(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let x0 = cfg.x0.unwrap_or(1.0);
    let xdot0 = cfg.xdot0.unwrap_or(1.0);
    let t_end = cfg.time.unwrap_or(1.0);
    let path = diagonal_geodesic(&mf, x0, xdot0, t_end, samples(cfg)?)?;
    let c0 = xdot0 * diagonal_q(&mf, x0).sqrt();
    let mut t = Table::new("diagonal", ["t", "x", "xdot", "conserved"]);
    let mut drift: f64 = 0.0;
    for (&time, v) in path.times.iter().zip(&path.velocities) {
        let x = v.base().coords()[0];
        let xd = v.components()[0];
        let c = xd * diagonal_q(&mf, x).sqrt();
        if c0 != 0.0 {
            drift = drift.max(((c - c0) / c0).abs());
        }
        t.push(vec![time.into(), x.into(), xd.into(), c.into()]);
    }
    let pts = path
        .times
        .iter()
        .zip(&path.points)
        .map(|(&t, p)| (t, p.coords()[0]))
        .collect();
    let svg = svg::line_plot(&Axes::new("diagonal geodesic", "t", "x = y"), &[Curve::new("", pts, 0)])?;
    let mut r = Report::new(
        "diagonal",
        json!({
            "family": mf.to_string(),
            "x0": x0,
            "xdot0": xdot0,
            "time": t_end,
            "end": path.end().coords()[0],
            "conserved": c0,
            "conserved-drift": drift,
        }),
    );
    r.tables.push(t);
    r.figures.push(("diagonal".into(), svg));
    Ok(r)
}

/// JSON of an optional list for summaries.
pub fn opt_json<T: serde::Serialize>(v: &Option<T>) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
