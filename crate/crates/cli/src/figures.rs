//! The `figures` command: geodesic balls with a curvature heatmap, the
//! geodesic and means between beta densities, and the sign of the
//! three-dimensional axis curvature difference.
//!
//! Every figure is written next to the CSV of the numbers it draws.

use fisher_dirichlet::curvature::{axis_difference, gaussian_2d};
use fisher_dirichlet::frechet::{frechet_mean, frechet_objective, MeanOptions};
use fisher_dirichlet::geodesics::{exp_map, geodesic_ivp, log_map_with, ShootingOptions};
use fisher_dirichlet::geometry::{metric, norm};
use fisher_dirichlet::{Family, Point, Tangent};
use rayon::prelude::*;
use serde_json::json;

use crate::commands::{
    axis, density_curves, density_table, grid_table, mean_densities, path_table, tabulate_parallel, usage,
};
use crate::config::{RunConfig, Scale, Span};
use crate::report::{Report, Table};
use crate::svg::{self, Axes, ColorMap, Curve};
use crate::CliError;

pub const DEFAULT_DIR: &str = "figures";

/// Ball centers when `--centers` is absent.
pub const BALL_CENTERS: [[f64; 2]; 3] = [[1.0, 1.0], [3.0, 3.0], [2.0, 6.0]];
/// Radii drawn around every center when `--radii` is absent.
pub const BALL_RADII: [f64; 2] = [0.5, 1.0];
/// Directions per ball boundary.
pub const BALL_DIRECTIONS: usize = 96;
/// Range and resolution of the curvature heatmap beside the balls.
pub const CURVATURE_RANGE: Span = Span { lo: 0.05, hi: 10.0 };
pub const CURVATURE_RES: usize = 100;

pub const GEODESIC_FROM: [f64; 2] = [2.0, 5.0];
pub const GEODESIC_TO: [f64; 2] = [2.0, 2.0];
pub const MEAN_INPUTS: [[f64; 2]; 3] = [[2.0, 5.0], [2.0, 2.0], [5.0, 1.0]];

/// Third coordinate of the axis difference when `--z` is absent.
pub const DIFFERENCE_Z: f64 = 0.01;
/// On `[0.005, 0.1]²` the difference is negative everywhere; its sign
/// change appears once a coordinate exceeds about 0.2.
pub const DIFFERENCE_RANGE: Span = Span { lo: 0.005, hi: 1.0 };
pub const DIFFERENCE_RES: usize = 60;

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mf = cfg.family();
    let mut report = Report::new("figures", json!({ "family": mf.to_string() }));
    let balls = balls(cfg, &mf, &mut report)?;
    let means = beta_figure(cfg, &mf, &mut report)?;
    let difference = difference_figure(cfg, &mf, &mut report)?;
    report.summary = json!({
        "family": mf.to_string(),
        "balls": balls,
        "beta": means,
        "axis-difference": difference,
    });
    report.text = Some(format!(
        "axis difference at z = {}: {} positive, {} negative cells (min {:.6e}, max {:.6e})\n",
        difference["z"],
        difference["positive"],
        difference["negative"],
        difference["min"].as_f64().unwrap_or(f64::NAN),
        difference["max"].as_f64().unwrap_or(f64::NAN),
    ));
    Ok(report)
}

/// Metric-unit direction at angle `theta` in log coordinates.
fn unit_direction(mf: &Family, p: &Point, theta: f64) -> Result<Tangent, CliError> {
    let c = p.coords();
    let u = Tangent::new(p.clone(), vec![c[0] * theta.cos(), c[1] * theta.sin()])?;
    let len = norm(&metric(mf, p), &u)?;
    Ok(u.scaled(1.0 / len))
}

fn balls(cfg: &RunConfig, mf: &Family, report: &mut Report) -> Result<serde_json::Value, CliError> {
    let centers: Vec<Vec<f64>> = cfg
        .centers
        .clone()
        .unwrap_or_else(|| BALL_CENTERS.iter().map(|c| c.to_vec()).collect());
    let radii = cfg.radii.clone().unwrap_or_else(|| BALL_RADII.to_vec());
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(usage(format!("--radii must be positive, got {r}")));
    }
    let centers = centers
        .iter()
        .map(|c| match c.len() {
            2 => Point::new(c.clone()).map_err(|e| usage(format!("--centers: {e}"))),
            n => Err(usage(format!("ball centers are two-dimensional, got {n} coordinates"))),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(
        "fig2-balls",
        ["ball", "center-x", "center-y", "radius", "k", "theta", "x", "y"],
    );
    let mut curves = Vec::new();
    let mut ball = 0;
    for (ci, c) in centers.iter().enumerate() {
        for (ri, &r) in radii.iter().enumerate() {
            let boundary = (0..BALL_DIRECTIONS)
                .into_par_iter()
                .map(|k| {
                    let theta = 2.0 * core::f64::consts::PI * k as f64 / BALL_DIRECTIONS as f64;
                    let q = exp_map(mf, c, &unit_direction(mf, c, theta)?.scaled(r))?;
                    Ok((theta, q))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            for (k, (theta, q)) in boundary.iter().enumerate() {
                table.push(vec![
                    ball.into(),
                    c.coords()[0].into(),
                    c.coords()[1].into(),
                    r.into(),
                    k.into(),
                    (*theta).into(),
                    q.coords()[0].into(),
                    q.coords()[1].into(),
                ]);
            }
            let mut pts: Vec<(f64, f64)> = boundary.iter().map(|(_, q)| (q.coords()[0], q.coords()[1])).collect();
            pts.push(pts[0]);
            let label = format!("({}, {}), r = {r}", c.coords()[0], c.coords()[1]);
            let curve = Curve::new(&label, pts, ci);
            // Every radius but the last is dashed.
            curves.push(if ri + 1 < radii.len() { curve.dashed() } else { curve });
            ball += 1;
        }
        curves.push(Curve::new("", vec![(c.coords()[0], c.coords()[1])], ci));
    }
    let axes = Axes::new("geodesic balls", "x", "y");
    report
        .figures
        .push(("fig2-balls".into(), svg::line_plot(&axes, &curves)?));
    report.tables.push(table);

    let xs = axis(CURVATURE_RANGE, CURVATURE_RES, Scale::Log)?;
    let grid = tabulate_parallel(&xs, &xs, |x, y| gaussian_2d(mf, x, y))?;
    let axes = Axes::new("sectional curvature K(x, y)", "x", "y").log_log();
    let svg = svg::heatmap(&axes, &grid.xs, &grid.ys, &grid.values, ColorMap::Sequential)?;
    report.figures.push(("fig2-curvature".into(), svg));
    report.tables.push(grid_table("fig2-curvature", "k", &grid));
    let (min, max) = (grid.min().2, grid.max().2);
    Ok(json!({
        "centers": centers.iter().map(|c| c.coords().to_vec()).collect::<Vec<_>>(),
        "radii": radii,
        "directions": BALL_DIRECTIONS,
        "curvature-range": [CURVATURE_RANGE.lo, CURVATURE_RANGE.hi],
        "curvature-min": min,
        "curvature-max": max,
    }))
}

fn beta_figure(cfg: &RunConfig, mf: &Family, report: &mut Report) -> Result<serde_json::Value, CliError> {
    let p = Point::new(GEODESIC_FROM.to_vec())?;
    let q = Point::new(GEODESIC_TO.to_vec())?;
    let opts = ShootingOptions {
        tol: cfg.tol.unwrap_or(1e-8),
        ..ShootingOptions::default()
    };
    let shot = log_map_with(mf, &p, &q, &opts)?;
    let path = geodesic_ivp(mf, &p, &shot.initial_velocity, 1.0, 5)?;
    let labelled: Vec<_> = path
        .points
        .iter()
        .zip(&path.times)
        .map(|(pt, t)| (format!("t={t}"), pt.clone()))
        .collect();
    let table = density_table("fig3-geodesic", &labelled)?;
    let curves: Vec<Curve> = density_curves(&table)
        .into_iter()
        .zip(&labelled)
        .enumerate()
        .map(|(k, (c, (label, _)))| Curve::new(label, c, k))
        .collect();
    let axes = Axes::new("geodesic from beta(2, 5) to beta(2, 2)", "s", "density");
    report
        .figures
        .push(("fig3-geodesic".into(), svg::line_plot(&axes, &curves)?));
    report.tables.push(table);
    let fine = geodesic_ivp(mf, &p, &shot.initial_velocity, 1.0, 101)?;
    report.tables.push(path_table("fig3-path", mf, &fine));

    let pts = MEAN_INPUTS
        .iter()
        .map(|c| Point::new(c.to_vec()))
        .collect::<fisher_dirichlet::Result<Vec<_>>>()?;
    let mean = frechet_mean(mf, &pts, None, &MeanOptions::default())?;
    let euclid = Point::euclidean_mean(&pts, None)?;
    let (table, svg) = mean_densities("fig3-mean", &pts, &mean.mean, &euclid)?;
    report.figures.push(("fig3-mean".into(), svg));
    report.tables.push(table);
    Ok(json!({
        "geodesic-from": GEODESIC_FROM,
        "geodesic-to": GEODESIC_TO,
        "distance": fisher_dirichlet::geometry::energy(mf, p.coords(), shot.initial_velocity.components()).sqrt(),
        "mean-inputs": MEAN_INPUTS,
        "frechet-mean": mean.mean.coords(),
        "frechet-objective": frechet_objective(mf, &mean.mean, &pts, None)?,
        "euclidean-mean": euclid.coords(),
        "euclidean-objective": frechet_objective(mf, &euclid, &pts, None)?,
    }))
}

fn difference_figure(cfg: &RunConfig, mf: &Family, report: &mut Report) -> Result<serde_json::Value, CliError> {
    let z = cfg.z.unwrap_or(DIFFERENCE_Z);
    if !(z > 0.0 && z.is_finite()) {
        return Err(usage(format!("--z must be positive, got {z}")));
    }
    let range = cfg.range.unwrap_or(DIFFERENCE_RANGE);
    let scale = cfg.scale.unwrap_or(Scale::Linear);
    let xs = axis(range, cfg.res.unwrap_or(DIFFERENCE_RES), scale)?;
    let grid = tabulate_parallel(&xs, &xs, |x, y| axis_difference(mf, x, y, z))?;
    let mut axes = Axes::new(&format!("K3(x, y, {z}) - K2(x, y)"), "x", "y");
    axes.log_x = scale == Scale::Log;
    axes.log_y = axes.log_x;
    let svg = svg::heatmap(&axes, &grid.xs, &grid.ys, &grid.values, ColorMap::Diverging)?;
    report.figures.push(("fig4-difference".into(), svg));
    report.tables.push(grid_table("fig4-difference", "difference", &grid));
    Ok(json!({
        "z": z,
        "range": [range.lo, range.hi],
        "res": xs.len(),
        "min": grid.min().2,
        "max": grid.max().2,
        "positive": grid.count(|v| v > 0.0),
        "negative": grid.count(|v| v < 0.0),
        "changes-sign": grid.min().2 < 0.0 && grid.max().2 > 0.0,
    }))
}
