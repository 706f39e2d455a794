//! Dormand-Prince 5(4) integration of second-order systems `q̈ = a(q, q̇)`,
//! with quintic Hermite dense output.

use alloc::vec;
use alloc::vec::Vec;

use libm::{pow, sqrt};

use crate::{IntegrationFailure, IntegrationFailureKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: 1e-10,
            rel: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

// Autonomous systems only, so the nodes c_s are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// An accepted node: time, position, velocity, acceleration.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

/// All accepted nodes of a run, ordered along the direction of integration.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub nodes: Vec<Node>,
}

impl Trajectory {
    pub fn end(&self) -> &Node {
        self.nodes.last().expect("trajectory has a start node")
    }

    /// Position and velocity at `t`, clamped to the integrated range.
    pub fn sample(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let nodes = &self.nodes;
        let forward = self.end().t >= nodes[0].t;
        let k = nodes.partition_point(|nd| if forward { nd.t <= t } else { nd.t >= t });
        if k == 0 {
            return (nodes[0].q.clone(), nodes[0].v.clone());
        }
        if k == nodes.len() {
            let e = self.end();
            return (e.q.clone(), e.v.clone());
        }
        hermite(&nodes[k - 1], &nodes[k], t)
    }
}

fn hermite(n0: &Node, n1: &Node, t: f64) -> (Vec<f64>, Vec<f64>) {
    let h = n1.t - n0.t;
    let s = (t - n0.t) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let h3 = 0.5 * s3 - s4 + 0.5 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 1.0 - h0;
    let d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let d2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let d3 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let d5 = -d0;
    let n = n0.q.len();
    let mut q = vec![0.0; n];
    let mut v = vec![0.0; n];
    for i in 0..n {
        q[i] = h0 * n0.q[i] + h5 * n1.q[i] + h * (h1 * n0.v[i] + h4 * n1.v[i]) + h * h * (h2 * n0.a[i] + h3 * n1.a[i]);
        v[i] = (d0 * n0.q[i] + d5 * n1.q[i]) / h + d1 * n0.v[i] + d4 * n1.v[i] + h * (d2 * n0.a[i] + d3 * n1.a[i]);
    }
    (q, v)
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], tol: &Tolerances) -> f64 {
    let mut s = 0.0;
    for i in 0..err.len() {
        let sc = tol.abs + tol.rel * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        s += r * r;
    }
    sqrt(s / err.len() as f64)
}

/// Integrates `q̈ = accel(q, q̇)` from `t = 0` to `t_end` (either sign).
///
/// `inside(q)` is checked on every accepted node; a `false` aborts with
/// [`IntegrationFailureKind::QuadrantEscape`]. Failures carry the last
/// accepted node in the integration variables.
pub fn integrate<A, G>(
    mut accel: A,
    mut inside: G,
    q0: &[f64],
    v0: &[f64],
    t_end: f64,
    tol: &Tolerances,
) -> Result<Trajectory, IntegrationFailure>
where
    A: FnMut(&[f64], &[f64], &mut [f64]),
    G: FnMut(&[f64]) -> bool,
{
    let n = q0.len();
    let m = 2 * n;
    let rhs = |accel: &mut A, y: &[f64], dy: &mut [f64]| {
        dy[..n].copy_from_slice(&y[n..]);
        let (_, tail) = dy.split_at_mut(n);
        accel(&y[..n], &y[n..], tail);
    };

    let mut y: Vec<f64> = q0.iter().chain(v0).copied().collect();
    let mut k = vec![vec![0.0; m]; 7];
    rhs(&mut accel, &y, &mut k[0]);
    let fail = |kind, t: f64, y: &[f64]| IntegrationFailure {
        kind,
        time: t,
        point: y[..n].to_vec(),
        velocity: y[n..].to_vec(),
    };
    if y.iter().chain(&k[0]).any(|v| !v.is_finite()) {
        return Err(fail(IntegrationFailureKind::NonFinite, 0.0, &y));
    }
    let mut nodes = vec![Node {
        t: 0.0,
        q: y[..n].to_vec(),
        v: y[n..].to_vec(),
        a: k[0][n..].to_vec(),
    }];
    if t_end == 0.0 {
        return Ok(Trajectory { nodes });
    }
    let dir = if t_end > 0.0 { 1.0 } else { -1.0 };
    let span = t_end.abs();

    // Initial step from the scale of y and y′.
    let d0 = error_norm(&y, &y, &y, tol);
    let d1 = error_norm(&k[0], &y, &y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);
    {
        let trial: Vec<f64> = y.iter().zip(&k[0]).map(|(a, b)| a + dir * h * b).collect();
        let mut f1 = vec![0.0; m];
        rhs(&mut accel, &trial, &mut f1);
        let diff: Vec<f64> = f1.iter().zip(&k[0]).map(|(a, b)| (a - b) / h).collect();
        let d2 = error_norm(&diff, &y, &y, tol);
        let h1 = if d1.max(d2) <= 1e-15 {
            (1e-6_f64).max(h * 1e-3)
        } else {
            pow(0.01 / d1.max(d2), 0.2)
        };
        h = (100.0 * h).min(h1).min(span);
    }

    let mut t = 0.0_f64;
    let mut stage = vec![0.0; m];
    let mut y_new = vec![0.0; m];
    let mut err = vec![0.0; m];
    let mut steps = 0usize;
    let mut last_nonfinite = false;
    loop {
        let remaining = span - t.abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 1e-14 * span.max(1.0) && !last {
            let kind = if last_nonfinite {
                IntegrationFailureKind::NonFinite
            } else {
                IntegrationFailureKind::StepUnderflow
            };
            return Err(fail(kind, dir * t, &y));
        }
        steps += 1;
        if steps > tol.max_steps {
            return Err(fail(IntegrationFailureKind::TooManySteps, dir * t, &y));
        }
        let hs = dir * h;
        for s in 1..7 {
            for i in 0..m {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                stage[i] = y[i] + hs * acc;
            }
            rhs(&mut accel, &stage, &mut k[s]);
        }
        // Stage 7 was evaluated at the fifth-order solution (FSAL).
        y_new.copy_from_slice(&stage);
        for i in 0..m {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            err[i] = hs * e;
        }
        let en = error_norm(&err, &y, &y_new, tol);
        let finite = en.is_finite() && k[6].iter().all(|v| v.is_finite());
        if !finite {
            last_nonfinite = true;
            h *= MIN_FACTOR;
            continue;
        }
        last_nonfinite = false;
        if en <= 1.0 {
            if !inside(&y_new[..n]) {
                return Err(fail(IntegrationFailureKind::QuadrantEscape, dir * t, &y));
            }
            t = if last { span } else { t + h };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            nodes.push(Node {
                t: dir * t,
                q: y[..n].to_vec(),
                v: y[n..].to_vec(),
                a: k[0][n..].to_vec(),
            });
            if last {
                return Ok(Trajectory { nodes });
            }
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * pow(en, -0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= factor;
        } else {
            h *= (SAFETY * pow(en, -0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
}
