//! Target hypervolumes: the best HV any `p` points on the Pareto front can reach.
//!
//! For fronts given by a monotone curve `t ↦ (f0(t), f1(t))`, `t ∈ [0, 1]` (f0 increasing,
//! f1 decreasing), [`optimal_hv_on_curve`] maximizes HV over the `p` curve parameters by
//! cyclic coordinate ascent. [`sampled_front_dp`] is an independent check: the exact optimum
//! over a finite sample of the front, by dynamic programming.

use super::front::EllipsoidFront;
use crate::error::{Error, Result};
use crate::problems::{Quadratic, QuadraticKind};
use crate::Objectives;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetEntry {
    pub problem: String,
    pub n: usize,
    pub p: usize,
    pub target_hv: f64,
}

/// Target HVs per `(problem, n, p)`, read from a tab-separated table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TargetTable {
    entries: Vec<TargetEntry>,
}

const BUILTIN: &str = include_str!("../../data/targets.tsv");

impl TargetTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped target table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::InvalidArgument(format!("line {}: {what}", no + 1));
            let cols: Vec<&str> = line.split('\t').collect();
            let [problem, n, p, hv] = cols.as_slice() else {
                return Err(bad("expected problem, n, p and target HV"));
            };
            entries.push(TargetEntry {
                problem: problem.to_string(),
                n: n.parse().map_err(|_| bad("bad n"))?,
                p: p.parse().map_err(|_| bad("bad p"))?,
                target_hv: hv
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| bad("bad target HV"))?,
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[TargetEntry] {
        &self.entries
    }

    pub fn lookup(&self, problem: &str, n: usize, p: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.problem == problem && e.n == n && e.p == p)
            .map(|e| e.target_hv)
    }
}

// Hypervolume of curve points ordered by increasing parameter.
fn staircase(ys: &[Objectives], r: Objectives) -> f64 {
    let mut hv = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let next = ys.get(i + 1).map_or(r[0], |n| n[0]);
        hv += (next - y[0]) * (r[1] - y[1]);
    }
    hv
}

// Maximizes a continuous function on [lo, hi]: a coarse scan brackets the best grid point,
// then golden-section search refines it.
fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const GRID: usize = 32;
    let mut best = (lo, f(lo));
    for k in 1..=GRID {
        let t = lo + (hi - lo) * k as f64 / GRID as f64;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let step = (hi - lo) / GRID as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-16 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Best hypervolume of `p` points on the curve, with the maximizing parameters.
///
/// Each sweep re-optimizes every parameter between its neighbours; sweeps stop once the HV
/// improves by less than `tol` or after `max_sweeps`.
pub fn optimal_hv_on_curve(
    curve: impl Fn(f64) -> Objectives,
    p: usize,
    r: Objectives,
    tol: f64,
    max_sweeps: usize,
) -> Result<(f64, Vec<f64>)> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let mut ts: Vec<f64> = if p == 1 {
        vec![0.5]
    } else {
        (0..p).map(|i| i as f64 / (p - 1) as f64).collect()
    };
    let mut ys: Vec<Objectives> = ts.iter().map(|&t| curve(t)).collect();
    let mut hv = staircase(&ys, r);
    for sweep in 0..max_sweeps {
        let order: Vec<usize> = if sweep % 2 == 0 {
            (0..p).collect()
        } else {
            (0..p).rev().collect()
        };
        for i in order {
            let lo = if i == 0 { 0.0 } else { ts[i - 1] };
            let hi = if i + 1 == p { 1.0 } else { ts[i + 1] };
            let right = if i + 1 == p { r[0] } else { ys[i + 1][0] };
            let top = if i == 0 { r[1] } else { ys[i - 1][1] };
            let contribution = |t: f64| {
                let y = curve(t);
                (right - y[0]).max(0.0) * (top - y[1]).max(0.0)
            };
            let current = contribution(ts[i]);
            let (t, v) = maximize(contribution, lo, hi);
            if v > current {
                ts[i] = t;
                ys[i] = curve(t);
            }
        }
        let next = staircase(&ys, r);
        let gain = next - hv;
        hv = next.max(hv);
        if gain <= tol {
            break;
        }
    }
    Ok((hv, ts))
}

/// Front parameterization of a quadratic problem, as `t ∈ [0, 1]` ↦ objective vector.
pub fn front_curve(problem: &Quadratic) -> Result<Box<dyn Fn(f64) -> Objectives + '_>> {
    match problem.kind() {
        QuadraticKind::BiSphere => Ok(Box::new(|t| [t * t, (1.0 - t) * (1.0 - t)])),
        QuadraticKind::ConcaveBiSphere => Ok(Box::new(|t| [t.sqrt(), (1.0 - t).sqrt()])),
        QuadraticKind::SphereRotEllipsoid => {
            let front = EllipsoidFront::new(problem)?;
            Ok(Box::new(move |w| front.point(w)))
        }
        QuadraticKind::SphereRosenbrock => Err(Error::Unsupported(
            "sphere-rosenbrock has no parameterized front".into(),
        )),
    }
}

/// Exact maximum HV of `p` points chosen from a sampled front (sorted by `f0`, mutually
/// non-dominated, inside the reference box).
pub fn sampled_front_dp(front: &[Objectives], p: usize, r: Objectives) -> Result<f64> {
    let m = front.len();
    if p == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "need p ≥ 1 and a non-empty front".into(),
        ));
    }
    let p = p.min(m);
    // best[j]: max HV of the region left of point j's f0, using k points with j the last one.
    let mut best = vec![0.0; m];
    for _ in 1..p {
        let mut next = vec![f64::NEG_INFINITY; m];
        for j in 0..m {
            for i in 0..j {
                let v = best[i] + (front[j][0] - front[i][0]) * (r[1] - front[i][1]);
                if v > next[j] {
                    next[j] = v;
                }
            }
        }
        best = next;
    }
    Ok((0..m)
        .map(|j| best[j] + (r[0] - front[j][0]) * (r[1] - front[j][1]))
        .fold(f64::NEG_INFINITY, f64::max))
}
