use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::{MoProblem, Quadratic, QuadraticKind, Wfg, WFG_DEFAULT_K};
use crate::Objectives;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontSource {
    /// Dense sampling of a known front parameterization.
    Analytic,
    /// Pruned to an evenly spread subset of a larger sample (5000 points by default).
    Sampled,
    ExternalFile,
}

impl FrontSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontSource::Analytic => "analytic",
            FrontSource::Sampled => "sampled-5000",
            FrontSource::ExternalFile => "external-file",
        }
    }
}

/// Mutually non-dominated points sampling a Pareto front, sorted by `f0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFront {
    points: Vec<Objectives>,
    source: FrontSource,
}

/// Keeps the non-dominated points, sorted by increasing `f0`; duplicates collapse to one.
fn nondominated_sorted(mut pts: Vec<Objectives>) -> Vec<Objectives> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<Objectives> = Vec::with_capacity(pts.len());
    for y in pts {
        if out.last().is_none_or(|last| y[1] < last[1]) {
            out.push(y);
        }
    }
    out
}

impl ReferenceFront {
    /// Builds a front from arbitrary points, dropping dominated ones.
    pub fn new(points: Vec<Objectives>, source: FrontSource) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("reference front is empty".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "reference front contains non-finite values".into(),
            ));
        }
        Ok(Self {
            points: nondominated_sorted(points),
            source,
        })
    }

    pub fn points(&self) -> &[Objectives] {
        &self.points
    }

    pub fn source(&self) -> FrontSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `y` to the nearest front point.
    pub fn distance(&self, y: Objectives) -> f64 {
        let pts = &self.points;
        let start = pts.partition_point(|q| q[0] < y[0]);
        let d2 = |q: &Objectives| (q[0] - y[0]).powi(2) + (q[1] - y[1]).powi(2);
        let mut best = f64::INFINITY;
        for q in &pts[start..] {
            if (q[0] - y[0]).powi(2) >= best {
                break;
            }
            best = best.min(d2(q));
        }
        for q in pts[..start].iter().rev() {
            if (q[0] - y[0]).powi(2) >= best {
                break;
            }
            best = best.min(d2(q));
        }
        best.sqrt()
    }

    /// Dense sampling of the analytic fronts of problems 0 and 2.
    pub fn analytic(kind: QuadraticKind, samples: usize) -> Result<Self> {
        let curve: fn(f64) -> Objectives = match kind {
            QuadraticKind::BiSphere => |t| [t * t, (1.0 - t) * (1.0 - t)],
            QuadraticKind::ConcaveBiSphere => |t| [t.sqrt(), (1.0 - t).sqrt()],
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} has no closed-form front",
                    kind.id()
                )))
            }
        };
        Self::new(sample_curve(curve, samples)?, FrontSource::Analytic)
    }

    /// Front of the sphere / rotated-ellipsoid problem from a sweep over weighted-sum
    /// minimizers, thinned to `keep` points spread evenly along the front.
    pub fn rotated_ellipsoid(problem: &Quadratic, sweep: usize, keep: usize) -> Result<Self> {
        let curve = EllipsoidFront::new(problem)?;
        if sweep < 2 {
            return Err(Error::InvalidArgument("need at least 2 samples".into()));
        }
        let mut ws: Vec<f64> = (0..sweep).map(|i| i as f64 / (sweep - 1) as f64).collect();
        let mut ys: Vec<Objectives> = ws.iter().map(|&w| curve.point(w)).collect();
        // The front speed in w varies by orders of magnitude; split long segments until the
        // sweep is fine enough for even arc-length thinning.
        for _ in 0..40 {
            let len = |a: Objectives, b: Objectives| (b[0] - a[0]).hypot(b[1] - a[1]);
            let total: f64 = ys.windows(2).map(|s| len(s[0], s[1])).sum();
            let limit = total / (4 * keep) as f64;
            let mut refined_w = vec![ws[0]];
            let mut refined_y = vec![ys[0]];
            let mut split = false;
            for i in 1..ws.len() {
                if len(ys[i - 1], ys[i]) > limit {
                    let mid = 0.5 * (ws[i - 1] + ws[i]);
                    refined_w.push(mid);
                    refined_y.push(curve.point(mid));
                    split = true;
                }
                refined_w.push(ws[i]);
                refined_y.push(ys[i]);
            }
            ws = refined_w;
            ys = refined_y;
            if !split {
                break;
            }
        }
        Self::new(ys, FrontSource::Analytic)?.thinned(keep)
    }

    /// Front of a WFG problem from its shape function, with dominated segments removed.
    pub fn wfg(problem: &Wfg, samples: usize) -> Result<Self> {
        Self::new(
            sample_curve(|x| problem.front_point(x), samples)?,
            FrontSource::Analytic,
        )
    }

    /// At most `keep` points, evenly spaced in cumulative arc length.
    pub fn thinned(&self, keep: usize) -> Result<Self> {
        if keep < 2 {
            return Err(Error::InvalidArgument("keep at least 2 points".into()));
        }
        if self.points.len() <= keep {
            return Ok(Self {
                points: self.points.clone(),
                source: FrontSource::Sampled,
            });
        }
        let mut arc = vec![0.0; self.points.len()];
        for i in 1..self.points.len() {
            let (a, b) = (self.points[i - 1], self.points[i]);
            arc[i] = arc[i - 1] + (b[0] - a[0]).hypot(b[1] - a[1]);
        }
        let total = arc[arc.len() - 1];
        let mut out = Vec::with_capacity(keep);
        let mut j = 0;
        for k in 0..keep {
            let target = total * k as f64 / (keep - 1) as f64;
            while j + 1 < arc.len() && arc[j] < target {
                j += 1;
            }
            out.push(self.points[j]);
        }
        out.dedup();
        Ok(Self {
            points: out,
            source: FrontSource::Sampled,
        })
    }

    /// Reads a whitespace- or comma-separated two-column file; `#` lines are comments.
    pub fn load(path: &Path, source: FrontSource) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::new(parse_points(&text)?, source)
    }

    pub fn to_text(&self, provenance: &[String]) -> String {
        let mut s = String::new();
        for line in provenance {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "# source: {}", self.source.as_str());
        for y in &self.points {
            let _ = writeln!(s, "{:.16e} {:.16e}", y[0], y[1]);
        }
        s
    }
}

const SPHERE_ROSENBROCK_N10: &str = include_str!("../../data/sphere-rosenbrock-n10.front");

/// The reference front used for GD on a benchmark, if one is available.
pub fn default_reference_front(problem: &str, n: usize) -> Result<Option<ReferenceFront>> {
    if let Some(kind) = QuadraticKind::from_id(problem) {
        let front = match kind {
            QuadraticKind::BiSphere | QuadraticKind::ConcaveBiSphere => {
                ReferenceFront::analytic(kind, 100_001)?
            }
            QuadraticKind::SphereRotEllipsoid => {
                ReferenceFront::rotated_ellipsoid(&Quadratic::new(kind, n)?, 20_001, 5000)?
            }
            QuadraticKind::SphereRosenbrock => {
                let pts = parse_points(SPHERE_ROSENBROCK_N10)?;
                if n != 10 || pts.is_empty() {
                    return Ok(None);
                }
                ReferenceFront::new(pts, FrontSource::Sampled)?
            }
        };
        return Ok(Some(front));
    }
    if let Some(v) = problem
        .strip_prefix("wfg")
        .and_then(|v| v.parse::<u8>().ok())
    {
        return Ok(Some(ReferenceFront::wfg(
            &Wfg::new(v, WFG_DEFAULT_K, n)?,
            10_001,
        )?));
    }
    Err(Error::InvalidArgument(format!(
        "unknown problem {problem:?}"
    )))
}

/// Parses one objective vector per line. Blank lines and `#` comments are skipped.
pub fn parse_points(text: &str) -> Result<Vec<Objectives>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse = |f: &str| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("line {}: bad number {f:?}", no + 1)))
        };
        match fields.as_slice() {
            [a, b] => out.push([parse(a)?, parse(b)?]),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected 2 columns, found {}",
                    no + 1,
                    fields.len()
                )))
            }
        }
    }
    Ok(out)
}

fn sample_curve(curve: impl Fn(f64) -> Objectives, samples: usize) -> Result<Vec<Objectives>> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    Ok((0..samples)
        .map(|i| curve(i as f64 / (samples - 1) as f64))
        .collect())
}

/// Weighted-sum minimizers `argmin (1−w)·f0 + w·f1` of the sphere / rotated-ellipsoid problem,
/// which trace its (convex) Pareto front as `w` runs over `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct EllipsoidFront<'a> {
    problem: &'a Quadratic,
    // RᵀWR and RᵀWc.
    hessian: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl<'a> EllipsoidFront<'a> {
    pub(crate) fn new(problem: &'a Quadratic) -> Result<Self> {
        let r = problem.rotation().ok_or_else(|| {
            Error::Unsupported(format!("{} is not the rotated ellipsoid", problem.id()))
        })?;
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(problem.ellipsoid_weights()));
        let rtw = r.transpose() * w;
        let hessian = &rtw * r;
        let rhs = rtw * DVector::from_column_slice(problem.center());
        Ok(Self {
            problem,
            hessian,
            rhs,
        })
    }

    pub(crate) fn solution(&self, w: f64) -> Vec<f64> {
        let n = self.problem.dim();
        let a = DMatrix::<f64>::identity(n, n) * ((1.0 - w) / n as f64) + &self.hessian * w;
        let b = &self.rhs * w;
        // Positive definite for every w ∈ [0, 1] since W > 0.
        let x = a.cholesky().expect("positive definite system").solve(&b);
        x.iter().copied().collect()
    }

    pub(crate) fn point(&self, w: f64) -> Objectives {
        self.problem.objectives(&self.solution(w))
    }
}
