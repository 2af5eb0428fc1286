//! Bi-objective Pareto classification, hypervolume, uncrowded distance and UHV.
//!
//! All objectives are minimized. The hypervolume is the area dominated by the
//! non-dominated points and bounded by the reference point `r`. The uncrowded distance of a
//! dominated point is its Euclidean distance to the *interior* domination boundary: the
//! staircase joining consecutive front points, without the two semi-infinite rays.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::Objectives;

/// `p` objective vectors together with the hypervolume reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveMatrix {
    points: Vec<Objectives>,
    reference: Objectives,
}

impl ObjectiveMatrix {
    pub fn new(points: Vec<Objectives>, reference: Objectives) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "objective matrix needs at least one point".into(),
            ));
        }
        if let Some(i) = points.iter().position(|y| !y.iter().all(|v| v.is_finite())) {
            return Err(Error::numeric(
                format!("objective vector {i} is not finite"),
                &points[i],
            ));
        }
        if !reference.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reference point {reference:?} is not finite"
            )));
        }
        Ok(Self { points, reference })
    }

    pub fn points(&self) -> &[Objectives] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Objectives {
        self.points[i]
    }

    pub fn reference(&self) -> Objectives {
        self.reference
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same reference point, different rows.
    pub fn with_points(&self, points: Vec<Objectives>) -> Result<Self> {
        Self::new(points, self.reference)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domination {
    NonDominated,
    /// Some other point is strictly better in both objectives.
    Dominated,
    /// Not strictly dominated, but another point is no worse in both objectives and equal in
    /// at least one (this includes later copies of exact duplicates).
    WeaklyDominated,
}

/// One axis-parallel piece of the interior boundary between two consecutive front points.
///
/// `left`/`right` are the indices (into the objective matrix) of the front points at the
/// segment's ends, ordered by increasing `f0`. Horizontal segments run from the left point
/// to the corner `(f0(right), f1(left))`, vertical ones from that corner down to the right
/// point. A single-point front is represented by one zero-length segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Objectives,
    pub end: Objectives,
    pub left: usize,
    pub right: usize,
    pub horizontal: bool,
}

/// Nearest point `s` on the interior boundary and where its coordinates come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPoint {
    pub distance: f64,
    pub point: Objectives,
    /// Index of the front point that fixes `s_k`, or `None` when `s_k` equals the query's
    /// own coordinate (interior of a segment).
    pub source: [Option<usize>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub status: Vec<Domination>,
    /// Non-dominated indices sorted by increasing `f0` (hence decreasing `f1`).
    pub front: Vec<usize>,
    pub boundary: Vec<Segment>,
}

impl DominationReport {
    pub fn nondominated_count(&self) -> usize {
        self.front.len()
    }

    pub fn all_nondominated(&self) -> bool {
        self.front.len() == self.status.len()
    }
}

fn weakly_dominates(a: Objectives, b: Objectives) -> bool {
    a[0] <= b[0] && a[1] <= b[1]
}

/// Classifies every point as non-dominated, dominated or weakly dominated.
pub fn classify(y: &ObjectiveMatrix) -> DominationReport {
    let pts = y.points();
    let status: Vec<Domination> = (0..pts.len())
        .map(|i| {
            let yi = pts[i];
            let mut weak = false;
            for (j, &yj) in pts.iter().enumerate() {
                if j == i {
                    continue;
                }
                if yj[0] < yi[0] && yj[1] < yi[1] {
                    return Domination::Dominated;
                }
                if weakly_dominates(yj, yi) && (yj != yi || j < i) {
                    weak = true;
                }
            }
            if weak {
                Domination::WeaklyDominated
            } else {
                Domination::NonDominated
            }
        })
        .collect();

    let mut front: Vec<usize> = (0..pts.len())
        .filter(|&i| status[i] == Domination::NonDominated)
        .collect();
    front.sort_by(|&a, &b| pts[a][0].partial_cmp(&pts[b][0]).unwrap_or(Ordering::Equal));

    let boundary = match front.as_slice() {
        [] => Vec::new(),
        [only] => vec![Segment {
            start: pts[*only],
            end: pts[*only],
            left: *only,
            right: *only,
            horizontal: true,
        }],
        _ => front
            .windows(2)
            .flat_map(|w| {
                let (l, r) = (w[0], w[1]);
                let corner = [pts[r][0], pts[l][1]];
                [
                    Segment {
                        start: pts[l],
                        end: corner,
                        left: l,
                        right: r,
                        horizontal: true,
                    },
                    Segment {
                        start: corner,
                        end: pts[r],
                        left: l,
                        right: r,
                        horizontal: false,
                    },
                ]
            })
            .collect(),
    };

    DominationReport {
        status,
        front,
        boundary,
    }
}

/// Hypervolume of the front described by `report`, clipped to the reference box.
pub fn hypervolume_of(y: &ObjectiveMatrix, report: &DominationReport) -> f64 {
    let r = y.reference();
    let mut prev_f1 = r[1];
    let mut hv = 0.0;
    for &i in &report.front {
        let p = y.point(i);
        if p[0] >= r[0] || p[1] >= r[1] {
            continue;
        }
        hv += (r[0] - p[0]) * (prev_f1 - p[1]);
        prev_f1 = p[1];
    }
    hv
}

pub fn hypervolume(y: &ObjectiveMatrix) -> f64 {
    hypervolume_of(y, &classify(y))
}

fn project(y: Objectives, seg: &Segment) -> NearestPoint {
    let mut s = [0.0; 2];
    let mut source = [None, None];
    if seg.horizontal {
        // f1 fixed by the left point; f0 ranges over [f0(left), f0(right)].
        s[1] = seg.start[1];
        source[1] = Some(seg.left);
        let (lo, hi) = (seg.start[0], seg.end[0]);
        if y[0] <= lo {
            s[0] = lo;
            source[0] = Some(seg.left);
        } else if y[0] >= hi {
            s[0] = hi;
            source[0] = Some(seg.right);
        } else {
            s[0] = y[0];
        }
    } else {
        // f0 fixed by the right point; f1 ranges over [f1(right), f1(left)].
        s[0] = seg.end[0];
        source[0] = Some(seg.right);
        let (lo, hi) = (seg.end[1], seg.start[1]);
        if y[1] <= lo {
            s[1] = lo;
            source[1] = Some(seg.right);
        } else if y[1] >= hi {
            s[1] = hi;
            source[1] = Some(seg.left);
        } else {
            s[1] = y[1];
        }
    }
    let distance = (y[0] - s[0]).hypot(y[1] - s[1]);
    NearestPoint {
        distance,
        point: s,
        source,
    }
}

/// Distance from `y` to the nearest point of the interior boundary in `report`.
pub fn uncrowded_distance(y: Objectives, report: &DominationReport) -> Result<NearestPoint> {
    let mut best: Option<NearestPoint> = None;
    for seg in &report.boundary {
        let cand = project(y, seg);
        if best.is_none_or(|b| cand.distance < b.distance) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::InvalidState("domination report has an empty front".into()))
}

/// The set-level uncrowded distance `UD = (1/p) Σ ud(y_i)²` over non-front points.
pub fn uncrowded_distance_total(y: &ObjectiveMatrix, report: &DominationReport) -> Result<f64> {
    let mut sum = 0.0;
    for (i, status) in report.status.iter().enumerate() {
        if *status != Domination::NonDominated {
            let d = uncrowded_distance(y.point(i), report)?.distance;
            sum += d * d;
        }
    }
    Ok(sum / y.len() as f64)
}

/// HV, UD and UHV of a set, plus its number of non-dominated points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indicators {
    pub hv: f64,
    pub ud: f64,
    pub uhv: f64,
    pub nondominated: usize,
}

pub fn indicators(y: &ObjectiveMatrix) -> Indicators {
    let report = classify(y);
    let hv = hypervolume_of(y, &report);
    // A classified matrix always has a non-empty front.
    let ud = uncrowded_distance_total(y, &report).expect("non-empty front");
    Indicators {
        hv,
        ud,
        uhv: hv - ud,
        nondominated: report.front.len(),
    }
}

/// Uncrowded hypervolume `HV − UD`.
pub fn uhv(y: &ObjectiveMatrix) -> f64 {
    indicators(y).uhv
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R: Objectives = [11.0, 11.0];

    fn om(points: &[Objectives]) -> ObjectiveMatrix {
        ObjectiveMatrix::new(points.to_vec(), R).unwrap()
    }

    // Inclusion–exclusion over all non-empty subsets of boxes [y_i, r].
    fn hv_inclusion_exclusion(points: &[Objectives], r: Objectives) -> f64 {
        let p = points.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << p) {
            let mut corner = [f64::NEG_INFINITY; 2];
            for (i, y) in points.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    corner[0] = corner[0].max(y[0]);
                    corner[1] = corner[1].max(y[1]);
                }
            }
            let vol = (r[0] - corner[0]).max(0.0) * (r[1] - corner[1]).max(0.0);
            if mask.count_ones() % 2 == 1 {
                total += vol;
            } else {
                total -= vol;
            }
        }
        total
    }

    #[test]
    fn classification_examples() {
        let rep = classify(&om(&[[9.0, 10.0], [10.0, 9.0]]));
        assert_eq!(rep.status, vec![Domination::NonDominated; 2]);

        let rep = classify(&om(&[[9.0, 10.0], [10.0, 9.0], [10.5, 10.5]]));
        assert_eq!(rep.status[2], Domination::Dominated);

        let rep = classify(&om(&[[9.0, 10.0], [9.0, 11.0]]));
        assert_eq!(
            rep.status,
            vec![Domination::NonDominated, Domination::WeaklyDominated]
        );
    }

    #[test]
    fn duplicates_keep_first_occurrence() {
        let rep = classify(&om(&[[5.0, 5.0], [5.0, 5.0], [5.0, 5.0]]));
        assert_eq!(
            rep.status,
            vec![
                Domination::NonDominated,
                Domination::WeaklyDominated,
                Domination::WeaklyDominated
            ]
        );
        assert_eq!(rep.front, vec![0]);
    }

    #[test]
    fn boundary_shape() {
        let rep = classify(&om(&[[1.0, 5.0], [3.0, 2.0], [2.0, 4.0], [4.0, 1.0]]));
        assert_eq!(rep.front, vec![0, 2, 1, 3]);
        assert_eq!(rep.boundary.len(), 6);
        for (k, seg) in rep.boundary.iter().enumerate() {
            assert_eq!(seg.horizontal, k % 2 == 0);
        }
        assert_eq!(rep.boundary[0].end, [2.0, 5.0]);
        assert_eq!(rep.boundary[1].end, [2.0, 4.0]);

        let single = classify(&om(&[[5.0, 5.0], [6.0, 6.0]]));
        assert_eq!(single.boundary.len(), 1);
        assert_eq!(single.boundary[0].start, single.boundary[0].end);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&om(&[[10.0, 10.0]])), 1.0);
        assert_eq!(hypervolume(&om(&[[9.0, 10.0], [10.0, 9.0]])), 3.0);
        assert_eq!(
            hypervolume(&om(&[[9.0, 10.0], [10.0, 9.0], [10.5, 10.5]])),
            3.0
        );
        assert_eq!(hypervolume(&om(&[[12.0, 12.0]])), 0.0);
        // Partially outside: only the in-box front points count.
        assert_eq!(hypervolume(&om(&[[12.0, 1.0], [9.0, 10.0]])), 2.0);
    }

    #[test]
    fn uncrowded_distance_examples() {
        let rep = classify(&om(&[[9.0, 10.0], [10.0, 9.0]]));

        let np = uncrowded_distance([10.5, 10.5], &rep).unwrap();
        assert!((np.distance - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(np.point, [10.0, 10.0]);
        assert_eq!(np.source, [Some(1), Some(0)]);

        let np = uncrowded_distance([9.5, 10.5], &rep).unwrap();
        assert!((np.distance - 0.5).abs() < 1e-15);
        assert_eq!(np.point, [9.5, 10.0]);
        assert_eq!(np.source, [None, Some(0)]);

        assert_eq!(uncrowded_distance([9.0, 10.0], &rep).unwrap().distance, 0.0);

        let rep = classify(&om(&[[5.0, 5.0], [6.0, 6.0]]));
        let np = uncrowded_distance([6.0, 6.0], &rep).unwrap();
        assert!((np.distance - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(np.point, [5.0, 5.0]);
    }

    #[test]
    fn empty_front_is_invalid_state() {
        let rep = DominationReport {
            status: vec![],
            front: vec![],
            boundary: vec![],
        };
        assert!(matches!(
            uncrowded_distance([1.0, 1.0], &rep),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn uhv_examples() {
        assert_eq!(uhv(&om(&[[9.0, 10.0], [10.0, 9.0]])), 3.0);
        let v = uhv(&om(&[[9.0, 10.0], [10.0, 9.0], [10.5, 10.5]]));
        assert!((v - (3.0 - 0.5 / 3.0)).abs() < 1e-14);
        assert_eq!(uhv(&om(&[[12.0, 12.0]])), 0.0);
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(ObjectiveMatrix::new(vec![], R).is_err());
        assert!(ObjectiveMatrix::new(vec![[f64::NAN, 1.0]], R).is_err());
        assert!(ObjectiveMatrix::new(vec![[1.0, 1.0]], [f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn mean_normalization_lets_a_close_dominated_point_raise_uhv() {
        let base = indicators(&om(&[[5.0, 5.0], [7.0, 7.0]]));
        let ext = indicators(&om(&[[5.0, 5.0], [7.0, 7.0], [5.1, 5.1]]));
        assert_eq!(ext.hv, base.hv);
        assert!(ext.uhv > base.uhv);
    }

    fn point() -> impl Strategy<Value = Objectives> {
        (0.0f64..12.0, 0.0f64..12.0).prop_map(|(a, b)| [a, b])
    }

    proptest! {
        #[test]
        fn staircase_matches_inclusion_exclusion(pts in prop::collection::vec(point(), 1..=4)) {
            let hv = hypervolume(&om(&pts));
            prop_assert!((hv - hv_inclusion_exclusion(&pts, R)).abs() <= 1e-12);
        }

        #[test]
        fn front_points_mutually_nondominated(pts in prop::collection::vec(point(), 1..=10)) {
            let m = om(&pts);
            let rep = classify(&m);
            for &a in &rep.front {
                for &b in &rep.front {
                    if a != b {
                        prop_assert!(!weakly_dominates(m.point(a), m.point(b)));
                    }
                }
            }
            prop_assert_eq!(rep.boundary.len(), if rep.front.len() == 1 { 1 } else { 2 * rep.front.len() - 2 });
        }

        #[test]
        fn adding_dominated_point_keeps_hv_and_grows_ud_sum(pts in prop::collection::vec(point(), 1..=8), shift in (0.01f64..2.0, 0.01f64..2.0), pick in 0usize..8) {
            let m = om(&pts);
            let base = indicators(&m);
            let anchor = pts[pick % pts.len()];
            let mut more = pts.clone();
            more.push([anchor[0] + shift.0, anchor[1] + shift.1]);
            let ext = indicators(&om(&more));
            prop_assert!((ext.hv - base.hv).abs() <= 1e-12);
            let sum = |ind: &Indicators, p: usize| ind.ud * p as f64;
            prop_assert!(sum(&ext, more.len()) >= sum(&base, pts.len()) - 1e-12);
            if base.nondominated == pts.len() {
                prop_assert!(ext.uhv <= base.uhv + 1e-12);
            }
        }

        #[test]
        fn translation_invariance(pts in prop::collection::vec(point(), 1..=8), d in (-50.0f64..50.0, -50.0f64..50.0)) {
            let a = indicators(&om(&pts));
            let moved: Vec<Objectives> = pts.iter().map(|y| [y[0] + d.0, y[1] + d.1]).collect();
            let b = indicators(&ObjectiveMatrix::new(moved, [R[0] + d.0, R[1] + d.1]).unwrap());
            prop_assert!((a.hv - b.hv).abs() <= 1e-12 * (1.0 + a.hv.abs()) * 10.0);
            prop_assert!((a.ud - b.ud).abs() <= 1e-11);
            prop_assert!((a.uhv - b.uhv).abs() <= 1e-11 * (1.0 + a.uhv.abs()));
        }

        #[test]
        fn improving_a_front_point_never_decreases_hv(pts in prop::collection::vec(point(), 1..=8), pick in 0usize..8, delta in 0.0f64..1.0, axis in 0usize..2) {
            let m = om(&pts);
            let rep = classify(&m);
            let i = rep.front[pick % rep.front.len()];
            let mut better = pts.clone();
            better[i][axis] -= delta;
            prop_assert!(hypervolume(&om(&better)) >= hypervolume(&m) - 1e-12);
        }
    }
}
