//! Gradient of the uncrowded hypervolume with respect to the concatenated decision vector.
//!
//! The chain rule splits `∂UHV/∂x_i` into the objective-space gradient
//! `(∂UHV/∂f0(x_i), ∂UHV/∂f1(x_i))` and the MO gradients `∇f0(x_i)`, `∇f1(x_i)`:
//!
//! * non-dominated points take the gradient of their own hypervolume contribution, which
//!   only depends on their two neighbours on the front;
//! * dominated points take `−(2/p)(y_i − s_i)`, with `s_i` their nearest point on the interior
//!   boundary;
//! * weakly dominated points are first pushed into strict domination by worsening their shared
//!   objective values by a small `ε`.
//!
//! Each objective-space gradient is normalized to unit length before being combined with the
//! MO gradients, so every solution gets a search direction of comparable magnitude.

use crate::error::{Error, Result};
use crate::hypervolume::{
    classify, uncrowded_distance, Domination, DominationReport, ObjectiveMatrix,
};
use crate::problems::{evaluate, EvaluationLedger, MoGradient, MoProblem};
use crate::Objectives;

/// How the UD term reacts to moving a non-dominated point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UdCoupling {
    /// `∂UD/∂f(x_i) = 0` for non-dominated `x_i`, so front points are never worsened to pull
    /// the boundary towards dominated points.
    #[default]
    Zeroed,
    /// The exact derivative, including how front points shape the boundary seen by dominated
    /// points. Only used to check the chain rule against finite differences.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOptions {
    /// Relative size of the weak-domination perturbation: a shared value `v` is moved by
    /// `epsilon · max(1, |v|)`.
    pub epsilon: f64,
    pub ud_coupling: UdCoupling,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            ud_coupling: UdCoupling::Zeroed,
        }
    }
}

/// Gradient of the hypervolume contribution of non-dominated point `i`.
///
/// For points outside the reference box the contribution is zero; those get
/// `−max(0, y_k − r_k)` per objective instead, pointing them back into the box.
pub fn hv_objective_gradient(
    report: &DominationReport,
    y: &ObjectiveMatrix,
    i: usize,
) -> Result<[f64; 2]> {
    if report.status.get(i) != Some(&Domination::NonDominated) {
        return Err(Error::ContractViolation(format!(
            "hypervolume gradient requested for point {i}, which is not non-dominated"
        )));
    }
    let r = y.reference();
    let yi = y.point(i);
    if yi[0] > r[0] || yi[1] > r[1] {
        return Ok([-(yi[0] - r[0]).max(0.0), -(yi[1] - r[1]).max(0.0)]);
    }
    let pos = report
        .front
        .iter()
        .position(|&j| j == i)
        .ok_or_else(|| Error::InvalidState(format!("point {i} missing from the front")))?;
    let left_f1 = if pos == 0 {
        r[1]
    } else {
        y.point(report.front[pos - 1])[1].min(r[1])
    };
    let right_f0 = match report.front.get(pos + 1) {
        Some(&j) => y.point(j)[0].min(r[0]),
        None => r[0],
    };
    Ok([-(left_f1 - yi[1]), -(right_f0 - yi[0])])
}

/// Gradient of `(1/p)‖y − s‖²` with respect to `y`. The UHV gradient is its negation.
pub fn ud_objective_gradient(y: Objectives, s: Objectives, p: usize) -> Result<[f64; 2]> {
    if y == s {
        return Err(Error::ContractViolation(
            "uncrowded distance is zero; perturb weakly dominated points first".into(),
        ));
    }
    let scale = 2.0 / p as f64;
    Ok([scale * (y[0] - s[0]), scale * (y[1] - s[1])])
}

fn shared_coordinates(pts: &[Objectives], i: usize) -> [bool; 2] {
    let yi = pts[i];
    let mut shared = [false; 2];
    for (j, yj) in pts.iter().enumerate() {
        if j != i && yj[0] <= yi[0] && yj[1] <= yi[1] {
            for k in 0..2 {
                shared[k] |= yj[k] == yi[k];
            }
        }
    }
    shared
}

/// Worsens the shared objective values of weakly dominated points by a small amount so that
/// they become strictly dominated. The input matrix is not modified.
///
/// Chains of coinciding values (e.g. several copies of one point) are resolved over repeated
/// rounds. If a perturbed point would gain a dominator it did not have before, `epsilon` is
/// shrunk tenfold and the whole perturbation retried, at most 10 times.
pub fn perturb_weakly_dominated(
    y: &ObjectiveMatrix,
    report: &DominationReport,
    epsilon: f64,
) -> Result<ObjectiveMatrix> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !report.status.contains(&Domination::WeaklyDominated) {
        return Ok(y.clone());
    }
    let original = y.points();
    let p = original.len();
    let mut eps = epsilon;
    let mut colliding = Vec::new();
    for _ in 0..10 {
        let mut pts = original.to_vec();
        let mut touched = vec![false; p];
        let mut status = report.status.clone();
        for _ in 0..p {
            let weak: Vec<usize> = (0..p)
                .filter(|&i| status[i] == Domination::WeaklyDominated)
                .collect();
            if weak.is_empty() {
                break;
            }
            let shifts: Vec<(usize, [bool; 2])> = weak
                .iter()
                .map(|&i| (i, shared_coordinates(&pts, i)))
                .collect();
            for (i, shared) in shifts {
                for k in 0..2 {
                    if shared[k] {
                        pts[i][k] += eps * pts[i][k].abs().max(1.0);
                    }
                }
                touched[i] = true;
            }
            status = classify(&y.with_points(pts.clone())?).status;
        }

        colliding.clear();
        for i in (0..p).filter(|&i| touched[i]) {
            if status[i] != Domination::Dominated {
                colliding.push(i);
                continue;
            }
            // Every strict dominator after perturbation must have weakly dominated before.
            let gained = (0..p).any(|j| {
                j != i
                    && pts[j][0] < pts[i][0]
                    && pts[j][1] < pts[i][1]
                    && !(original[j][0] <= original[i][0] && original[j][1] <= original[i][1])
            });
            if gained {
                colliding.push(i);
            }
        }
        if colliding.is_empty() {
            return y.with_points(pts);
        }
        eps *= 0.1;
    }
    Err(Error::Degenerate { indices: colliding })
}

/// `∂UHV/∂f(x_i)` for every point, after weak-domination handling.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpaceGradient {
    pub per_point: Vec<[f64; 2]>,
    /// The objective values the gradient was computed at (perturbed where needed).
    pub perturbed: ObjectiveMatrix,
    pub report: DominationReport,
}

pub fn objective_space_gradient(
    y: &ObjectiveMatrix,
    options: &GradientOptions,
) -> Result<ObjectiveSpaceGradient> {
    let initial = classify(y);
    let (perturbed, report) = if initial.status.contains(&Domination::WeaklyDominated) {
        let q = perturb_weakly_dominated(y, &initial, options.epsilon)?;
        let rep = classify(&q);
        (q, rep)
    } else {
        (y.clone(), initial)
    };

    let p = perturbed.len();
    let mut per_point = vec![[0.0; 2]; p];
    for (i, g) in per_point.iter_mut().enumerate() {
        if report.status[i] == Domination::NonDominated {
            *g = hv_objective_gradient(&report, &perturbed, i)?;
        }
    }
    // UD terms second: with exact coupling they also land on front points.
    for i in 0..p {
        match report.status[i] {
            Domination::NonDominated => {}
            Domination::Dominated => {
                let yi = perturbed.point(i);
                let nearest = uncrowded_distance(yi, &report)?;
                let g = ud_objective_gradient(yi, nearest.point, p)?;
                per_point[i][0] -= g[0];
                per_point[i][1] -= g[1];
                if options.ud_coupling == UdCoupling::Exact {
                    for k in 0..2 {
                        if let Some(src) = nearest.source[k] {
                            per_point[src][k] += g[k];
                        }
                    }
                }
            }
            Domination::WeaklyDominated => {
                return Err(Error::InvalidState(format!(
                    "point {i} still weakly dominated after perturbation"
                )))
            }
        }
    }
    Ok(ObjectiveSpaceGradient {
        per_point,
        perturbed,
        report,
    })
}

/// Decision-space UHV gradient of a solution set.
#[derive(Debug, Clone, PartialEq)]
pub struct UhvGradient {
    dim: usize,
    /// Normalized per-solution search directions, concatenated.
    pub directions: Vec<f64>,
    /// Unnormalized `∂UHV/∂X`, concatenated.
    pub raw: Vec<f64>,
    pub objective_space: Vec<[f64; 2]>,
    /// `W_i`, the norm of each objective-space gradient.
    pub weights: Vec<f64>,
}

impl UhvGradient {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn raw(&self, i: usize) -> &[f64] {
        &self.raw[i * self.dim..(i + 1) * self.dim]
    }
}

/// Assembles `∇UHV(F(X))` from the objective values and per-solution MO gradients.
pub fn uhv_gradient(
    y: &ObjectiveMatrix,
    mo_grads: &[MoGradient],
    options: &GradientOptions,
) -> Result<UhvGradient> {
    if mo_grads.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} MO gradients supplied for {} solutions",
            mo_grads.len(),
            y.len()
        )));
    }
    let dim = mo_grads[0].f0.len();
    if mo_grads
        .iter()
        .any(|g| g.f0.len() != dim || g.f1.len() != dim)
    {
        return Err(Error::InvalidArgument(
            "MO gradients differ in dimension".into(),
        ));
    }
    let objective = objective_space_gradient(y, options)?;
    let p = y.len();
    let mut raw = vec![0.0; dim * p];
    let mut directions = vec![0.0; dim * p];
    let mut weights = vec![0.0; p];
    for (i, (d, g)) in objective.per_point.iter().zip(mo_grads).enumerate() {
        let w = d[0].hypot(d[1]);
        weights[i] = w;
        for j in 0..dim {
            let v = d[0] * g.f0[j] + d[1] * g.f1[j];
            raw[i * dim + j] = v;
            if w > 0.0 {
                directions[i * dim + j] = v / w;
            }
        }
    }
    Ok(UhvGradient {
        dim,
        directions,
        raw,
        objective_space: objective.per_point,
        weights,
    })
}

/// Forward-difference MO gradient at `x`, whose objective values `base` are already known.
///
/// Uses a backward difference in coordinates where `x_j + h` leaves the box. Costs exactly
/// `n` MO-evaluations.
pub fn fd_mo_gradient(
    problem: &dyn MoProblem,
    x: &[f64],
    base: Objectives,
    h: f64,
    ledger: &mut EvaluationLedger,
) -> Result<MoGradient> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let n = x.len();
    let upper = &problem.bounds().upper;
    let mut grad = MoGradient::zeros(n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let forward = x[j] + h;
        let shifted = if forward <= upper[j] {
            forward
        } else {
            x[j] - h
        };
        let step = shifted - x[j];
        if step == 0.0 {
            return Err(Error::numeric(
                format!("finite-difference step {h} vanishes at coordinate {j}"),
                x,
            ));
        }
        probe[j] = shifted;
        let f = evaluate(problem, &probe, ledger)?;
        probe[j] = x[j];
        grad.f0[j] = (f[0] - base[0]) / step;
        grad.f1[j] = (f[1] - base[1]) / step;
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypervolume::{hypervolume, uhv};
    use crate::problems::{Bounds, Quadratic, QuadraticKind};

    const R: Objectives = [11.0, 11.0];

    fn om(points: &[Objectives]) -> ObjectiveMatrix {
        ObjectiveMatrix::new(points.to_vec(), R).unwrap()
    }

    fn central_fd(f: impl Fn(&ObjectiveMatrix) -> f64, y: &ObjectiveMatrix, i: usize) -> [f64; 2] {
        let h = 1e-6;
        let mut out = [0.0; 2];
        for k in 0..2 {
            let mut up = y.points().to_vec();
            let mut down = up.clone();
            up[i][k] += h;
            down[i][k] -= h;
            out[k] =
                (f(&y.with_points(up).unwrap()) - f(&y.with_points(down).unwrap())) / (2.0 * h);
        }
        out
    }

    #[test]
    fn hv_gradient_examples_match_fd() {
        let y = om(&[[9.0, 10.0], [10.0, 9.0]]);
        let rep = classify(&y);
        for i in 0..2 {
            let g = hv_objective_gradient(&rep, &y, i).unwrap();
            let fd = central_fd(hypervolume, &y, i);
            assert_eq!(g, [-1.0, -1.0]);
            assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
        }
        let single = om(&[[10.0, 10.0]]);
        assert_eq!(
            hv_objective_gradient(&classify(&single), &single, 0).unwrap(),
            [-1.0, -1.0]
        );
    }

    #[test]
    fn hv_gradient_rejects_dominated_points() {
        let y = om(&[[9.0, 10.0], [10.0, 9.0], [10.5, 10.5]]);
        assert!(matches!(
            hv_objective_gradient(&classify(&y), &y, 2),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn hv_gradient_outside_reference_points_back() {
        let y = om(&[[12.0, 5.0]]);
        assert_eq!(
            hv_objective_gradient(&classify(&y), &y, 0).unwrap(),
            [-1.0, 0.0]
        );
    }

    #[test]
    fn ud_gradient_examples() {
        let g = ud_objective_gradient([10.5, 10.5], [10.0, 10.0], 3).unwrap();
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-15 && (g[1] - 1.0 / 3.0).abs() < 1e-15);
        let g = ud_objective_gradient([9.5, 10.5], [9.5, 10.0], 3).unwrap();
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1.0 / 3.0).abs() < 1e-15);
        let g = ud_objective_gradient([4.25, 3.0], [4.0, 3.0], 7).unwrap();
        assert_eq!(g[1], 0.0);
        assert!(matches!(
            ud_objective_gradient([1.0, 1.0], [1.0, 1.0], 2),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn dominated_objective_gradient_matches_fd_of_uhv() {
        let y = om(&[[9.0, 10.0], [10.0, 9.0], [10.5, 10.5]]);
        let g = objective_space_gradient(&y, &GradientOptions::default()).unwrap();
        let fd = central_fd(uhv, &y, 2);
        assert!((g.per_point[2][0] - fd[0]).abs() < 1e-8);
        assert!((g.per_point[2][1] - fd[1]).abs() < 1e-8);
        assert!((g.per_point[2][0] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_coupling_reaches_later_front_points() {
        // Nearest boundary point of (6, 6) is (5, 6), whose f0 comes from index 2.
        let y = om(&[[6.0, 6.0], [2.0, 8.0], [5.0, 3.0]]);
        let exact = GradientOptions {
            ud_coupling: UdCoupling::Exact,
            ..GradientOptions::default()
        };
        let g = objective_space_gradient(&y, &exact).unwrap();
        for i in 0..3 {
            let fd = central_fd(uhv, &y, i);
            for k in 0..2 {
                assert!((g.per_point[i][k] - fd[k]).abs() < 1e-6, "{i} {k}");
            }
        }
        assert!((g.per_point[2][0] - (-5.0 + 2.0 / 3.0)).abs() < 1e-15);

        let zeroed = objective_space_gradient(&y, &GradientOptions::default()).unwrap();
        assert_eq!(zeroed.per_point[2], [-5.0, -6.0]);
    }

    #[test]
    fn perturbation_examples() {
        let y = om(&[[9.0, 10.0], [9.0, 11.0]]);
        let q = perturb_weakly_dominated(&y, &classify(&y), 1e-9).unwrap();
        assert_eq!(q.point(1), [9.0 + 9.0 * 1e-9, 11.0]);
        assert_eq!(classify(&q).status[1], Domination::Dominated);
        assert_eq!(y.point(1), [9.0, 11.0]);

        let y = om(&[[0.5, 0.5], [0.5, 0.5]]);
        let q = perturb_weakly_dominated(&y, &classify(&y), 1e-9).unwrap();
        assert_eq!(q.point(1), [0.5 + 1e-9, 0.5 + 1e-9]);

        let y = om(&[[9.0, 10.0], [10.0, 9.0]]);
        assert_eq!(
            perturb_weakly_dominated(&y, &classify(&y), 1e-9).unwrap(),
            y
        );
    }

    #[test]
    fn perturbation_resolves_chains_and_copies() {
        let y = om(&[[5.0, 5.0], [5.0, 5.0], [5.0, 5.0], [5.0, 6.0], [5.0, 7.0]]);
        let q = perturb_weakly_dominated(&y, &classify(&y), 1e-9).unwrap();
        let rep = classify(&q);
        assert_eq!(rep.front, vec![0]);
        assert!(rep.status[1..].iter().all(|s| *s == Domination::Dominated));
    }

    #[test]
    fn perturbation_rejects_nonpositive_epsilon() {
        let y = om(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(perturb_weakly_dominated(&y, &classify(&y), 0.0).is_err());
    }

    #[test]
    fn single_solution_direction() {
        let problem = Quadratic::new(QuadraticKind::BiSphere, 2).unwrap();
        let x = [1.0, 1.0];
        let y = om(&[problem.objectives(&x)]);
        assert_eq!(y.point(0), [2.0, 1.0]);
        let g = uhv_gradient(
            &y,
            &[problem.objective_gradients(&x).unwrap()],
            &GradientOptions::default(),
        )
        .unwrap();
        assert_eq!(g.objective_space[0], [-10.0, -9.0]);
        let w = 181f64.sqrt();
        assert!((g.weights[0] - w).abs() < 1e-15);
        assert!((g.direction(0)[0] + 20.0 / w).abs() < 1e-14);
        assert!((g.direction(0)[1] + 38.0 / w).abs() < 1e-14);
        assert_eq!(g.raw(0), &[-20.0, -38.0]);
    }

    #[test]
    fn zero_mo_gradient_gives_zero_direction() {
        let y = om(&[[1.0, 2.0], [2.0, 1.0]]);
        let grads = vec![MoGradient::zeros(3), MoGradient::zeros(3)];
        let g = uhv_gradient(&y, &grads, &GradientOptions::default()).unwrap();
        assert!(g.directions.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn point_on_reference_corner_has_zero_weight() {
        let y = om(&[[11.0, 11.0]]);
        let grads = vec![MoGradient {
            f0: vec![1.0],
            f1: vec![1.0],
        }];
        let g = uhv_gradient(&y, &grads, &GradientOptions::default()).unwrap();
        assert_eq!(g.weights[0], 0.0);
        assert_eq!(g.directions, vec![0.0]);
    }

    #[test]
    fn normalized_objective_gradients_have_unit_norm() {
        let y = om(&[[1.0, 9.0], [3.0, 4.0], [6.0, 2.0], [5.0, 8.0], [3.0, 4.0]]);
        let g = objective_space_gradient(&y, &GradientOptions::default()).unwrap();
        for d in &g.per_point {
            let w = d[0].hypot(d[1]);
            assert!(w > 0.0);
            assert!(((d[0] / w).hypot(d[1] / w) - 1.0).abs() < 1e-12);
        }
    }

    #[derive(Debug)]
    struct Square(Bounds);

    impl MoProblem for Square {
        fn id(&self) -> &str {
            "square"
        }
        fn dim(&self) -> usize {
            1
        }
        fn bounds(&self) -> &Bounds {
            &self.0
        }
        fn init_bounds(&self) -> &Bounds {
            &self.0
        }
        fn objectives(&self, x: &[f64]) -> Objectives {
            [x[0] * x[0], -x[0]]
        }
    }

    #[test]
    fn forward_difference_bias() {
        let problem = Square(Bounds::uniform(1, -5.0, 5.0));
        let mut ledger = EvaluationLedger::new();
        let g = fd_mo_gradient(&problem, &[1.0], [1.0, -1.0], 1e-6, &mut ledger).unwrap();
        assert!((g.f0[0] - (2.0 + 1e-6)).abs() < 1e-9);
        assert_eq!(ledger.count(), 1);
    }

    #[test]
    fn backward_difference_at_upper_bound() {
        let problem = Square(Bounds::uniform(1, -5.0, 1.0));
        let mut ledger = EvaluationLedger::new();
        let g = fd_mo_gradient(&problem, &[1.0], [1.0, -1.0], 1e-6, &mut ledger).unwrap();
        assert!((g.f0[0] - (2.0 - 1e-6)).abs() < 1e-9);
        assert!((g.f1[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn fd_costs_n_evaluations() {
        let problem = Quadratic::new(QuadraticKind::SphereRotEllipsoid, 10).unwrap();
        let x = vec![0.3; 10];
        let mut ledger = EvaluationLedger::new();
        let base = evaluate(&problem, &x, &mut ledger).unwrap();
        fd_mo_gradient(&problem, &x, base, 1e-6, &mut ledger).unwrap();
        assert_eq!(ledger.count(), 11);
    }

    #[test]
    fn fd_step_too_small() {
        let problem = Square(Bounds::uniform(1, -1e20, 1e20));
        let err = fd_mo_gradient(
            &problem,
            &[1e10],
            [0.0, 0.0],
            1e-12,
            &mut EvaluationLedger::new(),
        );
        assert!(matches!(err, Err(Error::Numeric { .. })));
        let err = fd_mo_gradient(
            &problem,
            &[1.0],
            [0.0, 0.0],
            0.0,
            &mut EvaluationLedger::new(),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
