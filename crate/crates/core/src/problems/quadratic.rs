use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};

use super::{Bounds, MoGradient, MoProblem};
use crate::error::{Error, Result};
use crate::Objectives;

/// The four quadratic benchmarks with analytic gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadraticKind {
    /// Problem 0: `f0 = ‖x‖²`, `f1 = ‖x − c‖²`.
    BiSphere,
    /// Problem 1: `f0 = ‖x‖²/n`, `f1 = (Rx − c)ᵀ W (Rx − c)` with `W_ii = 10^(−6i/(n−1))`.
    SphereRotEllipsoid,
    /// Problem 2: fourth roots of the bi-sphere objectives.
    ConcaveBiSphere,
    /// Problem 3: `f0 = ‖x‖²`, `f1` the Rosenbrock function averaged over its `n − 1` terms.
    SphereRosenbrock,
}

impl QuadraticKind {
    pub const ALL: [QuadraticKind; 4] = [
        QuadraticKind::BiSphere,
        QuadraticKind::SphereRotEllipsoid,
        QuadraticKind::ConcaveBiSphere,
        QuadraticKind::SphereRosenbrock,
    ];

    pub fn id(self) -> &'static str {
        match self {
            QuadraticKind::BiSphere => "bisphere",
            QuadraticKind::SphereRotEllipsoid => "sphere-rot-ellipsoid",
            QuadraticKind::ConcaveBiSphere => "concave-bisphere",
            QuadraticKind::SphereRosenbrock => "sphere-rosenbrock",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    /// Benchmark number as used in the experiment tables (0–3).
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone)]
pub struct Quadratic {
    kind: QuadraticKind,
    center: Vec<f64>,
    bounds: Bounds,
    init: Bounds,
    // Only populated for the rotated ellipsoid.
    rotation: Option<DMatrix<f64>>,
    weights: Vec<f64>,
}

/// Product of Givens rotations `G(i, i+1, 45°)`, applied for increasing `i`.
pub(crate) fn rotation_matrix(n: usize) -> DMatrix<f64> {
    let (s, c) = FRAC_PI_4.sin_cos();
    let mut r = DMatrix::<f64>::identity(n, n);
    for i in 0..n.saturating_sub(1) {
        let mut g = DMatrix::<f64>::identity(n, n);
        g[(i, i)] = c;
        g[(i, i + 1)] = -s;
        g[(i + 1, i)] = s;
        g[(i + 1, i + 1)] = c;
        r = g * r;
    }
    r
}

fn ellipsoid_weights(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 10f64.powf(-6.0 * i as f64 / (n - 1) as f64))
        .collect()
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sq_dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Quadratic {
    /// Problem of the given kind in `n` dimensions with target `c = [1, 0, …, 0]`.
    pub fn new(kind: QuadraticKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let mut center = vec![0.0; n];
        center[0] = 1.0;
        Self::with_center(kind, center)
    }

    /// Same as [`Quadratic::new`] with an arbitrary target `c` (e.g. the degenerate `c = 0`).
    pub fn with_center(kind: QuadraticKind, center: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let init = match kind {
            QuadraticKind::SphereRosenbrock => Bounds::uniform(n, 0.0, 2.0),
            _ => Bounds::uniform(n, -2.0, 2.0),
        };
        let (rotation, weights) = match kind {
            QuadraticKind::SphereRotEllipsoid => (Some(rotation_matrix(n)), ellipsoid_weights(n)),
            _ => (None, Vec::new()),
        };
        Ok(Self {
            kind,
            center,
            bounds: Bounds::unbounded(n),
            init,
            rotation,
            weights,
        })
    }

    pub fn kind(&self) -> QuadraticKind {
        self.kind
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn rotation(&self) -> Option<&DMatrix<f64>> {
        self.rotation.as_ref()
    }

    pub fn ellipsoid_weights(&self) -> &[f64] {
        &self.weights
    }

    // Rx − c for the rotated ellipsoid.
    fn rotated_offset(&self, x: &[f64]) -> DVector<f64> {
        let r = self.rotation.as_ref().expect("rotation present");
        r * DVector::from_column_slice(x) - DVector::from_column_slice(&self.center)
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        let n = x.len();
        if n < 2 {
            return 0.0;
        }
        let sum: f64 = x
            .windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum();
        sum / (n - 1) as f64
    }

    fn rosenbrock_gradient(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        if n < 2 {
            return g;
        }
        let scale = 1.0 / (n - 1) as f64;
        for i in 0..n - 1 {
            let inner = x[i + 1] - x[i] * x[i];
            g[i] += scale * (-400.0 * x[i] * inner - 2.0 * (1.0 - x[i]));
            g[i + 1] += scale * 200.0 * inner;
        }
        g
    }
}

// d/dx s^(1/4) with s = ‖x − c‖²; the subgradient 0 is used at s = 0.
fn quarter_power_gradient(x: &[f64], c: &[f64], s: f64) -> Vec<f64> {
    if s == 0.0 {
        return vec![0.0; x.len()];
    }
    let scale = 0.5 * s.powf(-0.75);
    x.iter().zip(c).map(|(a, b)| scale * (a - b)).collect()
}

impl MoProblem for Quadratic {
    fn id(&self) -> &str {
        self.kind.id()
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn init_bounds(&self) -> &Bounds {
        &self.init
    }

    fn has_analytic_gradients(&self) -> bool {
        true
    }

    fn objectives(&self, x: &[f64]) -> Objectives {
        let c = &self.center;
        match self.kind {
            QuadraticKind::BiSphere => [sq_norm(x), sq_dist(x, c)],
            QuadraticKind::SphereRotEllipsoid => {
                let z = self.rotated_offset(x);
                let f1 = z
                    .iter()
                    .zip(&self.weights)
                    .map(|(zi, wi)| wi * zi * zi)
                    .sum();
                [sq_norm(x) / x.len() as f64, f1]
            }
            QuadraticKind::ConcaveBiSphere => [sq_norm(x).powf(0.25), sq_dist(x, c).powf(0.25)],
            QuadraticKind::SphereRosenbrock => [sq_norm(x), Self::rosenbrock(x)],
        }
    }

    fn objective_gradients(&self, x: &[f64]) -> Option<MoGradient> {
        let c = &self.center;
        let n = x.len();
        let grad = match self.kind {
            QuadraticKind::BiSphere => MoGradient {
                f0: x.iter().map(|v| 2.0 * v).collect(),
                f1: x.iter().zip(c).map(|(a, b)| 2.0 * (a - b)).collect(),
            },
            QuadraticKind::SphereRotEllipsoid => {
                let r = self.rotation.as_ref().expect("rotation present");
                let mut wz = self.rotated_offset(x);
                for (zi, wi) in wz.iter_mut().zip(&self.weights) {
                    *zi *= 2.0 * wi;
                }
                let g1 = r.tr_mul(&wz);
                MoGradient {
                    f0: x.iter().map(|v| 2.0 * v / n as f64).collect(),
                    f1: g1.iter().copied().collect(),
                }
            }
            QuadraticKind::ConcaveBiSphere => {
                let zeros = vec![0.0; n];
                MoGradient {
                    f0: quarter_power_gradient(x, &zeros, sq_norm(x)),
                    f1: quarter_power_gradient(x, c, sq_dist(x, c)),
                }
            }
            QuadraticKind::SphereRosenbrock => MoGradient {
                f0: x.iter().map(|v| 2.0 * v).collect(),
                f1: Self::rosenbrock_gradient(x),
            },
        };
        Some(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|j| {
                let mut up = x.to_vec();
                let mut down = x.to_vec();
                up[j] += h;
                down[j] -= h;
                (f(&up) - f(&down)) / (2.0 * h)
            })
            .collect()
    }

    fn assert_gradients_match_fd(problem: &Quadratic, x: &[f64]) {
        let g = problem.objective_gradients(x).unwrap();
        for (k, analytic) in [g.f0, g.f1].into_iter().enumerate() {
            let fd = central_difference(|z| problem.objectives(z)[k], x, 1e-6);
            let scale = analytic.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for (a, b) in analytic.iter().zip(&fd) {
                assert!(
                    (a - b).abs() <= 1e-5 * scale.max(1e-3),
                    "objective {k}: analytic {a} vs fd {b}"
                );
            }
        }
    }

    #[test]
    fn bisphere_values() {
        let p = Quadratic::new(QuadraticKind::BiSphere, 4).unwrap();
        assert_eq!(p.objectives(&[0.0; 4]), [0.0, 1.0]);
        assert_eq!(p.objectives(&[1.0, 0.0, 0.0, 0.0]), [1.0, 0.0]);
    }

    #[test]
    fn concave_bisphere_at_target() {
        let p = Quadratic::new(QuadraticKind::ConcaveBiSphere, 3).unwrap();
        assert_eq!(p.objectives(&[1.0, 0.0, 0.0]), [1.0, 0.0]);
    }

    #[test]
    fn sphere_rosenbrock_at_ones() {
        let p = Quadratic::new(QuadraticKind::SphereRosenbrock, 10).unwrap();
        assert_eq!(p.objectives(&[1.0; 10]), [10.0, 0.0]);
    }

    #[test]
    fn bisphere_gradient_values() {
        let p = Quadratic::new(QuadraticKind::BiSphere, 2).unwrap();
        let g = p.objective_gradients(&[1.0, 1.0]).unwrap();
        assert_eq!(g.f0, vec![2.0, 2.0]);
        assert_eq!(g.f1, vec![0.0, 2.0]);

        let g = p.objective_gradients(&[0.5, 0.0]).unwrap();
        assert_eq!(g.f0, vec![1.0, 0.0]);
        assert_eq!(g.f1, vec![-1.0, 0.0]);
    }

    #[test]
    fn rotated_ellipsoid_gradient_matches_fd() {
        let p = Quadratic::new(QuadraticKind::SphereRotEllipsoid, 10).unwrap();
        let x: Vec<f64> = (0..10)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
            .collect();
        assert_gradients_match_fd(&p, &x);
    }

    #[test]
    fn one_dimensional_problems_are_finite() {
        for kind in QuadraticKind::ALL {
            let p = Quadratic::new(kind, 1).unwrap();
            let y = p.objectives(&[0.3]);
            assert!(y.iter().all(|v| v.is_finite()), "{kind:?}");
            let g = p.objective_gradients(&[0.3]).unwrap();
            assert!(g.f0.iter().chain(&g.f1).all(|v| v.is_finite()), "{kind:?}");
        }
    }

    #[test]
    fn zero_center_is_allowed() {
        let p = Quadratic::with_center(QuadraticKind::ConcaveBiSphere, vec![0.0; 3]).unwrap();
        assert_eq!(p.objectives(&[0.0; 3]), [0.0, 0.0]);
        let g = p.objective_gradients(&[0.0; 3]).unwrap();
        assert_eq!(g.f0, vec![0.0; 3]);
    }

    #[test]
    fn bisphere_pareto_set_is_mutually_nondominated() {
        let p = Quadratic::new(QuadraticKind::BiSphere, 5).unwrap();
        let ys: Vec<Objectives> = (0..=200)
            .map(|k| {
                let t = k as f64 / 200.0;
                let mut x = vec![0.0; 5];
                x[0] = t;
                let y = p.objectives(&x);
                assert!((y[0] - t * t).abs() < 1e-15);
                assert!((y[1] - (1.0 - t) * (1.0 - t)).abs() < 1e-15);
                y
            })
            .collect();
        for a in &ys {
            for b in &ys {
                assert!(!(b[0] < a[0] && b[1] < a[1]));
            }
        }
    }

    proptest! {
        #[test]
        fn concave_is_quarter_power_of_convex(x in prop::collection::vec(-3.0f64..3.0, 6)) {
            let convex = Quadratic::new(QuadraticKind::BiSphere, 6).unwrap().objectives(&x);
            let concave = Quadratic::new(QuadraticKind::ConcaveBiSphere, 6).unwrap().objectives(&x);
            for k in 0..2 {
                prop_assert!((concave[k] - convex[k].powf(0.25)).abs() <= 1e-15 * (1.0 + concave[k]));
            }
        }

        #[test]
        fn rotation_preserves_norm(x in prop::collection::vec(-5.0f64..5.0, 1..12)) {
            let r = rotation_matrix(x.len());
            let v = DVector::from_column_slice(&x);
            prop_assert!(((&r * &v).norm() - v.norm()).abs() <= 1e-12);
        }

        #[test]
        fn analytic_gradients_match_fd(x in prop::collection::vec(-2.0f64..2.0, 2..8), which in 0usize..4) {
            let p = Quadratic::new(QuadraticKind::ALL[which], x.len()).unwrap();
            assert_gradients_match_fd(&p, &x);
        }
    }
}
