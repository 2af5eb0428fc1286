use super::boundary_repair;
use crate::error::{Error, Result};
use crate::gradient::UhvGradient;
use crate::problems::{Bounds, SolutionSet};

pub const GAMO_C: f64 = 0.1;
pub const GAMO_ALPHA: f64 = 0.7;
pub const GAMO_BETA: f64 = 0.7;

/// Per-solution step sizes, previous unit directions and direction momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct GaMoState {
    pub gamma: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub momentum: Vec<f64>,
    /// `γ^UB` of the most recent step.
    pub gamma_ub: f64,
}

impl GaMoState {
    pub fn new(p: usize, n: usize, gamma0: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Config(format!(
                "GA-MO needs at least 2 solutions for its step-size bound, got p={p}"
            )));
        }
        if gamma0 <= 0.0 || !gamma0.is_finite() {
            return Err(Error::Config(format!(
                "initial step size must be positive, got {gamma0}"
            )));
        }
        Ok(Self {
            gamma: vec![gamma0; p],
            directions: vec![vec![0.0; n]; p],
            momentum: vec![0.0; p],
            gamma_ub: f64::INFINITY,
        })
    }

    pub fn max_gamma(&self) -> f64 {
        self.gamma.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_gamma(&self) -> f64 {
        self.gamma.iter().sum()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Smallest and largest pairwise distance between solutions.
pub fn pairwise_extremes(x: &SolutionSet) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = distance(x.solution(i), x.solution(j));
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

pub fn gamo_step(
    state: &mut GaMoState,
    x: &SolutionSet,
    grad: &UhvGradient,
    bounds: &Bounds,
) -> Result<SolutionSet> {
    let p = x.len();
    if p < 2 {
        return Err(Error::Config("GA-MO needs at least 2 solutions".into()));
    }
    if grad.len() != p || state.gamma.len() != p || grad.dim() != x.dim() {
        return Err(Error::InvalidArgument(
            "gradient and state do not match the solution set".into(),
        ));
    }
    let (d_min, d_max) = pairwise_extremes(x);
    let ub = GAMO_BETA * (d_max + d_min) / 2.0;
    state.gamma_ub = ub;

    let mut next = x.clone();
    for i in 0..p {
        let g = grad.direction(i);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n_i: Vec<f64> = if norm > 0.0 {
            g.iter().map(|v| v / norm).collect()
        } else {
            vec![0.0; g.len()]
        };
        let inner: f64 = state.directions[i]
            .iter()
            .zip(&n_i)
            .map(|(a, b)| a * b)
            .sum();
        state.momentum[i] = (1.0 - GAMO_C) * state.momentum[i] + GAMO_C * inner;
        state.gamma[i] = ub.min(state.gamma[i] * (GAMO_ALPHA * state.momentum[i]).exp());

        let xi = next.solution_mut(i);
        for (v, d) in xi.iter_mut().zip(&n_i) {
            *v += state.gamma[i] * d;
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(
                format!("GA-MO step produced a non-finite iterate for solution {i}"),
                xi,
            ));
        }
        boundary_repair(xi, bounds);
        state.directions[i] = n_i;
    }
    Ok(next)
}
