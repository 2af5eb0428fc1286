use super::boundary_repair;
use crate::error::{Error, Result};
use crate::problems::{Bounds, SolutionSet};

pub const ADAM_B0: f64 = 0.9;
pub const ADAM_B1: f64 = 0.999;
pub const ADAM_B2: f64 = 0.99;
pub const ADAM_EPS: f64 = 1e-16;

/// Adam moments over the concatenated vector `X ∈ R^{np}` plus one global step size.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
    /// Number of steps taken so far.
    pub t: u32,
}

impl AdamState {
    pub fn new(len: usize, gamma0: f64) -> Result<Self> {
        if gamma0 <= 0.0 || !gamma0.is_finite() {
            return Err(Error::Config(format!(
                "initial step size must be positive, got {gamma0}"
            )));
        }
        Ok(Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            gamma: gamma0,
            t: 0,
        })
    }

    /// Shrinks the step size when the last step did not improve `g`.
    pub fn adapt(&mut self, g_old: f64, g_new: f64) {
        if g_new <= g_old {
            self.gamma *= ADAM_B2;
        }
    }
}

/// One bias-corrected Adam step along `grad` (the concatenated ascent direction), followed
/// by boundary repair. The step-size update happens separately in [`AdamState::adapt`], once
/// the new set has been evaluated.
pub fn adam_step(
    state: &mut AdamState,
    x: &SolutionSet,
    grad: &[f64],
    bounds: &Bounds,
) -> Result<SolutionSet> {
    let len = x.as_flat().len();
    if grad.len() != len || state.m.len() != len {
        return Err(Error::InvalidArgument(format!(
            "gradient of length {} for a set of {len} values",
            grad.len()
        )));
    }
    let exponent = state.t as i32 + 1;
    let bc0 = 1.0 - ADAM_B0.powi(exponent);
    let bc1 = 1.0 - ADAM_B1.powi(exponent);
    let mut next = x.clone();
    for (k, xk) in next.as_flat_mut().iter_mut().enumerate() {
        let g = grad[k];
        state.m[k] = ADAM_B0 * state.m[k] + (1.0 - ADAM_B0) * g;
        state.v[k] = ADAM_B1 * state.v[k] + (1.0 - ADAM_B1) * g * g;
        *xk += state.gamma * (state.m[k] / bc0) / ((state.v[k] / bc1).sqrt() + ADAM_EPS);
    }
    state.t += 1;
    for i in 0..next.len() {
        let xi = next.solution_mut(i);
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(
                format!(
                    "Adam step {} produced a non-finite iterate for solution {i}",
                    state.t
                ),
                xi,
            ));
        }
        boundary_repair(xi, bounds);
    }
    Ok(next)
}
