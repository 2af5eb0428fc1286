//! The nine WFG problems, instantiated with two objectives.
//!
//! Decision variables live in `z_i ∈ [0, 2(i+1)]` (0-based `i`). The first `k` variables are
//! position parameters, the remaining `l = n − k` distance parameters.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Bounds, MoProblem};
use crate::error::{Error, Result};
use crate::Objectives;

pub const WFG_DEFAULT_K: usize = 4;
pub const WFG_DEFAULT_N: usize = 24;

const IDS: [&str; 9] = [
    "wfg1", "wfg2", "wfg3", "wfg4", "wfg5", "wfg6", "wfg7", "wfg8", "wfg9",
];

#[derive(Debug, Clone)]
pub struct Wfg {
    variant: u8,
    k: usize,
    bounds: Bounds,
}

impl Wfg {
    pub fn new(variant: u8, k: usize, n: usize) -> Result<Self> {
        if !(1..=9).contains(&variant) {
            return Err(Error::InvalidArgument(format!(
                "WFG variant must be 1..=9, got {variant}"
            )));
        }
        if k == 0 || n <= k {
            return Err(Error::InvalidArgument(format!(
                "WFG needs 1 <= k < n, got k={k}, n={n}"
            )));
        }
        if matches!(variant, 2 | 3) && !(n - k).is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "wfg{variant} needs an even number of distance parameters, got {}",
                n - k
            )));
        }
        let upper = (1..=n).map(|i| 2.0 * i as f64).collect();
        Ok(Self {
            variant,
            k,
            bounds: Bounds::new(vec![0.0; n], upper)?,
        })
    }

    pub fn variant(&self) -> u8 {
        self.variant
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Point on the Pareto front for the (transformed) position value `x ∈ [0, 1]`.
    pub fn front_point(&self, x: f64) -> Objectives {
        shape(self.variant, [x, 0.0])
    }

    /// Decision vector mapping onto the front, for position parameters in `[0, 1]`.
    ///
    /// Only valid for the variants whose optimal distance parameters are all `0.35`
    /// (WFG1–7); WFG8 and WFG9 have position-dependent optima.
    pub fn optimal_solution(&self, position: &[f64]) -> Option<Vec<f64>> {
        if self.variant >= 8 || position.len() != self.k {
            return None;
        }
        let n = self.dim();
        Some(
            (0..n)
                .map(|i| {
                    let v = if i < self.k { position[i] } else { 0.35 };
                    v * 2.0 * (i + 1) as f64
                })
                .collect(),
        )
    }

    fn transform(&self, z: &[f64]) -> [f64; 2] {
        let k = self.k;
        let y: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(i, zi)| clamp01(zi / (2.0 * (i + 1) as f64)))
            .collect();
        match self.variant {
            1 => {
                let y = linear_tail(&y, k);
                let y: Vec<f64> = y
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if i < k { v } else { b_flat(v, 0.8, 0.75, 0.85) })
                    .collect();
                let y: Vec<f64> = y.iter().map(|&v| b_poly(v, 0.02)).collect();
                let w: Vec<f64> = (1..=y.len()).map(|i| 2.0 * i as f64).collect();
                [r_sum(&y[..k], &w[..k]), r_sum(&y[k..], &w[k..])]
            }
            2 | 3 => {
                let y = linear_tail(&y, k);
                let y = pairwise_nonsep(&y, k);
                sum_groups(&y, k)
            }
            4 => {
                let y: Vec<f64> = y.iter().map(|&v| s_multi(v, 30.0, 10.0, 0.35)).collect();
                sum_groups(&y, k)
            }
            5 => {
                let y: Vec<f64> = y.iter().map(|&v| s_decept(v, 0.35, 0.001, 0.05)).collect();
                sum_groups(&y, k)
            }
            6 => {
                let y = linear_tail(&y, k);
                nonsep_groups(&y, k)
            }
            7 => {
                let n = y.len();
                let mut t = y.clone();
                for i in 0..k {
                    let u = mean(&y[i + 1..n]);
                    t[i] = b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
                }
                let t = linear_tail(&t, k);
                sum_groups(&t, k)
            }
            8 => {
                let n = y.len();
                let mut t = y.clone();
                for i in k..n {
                    let u = mean(&y[..i]);
                    t[i] = b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
                }
                let t = linear_tail(&t, k);
                sum_groups(&t, k)
            }
            9 => {
                let n = y.len();
                let mut t = y.clone();
                for i in 0..n - 1 {
                    let u = mean(&y[i + 1..n]);
                    t[i] = b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
                }
                let t: Vec<f64> = t
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        if i < k {
                            s_decept(v, 0.35, 0.001, 0.05)
                        } else {
                            s_multi(v, 30.0, 95.0, 0.35)
                        }
                    })
                    .collect();
                nonsep_groups(&t, k)
            }
            _ => unreachable!("variant validated in constructor"),
        }
    }
}

impl MoProblem for Wfg {
    fn id(&self) -> &str {
        IDS[(self.variant - 1) as usize]
    }

    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn init_bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn objectives(&self, z: &[f64]) -> Objectives {
        let t = self.transform(z);
        // With two objectives the degeneracy constant A_1 is 1 for every variant.
        let x = [t[1].max(1.0) * (t[0] - 0.5) + 0.5, t[1]];
        shape(self.variant, x)
    }
}

fn shape(variant: u8, x: [f64; 2]) -> Objectives {
    let h = match variant {
        1 => [1.0 - (x[0] * FRAC_PI_2).cos(), mixed(x[0], 5.0, 1.0)],
        2 => [1.0 - (x[0] * FRAC_PI_2).cos(), disc(x[0], 5.0, 1.0, 1.0)],
        3 => [x[0], 1.0 - x[0]],
        _ => [(x[0] * FRAC_PI_2).sin(), (x[0] * FRAC_PI_2).cos()],
    };
    let h = [clamp01(h[0]), clamp01(h[1])];
    [x[1] + 2.0 * h[0], x[1] + 4.0 * h[1]]
}

// Rounding noise can push values marginally outside [0, 1].
fn clamp01(v: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if (-EPS..=0.0).contains(&v) {
        0.0
    } else if (1.0..=1.0 + EPS).contains(&v) {
        1.0
    } else {
        v
    }
}

fn mean(y: &[f64]) -> f64 {
    clamp01(y.iter().sum::<f64>() / y.len() as f64)
}

fn b_poly(y: f64, alpha: f64) -> f64 {
    clamp01(y.powf(alpha))
}

fn b_flat(y: f64, a: f64, b: f64, c: f64) -> f64 {
    let t1 = (y - b).floor().min(0.0) * a * (b - y) / b;
    let t2 = (c - y).floor().min(0.0) * (1.0 - a) * (y - c) / (1.0 - c);
    clamp01(a + t1 - t2)
}

fn b_param(y: f64, u: f64, a: f64, b: f64, c: f64) -> f64 {
    let v = a - (1.0 - 2.0 * u) * ((0.5 - u).floor() + a).abs();
    clamp01(y.powf(b + (c - b) * v))
}

fn s_linear(y: f64, a: f64) -> f64 {
    clamp01((y - a).abs() / ((a - y).floor() + a).abs())
}

fn s_decept(y: f64, a: f64, b: f64, c: f64) -> f64 {
    let t1 = (y - a + b).floor() * (1.0 - c + (a - b) / b) / (a - b);
    let t2 = (a + b - y).floor() * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b);
    clamp01(1.0 + ((y - a).abs() - b) * (t1 + t2 + 1.0 / b))
}

fn s_multi(y: f64, a: f64, b: f64, c: f64) -> f64 {
    let t1 = (y - c).abs() / (2.0 * ((c - y).floor() + c));
    let t2 = (4.0 * a + 2.0) * PI * (0.5 - t1);
    clamp01((1.0 + t2.cos() + 4.0 * b * t1 * t1) / (b + 2.0))
}

fn r_sum(y: &[f64], w: &[f64]) -> f64 {
    let num: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum();
    clamp01(num / w.iter().sum::<f64>())
}

fn r_nonsep(y: &[f64], a: usize) -> f64 {
    let len = y.len();
    let mut num = 0.0;
    for j in 0..len {
        num += y[j];
        for k in 0..a - 1 {
            num += (y[j] - y[(j + k + 1) % len]).abs();
        }
    }
    let half = (a as f64 / 2.0).ceil();
    let den = len as f64 * half * (1.0 + 2.0 * a as f64 - 2.0 * half) / a as f64;
    clamp01(num / den)
}

fn mixed(x: f64, a: f64, alpha: f64) -> f64 {
    let tmp = 2.0 * a * PI;
    clamp01((1.0 - x - (tmp * x + FRAC_PI_2).cos() / tmp).powf(alpha))
}

fn disc(x: f64, a: f64, alpha: f64, beta: f64) -> f64 {
    let tmp = a * x.powf(beta) * PI;
    clamp01(1.0 - x.powf(alpha) * tmp.cos().powi(2))
}

// s_linear(·, 0.35) on the distance parameters.
fn linear_tail(y: &[f64], k: usize) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, &v)| if i < k { v } else { s_linear(v, 0.35) })
        .collect()
}

// r_nonsep over consecutive pairs of distance parameters (WFG2, WFG3).
fn pairwise_nonsep(y: &[f64], k: usize) -> Vec<f64> {
    let mut t = y[..k].to_vec();
    t.extend(y[k..].chunks_exact(2).map(|pair| r_nonsep(pair, 2)));
    t
}

fn sum_groups(y: &[f64], k: usize) -> [f64; 2] {
    [mean(&y[..k]), mean(&y[k..])]
}

fn nonsep_groups(y: &[f64], k: usize) -> [f64; 2] {
    [r_nonsep(&y[..k], k), r_nonsep(&y[k..], y.len() - k)]
}
