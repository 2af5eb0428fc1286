//! Gradient ascent on the uncrowded hypervolume of a fixed-size solution set.

mod adam;
mod gamo;

pub use adam::{adam_step, AdamState, ADAM_B0, ADAM_B1, ADAM_B2, ADAM_EPS};
pub use gamo::{gamo_step, pairwise_extremes, GaMoState, GAMO_ALPHA, GAMO_BETA, GAMO_C};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gradient::{fd_mo_gradient, uhv_gradient, GradientOptions};
use crate::hypervolume::{classify, hypervolume_of, uncrowded_distance_total, ObjectiveMatrix};
use crate::metrics::{generational_distance, nondominated_count, ReferenceFront};
use crate::problems::{
    evaluate, evaluate_with_gradient, sample_initial_set, Bounds, EvaluationLedger, MoGradient,
    MoProblem, SolutionSet,
};
use crate::Objectives;

/// Clamps `x` componentwise into the box.
pub fn boundary_repair(x: &mut [f64], bounds: &Bounds) {
    for ((v, lo), hi) in x.iter_mut().zip(&bounds.lower).zip(&bounds.upper) {
        *v = v.clamp(*lo, *hi);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Adam,
    GaMo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradientMode {
    Analytic,
    /// Forward finite differences, costing `n` extra MO-evaluations per solution.
    FiniteDifference,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(Self::Adam),
            "gamo" => Ok(Self::GaMo),
            _ => Err(Error::Config(format!(
                "unknown optimizer {s:?} (expected adam or gamo)"
            ))),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Adam => "adam",
            Self::GaMo => "gamo",
        })
    }
}

impl FromStr for GradientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "fd" => Ok(Self::FiniteDifference),
            _ => Err(Error::Config(format!(
                "unknown gradient mode {s:?} (expected analytic or fd)"
            ))),
        }
    }
}

impl fmt::Display for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::FiniteDifference => "fd",
        })
    }
}

/// Initial step size: one percent of the largest initialization range, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Gamma0Policy {
    #[default]
    InitRange,
    Explicit(f64),
}

impl Gamma0Policy {
    pub fn value(self, init: &Bounds) -> f64 {
        match self {
            Self::InitRange => init.max_range() * 1e-2,
            Self::Explicit(v) => v,
        }
    }
}

impl FromStr for Gamma0Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "paper" {
            return Ok(Self::InitRange);
        }
        let v = s.strip_prefix("explicit:").unwrap_or(s);
        match v.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Ok(Self::Explicit(g)),
            _ => Err(Error::Config(format!(
                "gamma0 must be `paper` or `explicit:<positive number>`, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Gamma0Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InitRange => f.write_str("paper"),
            Self::Explicit(v) => write!(f, "explicit:{v}"),
        }
    }
}

/// Which iterations end up in [`RunTrace::rows`]. The final iteration is always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceSampling {
    Every,
    /// Every iteration up to 100, then whenever the evaluation count has grown by ≥1% since
    /// the last kept row.
    #[default]
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    /// Stop once the (largest) step size falls below this fraction of the init range.
    pub min_relative_step: f64,
    pub stall_iterations: u64,
    pub stall_tolerance: f64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            min_relative_step: 1e-12,
            stall_iterations: 500,
            stall_tolerance: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub optimizer: OptimizerKind,
    pub gradients: GradientMode,
    pub p: usize,
    /// MO-evaluation budget, initialization included.
    pub budget: u64,
    pub seed: u64,
    pub gamma0: Gamma0Policy,
    pub reference: Objectives,
    pub gradient_options: GradientOptions,
    pub convergence: Convergence,
    /// Stop after this many iterations even if budget remains.
    pub max_iterations: Option<u64>,
    pub sampling: TraceSampling,
    pub target_hv: Option<f64>,
    pub front: Option<Arc<ReferenceFront>>,
}

impl RunSpec {
    pub fn new(optimizer: OptimizerKind, gradients: GradientMode, p: usize, budget: u64) -> Self {
        Self {
            optimizer,
            gradients,
            p,
            budget,
            seed: 0,
            gamma0: Gamma0Policy::InitRange,
            reference: [11.0, 11.0],
            gradient_options: GradientOptions::default(),
            convergence: Convergence::default(),
            max_iterations: None,
            sampling: TraceSampling::Logarithmic,
            target_hv: None,
            front: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub evaluations: u64,
    pub uhv: f64,
    pub best_uhv: f64,
    /// HV of the best set by HV seen so far.
    pub best_hv: f64,
    pub delta_hv: Option<f64>,
    pub gd: Option<f64>,
    /// `|A_p|` of the best set by HV.
    pub nondominated: usize,
    /// Adam's `γ`, or GA-MO's largest `γ_i`, for the next step.
    pub step_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestSet {
    pub decisions: SolutionSet,
    pub objectives: Vec<Objectives>,
    pub hv: f64,
    pub uhv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Budget,
    IterationLimit,
    StepSize,
    Stalled,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Budget => "budget",
            Self::IterationLimit => "iteration-limit",
            Self::StepSize => "step-size",
            Self::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub iterations: u64,
    pub evaluations: u64,
    pub stop: StopReason,
    pub gamma0: f64,
    /// Best set by UHV.
    pub best_uhv: BestSet,
    /// Best set by HV, the one ΔHV, GD and `|A_p|` are reported for.
    pub best_hv: BestSet,
}

enum Scheme {
    Adam(AdamState),
    GaMo(GaMoState),
}

impl Scheme {
    fn step_size(&self) -> f64 {
        match self {
            Scheme::Adam(s) => s.gamma,
            Scheme::GaMo(s) => s.max_gamma(),
        }
    }

    // γ̄ for the finite-difference step.
    fn fd_scale(&self) -> f64 {
        match self {
            Scheme::Adam(s) => s.gamma,
            Scheme::GaMo(s) => s.total_gamma(),
        }
    }
}

struct Evaluated {
    y: ObjectiveMatrix,
    grads: Vec<MoGradient>,
    hv: f64,
    uhv: f64,
}

fn evaluate_all(
    problem: &dyn MoProblem,
    x: &SolutionSet,
    mode: GradientMode,
    reference: Objectives,
    ledger: &mut EvaluationLedger,
) -> Result<Evaluated> {
    let mut ys = Vec::with_capacity(x.len());
    let mut grads = Vec::new();
    for xi in x.solutions() {
        match mode {
            GradientMode::Analytic => {
                let (y, g) = evaluate_with_gradient(problem, xi, ledger)?;
                ys.push(y);
                grads.push(g);
            }
            GradientMode::FiniteDifference => ys.push(evaluate(problem, xi, ledger)?),
        }
    }
    let y = ObjectiveMatrix::new(ys, reference)?;
    let report = classify(&y);
    let hv = hypervolume_of(&y, &report);
    let uhv = hv - uncrowded_distance_total(&y, &report)?;
    Ok(Evaluated { y, grads, hv, uhv })
}

fn with_iteration(e: Error, t: u64) -> Error {
    match e {
        Error::Numeric { message, point } => Error::Numeric {
            message: format!("iteration {t}: {message}"),
            point,
        },
        other => other,
    }
}

/// Runs one optimizer from a seeded random initial set until the budget is spent or a
/// convergence criterion fires.
pub fn run(problem: &dyn MoProblem, spec: &RunSpec) -> Result<RunTrace> {
    let p = spec.p;
    let n = problem.dim();
    if p == 0 {
        return Err(Error::Config("p must be at least 1".into()));
    }
    if spec.budget < p as u64 {
        return Err(Error::Config(format!(
            "budget {} cannot cover the {p} initial evaluations",
            spec.budget
        )));
    }
    if !spec.reference.iter().all(|v| v.is_finite()) {
        return Err(Error::Config("reference point must be finite".into()));
    }
    if spec.gradients == GradientMode::Analytic && !problem.has_analytic_gradients() {
        return Err(Error::Config(format!(
            "{} has no analytic gradients; use finite differences",
            problem.id()
        )));
    }
    let init_range = problem.init_bounds().max_range();
    let gamma0 = spec.gamma0.value(problem.init_bounds());
    let mut scheme = match spec.optimizer {
        OptimizerKind::Adam => Scheme::Adam(AdamState::new(n * p, gamma0)?),
        OptimizerKind::GaMo => Scheme::GaMo(GaMoState::new(p, n, gamma0)?),
    };
    let iteration_cost = match spec.gradients {
        GradientMode::Analytic => p as u64,
        GradientMode::FiniteDifference => (p * (1 + n)) as u64,
    };

    let mut ledger = EvaluationLedger::new();
    let mut x = sample_initial_set(problem, p, spec.seed)?;
    let mut current = evaluate_all(problem, &x, spec.gradients, spec.reference, &mut ledger)
        .map_err(|e| with_iteration(e, 0))?;

    let snapshot = |x: &SolutionSet, e: &Evaluated| BestSet {
        decisions: x.clone(),
        objectives: e.y.points().to_vec(),
        hv: e.hv,
        uhv: e.uhv,
    };
    let mut best_uhv = snapshot(&x, &current);
    let mut best_hv = best_uhv.clone();
    let mut recorder = Recorder::new(spec);
    let mut iteration = 0u64;
    recorder.record(
        false,
        iteration,
        ledger.count(),
        &current,
        &best_uhv,
        &best_hv,
        scheme.step_size(),
    );

    let mut stall_reference = best_uhv.uhv;
    let mut last_progress = 0u64;
    let stop = loop {
        if spec.max_iterations.is_some_and(|m| iteration >= m) {
            break StopReason::IterationLimit;
        }
        if ledger.count() + iteration_cost > spec.budget {
            break StopReason::Budget;
        }
        if scheme.step_size() < spec.convergence.min_relative_step * init_range {
            break StopReason::StepSize;
        }
        if iteration - last_progress >= spec.convergence.stall_iterations {
            break StopReason::Stalled;
        }

        let t = iteration;
        let grads = match spec.gradients {
            GradientMode::Analytic => std::mem::take(&mut current.grads),
            GradientMode::FiniteDifference => {
                let h = (1e-6 * scheme.fd_scale()).max(1e-12);
                x.solutions()
                    .zip(current.y.points())
                    .map(|(xi, yi)| fd_mo_gradient(problem, xi, *yi, h, &mut ledger))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| with_iteration(e, t))?
            }
        };
        let grad = uhv_gradient(&current.y, &grads, &spec.gradient_options)
            .map_err(|e| with_iteration(e, t))?;
        let next_x = match &mut scheme {
            Scheme::Adam(s) => adam_step(s, &x, &grad.directions, problem.bounds()),
            Scheme::GaMo(s) => gamo_step(s, &x, &grad, problem.bounds()),
        }
        .map_err(|e| with_iteration(e, t))?;
        debug_assert!(next_x.solutions().all(|xi| problem.bounds().contains(xi)));

        let next = evaluate_all(
            problem,
            &next_x,
            spec.gradients,
            spec.reference,
            &mut ledger,
        )
        .map_err(|e| with_iteration(e, t + 1))?;
        if let Scheme::Adam(s) = &mut scheme {
            s.adapt(current.uhv, next.uhv);
        }
        x = next_x;
        current = next;
        iteration += 1;

        if current.uhv > best_uhv.uhv {
            best_uhv = snapshot(&x, &current);
        }
        if current.hv > best_hv.hv {
            best_hv = snapshot(&x, &current);
        }
        if best_uhv.uhv >= stall_reference + spec.convergence.stall_tolerance {
            stall_reference = best_uhv.uhv;
            last_progress = iteration;
        }
        recorder.record(
            false,
            iteration,
            ledger.count(),
            &current,
            &best_uhv,
            &best_hv,
            scheme.step_size(),
        );
    };
    if recorder
        .rows
        .last()
        .is_none_or(|r| r.iteration != iteration)
    {
        recorder.record(
            true,
            iteration,
            ledger.count(),
            &current,
            &best_uhv,
            &best_hv,
            scheme.step_size(),
        );
    }

    Ok(RunTrace {
        rows: recorder.rows,
        iterations: iteration,
        evaluations: ledger.count(),
        stop,
        gamma0,
        best_uhv,
        best_hv,
    })
}

struct Recorder<'a> {
    spec: &'a RunSpec,
    rows: Vec<TraceRow>,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a RunSpec) -> Self {
        Self {
            spec,
            rows: Vec::new(),
        }
    }

    fn wanted(&self, iteration: u64, evaluations: u64) -> bool {
        match self.spec.sampling {
            TraceSampling::Every => true,
            TraceSampling::Logarithmic => {
                iteration <= 100
                    || self
                        .rows
                        .last()
                        .is_none_or(|r| evaluations as f64 >= 1.01 * r.evaluations as f64)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        force: bool,
        iteration: u64,
        evaluations: u64,
        current: &Evaluated,
        best_uhv: &BestSet,
        best_hv: &BestSet,
        step_size: f64,
    ) {
        if !force && !self.wanted(iteration, evaluations) {
            return;
        }
        let a = ObjectiveMatrix::new(best_hv.objectives.clone(), self.spec.reference)
            .expect("objectives were validated on evaluation");
        self.rows.push(TraceRow {
            iteration,
            evaluations,
            uhv: current.uhv,
            best_uhv: best_uhv.uhv,
            best_hv: best_hv.hv,
            delta_hv: self.spec.target_hv.map(|t| t - best_hv.hv),
            gd: self
                .spec
                .front
                .as_ref()
                .map(|f| generational_distance(&a, f)),
            nondominated: nondominated_count(&a),
            step_size,
        });
    }
}
