//! Bi-objective benchmark problems and MO-evaluation accounting.
//!
//! A problem maps a decision vector `x ∈ R^n` to two objectives `(f0, f1)`, both to be
//! minimized. The quadratic problems expose analytic gradients; the WFG problems do not
//! and are optimized with finite differences.

mod quadratic;
mod wfg;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::Objectives;

pub use quadratic::{Quadratic, QuadraticKind};
pub use wfg::{Wfg, WFG_DEFAULT_K, WFG_DEFAULT_N};

/// Box constraints, one `[lower, upper]` interval per dimension. Infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "bounds have {} lower and {} upper entries",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) =
            (0..lower.len()).find(|&j| lower[j].partial_cmp(&upper[j]).is_none_or(|o| o.is_gt()))
        {
            return Err(Error::InvalidArgument(format!(
                "bound {j} is empty: [{}, {}]",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Self {
        Self {
            lower: vec![lower; n],
            upper: vec![upper; n],
        }
    }

    pub fn unbounded(n: usize) -> Self {
        Self::uniform(n, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn contains_bounds(&self, other: &Bounds) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|j| self.lower[j] <= other.lower[j] && other.upper[j] <= self.upper[j])
    }

    /// Largest interval width over all dimensions.
    pub fn max_range(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    pub fn is_unbounded(&self) -> bool {
        self.lower.iter().all(|v| *v == f64::NEG_INFINITY)
            && self.upper.iter().all(|v| *v == f64::INFINITY)
    }
}

/// Gradients of both objectives at one decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MoGradient {
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl MoGradient {
    pub fn zeros(n: usize) -> Self {
        Self {
            f0: vec![0.0; n],
            f1: vec![0.0; n],
        }
    }
}

/// A bi-objective minimization problem on a box-constrained decision space.
///
/// Implementations are immutable and shareable across threads; bookkeeping happens in
/// [`EvaluationLedger`] through [`evaluate`] and [`evaluate_with_gradient`].
pub trait MoProblem: fmt::Debug + Send + Sync {
    /// String identifier, e.g. `bisphere` or `wfg3`.
    fn id(&self) -> &str;

    fn dim(&self) -> usize;

    /// Constraint box of the search space.
    fn bounds(&self) -> &Bounds;

    /// Box the initial solution set is sampled from.
    fn init_bounds(&self) -> &Bounds;

    fn has_analytic_gradients(&self) -> bool {
        false
    }

    /// Objective values without any validation or counting.
    fn objectives(&self, x: &[f64]) -> Objectives;

    /// Analytic objective gradients, or `None` for black-box problems.
    fn objective_gradients(&self, _x: &[f64]) -> Option<MoGradient> {
        None
    }
}

/// Counts MO-evaluations: one per computation of `f0, f1` (and, when available, their
/// gradients) at a single decision vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvaluationLedger {
    mo_evaluations: u64,
}

impl EvaluationLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.mo_evaluations
    }

    fn record(&mut self) {
        self.mo_evaluations += 1;
    }
}

fn check_input(problem: &dyn MoProblem, x: &[f64]) -> Result<()> {
    if x.len() != problem.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} expects {} decision variables, got {}",
            problem.id(),
            problem.dim(),
            x.len()
        )));
    }
    if !problem.bounds().contains(x) {
        return Err(Error::InvalidArgument(format!(
            "decision vector outside the constraint box of {}: {x:?}",
            problem.id()
        )));
    }
    Ok(())
}

/// Evaluates both objectives at `x`, costing one MO-evaluation.
pub fn evaluate(
    problem: &dyn MoProblem,
    x: &[f64],
    ledger: &mut EvaluationLedger,
) -> Result<Objectives> {
    check_input(problem, x)?;
    let y = problem.objectives(x);
    ledger.record();
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::numeric(
            format!("{} returned objectives {y:?}", problem.id()),
            x,
        ));
    }
    Ok(y)
}

/// Analytic gradients at `x`. Not counted separately: see [`evaluate_with_gradient`].
pub fn gradient(problem: &dyn MoProblem, x: &[f64]) -> Result<MoGradient> {
    check_input(problem, x)?;
    let g = problem
        .objective_gradients(x)
        .ok_or_else(|| Error::Unsupported(format!("{} has no analytic gradients", problem.id())))?;
    if !g.f0.iter().chain(&g.f1).all(|v| v.is_finite()) {
        return Err(Error::numeric(
            format!("{} returned a non-finite gradient", problem.id()),
            x,
        ));
    }
    Ok(g)
}

/// Objectives and analytic gradients at `x` as a single MO-evaluation.
pub fn evaluate_with_gradient(
    problem: &dyn MoProblem,
    x: &[f64],
    ledger: &mut EvaluationLedger,
) -> Result<(Objectives, MoGradient)> {
    let g = gradient(problem, x)?;
    let y = evaluate(problem, x, ledger)?;
    Ok((y, g))
}

/// A fixed-size set of `p` decision vectors stored as one concatenated vector in `R^{np}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    dim: usize,
    decisions: Vec<f64>,
}

impl SolutionSet {
    pub fn from_flat(dim: usize, decisions: Vec<f64>) -> Result<Self> {
        if dim == 0 || decisions.is_empty() || !decisions.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "cannot split {} values into solutions of dimension {dim}",
                decisions.len()
            )));
        }
        Ok(Self { dim, decisions })
    }

    pub fn from_solutions(solutions: &[Vec<f64>]) -> Result<Self> {
        let dim = solutions.first().map_or(0, Vec::len);
        if solutions.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidArgument(
                "solutions differ in dimension".into(),
            ));
        }
        Self::from_flat(dim, solutions.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of solutions `p`.
    pub fn len(&self) -> usize {
        self.decisions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn solution(&self, i: usize) -> &[f64] {
        &self.decisions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn solution_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.decisions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn solutions(&self) -> impl Iterator<Item = &[f64]> {
        self.decisions.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.decisions
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.decisions
    }
}

/// Evaluates every solution of `set`, costing exactly `p` MO-evaluations.
pub fn evaluate_set(
    problem: &dyn MoProblem,
    set: &SolutionSet,
    ledger: &mut EvaluationLedger,
) -> Result<Vec<Objectives>> {
    set.solutions()
        .map(|x| evaluate(problem, x, ledger))
        .collect()
}

/// Samples `p` solutions uniformly from the problem's initialization box.
pub fn sample_initial_set(problem: &dyn MoProblem, p: usize, seed: u64) -> Result<SolutionSet> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let init = problem.init_bounds();
    if !init.lower.iter().chain(&init.upper).all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{} has an unbounded initialization box",
            problem.id()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim();
    let mut decisions = Vec::with_capacity(n * p);
    for _ in 0..p {
        for j in 0..n {
            let (lo, hi) = (init.lower[j], init.upper[j]);
            decisions.push(if lo < hi {
                rng.random_range(lo..=hi)
            } else {
                lo
            });
        }
    }
    SolutionSet::from_flat(n, decisions)
}

/// All recognised problem identifiers.
pub const PROBLEM_IDS: [&str; 13] = [
    "bisphere",
    "sphere-rot-ellipsoid",
    "concave-bisphere",
    "sphere-rosenbrock",
    "wfg1",
    "wfg2",
    "wfg3",
    "wfg4",
    "wfg5",
    "wfg6",
    "wfg7",
    "wfg8",
    "wfg9",
];

/// Default decision-space dimension for a problem identifier.
pub fn default_dim(id: &str) -> usize {
    if id.starts_with("wfg") {
        WFG_DEFAULT_N
    } else {
        10
    }
}

/// Builds a problem from its string identifier. `n = None` selects the default dimension.
pub fn problem_from_id(id: &str, n: Option<usize>) -> Result<Box<dyn MoProblem>> {
    let n = n.unwrap_or_else(|| default_dim(id));
    if let Some(kind) = QuadraticKind::from_id(id) {
        return Ok(Box::new(Quadratic::new(kind, n)?));
    }
    if let Some(variant) = id.strip_prefix("wfg").and_then(|s| s.parse::<u8>().ok()) {
        return Ok(Box::new(Wfg::new(variant, WFG_DEFAULT_K, n)?));
    }
    Err(Error::InvalidArgument(format!(
        "unknown problem '{id}', expected one of {}",
        PROBLEM_IDS.join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_counts_single_evaluations() {
        let problem = Quadratic::new(QuadraticKind::BiSphere, 3).unwrap();
        let mut ledger = EvaluationLedger::new();
        evaluate(&problem, &[0.0, 0.0, 0.0], &mut ledger).unwrap();
        evaluate_with_gradient(&problem, &[1.0, 0.0, 0.0], &mut ledger).unwrap();
        gradient(&problem, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(ledger.count(), 2);
    }

    #[test]
    fn evaluating_a_set_costs_p() {
        let problem = problem_from_id("wfg4", None).unwrap();
        let set = sample_initial_set(problem.as_ref(), 7, 3).unwrap();
        let mut ledger = EvaluationLedger::new();
        let ys = evaluate_set(problem.as_ref(), &set, &mut ledger).unwrap();
        assert_eq!(ys.len(), 7);
        assert_eq!(ledger.count(), 7);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let problem = Quadratic::new(QuadraticKind::BiSphere, 3).unwrap();
        let mut ledger = EvaluationLedger::new();
        let err = evaluate(&problem, &[0.0, 0.0], &mut ledger).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert_eq!(ledger.count(), 0);
    }

    #[test]
    fn out_of_box_is_rejected() {
        let problem = problem_from_id("wfg1", None).unwrap();
        let mut x = vec![0.5; 24];
        x[0] = -0.1;
        let err = evaluate(problem.as_ref(), &x, &mut EvaluationLedger::new()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn gradient_on_wfg_is_unsupported() {
        let problem = problem_from_id("wfg2", None).unwrap();
        let x = vec![1.0; 24];
        assert!(matches!(
            gradient(problem.as_ref(), &x),
            Err(Error::Unsupported(_))
        ));
    }

    #[derive(Debug)]
    struct Exploding(Bounds);

    impl MoProblem for Exploding {
        fn id(&self) -> &str {
            "exploding"
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
            [1.0 / x[0], 0.0]
        }
    }

    #[test]
    fn non_finite_objectives_report_the_point() {
        let problem = Exploding(Bounds::uniform(1, -1.0, 1.0));
        match evaluate(&problem, &[0.0], &mut EvaluationLedger::new()) {
            Err(Error::Numeric { point, .. }) => assert_eq!(point, vec![0.0]),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn initial_sets_respect_the_init_box() {
        let p0 = problem_from_id("bisphere", Some(10)).unwrap();
        let s = sample_initial_set(p0.as_ref(), 9, 11).unwrap();
        assert!(s.as_flat().iter().all(|v| (-2.0..=2.0).contains(v)));

        let p3 = problem_from_id("sphere-rosenbrock", Some(10)).unwrap();
        let s = sample_initial_set(p3.as_ref(), 9, 11).unwrap();
        assert!(s.as_flat().iter().all(|v| (0.0..=2.0).contains(v)));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let problem = problem_from_id("concave-bisphere", Some(4)).unwrap();
        let a = sample_initial_set(problem.as_ref(), 5, 42).unwrap();
        let b = sample_initial_set(problem.as_ref(), 5, 42).unwrap();
        let c = sample_initial_set(problem.as_ref(), 5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sampling_zero_solutions_fails() {
        let problem = problem_from_id("bisphere", Some(2)).unwrap();
        assert!(sample_initial_set(problem.as_ref(), 0, 1).is_err());
    }

    #[test]
    fn init_box_inside_constraint_box_for_all_problems() {
        for id in PROBLEM_IDS {
            let problem = problem_from_id(id, None).unwrap();
            assert!(
                problem.bounds().contains_bounds(problem.init_bounds()),
                "{id}"
            );
        }
    }

    #[test]
    fn unknown_problem_id() {
        assert!(problem_from_id("zdt1", None).is_err());
        assert!(problem_from_id("wfg10", None).is_err());
    }
}
