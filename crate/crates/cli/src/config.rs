use std::path::PathBuf;
use std::sync::Arc;

use uhv_core::gradient::GradientOptions;
use uhv_core::metrics::{default_reference_front, ReferenceFront, TargetTable};
use uhv_core::optimizers::{
    Convergence, Gamma0Policy, GradientMode, OptimizerKind, RunSpec, TraceSampling,
};
use uhv_core::problems::{problem_from_id, MoProblem};
use uhv_core::Objectives;

/// Failure of a CLI command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input files (exit 2).
    Usage(String),
    /// At least one run failed (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

pub const VARY_NAMES: [&str; 8] = [
    "problem",
    "n",
    "p",
    "optimizer",
    "gradients",
    "budget",
    "seed",
    "gamma0",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub n: usize,
    pub p: usize,
    pub optimizer: OptimizerKind,
    pub gradients: GradientMode,
    pub budget: u64,
    pub reference: Objectives,
    pub gamma0: Gamma0Policy,
    pub seed: u64,
    pub reps: usize,
    pub out_dir: PathBuf,
    pub sampling: TraceSampling,
    /// Overrides the shipped target table.
    pub target_hv: Option<f64>,
    pub gd: bool,
}

fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for {name}")))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if !self.reference.iter().all(|v| v.is_finite()) {
            return usage(format!(
                "reference point {:?} must be finite",
                self.reference
            ));
        }
        if self.p == 0 {
            return usage("--p must be at least 1".into());
        }
        if self.budget < self.p as u64 {
            return usage(format!(
                "--budget {} is smaller than --p {}; the initial set alone costs p evaluations",
                self.budget, self.p
            ));
        }
        if self.reps == 0 {
            return usage("--reps must be at least 1".into());
        }
        if self.optimizer == OptimizerKind::GaMo && self.p < 2 {
            return usage("gamo needs --p of at least 2".into());
        }
        let problem = self.problem()?;
        if self.gradients == GradientMode::Analytic && !problem.has_analytic_gradients() {
            return usage(format!(
                "{} has no analytic gradients; use --gradients fd",
                self.problem
            ));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Box<dyn MoProblem>, CliError> {
        problem_from_id(&self.problem, Some(self.n)).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Applies one `--vary name=value` setting.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        match name {
            "problem" => self.problem = value.to_string(),
            "n" => self.n = parse(name, value)?,
            "p" => self.p = parse(name, value)?,
            "optimizer" => self.optimizer = parse(name, value)?,
            "gradients" => self.gradients = parse(name, value)?,
            "budget" => self.budget = parse(name, value)?,
            "seed" => self.seed = parse(name, value)?,
            "gamma0" => self.gamma0 = parse(name, value)?,
            _ => {
                return Err(CliError::Usage(format!(
                    "cannot vary {name:?}; expected one of {}",
                    VARY_NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn tag(&self, seed: u64) -> String {
        let gamma0 = match self.gamma0 {
            Gamma0Policy::InitRange => String::new(),
            Gamma0Policy::Explicit(v) => format!("_g{v:e}"),
        };
        format!(
            "{}_n{}_p{}_{}_{}_b{}{gamma0}_s{}",
            self.problem, self.n, self.p, self.optimizer, self.gradients, self.budget, seed
        )
    }

    pub fn target_hv(&self) -> Option<(f64, &'static str)> {
        if let Some(t) = self.target_hv {
            return Some((t, "command-line"));
        }
        TargetTable::builtin()
            .lookup(&self.problem, self.n, self.p)
            .map(|t| (t, "shipped-table"))
    }

    pub fn reference_front(&self) -> Result<Option<Arc<ReferenceFront>>, CliError> {
        if !self.gd {
            return Ok(None);
        }
        default_reference_front(&self.problem, self.n)
            .map(|f| f.map(Arc::new))
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn spec(&self, seed: u64, front: Option<Arc<ReferenceFront>>) -> RunSpec {
        RunSpec {
            optimizer: self.optimizer,
            gradients: self.gradients,
            p: self.p,
            budget: self.budget,
            seed,
            gamma0: self.gamma0,
            reference: self.reference,
            gradient_options: GradientOptions::default(),
            convergence: Convergence::default(),
            max_iterations: None,
            sampling: self.sampling,
            target_hv: self.target_hv().map(|t| t.0),
            front,
        }
    }

    /// Key/value pairs echoed into output metadata.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("problem", self.problem.clone()),
            ("n", self.n.to_string()),
            ("p", self.p.to_string()),
            ("optimizer", self.optimizer.to_string()),
            ("gradients", self.gradients.to_string()),
            ("budget", self.budget.to_string()),
            (
                "reference",
                format!("{},{}", self.reference[0], self.reference[1]),
            ),
            ("gamma0_policy", self.gamma0.to_string()),
            ("seed", self.seed.to_string()),
            ("reps", self.reps.to_string()),
            (
                "sampling",
                match self.sampling {
                    TraceSampling::Every => "every",
                    TraceSampling::Logarithmic => "logarithmic",
                }
                .to_string(),
            ),
        ]
    }
}

/// Parses `r0,r1`.
pub fn parse_reference(s: &str) -> Result<Objectives, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    };
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    if !a.is_finite() || !b.is_finite() {
        return Err("reference point must be finite".into());
    }
    Ok([a, b])
}

/// Parses `name=v1,v2,...`.
pub fn parse_vary(s: &str) -> Result<(String, Vec<String>), CliError> {
    let (name, values) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--vary expects name=v1,v2,..., got {s:?}")))?;
    if !VARY_NAMES.contains(&name) {
        return Err(CliError::Usage(format!(
            "cannot vary {name:?}; expected one of {}",
            VARY_NAMES.join(", ")
        )));
    }
    let values: Vec<String> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect();
    if values.is_empty() {
        return Err(CliError::Usage(format!("--vary {name} lists no values")));
    }
    Ok((name.to_string(), values))
}
