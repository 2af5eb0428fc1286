use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use uhv_core::optimizers::RunTrace;

use crate::stats::summarize;

/// Choices that go beyond what the method description pins down, echoed into every file.
pub const DEVIATION_FLAGS: [&str; 8] = [
    "rotation=givens-45deg-increasing-axis-pairs",
    "nondominated-ud-gradient=zeroed",
    "outside-reference-gradient=toward-reference",
    "gamma0-range=max-init-range",
    "fd-step=max(1e-6*gamma_bar,1e-12)",
    "gd=plain-mean",
    "reported-set=best-by-hv",
    "target-hv=curve-oracle",
];

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn preamble(kind: &str, echo: &[(&str, String)], extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# uhv {kind}");
    let _ = writeln!(s, "# version: {}", env!("CARGO_PKG_VERSION"));
    for (k, v) in echo.iter().chain(extra) {
        let _ = writeln!(s, "# {k}: {v}");
    }
    for flag in DEVIATION_FLAGS {
        let _ = writeln!(s, "# deviation: {flag}");
    }
    s
}

pub fn trace_csv(header: &str, trace: &RunTrace) -> String {
    let mut s = header.to_string();
    s.push_str("iteration,evaluations,uhv,best_uhv,best_hv,delta_hv,gd,nondominated,step_size\n");
    for r in &trace.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.evaluations,
            num(r.uhv),
            num(r.best_uhv),
            num(r.best_hv),
            opt(r.delta_hv),
            opt(r.gd),
            r.nondominated,
            num(r.step_size)
        );
    }
    s
}

/// The best set by HV: objective values followed by the decision vector, one row per solution.
pub fn best_set_csv(header: &str, trace: &RunTrace) -> String {
    let best = &trace.best_hv;
    let n = best.decisions.dim();
    let mut s = header.to_string();
    s.push_str("f0,f1");
    for j in 0..n {
        let _ = write!(s, ",x{j}");
    }
    s.push('\n');
    for (y, x) in best.objectives.iter().zip(best.decisions.solutions()) {
        s.push_str(&num(y[0]));
        s.push(',');
        s.push_str(&num(y[1]));
        for v in x {
            s.push(',');
            s.push_str(&num(*v));
        }
        s.push('\n');
    }
    s
}

pub struct Outcome {
    pub cell: String,
    pub rep: usize,
    pub seed: u64,
    pub trace_file: String,
    pub result: Result<RunTrace, String>,
}

pub fn summary_csv(header: &str, outcomes: &[Outcome]) -> String {
    let mut s = header.to_string();
    s.push_str("cell,rep,seed,status,final_hv,final_uhv,delta_hv,gd,nondominated,iterations,evaluations,stop,trace_file\n");
    for o in outcomes {
        match &o.result {
            Ok(t) => {
                let last = t.rows.last().expect("a trace has at least one row");
                let _ = writeln!(
                    s,
                    "{},{},{},ok,{},{},{},{},{},{},{},{},{}",
                    o.cell,
                    o.rep,
                    o.seed,
                    num(t.best_hv.hv),
                    num(t.best_uhv.uhv),
                    opt(last.delta_hv),
                    opt(last.gd),
                    last.nondominated,
                    t.iterations,
                    t.evaluations,
                    t.stop,
                    o.trace_file
                );
            }
            Err(e) => {
                let _ = writeln!(
                    s,
                    "{},{},{},failed,,,,,,,,\"{}\",",
                    o.cell,
                    o.rep,
                    o.seed,
                    e.replace('"', "'")
                );
            }
        }
    }
    let mut cells: Vec<&str> = outcomes.iter().map(|o| o.cell.as_str()).collect();
    cells.dedup();
    for cell in cells {
        let hvs: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.cell == cell)
            .filter_map(|o| o.result.as_ref().ok().map(|t| t.best_hv.hv))
            .collect();
        match summarize(&hvs) {
            Some(st) => {
                let _ = writeln!(
                    s,
                    "# stats {cell}: count={} median_hv={} iqr_hv={} mean_hv={} std_hv={}",
                    st.count,
                    num(st.median),
                    num(st.iqr),
                    num(st.mean),
                    num(st.std)
                );
            }
            None => {
                let _ = writeln!(s, "# stats {cell}: count=0");
            }
        }
    }
    s
}

pub fn write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)
}
