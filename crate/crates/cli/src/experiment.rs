use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use lincon_es_core::analysis::{
    aggregate, diagnose_conditions, run_replica, DiagnosticsTable, ReplicaTrace, RunReport,
};
use lincon_es_core::rng::stream;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{
    delta_histogram_svg, running_rate_svg, write_file, write_trace_csv, HISTOGRAM_FILE, RATE_FILE, REPORT_FILE,
    TRACE_FILE,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LINCON_ES_OUT";
pub const DEFAULT_OUT_DIR: &str = "lincon-es-out";

/// Stream index of the condition diagnostics; chain replicas use `0..replicas`.
pub const DIAGNOSTICS_STREAM: u64 = u64::MAX - 2;

pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const SIMULATION: u8 = 2;
    pub const CONDITION_FLAG: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("simulation failed: {0}")]
    Simulation(#[from] lincon_es_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl ExperimentError {
    pub fn exit_code(&self) -> u8 {
        exit::SIMULATION
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub abs_moment: bool,
    pub exp_moment: bool,
    pub limit_inconsistent: bool,
    pub limit_not_positive: bool,
}

impl Flags {
    pub fn from_table(table: &DiagnosticsTable) -> Self {
        Flags {
            abs_moment: table.abs_moment_flag(),
            exp_moment: table.exp_moment_flag(),
            limit_inconsistent: !table.limit_consistent(),
            limit_not_positive: !table.limit_positive,
        }
    }

    pub fn any(&self) -> bool {
        self.abs_moment || self.exp_moment || self.limit_inconsistent || self.limit_not_positive
    }

    pub fn describe(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.abs_moment {
            v.push("first absolute moment of g over feasible steps does not settle");
        }
        if self.exp_moment {
            v.push("exponential moment of g over raw steps does not settle");
        }
        if self.limit_inconsistent {
            v.push("E[g(M*) | delta] at the largest delta is more than 3 SE from its analytic limit");
        }
        if self.limit_not_positive {
            v.push("E[g(M*) | delta] at the largest delta is not significantly positive");
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub report: RunReport,
    pub flags: Option<Flags>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub directory: PathBuf,
    pub report: ExperimentReport,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self.report.flags {
            Some(f) if f.any() => exit::CONDITION_FLAG,
            _ => exit::SUCCESS,
        }
    }
}

/// Output directory: the explicit flag, then the environment, then the config, then the default.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&str>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    config.output.directory.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Replicas run in parallel; the result does not depend on scheduling.
pub fn run_chain(config: &ExperimentConfig) -> Result<(RunReport, ReplicaTrace), ExperimentError> {
    let dist = config.build_distribution()?;
    let dist = dist.as_ref();
    let mut traces = (0..config.run.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica(&config.problem, dist, &config.run, i, i == 0))
        .collect::<Result<Vec<_>, _>>()?;
    let report = aggregate(&config.problem, &config.run, &traces)?;
    let first = traces.swap_remove(traces.iter().position(|t| t.index == 0).expect("replica 0 exists"));
    Ok((report, first))
}

pub fn run_diagnostics(config: &ExperimentConfig) -> Result<DiagnosticsTable, ExperimentError> {
    let dist = config.build_distribution()?;
    let mut rng = stream(config.run.seed, DIAGNOSTICS_STREAM);
    Ok(diagnose_conditions(
        &config.problem,
        dist.as_ref(),
        &config.diagnostics.delta_grid,
        config.diagnostics.samples_per_delta,
        &mut rng,
    )?)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// Runs the chain (and the diagnostics when enabled) and writes the artifacts.
/// Traces are written even when a condition flag is raised.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<Outcome, ExperimentError> {
    let mut config = config.clone();
    if let Some(seed) = options.seed {
        config.run.seed = seed;
    }
    let dir = options.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let (mut report, trace) = run_chain(&config)?;
    let mut files = vec![TRACE_FILE.to_string(), REPORT_FILE.to_string()];
    let trace_path = dir.join(TRACE_FILE);
    let file = fs::File::create(&trace_path).map_err(io_err(&trace_path))?;
    write_trace_csv(file, &trace.rows).map_err(io_err(&trace_path))?;

    if options.plots && config.output.plots {
        write_file(&dir, HISTOGRAM_FILE, delta_histogram_svg(&trace.rows, 60).as_bytes())
            .map_err(io_err(&dir.join(HISTOGRAM_FILE)))?;
        write_file(&dir, RATE_FILE, running_rate_svg(&trace.rows, config.problem.sigma()).as_bytes())
            .map_err(io_err(&dir.join(RATE_FILE)))?;
        files.push(HISTOGRAM_FILE.to_string());
        files.push(RATE_FILE.to_string());
    }

    let flags = if config.diagnostics.enabled {
        let table = run_diagnostics(&config)?;
        let flags = Flags::from_table(&table);
        report.condition_diagnostics = Some(table);
        Some(flags)
    } else {
        None
    };
    let report = ExperimentReport { config, report, flags, files };
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    let report_path = dir.join(REPORT_FILE);
    fs::write(&report_path, json + "\n").map_err(io_err(&report_path))?;
    Ok(Outcome { directory: dir, report })
}
