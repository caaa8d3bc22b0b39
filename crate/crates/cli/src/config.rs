//! Experiment configuration: a TOML document with flat sections.
//!
//! ```toml
//! [problem]
//! n = 2
//! lambda = 5
//! theta = 0.785398
//! sigma = 1.0            # optional
//!
//! [distribution]
//! kind = "gaussian"      # gaussian | copula | student_t
//! covariance = [[1.0, 0.0], [0.0, 1.0]]
//!
//! [run]
//! steps = 200000
//! seed = 7
//! ```
//!
//! Every error in the document is reported, not only the first.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::PathBuf;

use lincon_es_core::analysis::ChainRunConfig;
use lincon_es_core::dist::{CopulaStep, GaussianStep, Generator, IsotropicStudentT, Marginal, StepDistribution};
use lincon_es_core::Problem;
use serde::Serialize;
use toml::{Table, Value};

pub const DEFAULT_BURN_IN: u64 = 10_000;
pub const DEFAULT_STEPS: u64 = 200_000;
pub const DEFAULT_DELTA_GRID: [f64; 5] = [0.1, 1.0, 5.0, 10.0, 20.0];
pub const DEFAULT_SAMPLES_PER_DELTA: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum MarginalSpec {
    Normal { mean: f64, sd: f64 },
    StudentT { dof: f64, loc: f64, scale: f64 },
}

impl MarginalSpec {
    fn build(&self) -> lincon_es_core::Result<Marginal> {
        match *self {
            MarginalSpec::Normal { mean, sd } => Marginal::normal(mean, sd),
            MarginalSpec::StudentT { dof, loc, scale } => Marginal::student_t(dof, loc, scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// `N(0, C)`, row-major covariance.
    Gaussian {
        covariance: Vec<f64>,
    },
    /// Marginals are given in the constraint frame: the first is the law of
    /// `g(M)`, the second that of the orthogonal planar coordinate.
    Copula {
        generator: Generator,
        marginals: Vec<MarginalSpec>,
    },
    StudentT {
        dof: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsConfig {
    pub enabled: bool,
    pub delta_grid: Vec<f64>,
    pub samples_per_delta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub distribution: DistributionSpec,
    pub run: ChainRunConfig,
    pub output: OutputConfig,
    pub diagnostics: DiagnosticsConfig,
}

impl ExperimentConfig {
    pub fn build_distribution(&self) -> lincon_es_core::Result<Box<dyn StepDistribution>> {
        let n = self.problem.n();
        Ok(match &self.distribution {
            DistributionSpec::Gaussian { covariance } => Box::new(GaussianStep::new(n, covariance)?),
            DistributionSpec::StudentT { dof, scale } => Box::new(IsotropicStudentT::new(n, *dof, *scale)?),
            DistributionSpec::Copula { generator, marginals } => {
                let laws = marginals.iter().map(MarginalSpec::build).collect::<lincon_es_core::Result<Vec<_>>>()?;
                let mut it = laws.into_iter();
                let first = it.next().expect("validated length");
                let second = it.next().expect("validated length");
                Box::new(CopulaStep::new(*generator, first, second, it.collect(), self.problem.frame())?)
            }
        })
    }
}

/// One problem found while reading a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// dotted key, e.g. `problem.theta`
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl ConfigErrors {
    pub fn mentions(&self, key: &str) -> bool {
        self.0.iter().any(|e| e.key == key)
    }
}

struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue { key: key.into(), message: message.into() });
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str, required: bool) -> Option<&'a Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(name, "expected a section");
                None
            }
            None => {
                if required {
                    self.issue(name, "missing section");
                }
                None
            }
        }
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                self.issue(key, "unknown key");
            }
        }
    }

    fn float(&mut self, table: &Table, prefix: &str, key: &str) -> Option<f64> {
        let full = format!("{prefix}.{key}");
        match table.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.issue(full, "expected a number");
                None
            }
        }
    }

    fn uint(&mut self, table: &Table, prefix: &str, key: &str) -> Option<u64> {
        let full = format!("{prefix}.{key}");
        match table.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            Value::Integer(_) => {
                self.issue(full, "must be non-negative");
                None
            }
            _ => {
                self.issue(full, "expected an integer");
                None
            }
        }
    }

    fn boolean(&mut self, table: &Table, prefix: &str, key: &str) -> Option<bool> {
        match table.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.issue(format!("{prefix}.{key}"), "expected true or false");
                None
            }
        }
    }

    fn string<'a>(&mut self, table: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match table.get(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.issue(format!("{prefix}.{key}"), "expected a string");
                None
            }
        }
    }

    fn floats(&mut self, value: &Value, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = value else {
            self.issue(key, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for v in items {
            match v {
                Value::Float(x) => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.issue(key, "expected an array of numbers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn required<T>(&mut self, value: Option<T>, table: &Table, key: &str, full: &str) -> Option<T> {
        if value.is_none() && !table.contains_key(key) {
            self.issue(full, "missing required field");
        }
        value
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            return Err(ConfigErrors(vec![ConfigIssue { key: String::new(), message: e.to_string() }]));
        }
    };
    let mut r = Reader { issues: Vec::new() };
    r.unknown_keys(&root, "", &["problem", "distribution", "run", "output", "diagnostics"]);

    let problem = read_problem(&mut r, &root);
    let n = problem.as_ref().map(|p| p.n());
    let distribution = read_distribution(&mut r, &root, n);
    let run = read_run(&mut r, &root);
    let output = read_output(&mut r, &root);
    let diagnostics = read_diagnostics(&mut r, &root);

    if !r.issues.is_empty() {
        return Err(ConfigErrors(r.issues));
    }
    let config = ExperimentConfig {
        problem: problem.expect("no issues"),
        distribution: distribution.expect("no issues"),
        run: run.expect("no issues"),
        output,
        diagnostics,
    };
    if let Err(e) = config.build_distribution() {
        return Err(ConfigErrors(vec![ConfigIssue { key: "distribution".into(), message: e.to_string() }]));
    }
    Ok(config)
}

fn read_problem(r: &mut Reader, root: &Table) -> Option<Problem> {
    let t = r.section(root, "problem", true)?;
    r.unknown_keys(t, "problem", &["n", "lambda", "theta", "sigma"]);
    let n = r.uint(t, "problem", "n");
    let n = r.required(n, t, "n", "problem.n");
    let lambda = r.uint(t, "problem", "lambda");
    let lambda = r.required(lambda, t, "lambda", "problem.lambda");
    let theta = r.float(t, "problem", "theta");
    let theta = r.required(theta, t, "theta", "problem.theta");
    let sigma = r.float(t, "problem", "sigma").unwrap_or(1.0);
    let mut ok = true;
    if let Some(n) = n {
        if n < 2 {
            r.issue("problem.n", "dimension must be at least 2");
            ok = false;
        }
    }
    if let Some(l) = lambda {
        if l < 2 {
            r.issue("problem.lambda", "population size must be at least 2");
            ok = false;
        }
    }
    if let Some(th) = theta {
        // the open interval is enforced with a margin so that cos θ is not rounding noise
        if !(th > 0.0 && th < FRAC_PI_2 - 1e-6) {
            r.issue("problem.theta", "angle must lie in the open interval (0, pi/2)");
            ok = false;
        }
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        r.issue("problem.sigma", "step size must be positive");
        ok = false;
    }
    if !ok {
        return None;
    }
    match Problem::new(n? as usize, lambda? as usize, theta?, sigma) {
        Ok(p) => Some(p),
        Err(e) => {
            r.issue("problem", e.to_string());
            None
        }
    }
}

fn read_marginal(r: &mut Reader, value: &Value, key: &str) -> Option<MarginalSpec> {
    let Value::Table(t) = value else {
        r.issue(key, "expected an inline table such as { law = \"normal\" }");
        return None;
    };
    let law = r.string(t, key, "law");
    let law = r.required(law, t, "law", &format!("{key}.law"))?;
    match law {
        "normal" => {
            r.unknown_keys(t, key, &["law", "mean", "sd"]);
            let mean = r.float(t, key, "mean").unwrap_or(0.0);
            let sd = r.float(t, key, "sd").unwrap_or(1.0);
            if !(sd > 0.0 && sd.is_finite()) || !mean.is_finite() {
                r.issue(key, "normal marginal needs finite mean and sd > 0");
                return None;
            }
            Some(MarginalSpec::Normal { mean, sd })
        }
        "student_t" | "cauchy" => {
            r.unknown_keys(t, key, &["law", "dof", "loc", "scale"]);
            let dof = if law == "cauchy" { Some(1.0) } else { r.float(t, key, "dof") };
            let dof = if law == "cauchy" { dof } else { r.required(dof, t, "dof", &format!("{key}.dof")) };
            let loc = r.float(t, key, "loc").unwrap_or(0.0);
            let scale = r.float(t, key, "scale").unwrap_or(1.0);
            let dof = dof?;
            if !(dof > 0.0 && dof.is_finite()) || !(scale > 0.0 && scale.is_finite()) || !loc.is_finite() {
                r.issue(key, "student_t marginal needs dof > 0, scale > 0 and finite loc");
                return None;
            }
            Some(MarginalSpec::StudentT { dof, loc, scale })
        }
        other => {
            r.issue(format!("{key}.law"), format!("unknown law `{other}` (expected normal, student_t or cauchy)"));
            None
        }
    }
}

fn read_distribution(r: &mut Reader, root: &Table, n: Option<usize>) -> Option<DistributionSpec> {
    let t = r.section(root, "distribution", true)?;
    let kind = r.string(t, "distribution", "kind");
    let kind = r.required(kind, t, "kind", "distribution.kind")?;
    match kind {
        "gaussian" => {
            r.unknown_keys(t, "distribution", &["kind", "covariance"]);
            let n = n?;
            let covariance = match t.get("covariance") {
                None => {
                    let mut c = vec![0.0; n * n];
                    for i in 0..n {
                        c[i * n + i] = 1.0;
                    }
                    c
                }
                Some(Value::Array(rows)) if rows.iter().all(|v| v.is_array()) => {
                    let mut c = Vec::with_capacity(n * n);
                    for row in rows {
                        c.extend(r.floats(row, "distribution.covariance")?);
                    }
                    c
                }
                Some(v) => r.floats(v, "distribution.covariance")?,
            };
            if covariance.len() != n * n {
                r.issue("distribution.covariance", format!("expected {n}x{n} entries, found {}", covariance.len()));
                return None;
            }
            if GaussianStep::new(n, &covariance).is_err() {
                r.issue("distribution.covariance", "covariance must be symmetric positive definite");
                return None;
            }
            Some(DistributionSpec::Gaussian { covariance })
        }
        "student_t" => {
            r.unknown_keys(t, "distribution", &["kind", "dof", "scale"]);
            let dof = r.float(t, "distribution", "dof");
            let dof = r.required(dof, t, "dof", "distribution.dof");
            let scale = r.float(t, "distribution", "scale").unwrap_or(1.0);
            let dof = dof?;
            if !(dof > 0.0 && dof.is_finite()) {
                r.issue("distribution.dof", "degrees of freedom must be positive");
                return None;
            }
            if !(scale > 0.0 && scale.is_finite()) {
                r.issue("distribution.scale", "scale must be positive");
                return None;
            }
            Some(DistributionSpec::StudentT { dof, scale })
        }
        "copula" => {
            r.unknown_keys(t, "distribution", &["kind", "generator", "parameter", "marginals"]);
            let name = r.string(t, "distribution", "generator").unwrap_or("product");
            let parameter = r.float(t, "distribution", "parameter");
            let generator = match (name, parameter) {
                ("product", None) => Some(Generator::Product),
                ("product", Some(_)) => {
                    r.issue("distribution.parameter", "the product copula takes no parameter");
                    None
                }
                ("gumbel", Some(p)) => match Generator::gumbel(p) {
                    Ok(g) => Some(g),
                    Err(_) => {
                        r.issue("distribution.parameter", "gumbel parameter must be >= 1");
                        None
                    }
                },
                ("clayton", Some(p)) => match Generator::clayton(p) {
                    Ok(g) => Some(g),
                    Err(_) => {
                        r.issue("distribution.parameter", "clayton parameter must be > 0");
                        None
                    }
                },
                ("gumbel" | "clayton", None) => {
                    if !t.contains_key("parameter") {
                        r.issue("distribution.parameter", "missing required field");
                    }
                    None
                }
                (other, _) => {
                    r.issue(
                        "distribution.generator",
                        format!("unknown generator `{other}` (expected product, gumbel or clayton)"),
                    );
                    None
                }
            };
            let marginals = match t.get("marginals") {
                None => n.map(|n| vec![MarginalSpec::Normal { mean: 0.0, sd: 1.0 }; n]),
                Some(Value::Array(items)) => {
                    let parsed: Vec<Option<MarginalSpec>> = items
                        .iter()
                        .enumerate()
                        .map(|(i, v)| read_marginal(r, v, &format!("distribution.marginals[{i}]")))
                        .collect();
                    if let Some(n) = n {
                        if items.len() != n {
                            r.issue("distribution.marginals", format!("expected {n} marginals, found {}", items.len()));
                        }
                    }
                    parsed.into_iter().collect::<Option<Vec<_>>>()
                }
                Some(_) => {
                    r.issue("distribution.marginals", "expected an array of inline tables");
                    None
                }
            };
            let marginals = marginals?;
            if marginals.len() != n? {
                return None;
            }
            Some(DistributionSpec::Copula { generator: generator?, marginals })
        }
        other => {
            r.issue("distribution.kind", format!("unknown kind `{other}` (expected gaussian, copula or student_t)"));
            None
        }
    }
}

fn read_run(r: &mut Reader, root: &Table) -> Option<ChainRunConfig> {
    let defaults = ChainRunConfig { burn_in: DEFAULT_BURN_IN, steps: DEFAULT_STEPS, ..ChainRunConfig::default() };
    let Some(t) = r.section(root, "run", false) else {
        return Some(defaults);
    };
    r.unknown_keys(t, "run", &["burn_in", "steps", "replicas", "seed", "delta0", "thinning"]);
    let before = r.issues.len();
    let config = ChainRunConfig {
        burn_in: r.uint(t, "run", "burn_in").unwrap_or(defaults.burn_in),
        steps: r.uint(t, "run", "steps").unwrap_or(defaults.steps),
        replicas: r.uint(t, "run", "replicas").map_or(defaults.replicas, |x| x.min(u32::MAX as u64) as u32),
        seed: match t.get("seed") {
            // TOML integers are signed; reinterpret so that every 64-bit seed is reachable
            Some(Value::Integer(i)) => *i as u64,
            Some(_) => {
                r.issue("run.seed", "expected an integer");
                0
            }
            None => defaults.seed,
        },
        delta0: r.float(t, "run", "delta0").unwrap_or(defaults.delta0),
        thinning: r.uint(t, "run", "thinning").unwrap_or(defaults.thinning),
    };
    if config.steps <= config.burn_in {
        r.issue("run.steps", "steps must exceed burn_in");
    }
    if config.replicas == 0 {
        r.issue("run.replicas", "at least one replica is required");
    }
    if config.thinning == 0 {
        r.issue("run.thinning", "thinning must be at least 1");
    }
    if !(config.delta0 >= 0.0 && config.delta0.is_finite()) {
        r.issue("run.delta0", "initial distance must be finite and non-negative");
    }
    (r.issues.len() == before).then_some(config)
}

fn read_output(r: &mut Reader, root: &Table) -> OutputConfig {
    let mut out = OutputConfig { directory: None, plots: true };
    let Some(t) = r.section(root, "output", false) else {
        return out;
    };
    r.unknown_keys(t, "output", &["directory", "plots"]);
    out.directory = r.string(t, "output", "directory").map(PathBuf::from);
    out.plots = r.boolean(t, "output", "plots").unwrap_or(true);
    out
}

fn read_diagnostics(r: &mut Reader, root: &Table) -> DiagnosticsConfig {
    let mut out = DiagnosticsConfig {
        enabled: true,
        delta_grid: DEFAULT_DELTA_GRID.to_vec(),
        samples_per_delta: DEFAULT_SAMPLES_PER_DELTA,
    };
    let Some(t) = r.section(root, "diagnostics", false) else {
        return out;
    };
    r.unknown_keys(t, "diagnostics", &["enabled", "delta_grid", "samples_per_delta"]);
    out.enabled = r.boolean(t, "diagnostics", "enabled").unwrap_or(true);
    if let Some(v) = t.get("delta_grid") {
        if let Some(grid) = r.floats(v, "diagnostics.delta_grid") {
            let increasing = grid.windows(2).all(|w| w[0] < w[1]);
            let valid = grid.iter().all(|d| *d >= 0.0 && d.is_finite());
            if grid.is_empty() || !increasing || !valid {
                r.issue("diagnostics.delta_grid", "grid must be non-empty, non-negative and increasing");
            } else {
                out.delta_grid = grid;
            }
        }
    }
    if let Some(s) = r.uint(t, "diagnostics", "samples_per_delta") {
        if s < 2 {
            r.issue("diagnostics.samples_per_delta", "at least two samples are required");
        } else {
            out.samples_per_delta = s as usize;
        }
    }
    out
}
