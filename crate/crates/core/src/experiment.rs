//! Experiment configuration, orchestration over seeds, and CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, default_snapshot_every, OpCounters, RunSettings, RunTrace};
use crate::baselines::{fa_policy, oa_track, OaTrack};
use crate::env::{AccuracyCoeffs, AllocationDecision, Environment, ModelAllocation, ModelSpec, ResourcePool};
use crate::error::{Result, SliceError};
use crate::learner::{init_weights, optimal_eta, regret_bound, InitScheme};
use crate::space::{build_space, reduce_super_actions, Algorithm, Arms, DecisionSpace, Grids, ModelGrid};

const BUNDLED: [(&str, &str); 2] = [
    ("table3_2model", include_str!("../configs/table3_2model.toml")),
    ("table3_4model", include_str!("../configs/table3_4model.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// Source text of a bundled configuration.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaSpec {
    /// Minimizer of the regret bound for the arms carrying initial mass.
    Auto,
    Value(f64),
}

impl EtaSpec {
    pub fn resolve(self, effective_arms: usize, horizon: u64) -> Result<f64> {
        match self {
            EtaSpec::Auto => optimal_eta(effective_arms, horizon),
            EtaSpec::Value(v) => Ok(v),
        }
    }

    fn parse(raw: &RawEta, path: &str) -> Result<Self> {
        match raw {
            RawEta::Token(t) if t == "auto" => Ok(EtaSpec::Auto),
            RawEta::Token(t) => Err(SliceError::config(path, format!("expected a number or `auto`, got `{t}`"))),
            RawEta::Value(v) if *v > 0.0 && *v < 1.0 => Ok(EtaSpec::Value(*v)),
            RawEta::Value(v) => Err(SliceError::config(path, format!("must lie in (0, 1), got {v}"))),
        }
    }

    /// Parses one entry of a comma-separated list such as `auto,0.01`.
    pub fn from_token(token: &str) -> Result<Self> {
        let token = token.trim();
        let raw = match token.parse::<f64>() {
            Ok(v) => RawEta::Value(v),
            Err(_) => RawEta::Token(token.to_string()),
        };
        EtaSpec::parse(&raw, "etas")
    }

    fn label(self) -> String {
        match self {
            EtaSpec::Auto => "eta_op".to_string(),
            EtaSpec::Value(v) => format!("eta_{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Baselines {
    pub oa: bool,
    pub fa: Option<AllocationDecision>,
}

/// Validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub env: Environment,
    pub grids: Grids,
    pub algorithm: Algorithm,
    pub eta: EtaSpec,
    pub init: InitScheme,
    pub horizon: u64,
    /// Ascending and distinct.
    pub seeds: Vec<u64>,
    pub baselines: Baselines,
    pub output_dir: PathBuf,
    /// Weight snapshot cadence; `None` picks one from the arm count, `Some(0)` disables.
    pub snapshot_every: Option<u64>,
    /// Write `snapshots_seed_<s>.csv` files.
    pub write_snapshots: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEta {
    Value(f64),
    Token(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrids {
    Shared(ModelGrid),
    PerModel(Vec<ModelGrid>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFixed {
    Shared(ModelAllocation),
    PerModel(Vec<ModelAllocation>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaselines {
    #[serde(default = "yes")]
    oa: bool,
    fa: Option<RawFixed>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheduleEntry {
    slot: u64,
    coeffs: Vec<AccuracyCoeffs>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    algorithm: String,
    eta: RawEta,
    horizon: u64,
    seeds: Vec<u64>,
    output_dir: Option<PathBuf>,
    snapshot_every: Option<u64>,
    #[serde(default)]
    write_snapshots: bool,
    #[serde(default = "uniform")]
    init: InitScheme,
    pool: ResourcePool,
    models: Vec<ModelSpec>,
    grids: RawGrids,
    baselines: Option<RawBaselines>,
    #[serde(default)]
    schedule: Vec<RawScheduleEntry>,
}

fn uniform() -> InitScheme {
    InitScheme::Uniform
}

fn check_init(init: &InitScheme) -> Result<()> {
    match *init {
        InitScheme::Uniform => Ok(()),
        InitScheme::Sbs { center, size } => {
            if size < 1 {
                return Err(SliceError::config("init.size", "window must hold at least one arm"));
            }
            if center < 1 {
                return Err(SliceError::config("init.center", "arm indices start at 1"));
            }
            Ok(())
        }
        InitScheme::Gbs { mu, sigma } => {
            if !mu.is_finite() {
                return Err(SliceError::config("init.mu", "must be finite"));
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(SliceError::config("init.sigma", "must be positive"));
            }
            Ok(())
        }
    }
}

/// Parses and validates configuration text. `origin` names the source in
/// messages and supplies the default experiment name.
pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| SliceError::Parse {
        path: origin.to_path_buf(),
        reason: e.to_string(),
    })?;
    let algorithm: Algorithm = raw.algorithm.parse()?;
    let eta = EtaSpec::parse(&raw.eta, "eta")?;
    if raw.horizon < 1 {
        return Err(SliceError::config("horizon", "must be at least 1"));
    }
    let mut seeds = raw.seeds;
    if seeds.is_empty() {
        return Err(SliceError::config("seeds", "at least one seed is required"));
    }
    seeds.sort_unstable();
    if seeds.windows(2).any(|w| w[0] == w[1]) {
        return Err(SliceError::config("seeds", "seeds must be distinct"));
    }
    check_init(&raw.init)?;

    let mut env = Environment::new(raw.models, raw.pool)?;
    for (k, entry) in raw.schedule.into_iter().enumerate() {
        env.schedule_coeffs(entry.slot, entry.coeffs)
            .map_err(|e| SliceError::config(format!("schedule[{k}]"), e.to_string()))?;
    }
    let grids = match raw.grids {
        RawGrids::Shared(g) => Grids::uniform(g, env.num_models()),
        RawGrids::PerModel(gs) => {
            if gs.len() != env.num_models() {
                return Err(SliceError::config(
                    "grids",
                    format!("{} grids given for {} models", gs.len(), env.num_models()),
                ));
            }
            Grids(gs)
        }
    };
    grids.validate(&env)?;

    let baselines = match raw.baselines {
        None => Baselines { oa: true, fa: None },
        Some(b) => {
            let fa = match b.fa {
                None => None,
                Some(RawFixed::Shared(slice)) => Some(AllocationDecision(vec![slice; env.num_models()])),
                Some(RawFixed::PerModel(slices)) => {
                    if slices.len() != env.num_models() {
                        return Err(SliceError::config(
                            "baselines.fa",
                            format!("{} slices given for {} models", slices.len(), env.num_models()),
                        ));
                    }
                    Some(AllocationDecision(slices))
                }
            };
            if let Some(fixed) = &fa {
                fa_policy(fixed, &env, 1)?;
            }
            Baselines { oa: b.oa, fa }
        }
    };

    let name = match raw.name {
        Some(n) => n,
        None => origin
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".to_string()),
    };
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(SliceError::config("name", "must be a non-empty plain file name"));
    }
    let output_dir = raw.output_dir.unwrap_or_else(|| Path::new("out").join(&name));
    Ok(ExperimentConfig {
        name,
        env,
        grids,
        algorithm,
        eta,
        init: raw.init,
        horizon: raw.horizon,
        seeds,
        baselines,
        output_dir,
        snapshot_every: raw.snapshot_every,
        write_snapshots: raw.write_snapshots,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| SliceError::io(path, e))?;
    parse_config(&text, path)
}

/// Loads `spec` as a file path, or as a bundled configuration name when no
/// such file exists.
pub fn load_config_or_bundled(spec: &str) -> Result<ExperimentConfig> {
    let path = Path::new(spec);
    if path.exists() {
        return load_config(path);
    }
    match bundled(spec) {
        Some(text) => parse_config(text, path),
        None => Err(SliceError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!(
                    "no such file and no bundled config of that name (bundled: {})",
                    bundled_names().collect::<Vec<_>>().join(", ")
                ),
            ),
        )),
    }
}

/// Arm counts of every pre-learning stage, with the counters of each algorithm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceManifest {
    pub hyper_combinations: usize,
    pub resource_combinations: usize,
    pub feasible_resource_combinations: usize,
    pub ols: usize,
    pub ols_sa: usize,
    pub ols_rsa: usize,
    pub ops_ols: OpCounters,
    pub ops_ols_sa: OpCounters,
    pub ops_ols_rsa: OpCounters,
}

impl SpaceManifest {
    pub fn arms(&self, algorithm: Algorithm) -> usize {
        match algorithm {
            Algorithm::Ols => self.ols,
            Algorithm::OlsSa => self.ols_sa,
            Algorithm::OlsRsa => self.ols_rsa,
        }
    }

    pub fn ops(&self, algorithm: Algorithm) -> OpCounters {
        match algorithm {
            Algorithm::Ols => self.ops_ols,
            Algorithm::OlsSa => self.ops_ols_sa,
            Algorithm::OlsRsa => self.ops_ols_rsa,
        }
    }
}

struct Stages {
    manifest: SpaceManifest,
    sa: DecisionSpace,
    rsa: DecisionSpace,
}

fn build_stages(grids: &Grids, env: &Environment) -> Result<Stages> {
    let sa = build_space(grids, env, Algorithm::OlsSa)?;
    let rsa = reduce_super_actions(&sa)?;
    let ols: usize = (0..sa.len()).map(|j| sa.arm_size(j)).sum();
    // The OLS pipeline performs the same checks without grouping.
    let ops_ols = OpCounters {
        merges: 0,
        candidacy_comparisons: 0,
        learn_ops_per_slot: ols as u64,
        ..sa.op_counters()
    };
    let manifest = SpaceManifest {
        hyper_combinations: sa.hyper_combos().len(),
        resource_combinations: grids.0.iter().map(|g| g.psi.len() * g.lambda.len()).product(),
        feasible_resource_combinations: sa.feasible_resources().len(),
        ols,
        ols_sa: sa.len(),
        ols_rsa: rsa.len(),
        ops_ols,
        ops_ols_sa: sa.op_counters(),
        ops_ols_rsa: rsa.op_counters(),
    };
    Ok(Stages { manifest, sa, rsa })
}

pub fn space_manifest(config: &ExperimentConfig) -> Result<SpaceManifest> {
    Ok(build_stages(&config.grids, &config.env)?.manifest)
}

/// Prints `x` with 9 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').map_or(sci.len(), |k| k + 1)..].parse().unwrap_or(0);
    if (-4..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| SliceError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| SliceError::io(path, e))
}

pub fn write_manifest(manifest: &SpaceManifest, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| SliceError::io(dir, e))?;
    let path = dir.join("space_manifest.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["stage", "count"])?;
    let rows = [
        ("hyper_combinations", manifest.hyper_combinations),
        ("resource_combinations", manifest.resource_combinations),
        ("feasible_resource_combinations", manifest.feasible_resource_combinations),
        ("ols", manifest.ols),
        ("ols-sa", manifest.ols_sa),
        ("ols-rsa", manifest.ols_rsa),
    ];
    for (stage, n) in rows {
        w.write_record([stage.to_string(), n.to_string()])?;
    }
    finish(w, &path)?;
    Ok(path)
}

/// One seed's run, with the derived curves.
#[derive(Clone, Debug)]
pub struct SeedRun {
    pub trace: RunTrace,
    pub cumulative_regret: Vec<f64>,
    pub average_regret: Vec<f64>,
    pub average_reward: Vec<f64>,
}

/// A prepared space with its hindsight optimum, ready to run seeds on.
pub struct Prepared {
    pub manifest: SpaceManifest,
    pub space: DecisionSpace,
    pub oracle: OaTrack,
    pub tracked: Vec<usize>,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let stages = build_stages(&config.grids, &config.env)?;
    let space = match config.algorithm {
        Algorithm::Ols => build_space(&config.grids, &config.env, Algorithm::Ols)?,
        Algorithm::OlsSa => stages.sa,
        Algorithm::OlsRsa => stages.rsa,
    };
    init_weights(&config.init, space.len())?;
    let oracle = oa_track(&space, &config.env, config.horizon)?;
    let tracked = oracle.best.arms_in(&space);
    Ok(Prepared {
        manifest: stages.manifest,
        space,
        oracle,
        tracked,
    })
}

/// Runs every seed of `config` at learning rate `eta`, in seed order.
pub fn run_seeds(config: &ExperimentConfig, prepared: &Prepared, eta: f64, snapshots: Option<u64>) -> Result<Vec<SeedRun>> {
    config
        .seeds
        .par_iter()
        .map(|&seed| {
            let settings = RunSettings {
                eta,
                init: config.init,
                horizon: config.horizon,
                seed,
                snapshot_every: snapshots,
            };
            let trace = analytics::simulate(&prepared.space, &config.env, &settings, &prepared.tracked)?;
            let per_slot = &prepared.oracle.per_slot;
            Ok(SeedRun {
                cumulative_regret: analytics::cumulative_regret(&trace, per_slot),
                average_regret: analytics::average_regret(&trace, per_slot),
                average_reward: analytics::average_reward(&trace),
                trace,
            })
        })
        .collect()
}

/// Headline numbers of a finished experiment, written as `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub algorithm: Algorithm,
    pub arms: usize,
    pub effective_arms: usize,
    pub eta: f64,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub optimal_performance: f64,
    /// 1-based arms holding the optimum.
    pub optimal_arms: Vec<usize>,
    pub fa_performance: Option<f64>,
    pub mean_final_average_reward: f64,
    pub mean_final_cumulative_regret: f64,
    pub mean_terminal_prob_optimal: f64,
    pub regret_bound: Option<f64>,
    pub manifest: SpaceManifest,
    pub files: Vec<String>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn run_header(models: usize, with_seed: bool) -> Vec<String> {
    let mut h: Vec<String> = Vec::new();
    if with_seed {
        h.extend(["seed", "slot", "selected_index"].map(String::from));
    } else {
        h.push("slot".into());
    }
    h.extend(
        [
            "performance",
            "loss",
            "cumulative_regret",
            "average_regret",
            "average_reward",
            "prob_optimal",
        ]
        .map(String::from),
    );
    h.extend((1..=models).map(|i| format!("q_{i}")));
    h
}

fn write_seed_csv(run: &SeedRun, models: usize, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(run_header(models, true))?;
    for (k, r) in run.trace.records.iter().enumerate() {
        let mut row = vec![
            run.trace.seed.to_string(),
            r.slot.to_string(),
            (r.arm + 1).to_string(),
            fmt_sig(r.performance),
            fmt_sig(r.loss),
            fmt_sig(run.cumulative_regret[k]),
            fmt_sig(run.average_regret[k]),
            fmt_sig(run.average_reward[k]),
            fmt_sig(r.prob_optimal),
        ];
        row.extend(r.accuracies.iter().map(|&q| fmt_sig(q)));
        w.write_record(&row)?;
    }
    finish(w, path)
}

fn write_averaged_csv(runs: &[SeedRun], models: usize, horizon: usize, path: &Path) -> Result<()> {
    let avg = |f: &dyn Fn(&SeedRun, usize) -> f64, k: usize| mean(runs.iter().map(|r| f(r, k)));
    let mut w = csv_writer(path)?;
    w.write_record(run_header(models, false))?;
    for k in 0..horizon {
        let mut row = vec![
            (k + 1).to_string(),
            fmt_sig(avg(&|r, k| r.trace.records[k].performance, k)),
            fmt_sig(avg(&|r, k| r.trace.records[k].loss, k)),
            fmt_sig(avg(&|r, k| r.cumulative_regret[k], k)),
            fmt_sig(avg(&|r, k| r.average_regret[k], k)),
            fmt_sig(avg(&|r, k| r.average_reward[k], k)),
            fmt_sig(avg(&|r, k| r.trace.records[k].prob_optimal, k)),
        ];
        for i in 0..models {
            row.push(fmt_sig(avg(&|r, k| r.trace.records[k].accuracies[i], k)));
        }
        w.write_record(&row)?;
    }
    finish(w, path)
}

fn write_snapshots_csv(run: &SeedRun, path: &Path) -> Result<()> {
    let Some(snaps) = &run.trace.snapshots else {
        return Ok(());
    };
    let arms = run.trace.final_weights.len();
    let mut w = csv_writer(path)?;
    let mut header = vec!["slot".to_string()];
    header.extend((1..=arms).map(|j| format!("w_{j}")));
    w.write_record(&header)?;
    for (slot, weights) in snaps {
        let mut row = vec![slot.to_string()];
        row.extend(weights.iter().map(|&x| fmt_sig(x)));
        w.write_record(&row)?;
    }
    finish(w, path)
}

fn write_arms_csv(space: &DecisionSpace, env: &Environment, path: &Path) -> Result<()> {
    let models = env.num_models();
    let mut w = csv_writer(path)?;
    let mut header = vec!["index".to_string()];
    for i in 1..=models {
        header.push(format!("l_{i}"));
        header.push(format!("m_{i}"));
    }
    if matches!(space.arms(), Arms::Decisions(_)) {
        for i in 1..=models {
            header.push(format!("psi_{i}"));
            header.push(format!("lambda_{i}"));
        }
    } else {
        header.push("sub_actions".into());
    }
    header.push("performance".into());
    w.write_record(&header)?;
    for j in 0..space.len() {
        let mut row = vec![(j + 1).to_string()];
        for &(l, m) in space.arm_combo(j).values() {
            row.push(fmt_sig(l));
            row.push(m.to_string());
        }
        match space.arms() {
            Arms::Decisions(arms) => {
                for s in space.decision(arms[j]).slices() {
                    row.push(fmt_sig(s.psi));
                    row.push(fmt_sig(s.lambda));
                }
            }
            Arms::Super(_) => row.push(space.arm_size(j).to_string()),
        }
        row.push(fmt_sig(space.arm_performance(j, env, crate::env::DEFAULT_SLOT)));
        w.write_record(&row)?;
    }
    finish(w, path)
}

fn write_reference_csv(oa: Option<&[f64]>, fa: Option<&[f64]>, horizon: usize, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["slot".to_string()];
    if oa.is_some() {
        header.push("oa_performance".into());
    }
    if fa.is_some() {
        header.extend(["fa_performance".to_string(), "fa_cumulative_regret".to_string()]);
    }
    w.write_record(&header)?;
    let mut fa_regret = 0.0;
    for k in 0..horizon {
        let mut row = vec![(k + 1).to_string()];
        if let Some(oa) = oa {
            row.push(fmt_sig(oa[k]));
        }
        if let Some(fa) = fa {
            if let Some(oa) = oa {
                fa_regret += oa[k] - fa[k];
            }
            row.push(fmt_sig(fa[k]));
            row.push(if oa.is_some() { fmt_sig(fa_regret) } else { String::new() });
        }
        w.write_record(&row)?;
    }
    finish(w, path)
}

fn write_ops_csv(manifest: &SpaceManifest, horizon: u64, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "algorithm",
        "feasibility_checks",
        "merges",
        "candidacy_comparisons",
        "prelearn_ops",
        "learn_ops_per_slot",
        "cumulative_at_horizon",
    ])?;
    for alg in Algorithm::ALL {
        let c = manifest.ops(alg);
        let total = c.prelearn_ops() + horizon * c.learn_ops_per_slot;
        w.write_record([
            alg.as_str().to_string(),
            c.feasibility_checks.to_string(),
            c.merges.to_string(),
            c.candidacy_comparisons.to_string(),
            c.prelearn_ops().to_string(),
            c.learn_ops_per_slot.to_string(),
            total.to_string(),
        ])?;
    }
    finish(w, path)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs the full experiment and writes its artifacts into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let prepared = prepare(config)?;
    let space = &prepared.space;
    let effective = config.init.effective_arms(space.len());
    let eta = config.eta.resolve(effective, config.horizon)?;
    let snapshots = if config.write_snapshots {
        match config.snapshot_every {
            None => Some(default_snapshot_every(space.len())),
            Some(0) => None,
            Some(n) => Some(n),
        }
    } else {
        None
    };
    let runs = run_seeds(config, &prepared, eta, snapshots)?;
    let fa = config
        .baselines
        .fa
        .as_ref()
        .map(|d| fa_policy(d, &config.env, config.horizon))
        .transpose()?;

    let dir = &config.output_dir;
    let models = config.env.num_models();
    let horizon = config.horizon as usize;
    let mut files = vec![file_name(&write_manifest(&prepared.manifest, dir)?)];
    let mut emit = |name: String, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        write(&dir.join(&name))?;
        files.push(name);
        Ok(())
    };
    emit("arms.csv".into(), &|p| write_arms_csv(space, &config.env, p))?;
    for run in &runs {
        emit(format!("run_seed_{}.csv", run.trace.seed), &|p| write_seed_csv(run, models, p))?;
        if snapshots.is_some() {
            emit(format!("snapshots_seed_{}.csv", run.trace.seed), &|p| write_snapshots_csv(run, p))?;
        }
    }
    emit("run_averaged.csv".into(), &|p| write_averaged_csv(&runs, models, horizon, p))?;
    let oa = config.baselines.oa.then_some(prepared.oracle.per_slot.as_slice());
    if oa.is_some() || fa.is_some() {
        emit("reference.csv".into(), &|p| write_reference_csv(oa, fa.as_deref(), horizon, p))?;
    }
    emit("op_counters.csv".into(), &|p| write_ops_csv(&prepared.manifest, config.horizon, p))?;
    files.push("summary.json".into());

    let tracked = &prepared.tracked;
    let summary = RunSummary {
        name: config.name.clone(),
        algorithm: config.algorithm,
        arms: space.len(),
        effective_arms: effective,
        eta,
        horizon: config.horizon,
        seeds: config.seeds.clone(),
        optimal_performance: prepared.oracle.best.optimal_performance,
        optimal_arms: tracked.iter().map(|k| k + 1).collect(),
        fa_performance: fa.as_ref().and_then(|f| f.first().copied()),
        mean_final_average_reward: mean(runs.iter().map(|r| r.average_reward[horizon - 1])),
        mean_final_cumulative_regret: mean(runs.iter().map(|r| r.cumulative_regret[horizon - 1])),
        mean_terminal_prob_optimal: mean(
            runs.iter()
                .map(|r| tracked.iter().map(|&k| r.trace.final_weights[k]).sum::<f64>()),
        ),
        regret_bound: (effective >= 2).then(|| regret_bound(effective, eta, config.horizon)),
        manifest: prepared.manifest.clone(),
        files,
    };
    let path = dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| SliceError::Domain(e.to_string()))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| SliceError::io(&path, e))?;
    Ok(summary)
}

/// Seed-averaged cumulative regret for each learning rate, next to the
/// regret bound at the optimal rate.
#[derive(Clone, Debug)]
pub struct EtaComparison {
    pub labels: Vec<String>,
    pub etas: Vec<f64>,
    /// `curves[e][t]`: mean cumulative regret of rate `e` after slot `t + 1`.
    pub curves: Vec<Vec<f64>>,
    pub eta_op: f64,
    pub bound: Vec<f64>,
}

pub fn compare_etas(config: &ExperimentConfig, etas: &[EtaSpec]) -> Result<EtaComparison> {
    if etas.is_empty() {
        return Err(SliceError::config("etas", "at least one learning rate is required"));
    }
    let prepared = prepare(config)?;
    let effective = config.init.effective_arms(prepared.space.len());
    let eta_op = optimal_eta(effective, config.horizon)?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut curves = Vec::new();
    for &spec in etas {
        let eta = spec.resolve(effective, config.horizon)?;
        let runs = run_seeds(config, &prepared, eta, None)?;
        let series: Vec<&[f64]> = runs.iter().map(|r| r.cumulative_regret.as_slice()).collect();
        curves.push(analytics::mean_series(series));
        labels.push(spec.label());
        values.push(eta);
    }
    let bound = (1..=config.horizon).map(|t| regret_bound(effective, eta_op, t)).collect();
    Ok(EtaComparison {
        labels,
        etas: values,
        curves,
        eta_op,
        bound,
    })
}

pub fn write_eta_comparison(cmp: &EtaComparison, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| SliceError::io(dir, e))?;
    let path = dir.join("eta_comparison.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["slot".to_string()];
    header.extend(cmp.labels.iter().cloned());
    header.push("bound_eta_op".into());
    w.write_record(&header)?;
    for (k, b) in cmp.bound.iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(cmp.curves.iter().map(|c| fmt_sig(c[k])));
        row.push(fmt_sig(*b));
        w.write_record(&row)?;
    }
    finish(w, &path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_model() -> ExperimentConfig {
        load_config_or_bundled("table3_2model").unwrap()
    }

    fn replace(text: &str, from: &str, to: &str) -> String {
        assert!(text.contains(from), "{from}");
        text.replacen(from, to, 1)
    }

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, Path::new("test.toml"))
    }

    #[test]
    fn bundled_two_model_matches_reference_pool() {
        let cfg = two_model();
        let pool = cfg.env.pool();
        assert_eq!(pool.psi_max, 3.7);
        assert_eq!(pool.phi, 350_000.0);
        assert_eq!(pool.lambda_max, 5.0);
        assert_eq!(pool.c_psi, 0.2);
        assert_eq!(pool.c_lambda, 0.02);
        assert_eq!(cfg.env.models(), crate::scenario::two_model_env().models());
        assert_eq!(cfg.grids, crate::scenario::two_model_grids());
        assert_eq!(cfg.baselines.fa, Some(crate::scenario::two_model_fixed_allocation()));
        assert_eq!(cfg.seeds.len(), 20);
    }

    #[test]
    fn bundled_four_model_matches_scenario() {
        let cfg = load_config_or_bundled("table3_4model").unwrap();
        assert_eq!(cfg.env.pool(), crate::scenario::four_model_env().pool());
        assert_eq!(cfg.env.models(), crate::scenario::four_model_env().models());
        assert_eq!(cfg.grids, crate::scenario::four_model_grids());
    }

    #[test]
    fn invalid_values_name_their_field() {
        let text = bundled("table3_2model").unwrap();
        let bad_eta = replace(text, "eta = 0.001", "eta = 1.5");
        let err = parse(&bad_eta).unwrap_err().to_string();
        assert!(err.contains("`eta`"), "{err}");

        let bad_token = replace(text, "eta = 0.001", "eta = \"fast\"");
        assert!(parse(&bad_token).unwrap_err().to_string().contains("auto"));
        assert_eq!(parse(&replace(text, "eta = 0.001", "eta = \"auto\"")).unwrap().eta, EtaSpec::Auto);

        let bad_sbs = replace(text, "scheme = \"uniform\"", "scheme = \"sbs\"\ncenter = 3\nsize = 0");
        assert!(parse(&bad_sbs).unwrap_err().to_string().contains("init.size"));

        let bad_alg = replace(text, "algorithm = \"ols-rsa\"", "algorithm = \"ucb\"");
        assert!(parse(&bad_alg).unwrap_err().to_string().contains("ucb"));

        let bad_scheme = replace(text, "scheme = \"uniform\"", "scheme = \"cauchy\"");
        assert!(matches!(parse(&bad_scheme), Err(SliceError::Parse { .. })));

        let bad_grid = replace(text, "l = [25.0, 50.0, 100.0]", "l = [50.0, 25.0, 100.0]");
        assert!(parse(&bad_grid).unwrap_err().to_string().contains("grids"));

        let bad_model = replace(text, "c_max = 0.36", "c_max = -1.0");
        assert!(parse(&bad_model).unwrap_err().to_string().contains("models[1].c_max"));

        let missing = replace(text, "horizon = 5000\n", "");
        let err = parse(&missing).unwrap_err().to_string();
        assert!(err.contains("horizon"), "{err}");

        let bad_fa = replace(text, "psi = 1.5, lambda = 2.0 }", "psi = 2.2, lambda = 2.0 }");
        assert!(parse(&bad_fa).unwrap_err().to_string().contains("baselines.fa"));

        let dup = replace(text, "seeds = [0, 1,", "seeds = [1, 1,");
        assert!(parse(&dup).unwrap_err().to_string().contains("seeds"));
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(load_config_or_bundled("no_such_config").is_err());
    }

    #[test]
    fn manifest_of_reference_setup() {
        let m = space_manifest(&two_model()).unwrap();
        assert_eq!((m.ols, m.ols_sa, m.ols_rsa), (720, 48, 6));
        assert_eq!(m.hyper_combinations, 81);
        assert_eq!(m.resource_combinations, 81);
        assert_eq!(m.feasible_resource_combinations, 19);
        let ols = build_space(&crate::scenario::two_model_grids(), &crate::scenario::two_model_env(), Algorithm::Ols)
            .unwrap()
            .op_counters();
        assert_eq!(m.ops_ols, ols);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.865501834), "0.865501834");
        assert_eq!(fmt_sig(1.0), "1.00000000");
        assert_eq!(fmt_sig(4.99912345678), "4.99912346");
        assert_eq!(fmt_sig(12345.678912), "12345.6789");
        assert_eq!(fmt_sig(9.999999999), "10.0000000");
        assert_eq!(fmt_sig(1.5e-7), "1.50000000e-7");
        assert_eq!(fmt_sig(-0.25), "-0.250000000");
    }

    #[test]
    fn eta_tokens() {
        assert_eq!(EtaSpec::from_token(" auto ").unwrap(), EtaSpec::Auto);
        assert_eq!(EtaSpec::from_token("0.01").unwrap(), EtaSpec::Value(0.01));
        assert!(EtaSpec::from_token("0").is_err());
        assert!(EtaSpec::from_token("x").is_err());
    }

    #[test]
    fn auto_eta_uses_selected_space() {
        let cfg = two_model();
        let p = prepare(&cfg).unwrap();
        assert_eq!(p.space.len(), 6);
        let eta = EtaSpec::Auto.resolve(cfg.init.effective_arms(p.space.len()), cfg.horizon).unwrap();
        assert_eq!(eta, optimal_eta(6, 5000).unwrap());
        let sbs = InitScheme::Sbs { center: 3, size: 2 };
        assert_eq!(EtaSpec::Auto.resolve(sbs.effective_arms(6), 5000).unwrap(), optimal_eta(2, 5000).unwrap());
    }
}
