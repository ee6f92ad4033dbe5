//! Task execution and result records.

use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::config::{ConfigError, RunConfig, TailSide, Task};
use super::events::{read_csv, write_binary, write_csv, EventIoError};
use crate::empirical::empirical_functional;
use crate::ldp::{
    lln_estimate, mean_matched_proposal, rare_event_probability, LdpError, LinearRateParams, Tail,
};
use crate::likelihood::{entropy_rate, girsanov_log_ratio, LikelihoodError, LikelihoodRatio};
use crate::simulate::{map_replicas, simulate_start, SimConfig, SimError, Start};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("explosion guard: {0}")]
    Explosion(String),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit code: 2 config, 3 runtime, 4 explosion guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Explosion(_) => 4,
            RunError::Runtime(_) | RunError::Io(_) => 3,
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Explosion(_) => "explosion",
            RunError::Runtime(_) => "runtime",
            RunError::Io(_) => "io",
        }
    }
}

impl From<SimError> for RunError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Explosion(_) => RunError::Explosion(e.to_string()),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<LikelihoodError> for RunError {
    fn from(e: LikelihoodError) -> Self {
        match e {
            LikelihoodError::Sim(s) => s.into(),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<LdpError> for RunError {
    fn from(e: LdpError) -> Self {
        match e {
            LdpError::Sim(s) => s.into(),
            LdpError::Likelihood(l) => l.into(),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<EventIoError> for RunError {
    fn from(e: EventIoError) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    Replica,
    Summary,
    Point,
    Warning,
}

/// One line of `results.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task: String,
    pub kind: RecordKind,
    pub config_hash: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replica: Option<usize>,
    pub values: Map<String, Value>,
    pub wall_time_ms: f64,
}

/// Records plus any event streams produced, in replica order.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub streams: Vec<crate::stream::EventStream>,
}

fn values(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("record values are objects"),
    }
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    hash: String,
    started: Instant,
    records: Vec<ResultRecord>,
}

impl<'a> Recorder<'a> {
    fn push(&mut self, kind: RecordKind, replica: Option<usize>, v: Value) {
        self.records.push(ResultRecord {
            task: self.cfg.task.name().to_string(),
            kind,
            config_hash: self.hash.clone(),
            seed: self.cfg.sim.seed,
            replica,
            values: values(v),
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
        });
    }
}

fn start_of(sim: &SimConfig) -> Start {
    if sim.burn_in > 0.0 {
        Start::BurnIn
    } else {
        Start::Empty
    }
}

/// Executes the configured task. Files are written only when
/// `cfg.output.dir` is set (see [`write_outputs`]).
pub fn run_task(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let model = cfg.model()?;
    let sim = cfg.sim_config();
    let mut rec = Recorder {
        cfg,
        hash: cfg.config_hash(),
        started: Instant::now(),
        records: Vec::new(),
    };
    let mut streams = Vec::new();

    match cfg.task {
        Task::Simulate => {
            let start = start_of(&sim);
            streams = map_replicas(sim.replicas, |r| simulate_start(&model, &sim, start, r))?;
            for (r, s) in streams.iter().enumerate() {
                rec.push(
                    RecordKind::Replica,
                    Some(r),
                    json!({
                        "horizon": s.horizon(),
                        "n_events": s.len(),
                        "n_history": s.history().len(),
                        "rate": s.len() as f64 / s.horizon(),
                        "start": start,
                    }),
                );
            }
        }
        Task::Loglik => {
            let spec = cfg.loglik.as_ref().expect("validated");
            let target = spec.target.as_ref().expect("validated").build("loglik.target")?;
            let paths = match &spec.events {
                Some(path) => {
                    let file = fs::File::open(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
                    vec![read_csv(file, sim.horizon)?]
                }
                None => map_replicas(sim.replicas, |r| simulate_start(&model, &sim, start_of(&sim), r))?,
            };
            let ratios = map_replicas(paths.len(), |r| girsanov_log_ratio(&target, &model, &paths[r]))?;
            for (r, ratio) in ratios.iter().enumerate() {
                let v = match ratio {
                    LikelihoodRatio::Regular(b) => json!({
                        "seed": sim.seed,
                        "horizon": b.horizon,
                        "compensator_diff": b.compensator_diff,
                        "jump_term": b.jump_term,
                        "log_ratio": b.log_ratio,
                        "singular": false,
                    }),
                    LikelihoodRatio::Singular { event_time, horizon } => json!({
                        "seed": sim.seed,
                        "horizon": horizon,
                        "singular": true,
                        "singular_at": event_time,
                    }),
                };
                rec.push(RecordKind::Replica, Some(r), v);
            }
        }
        Task::Entropy => {
            let q = cfg
                .entropy
                .as_ref()
                .and_then(|e| e.q.as_ref())
                .expect("validated")
                .build("entropy.q")?;
            let est = entropy_rate(&q, &model, &sim)?;
            for (r, v) in est.per_replica.iter().enumerate() {
                rec.push(RecordKind::Replica, Some(r), json!({ "horizon": sim.horizon, "entropy_rate": v }));
            }
            let explicit = q
                .lln_mean()
                .filter(|_| q.is_poisson())
                .and_then(|x| LinearRateParams::from_model(&model).map(|p| p.rate_function(x)));
            rec.push(
                RecordKind::Summary,
                None,
                json!({
                    "entropy_rate": est.rate,
                    "std_err": est.std_err,
                    "half_difference": est.half_difference,
                    "truncation_bias": est.truncation_bias,
                    "replicas": est.replicas,
                    "I_explicit": explicit,
                }),
            );
        }
        Task::RateFn => {
            let spec = cfg.rate_fn.as_ref().expect("validated");
            let params = LinearRateParams::from_model(&model).expect("validated");
            let (start, stop, step) = (spec.start, spec.stop.expect("validated"), spec.step.expect("validated"));
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            for i in 0..=n {
                // start + (stop − start)·i/n keeps grid points such as 2.0 exact
                let x = if n == 0 {
                    start
                } else {
                    start + (n as f64 * step) * i as f64 / n as f64
                };
                rec.push(RecordKind::Point, None, json!({ "x": x, "I": params.rate_function(x) }));
            }
        }
        Task::RareEvent => {
            let spec = cfg.rare_event.as_ref().expect("validated");
            let a = spec.threshold.expect("validated");
            let tail = match spec.tail {
                TailSide::Upper => Tail::Upper(a),
                TailSide::Lower => Tail::Lower(a),
            };
            let proposal = match &spec.proposal {
                Some(p) => p.build("rare_event.proposal")?,
                None => {
                    let pilot = SimConfig::new(sim.seed ^ 0x9e37_79b9_7f4a_7c15, 200.0).with_replicas(16);
                    mean_matched_proposal(&model, a, &pilot)?
                }
            };
            let horizons = spec.horizons.clone().unwrap_or_else(|| vec![sim.horizon]);
            for h in horizons {
                let est = rare_event_probability(&model, tail, h, &proposal, &sim)?;
                rec.push(
                    RecordKind::Summary,
                    None,
                    json!({
                        "threshold": a,
                        "horizon": h,
                        "p_hat": est.p_hat,
                        "rate_hat": est.rate_hat,
                        "std_err": est.std_err,
                        "rate_std_err": est.rate_std_err,
                        "ess": est.ess,
                        "hits": est.hits,
                        "proposal": est.proposal,
                        "I_explicit": est.i_explicit,
                        "relative_gap": est.relative_gap,
                        "unreliable": est.unreliable,
                    }),
                );
                if est.unreliable {
                    rec.push(
                        RecordKind::Warning,
                        None,
                        json!({
                            "warning": "unreliable ESS",
                            "horizon": h,
                            "ess": est.ess,
                        }),
                    );
                }
            }
        }
        Task::Empirical => {
            let f = cfg.empirical.clone().unwrap_or(super::config::EmpiricalSpec {
                window: 1.0,
                statistic: crate::empirical::WindowStatistic::Count,
            });
            let functional = f.functional();
            streams = map_replicas(sim.replicas, |r| simulate_start(&model, &sim, start_of(&sim), r))?;
            for (r, s) in streams.iter().enumerate() {
                let value = empirical_functional(s, &functional)?;
                let t = s.horizon();
                rec.push(
                    RecordKind::Replica,
                    Some(r),
                    json!({
                        "value": value,
                        "n_over_t": s.len() as f64 / t,
                        "boundary_bound": (s.count_closed(t - 1.0, t) + s.counting(1.0)) as f64 / t,
                    }),
                );
            }
            streams.clear();
        }
        Task::Lln => {
            let est = lln_estimate(&model, &sim)?;
            rec.push(
                RecordKind::Summary,
                None,
                json!({
                    "mean_rate": est.mean_rate,
                    "std_err": est.std_err,
                    "mu": model.lln_mean(),
                    "start": est.start,
                    "replicas": sim.replicas,
                    "horizon": sim.horizon,
                }),
            );
        }
    }
    Ok(RunOutput {
        records: rec.records,
        streams,
    })
}

/// Serialises records as JSON lines.
pub fn records_to_jsonl(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialises"));
        out.push('\n');
    }
    out
}

/// Writes `results.jsonl`, `config.resolved` and any `events_<replica>.csv`
/// (plus `.bin` when requested) into `dir`.
pub fn write_outputs(cfg: &RunConfig, output: &RunOutput, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.jsonl"), records_to_jsonl(&output.records))?;
    fs::write(dir.join("config.resolved"), cfg.to_toml())?;
    for (r, s) in output.streams.iter().enumerate() {
        write_csv(s, BufWriter::new(fs::File::create(dir.join(format!("events_{r}.csv")))?))?;
        if cfg.output.binary {
            write_binary(s, BufWriter::new(fs::File::create(dir.join(format!("events_{r}.bin")))?))?;
        }
    }
    Ok(())
}
