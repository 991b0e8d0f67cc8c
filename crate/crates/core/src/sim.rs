// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo coverage experiments.
//!
//! Replication `i` of an experiment with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, so each replication
//! owns an independent counter-based stream and results do not depend on
//! how replications are scheduled across threads.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{BinomialRobustCi, RobustCiConfig};
use crate::dist::FinitePmf;
use crate::error::{check_range, config, Error, Result};
use crate::estimators::{
    adaptive_estimator, bernoulli_ci, known_eps_ci, EstimatorConfig, DEFAULT_BERNOULLI_C,
    DEFAULT_C_CI, DEFAULT_C_SEL, DEFAULT_GRID_RESOLUTION,
};
use crate::graph::{
    er_estimate, er_interval_around, sample_node_contaminated,
    sample_node_contaminated_planted, EdgeStrategy, SubsetSearchConfig, DEFAULT_ER_C,
    DEFAULT_EXACT_LIMIT,
};
use crate::grid::DEFAULT_WARN_THRESHOLD;
use crate::interval::{ConfidenceInterval, Method};
use crate::poisson::{PoissonCiConfig, PoissonRobustCi, DEFAULT_GRID_CAP};
use crate::sample::SampleSet;

/// Count used by the `top` strategy for Poisson data.
pub const POISSON_TOP: u64 = 50;

/// The per-replication random stream.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Contamination law `Q` for count data.
#[derive(Debug, Clone, PartialEq)]
pub enum QStrategy {
    /// Point mass at 0.
    Zero,
    /// Point mass at `m`, or at [`POISSON_TOP`] for Poisson data.
    Top,
    PointMass(u64),
    /// `Binomial(m, q)`.
    Binomial(f64),
    Poisson(f64),
    Custom(FinitePmf),
}

impl FromStr for QStrategy {
    type Err = Error;

    /// Accepts `zero`, `top`, `point:K`, `binomial:Q`, `poisson:MU` and
    /// `custom:START:w0,w1,...` (weights are normalized).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || config("q_strategy", format!("cannot parse `{s}`"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match s.split_once(':') {
            None if s == "zero" => Ok(Self::Zero),
            None if s == "top" => Ok(Self::Top),
            Some(("point", k)) => Ok(Self::PointMass(k.parse().map_err(|_| bad())?)),
            Some(("binomial", q)) => {
                let q = num(q)?;
                check_range("q", q, 0.0, 1.0)?;
                Ok(Self::Binomial(q))
            }
            Some(("poisson", mu)) => {
                let mu = num(mu)?;
                if !(mu >= 0.0 && mu.is_finite()) {
                    return Err(bad());
                }
                Ok(Self::Poisson(mu))
            }
            Some(("custom", rest)) => {
                let (start, weights) = rest.split_once(':').ok_or_else(bad)?;
                let start = start.parse().map_err(|_| bad())?;
                let weights = weights.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Ok(Self::Custom(FinitePmf::from_weights(start, weights)?))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for QStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Top => write!(f, "top"),
            Self::PointMass(k) => write!(f, "point:{k}"),
            Self::Binomial(q) => write!(f, "binomial:{q}"),
            Self::Poisson(mu) => write!(f, "poisson:{mu}"),
            Self::Custom(pmf) => {
                let w: Vec<String> = pmf.probs().iter().map(|p| p.to_string()).collect();
                write!(f, "custom:{}:{}", pmf.support_min(), w.join(","))
            }
        }
    }
}

/// Clean data law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CleanModel {
    Binomial { m: u64, p: f64 },
    Poisson { lambda: f64 },
}

/// `n` i.i.d. draws from `(1 - eps) clean + eps Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataModel {
    pub clean: CleanModel,
    pub eps: f64,
    pub n: usize,
}

enum Draw {
    Constant(u64),
    Binomial(Binomial),
    Poisson(Poisson<f64>),
    Table { start: u64, index: WeightedIndex<f64> },
}

impl Draw {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Self::Constant(k) => *k,
            Self::Binomial(d) => d.sample(rng),
            Self::Poisson(d) => d.sample(rng) as u64,
            Self::Table { start, index } => start + index.sample(rng) as u64,
        }
    }

    fn binomial(m: u64, p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0)?;
        Ok(Self::Binomial(
            Binomial::new(m, p).map_err(|e| config("p", e.to_string()))?,
        ))
    }

    fn poisson(lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Ok(Self::Constant(0));
        }
        Ok(Self::Poisson(
            Poisson::new(lambda).map_err(|e| config("lambda", e.to_string()))?,
        ))
    }
}

/// A ready-to-use sampler for one data model and contamination law.
pub struct ContaminatedSampler {
    eps: f64,
    n: usize,
    clean: Draw,
    contamination: Draw,
}

impl ContaminatedSampler {
    pub fn new(model: &DataModel, q: &QStrategy) -> Result<Self> {
        check_range("eps", model.eps, 0.0, 1.0)?;
        if model.n == 0 {
            return Err(config("n", "need at least one observation"));
        }
        let clean = match model.clean {
            CleanModel::Binomial { m, p } => Draw::binomial(m, p)?,
            CleanModel::Poisson { lambda } => Draw::poisson(lambda)?,
        };
        let contamination = match (q, model.clean) {
            (QStrategy::Zero, _) => Draw::Constant(0),
            (QStrategy::Top, CleanModel::Binomial { m, .. }) => Draw::Constant(m),
            (QStrategy::Top, CleanModel::Poisson { .. }) => Draw::Constant(POISSON_TOP),
            (QStrategy::PointMass(k), _) => Draw::Constant(*k),
            (QStrategy::Binomial(q), CleanModel::Binomial { m, .. }) => Draw::binomial(m, *q)?,
            (QStrategy::Binomial(_), CleanModel::Poisson { .. }) => {
                return Err(config("q_strategy", "binomial contamination needs binomial data"))
            }
            (QStrategy::Poisson(mu), _) => Draw::poisson(*mu)?,
            (QStrategy::Custom(pmf), _) => Draw::Table {
                start: pmf.support_min(),
                index: WeightedIndex::new(pmf.probs())
                    .map_err(|e| config("q_strategy", e.to_string()))?,
            },
        };
        Ok(Self {
            eps: model.eps,
            n: model.n,
            clean,
            contamination,
        })
    }

    /// Draws the sample along with which observations came from `Q`.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, rng: &mut R) -> (SampleSet, Vec<bool>) {
        let mut values = Vec::with_capacity(self.n);
        let mut labels = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let from_q = self.eps > 0.0 && rng.random::<f64>() < self.eps;
            let x = if from_q {
                self.contamination.sample(rng)
            } else {
                self.clean.sample(rng)
            };
            values.push(x);
            labels.push(from_q);
        }
        (SampleSet::new(values).expect("n >= 1"), labels)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleSet {
        self.sample_labeled(rng).0
    }
}

/// One-shot convenience wrapper around [`ContaminatedSampler`].
pub fn sample_contaminated<R: Rng + ?Sized>(
    model: &DataModel,
    q: &QStrategy,
    rng: &mut R,
) -> Result<SampleSet> {
    Ok(ContaminatedSampler::new(model, q)?.sample(rng))
}

fn default_alpha() -> f64 {
    0.05
}
fn default_q() -> String {
    "top".into()
}
fn default_reps() -> usize {
    1000
}
fn default_c_sel() -> f64 {
    DEFAULT_C_SEL
}
fn default_c_ci() -> f64 {
    DEFAULT_C_CI
}
fn default_bernoulli_c() -> f64 {
    DEFAULT_BERNOULLI_C
}
fn default_er_c() -> f64 {
    DEFAULT_ER_C
}
fn default_exact_limit() -> usize {
    DEFAULT_EXACT_LIMIT
}
fn default_warn() -> f64 {
    DEFAULT_WARN_THRESHOLD
}
fn default_grid_resolution() -> f64 {
    DEFAULT_GRID_RESOLUTION
}
fn default_grid_cap() -> u64 {
    DEFAULT_GRID_CAP
}

/// Everything needed to reproduce one experiment. Field names are the JSON
/// config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Node count for `er-conservative`; falls back to `n`.
    #[serde(default)]
    pub n_nodes: Option<usize>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub eps: f64,
    /// See [`QStrategy`]; for graphs see [`EdgeStrategy`], where `top` means
    /// `all-ones`.
    #[serde(default = "default_q")]
    pub q_strategy: String,
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub eps_max: f64,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Plant exactly this many contaminated nodes instead of drawing labels.
    #[serde(default)]
    pub contaminated_nodes: Option<usize>,
    #[serde(default = "default_c_sel")]
    pub c_sel: f64,
    #[serde(default = "default_c_ci")]
    pub c_ci: f64,
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: f64,
    #[serde(default = "default_bernoulli_c")]
    pub bernoulli_c: f64,
    #[serde(default = "default_er_c")]
    pub er_c: f64,
    #[serde(default = "default_exact_limit")]
    pub exact_limit: usize,
    #[serde(default = "default_warn")]
    pub warn_threshold: f64,
    #[serde(default = "default_grid_cap")]
    pub grid_cap: u64,
}

impl ExperimentConfig {
    /// A config with every optional knob at its default.
    pub fn new(method: Method) -> Self {
        serde_json::from_value(serde_json::json!({ "method": method }))
            .expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn need_m(&self) -> Result<u64> {
        match self.m {
            Some(m) if m >= 1 => Ok(m),
            _ => Err(config("m", "required and must be at least 1")),
        }
    }

    fn need_p(&self) -> Result<f64> {
        let p = self.p.ok_or_else(|| config("p", "required"))?;
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(config("p", format!("{p} is not in [0, 1]")))
        }
    }

    fn need_lambda(&self) -> Result<f64> {
        match self.lambda {
            Some(l) if l >= 0.0 && l.is_finite() => Ok(l),
            Some(l) => Err(config("lambda", format!("{l} is not a valid rate"))),
            None => Err(config("lambda", "required")),
        }
    }

    pub fn nodes(&self) -> usize {
        self.n_nodes.unwrap_or(self.n)
    }

    /// The parameter whose coverage is measured.
    pub fn target(&self) -> Result<f64> {
        match self.method {
            Method::PoissonRobust => self.need_lambda(),
            _ => self.need_p(),
        }
    }

    pub fn edge_strategy(&self) -> Result<EdgeStrategy> {
        if self.q_strategy == "top" {
            Ok(EdgeStrategy::AllOnes)
        } else {
            self.q_strategy.parse()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(config("replications", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(config("eps", format!("{} is not in [0, 1]", self.eps)));
        }
        if !(0.0..=1.0).contains(&self.eps_max) {
            return Err(config("eps_max", format!("{} is not in [0, 1]", self.eps_max)));
        }
        self.target()?;
        match self.method {
            Method::ErConservative => {
                if self.nodes() < 2 {
                    return Err(config("n_nodes", "need at least two nodes"));
                }
                if let Some(k) = self.contaminated_nodes {
                    if k > self.nodes() {
                        return Err(config("contaminated_nodes", "more than the node count"));
                    }
                }
                self.edge_strategy()?;
            }
            _ => {
                if self.n == 0 {
                    return Err(config("n", "need at least one observation"));
                }
                if self.method != Method::PoissonRobust {
                    let m = self.need_m()?;
                    if self.method == Method::Bernoulli && m != 1 {
                        return Err(config("m", "the Bernoulli interval needs m = 1"));
                    }
                }
                self.q_strategy.parse::<QStrategy>()?;
            }
        }
        Ok(())
    }

    fn data_model(&self) -> Result<DataModel> {
        let clean = match self.method {
            Method::PoissonRobust => CleanModel::Poisson {
                lambda: self.need_lambda()?,
            },
            _ => CleanModel::Binomial {
                m: self.need_m()?,
                p: self.need_p()?,
            },
        };
        Ok(DataModel {
            clean,
            eps: self.eps,
            n: self.n,
        })
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub lower: f64,
    pub upper: f64,
    /// Point estimate where the method has one.
    pub estimate: Option<f64>,
}

impl Replicate {
    fn from_ci(ci: &ConfidenceInterval, estimate: Option<f64>) -> Self {
        Self {
            lower: ci.lower,
            upper: ci.upper,
            estimate,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn length(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }

    /// Closed-endpoint coverage; the empty interval covers nothing.
    pub fn covers(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub coverage: f64,
    pub mean_length: f64,
    pub median_length: f64,
    pub mc_stderr: f64,
    pub empty_count: usize,
    pub wallclock_s: f64,
    /// Per-replication results in replication order. Not written to CSV.
    pub replicates: Vec<Replicate>,
}

impl ExperimentRecord {
    fn summarize(config: ExperimentConfig, replicates: Vec<Replicate>, wallclock_s: f64) -> Result<Self> {
        let target = config.target()?;
        let r = replicates.len() as f64;
        let covered = replicates.iter().filter(|x| x.covers(target)).count() as f64;
        let coverage = covered / r;
        let mut lengths: Vec<f64> = replicates.iter().map(Replicate::length).collect();
        let mean_length = lengths.iter().sum::<f64>() / r;
        lengths.sort_by(f64::total_cmp);
        Ok(Self {
            config,
            coverage,
            mean_length,
            median_length: median_sorted(&lengths),
            mc_stderr: (coverage * (1.0 - coverage) / r).sqrt(),
            empty_count: replicates.iter().filter(|x| x.is_empty()).count(),
            wallclock_s,
            replicates,
        })
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.replicates.iter().filter_map(|r| r.estimate).collect()
    }
}

pub fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Runs `cfg.replications` independent replications in parallel and merges
/// them in replication order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let reps = cfg.replications as u64;
    let replicates: Vec<Replicate> = match cfg.method {
        Method::ErConservative => run_er(cfg)?,
        Method::BinomRobust => {
            let m = cfg.need_m()?;
            let ci_cfg = RobustCiConfig::new(m, cfg.n, cfg.alpha, cfg.eps_max)?
                .with_warn_threshold(cfg.warn_threshold);
            let engine = BinomialRobustCi::new(ci_cfg)?;
            let sampler = ContaminatedSampler::new(&cfg.data_model()?, &cfg.q_strategy.parse()?)?;
            (0..reps)
                .into_par_iter()
                .map(|i| {
                    let s = sampler.sample(&mut replication_rng(cfg.seed, i));
                    engine.interval(&s).map(|ci| Replicate::from_ci(&ci, None))
                })
                .collect::<Result<_>>()?
        }
        Method::PoissonRobust => {
            let mut pcfg = PoissonCiConfig::new(cfg.n, cfg.alpha, cfg.eps_max)?;
            pcfg.grid_cap = cfg.grid_cap;
            pcfg.warn_threshold = cfg.warn_threshold;
            let engine = PoissonRobustCi::new(pcfg)?;
            let sampler = ContaminatedSampler::new(&cfg.data_model()?, &cfg.q_strategy.parse()?)?;
            (0..reps)
                .into_par_iter()
                .map(|i| {
                    let s = sampler.sample(&mut replication_rng(cfg.seed, i));
                    engine.interval(&s).map(|ci| Replicate::from_ci(&ci, None))
                })
                .collect::<Result<_>>()?
        }
        Method::BinomKnownEps => {
            let m = cfg.need_m()?;
            let est = EstimatorConfig {
                m,
                alpha: cfg.alpha,
                c_sel: cfg.c_sel,
                c_ci: cfg.c_ci,
                grid_resolution: cfg.grid_resolution,
            };
            est.validate()?;
            let sampler = ContaminatedSampler::new(&cfg.data_model()?, &cfg.q_strategy.parse()?)?;
            (0..reps)
                .into_par_iter()
                .map(|i| {
                    let s = sampler.sample(&mut replication_rng(cfg.seed, i));
                    let p_hat = adaptive_estimator(&s, &est)?;
                    let ci = known_eps_ci(p_hat, m, cfg.n, cfg.eps_max, cfg.alpha, cfg.c_ci)?;
                    Ok(Replicate::from_ci(&ci, Some(p_hat)))
                })
                .collect::<Result<_>>()?
        }
        Method::Bernoulli => {
            let sampler = ContaminatedSampler::new(&cfg.data_model()?, &cfg.q_strategy.parse()?)?;
            (0..reps)
                .into_par_iter()
                .map(|i| {
                    let s = sampler.sample(&mut replication_rng(cfg.seed, i));
                    bernoulli_ci(&s, cfg.alpha, cfg.bernoulli_c)
                        .map(|ci| Replicate::from_ci(&ci, None))
                })
                .collect::<Result<_>>()?
        }
    };
    ExperimentRecord::summarize(cfg.clone(), replicates, start.elapsed().as_secs_f64())
}

fn run_er(cfg: &ExperimentConfig) -> Result<Vec<Replicate>> {
    let n = cfg.nodes();
    let p = cfg.need_p()?;
    let strategy = cfg.edge_strategy()?;
    let search = SubsetSearchConfig {
        exact_limit: cfg.exact_limit,
        ..SubsetSearchConfig::default()
    };
    search.validate()?;
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(cfg.seed, i);
            let graph = match cfg.contaminated_nodes {
                Some(k) => {
                    let mut flags = vec![false; n];
                    for idx in sample_indices(&mut rng, n, k) {
                        flags[idx] = true;
                    }
                    sample_node_contaminated_planted(n, p, &flags, strategy, &mut rng)?
                }
                None => sample_node_contaminated(n, p, cfg.eps, strategy, &mut rng)?,
            };
            let p_hat = er_estimate(&graph.adjacency, &search)?;
            let ci = er_interval_around(p_hat, n, cfg.alpha, cfg.er_c);
            Ok(Replicate::from_ci(&ci, Some(p_hat)))
        })
        .collect()
}

pub const CSV_HEADER: [&str; 16] = [
    "method",
    "m",
    "n",
    "p",
    "eps",
    "eps_max",
    "alpha",
    "q_strategy",
    "reps",
    "seed",
    "coverage",
    "mean_length",
    "median_length",
    "mc_stderr",
    "empty_count",
    "wallclock_s",
];

/// One CSV line. `m` is blank for methods without a trial count, `n` is the
/// node count for graph experiments and `p` carries the rate for Poisson.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub method: Method,
    pub m: Option<u64>,
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    pub eps_max: f64,
    pub alpha: f64,
    pub q_strategy: String,
    pub reps: usize,
    pub seed: u64,
    pub coverage: f64,
    pub mean_length: f64,
    pub median_length: f64,
    pub mc_stderr: f64,
    pub empty_count: usize,
    pub wallclock_s: f64,
}

impl ExperimentRecord {
    pub fn to_row(&self) -> CsvRow {
        let c = &self.config;
        let (m, n) = match c.method {
            Method::PoissonRobust => (None, c.n),
            Method::ErConservative => (None, c.nodes()),
            _ => (c.m, c.n),
        };
        CsvRow {
            method: c.method,
            m,
            n,
            p: c.target().unwrap_or(f64::NAN),
            eps: c.eps,
            eps_max: c.eps_max,
            alpha: c.alpha,
            q_strategy: c.q_strategy.clone(),
            reps: c.replications,
            seed: c.seed,
            coverage: self.coverage,
            mean_length: self.mean_length,
            median_length: self.median_length,
            mc_stderr: self.mc_stderr,
            empty_count: self.empty_count,
            wallclock_s: self.wallclock_s,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .expect("methods serialize as strings")
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            method_name(r.method),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            r.n.to_string(),
            format_float(r.p),
            format_float(r.eps),
            format_float(r.eps_max),
            format_float(r.alpha),
            r.q_strategy.clone(),
            r.reps.to_string(),
            r.seed.to_string(),
            format_float(r.coverage),
            format_float(r.mean_length),
            format_float(r.median_length),
            format_float(r.mc_stderr),
            r.empty_count.to_string(),
            format_float(r.wallclock_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let rows: Vec<CsvRow> = records.iter().map(ExperimentRecord::to_row).collect();
    write_csv(&rows, std::fs::File::create(path)?)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
