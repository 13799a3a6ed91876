//! Experiment grid: generate graphs (and data), run the algorithms with
//! fresh testers, score against the true essential graph, write CSV.
//!
//! Config files are `key = value` lines:
//!
//! ```text
//! family = er          # er | ba | parallel
//! p = 10, 15, 20       # or a range: 4..12
//! density = 2, 4       # er: expected neighbours; ba: edges per new node
//! n = 10000
//! alpha = 0.05
//! seeds = 0..9
//! algos = gas, gas+, pc
//! testers = oracle, fisherz
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};

use crate::citest::{CachedTester, CiTester, DSepOracle, FisherZ};
use crate::cpdag::{essential_graph, normalized_shd, shd, skeleton_metrics};
use crate::error::{BenchError, CiError};
use crate::gas::{run_gas, run_gas_plus, GasResult};
use crate::graph::Dag;
use crate::pc::run_pc;
use crate::synth::{barabasi_albert_dag, erdos_renyi_dag, parallel_paths_dag, sample_sem, Density, SemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "er")]
    Er,
    #[serde(rename = "ba")]
    Ba,
    #[serde(rename = "parallel")]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "gas")]
    Gas,
    #[serde(rename = "gas+")]
    GasPlus,
    #[serde(rename = "pc")]
    Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TesterKind {
    #[serde(rename = "oracle")]
    Oracle,
    #[serde(rename = "fisherz")]
    FisherZ,
}

macro_rules! str_enum {
    ($t:ty, $($name:literal => $v:expr),+) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($v),)+
                    other => Err(format!("unknown value `{other}`")),
                }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = match self { $(x if *x == $v => $name,)+ _ => unreachable!() };
                f.write_str(s)
            }
        }
    };
}

str_enum!(Family, "er" => Family::Er, "ba" => Family::Ba, "parallel" => Family::Parallel);
str_enum!(Algo, "gas" => Algo::Gas, "gas+" => Algo::GasPlus, "pc" => Algo::Pc);
str_enum!(TesterKind, "oracle" => TesterKind::Oracle, "fisherz" => TesterKind::FisherZ);

impl Algo {
    pub fn run<T: CiTester + ?Sized>(self, tester: &mut T) -> Result<GasResult, CiError> {
        match self {
            Algo::Gas => run_gas(tester),
            Algo::GasPlus => run_gas_plus(tester),
            Algo::Pc => run_pc(tester),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    /// Expected neighbourhood size (er) or attachment count (ba); unused
    /// for the parallel family.
    pub densities: Vec<f64>,
    pub n: usize,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub algos: Vec<Algo>,
    pub testers: Vec<TesterKind>,
    /// Measure wall time. Off gives byte-identical CSV across runs.
    pub timing: bool,
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        out.push(item.parse::<T>().map_err(|e| format!("`{item}`: {e}"))?);
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Comma list of integers, or an inclusive range `a..b`.
fn parse_int_list<T>(value: &str) -> Result<Vec<T>, String>
where
    T: FromStr + Copy + Into<u64> + TryFrom<u64>,
    T::Err: fmt::Display,
{
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("range start: {e}"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("range end: {e}"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        return (a..=b)
            .map(|x| T::try_from(x).map_err(|_| format!("{x} out of range")))
            .collect();
    }
    parse_list(value)
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut family = None;
        let mut sizes = None;
        let mut cfg = BenchConfig {
            family: Family::Er,
            sizes: Vec::new(),
            densities: vec![2.0],
            n: 1000,
            alpha: 0.05,
            seeds: vec![0],
            algos: vec![Algo::Gas, Algo::GasPlus, Algo::Pc],
            testers: vec![TesterKind::Oracle],
            timing: true,
        };
        let mut last = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last = line;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| BenchError::Config { line, msg };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let value = value.trim();
            match key.trim() {
                "family" => family = Some(value.parse().map_err(err)?),
                "p" => sizes = Some(parse_int_list::<u32>(value).map_err(err)?),
                "density" => cfg.densities = parse_list(value).map_err(err)?,
                "n" => cfg.n = value.parse().map_err(|e| err(format!("n: {e}")))?,
                "alpha" => cfg.alpha = value.parse().map_err(|e| err(format!("alpha: {e}")))?,
                "seeds" => cfg.seeds = parse_int_list(value).map_err(err)?,
                "algos" => cfg.algos = parse_list(value).map_err(err)?,
                "testers" => cfg.testers = parse_list(value).map_err(err)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |what: &str| BenchError::Config {
            line: last,
            msg: format!("missing `{what}`"),
        };
        cfg.family = family.ok_or_else(|| missing("family"))?;
        cfg.sizes = sizes.ok_or_else(|| missing("p"))?.into_iter().map(|x| x as usize).collect();
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(BenchError::Config {
                line: last,
                msg: format!("alpha {} not in (0, 1)", cfg.alpha),
            });
        }
        Ok(cfg)
    }
}

fn ser_samples<S: Serializer>(n: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
    match n {
        Some(n) => s.serialize_u64(*n as u64),
        None => s.serialize_str("inf"),
    }
}

/// One algorithm on one generated instance. Failed cells keep zeroed
/// metrics and carry the message in `error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub algo: Algo,
    pub tester: TesterKind,
    pub family: Family,
    pub p: usize,
    pub density: String,
    /// Sample count; `None` for the oracle.
    #[serde(serialize_with = "ser_samples")]
    pub n: Option<usize>,
    pub seed: u64,
    pub shd: usize,
    pub normalized_shd: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub distinct_ci: usize,
    pub total_ci: usize,
    pub max_level: usize,
    pub wall_seconds: f64,
    pub error: String,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }
}

fn generate(family: Family, p: usize, density: f64, seed: u64) -> Result<(Dag, String), String> {
    match family {
        Family::Er => erdos_renyi_dag(p, Density::ExpectedNeighbors(density), seed)
            .map(|g| (g, format!("k={density}")))
            .map_err(|e| e.to_string()),
        Family::Ba => {
            if density.fract() != 0.0 || density < 1.0 {
                return Err(format!("ba density must be a positive integer, got {density}"));
            }
            barabasi_albert_dag(p, density as usize, seed)
                .map(|g| (g, format!("m={density}")))
                .map_err(|e| e.to_string())
        }
        Family::Parallel => parallel_paths_dag(p).map(|g| (g, "-".into())).map_err(|e| e.to_string()),
    }
}

fn score(
    mut rec: RunRecord,
    truth: &crate::graph::Pdag,
    res: Result<GasResult, CiError>,
    secs: f64,
) -> RunRecord {
    rec.wall_seconds = secs;
    match res {
        Ok(res) => {
            // both graphs share p, so these cannot fail
            rec.shd = shd(&res.graph, truth).unwrap_or(0);
            rec.normalized_shd = normalized_shd(&res.graph, truth).unwrap_or(0.0);
            if let Ok(m) = skeleton_metrics(&res.graph, truth) {
                rec.tp = m.true_positives;
                rec.fp = m.false_positives;
                rec.fn_ = m.false_negatives;
            }
            rec.distinct_ci = res.ci.distinct_queries;
            rec.total_ci = res.ci.total_calls;
            rec.max_level = res.max_level;
        }
        Err(e) => rec.error = e.to_string(),
    }
    rec
}

/// Runs the whole grid in a fixed order: size, density, seed, tester, algo.
pub fn run_experiment(cfg: &BenchConfig) -> Vec<RunRecord> {
    let densities: &[f64] = if cfg.family == Family::Parallel { &[0.0] } else { &cfg.densities };
    let mut out = Vec::new();
    for &p in &cfg.sizes {
        for &density in densities {
            for &seed in &cfg.seeds {
                let blank = |algo, tester, density: String, n| RunRecord {
                    algo,
                    tester,
                    family: cfg.family,
                    p,
                    density,
                    n,
                    seed,
                    shd: 0,
                    normalized_shd: 0.0,
                    tp: 0,
                    fp: 0,
                    fn_: 0,
                    distinct_ci: 0,
                    total_ci: 0,
                    max_level: 0,
                    wall_seconds: 0.0,
                    error: String::new(),
                };
                let (dag, desc) = match generate(cfg.family, p, density, seed) {
                    Ok(x) => x,
                    Err(msg) => {
                        log::warn!("p={p} density={density} seed={seed}: {msg}");
                        for &tester in &cfg.testers {
                            for &algo in &cfg.algos {
                                let n = (tester == TesterKind::FisherZ).then_some(cfg.n);
                                let mut r = blank(algo, tester, format!("{density}"), n);
                                r.error = msg.clone();
                                out.push(r);
                            }
                        }
                        continue;
                    }
                };
                let truth = essential_graph(&dag);
                for &tester in &cfg.testers {
                    let fz = match tester {
                        TesterKind::Oracle => None,
                        TesterKind::FisherZ => {
                            let data = sample_sem(&SemModel::random(dag.clone(), seed), cfg.n, seed);
                            Some(FisherZ::new(&data, cfg.alpha))
                        }
                    };
                    for &algo in &cfg.algos {
                        let n = fz.is_some().then_some(cfg.n);
                        let rec = blank(algo, tester, desc.clone(), n);
                        let start = Instant::now();
                        let res = match &fz {
                            None => algo.run(&mut CachedTester::new(DSepOracle::new(dag.clone()))),
                            Some(Ok(fz)) => algo.run(&mut CachedTester::new(fz.clone())),
                            Some(Err(e)) => Err(e.clone()),
                        };
                        let secs = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
                        let rec = score(rec, &truth, res, secs);
                        if !rec.is_ok() {
                            log::warn!("{algo}/{tester} p={p} seed={seed}: {}", rec.error);
                        }
                        out.push(rec);
                    }
                }
            }
        }
    }
    out
}

pub fn write_csv<W: std::io::Write>(records: &[RunRecord], writer: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupKey {
    Algo,
    Tester,
    Family,
    P,
    Density,
    N,
}

impl GroupKey {
    fn value(self, r: &RunRecord) -> String {
        match self {
            GroupKey::Algo => r.algo.to_string(),
            GroupKey::Tester => r.tester.to_string(),
            GroupKey::Family => r.family.to_string(),
            GroupKey::P => r.p.to_string(),
            GroupKey::Density => r.density.clone(),
            GroupKey::N => r.n.map_or("inf".into(), |n| n.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single record.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub key: Vec<String>,
    pub count: usize,
    pub metrics: BTreeMap<&'static str, MeanStd>,
}

pub const METRICS: [&str; 9] = [
    "shd",
    "normalized_shd",
    "tp",
    "fp",
    "fn",
    "distinct_ci",
    "total_ci",
    "max_level",
    "wall_seconds",
];

fn metric(r: &RunRecord, name: &str) -> f64 {
    match name {
        "shd" => r.shd as f64,
        "normalized_shd" => r.normalized_shd,
        "tp" => r.tp as f64,
        "fp" => r.fp as f64,
        "fn" => r.fn_ as f64,
        "distinct_ci" => r.distinct_ci as f64,
        "total_ci" => r.total_ci as f64,
        "max_level" => r.max_level as f64,
        "wall_seconds" => r.wall_seconds,
        _ => unreachable!("unknown metric {name}"),
    }
}

pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanStd { mean, std })
}

/// Mean and sample standard deviation of every metric per group. Failed
/// cells are skipped; a group left empty is an error.
pub fn aggregate(records: &[RunRecord], group_by: &[GroupKey]) -> Result<Vec<AggregateRow>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyGroup);
    }
    let mut groups: BTreeMap<Vec<String>, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = group_by.iter().map(|k| k.value(r)).collect();
        groups.entry(key).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for (key, members) in groups {
        let ok: Vec<_> = members.into_iter().filter(|r| r.is_ok()).collect();
        if ok.is_empty() {
            return Err(BenchError::EmptyGroup);
        }
        let metrics = METRICS
            .iter()
            .map(|&m| {
                let vals: Vec<f64> = ok.iter().map(|r| metric(r, m)).collect();
                (m, mean_std(&vals).expect("nonempty"))
            })
            .collect();
        rows.push(AggregateRow {
            key,
            count: ok.len(),
            metrics,
        });
    }
    Ok(rows)
}
