//! Benchmark harness: instances × configurations × seeds, CSV rows and a summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::StorylineInstance;
use crate::models::Formulation;
use crate::solver::{solve_exact, SolveError, SolveOptions, SolveStatus};

use super::{parse_instance, read_text, IoError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchManifest {
    /// Seconds per run.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Instance files, relative to the manifest's directory.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub configs: Vec<BenchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
}

fn default_time_limit() -> f64 {
    3600.0
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub name: String,
    pub formulation: String,
    #[serde(default = "yes")]
    pub sbc: bool,
    #[serde(default)]
    pub init: bool,
    #[serde(default)]
    pub rnd: bool,
}

fn yes() -> bool {
    true
}

impl BenchManifest {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let m: BenchManifest = toml::from_str(text).map_err(|e| IoError::from_toml(text, e))?;
        for c in &m.configs {
            c.formulation.parse::<Formulation>().map_err(IoError::Schema)?;
        }
        if !(m.time_limit > 0.0) {
            return Err(IoError::Schema(format!("time_limit must be positive, got {}", m.time_limit)));
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Self::parse(&read_text(path.as_ref())?)
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub config: String,
    pub formulation: Formulation,
    pub sbc: bool,
    pub init: bool,
    pub rnd: bool,
    pub seed: u64,
    pub status: SolveStatus,
    pub crossings: Option<u64>,
    pub bound: Option<f64>,
    /// Seconds, excluding the initial heuristic.
    pub time: f64,
    pub separation_rounds: usize,
    pub lop_added: usize,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    instance: &'a str,
    config: &'a str,
    formulation: &'a str,
    sbc: bool,
    init: bool,
    rnd: bool,
    seed: u64,
    status: &'a str,
    crossings: Option<u64>,
    bound: Option<f64>,
    time: Option<f64>,
    separation_rounds: usize,
    lop_added: usize,
    error: Option<&'a str>,
}

const CSV_HEADER: [&str; 14] = [
    "instance",
    "config",
    "formulation",
    "sbc",
    "init",
    "rnd",
    "seed",
    "status",
    "crossings",
    "bound",
    "time",
    "separation_rounds",
    "lop_added",
    "error",
];

/// Writes rows as CSV. Without `record_time` the time column stays empty so the
/// output is reproducible.
pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W, record_time: bool) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(CsvRecord {
            instance: &r.instance,
            config: &r.config,
            formulation: r.formulation.name(),
            sbc: r.sbc,
            init: r.init,
            rnd: r.rnd,
            seed: r.seed,
            status: r.status.name(),
            crossings: r.crossings,
            bound: r.bound,
            time: record_time.then_some(r.time),
            separation_rounds: r.separation_rounds,
            lop_added: r.lop_added,
            error: r.error.as_deref(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Speedup {
    pub baseline: String,
    pub contender: String,
    /// Geometric mean of baseline time over contender time.
    pub geomean: f64,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchSummary {
    /// Instances whose median run is optimal, per configuration.
    pub solved: BTreeMap<String, usize>,
    /// Median run per (instance, configuration).
    pub median: BTreeMap<(String, String), BenchRow>,
    pub speedups: Vec<Speedup>,
}

impl BenchSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::from("config\tsolved\n");
        for (c, n) in &self.solved {
            s.push_str(&format!("{c}\t{n}\n"));
        }
        s.push_str("baseline\tcontender\tgeomean_speedup\tcommon\n");
        for sp in &self.speedups {
            s.push_str(&format!("{}\t{}\t{:.3}\t{}\n", sp.baseline, sp.contender, sp.geomean, sp.instances));
        }
        s
    }
}

/// Median over seeds by runtime; ties keep the smaller seed.
fn median_run(runs: &[&BenchRow]) -> BenchRow {
    let mut sorted: Vec<&BenchRow> = runs.to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.seed.cmp(&b.seed)));
    sorted[(sorted.len() - 1) / 2].clone()
}

pub fn summarize(rows: &[BenchRow], configs: &[String]) -> BenchSummary {
    let mut groups: BTreeMap<(String, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.instance.clone(), r.config.clone())).or_default().push(r);
    }
    let median: BTreeMap<(String, String), BenchRow> = groups.into_iter().map(|(k, runs)| (k, median_run(&runs))).collect();
    let mut solved: BTreeMap<String, usize> = configs.iter().map(|c| (c.clone(), 0)).collect();
    for ((_, c), r) in &median {
        if r.status == SolveStatus::Optimal {
            *solved.entry(c.clone()).or_default() += 1;
        }
    }
    let instances: Vec<&String> = {
        let mut v: Vec<&String> = median.keys().map(|(i, _)| i).collect();
        v.dedup();
        v
    };
    let mut speedups = Vec::new();
    for (a, ca) in configs.iter().enumerate() {
        for cb in configs.iter().skip(a + 1) {
            let mut log_sum = 0.0;
            let mut count = 0;
            for inst in &instances {
                let ra = median.get(&((*inst).clone(), ca.clone()));
                let rb = median.get(&((*inst).clone(), cb.clone()));
                if let (Some(ra), Some(rb)) = (ra, rb) {
                    if ra.status == SolveStatus::Optimal && rb.status == SolveStatus::Optimal {
                        // guard against timer resolution on trivial instances
                        let (ta, tb) = (ra.time.max(1e-6), rb.time.max(1e-6));
                        log_sum += (ta / tb).ln();
                        count += 1;
                    }
                }
            }
            if count > 0 {
                speedups.push(Speedup {
                    baseline: ca.clone(),
                    contender: cb.clone(),
                    geomean: (log_sum / count as f64).exp(),
                    instances: count,
                });
            }
        }
    }
    BenchSummary {
        solved,
        median,
        speedups,
    }
}

fn run_one(inst: &Result<StorylineInstance, String>, name: &str, cfg: &BenchConfig, seed: u64, m: &BenchManifest) -> BenchRow {
    let formulation: Formulation = cfg.formulation.parse().expect("validated in parse");
    let mut row = BenchRow {
        instance: name.to_string(),
        config: cfg.name.clone(),
        formulation,
        sbc: cfg.sbc,
        init: cfg.init,
        rnd: cfg.rnd,
        seed,
        status: SolveStatus::Error,
        crossings: None,
        bound: None,
        time: 0.0,
        separation_rounds: 0,
        lop_added: 0,
        error: None,
    };
    let inst = match inst {
        Ok(i) => i,
        Err(e) => {
            row.error = Some(e.clone());
            return row;
        }
    };
    let opts = SolveOptions {
        sbc: cfg.sbc,
        init: cfg.init,
        rnd: cfg.rnd,
        time_limit: m.time_limit,
        seed,
        backend: m.backend.clone(),
        ..SolveOptions::default()
    };
    let report = match solve_exact(inst, formulation, &opts) {
        Ok((_, r)) => {
            row.crossings = Some(r.best_crossings);
            r
        }
        Err(SolveError::Infeasible(r)) | Err(SolveError::NoSolution(r)) => *r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.status = report.status;
    row.bound = Some(report.bound);
    row.time = report.wall_time;
    row.separation_rounds = report.separation_rounds;
    row.lop_added = report.lop_added;
    row
}

/// Runs every (instance, configuration, seed) combination in parallel. Rows come
/// back in manifest order. Unreadable instances give error rows.
pub fn run_bench(m: &BenchManifest, base: &Path) -> (Vec<BenchRow>, BenchSummary) {
    let loaded: Vec<(String, Result<StorylineInstance, String>)> = m
        .instances
        .iter()
        .map(|p| {
            let path = base.join(p);
            (p.display().to_string(), parse_instance(&path).map_err(|e| e.to_string()))
        })
        .collect();
    let jobs: Vec<(usize, usize, u64)> = (0..loaded.len())
        .flat_map(|i| (0..m.configs.len()).flat_map(move |c| m.seeds.iter().map(move |&s| (i, c, s))))
        .collect();
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(i, c, s)| run_one(&loaded[i].1, &loaded[i].0, &m.configs[c], s, m))
        .collect();
    let names: Vec<String> = m.configs.iter().map(|c| c.name.clone()).collect();
    let summary = summarize(&rows, &names);
    (rows, summary)
}
