//! Benchmark harness: runs an instance set against a configuration matrix and
//! reports one CSV row per (instance, config) pair plus a per-config summary
//! block.
//!
//! Work is distributed over a fixed pool of worker threads; each solver run is
//! confined to one worker and rows are written into pre-assigned slots, so the
//! CSV is deterministic regardless of scheduling (timing columns aside).  A
//! panicking run is caught and recorded as an `Error` row; the harness keeps
//! going.

use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use omtlite::encoders::{ChunkPolicy, Encoding};
use omtlite::omt::SearchStrategy;
use omtlite::smt::{EpPolicy, SmtStats};

use crate::ast::Script;
use crate::run::{self, EngineKind, EngineOpts, ObjValue, RunStatus};

/// One cell of the configuration matrix.
#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub engine: EngineKind,
    pub encoding: Encoding,
    pub search: SearchStrategy,
    pub chunk: ChunkPolicy,
    pub ep: EpPolicy,
}

fn encoding_name(e: Encoding) -> &'static str {
    match e {
        Encoding::None => "none",
        Encoding::SeqCounter => "seqcounter",
        Encoding::CardNet => "cardnet",
    }
}

fn search_name(s: SearchStrategy) -> &'static str {
    match s {
        SearchStrategy::Linear => "linear",
        SearchStrategy::Binary => "binary",
        SearchStrategy::Adaptive => "adaptive",
    }
}

fn chunk_name(c: ChunkPolicy) -> String {
    match c {
        ChunkPolicy::Unlimited => "inf".to_string(),
        ChunkPolicy::Size(n) => n.to_string(),
    }
}

fn ep_name(ep: EpPolicy) -> &'static str {
    match ep {
        EpPolicy::Off => "off",
        EpPolicy::Decision => "decision",
        EpPolicy::Fixpoint => "fixpoint",
    }
}

impl BenchConfig {
    pub fn omt(encoding: Encoding, search: SearchStrategy, chunk: ChunkPolicy) -> Self {
        BenchConfig {
            engine: EngineKind::Omt,
            encoding,
            search,
            chunk,
            ep: EpPolicy::Fixpoint,
        }
    }

    pub fn maxsat() -> Self {
        BenchConfig {
            engine: EngineKind::Maxsat,
            encoding: Encoding::None,
            search: SearchStrategy::Linear,
            chunk: ChunkPolicy::Unlimited,
            ep: EpPolicy::Fixpoint,
        }
    }

    pub fn label(&self) -> String {
        match self.engine {
            EngineKind::Maxsat => "maxsat".to_string(),
            EngineKind::Omt => format!(
                "omt-{}-{}-{}",
                encoding_name(self.encoding),
                search_name(self.search),
                chunk_name(self.chunk)
            ),
        }
    }

    fn opts(&self, timeout_ms: Option<u64>) -> EngineOpts {
        EngineOpts {
            engine: self.engine,
            encoding: self.encoding,
            chunk: self.chunk,
            search: self.search,
            ep: self.ep,
            timeout_ms,
        }
    }

    /// CSV cells describing the config.  The core-guided engine has no
    /// encoding/search/chunk knobs, so those cells are dashes.
    fn csv_cells(&self) -> String {
        match self.engine {
            EngineKind::Maxsat => format!("maxsat,-,-,-,{}", ep_name(self.ep)),
            EngineKind::Omt => format!(
                "omt,{},{},{},{}",
                encoding_name(self.encoding),
                search_name(self.search),
                chunk_name(self.chunk),
                ep_name(self.ep)
            ),
        }
    }
}

/// Full matrix: every OMT encoding x search strategy x chunk policy, plus the
/// core-guided MaxSAT engine.
pub fn default_matrix() -> Vec<BenchConfig> {
    let mut out = Vec::new();
    for encoding in [Encoding::None, Encoding::SeqCounter, Encoding::CardNet] {
        for search in [
            SearchStrategy::Linear,
            SearchStrategy::Binary,
            SearchStrategy::Adaptive,
        ] {
            for chunk in [ChunkPolicy::Unlimited, ChunkPolicy::Size(4)] {
                out.push(BenchConfig::omt(encoding, search, chunk));
            }
        }
    }
    out.push(BenchConfig::maxsat());
    out
}

/// One (instance, config) result.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub instance: String,
    pub config: BenchConfig,
    pub status: &'static str,
    pub optimum: String,
    pub bound: String,
    pub cuts: usize,
    pub stats: SmtStats,
    pub time_ms: u64,
}

pub const CSV_HEADER: &str = "instance,engine,encoding,search,chunk,ep,status,optimum,bound,\
                              cuts,decisions,propagations,conflicts,restarts,learned,\
                              theory_checks,theory_conflicts,objective_theory_conflicts,time_ms";

impl BenchRow {
    fn csv(&self) -> String {
        let s = &self.stats;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.config.csv_cells(),
            self.status,
            self.optimum,
            self.bound,
            self.cuts,
            s.search.decisions,
            s.search.propagations,
            s.search.conflicts,
            s.search.restarts,
            s.search.learned,
            s.theory_checks,
            s.theory_conflicts,
            s.objective_theory_conflicts,
            self.time_ms,
        )
    }
}

fn optimum_cell(values: &[ObjValue]) -> String {
    let mut parts = Vec::new();
    for v in values {
        match v {
            ObjValue::Known { value, .. } => parts.push(value.to_string()),
            ObjValue::Unbounded => parts.push("unbounded".to_string()),
            ObjValue::Unknown => parts.push("?".to_string()),
        }
    }
    parts.join(";")
}

fn run_task(instance: &str, script: &Script, config: &BenchConfig, timeout_ms: Option<u64>) -> BenchRow {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        run::execute(script, &config.opts(timeout_ms))
    }));
    let time_ms = start.elapsed().as_millis() as u64;
    let mut row = BenchRow {
        instance: instance.to_string(),
        config: *config,
        status: "Error",
        optimum: String::new(),
        bound: String::new(),
        cuts: 0,
        stats: SmtStats::default(),
        time_ms,
    };
    let Ok(Ok((_, exec))) = outcome else {
        return row;
    };
    row.status = exec.status.label();
    row.cuts = exec.cuts;
    row.stats = exec.stats;
    match exec.status {
        RunStatus::Optimal | RunStatus::Unbounded => row.optimum = optimum_cell(&exec.values),
        RunStatus::Timeout => {
            if let Some(b) = &exec.best_bound {
                row.bound = b.to_string();
            }
        }
        RunStatus::Sat | RunStatus::Unsat => {}
    }
    row
}

/// Runs every config against every instance and renders the CSV report.
/// `jobs` bounds worker parallelism; rows come out in (config, instance)
/// order no matter how the workers are scheduled.
pub fn run_bench(
    instances: &[(String, Script)],
    configs: &[BenchConfig],
    jobs: usize,
    timeout_ms: Option<u64>,
) -> String {
    let total = configs.len() * instances.len();
    let slots: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; total]);
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(total.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= total {
                    break;
                }
                let (ci, ii) = (idx / instances.len(), idx % instances.len());
                let (name, script) = &instances[ii];
                let row = run_task(name, script, &configs[ci], timeout_ms);
                slots.lock().unwrap()[idx] = Some(row);
            });
        }
    });

    let rows: Vec<BenchRow> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect();

    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &rows {
        out.push_str(&row.csv());
        out.push('\n');
    }
    for (ci, config) in configs.iter().enumerate() {
        let block = &rows[ci * instances.len()..(ci + 1) * instances.len()];
        let terminated = block
            .iter()
            .filter(|r| matches!(r.status, "Optimal" | "Sat" | "Unsat" | "Unbounded"))
            .count();
        let timeout = block.iter().filter(|r| r.status == "Timeout").count();
        let error = block.iter().filter(|r| r.status == "Error").count();
        let total_ms: u64 = block.iter().map(|r| r.time_ms).sum();
        out.push_str(&format!(
            "# config {} terminated={} timeout={} error={} total_ms={}\n",
            config.label(),
            terminated,
            timeout,
            error,
            total_ms
        ));
    }
    out
}

/// Strips the timing fields (the `time_ms` column and the summary `total_ms`
/// token) so two reports can be compared for determinism.
pub fn mask_timing(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        if line.starts_with("# config ") {
            match line.rsplit_once(" total_ms=") {
                Some((head, _)) => out.push_str(head),
                None => out.push_str(line),
            }
        } else {
            match line.rsplit_once(',') {
                Some((head, _)) => out.push_str(head),
                None => out.push_str(line),
            }
        }
        out.push('\n');
    }
    out
}
