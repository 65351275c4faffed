//! Benchmark harness: each program under each strategy, timed over
//! several repetitions, with the counters of one run.

use std::time::Instant;

use lambdix_core::corpus::Benchmark;
use lambdix_core::{Config, Counters, Interpreter, Strategy};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct BenchResult {
    pub program: String,
    pub strategy: &'static str,
    pub median_ms: f64,
    pub switch_tests: u64,
    pub switch_assignments: u64,
    pub thunks_created: u64,
    pub thunks_forced: u64,
    pub blocks_allocated: u64,
    pub digest: String,
    /// `ok`, `wrong-output`, or the error category that stopped the run.
    pub status: String,
    pub times_ms: Vec<f64>,
    #[serde(skip)]
    pub counters: Counters,
}

impl BenchResult {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Need against value for one program.
#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub program: String,
    pub value_ms: f64,
    pub need_ms: f64,
    pub percent_difference: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BenchOptions {
    pub reps: usize,
    pub step_limit: Option<u64>,
    pub depth_limit: usize,
}

/// Short SHA-256 of a run's printed output.
pub fn digest(output: &str) -> String {
    let hash = Sha256::digest(output.as_bytes());
    hash.iter().take(8).map(|b| format!("{:02x}", b)).collect()
}

pub fn median(times: &[f64]) -> f64 {
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Positive when call by need is faster.
pub fn percent_difference(value_ms: f64, need_ms: f64) -> f64 {
    let larger = value_ms.max(need_ms);
    if larger == 0.0 {
        0.0
    } else {
        (value_ms - need_ms) / larger * 100.0
    }
}

/// One interpreter per repetition; repetitions run one after another.
pub fn run_one(bench: &Benchmark, strategy: Strategy, opts: BenchOptions) -> BenchResult {
    let mut times = Vec::with_capacity(opts.reps);
    let mut last = None;
    for _ in 0..opts.reps.max(1) {
        let mut config = Config::new(strategy).with_depth_limit(opts.depth_limit);
        config.step_limit = opts.step_limit;
        let mut interp = Interpreter::new(config);
        let start = Instant::now();
        let outcome = interp.run_outcome(&bench.source);
        times.push(start.elapsed().as_secs_f64() * 1000.0);
        let failed = outcome.result.is_err();
        last = Some((outcome, interp.counters()));
        if failed {
            break;
        }
    }
    let (outcome, counters) = last.expect("at least one repetition");
    let status = match &outcome.result {
        Err(e) => e.category().to_string(),
        Ok(_) if outcome.output != bench.expected_output => "wrong-output".to_string(),
        Ok(_) => "ok".to_string(),
    };
    BenchResult {
        program: bench.name.to_string(),
        strategy: strategy.name(),
        median_ms: median(&times),
        switch_tests: counters.switch_tests,
        switch_assignments: counters.switch_assignments,
        thunks_created: counters.thunks_created,
        thunks_forced: counters.thunks_forced,
        blocks_allocated: counters.blocks_allocated,
        digest: digest(&outcome.output),
        status,
        times_ms: times,
        counters,
    }
}

pub fn run_suite(programs: &[Benchmark], strategies: &[Strategy], opts: BenchOptions) -> Vec<BenchResult> {
    let mut results = Vec::new();
    for bench in programs {
        for &strategy in strategies {
            results.push(run_one(bench, strategy, opts));
        }
    }
    results
}

pub fn comparisons(results: &[BenchResult]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for v in results.iter().filter(|r| r.strategy == "value") {
        if let Some(n) = results.iter().find(|r| r.strategy == "need" && r.program == v.program) {
            out.push(Comparison {
                program: v.program.clone(),
                value_ms: v.median_ms,
                need_ms: n.median_ms,
                percent_difference: percent_difference(v.median_ms, n.median_ms),
            });
        }
    }
    out
}

pub const TSV_HEADER: &str =
    "program\tstrategy\tmedian_ms\tswitch_tests\tswitch_assignments\tthunks_created\tthunks_forced\tblocks_allocated\tdigest";

pub fn tsv(results: &[BenchResult]) -> String {
    let mut s = String::from(TSV_HEADER);
    s.push('\n');
    for r in results {
        let digest = if r.is_ok() { r.digest.clone() } else { format!("{} ({})", r.digest, r.status) };
        s.push_str(&format!(
            "{}\t{}\t{:.3}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.program,
            r.strategy,
            r.median_ms,
            r.switch_tests,
            r.switch_assignments,
            r.thunks_created,
            r.thunks_forced,
            r.blocks_allocated,
            digest
        ));
    }
    s
}

pub fn comparison_tsv(comparisons: &[Comparison]) -> String {
    let mut s = String::from("program\tvalue_ms\tneed_ms\tpercent\n");
    for c in comparisons {
        s.push_str(&format!("{}\t{:.3}\t{:.3}\t{:+.0}\n", c.program, c.value_ms, c.need_ms, c.percent_difference));
    }
    s
}

#[derive(Serialize)]
struct Report<'a> {
    results: &'a [BenchResult],
    comparisons: &'a [Comparison],
}

pub fn json(results: &[BenchResult]) -> String {
    let comparisons = comparisons(results);
    serde_json::to_string_pretty(&Report { results, comparisons: &comparisons }).expect("bench results serialize")
}
