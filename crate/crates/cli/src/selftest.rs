//! The golden corpus plus a seeded differential batch against the oracle.

use lambdix_core::corpus::GOLDEN;
use lambdix_core::oracle::differential_run;
use lambdix_core::{gen, Config, Strategy};

/// Step budget shared by both interpreters in differential runs.
pub const DIFF_STEP_LIMIT: u64 = 10_000;

#[derive(Debug, Default)]
pub struct Report {
    pub golden_passed: usize,
    pub golden_total: usize,
    pub programs_matched: usize,
    pub programs_total: usize,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "golden: {}/{} passed\ndifferential: {}/{} programs matched",
            self.golden_passed, self.golden_total, self.programs_matched, self.programs_total
        )
    }
}

pub fn golden(report: &mut Report) {
    for case in GOLDEN {
        for strategy in case.strategies() {
            report.golden_total += 1;
            let (out, ok) = case.run(strategy);
            if ok {
                report.golden_passed += 1;
            } else {
                report.failures.push(format!("golden {} ({}): got {}", case.name, strategy.name(), out));
            }
        }
    }
}

/// A program matches when both strategies agree with the oracle.
pub fn differential(report: &mut Report, seed: u64, count: usize) {
    for (index, program) in gen::batch(seed, count).into_iter().enumerate() {
        report.programs_total += 1;
        let mut matched = true;
        for strategy in Strategy::BOTH {
            let config = Config::new(strategy).with_step_limit(DIFF_STEP_LIMIT);
            let (main, oracle, same) = differential_run(&program, config);
            if !same {
                matched = false;
                report.failures.push(format!(
                    "program {} of seed {} ({}):\n{}interpreter: {}\noracle: {}",
                    index,
                    seed,
                    strategy.name(),
                    program,
                    main,
                    oracle
                ));
            }
        }
        if matched {
            report.programs_matched += 1;
        }
    }
}

pub fn selftest(count: usize, seed: u64) -> Report {
    let mut report = Report::default();
    golden(&mut report);
    differential(&mut report, seed, count);
    report
}
