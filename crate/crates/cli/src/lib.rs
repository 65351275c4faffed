//! Command-line front end for the Lambdix interpreter: REPL, script
//! runner, differential self-test and the benchmark harness.

pub mod bench;
pub mod repl;
pub mod selftest;

use lambdix_core::{Error, ErrorCategory};

/// The evaluator recurses on the native stack, so every run happens on a
/// thread this large.
pub const STACK_SIZE: usize = 1 << 30;

pub mod exit {
    pub const OK: i32 = 0;
    pub const EVAL_ERROR: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const SELFTEST_MISMATCH: i32 = 3;
    pub const LIMIT: i32 = 4;
}

pub fn on_big_stack<T, F>(f: F) -> T
where
    T: Send + 'static,
    F: FnOnce() -> T + Send + 'static,
{
    std::thread::Builder::new()
        .name("lambdix".into())
        .stack_size(STACK_SIZE)
        .spawn(f)
        .expect("spawning the evaluator thread")
        .join()
        .unwrap_or_else(|panic| std::panic::resume_unwind(panic))
}

pub fn exit_code(err: &Error) -> i32 {
    match err.category() {
        ErrorCategory::LimitExceeded => exit::LIMIT,
        _ => exit::EVAL_ERROR,
    }
}

/// The REPL's error line.
pub fn error_line(err: &Error) -> String {
    format!("** error - {} **", err)
}
