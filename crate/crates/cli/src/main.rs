use std::io::{self, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambdix::bench::{self, BenchOptions};
use lambdix::repl::Session;
use lambdix::{error_line, exit, exit_code, on_big_stack, selftest};
use lambdix_core::corpus;
use lambdix_core::{Config, Counters, Interpreter, PrintDepth, Strategy};

#[derive(Parser, Debug)]
#[command(name = "lambdix", version, about = "A lazy, lexically scoped Lisp with call by value and call by need")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Evaluation strategy; bench runs both when omitted.
    #[arg(long, global = true, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Report evaluation counters.
    #[arg(long, global = true)]
    stats: bool,
    /// Closure applications allowed per top-level form.
    #[arg(long, global = true)]
    step_limit: Option<u64>,
    #[arg(long, global = true, default_value_t = lambdix_core::eval::DEFAULT_DEPTH_LIMIT)]
    depth_limit: usize,
    /// Elements printed per list before `...`.
    #[arg(long, global = true, default_value_t = 100)]
    print_depth: usize,
    /// List nesting printed before `...`.
    #[arg(long, global = true, default_value_t = 20)]
    print_nesting: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interactive session (the default).
    Repl,
    /// Evaluate every form of a file.
    Run { file: PathBuf },
    /// Time the benchmark suite under each strategy.
    Bench {
        /// Programs to run (default: all).
        programs: Vec<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Also write the results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Golden corpus plus random programs checked against the oracle.
    Selftest {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

impl Opts {
    fn config(&self) -> Config {
        let mut c = Config::new(self.strategy.unwrap_or(Strategy::Need)).with_depth_limit(self.depth_limit);
        c.step_limit = self.step_limit;
        c.print = PrintDepth { elements: self.print_depth, nesting: self.print_nesting };
        c
    }
}

fn print_stats(counters: &Counters) {
    for (name, value) in counters.as_pairs() {
        eprintln!("{}\t{}", name, value);
    }
}

fn run_file(opts: Opts, file: PathBuf) -> i32 {
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("lambdix: cannot read {}: {}", file.display(), e);
            return exit::EVAL_ERROR;
        }
    };
    let forms = match lambdix_core::read_program(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}", error_line(&e.into()));
            return exit::EVAL_ERROR;
        }
    };
    let mut interp = Interpreter::new(opts.config());
    let mut code = exit::OK;
    let stdout = io::stdout();
    for form in &forms {
        let result = interp.eval_toplevel(form);
        let mut out = stdout.lock();
        let _ = out.write_all(interp.take_output().as_bytes());
        let _ = out.flush();
        if let Err(e) = result {
            eprintln!("{}", error_line(&e));
            code = exit_code(&e);
            break;
        }
    }
    if opts.stats {
        print_stats(&interp.counters());
    }
    code
}

fn repl(opts: Opts) -> i32 {
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    let mut session = Session::new(Interpreter::new(opts.config()), io::stdout(), opts.stats);
    match session.run(stdin.lock(), prompt) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("lambdix: {}", e);
            exit::EVAL_ERROR
        }
    }
}

fn run_bench(opts: Opts, programs: Vec<String>, reps: usize, json: Option<PathBuf>) -> i32 {
    if reps == 0 {
        eprintln!("lambdix: --reps must be at least 1");
        return exit::USAGE;
    }
    let mut suite = corpus::suite();
    if !programs.is_empty() {
        if let Some(unknown) = programs.iter().find(|p| !suite.iter().any(|b| b.name == p.as_str())) {
            let names: Vec<&str> = suite.iter().map(|b| b.name).collect();
            eprintln!("lambdix: unknown benchmark `{}` (available: {})", unknown, names.join(", "));
            return exit::USAGE;
        }
        suite.retain(|b| programs.iter().any(|p| p == b.name));
    }
    let strategies: Vec<Strategy> = match opts.strategy {
        Some(s) => vec![s],
        None => Strategy::BOTH.to_vec(),
    };
    let options = BenchOptions { reps, step_limit: opts.step_limit, depth_limit: opts.depth_limit };
    let results = bench::run_suite(&suite, &strategies, options);
    print!("{}", bench::tsv(&results));
    let comparisons = bench::comparisons(&results);
    if !comparisons.is_empty() {
        println!();
        print!("{}", bench::comparison_tsv(&comparisons));
    }
    if opts.stats {
        for r in &results {
            eprintln!("{} {}", r.program, r.strategy);
            print_stats(&r.counters);
        }
    }
    if let Some(path) = json {
        if let Err(e) = std::fs::write(&path, bench::json(&results)) {
            eprintln!("lambdix: cannot write {}: {}", path.display(), e);
            return exit::EVAL_ERROR;
        }
    }
    if results.iter().all(|r| r.is_ok()) {
        exit::OK
    } else if results.iter().any(|r| r.status == "limit-exceeded") {
        exit::LIMIT
    } else {
        exit::EVAL_ERROR
    }
}

fn run_selftest(count: usize, seed: u64) -> i32 {
    if count == 0 {
        eprintln!("lambdix: --count must be at least 1");
        return exit::USAGE;
    }
    let report = selftest::selftest(count, seed);
    for f in &report.failures {
        println!("MISMATCH {}", f);
    }
    println!("{}", report.summary());
    if report.passed() {
        println!("selftest passed");
        exit::OK
    } else {
        println!("selftest FAILED");
        exit::SELFTEST_MISMATCH
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = on_big_stack(move || {
        let opts = cli.opts;
        match cli.command.unwrap_or(Command::Repl) {
            Command::Repl => repl(opts),
            Command::Run { file } => run_file(opts, file),
            Command::Bench { programs, reps, json } => run_bench(opts, programs, reps, json),
            Command::Selftest { count, seed } => run_selftest(count, seed),
        }
    });
    ExitCode::from(code as u8)
}
