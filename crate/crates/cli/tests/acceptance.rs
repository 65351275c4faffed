//! Acceptance criteria 1 to 8. Runs without the test harness so that one
//! PASS/FAIL line per criterion is always printed; exits nonzero if any
//! criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lambdix::bench::{self, BenchOptions};
use lambdix_core::corpus::{self, Benchmark};
use lambdix_core::oracle::differential_run;
use lambdix_core::{gen, read_program, Config, ErrorCategory, Interpreter, Outcome, Strategy};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn run(strategy: Strategy, step_limit: Option<u64>, src: &str) -> Outcome {
    let mut config = Config::new(strategy);
    config.step_limit = step_limit;
    Interpreter::new(config).run_outcome(src)
}

fn value_of(strategy: Strategy, src: &str) -> Result<String, String> {
    run(strategy, Some(1_000_000), src).result.map_err(|e| format!("{} ({})", e, e.category()))
}

// 1. Semantic golden corpus.

const BUILD_CONST: &str = "(define BuildConstFunc (x)\n  (lambda(y) x))\n";
const IDENTITY: &str = "(define apply (f x) (f x))\n(define Identity (x)\n  (apply (lambda(y) x) 2))\n";
const F: &str = "(def f (x y)\n  (if (< x 0)\n      1\n      (f (- x 1) (f x y))))\n";
const FROM: &str = "(de (from x)\n  (cons x (from (+ x 1))))\n";

fn golden_corpus() -> Check {
    let start = Instant::now();
    let both: &[(&str, String, &str)] = &[
        ("BuildConstFunc 1", format!("{}((BuildConstFunc 0) 1)", BUILD_CONST), "0"),
        ("BuildConstFunc 2", format!("{}((BuildConstFunc 0) 2)", BUILD_CONST), "0"),
        ("Identity", format!("{}(Identity 45)", IDENTITY), "45"),
        ("footnote term", "((lambda (x) ((lambda (y) ((lambda (x) y) 'B)) x)) 'A)".into(), "A"),
        ("mapfun", "(de (mapfun f l) (if (nullist l) () (cons (! (cons f (car l))) (mapfun f (cdr l)))))\n(mapfun + '((1 2) (2 3) (3 4)))".into(), "(3 5 7)"),
        ("de value", "(de x 3)".into(), "3"),
        ("de function", "(de (f x) (+ x 1))\n(f 2)".into(), "3"),
    ];
    let mut checked = 0;
    for (name, src, want) in both {
        for s in Strategy::BOTH {
            let got = value_of(s, src);
            ensure!(got.as_deref() == Ok(*want), "{} under {}: {:?}, want {}", name, s.name(), got, want);
            checked += 1;
        }
    }
    let need_only: &[(&str, String, &str)] = &[
        ("(f 1 2)", format!("{}(f 1 2)", F), "1"),
        ("(cadr x)", "(de x (cons 1 x))\n(cadr x)".into(), "1"),
        ("(cadr (from 2))", format!("{}(cadr (from 2))", FROM), "3"),
    ];
    for (name, src, want) in need_only {
        let got = value_of(Strategy::Need, src);
        ensure!(got.as_deref() == Ok(*want), "{} under need: {:?}, want {}", name, got, want);
        checked += 1;
    }
    let diverging = run(Strategy::Value, Some(1_000_000), &format!("{}(f 1 2)", F));
    ensure!(diverging.is_limit(), "(f 1 2) under value with 10^6 steps: {}", diverging);
    checked += 1;
    for case in corpus::GOLDEN {
        for s in case.strategies() {
            let (out, ok) = case.run(s);
            ensure!(ok, "shipped case {} under {}: {}", case.name, s.name(), out);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "corpus took {:?}", elapsed);
    Ok(format!("{} checks in {:.2?}", checked, elapsed))
}

// 2. Differential testing against the oracle.

fn differential() -> Check {
    let mut runs = 0;
    let mut ok = 0;
    for (i, program) in gen::batch(42, 200).iter().enumerate() {
        for s in Strategy::BOTH {
            let (main, oracle, same) = differential_run(program, Config::new(s).with_step_limit(10_000));
            ensure!(same, "program {} under {}:\n{}interpreter: {}\noracle: {}", i, s.name(), program, main, oracle);
            runs += 1;
            ok += main.result.is_ok() as usize;
        }
    }
    Ok(format!("200 programs, {} runs, 0 mismatches ({} ended with a value)", runs, ok))
}

// 3. Environment-model cost properties.

const FIB: &str = "(de (fib n) (if (< n 2) n (+ (fib (- n 1)) (fib (- n 2)))))";
const FIB2: &str = "(de (fib2 n a b) (if (< n 2) n (+ (fib2 (- n 1) a b) (fib2 (- n 2) a b))))";
const NESTED: &str = "(de (f a)
  (let ((b (+ a 1)))
    (let ((c (+ b 1)))
      (let ((de (g x) (+ x c)))
        g))))";

/// Counter delta, (depth, tests, assignments) per install, printed value.
type Traced = (lambdix_core::Counters, Vec<(u32, u32, u32)>, String);

fn traced(strategy: Strategy, setup: &str, probe: &str) -> Result<Traced, String> {
    let mut i = Interpreter::new(Config::new(strategy));
    i.run_program(setup).map_err(|e| e.to_string())?;
    let before = i.counters();
    i.runtime_mut().set_tracing(true);
    let out = i.eval_to_string(probe).map_err(|e| e.to_string())?;
    let trace = i.runtime_mut().take_trace();
    let costs = trace.iter().map(|t| (i.structs().get(t.target).depth, t.tests, t.assignments)).collect();
    Ok((i.counters().delta(&before), costs, out))
}

fn environment_costs() -> Check {
    // (a) One test and at most one assignment per install of fib.
    for s in Strategy::BOTH {
        let (c, trace, out) = traced(s, FIB, "(fib 15)")?;
        ensure!(out == "610", "(fib 15) = {}", out);
        ensure!(c.closure_calls == 1973, "{} closure calls", c.closure_calls);
        ensure!(trace.iter().all(|&(_, t, a)| t == 1 && a <= 1), "fib under {}: costly install in {:?}", s.name(), trace.iter().find(|x| x.1 != 1 || x.2 > 1));
    }
    // (b) The nested-let program against its hand trace.
    let (_, trace, out) = traced(Strategy::Value, NESTED, "((f 1) 10)")?;
    ensure!(out == "13", "((f 1) 10) = {}", out);
    let hand = vec![(0, 1, 1), (1, 2, 1), (2, 2, 1), (3, 2, 1), (4, 5, 5)];
    ensure!(trace == hand, "nested-let trace {:?}, hand trace {:?}", trace, hand);
    for s in Strategy::BOTH {
        let (_, trace, _) = traced(s, NESTED, "(+ ((f 2) 3) ((f 4) 5))")?;
        ensure!(trace.iter().all(|&(d, t, _)| t <= d + 1), "{}: tests exceed depth + 1 in {:?}", s.name(), trace);
    }
    // (c) Arity independence.
    let mut per_call = Vec::new();
    for s in Strategy::BOTH {
        let (a, _, x) = traced(s, FIB, "(fib 20)")?;
        let (b, _, y) = traced(s, FIB2, "(fib2 20 0 0)")?;
        ensure!(x == "6765" && y == "6765", "fib {} fib2 {}", x, y);
        ensure!(
            a.closure_calls == b.closure_calls && a.switch_tests == b.switch_tests && a.switch_assignments == b.switch_assignments,
            "{}: fib {}/{} vs fib2 {}/{} tests/assignments",
            s.name(),
            a.switch_tests,
            a.switch_assignments,
            b.switch_tests,
            b.switch_assignments
        );
        per_call.push(format!("{} {:.2}", s.name(), a.switch_tests as f64 / a.closure_calls as f64));
    }
    // (d) Global lookups do not get dearer with recursion depth.
    let setup = "(de k 7)
        (de (with n) (if (= n 0) (+ k k) (with (- n 1))))
        (de (without n) (if (= n 0) 0 (without (- n 1))))";
    for s in Strategy::BOTH {
        let cost = |depth: u32| -> Result<u64, String> {
            let (with, _, _) = traced(s, setup, &format!("(with {})", depth))?;
            let (without, _, _) = traced(s, setup, &format!("(without {})", depth))?;
            Ok(with.lookups - without.lookups)
        };
        let (shallow, deep) = (cost(10)?, cost(10_000)?);
        ensure!(shallow == deep, "{}: lookup cost {} at depth 10, {} at 10000", s.name(), shallow, deep);
    }
    Ok(format!("fib 1 test per install; nested-let trace matches; tests per call {}; lookup cost flat", per_call.join(", ")))
}

// 4. Restore invariance.

fn restore_invariance() -> Check {
    let mut forms_checked = 0;
    for program in gen::batch(2024, 100) {
        for s in Strategy::BOTH {
            let mut i = Interpreter::new(Config::new(s).with_step_limit(10_000));
            for form in read_program(&program).map_err(|e| e.to_string())? {
                let before = i.link_snapshot();
                let _ = i.eval_toplevel(&form);
                let after = i.link_snapshot();
                ensure!(after[..before.len()] == before[..], "{} under {}: links changed", program, s.name());
                ensure!(after[before.len()..].iter().all(|l| *l == (None, 0)), "{}: new struct left linked", program);
                forms_checked += 1;
            }
        }
    }
    Ok(format!("100 programs, {} top-level evaluations, all links restored", forms_checked))
}

// 5. Laziness economics.

fn counters_of(strategy: Strategy, src: &str) -> Result<lambdix_core::Counters, String> {
    let mut i = Interpreter::new(Config::new(strategy));
    let out = i.run_outcome(src);
    out.result.map_err(|e| e.to_string())?;
    Ok(i.counters())
}

fn laziness_economics() -> Check {
    let lsum = Benchmark { name: "lsum", source: corpus::LSUM.into(), expected_output: "(4 6 10 14 22 26 34 38 46 58)\n".into() };
    let need = counters_of(Strategy::Need, &lsum.source)?;
    let value = counters_of(Strategy::Value, &lsum.source)?;
    let forced_share = need.thunks_forced as f64 / value.args_evaluated as f64;
    ensure!(forced_share <= 0.01, "lsum: need forced {} vs value's {} ({:.2}%)", need.thunks_forced, value.args_evaluated, forced_share * 100.0);
    let opts = BenchOptions { reps: 5, step_limit: None, depth_limit: lambdix_core::eval::DEFAULT_DEPTH_LIMIT };
    let v = bench::run_one(&lsum, Strategy::Value, opts);
    let n = bench::run_one(&lsum, Strategy::Need, opts);
    ensure!(v.is_ok() && n.is_ok(), "lsum status value {} need {}", v.status, n.status);
    let speedup = v.median_ms / n.median_ms;
    ensure!(speedup >= 10.0, "lsum need only {:.1}x faster", speedup);

    let differing = corpus::lcomp_differing();
    let need_c = counters_of(Strategy::Need, &differing)?;
    let leaves = 2 * corpus::LCOMP_LEAVES as u64;
    let leaf_share = need_c.thunks_forced as f64 / leaves as f64;
    ensure!(leaf_share <= 0.05, "lcomp: need forced {} thunks for {} leaves", need_c.thunks_forced, leaves);
    let equal = run(Strategy::Need, None, &corpus::lcomp_equal());
    ensure!(equal.output == "true\n", "lcomp on equal fringes printed {:?}", equal.output);
    Ok(format!(
        "lsum forced {:.3}% ({}/{}), {:.0}x faster; lcomp forced {:.2}% of {} leaves",
        forced_share * 100.0,
        need.thunks_forced,
        value.args_evaluated,
        speedup,
        leaf_share * 100.0,
        leaves
    ))
}

// 6. Laziness overhead bound.

fn overhead_bound() -> Check {
    const REPS: usize = 7;
    let programs = [
        Benchmark { name: "fib", source: corpus::FIB.into(), expected_output: "6765\n".into() },
        Benchmark { name: "tak", source: corpus::TAK.into(), expected_output: "7\n".into() },
    ];
    let single = BenchOptions { reps: 1, step_limit: None, depth_limit: lambdix_core::eval::DEFAULT_DEPTH_LIMIT };
    let mut report = Vec::new();
    for p in &programs {
        // Interleave the strategies so drift in machine load hits both.
        let (mut value_ms, mut need_ms) = (Vec::new(), Vec::new());
        for _ in 0..REPS {
            let v = bench::run_one(p, Strategy::Value, single);
            let n = bench::run_one(p, Strategy::Need, single);
            ensure!(v.is_ok() && n.is_ok(), "{}: value {} need {}", p.name, v.status, n.status);
            ensure!(n.median_ms < 60_000.0, "{} under need took {} ms", p.name, n.median_ms);
            value_ms.push(v.median_ms);
            need_ms.push(n.median_ms);
        }
        let ratio = bench::median(&need_ms) / bench::median(&value_ms);
        ensure!(ratio <= 2.5, "{}: need/value median ratio {:.2}", p.name, ratio);
        report.push(format!("{} {:.2} ({:.1} ms need)", p.name, ratio, bench::median(&need_ms)));
    }
    Ok(format!("need/value over {} reps: {}", REPS, report.join(", ")))
}

// 7. Benchmark outputs against brute-force oracles.

fn brute_fib(n: u64) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

fn brute_tak(x: i64, y: i64, z: i64) -> i64 {
    if y < x {
        brute_tak(brute_tak(x - 1, y, z), brute_tak(y - 1, z, x), brute_tak(z - 1, x, y))
    } else {
        z
    }
}

fn brute_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut k = 2u64;
    while primes.len() < count {
        if (2..k).take_while(|d| d * d <= k).all(|d| !k.is_multiple_of(d)) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

fn verified_outputs() -> Check {
    let primes = brute_primes(400);
    let last = *primes.last().unwrap();
    let sum: u64 = primes.iter().sum();
    let lsum: Vec<String> = primes.iter().take(10).map(|p| (2 * p).to_string()).collect();
    let expected = [
        ("fib", corpus::FIB, format!("{}\n", brute_fib(20))),
        ("fib2", corpus::FIB2, format!("{}\n", brute_fib(20))),
        ("tak", corpus::TAK, format!("{}\n", brute_tak(18, 12, 6))),
        ("sieve", corpus::SIEVE, format!("({} {} {})\n", primes.len(), last, sum)),
        ("lsum", corpus::LSUM, format!("({})\n", lsum.join(" "))),
    ];
    for (name, src, want) in &expected {
        for s in Strategy::BOTH {
            let out = run(s, None, src);
            ensure!(out.result.is_ok() && out.output == *want, "{} under {}: {} (oracle {:?})", name, s.name(), out, want);
        }
    }
    Ok(format!("fib(20)={} tak(18,12,6)={} 400th prime={} under both strategies", brute_fib(20), brute_tak(18, 12, 6), last))
}

// 8. Memoization and blackholes.

fn memo_and_blackholes() -> Check {
    let mut i = Interpreter::new(Config::new(Strategy::Need));
    i.run_program("(de (twice x) (+ x x)) (de (noisy) (print 1)) (de y (+ 40 2))").map_err(|e| e.to_string())?;
    let c0 = i.counters();
    let v = i.eval_to_string("(twice (noisy))").map_err(|e| e.to_string())?;
    let d = i.counters().delta(&c0);
    ensure!(v == "2" && i.take_output() == "1\n", "argument ran more than once");
    ensure!(d.thunks_created == 1 && d.thunks_forced == 1, "argument thunk created {} forced {}", d.thunks_created, d.thunks_forced);
    let c1 = i.counters();
    i.eval_to_string("y").map_err(|e| e.to_string())?;
    let c2 = i.counters();
    i.eval_to_string("(+ y y)").map_err(|e| e.to_string())?;
    let c3 = i.counters();
    ensure!(c2.delta(&c1).thunks_forced == 1, "first use of y forced {}", c2.delta(&c1).thunks_forced);
    ensure!(c3.delta(&c2).thunks_forced == 0, "reuse of y forced {}", c3.delta(&c2).thunks_forced);
    for s in Strategy::BOTH {
        for src in ["(de x x)\nx", "(de x (+ x 1))\nx"] {
            let start = Instant::now();
            let out = run(s, Some(1_000_000), src);
            let cyclic = matches!(&out.result, Err(e) if e.category() == ErrorCategory::Cyclic);
            ensure!(cyclic, "{:?} under {}: {}", src, s.name(), out);
            ensure!(start.elapsed() < Duration::from_secs(1), "{:?} took {:?}", src, start.elapsed());
        }
    }
    Ok("thunks forced once, reuse free; both self-definitions raise cyclic errors".into())
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("semantic golden corpus", golden_corpus),
        ("differential testing", differential),
        ("environment-model costs", environment_costs),
        ("restore invariance", restore_invariance),
        ("laziness economics", laziness_economics),
        ("laziness overhead bound", overhead_bound),
        ("independently verified outputs", verified_outputs),
        ("memoization and blackholes", memo_and_blackholes),
    ];
    let failed = lambdix::on_big_stack(move || {
        let mut failed = 0;
        for (n, (name, check)) in criteria.into_iter().enumerate() {
            let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
                Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
            });
            match result {
                Ok(detail) => println!("criterion {} ({}): PASS - {}", n + 1, name, detail),
                Err(why) => {
                    failed += 1;
                    println!("criterion {} ({}): FAIL - {}", n + 1, name, why);
                }
            }
        }
        failed
    });
    if failed > 0 {
        println!("{} acceptance criteria failed", failed);
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
