//! Counter-level checks of the block environment model.

use lambdix_core::corpus;
use lambdix_core::env::InstallTrace;
use lambdix_core::{read_program, Config, Counters, Interpreter, Strategy};

fn big_stack<F: FnOnce() + Send + 'static>(f: F) {
    std::thread::Builder::new().stack_size(1 << 30).spawn(f).unwrap().join().unwrap();
}

fn interp(strategy: Strategy) -> Interpreter {
    Interpreter::new(Config::new(strategy))
}

/// Counters and install trace for evaluating `probe` after `setup`.
fn measure(strategy: Strategy, setup: &str, probe: &str) -> (Counters, Vec<InstallTrace>, String) {
    let mut i = interp(strategy);
    i.run_program(setup).unwrap();
    let before = i.counters();
    i.runtime_mut().set_tracing(true);
    let out = i.eval_to_string(probe).unwrap();
    let trace = i.runtime_mut().take_trace();
    (i.counters().delta(&before), trace, out)
}

fn depth_of(i: &Interpreter, t: &InstallTrace) -> u32 {
    i.structs().get(t.target).depth
}

const FIB: &str = "(de (fib n) (if (< n 2) n (+ (fib (- n 1)) (fib (- n 2)))))";
const FIB2: &str = "(de (fib2 n a b) (if (< n 2) n (+ (fib2 (- n 1) a b) (fib2 (- n 2) a b))))";

#[test]
fn self_recursion_costs_one_test_per_install() {
    for strategy in Strategy::BOTH {
        let (c, trace, out) = measure(strategy, FIB, "(fib 15)");
        assert_eq!(out, "610");
        assert_eq!(c.closure_calls, 1973);
        assert!(trace.iter().all(|t| t.tests == 1 && t.assignments <= 1), "{:?}", strategy);
        if strategy == Strategy::Value {
            assert_eq!(c.installs, c.closure_calls);
            assert_eq!(c.switch_tests, c.closure_calls);
            assert_eq!(c.switch_assignments, c.closure_calls);
        }
    }
}

#[test]
fn reentering_the_current_environment_is_free() {
    // The argument thunk belongs to top level, whose block is permanent:
    // installing it tests nothing. The second read of `n` hits the memo.
    let (_, trace, _) = measure(Strategy::Need, "(de (id n) (+ n n))", "(id (+ 1 2))");
    assert_eq!(trace.iter().map(|t| (t.tests, t.assignments)).collect::<Vec<_>>(), vec![(1, 1), (0, 0)]);
    let (_, trace, _) = measure(
        Strategy::Need,
        "(de (outer x) ((lambda (y) (+ y y)) (+ x 1)))",
        "(outer 1)",
    );
    // outer, the inner lambda, then the thunk for (+ x 1) installed over
    // outer's block, which is still current: one test, no assignment.
    assert_eq!(trace.iter().map(|t| (t.tests, t.assignments)).collect::<Vec<_>>(), vec![(1, 1), (2, 1), (1, 0)]);
}

const NESTED: &str = "(de (f a)
  (let ((b (+ a 1)))
    (let ((c (+ b 1)))
      (let ((de (g x) (+ x c)))
        g))))";

#[test]
fn nested_lets_match_hand_trace() {
    let mut i = interp(Strategy::Value);
    i.run_program(NESTED).unwrap();
    i.runtime_mut().set_tracing(true);
    assert_eq!(i.eval_to_string("((f 1) 10)").unwrap(), "13");
    let trace = i.runtime_mut().take_trace();
    let costs: Vec<_> = trace.iter().map(|t| (depth_of(&i, t), t.tests, t.assignments)).collect();
    // f, the three lets while building g, then g called from top level
    // after every link on its chain was restored: all five are stale.
    assert_eq!(costs, vec![(0, 1, 1), (1, 2, 1), (2, 2, 1), (3, 2, 1), (4, 5, 5)]);
}

#[test]
fn install_tests_never_exceed_depth_plus_one() {
    for strategy in Strategy::BOTH {
        let mut i = interp(strategy);
        i.run_program(NESTED).unwrap();
        i.runtime_mut().set_tracing(true);
        i.eval_to_string("((f 1) 10)").unwrap();
        i.eval_to_string("(+ ((f 2) 3) ((f 4) 5))").unwrap();
        let trace = i.runtime_mut().take_trace();
        assert!(!trace.is_empty());
        for t in &trace {
            assert!(t.tests <= depth_of(&i, t) + 1, "{:?} {:?}", strategy, t);
            assert!(t.assignments <= t.tests);
        }
    }
}

#[test]
fn switching_cost_does_not_depend_on_arity() {
    big_stack(|| {
        for strategy in Strategy::BOTH {
            let (a, _, x) = measure(strategy, FIB, "(fib 20)");
            let (b, _, y) = measure(strategy, FIB2, "(fib2 20 0 0)");
            assert_eq!((x.as_str(), y.as_str()), ("6765", "6765"));
            assert_eq!(a.closure_calls, b.closure_calls);
            assert_eq!(a.switch_tests, b.switch_tests, "{:?}", strategy);
            assert_eq!(a.switch_assignments, b.switch_assignments, "{:?}", strategy);
        }
    });
}

#[test]
fn global_lookup_cost_is_independent_of_recursion_depth() {
    big_stack(|| {
        let setup = "(de k 7)
            (de (with n) (if (= n 0) (+ k k) (with (- n 1))))
            (de (without n) (if (= n 0) 0 (without (- n 1))))";
        for strategy in Strategy::BOTH {
            let cost = |depth: u32| {
                let (with, _, _) = measure(strategy, setup, &format!("(with {})", depth));
                let (without, _, _) = measure(strategy, setup, &format!("(without {})", depth));
                with.lookups - without.lookups
            };
            assert_eq!(cost(10), cost(10_000));
            // `+` and `k` twice.
            assert_eq!(cost(10), 3);
        }
    });
}

#[test]
fn closures_keep_their_defining_block() {
    for strategy in Strategy::BOTH {
        let mut i = interp(strategy);
        i.run_program("(define BuildConstFunc (x) (lambda (y) x))").unwrap();
        assert_eq!(i.eval_to_string("((BuildConstFunc 0) 1)").unwrap(), "0");
        assert_eq!(i.eval_to_string("(de k (BuildConstFunc 0))").unwrap(), "#<closure lambda>");
        assert_eq!(i.eval_to_string("(+ (k 1) (k 2))").unwrap(), "0");
    }
}

/// A child environment re-entered inside a fresh activation of its
/// ancestor. Stopping the walk on a matching block alone reads `n` from
/// the wrong activation here and never terminates.
#[test]
fn stale_ancestor_below_a_current_link() {
    big_stack(|| {
        for strategy in Strategy::BOTH {
            let mut i = Interpreter::new(Config::new(strategy).with_step_limit(10_000));
            let out = i.eval_to_string("(de (p n b) (if b n ((lambda (k) (p 100 (= n 5))) 0))) (p 5 false)");
            assert_eq!(out.unwrap(), "100", "{:?}", strategy);
        }
    });
}

fn snapshots_hold(strategy: Strategy, text: &str) {
    let mut i = interp(strategy);
    let forms = read_program(text).unwrap();
    for form in &forms {
        let before = i.link_snapshot();
        let _ = i.eval_toplevel(form);
        let after = i.link_snapshot();
        assert_eq!(&after[..before.len()], &before[..], "{}", text);
        assert!(after[before.len()..].iter().all(|l| *l == (None, 0)), "{}", text);
    }
}

#[test]
fn links_are_restored_after_every_toplevel_form() {
    big_stack(|| {
        for strategy in Strategy::BOTH {
            snapshots_hold(strategy, NESTED);
            snapshots_hold(strategy, &format!("{}\n((f 1) 10)\n(f 2)\n((f 1) (car ()))", NESTED));
            snapshots_hold(strategy, corpus::MAPFUN);
            snapshots_hold(strategy, "(de (loop n) (loop n)) (loop 1) (/ 1 0)");
        }
    });
}

#[test]
fn blocks_are_allocated_for_zero_argument_calls() {
    let (c, _, out) = measure(Strategy::Value, "(de (five) 5)", "(+ (five) (five))");
    assert_eq!(out, "10");
    assert_eq!(c.blocks_allocated, 2);
}
