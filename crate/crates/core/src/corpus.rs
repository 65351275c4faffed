//! Shipped programs: the semantic golden corpus and the benchmark suite.

use alloc::format;
use alloc::string::String;

use crate::error::ErrorCategory;
use crate::eval::{Config, Interpreter, Outcome, Strategy};

pub const FIB: &str = include_str!("../programs/fib.lx");
pub const FIB2: &str = include_str!("../programs/fib2.lx");
pub const TAK: &str = include_str!("../programs/tak.lx");
pub const SIEVE: &str = include_str!("../programs/sieve.lx");
pub const LSUM: &str = include_str!("../programs/lsum.lx");
pub const LCOMP: &str = include_str!("../programs/lcomp.lx");
pub const MAPFUN: &str = include_str!("../programs/mapfun.lx");
pub const F_TEST: &str = include_str!("../programs/f-test.lx");
pub const FLIPFLOP: &str = include_str!("../programs/flipflop.lx");

/// Leaves per tree in the same-fringe benchmark.
pub const LCOMP_LEAVES: i64 = 2048;

/// The same-fringe pair that differs at the very first leaf.
pub fn lcomp_differing() -> String {
    format!(
        "{}\n(print (samefringe (build 1 {n}) (cons 0 (cons (build 2 {n}) ()))))\n",
        LCOMP,
        n = LCOMP_LEAVES
    )
}

/// A same-fringe pair with different shapes and equal fringes.
pub fn lcomp_equal() -> String {
    format!("{}\n(print (samefringe (build 1 {n}) (comb 1 {n})))\n", LCOMP, n = LCOMP_LEAVES)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    /// The printed value of the last form.
    Value(&'static str),
    /// A value plus exactly this `print` output.
    Printed(&'static str, &'static str),
    Fails(ErrorCategory),
}

#[derive(Clone, Copy, Debug)]
pub struct GoldenCase {
    pub name: &'static str,
    pub source: &'static str,
    /// `None` means the expectation holds under both strategies.
    pub strategy: Option<Strategy>,
    pub step_limit: Option<u64>,
    pub expect: Expect,
}

impl GoldenCase {
    pub fn strategies(&self) -> impl Iterator<Item = Strategy> + '_ {
        Strategy::BOTH.into_iter().filter(move |s| self.strategy.is_none_or(|only| only == *s))
    }

    /// Runs the case in a fresh interpreter; the flag says whether the
    /// outcome is the expected one.
    pub fn run(&self, strategy: Strategy) -> (Outcome, bool) {
        let mut config = Config::new(strategy);
        config.step_limit = self.step_limit;
        let out = Interpreter::new(config).run_outcome(self.source);
        let ok = match self.expect {
            Expect::Value(v) => out.result.as_deref() == Ok(v),
            Expect::Printed(v, p) => out.result.as_deref() == Ok(v) && out.output == p,
            Expect::Fails(cat) => matches!(&out.result, Err(e) if e.category() == cat),
        };
        (out, ok)
    }
}

const fn case(name: &'static str, source: &'static str, expect: Expect) -> GoldenCase {
    GoldenCase { name, source, strategy: None, step_limit: None, expect }
}

const fn only(strategy: Strategy, mut c: GoldenCase) -> GoldenCase {
    c.strategy = Some(strategy);
    c
}

const fn limited(limit: u64, mut c: GoldenCase) -> GoldenCase {
    c.step_limit = Some(limit);
    c
}

pub const GOLDEN: &[GoldenCase] = &[
    case("const-func-1", concat!("(define BuildConstFunc (x)\n  (lambda(y) x))\n", "((BuildConstFunc 0) 1)"), Expect::Value("0")),
    case("const-func-2", concat!("(define BuildConstFunc (x)\n  (lambda(y) x))\n", "((BuildConstFunc 0) 2)"), Expect::Value("0")),
    case(
        "identity-through-apply",
        concat!("(define apply (f x) (f x))\n(define Identity (x)\n  (apply (lambda(y) x) 2))\n", "(Identity 45)"),
        Expect::Value("45"),
    ),
    case("beta-footnote", "((lambda (x) ((lambda (y) ((lambda (x) y) 'B)) x)) 'A)", Expect::Value("A")),
    only(
        Strategy::Need,
        case("f-need", concat!("(def f (x y)\n  (if (< x 0)\n      1\n      (f (- x 1) (f x y))))\n", "(f 1 2)"), Expect::Value("1")),
    ),
    only(
        Strategy::Value,
        limited(
            1_000_000,
            case(
                "f-value-diverges",
                concat!("(def f (x y)\n  (if (< x 0)\n      1\n      (f (- x 1) (f x y))))\n", "(f 1 2)"),
                Expect::Fails(ErrorCategory::LimitExceeded),
            ),
        ),
    ),
    limited(
        100_000,
        case("omega", "((lambda (u) (u u)) (lambda (u) (u u)))", Expect::Fails(ErrorCategory::LimitExceeded)),
    ),
    only(Strategy::Need, case("ones-cadr", "(de x (cons 1 x))\n(cadr x)", Expect::Value("1"))),
    only(
        Strategy::Need,
        case(
            "from-cadr",
            concat!("(de (from x)\n  (cons x (from (+ x 1))))\n", "(print (cadr (from 2)))"),
            Expect::Printed("3", "3\n"),
        ),
    ),
    case("mapfun", include_str!("../programs/mapfun.lx"), Expect::Printed("(3 5 7)", "(3 5 7)\n")),
    case("de-value", "(de x 3)", Expect::Value("3")),
    case("de-function", "(de (f x) (+ x 1))\n(f 2)", Expect::Value("3")),
    case("redefinition", "(de x 1)\n(de x 2)\nx", Expect::Value("2")),
    case("unbound", "undefinedvar", Expect::Fails(ErrorCategory::Unbound)),
    case("quoted-pairs", "'((1 2) (2 3) (3 4))", Expect::Value("((1 2) (2 3) (3 4))")),
    case("excla-quote", "(! '(+ 1 2))", Expect::Value("3")),
    case("excla-built", "(! (cons '+ '(1 2)))", Expect::Value("3")),
    case("let-sugar", "(let ((x 1)) x)", Expect::Value("1")),
    case("let-forward", "(let ((de a 1) (de b a)) b)", Expect::Value("1")),
    case("incr-curried", "(de (incr x) (lambda (y) (+ y x)))\n((incr 3) 4)", Expect::Value("7")),
    case("self-cycle", "(de x x)\nx", Expect::Fails(ErrorCategory::Cyclic)),
    case("succ-cycle", "(de x (+ x 1))\nx", Expect::Fails(ErrorCategory::Cyclic)),
    case("division-by-zero", "(/ 1 0)", Expect::Fails(ErrorCategory::Arithmetic)),
    case("if-needs-boolean", "(if 1 2 3)", Expect::Fails(ErrorCategory::Type)),
    only(
        Strategy::Need,
        case(
            "flipflop",
            include_str!("../programs/flipflop.lx"),
            Expect::Printed("(true false false false false)", "(false true true true true)\n(true false false false false)\n"),
        ),
    ),
];

/// A benchmark program with its expected printed output.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: &'static str,
    pub source: String,
    pub expected_output: String,
}

pub fn suite() -> alloc::vec::Vec<Benchmark> {
    let b = |name, source: &str, out: &str| Benchmark { name, source: String::from(source), expected_output: String::from(out) };
    alloc::vec![
        b("fib", FIB, "6765\n"),
        b("fib2", FIB2, "6765\n"),
        b("tak", TAK, "7\n"),
        b("sieve", SIEVE, "(400 2741 507825)\n"),
        b("lcomp", &lcomp_differing(), "false\n"),
        b("lcomp-equal", &lcomp_equal(), "true\n"),
        b("lsum", LSUM, "(4 6 10 14 22 26 34 38 46 58)\n"),
    ]
}
