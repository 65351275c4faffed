//! Seeded random programs for differential testing.
//!
//! Programs are closed and mostly well typed: a few top-level definitions
//! followed by one expression. Expression nesting is at most
//! [`MAX_DEPTH`] and integer literals lie in [-10, 10]. A small share of
//! terms are deliberately ill typed or divergent so that error categories
//! and laziness are exercised too.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    List,
    Fun,
    /// Two-argument top-level functions.
    Fun2,
}

const TYPES: [Ty; 4] = [Ty::Int, Ty::Bool, Ty::List, Ty::Fun];

#[derive(Clone)]
struct Var {
    name: String,
    ty: Ty,
}

pub struct ProgramGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen { rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0 }
    }

    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{}{}", prefix, self.fresh)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn int_literal(&mut self) -> String {
        format!("{}", self.rng.gen_range(-10i64..=10))
    }

    /// One complete program.
    pub fn program(&mut self) -> String {
        self.fresh = 0;
        let mut out = String::new();
        let mut globals: Vec<Var> = Vec::new();
        for _ in 0..self.rng.gen_range(0..=2) {
            let def = if self.chance(0.6) {
                self.function_definition(&globals)
            } else {
                self.value_definition(&globals)
            };
            out.push_str(&def.0);
            out.push('\n');
            globals.push(def.1);
        }
        let ty = TYPES[self.rng.gen_range(0..TYPES.len())];
        let ty = if ty == Ty::Fun && self.chance(0.7) { Ty::Int } else { ty };
        let body = self.expr(ty, MAX_DEPTH, &globals);
        if self.chance(0.3) {
            out.push_str(&format!("(print {})\n", body));
        } else {
            out.push_str(&body);
            out.push('\n');
        }
        out
    }

    fn function_definition(&mut self, globals: &[Var]) -> (String, Var) {
        let f = self.name("g");
        let n = self.name("n");
        let m = self.name("m");
        let mut scope = globals.to_vec();
        scope.push(Var { name: n.clone(), ty: Ty::Int });
        scope.push(Var { name: m.clone(), ty: Ty::Int });
        let base = self.expr(Ty::Int, 2, &scope);
        let other = self.expr(Ty::Int, 2, &scope);
        let op = ["+", "-", "*"][self.rng.gen_range(0..3)];
        let body = if self.chance(0.3) {
            // Structurally decreasing self-recursion.
            format!("(if (< {n} 1) {base} ({op} ({f} (- {n} 1) {other}) {m}))")
        } else if self.chance(0.5) {
            // The recursive call receives an argument built one level down
            // that reads the caller's parameters; it is forced inside the
            // callee's activation.
            let x = self.name("x");
            format!("(if (< {n} 1) {base} ((lambda ({x}) ({f} (- {n} 1) ({op} {x} {n}))) {other}))")
        } else {
            self.expr(Ty::Int, 4, &scope)
        };
        (format!("(de ({f} {n} {m}) {body})"), Var { name: f, ty: Ty::Fun2 })
    }

    fn value_definition(&mut self, globals: &[Var]) -> (String, Var) {
        let v = self.name("v");
        let ty = [Ty::Int, Ty::Bool, Ty::List][self.rng.gen_range(0..3)];
        let e = self.expr(ty, 3, globals);
        (format!("(de {v} {e})"), Var { name: v, ty })
    }

    fn pick_var(&mut self, ty: Ty, scope: &[Var]) -> Option<String> {
        let matching: Vec<&Var> = scope.iter().filter(|v| v.ty == ty).collect();
        if matching.is_empty() {
            None
        } else {
            Some(matching[self.rng.gen_range(0..matching.len())].name.clone())
        }
    }

    fn leaf(&mut self, ty: Ty, scope: &[Var]) -> String {
        if self.chance(0.5) {
            if let Some(v) = self.pick_var(ty, scope) {
                return v;
            }
        }
        match ty {
            Ty::Int => self.int_literal(),
            Ty::Bool => String::from(if self.chance(0.5) { "true" } else { "false" }),
            Ty::List => match self.rng.gen_range(0..4) {
                0 => String::from("()"),
                1 | 2 => format!("'({} {})", self.int_literal(), self.int_literal()),
                _ => format!("'({})", self.int_literal()),
            },
            Ty::Fun | Ty::Fun2 => {
                let x = self.name("x");
                let op = ["+", "-", "*"][self.rng.gen_range(0..3)];
                let k = self.int_literal();
                format!("(lambda ({x}) ({op} {x} {k}))")
            }
        }
    }

    fn unusual(&mut self, ty: Ty) -> String {
        match self.rng.gen_range(0..6) {
            0 => String::from("((lambda (u) (u u)) (lambda (u) (u u)))"),
            1 => String::from("(+ 1 true)"),
            2 => String::from("(car 5)"),
            3 => String::from("unboundname"),
            4 => String::from("((lambda (a b) a) 1)"),
            _ => match ty {
                Ty::Int => String::from("(/ 7 0)"),
                _ => String::from("(cdr ())"),
            },
        }
    }

    fn expr(&mut self, ty: Ty, depth: usize, scope: &[Var]) -> String {
        if depth <= 1 {
            return self.leaf(ty, scope);
        }
        if self.chance(0.015) {
            return self.unusual(ty);
        }
        let d = depth - 1;
        let choice = self.rng.gen_range(0..10);
        match choice {
            0 => self.leaf(ty, scope),
            1 => {
                let c = self.expr(Ty::Bool, d, scope);
                let a = self.expr(ty, d, scope);
                let b = self.expr(ty, d, scope);
                format!("(if {c} {a} {b})")
            }
            2 => self.let_form(ty, d, scope),
            3 => {
                // An immediately applied lambda, sometimes ignoring its argument.
                let x = self.name("x");
                let aty = TYPES[self.rng.gen_range(0..3)];
                let arg = if self.chance(0.1) { self.unusual(aty) } else { self.expr(aty, d, scope) };
                let mut inner = scope.to_vec();
                inner.push(Var { name: x.clone(), ty: aty });
                let body = self.expr(ty, d, &inner);
                format!("((lambda ({x}) {body}) {arg})")
            }
            4 if ty != Ty::Fun => {
                let e = self.expr(ty, d, scope);
                format!("(! '{e})")
            }
            _ => self.typed(ty, d, scope),
        }
    }

    fn let_form(&mut self, ty: Ty, d: usize, scope: &[Var]) -> String {
        let mut inner = scope.to_vec();
        let mut bindings = Vec::new();
        let count = self.rng.gen_range(1..=2);
        let names: Vec<(String, Ty)> = (0..count)
            .map(|_| {
                let ty = TYPES[self.rng.gen_range(0..TYPES.len())];
                (self.name(if ty == Ty::Fun { "h" } else { "l" }), ty)
            })
            .collect();
        // Usually only earlier siblings are visible to the generator, so
        // most programs avoid reading a binding before it is evaluated.
        let forward = self.chance(0.2);
        if forward {
            for (n, t) in &names {
                inner.push(Var { name: n.clone(), ty: *t });
            }
        }
        for (n, t) in &names {
            if !forward && *t == Ty::Fun {
                inner.push(Var { name: n.clone(), ty: *t });
            }
            if *t == Ty::Fun {
                let p = self.name("p");
                let mut fscope = inner.clone();
                fscope.push(Var { name: p.clone(), ty: Ty::Int });
                let body = self.expr(Ty::Int, d.min(3), &fscope);
                bindings.push(format!("(de ({n} {p}) {body})"));
            } else {
                let e = self.expr(*t, d.min(3), &inner);
                if self.chance(0.5) {
                    bindings.push(format!("({n} {e})"));
                } else {
                    bindings.push(format!("(de {n} {e})"));
                }
                if !forward {
                    inner.push(Var { name: n.clone(), ty: *t });
                }
            }
        }
        let body = self.expr(ty, d, &inner);
        format!("(let ({}) {body})", bindings.join(" "))
    }

    fn typed(&mut self, ty: Ty, d: usize, scope: &[Var]) -> String {
        match ty {
            Ty::Int => match self.rng.gen_range(0..7) {
                0 | 1 => {
                    let op = ["+", "-", "*", "/", "mod"][self.rng.gen_range(0..5)];
                    let a = self.expr(Ty::Int, d, scope);
                    let b = self.expr(Ty::Int, d, scope);
                    format!("({op} {a} {b})")
                }
                2 => {
                    let l = self.expr(Ty::List, d, scope);
                    let f = ["car", "cadr"][self.rng.gen_range(0..2)];
                    format!("({f} {l})")
                }
                3 => {
                    let f = self.expr(Ty::Fun, d, scope);
                    let a = self.expr(Ty::Int, d, scope);
                    format!("({f} {a})")
                }
                4 => {
                    let a = self.expr(Ty::Int, d, scope);
                    let b = self.expr(Ty::Int, d, scope);
                    format!("(! (cons '+ (cons {a} (cons {b} ()))))")
                }
                5 => {
                    // Calls of two-argument top-level functions.
                    let fs: Vec<String> =
                        scope.iter().filter(|v| v.ty == Ty::Fun2).map(|v| v.name.clone()).collect();
                    if fs.is_empty() {
                        return self.leaf(Ty::Int, scope);
                    }
                    let f = fs[self.rng.gen_range(0..fs.len())].clone();
                    let a = self.expr(Ty::Int, d, scope);
                    let b = self.expr(Ty::Int, d, scope);
                    format!("({f} {a} {b})")
                }
                _ => {
                    let a = self.expr(Ty::Int, d, scope);
                    format!("(print {a})")
                }
            },
            Ty::Bool => match self.rng.gen_range(0..5) {
                0 => {
                    let op = ["<", "<=", ">", ">=", "="][self.rng.gen_range(0..5)];
                    let a = self.expr(Ty::Int, d, scope);
                    let b = self.expr(Ty::Int, d, scope);
                    format!("({op} {a} {b})")
                }
                1 => {
                    let a = self.expr(Ty::List, d, scope);
                    let b = self.expr(Ty::List, d, scope);
                    format!("(= {a} {b})")
                }
                2 => {
                    let l = self.expr(Ty::List, d, scope);
                    format!("(nullist {l})")
                }
                3 => {
                    let t = TYPES[self.rng.gen_range(0..3)];
                    let a = self.expr(t, d, scope);
                    format!("(atom {a})")
                }
                _ => self.leaf(Ty::Bool, scope),
            },
            Ty::List => match self.rng.gen_range(0..4) {
                0..=2 => {
                    let h = self.expr(Ty::Int, d, scope);
                    let t = self.expr(Ty::List, d, scope);
                    format!("(cons {h} {t})")
                }
                _ => {
                    let l = self.expr(Ty::List, d, scope);
                    format!("(cdr {l})")
                }
            },
            Ty::Fun | Ty::Fun2 => {
                let x = self.name("x");
                let mut inner = scope.to_vec();
                inner.push(Var { name: x.clone(), ty: Ty::Int });
                let body = self.expr(Ty::Int, d, &inner);
                format!("(lambda ({x}) {body})")
            }
        }
    }
}

/// `count` programs from one seed; the same seed always gives the same batch.
pub fn batch(seed: u64, count: usize) -> Vec<String> {
    let mut g = ProgramGen::new(seed);
    (0..count).map(|_| g.program()).collect()
}
