//! Primitive functions.

use alloc::rc::Rc;
use alloc::string::String;

use crate::analyzer::{Expr, StructId};
use crate::env::Slot;
use crate::error::Error;
use crate::eval::{Interpreter, Strategy};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Cons,
    Car,
    Cdr,
    Cadr,
    Nullist,
    Atom,
    Print,
}

/// How far a primitive forces its arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Forcing {
    /// Completely, including list components.
    Full,
    /// To weak head normal form only.
    Whnf,
    /// Not at all under call by need.
    None,
}

impl Prim {
    pub const ALL: [Prim; 17] = [
        Prim::Add,
        Prim::Sub,
        Prim::Mul,
        Prim::Div,
        Prim::Mod,
        Prim::Lt,
        Prim::Le,
        Prim::Gt,
        Prim::Ge,
        Prim::Eq,
        Prim::Cons,
        Prim::Car,
        Prim::Cdr,
        Prim::Cadr,
        Prim::Nullist,
        Prim::Atom,
        Prim::Print,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Div => "/",
            Prim::Mod => "mod",
            Prim::Lt => "<",
            Prim::Le => "<=",
            Prim::Gt => ">",
            Prim::Ge => ">=",
            Prim::Eq => "=",
            Prim::Cons => "cons",
            Prim::Car => "car",
            Prim::Cdr => "cdr",
            Prim::Cadr => "cadr",
            Prim::Nullist => "nullist",
            Prim::Atom => "atom",
            Prim::Print => "print",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        Prim::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Prim::Car | Prim::Cdr | Prim::Cadr | Prim::Nullist | Prim::Atom | Prim::Print => 1,
            _ => 2,
        }
    }

    pub fn forcing(self) -> Forcing {
        match self {
            Prim::Cons => Forcing::None,
            Prim::Car | Prim::Cdr | Prim::Cadr | Prim::Nullist | Prim::Atom => Forcing::Whnf,
            _ => Forcing::Full,
        }
    }
}

/// Checked integer arithmetic shared with the reference interpreter.
pub fn arith(p: Prim, a: i64, b: i64) -> Result<i64, Error> {
    let r = match p {
        Prim::Add => a.checked_add(b),
        Prim::Sub => a.checked_sub(b),
        Prim::Mul => a.checked_mul(b),
        Prim::Div | Prim::Mod if b == 0 => {
            return Err(Error::Arithmetic(alloc::format!("{}: division by zero", p.name())))
        }
        Prim::Div => a.checked_div(b),
        Prim::Mod => a.checked_rem(b),
        _ => unreachable!("not an arithmetic primitive"),
    };
    r.ok_or_else(|| Error::Arithmetic(alloc::format!("integer overflow in ({} {} {})", p.name(), a, b)))
}

pub fn compare(p: Prim, a: i64, b: i64) -> bool {
    match p {
        Prim::Lt => a < b,
        Prim::Le => a <= b,
        Prim::Gt => a > b,
        Prim::Ge => a >= b,
        _ => unreachable!("not an ordering primitive"),
    }
}

pub(crate) fn expect_number(p: Prim, v: &Value) -> Result<i64, Error> {
    match v {
        Value::Number(n) => Ok(*n),
        other => Err(Error::Type(alloc::format!("{} expects numbers, got {}", p.name(), other.type_name()))),
    }
}

pub(crate) fn not_a_pair(p: Prim, v: &Value) -> Error {
    Error::Type(alloc::format!("{} expects a pair, got {}", p.name(), v.type_name()))
}

impl Interpreter {
    pub(crate) fn call_primitive(&mut self, p: Prim, args: &[Rc<Expr>], ctx: StructId) -> Result<Value, Error> {
        if args.len() != p.arity() {
            return Err(Error::Arity { name: Rc::from(p.name()), expected: p.arity(), got: args.len() });
        }
        match p {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Div | Prim::Mod => {
                let a = self.eval(&args[0], ctx)?;
                let a = expect_number(p, &a)?;
                let b = self.eval(&args[1], ctx)?;
                let b = expect_number(p, &b)?;
                Ok(Value::Number(arith(p, a, b)?))
            }
            Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => {
                let a = self.eval(&args[0], ctx)?;
                let a = expect_number(p, &a)?;
                let b = self.eval(&args[1], ctx)?;
                let b = expect_number(p, &b)?;
                Ok(Value::Boolean(compare(p, a, b)))
            }
            Prim::Eq => {
                let a = self.eval(&args[0], ctx)?;
                let b = self.eval(&args[1], ctx)?;
                Ok(Value::Boolean(self.equal(a, b)?))
            }
            Prim::Cons => {
                let (head, tail) = match self.config.strategy {
                    Strategy::Need => (self.delay(&args[0], ctx)?, self.delay(&args[1], ctx)?),
                    Strategy::Value => {
                        let h = self.eval_strict_arg(&args[0], ctx)?;
                        let t = self.eval_strict_arg(&args[1], ctx)?;
                        (Slot::Ready(h), Slot::Ready(t))
                    }
                };
                Ok(self.make_pair(head, tail))
            }
            Prim::Car | Prim::Cdr | Prim::Cadr => {
                let v = self.eval(&args[0], ctx)?;
                let Value::Pair(cell) = &v else { return Err(not_a_pair(p, &v)) };
                match p {
                    Prim::Car => self.force_cell(&cell.head),
                    Prim::Cdr => self.force_cell(&cell.tail),
                    _ => {
                        let rest = self.force_cell(&cell.tail)?;
                        let Value::Pair(next) = &rest else { return Err(not_a_pair(p, &rest)) };
                        self.force_cell(&next.head)
                    }
                }
            }
            Prim::Nullist => Ok(Value::Boolean(matches!(self.eval(&args[0], ctx)?, Value::Nil))),
            Prim::Atom => Ok(Value::Boolean(!matches!(self.eval(&args[0], ctx)?, Value::Pair(_)))),
            Prim::Print => {
                let v = self.eval(&args[0], ctx)?;
                let text = self.render(&v)?;
                self.output.push_str(&text);
                self.output.push('\n');
                Ok(v)
            }
        }
    }

    /// Structural equality. Pairs are compared head first, forcing each
    /// side's component just before it is compared.
    pub(crate) fn equal(&mut self, a: Value, b: Value) -> Result<bool, Error> {
        let (mut a, mut b) = (a, b);
        loop {
            match (&a, &b) {
                (Value::Pair(x), Value::Pair(y)) => {
                    if Rc::ptr_eq(x, y) {
                        return Ok(true);
                    }
                    let (x, y) = (x.clone(), y.clone());
                    let hx = self.force_cell(&x.head)?;
                    let hy = self.force_cell(&y.head)?;
                    if !self.equal(hx, hy)? {
                        return Ok(false);
                    }
                    a = self.force_cell(&x.tail)?;
                    b = self.force_cell(&y.tail)?;
                }
                _ => return Ok(a.same_datum(&b)),
            }
        }
    }
}

pub(crate) fn closure_label(name: &str) -> String {
    alloc::format!("#<closure {}>", name)
}
