//! Runtime data.

use alloc::rc::Rc;
use core::cell::RefCell;
use core::fmt;

use crate::analyzer::{Expr, StructId};
use crate::builtins::Prim;
use crate::env::{Block, Slot};

/// A datum in weak head normal form.
///
/// Pair components are slots and may still hold suspended computations.
#[derive(Clone)]
pub enum Value {
    Number(i64),
    Boolean(bool),
    Str(Rc<str>),
    Symbol(Rc<str>),
    Nil,
    Pair(Rc<Pair>),
    /// A lambda structure paired with the block of its defining environment.
    Closure(StructId, Rc<Block>),
    Primitive(Prim),
}

pub struct Pair {
    pub head: RefCell<Slot>,
    pub tail: RefCell<Slot>,
}

impl Pair {
    pub fn new(head: Slot, tail: Slot) -> Rc<Pair> {
        Rc::new(Pair { head: RefCell::new(head), tail: RefCell::new(tail) })
    }
}

impl Value {
    pub fn symbol(name: &str) -> Value {
        Value::Symbol(Rc::from(name))
    }

    pub fn cons(head: Value, tail: Value) -> Value {
        Value::Pair(Pair::new(Slot::Ready(head), Slot::Ready(tail)))
    }

    /// Builds a proper list of already evaluated values.
    pub fn list<I>(items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        items.into_iter().rev().fold(Value::Nil, |tail, head| Value::cons(head, tail))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Boolean(_) => "boolean",
            Value::Str(_) => "string",
            Value::Symbol(_) => "symbol",
            Value::Nil => "empty list",
            Value::Pair(_) => "pair",
            Value::Closure(..) => "closure",
            Value::Primitive(_) => "primitive",
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Value::Closure(..) | Value::Primitive(_))
    }

    /// Identity-or-atom equality, without forcing anything.
    pub(crate) fn same_datum(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Boolean(a), Value::Boolean(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Symbol(a), Value::Symbol(b)) => a == b,
            (Value::Nil, Value::Nil) => true,
            (Value::Pair(a), Value::Pair(b)) => Rc::ptr_eq(a, b),
            (Value::Closure(s, a), Value::Closure(t, b)) => s == t && Rc::ptr_eq(a, b),
            (Value::Primitive(a), Value::Primitive(b)) => a == b,
            _ => false,
        }
    }
}

/// Shallow rendering that never forces: suspended components show as
/// `#<thunk>`. The forcing printer lives in [`crate::printer`].
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{}", n),
            Value::Boolean(b) => f.write_str(if *b { "true" } else { "false" }),
            Value::Str(s) => crate::reader::write_string_literal(f, s),
            Value::Symbol(s) => f.write_str(s),
            Value::Nil => f.write_str("()"),
            Value::Closure(..) => f.write_str("#<closure>"),
            Value::Primitive(p) => write!(f, "#<prim {}>", p.name()),
            Value::Pair(p) => {
                f.write_str("(")?;
                let mut cell = p.clone();
                loop {
                    write_slot(f, &cell.head.borrow())?;
                    let next = match &*cell.tail.borrow() {
                        Slot::Ready(Value::Nil) => None,
                        Slot::Ready(Value::Pair(next)) => Some(next.clone()),
                        other => {
                            f.write_str(" . ")?;
                            write_slot(f, other)?;
                            None
                        }
                    };
                    match next {
                        Some(next) => {
                            f.write_str(" ")?;
                            cell = next;
                        }
                        None => break,
                    }
                }
                f.write_str(")")
            }
        }
    }
}

fn write_slot(f: &mut fmt::Formatter<'_>, slot: &Slot) -> fmt::Result {
    match slot {
        Slot::Ready(v) => write!(f, "{}", v),
        _ => f.write_str("#<thunk>"),
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// A suspended computation with its environment of creation.
pub struct Thunk {
    pub(crate) state: RefCell<ThunkState>,
    /// Name of the binding this thunk was created for, if any; used in
    /// cyclic-definition diagnostics.
    pub(crate) label: Option<Rc<str>>,
}

pub(crate) enum ThunkState {
    Delayed(Suspension),
    /// Being forced. Re-entry means the value depends on itself.
    Running,
    Forced(Value),
}

#[derive(Clone)]
pub(crate) struct Suspension {
    pub expr: Rc<Expr>,
    pub owner: StructId,
    pub env: Rc<Block>,
}

impl Thunk {
    pub(crate) fn new(expr: Rc<Expr>, owner: StructId, env: Rc<Block>, label: Option<Rc<str>>) -> Rc<Thunk> {
        Rc::new(Thunk {
            state: RefCell::new(ThunkState::Delayed(Suspension { expr, owner, env })),
            label,
        })
    }

    pub fn is_forced(&self) -> bool {
        matches!(&*self.state.borrow(), ThunkState::Forced(_))
    }

    pub fn forced_value(&self) -> Option<Value> {
        match &*self.state.borrow() {
            ThunkState::Forced(v) => Some(v.clone()),
            _ => None,
        }
    }
}
