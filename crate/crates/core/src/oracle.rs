//! A deliberately naive reference interpreter.
//!
//! Environments are chains of frames searched by name, closures capture the
//! whole chain, and suspensions are memoized cells. It shares the reader
//! with the main interpreter but not the analyzer or the runtime, so
//! disagreements point at bugs in either one. Step and depth accounting
//! and the order in which things are forced follow the main interpreter
//! exactly, so that the two agree even on programs that run out of budget.
//!
//! Let-local functions close over their own frame; those cycles are never
//! reclaimed, which is fine for a test oracle.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::analyzer::AnalysisError;
use crate::builtins::{arith, compare, Prim};
use crate::error::Error;
use crate::eval::{Config, Outcome, Strategy};
use crate::reader::{read_program, SourceExpr};
use crate::value::Value;

#[derive(Clone)]
enum OExpr {
    Sym(Rc<str>),
    Num(i64),
    Str(Rc<str>),
    List(Vec<OExpr>),
    Val(OVal),
}

impl OExpr {
    fn from_source(e: &SourceExpr) -> OExpr {
        match e {
            SourceExpr::Symbol(s) => OExpr::Sym(s.clone()),
            SourceExpr::Number(n) => OExpr::Num(*n),
            SourceExpr::Str(s) => OExpr::Str(s.clone()),
            SourceExpr::List(items) => OExpr::List(items.iter().map(OExpr::from_source).collect()),
            SourceExpr::Datum(v) => OExpr::Val(OVal::from_atom(v)),
        }
    }

    fn sym(&self) -> Option<&Rc<str>> {
        match self {
            OExpr::Sym(s) => Some(s),
            _ => None,
        }
    }

    fn list(&self) -> Option<&[OExpr]> {
        match self {
            OExpr::List(items) => Some(items),
            _ => None,
        }
    }
}

impl core::fmt::Display for OExpr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OExpr::Sym(s) => f.write_str(s),
            OExpr::Num(n) => write!(f, "{}", n),
            OExpr::Str(s) => write!(f, "{}", Value::Str(s.clone())),
            OExpr::Val(_) => f.write_str("#<value>"),
            OExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", item)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone)]
enum OVal {
    Num(i64),
    Bool(bool),
    Str(Rc<str>),
    Sym(Rc<str>),
    Nil,
    Pair(Rc<OPair>),
    Closure(Rc<OClosure>),
    Prim(Prim),
}

impl OVal {
    /// Reader data only ever embeds atoms.
    fn from_atom(v: &Value) -> OVal {
        match v {
            Value::Number(n) => OVal::Num(*n),
            Value::Boolean(b) => OVal::Bool(*b),
            Value::Str(s) => OVal::Str(s.clone()),
            Value::Symbol(s) => OVal::Sym(s.clone()),
            Value::Primitive(p) => OVal::Prim(*p),
            _ => OVal::Nil,
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            OVal::Num(_) => "number",
            OVal::Bool(_) => "boolean",
            OVal::Str(_) => "string",
            OVal::Sym(_) => "symbol",
            OVal::Nil => "empty list",
            OVal::Pair(_) => "pair",
            OVal::Closure(_) => "closure",
            OVal::Prim(_) => "primitive",
        }
    }
}

struct OPair {
    head: RefCell<Cell>,
    tail: RefCell<Cell>,
}

struct OClosure {
    name: Rc<str>,
    params: Vec<Rc<str>>,
    body: Rc<OExpr>,
    env: Env,
}

#[derive(Clone)]
enum Cell {
    Val(OVal),
    Susp(Rc<Susp>),
    Unset,
}

struct Susp {
    state: RefCell<SuspState>,
    label: Option<Rc<str>>,
}

enum SuspState {
    Pending(Rc<OExpr>, Env),
    Running,
    Done(OVal),
}

struct Frame {
    names: Vec<Rc<str>>,
    cells: Vec<RefCell<Cell>>,
    parent: Env,
}

type Env = Option<Rc<Frame>>;

fn find(env: &Env, name: &str) -> Option<(Rc<Frame>, usize)> {
    let mut cur = env.clone();
    while let Some(frame) = cur {
        if let Some(i) = frame.names.iter().position(|n| &**n == name) {
            return Some((frame, i));
        }
        cur = frame.parent.clone();
    }
    None
}

fn bound_names(env: &Env) -> Vec<Rc<str>> {
    let mut out = Vec::new();
    let mut cur = env.clone();
    while let Some(frame) = cur {
        out.extend(frame.names.iter().cloned());
        cur = frame.parent.clone();
    }
    out
}

const SPECIAL: [&str; 8] = ["lambda", "if", "let", "quote", "excla", "de", "define", "def"];
const DEFINES: [&str; 3] = ["de", "define", "def"];

fn bad(msg: String) -> Error {
    Error::Analysis(AnalysisError(msg))
}

enum Def<'a> {
    Value(Rc<str>, &'a OExpr),
    Function(Rc<str>, &'a [OExpr], &'a OExpr),
}

impl Def<'_> {
    fn name(&self) -> &Rc<str> {
        match self {
            Def::Value(n, _) | Def::Function(n, _, _) => n,
        }
    }
}

fn parse_def(form: &OExpr) -> Result<Def<'_>, Error> {
    match form.list().unwrap_or(&[]) {
        [_, OExpr::Sym(n), e] => Ok(Def::Value(n.clone(), e)),
        [_, OExpr::List(header), body] => match header.split_first() {
            Some((OExpr::Sym(n), params)) => Ok(Def::Function(n.clone(), params, body)),
            _ => Err(bad(alloc::format!("bad definition {}", form))),
        },
        [_, OExpr::Sym(n), OExpr::List(params), body] => Ok(Def::Function(n.clone(), params, body)),
        _ => Err(bad(alloc::format!("bad definition {}", form))),
    }
}

fn param_names(items: &[OExpr]) -> Result<Vec<Rc<str>>, Error> {
    let mut out: Vec<Rc<str>> = Vec::new();
    for item in items {
        let name = item.sym().ok_or_else(|| bad(alloc::format!("not a name: {}", item)))?;
        if out.contains(name) {
            return Err(bad(alloc::format!("duplicate name {}", name)));
        }
        out.push(name.clone());
    }
    Ok(out)
}

fn special<'a>(items: &'a [OExpr], scope: &[Rc<str>]) -> Option<&'a str> {
    let name = items.first()?.sym()?;
    (SPECIAL.contains(&&**name) && !scope.contains(name)).then_some(&**name)
}

fn let_defs(bindings: &OExpr) -> Result<Vec<Def<'_>>, Error> {
    let list = bindings.list().ok_or_else(|| bad(String::from("let needs a binding list")))?;
    list.iter()
        .map(|b| match b.list() {
            Some([OExpr::Sym(h), ..]) if DEFINES.contains(&&**h) => parse_def(b),
            Some([OExpr::Sym(n), e]) => Ok(Def::Value(n.clone(), e)),
            _ => Err(bad(alloc::format!("bad let binding {}", b))),
        })
        .collect()
}

/// Rejects the forms the main analyzer rejects, before anything runs.
fn validate(e: &OExpr, scope: &mut Vec<Rc<str>>) -> Result<(), Error> {
    let Some(items) = e.list() else { return Ok(()) };
    if items.is_empty() {
        return Ok(());
    }
    match special(items, scope) {
        Some("lambda") => {
            let [_, params, body] = items else { return Err(bad(alloc::format!("bad lambda {}", e))) };
            let params = param_names(params.list().ok_or_else(|| bad(String::from("bad lambda")))?)?;
            with_names(scope, &params, |s| validate(body, s))
        }
        Some("if") => {
            let [_, a, b, c] = items else { return Err(bad(alloc::format!("bad if {}", e))) };
            validate(a, scope)?;
            validate(b, scope)?;
            validate(c, scope)
        }
        Some("let") => {
            let [_, bindings, body] = items else { return Err(bad(alloc::format!("bad let {}", e))) };
            let defs = let_defs(bindings)?;
            let names: Vec<OExpr> = defs.iter().map(|d| OExpr::Sym(d.name().clone())).collect();
            let names = param_names(&names)?;
            with_names(scope, &names, |s| {
                for d in &defs {
                    match d {
                        Def::Value(_, e) => validate(e, s)?,
                        Def::Function(_, params, fbody) => {
                            let params = param_names(params)?;
                            with_names(s, &params, |s| validate(fbody, s))?;
                        }
                    }
                }
                validate(body, s)
            })
        }
        Some("quote") | Some("excla") => {
            let [_, arg] = items else { return Err(bad(alloc::format!("bad form {}", e))) };
            if items[0].sym().is_some_and(|h| &**h == "excla") {
                validate(arg, scope)?;
            }
            Ok(())
        }
        Some(_) => Err(bad(alloc::format!("definition not allowed here: {}", e))),
        None => items.iter().try_for_each(|i| validate(i, scope)),
    }
}

fn with_names<T>(scope: &mut Vec<Rc<str>>, names: &[Rc<str>], f: impl FnOnce(&mut Vec<Rc<str>>) -> T) -> T {
    let n = scope.len();
    scope.extend(names.iter().cloned());
    let r = f(scope);
    scope.truncate(n);
    r
}

fn datum(e: &OExpr) -> OVal {
    match e {
        OExpr::Sym(s) => OVal::Sym(s.clone()),
        OExpr::Num(n) => OVal::Num(*n),
        OExpr::Str(s) => OVal::Str(s.clone()),
        OExpr::Val(v) => v.clone(),
        OExpr::List(items) => items.iter().rev().fold(OVal::Nil, |tail, head| {
            OVal::Pair(Rc::new(OPair {
                head: RefCell::new(Cell::Val(datum(head))),
                tail: RefCell::new(Cell::Val(tail)),
            }))
        }),
    }
}

enum Global {
    Defining,
    Bound(Cell),
}

enum Top {
    Value(OVal),
    DefinedValue(Rc<str>),
    DefinedFunction(Rc<str>),
}

pub struct Oracle {
    config: Config,
    globals: BTreeMap<Rc<str>, Global>,
    steps: u64,
    depth: usize,
    output: String,
}

impl Oracle {
    pub fn new(config: Config) -> Self {
        let mut globals = BTreeMap::new();
        for p in Prim::ALL {
            globals.insert(Rc::from(p.name()), Global::Bound(Cell::Val(OVal::Prim(p))));
        }
        globals.insert(Rc::from("true"), Global::Bound(Cell::Val(OVal::Bool(true))));
        globals.insert(Rc::from("false"), Global::Bound(Cell::Val(OVal::Bool(false))));
        Oracle { config, globals, steps: 0, depth: 0, output: String::new() }
    }

    pub fn run_outcome(&mut self, text: &str) -> Outcome {
        let result = self.run(text);
        Outcome { output: core::mem::take(&mut self.output), result }
    }

    fn run(&mut self, text: &str) -> Result<String, Error> {
        let forms = read_program(text)?;
        let mut last = None;
        for form in &forms {
            last = Some(self.toplevel(&OExpr::from_source(form))?);
        }
        match last {
            None => Ok(String::new()),
            Some(Top::Value(v)) => self.render(&v),
            Some(Top::DefinedFunction(name)) => Ok(name.to_string()),
            Some(Top::DefinedValue(name)) => {
                let v = self.global(&name)?;
                self.render(&v)
            }
        }
    }

    fn is_strict(&self) -> bool {
        self.config.strategy == Strategy::Value
    }

    fn toplevel(&mut self, form: &OExpr) -> Result<Top, Error> {
        self.steps = 0;
        self.depth = 0;
        let is_def = form.list().is_some_and(|items| special(items, &[]).is_some_and(|h| DEFINES.contains(&h)));
        if !is_def {
            validate(form, &mut Vec::new())?;
            return Ok(Top::Value(self.eval(form, &None)?));
        }
        match parse_def(form)? {
            Def::Function(name, params, body) => {
                let params = param_names(params)?;
                validate(body, &mut params.clone())?;
                let c = OClosure { name: name.clone(), params, body: Rc::new(body.clone()), env: None };
                self.globals.insert(name.clone(), Global::Bound(Cell::Val(OVal::Closure(Rc::new(c)))));
                Ok(Top::DefinedFunction(name))
            }
            Def::Value(name, e) => {
                validate(e, &mut Vec::new())?;
                if self.is_strict() {
                    let previous = self.globals.insert(name.clone(), Global::Defining);
                    match self.eval(e, &None) {
                        Ok(v) => {
                            self.globals.insert(name.clone(), Global::Bound(Cell::Val(v)));
                        }
                        Err(err) => {
                            match previous {
                                Some(p) => self.globals.insert(name.clone(), p),
                                None => self.globals.remove(&name),
                            };
                            return Err(err);
                        }
                    }
                } else {
                    let cell = if self.immediate(e, &None) {
                        Cell::Val(self.eval(e, &None)?)
                    } else {
                        Cell::Susp(Rc::new(Susp {
                            state: RefCell::new(SuspState::Pending(Rc::new(e.clone()), None)),
                            label: Some(name.clone()),
                        }))
                    };
                    self.globals.insert(name.clone(), Global::Bound(cell));
                }
                Ok(Top::DefinedValue(name))
            }
        }
    }

    fn global(&mut self, name: &Rc<str>) -> Result<OVal, Error> {
        match self.globals.get(name) {
            None => Err(Error::Unbound(name.clone())),
            Some(Global::Defining) => Err(Error::Cyclic(Some(name.clone()))),
            Some(Global::Bound(Cell::Val(v))) => Ok(v.clone()),
            Some(Global::Bound(Cell::Susp(s))) => {
                let s = s.clone();
                self.force(&s)
            }
            Some(Global::Bound(Cell::Unset)) => Err(Error::Internal(String::from("unset global"))),
        }
    }

    fn enter(&mut self) -> Result<(), Error> {
        if self.depth >= self.config.depth_limit {
            return Err(Error::DepthLimit(self.config.depth_limit));
        }
        self.depth += 1;
        Ok(())
    }

    fn force(&mut self, s: &Rc<Susp>) -> Result<OVal, Error> {
        let pending = core::mem::replace(&mut *s.state.borrow_mut(), SuspState::Running);
        let (expr, env) = match pending {
            SuspState::Done(v) => {
                *s.state.borrow_mut() = SuspState::Done(v.clone());
                return Ok(v);
            }
            SuspState::Running => return Err(Error::Cyclic(s.label.clone())),
            SuspState::Pending(e, env) => (e, env),
        };
        let r = self.enter().and_then(|()| {
            let r = self.eval(&expr, &env);
            self.depth -= 1;
            r
        });
        *s.state.borrow_mut() = match &r {
            Ok(v) => SuspState::Done(v.clone()),
            Err(_) => SuspState::Pending(expr, env),
        };
        r
    }

    fn force_cell(&mut self, cell: &RefCell<Cell>, name: &Rc<str>) -> Result<OVal, Error> {
        let c = cell.borrow().clone();
        match c {
            Cell::Val(v) => Ok(v),
            Cell::Susp(s) => {
                let v = self.force(&s)?;
                *cell.borrow_mut() = Cell::Val(v.clone());
                Ok(v)
            }
            Cell::Unset => Err(Error::Uninitialized(name.clone())),
        }
    }

    fn immediate(&self, e: &OExpr, env: &Env) -> bool {
        match e {
            OExpr::Num(_) | OExpr::Str(_) | OExpr::Val(_) => true,
            OExpr::Sym(_) => false,
            OExpr::List(items) if items.is_empty() => true,
            OExpr::List(items) => {
                let scope = bound_names(env);
                matches!(special(items, &scope), Some("quote") | Some("lambda"))
            }
        }
    }

    /// What call by need stores for an argument expression.
    fn delay(&mut self, e: &OExpr, env: &Env) -> Result<Cell, Error> {
        if self.immediate(e, env) {
            return Ok(Cell::Val(self.eval(e, env)?));
        }
        if let Some((frame, i)) = e.sym().and_then(|n| find(env, n)) {
            return Ok(frame.cells[i].borrow().clone());
        }
        Ok(Cell::Susp(Rc::new(Susp {
            state: RefCell::new(SuspState::Pending(Rc::new(e.clone()), env.clone())),
            label: None,
        })))
    }

    fn arg(&mut self, e: &OExpr, env: &Env) -> Result<Cell, Error> {
        if self.is_strict() {
            Ok(Cell::Val(self.eval(e, env)?))
        } else {
            self.delay(e, env)
        }
    }

    fn eval(&mut self, e: &OExpr, env: &Env) -> Result<OVal, Error> {
        match e {
            OExpr::Num(n) => Ok(OVal::Num(*n)),
            OExpr::Str(s) => Ok(OVal::Str(s.clone())),
            OExpr::Val(v) => Ok(v.clone()),
            OExpr::Sym(name) => match find(env, name) {
                Some((frame, i)) => self.force_cell(&frame.cells[i], name),
                None => self.global(name),
            },
            OExpr::List(items) if items.is_empty() => Ok(OVal::Nil),
            OExpr::List(items) => {
                let scope = bound_names(env);
                match special(items, &scope) {
                    Some("lambda") => {
                        let params = param_names(items[1].list().unwrap_or(&[]))?;
                        Ok(OVal::Closure(Rc::new(OClosure {
                            name: Rc::from("lambda"),
                            params,
                            body: Rc::new(items[2].clone()),
                            env: env.clone(),
                        })))
                    }
                    Some("if") => match self.eval(&items[1], env)? {
                        OVal::Bool(true) => self.eval(&items[2], env),
                        OVal::Bool(false) => self.eval(&items[3], env),
                        other => Err(Error::Type(alloc::format!("if test is a {}", other.type_name()))),
                    },
                    Some("let") => self.eval_let(&items[1], &items[2], env),
                    Some("quote") => Ok(datum(&items[1])),
                    Some("excla") => {
                        let v = self.eval(&items[1], env)?;
                        let text = self.to_source(v)?;
                        validate(&text, &mut bound_names(env))?;
                        self.eval(&text, env)
                    }
                    Some(_) => Err(bad(String::from("definition not allowed here"))),
                    None => {
                        let f = self.eval(&items[0], env)?;
                        self.apply(f, &items[1..], env)
                    }
                }
            }
        }
    }

    fn eval_let(&mut self, bindings: &OExpr, body: &OExpr, env: &Env) -> Result<OVal, Error> {
        let defs = let_defs(bindings)?;
        let names: Vec<Rc<str>> = defs.iter().map(|d| d.name().clone()).collect();
        let frame = Rc::new(Frame {
            names,
            cells: defs.iter().map(|_| RefCell::new(Cell::Unset)).collect(),
            parent: env.clone(),
        });
        let inner: Env = Some(frame.clone());
        for (i, d) in defs.iter().enumerate() {
            let cell = match d {
                Def::Function(name, params, fbody) => Cell::Val(OVal::Closure(Rc::new(OClosure {
                    name: name.clone(),
                    params: param_names(params)?,
                    body: Rc::new((*fbody).clone()),
                    env: inner.clone(),
                }))),
                Def::Value(name, e) if !self.is_strict() => Cell::Susp(Rc::new(Susp {
                    state: RefCell::new(SuspState::Pending(Rc::new((*e).clone()), inner.clone())),
                    label: Some(name.clone()),
                })),
                Def::Value(..) => Cell::Unset,
            };
            *frame.cells[i].borrow_mut() = cell;
        }
        if self.is_strict() {
            for (i, d) in defs.iter().enumerate() {
                if let Def::Value(_, e) = d {
                    let v = self.eval(e, &inner)?;
                    *frame.cells[i].borrow_mut() = Cell::Val(v);
                }
            }
        }
        self.eval(body, &inner)
    }

    fn apply(&mut self, f: OVal, args: &[OExpr], env: &Env) -> Result<OVal, Error> {
        match f {
            OVal::Closure(c) => {
                self.steps += 1;
                if let Some(limit) = self.config.step_limit {
                    if self.steps > limit {
                        return Err(Error::StepLimit(limit));
                    }
                }
                self.enter()?;
                let r = self.call(&c, args, env);
                self.depth -= 1;
                r
            }
            OVal::Prim(p) => self.prim(p, args, env),
            other => Err(Error::Type(alloc::format!("{} is not a function", other.type_name()))),
        }
    }

    fn call(&mut self, c: &OClosure, args: &[OExpr], env: &Env) -> Result<OVal, Error> {
        if c.params.len() != args.len() {
            return Err(Error::Arity { name: c.name.clone(), expected: c.params.len(), got: args.len() });
        }
        let mut cells = Vec::with_capacity(args.len());
        for a in args {
            cells.push(RefCell::new(self.arg(a, env)?));
        }
        let frame = Rc::new(Frame { names: c.params.clone(), cells, parent: c.env.clone() });
        self.eval(&c.body, &Some(frame))
    }

    fn num(&mut self, p: Prim, e: &OExpr, env: &Env) -> Result<i64, Error> {
        match self.eval(e, env)? {
            OVal::Num(n) => Ok(n),
            other => Err(Error::Type(alloc::format!("{} expects numbers, got {}", p.name(), other.type_name()))),
        }
    }

    fn pair(&mut self, p: Prim, v: OVal) -> Result<Rc<OPair>, Error> {
        match v {
            OVal::Pair(c) => Ok(c),
            other => Err(Error::Type(alloc::format!("{} expects a pair, got {}", p.name(), other.type_name()))),
        }
    }

    fn component(&mut self, cell: &RefCell<Cell>) -> Result<OVal, Error> {
        self.force_cell(cell, &Rc::from("list component"))
    }

    fn prim(&mut self, p: Prim, args: &[OExpr], env: &Env) -> Result<OVal, Error> {
        if args.len() != p.arity() {
            return Err(Error::Arity { name: Rc::from(p.name()), expected: p.arity(), got: args.len() });
        }
        match p {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Div | Prim::Mod => {
                let a = self.num(p, &args[0], env)?;
                let b = self.num(p, &args[1], env)?;
                Ok(OVal::Num(arith(p, a, b)?))
            }
            Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => {
                let a = self.num(p, &args[0], env)?;
                let b = self.num(p, &args[1], env)?;
                Ok(OVal::Bool(compare(p, a, b)))
            }
            Prim::Eq => {
                let a = self.eval(&args[0], env)?;
                let b = self.eval(&args[1], env)?;
                Ok(OVal::Bool(self.equal(a, b)?))
            }
            Prim::Cons => {
                let head = self.arg(&args[0], env)?;
                let tail = self.arg(&args[1], env)?;
                Ok(OVal::Pair(Rc::new(OPair { head: RefCell::new(head), tail: RefCell::new(tail) })))
            }
            Prim::Car | Prim::Cdr | Prim::Cadr => {
                let v = self.eval(&args[0], env)?;
                let c = self.pair(p, v)?;
                match p {
                    Prim::Car => self.component(&c.head),
                    Prim::Cdr => self.component(&c.tail),
                    _ => {
                        let rest = self.component(&c.tail)?;
                        let next = self.pair(p, rest)?;
                        self.component(&next.head)
                    }
                }
            }
            Prim::Nullist => Ok(OVal::Bool(matches!(self.eval(&args[0], env)?, OVal::Nil))),
            Prim::Atom => Ok(OVal::Bool(!matches!(self.eval(&args[0], env)?, OVal::Pair(_)))),
            Prim::Print => {
                let v = self.eval(&args[0], env)?;
                let text = self.render(&v)?;
                self.output.push_str(&text);
                self.output.push('\n');
                Ok(v)
            }
        }
    }

    fn equal(&mut self, a: OVal, b: OVal) -> Result<bool, Error> {
        Ok(match (a, b) {
            (OVal::Pair(x), OVal::Pair(y)) => {
                if Rc::ptr_eq(&x, &y) {
                    return Ok(true);
                }
                let hx = self.component(&x.head)?;
                let hy = self.component(&y.head)?;
                if !self.equal(hx, hy)? {
                    return Ok(false);
                }
                let tx = self.component(&x.tail)?;
                let ty = self.component(&y.tail)?;
                self.equal(tx, ty)?
            }
            (OVal::Num(a), OVal::Num(b)) => a == b,
            (OVal::Bool(a), OVal::Bool(b)) => a == b,
            (OVal::Str(a), OVal::Str(b)) => a == b,
            (OVal::Sym(a), OVal::Sym(b)) => a == b,
            (OVal::Nil, OVal::Nil) => true,
            (OVal::Closure(a), OVal::Closure(b)) => Rc::ptr_eq(&a, &b),
            (OVal::Prim(a), OVal::Prim(b)) => a == b,
            _ => false,
        })
    }

    fn to_source(&mut self, v: OVal) -> Result<OExpr, Error> {
        Ok(match v {
            OVal::Num(n) => OExpr::Num(n),
            OVal::Sym(s) => OExpr::Sym(s),
            OVal::Str(s) => OExpr::Str(s),
            OVal::Nil => OExpr::List(Vec::new()),
            OVal::Pair(c) => {
                let head = self.component(&c.head)?;
                let mut items = alloc::vec![self.to_source(head)?];
                match self.component(&c.tail)? {
                    OVal::Nil => {}
                    tail @ OVal::Pair(_) => match self.to_source(tail)? {
                        OExpr::List(rest) => items.extend(rest),
                        _ => unreachable!(),
                    },
                    other => {
                        return Err(Error::Type(alloc::format!("excla needs a proper list, found {}", other.type_name())))
                    }
                }
                OExpr::List(items)
            }
            other => OExpr::Val(other),
        })
    }

    fn render(&mut self, v: &OVal) -> Result<String, Error> {
        let mut out = String::new();
        self.render_into(&mut out, v, 0)?;
        Ok(out)
    }

    fn render_into(&mut self, out: &mut String, v: &OVal, nesting: usize) -> Result<(), Error> {
        use core::fmt::Write;
        match v {
            OVal::Pair(p) => {
                if nesting >= self.config.print.nesting {
                    out.push_str("...");
                    return Ok(());
                }
                out.push('(');
                let mut cell = p.clone();
                let mut printed = 0;
                loop {
                    let head = self.component(&cell.head)?;
                    self.render_into(out, &head, nesting + 1)?;
                    printed += 1;
                    match self.component(&cell.tail)? {
                        OVal::Nil => break,
                        OVal::Pair(next) if printed >= self.config.print.elements => {
                            let _ = next;
                            out.push_str(" ...");
                            break;
                        }
                        OVal::Pair(next) => {
                            out.push(' ');
                            cell = next;
                        }
                        other => {
                            return Err(Error::Type(alloc::format!("cannot print a list ending in {}", other.type_name())))
                        }
                    }
                }
                out.push(')');
            }
            OVal::Num(n) => {
                let _ = write!(out, "{}", n);
            }
            OVal::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            OVal::Str(s) => {
                let _ = write!(out, "{}", Value::Str(s.clone()));
            }
            OVal::Sym(s) => out.push_str(s),
            OVal::Nil => out.push_str("()"),
            OVal::Closure(c) => {
                let _ = write!(out, "#<closure {}>", c.name);
            }
            OVal::Prim(p) => {
                let _ = write!(out, "#<prim {}>", p.name());
            }
        }
        Ok(())
    }
}

/// Runs `text` through the reference interpreter.
pub fn oracle_eval(text: &str, config: Config) -> Outcome {
    Oracle::new(config).run_outcome(text)
}

/// Runs `text` through both interpreters under the same configuration.
pub fn differential_run(text: &str, config: Config) -> (Outcome, Outcome, bool) {
    let main = crate::eval::Interpreter::new(config).run_outcome(text);
    let reference = oracle_eval(text, config);
    let same = main.agrees_with(&reference);
    (main, reference, same)
}
