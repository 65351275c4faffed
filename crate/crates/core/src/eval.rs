//! The block-model evaluator, for both call by value and call by need.

use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analyzer::{Analyzer, Expr, LexicalAddress, LocalInit, StructId, StructTable, TopForm};
use crate::builtins::Prim;
use crate::env::{Block, Counters, GlobalId, GlobalState, Globals, RuntimeEnv, Slot};
use crate::error::Error;
use crate::reader::{read_program, SourceExpr};
use crate::value::{Pair, Suspension, Thunk, ThunkState, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Strict arguments, strict `cons`, eager top-level definitions.
    Value,
    /// Memoized suspended arguments, lazy `cons`, lazy definitions.
    Need,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::Value, Strategy::Need];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Value => "value",
            Strategy::Need => "need",
        }
    }
}

impl core::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "value" => Ok(Strategy::Value),
            "need" => Ok(Strategy::Need),
            other => Err(alloc::format!("unknown strategy `{}` (expected value or need)", other)),
        }
    }
}

/// Printer truncation limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrintDepth {
    /// Elements printed per list spine before `...`.
    pub elements: usize,
    /// List nesting printed before `...`.
    pub nesting: usize,
}

impl Default for PrintDepth {
    fn default() -> Self {
        PrintDepth { elements: 100, nesting: 20 }
    }
}

pub const DEFAULT_DEPTH_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub strategy: Strategy,
    /// Closure applications allowed per top-level form.
    pub step_limit: Option<u64>,
    /// Nesting of closure applications and thunk forcings.
    pub depth_limit: usize,
    pub print: PrintDepth,
}

impl Config {
    pub fn new(strategy: Strategy) -> Self {
        Config { strategy, step_limit: None, depth_limit: DEFAULT_DEPTH_LIMIT, print: PrintDepth::default() }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = Some(limit);
        self
    }

    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }
}

/// What a top-level form produced.
#[derive(Clone, Debug)]
pub enum Evaluated {
    Value(Value),
    DefinedValue(Rc<str>),
    DefinedFunction(Rc<str>),
}

pub struct Interpreter {
    pub(crate) config: Config,
    pub(crate) structs: StructTable,
    pub(crate) globals: Globals,
    pub(crate) env: RuntimeEnv,
    steps: u64,
    depth: usize,
    pub(crate) output: String,
}

impl Interpreter {
    pub fn new(config: Config) -> Self {
        let structs = StructTable::new();
        let env = RuntimeEnv::new(&structs);
        let mut globals = Globals::default();
        for prim in Prim::ALL {
            let id = globals.intern(prim.name());
            globals.set(id, GlobalState::Bound(Slot::Ready(Value::Primitive(prim))));
        }
        for (name, b) in [("true", true), ("false", false)] {
            let id = globals.intern(name);
            globals.set(id, GlobalState::Bound(Slot::Ready(Value::Boolean(b))));
        }
        Interpreter { config, structs, globals, env, steps: 0, depth: 0, output: String::new() }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn set_print_depth(&mut self, print: PrintDepth) {
        self.config.print = print;
    }

    pub fn strategy(&self) -> Strategy {
        self.config.strategy
    }

    pub fn counters(&self) -> Counters {
        self.env.counters
    }

    pub fn structs(&self) -> &StructTable {
        &self.structs
    }

    pub fn runtime(&self) -> &RuntimeEnv {
        &self.env
    }

    pub fn runtime_mut(&mut self) -> &mut RuntimeEnv {
        &mut self.env
    }

    /// Everything `print` has written since the last call.
    pub fn take_output(&mut self) -> String {
        core::mem::take(&mut self.output)
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    /// Reads and evaluates every form of `text`, stopping at the first
    /// error. Returns what the last form produced.
    pub fn run_program(&mut self, text: &str) -> Result<Option<Evaluated>, Error> {
        let forms = read_program(text)?;
        let mut last = None;
        for form in &forms {
            last = Some(self.eval_toplevel(form)?);
        }
        Ok(last)
    }

    /// Evaluates `text` and returns the printed value of its last form,
    /// forcing it completely (subject to the print limits).
    pub fn eval_to_string(&mut self, text: &str) -> Result<String, Error> {
        match self.run_program(text)? {
            Some(ev) => self.render_evaluated(&ev),
            None => Ok(String::new()),
        }
    }

    pub fn eval_toplevel(&mut self, form: &SourceExpr) -> Result<Evaluated, Error> {
        self.steps = 0;
        self.depth = 0;
        let top = Analyzer::new(&mut self.structs, &mut self.globals).analyze_toplevel(form)?;
        match top {
            TopForm::Expr(e) => Ok(Evaluated::Value(self.eval(&e, StructId::TOP)?)),
            TopForm::DefineFunction { name, global, lambda } => {
                let closure = Value::Closure(lambda, self.env.top_block().clone());
                self.globals.set(global, GlobalState::Bound(Slot::Ready(closure)));
                Ok(Evaluated::DefinedFunction(name))
            }
            TopForm::DefineValue { name, global, expr } => {
                match self.config.strategy {
                    Strategy::Need => {
                        let slot = if expr.is_immediate() {
                            Slot::Ready(self.eval(&expr, StructId::TOP)?)
                        } else {
                            self.env.counters.thunks_created += 1;
                            let top = self.env.top_block().clone();
                            Slot::Delayed(Thunk::new(expr, StructId::TOP, top, Some(name.clone())))
                        };
                        self.globals.set(global, GlobalState::Bound(slot));
                    }
                    Strategy::Value => {
                        if !expr.is_immediate() {
                            self.env.counters.args_evaluated += 1;
                        }
                        let previous = self.globals.cell(global).state.clone();
                        self.globals.set(global, GlobalState::Defining);
                        match self.eval(&expr, StructId::TOP) {
                            Ok(v) => self.globals.set(global, GlobalState::Bound(Slot::Ready(v))),
                            Err(e) => {
                                self.globals.set(global, previous);
                                return Err(e);
                            }
                        }
                    }
                }
                Ok(Evaluated::DefinedValue(name))
            }
        }
    }

    /// Printed form of a top-level result: a defined function prints as
    /// its name, a defined value as the (forced) value.
    pub fn render_evaluated(&mut self, ev: &Evaluated) -> Result<String, Error> {
        match ev {
            Evaluated::Value(v) => self.render(v),
            Evaluated::DefinedFunction(name) => Ok(String::from(&**name)),
            Evaluated::DefinedValue(name) => {
                let v = self.force_global_name(name)?;
                self.render(&v)
            }
        }
    }

    pub fn force_global_name(&mut self, name: &str) -> Result<Value, Error> {
        let id = self.globals.lookup(name).ok_or_else(|| Error::Unbound(Rc::from(name)))?;
        self.force_global(id)
    }

    pub(crate) fn eval(&mut self, expr: &Expr, ctx: StructId) -> Result<Value, Error> {
        match expr {
            Expr::Literal(v) | Expr::Quote(v) => Ok(v.clone()),
            Expr::Local(r) => self.force_local(&r.address, &r.name),
            Expr::Global(id, _) => self.force_global(*id),
            Expr::If(parts) => {
                let (test, then, otherwise) = &**parts;
                match self.eval(test, ctx)? {
                    Value::Boolean(true) => self.eval(then, ctx),
                    Value::Boolean(false) => self.eval(otherwise, ctx),
                    other => Err(Error::Type(alloc::format!(
                        "if expects a boolean test, got {}",
                        other.type_name()
                    ))),
                }
            }
            Expr::Lambda(sid) => self.make_closure(*sid),
            Expr::Apply { head, args } => {
                let f = self.eval(head, ctx)?;
                self.apply(f, args, ctx)
            }
            Expr::Excla(arg) => self.eval_excla(arg, ctx),
            Expr::Let(sid) => self.eval_let(*sid),
        }
    }

    fn current_block(&self, sid: StructId) -> Result<Rc<Block>, Error> {
        self.structs
            .get(sid)
            .link
            .borrow()
            .block
            .clone()
            .ok_or_else(|| Error::Internal(alloc::format!("no block installed for struct {}", sid.0)))
    }

    fn make_closure(&mut self, sid: StructId) -> Result<Value, Error> {
        let parent = self.structs.get(sid).parent.unwrap_or(StructId::TOP);
        Ok(Value::Closure(sid, self.current_block(parent)?))
    }

    fn force_local(&mut self, address: &LexicalAddress, name: &Rc<str>) -> Result<Value, Error> {
        let block = self.env.block_at(&self.structs, address)?;
        let offset = address.offset as usize;
        let slot = block.slots[offset].borrow().clone();
        match slot {
            Slot::Ready(v) => Ok(v),
            Slot::LocalFn(sid) => Ok(Value::Closure(sid, block.clone())),
            Slot::Delayed(t) => {
                let v = self.force_thunk(&t)?;
                *block.slots[offset].borrow_mut() = Slot::Ready(v.clone());
                Ok(v)
            }
            Slot::Binding(i) => {
                let t = self.materialize(&block, i, offset);
                let v = self.force_thunk(&t)?;
                *block.slots[offset].borrow_mut() = Slot::Ready(v.clone());
                Ok(v)
            }
            Slot::Unset => Err(Error::Uninitialized(name.clone())),
        }
    }

    /// The slot a local reference designates, in a form that can be stored
    /// in another block without losing its environment.
    fn share_local(&mut self, address: &LexicalAddress) -> Result<Slot, Error> {
        let block = self.env.block_at(&self.structs, address)?;
        let offset = address.offset as usize;
        let slot = block.slots[offset].borrow().clone();
        Ok(match slot {
            Slot::LocalFn(sid) => Slot::Ready(Value::Closure(sid, block.clone())),
            Slot::Binding(i) => Slot::Delayed(self.materialize(&block, i, offset)),
            other => other,
        })
    }

    /// Turns a pending let binding into a thunk stored in its slot.
    fn materialize(&mut self, block: &Rc<Block>, index: u32, offset: usize) -> Rc<Thunk> {
        let st = self.structs.get(block.owner);
        let LocalInit::Value(expr) = &st.inits()[index as usize] else {
            unreachable!("function bindings are stored as LocalFn");
        };
        let label = st.locals.get(index as usize).cloned();
        let t = Thunk::new(expr.clone(), block.owner, block.clone(), label);
        self.env.counters.thunks_created += 1;
        *block.slots[offset].borrow_mut() = Slot::Delayed(t.clone());
        t
    }

    fn force_global(&mut self, id: GlobalId) -> Result<Value, Error> {
        self.env.counters.lookups += 1;
        let cell = self.globals.cell(id);
        match &cell.state {
            GlobalState::Undefined => Err(Error::Unbound(cell.name.clone())),
            GlobalState::Defining => Err(Error::Cyclic(Some(cell.name.clone()))),
            GlobalState::Bound(Slot::Ready(v)) => Ok(v.clone()),
            GlobalState::Bound(Slot::Delayed(t)) => {
                let t = t.clone();
                let v = self.force_thunk(&t)?;
                if let GlobalState::Bound(slot @ Slot::Delayed(_)) = &mut self.globals.cell_mut(id).state {
                    *slot = Slot::Ready(v.clone());
                }
                Ok(v)
            }
            GlobalState::Bound(_) => Err(Error::Internal(String::from("malformed global slot"))),
        }
    }

    fn enter(&mut self) -> Result<(), Error> {
        if self.depth >= self.config.depth_limit {
            return Err(Error::DepthLimit(self.config.depth_limit));
        }
        self.depth += 1;
        Ok(())
    }

    pub(crate) fn force_thunk(&mut self, t: &Rc<Thunk>) -> Result<Value, Error> {
        let susp = {
            let mut state = t.state.borrow_mut();
            match &*state {
                ThunkState::Forced(v) => return Ok(v.clone()),
                ThunkState::Running => return Err(Error::Cyclic(t.label.clone())),
                ThunkState::Delayed(s) => {
                    let s = s.clone();
                    *state = ThunkState::Running;
                    s
                }
            }
        };
        let result = self.enter().and_then(|()| {
            let r = self.eval_suspension(&susp);
            self.depth -= 1;
            r
        });
        let mut state = t.state.borrow_mut();
        match result {
            Ok(v) => {
                self.env.counters.thunks_forced += 1;
                *state = ThunkState::Forced(v.clone());
                Ok(v)
            }
            Err(e) => {
                *state = ThunkState::Delayed(susp);
                Err(e)
            }
        }
    }

    fn eval_suspension(&mut self, susp: &Suspension) -> Result<Value, Error> {
        let log = self.env.install(&self.structs, susp.owner, &susp.env)?;
        let r = self.eval(&susp.expr, susp.owner);
        self.env.restore(&self.structs, log);
        r
    }

    /// Forces a pair component in place.
    pub(crate) fn force_cell(&mut self, cell: &core::cell::RefCell<Slot>) -> Result<Value, Error> {
        let slot = cell.borrow().clone();
        match slot {
            Slot::Ready(v) => Ok(v),
            Slot::Delayed(t) => {
                let v = self.force_thunk(&t)?;
                *cell.borrow_mut() = Slot::Ready(v.clone());
                Ok(v)
            }
            _ => Err(Error::Internal(String::from("pair component is not a value or thunk"))),
        }
    }

    /// Suspends `expr` for call by need. Immediate expressions are
    /// evaluated on the spot and local variables share their slot.
    pub(crate) fn delay(&mut self, expr: &Rc<Expr>, ctx: StructId) -> Result<Slot, Error> {
        match &**expr {
            e if e.is_immediate() => Ok(Slot::Ready(self.eval(e, ctx)?)),
            Expr::Local(r) => self.share_local(&r.address),
            _ => {
                self.env.counters.thunks_created += 1;
                let env = self.current_block(ctx)?;
                Ok(Slot::Delayed(Thunk::new(expr.clone(), ctx, env, None)))
            }
        }
    }

    /// Evaluates `expr` now, for a position call by need would suspend.
    pub(crate) fn eval_strict_arg(&mut self, expr: &Expr, ctx: StructId) -> Result<Value, Error> {
        if !expr.is_immediate() {
            self.env.counters.args_evaluated += 1;
        }
        self.eval(expr, ctx)
    }

    pub(crate) fn apply(&mut self, f: Value, args: &[Rc<Expr>], ctx: StructId) -> Result<Value, Error> {
        match f {
            Value::Closure(sid, env) => {
                self.steps += 1;
                self.env.counters.closure_calls += 1;
                if let Some(limit) = self.config.step_limit {
                    if self.steps > limit {
                        return Err(Error::StepLimit(limit));
                    }
                }
                self.enter()?;
                let r = self.apply_closure(sid, env, args, ctx);
                self.depth -= 1;
                r
            }
            Value::Primitive(p) => self.call_primitive(p, args, ctx),
            other => Err(Error::Type(alloc::format!("{} is not a function", other.type_name()))),
        }
    }

    fn apply_closure(&mut self, sid: StructId, env: Rc<Block>, args: &[Rc<Expr>], ctx: StructId) -> Result<Value, Error> {
        let st = self.structs.get(sid);
        if st.params.len() != args.len() {
            return Err(Error::Arity { name: st.name.clone(), expected: st.params.len(), got: args.len() });
        }
        let mut slots = Vec::with_capacity(args.len());
        match self.config.strategy {
            Strategy::Value => {
                for a in args {
                    slots.push(Slot::Ready(self.eval_strict_arg(a, ctx)?));
                }
            }
            Strategy::Need => {
                for a in args {
                    slots.push(self.delay(a, ctx)?);
                }
            }
        }
        let block = self.env.new_block(sid, slots, env);
        let log = self.env.install(&self.structs, sid, &block)?;
        let body = self.structs.get(sid).body().clone();
        let r = self.eval(&body, sid);
        self.env.restore(&self.structs, log);
        r
    }

    fn eval_let(&mut self, sid: StructId) -> Result<Value, Error> {
        let st = self.structs.get(sid);
        let parent = st.parent.unwrap_or(StructId::TOP);
        let inits = st.inits().clone();
        let lazy = self.config.strategy == Strategy::Need;
        let slots = inits
            .iter()
            .enumerate()
            .map(|(i, init)| match init {
                LocalInit::Function(f) => Slot::LocalFn(*f),
                LocalInit::Value(_) if lazy => Slot::Binding(i as u32),
                LocalInit::Value(_) => Slot::Unset,
            })
            .collect();
        let parent_block = self.current_block(parent)?;
        let block = self.env.new_block(sid, slots, parent_block);
        let log = self.env.install(&self.structs, sid, &block)?;
        let r = self.eval_let_body(sid, &block, &inits, lazy);
        self.env.restore(&self.structs, log);
        r
    }

    fn eval_let_body(&mut self, sid: StructId, block: &Rc<Block>, inits: &[LocalInit], lazy: bool) -> Result<Value, Error> {
        if !lazy {
            for (i, init) in inits.iter().enumerate() {
                if let LocalInit::Value(expr) = init {
                    let v = self.eval_strict_arg(expr, sid)?;
                    *block.slots[i].borrow_mut() = Slot::Ready(v);
                }
            }
        }
        let body = self.structs.get(sid).body().clone();
        self.eval(&body, sid)
    }

    fn eval_excla(&mut self, arg: &Expr, ctx: StructId) -> Result<Value, Error> {
        let v = self.eval(arg, ctx)?;
        let text = self.to_source(v)?;
        let expr = Analyzer::new(&mut self.structs, &mut self.globals).analyze(&text, ctx)?;
        self.eval(&expr, ctx)
    }

    /// Converts a datum back into program text, forcing the whole list
    /// structure. Values that have no textual form are embedded as is.
    pub(crate) fn to_source(&mut self, v: Value) -> Result<SourceExpr, Error> {
        Ok(match v {
            Value::Number(n) => SourceExpr::Number(n),
            Value::Symbol(s) => SourceExpr::Symbol(s),
            Value::Str(s) => SourceExpr::Str(s),
            Value::Nil => SourceExpr::List(Vec::new()),
            Value::Pair(p) => {
                let mut items = Vec::new();
                let mut cell = p;
                loop {
                    let head = self.force_cell(&cell.head)?;
                    items.push(self.to_source(head)?);
                    match self.force_cell(&cell.tail)? {
                        Value::Nil => break,
                        Value::Pair(next) => cell = next,
                        other => {
                            return Err(Error::Type(alloc::format!(
                                "excla needs a proper list, found a {} tail",
                                other.type_name()
                            )))
                        }
                    }
                }
                SourceExpr::List(items)
            }
            other => SourceExpr::Datum(other),
        })
    }

    pub(crate) fn make_pair(&mut self, head: Slot, tail: Slot) -> Value {
        Value::Pair(Pair::new(head, tail))
    }

    /// Current-block identity of every struct; used to check that
    /// evaluation leaves the environment exactly as it found it.
    pub fn link_snapshot(&self) -> Vec<(Option<usize>, u64)> {
        self.env.link_snapshot(&self.structs)
    }

    pub fn global_names(&self) -> impl Iterator<Item = &str> {
        self.globals.names()
    }
}

/// Result of running a whole program: what `print` wrote, and the
/// printed last value or the error that stopped the run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub output: String,
    pub result: Result<String, Error>,
}

impl Outcome {
    pub fn is_limit(&self) -> bool {
        matches!(&self.result, Err(e) if e.is_limit())
    }

    /// Printed forms and error categories agree. Two runs that both hit a
    /// limit agree whatever they printed on the way.
    pub fn agrees_with(&self, other: &Outcome) -> bool {
        if self.is_limit() && other.is_limit() {
            return true;
        }
        self.output == other.output
            && match (&self.result, &other.result) {
                (Ok(a), Ok(b)) => a == b,
                (Err(a), Err(b)) => a.category() == b.category(),
                _ => false,
            }
    }
}

impl core::fmt::Display for Outcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.output)?;
        match &self.result {
            Ok(v) => write!(f, "= {}", v),
            Err(e) => write!(f, "** {} error - {} **", e.category(), e),
        }
    }
}

impl Interpreter {
    /// Runs `text` to completion, printing the last form's value.
    pub fn run_outcome(&mut self, text: &str) -> Outcome {
        let result = self.eval_to_string(text);
        Outcome { output: self.take_output(), result }
    }
}

/// Runs `text` in a fresh interpreter with the given step budget.
pub fn run_with_limit(text: &str, strategy: Strategy, step_limit: u64) -> Outcome {
    Interpreter::new(Config::new(strategy).with_step_limit(step_limit)).run_outcome(text)
}
