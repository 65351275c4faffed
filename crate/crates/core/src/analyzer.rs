//! Read-time partial compilation.
//!
//! Every name is resolved once, before evaluation, to either a lexical
//! address (the struct owning the slot plus an offset into its block) or a
//! late-bound top-level reference. Each `lambda` and each `let` becomes a
//! [`LambdaStruct`] linked to its lexical parent; the struct also carries the
//! dynamic link used by the runtime to find the block that is current for
//! that level.

use alloc::boxed::Box;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::{Cell, OnceCell, RefCell};

use thiserror::Error;

use crate::env::{GlobalId, Globals, Link};
use crate::reader::SourceExpr;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructId(pub u32);

impl StructId {
    /// The top-level pseudo-struct. Its block is permanent and its names
    /// live in the global table, not in slots.
    pub const TOP: StructId = StructId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructKind {
    Top,
    Function,
    Let,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Parameter,
    LocalDefinition,
}

/// Where a local name lives: `hops` levels up from the referencing struct,
/// slot `offset` of the block that is current for struct `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LexicalAddress {
    pub hops: u32,
    pub offset: u32,
    pub target: StructId,
    pub kind: SlotKind,
}

#[derive(Clone, Debug)]
pub struct LocalRef {
    pub address: LexicalAddress,
    pub name: Rc<str>,
}

#[derive(Clone, Debug)]
pub enum LocalInit {
    Function(StructId),
    Value(Rc<Expr>),
}

#[derive(Clone, Debug)]
pub enum Expr {
    Literal(Value),
    Local(LocalRef),
    Global(GlobalId, Rc<str>),
    If(Box<(Expr, Expr, Expr)>),
    Apply { head: Box<Expr>, args: Box<[Rc<Expr>]> },
    Lambda(StructId),
    /// Constant list data produced from program text at analysis time.
    Quote(Value),
    Excla(Box<Expr>),
    Let(StructId),
}

impl Expr {
    /// Expressions whose evaluation is immediate and cannot diverge or
    /// fail; these are never suspended.
    pub fn is_immediate(&self) -> bool {
        matches!(self, Expr::Literal(_) | Expr::Quote(_) | Expr::Lambda(_))
    }
}

pub struct LambdaStruct {
    pub id: StructId,
    pub kind: StructKind,
    /// Display name: the defined name for functions, else `lambda`/`let`.
    pub name: Rc<str>,
    pub params: Vec<Rc<str>>,
    pub locals: Vec<Rc<str>>,
    pub parent: Option<StructId>,
    /// Number of enclosing lambdas and lets; top-level functions are at 0.
    pub depth: u32,
    body: OnceCell<Rc<Expr>>,
    inits: OnceCell<Rc<[LocalInit]>>,
    pub(crate) link: RefCell<Link>,
    pub(crate) has_children: Cell<bool>,
}

impl LambdaStruct {
    pub fn slot_count(&self) -> usize {
        self.params.len() + self.locals.len()
    }

    pub fn body(&self) -> &Rc<Expr> {
        self.body.get().expect("struct body is set right after analysis")
    }

    pub fn inits(&self) -> &Rc<[LocalInit]> {
        self.inits.get().expect("let bindings are set right after analysis")
    }

    pub fn has_children(&self) -> bool {
        self.has_children.get()
    }

    /// Identity of the block currently installed for this struct.
    pub fn current_block_id(&self) -> Option<usize> {
        self.link.borrow().block.as_ref().map(|b| Rc::as_ptr(b) as *const u8 as usize)
    }
}

pub struct StructTable {
    structs: Vec<LambdaStruct>,
}

impl Default for StructTable {
    fn default() -> Self {
        Self::new()
    }
}

impl StructTable {
    pub fn new() -> Self {
        let top = LambdaStruct {
            id: StructId::TOP,
            kind: StructKind::Top,
            name: Rc::from("top-level"),
            params: Vec::new(),
            locals: Vec::new(),
            parent: None,
            depth: 0,
            body: OnceCell::new(),
            inits: OnceCell::new(),
            link: RefCell::new(Link::default()),
            has_children: Cell::new(false),
        };
        StructTable { structs: alloc::vec![top] }
    }

    #[inline]
    pub fn get(&self, id: StructId) -> &LambdaStruct {
        &self.structs[id.index()]
    }

    pub fn len(&self) -> usize {
        self.structs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LambdaStruct> {
        self.structs.iter()
    }

    fn push(
        &mut self,
        kind: StructKind,
        name: Rc<str>,
        params: Vec<Rc<str>>,
        locals: Vec<Rc<str>>,
        parent: StructId,
    ) -> StructId {
        let id = StructId(self.structs.len() as u32);
        let parent_struct = &self.structs[parent.index()];
        parent_struct.has_children.set(true);
        let depth = match parent_struct.kind {
            StructKind::Top => 0,
            _ => parent_struct.depth + 1,
        };
        self.structs.push(LambdaStruct {
            id,
            kind,
            name,
            params,
            locals,
            parent: Some(parent),
            depth,
            body: OnceCell::new(),
            inits: OnceCell::new(),
            link: RefCell::new(Link::default()),
            has_children: Cell::new(false),
        });
        id
    }

    /// Resolves `name` as seen from inside `scope`: innermost struct first,
    /// and within one struct parameters before local definitions.
    pub fn resolve(&self, scope: StructId, name: &str) -> Option<LexicalAddress> {
        let mut current = scope;
        let mut hops = 0;
        loop {
            let s = self.get(current);
            if s.kind == StructKind::Top {
                return None;
            }
            if let Some(i) = s.params.iter().position(|p| &**p == name) {
                return Some(LexicalAddress {
                    hops,
                    offset: i as u32,
                    target: current,
                    kind: SlotKind::Parameter,
                });
            }
            if let Some(i) = s.locals.iter().position(|p| &**p == name) {
                return Some(LexicalAddress {
                    hops,
                    offset: (s.params.len() + i) as u32,
                    target: current,
                    kind: SlotKind::LocalDefinition,
                });
            }
            current = s.parent?;
            hops += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct AnalysisError(pub String);

fn malformed(what: &str, form: &SourceExpr) -> AnalysisError {
    AnalysisError(format!("malformed {}: {}", what, form))
}

/// A top-level form after analysis.
#[derive(Clone, Debug)]
pub enum TopForm {
    Expr(Rc<Expr>),
    DefineValue { name: Rc<str>, global: GlobalId, expr: Rc<Expr> },
    DefineFunction { name: Rc<str>, global: GlobalId, lambda: StructId },
}

const DEFINE_HEADS: [&str; 3] = ["de", "define", "def"];

pub struct Analyzer<'a> {
    structs: &'a mut StructTable,
    globals: &'a mut Globals,
}

/// The parts of a definition form: `(de name expr)`,
/// `(de (name params...) body)` or `(de name (params...) body)`.
enum Definition<'s> {
    Value(Rc<str>, &'s SourceExpr),
    Function(Rc<str>, &'s [SourceExpr], &'s SourceExpr),
}

impl<'a> Analyzer<'a> {
    pub fn new(structs: &'a mut StructTable, globals: &'a mut Globals) -> Self {
        Analyzer { structs, globals }
    }

    fn special_head<'s>(&self, items: &'s [SourceExpr], scope: StructId) -> Option<&'s str> {
        let name = items.first()?.as_symbol()?;
        let special = matches!(name, "lambda" | "if" | "let" | "quote" | "excla")
            || DEFINE_HEADS.contains(&name);
        (special && self.structs.resolve(scope, name).is_none()).then_some(name)
    }

    pub fn analyze_toplevel(&mut self, form: &SourceExpr) -> Result<TopForm, AnalysisError> {
        if let Some(items) = form.as_list() {
            if let Some(head) = self.special_head(items, StructId::TOP) {
                if DEFINE_HEADS.contains(&head) {
                    return self.toplevel_definition(form);
                }
            }
        }
        Ok(TopForm::Expr(Rc::new(self.analyze(form, StructId::TOP)?)))
    }

    fn toplevel_definition(&mut self, form: &SourceExpr) -> Result<TopForm, AnalysisError> {
        match parse_definition(form)? {
            Definition::Value(name, expr) => {
                let expr = Rc::new(self.analyze(expr, StructId::TOP)?);
                let global = self.globals.intern(&name);
                Ok(TopForm::DefineValue { name, global, expr })
            }
            Definition::Function(name, params, body) => {
                let lambda = self.make_lambda_struct(name.clone(), params, body, StructId::TOP)?;
                let global = self.globals.intern(&name);
                Ok(TopForm::DefineFunction { name, global, lambda })
            }
        }
    }

    pub fn analyze(&mut self, expr: &SourceExpr, scope: StructId) -> Result<Expr, AnalysisError> {
        match expr {
            SourceExpr::Number(n) => Ok(Expr::Literal(Value::Number(*n))),
            SourceExpr::Str(s) => Ok(Expr::Literal(Value::Str(s.clone()))),
            SourceExpr::Datum(v) => Ok(Expr::Literal(v.clone())),
            SourceExpr::Symbol(name) => Ok(self.reference(name, scope)),
            SourceExpr::List(items) if items.is_empty() => Ok(Expr::Literal(Value::Nil)),
            SourceExpr::List(items) => match self.special_head(items, scope) {
                Some("lambda") => {
                    let [_, params, body] = items.as_slice() else {
                        return Err(malformed("lambda", expr));
                    };
                    let params = params.as_list().ok_or_else(|| malformed("lambda", expr))?;
                    let id = self.make_lambda_struct(Rc::from("lambda"), params, body, scope)?;
                    Ok(Expr::Lambda(id))
                }
                Some("if") => {
                    let [_, test, then, otherwise] = items.as_slice() else {
                        return Err(malformed("if", expr));
                    };
                    Ok(Expr::If(Box::new((
                        self.analyze(test, scope)?,
                        self.analyze(then, scope)?,
                        self.analyze(otherwise, scope)?,
                    ))))
                }
                Some("let") => {
                    let [_, bindings, body] = items.as_slice() else {
                        return Err(malformed("let", expr));
                    };
                    let bindings = bindings.as_list().ok_or_else(|| malformed("let", expr))?;
                    self.analyze_let(bindings, body, scope)
                }
                Some("quote") => {
                    let [_, quoted] = items.as_slice() else {
                        return Err(malformed("quote", expr));
                    };
                    Ok(Expr::Quote(datum(quoted)))
                }
                Some("excla") => {
                    let [_, arg] = items.as_slice() else {
                        return Err(malformed("excla", expr));
                    };
                    Ok(Expr::Excla(Box::new(self.analyze(arg, scope)?)))
                }
                Some(head) => Err(AnalysisError(format!(
                    "`{}` is only allowed at top level or as a let binding: {}",
                    head, expr
                ))),
                None => {
                    let head = self.analyze(&items[0], scope)?;
                    let args = items[1..]
                        .iter()
                        .map(|a| self.analyze(a, scope).map(Rc::new))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Expr::Apply { head: Box::new(head), args: args.into_boxed_slice() })
                }
            },
        }
    }

    fn reference(&mut self, name: &Rc<str>, scope: StructId) -> Expr {
        match self.structs.resolve(scope, name) {
            Some(address) => Expr::Local(LocalRef { address, name: name.clone() }),
            None => Expr::Global(self.globals.intern(name), name.clone()),
        }
    }

    pub fn make_lambda_struct(
        &mut self,
        name: Rc<str>,
        params: &[SourceExpr],
        body: &SourceExpr,
        parent: StructId,
    ) -> Result<StructId, AnalysisError> {
        let params = distinct_names(params, "parameter")?;
        let id = self.structs.push(StructKind::Function, name, params, Vec::new(), parent);
        let body = self.analyze(body, id)?;
        let _ = self.structs.get(id).body.set(Rc::new(body));
        Ok(id)
    }

    pub fn analyze_let(
        &mut self,
        bindings: &[SourceExpr],
        body: &SourceExpr,
        scope: StructId,
    ) -> Result<Expr, AnalysisError> {
        let defs = bindings
            .iter()
            .map(|b| match b.as_list() {
                Some([head, ..]) if head.as_symbol().is_some_and(|h| DEFINE_HEADS.contains(&h)) => {
                    parse_definition(b)
                }
                Some([name, expr]) => match name {
                    SourceExpr::Symbol(n) => Ok(Definition::Value(n.clone(), expr)),
                    _ => Err(malformed("let binding", b)),
                },
                _ => Err(malformed("let binding", b)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let names: Vec<SourceExpr> = defs
            .iter()
            .map(|d| match d {
                Definition::Value(n, _) | Definition::Function(n, _, _) => SourceExpr::Symbol(n.clone()),
            })
            .collect();
        let locals = distinct_names(&names, "local definition")?;
        let id = self.structs.push(StructKind::Let, Rc::from("let"), Vec::new(), locals, scope);
        let mut inits = Vec::with_capacity(defs.len());
        for def in defs {
            inits.push(match def {
                Definition::Value(_, expr) => LocalInit::Value(Rc::new(self.analyze(expr, id)?)),
                Definition::Function(name, params, fbody) => {
                    LocalInit::Function(self.make_lambda_struct(name, params, fbody, id)?)
                }
            });
        }
        let body = self.analyze(body, id)?;
        let s = self.structs.get(id);
        let _ = s.inits.set(inits.into());
        let _ = s.body.set(Rc::new(body));
        Ok(Expr::Let(id))
    }
}

fn parse_definition(form: &SourceExpr) -> Result<Definition<'_>, AnalysisError> {
    let items = form.as_list().unwrap_or(&[]);
    match items {
        [_, SourceExpr::Symbol(name), expr] => Ok(Definition::Value(name.clone(), expr)),
        [_, SourceExpr::List(header), body] => match header.split_first() {
            Some((SourceExpr::Symbol(name), params)) => Ok(Definition::Function(name.clone(), params, body)),
            _ => Err(AnalysisError(format!("de needs a symbol name: {}", form))),
        },
        [_, SourceExpr::Symbol(name), SourceExpr::List(params), body] => {
            Ok(Definition::Function(name.clone(), params, body))
        }
        [_, _, _] | [_, _, _, _] => Err(AnalysisError(format!("de needs a symbol name: {}", form))),
        _ => Err(malformed("de", form)),
    }
}

fn distinct_names(items: &[SourceExpr], what: &str) -> Result<Vec<Rc<str>>, AnalysisError> {
    let mut names: Vec<Rc<str>> = Vec::with_capacity(items.len());
    for item in items {
        let SourceExpr::Symbol(name) = item else {
            return Err(AnalysisError(format!("{} must be a symbol, found {}", what, item)));
        };
        if names.contains(name) {
            return Err(AnalysisError(format!("duplicate {} `{}`", what, name)));
        }
        names.push(name.clone());
    }
    Ok(names)
}

/// Converts program text into constant list data.
pub fn datum(expr: &SourceExpr) -> Value {
    match expr {
        SourceExpr::Symbol(s) => Value::Symbol(s.clone()),
        SourceExpr::Number(n) => Value::Number(*n),
        SourceExpr::Str(s) => Value::Str(s.clone()),
        SourceExpr::Datum(v) => v.clone(),
        SourceExpr::List(items) => Value::list(items.iter().map(datum).collect::<Vec<_>>()),
    }
}
