//! Blocks, dynamic links and environment switching.
//!
//! Each call allocates a [`Block`] holding its argument (or let-local)
//! slots and a pointer to the block of the defining environment. A lambda
//! structure's dynamic link says which block is current for that lexical
//! level, so a variable access is one link read plus one offset read.
//!
//! Installing an environment walks the struct's lexical ancestors and the
//! target block's parent chain in lockstep, assigning stale links, and
//! stops at the first level that is already correct. Every link also
//! carries the epoch in which it was last verified; the epoch advances
//! whenever a struct that has nested structs gets a different block, since
//! that can leave its descendants' links pointing below a superseded
//! block. A level counts as correct only if both its block and its stamp
//! match, which keeps the early stop sound when a child environment is
//! re-entered inside a fresh activation of one of its ancestors.

use alloc::boxed::Box;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;

use hashbrown::HashMap;

use crate::analyzer::{LexicalAddress, StructId, StructTable};
use crate::value::{Thunk, Value};

pub struct Block {
    pub owner: StructId,
    pub slots: Box<[RefCell<Slot>]>,
    /// Block of the defining environment (one lexical level up).
    pub parent: Option<Rc<Block>>,
}

impl Block {
    pub fn new(owner: StructId, slots: Vec<Slot>, parent: Option<Rc<Block>>) -> Rc<Block> {
        Rc::new(Block {
            owner,
            slots: slots.into_iter().map(RefCell::new).collect(),
            parent,
        })
    }
}

#[derive(Clone)]
pub enum Slot {
    Ready(Value),
    Delayed(Rc<Thunk>),
    /// A let-local function; reading it yields a closure over the block
    /// that holds this slot.
    LocalFn(StructId),
    /// A let-local value binding (by index into the let's bindings) whose
    /// suspension has not been materialized yet.
    Binding(u32),
    /// A let-local value binding not evaluated yet (call by value).
    Unset,
}

#[derive(Clone, Default)]
pub struct Link {
    pub block: Option<Rc<Block>>,
    pub stamp: u64,
}

/// Marks the stretch of the runtime's save stack recorded by one
/// installation. Restoring replays it in reverse.
#[must_use]
#[derive(Debug)]
pub struct SwitchLog {
    start: usize,
    len: usize,
}

impl SwitchLog {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub installs: u64,
    pub switch_tests: u64,
    pub switch_assignments: u64,
    pub blocks_allocated: u64,
    pub lookups: u64,
    pub thunks_created: u64,
    pub thunks_forced: u64,
    /// Call-by-value evaluations of argument, cons and binding expressions
    /// that call by need would have suspended.
    pub args_evaluated: u64,
    pub closure_calls: u64,
}

impl Counters {
    pub fn as_pairs(&self) -> [(&'static str, u64); 9] {
        [
            ("installs", self.installs),
            ("switch_tests", self.switch_tests),
            ("switch_assignments", self.switch_assignments),
            ("blocks_allocated", self.blocks_allocated),
            ("lookups", self.lookups),
            ("thunks_created", self.thunks_created),
            ("thunks_forced", self.thunks_forced),
            ("args_evaluated", self.args_evaluated),
            ("closure_calls", self.closure_calls),
        ]
    }

    pub fn delta(&self, earlier: &Counters) -> Counters {
        Counters {
            installs: self.installs - earlier.installs,
            switch_tests: self.switch_tests - earlier.switch_tests,
            switch_assignments: self.switch_assignments - earlier.switch_assignments,
            blocks_allocated: self.blocks_allocated - earlier.blocks_allocated,
            lookups: self.lookups - earlier.lookups,
            thunks_created: self.thunks_created - earlier.thunks_created,
            thunks_forced: self.thunks_forced - earlier.thunks_forced,
            args_evaluated: self.args_evaluated - earlier.args_evaluated,
            closure_calls: self.closure_calls - earlier.closure_calls,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GlobalId(pub u32);

#[derive(Clone)]
pub enum GlobalState {
    Undefined,
    /// A call-by-value definition whose expression is being evaluated.
    Defining,
    Bound(Slot),
}

pub struct GlobalCell {
    pub name: Rc<str>,
    pub state: GlobalState,
}

/// The growable top-level table. Names are interned at analysis time;
/// their cells are filled (and refilled) by top-level definitions.
#[derive(Default)]
pub struct Globals {
    index: HashMap<Rc<str>, GlobalId>,
    cells: Vec<GlobalCell>,
}

impl Globals {
    pub fn intern(&mut self, name: &str) -> GlobalId {
        if let Some(id) = self.index.get(name) {
            return *id;
        }
        let id = GlobalId(self.cells.len() as u32);
        let name: Rc<str> = Rc::from(name);
        self.index.insert(name.clone(), id);
        self.cells.push(GlobalCell { name, state: GlobalState::Undefined });
        id
    }

    pub fn lookup(&self, name: &str) -> Option<GlobalId> {
        self.index.get(name).copied()
    }

    #[inline]
    pub fn cell(&self, id: GlobalId) -> &GlobalCell {
        &self.cells[id.0 as usize]
    }

    pub fn cell_mut(&mut self, id: GlobalId) -> &mut GlobalCell {
        &mut self.cells[id.0 as usize]
    }

    pub fn set(&mut self, id: GlobalId, state: GlobalState) {
        self.cells[id.0 as usize].state = state;
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.cells
            .iter()
            .filter(|c| matches!(c.state, GlobalState::Bound(_)))
            .map(|c| &*c.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantViolation(pub String);

/// Cost of one installation, recorded when tracing is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstallTrace {
    pub target: StructId,
    pub tests: u32,
    pub assignments: u32,
}

pub struct RuntimeEnv {
    top_block: Rc<Block>,
    saved: Vec<(StructId, Link)>,
    epoch: u64,
    pub counters: Counters,
    trace: Option<Vec<InstallTrace>>,
}

impl RuntimeEnv {
    pub fn new(structs: &StructTable) -> Self {
        let top_block = Block::new(StructId::TOP, Vec::new(), None);
        structs.get(StructId::TOP).link.borrow_mut().block = Some(top_block.clone());
        RuntimeEnv { top_block, saved: Vec::new(), epoch: 0, counters: Counters::default(), trace: None }
    }

    /// Starts (or stops) recording one [`InstallTrace`] per installation.
    pub fn set_tracing(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<InstallTrace> {
        self.trace.as_mut().map(core::mem::take).unwrap_or_default()
    }

    pub fn top_block(&self) -> &Rc<Block> {
        &self.top_block
    }

    pub fn new_block(&mut self, owner: StructId, slots: Vec<Slot>, parent: Rc<Block>) -> Rc<Block> {
        self.counters.blocks_allocated += 1;
        Block::new(owner, slots, Some(parent))
    }

    /// Makes `block` current for `sid` and for each lexical ancestor,
    /// stopping at the first level already verified correct. The top-level
    /// pseudo-struct is never tested: its block is permanent.
    pub fn install(
        &mut self,
        structs: &StructTable,
        sid: StructId,
        block: &Rc<Block>,
    ) -> Result<SwitchLog, InvariantViolation> {
        if block.owner != sid {
            return Err(InvariantViolation(alloc::format!(
                "block of struct {} installed for struct {}",
                block.owner.0, sid.0
            )));
        }
        let verified = self.epoch;
        let start = self.saved.len();
        let (tests0, assignments0) = (self.counters.switch_tests, self.counters.switch_assignments);
        self.counters.installs += 1;
        let mut reassigned_parent = false;
        let mut s = sid;
        let mut b = block;
        while s != StructId::TOP {
            self.counters.switch_tests += 1;
            let st = structs.get(s);
            let mut link = st.link.borrow_mut();
            let same = link.block.as_ref().is_some_and(|cur| Rc::ptr_eq(cur, b));
            if same && link.stamp == verified {
                break;
            }
            self.saved.push((s, link.clone()));
            if !same {
                link.block = Some(b.clone());
                self.counters.switch_assignments += 1;
                reassigned_parent |= st.has_children();
            }
            drop(link);
            s = st.parent.expect("non-top structs have a parent");
            b = match &b.parent {
                Some(p) => p,
                None => {
                    return Err(InvariantViolation(alloc::format!(
                        "block chain ends before struct {} reaches top level",
                        s.0
                    )))
                }
            };
        }
        if reassigned_parent {
            self.epoch += 1;
        }
        for (s, _) in &self.saved[start..] {
            structs.get(*s).link.borrow_mut().stamp = self.epoch;
        }
        if let Some(trace) = &mut self.trace {
            trace.push(InstallTrace {
                target: sid,
                tests: (self.counters.switch_tests - tests0) as u32,
                assignments: (self.counters.switch_assignments - assignments0) as u32,
            });
        }
        let log = SwitchLog { start, len: self.saved.len() - start };
        debug_assert!(self.chain_is_coherent(structs, sid), "chain incoherent after install");
        Ok(log)
    }

    pub fn restore(&mut self, structs: &StructTable, log: SwitchLog) {
        debug_assert_eq!(self.saved.len(), log.start + log.len, "switch logs restored out of order");
        for (s, link) in self.saved.drain(log.start..).rev() {
            *structs.get(s).link.borrow_mut() = link;
        }
    }

    /// True when every ancestor link of `sid` points at the matching
    /// parent of `sid`'s current block.
    pub fn chain_is_coherent(&self, structs: &StructTable, sid: StructId) -> bool {
        let mut s = sid;
        let Some(mut b) = structs.get(s).link.borrow().block.clone() else {
            return false;
        };
        while s != StructId::TOP {
            let st = structs.get(s);
            match &st.link.borrow().block {
                Some(cur) if Rc::ptr_eq(cur, &b) => {}
                _ => return false,
            }
            s = st.parent.expect("non-top structs have a parent");
            b = match &b.parent {
                Some(p) => p.clone(),
                None => return false,
            };
        }
        Rc::ptr_eq(&b, &self.top_block)
    }

    /// Block currently installed for the level `address` refers to.
    #[inline]
    pub fn block_at(&mut self, structs: &StructTable, address: &LexicalAddress) -> Result<Rc<Block>, InvariantViolation> {
        self.counters.lookups += 1;
        structs.get(address.target).link.borrow().block.clone().ok_or_else(|| {
            InvariantViolation(alloc::format!("no block installed for struct {}", address.target.0))
        })
    }

    /// Reads the slot `address` designates. Cost is one link read and one
    /// offset read, whatever the dynamic depth.
    pub fn lookup(&mut self, structs: &StructTable, address: &LexicalAddress) -> Result<Slot, InvariantViolation> {
        let block = self.block_at(structs, address)?;
        let slot = block.slots[address.offset as usize].borrow().clone();
        Ok(slot)
    }

    /// Snapshot of every struct's dynamic link (block identity and stamp).
    pub fn link_snapshot(&self, structs: &StructTable) -> Vec<(Option<usize>, u64)> {
        structs
            .iter()
            .map(|s| (s.current_block_id(), s.link.borrow().stamp))
            .collect()
    }
}
