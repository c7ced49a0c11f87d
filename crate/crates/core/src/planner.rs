//! Forward state-space planner over grounded behaviors.
//!
//! Search is A* ordered by `(f, step-name sequence)`, so among plans of equal
//! cost the one whose grounded step names sort first is returned. The
//! heuristic `ceil(unsatisfied / m) * min_cost`, where `m` is the largest
//! number of goal literals any one action can settle, never overestimates,
//! which keeps returned plans cost-optimal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stores::{BehaviorSpec, BehaviorStore, StoreError, Stores};
use crate::symbolic::{
    entails, ground, Atom, Conjunction, Literal, ParamAtom, State, Substitution, Symbol,
    SymbolicError,
};
use crate::values::ValueKind;

pub const MAX_GROUNDED_ACTIONS: usize = 100_000;
pub const MAX_EXPANSION_DEPTH: usize = 16;
const MAX_SEARCH_NODES: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    Safety = 0,
    Operator = 1,
    SelfDirected = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSource {
    Operator,
    Acoustic,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalStatus {
    Pending,
    Active,
    Achieved,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub id: u64,
    pub condition: Conjunction,
    pub priority: Priority,
    pub source: GoalSource,
    pub injected_at: f64,
    pub status: GoalStatus,
}

impl Goal {
    pub fn is_open(&self) -> bool {
        matches!(self.status, GoalStatus::Pending | GoalStatus::Active)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Pending,
    Running,
    Done,
    Failed,
}

/// One grounded behavior invocation, e.g. `goto(wp_1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub invocation: Atom,
    pub status: StepStatus,
}

impl PlanStep {
    pub fn new(invocation: Atom) -> Self {
        PlanStep {
            invocation,
            status: StepStatus::Pending,
        }
    }

    pub fn parse(text: &str) -> Result<Self, SymbolicError> {
        Ok(PlanStep::new(text.parse()?))
    }

    pub fn behavior(&self) -> &Symbol {
        &self.invocation.predicate
    }

    pub fn substitution(&self, spec: &BehaviorSpec) -> Substitution {
        substitution_for(spec, &self.invocation.args)
    }
}

pub fn substitution_for(spec: &BehaviorSpec, args: &[Symbol]) -> Substitution {
    spec.params
        .iter()
        .zip(args)
        .map(|(p, a)| (p.var.clone(), a.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanProvenance {
    Planned,
    OperatorOverride,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub goal_id: u64,
    pub steps: Vec<PlanStep>,
    pub created_at: f64,
    pub provenance: PlanProvenance,
}

impl Plan {
    pub fn behavior_names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.behavior().as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    /// `step == steps.len()` means the goal itself is not reached.
    Violation { step: usize, literal: Literal },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("goal unreachable; unsatisfiable literals: {}", fmt_lits(.0))]
    Unsolvable(Vec<Literal>),
    #[error("grounding would produce {0} actions")]
    GroundingExplosion(usize),
    #[error("search exceeded {0} nodes")]
    SearchLimit(usize),
    #[error("composite expansion deeper than {MAX_EXPANSION_DEPTH}")]
    DepthExceeded,
    #[error("unknown behavior {0}")]
    UnknownBehavior(Symbol),
    #[error("{0}")]
    Symbolic(#[from] SymbolicError),
}

fn fmt_lits(lits: &[Literal]) -> String {
    lits.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl From<StoreError> for PlanError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownBehavior(s) | StoreError::UnknownChild(s) => PlanError::UnknownBehavior(s),
            other => PlanError::Symbolic(SymbolicError::NotGround(other.to_string())),
        }
    }
}

/// A behavior with every parameter substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub name: String,
    pub invocation: Atom,
    pub pre: Vec<Literal>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
    pub cond: Vec<(Vec<Literal>, Vec<Atom>)>,
    pub cost: f64,
}

impl GroundAction {
    pub fn from_spec(spec: &BehaviorSpec, args: &[Symbol], cost: f64) -> Result<Self, SymbolicError> {
        let s = substitution_for(spec, args);
        let g = |a: &ParamAtom| ground(a, &s);
        let invocation = Atom::new(spec.name.clone(), args.to_vec());
        Ok(GroundAction {
            name: invocation.to_string(),
            invocation,
            pre: spec
                .preconditions
                .iter()
                .map(|l| l.ground(&s))
                .collect::<Result<_, _>>()?,
            add: spec.add.iter().map(g).collect::<Result<_, _>>()?,
            del: spec.delete.iter().map(g).collect::<Result<_, _>>()?,
            cond: spec
                .conditional
                .iter()
                .map(|c| {
                    Ok((
                        c.when.iter().map(|l| l.ground(&s)).collect::<Result<_, _>>()?,
                        c.add.iter().map(g).collect::<Result<_, _>>()?,
                    ))
                })
                .collect::<Result<_, SymbolicError>>()?,
            cost,
        })
    }

    pub fn applicable(&self, state: &State) -> bool {
        self.pre.iter().all(|l| l.holds_in(state))
    }

    /// Successor state: deletes, then adds, then conditional adds whose
    /// condition held before the action.
    pub fn apply(&self, state: &State) -> State {
        let mut next = state.clone();
        for a in &self.del {
            next.remove(a);
        }
        next.extend(self.add.iter().cloned());
        for (when, add) in &self.cond {
            if when.iter().all(|l| l.holds_in(state)) {
                next.extend(add.iter().cloned());
            }
        }
        next
    }

    /// Atoms that completing this action would make true, given `state`.
    pub fn effective_adds(&self, state: &State) -> Vec<Atom> {
        let mut out = self.add.clone();
        for (when, add) in &self.cond {
            if when.iter().all(|l| l.holds_in(state)) {
                out.extend(add.iter().cloned());
            }
        }
        out
    }
}

/// Constants available for grounding: state, goal, bindings and templates.
pub fn grounding_universe(stores: &Stores, state: &State, goal: &Conjunction) -> BTreeSet<Symbol> {
    let mut u: BTreeSet<Symbol> = BTreeSet::new();
    for a in state.iter().chain(goal.atoms()) {
        u.extend(a.args.iter().cloned());
    }
    u.extend(stores.numerics.symbols().cloned());
    for spec in stores.behaviors.specs() {
        let templates = spec
            .preconditions
            .iter()
            .map(|l| &l.atom)
            .chain(&spec.add)
            .chain(&spec.delete)
            .chain(spec.conditional.iter().flat_map(|c| c.when.iter().map(|l| &l.atom).chain(&c.add)));
        for t in templates {
            u.extend(t.constants().cloned());
        }
    }
    u
}

/// Grounds every behavior that has planner-visible effects.
pub fn ground_actions(
    stores: &Stores,
    universe: &BTreeSet<Symbol>,
) -> Result<Vec<GroundAction>, PlanError> {
    let candidates = |kind: ValueKind| -> Vec<Symbol> {
        universe
            .iter()
            .filter(|s| match kind {
                ValueKind::Any => true,
                k => stores.numerics.resolve(s).is_some_and(|v| k.admits(v.kind())),
            })
            .cloned()
            .collect()
    };
    let mut per_spec = Vec::new();
    let mut total = 0usize;
    for spec in stores.behaviors.specs().filter(|s| s.has_effects()) {
        let domains: Vec<Vec<Symbol>> = spec.params.iter().map(|p| candidates(p.kind)).collect();
        let count = domains
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
            .unwrap_or(usize::MAX);
        total = total.saturating_add(count);
        if total > MAX_GROUNDED_ACTIONS {
            return Err(PlanError::GroundingExplosion(total));
        }
        per_spec.push((spec, domains));
    }
    let mut actions = Vec::with_capacity(total);
    for (spec, domains) in per_spec {
        let cost = stores.assessments.estimate_cost(&spec.name).duration;
        if domains.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; domains.len()];
        'combos: loop {
            let args: Vec<Symbol> = idx.iter().zip(&domains).map(|(&i, d)| d[i].clone()).collect();
            actions.push(GroundAction::from_spec(spec, &args, cost)?);
            let mut k = domains.len();
            loop {
                if k == 0 {
                    break 'combos;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    continue 'combos;
                }
                idx[k] = 0;
            }
        }
    }
    actions.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(actions)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
}

struct IndexedAction {
    pre: Vec<(usize, bool)>,
    add: Vec<usize>,
    del: Vec<usize>,
    cond: Vec<(Vec<(usize, bool)>, Vec<usize>)>,
    cost: f64,
}

/// Relaxed cost of the goal from `state`: delete effects and negative
/// preconditions ignored, each atom priced by its cheapest achiever and each
/// action by its dearest precondition. Infinite when the relaxation cannot
/// reach the goal.
fn h_max(state: &Bits, n_atoms: usize, actions: &[IndexedAction], goal: &[(usize, bool)]) -> f64 {
    let mut cost: Vec<f64> = (0..n_atoms)
        .map(|i| if state.get(i) { 0.0 } else { f64::INFINITY })
        .collect();
    let pre_cost = |cost: &[f64], ls: &[(usize, bool)]| {
        ls.iter()
            .filter(|(_, p)| *p)
            .map(|(i, _)| cost[*i])
            .fold(0.0, f64::max)
    };
    loop {
        let mut changed = false;
        for a in actions {
            let base = pre_cost(&cost, &a.pre);
            if base.is_infinite() {
                continue;
            }
            let c = base + a.cost;
            for &x in &a.add {
                if c < cost[x] {
                    cost[x] = c;
                    changed = true;
                }
            }
            for (w, ad) in &a.cond {
                let cw = c.max(pre_cost(&cost, w) + a.cost);
                for &x in ad {
                    if cw < cost[x] {
                        cost[x] = cw;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut h: f64 = 0.0;
    for &(i, positive) in goal {
        if state.get(i) == positive {
            continue;
        }
        let c = if positive {
            cost[i]
        } else {
            actions
                .iter()
                .filter(|a| a.del.contains(&i))
                .map(|a| pre_cost(&cost, &a.pre) + a.cost)
                .fold(f64::INFINITY, f64::min)
        };
        h = h.max(c);
    }
    h
}

struct Node {
    f: f64,
    g: f64,
    path: Vec<u32>,
    state: Bits,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.path.cmp(&self.path))
    }
}

/// Cost-optimal search over pre-grounded actions (sorted by name).
/// Returns indices into `actions` and the total cost.
pub fn search(
    actions: &[GroundAction],
    initial: &State,
    goal: &Conjunction,
) -> Result<(Vec<usize>, f64), PlanError> {
    let hard = relaxed_unreachable(actions, initial, goal);
    if !hard.is_empty() {
        return Err(PlanError::Unsolvable(hard));
    }
    let mut index: BTreeMap<Atom, usize> = BTreeMap::new();
    let mut intern = |a: &Atom| {
        let n = index.len();
        *index.entry(a.clone()).or_insert(n)
    };
    for a in initial.iter().chain(goal.atoms()) {
        intern(a);
    }
    let lits = |ls: &[Literal], intern: &mut dyn FnMut(&Atom) -> usize| {
        ls.iter().map(|l| (intern(&l.atom), l.positive)).collect::<Vec<_>>()
    };
    let mut indexed = Vec::with_capacity(actions.len());
    for a in actions {
        indexed.push(IndexedAction {
            pre: lits(&a.pre, &mut intern),
            add: a.add.iter().map(&mut intern).collect(),
            del: a.del.iter().map(&mut intern).collect(),
            cond: a
                .cond
                .iter()
                .map(|(w, ad)| (lits(w, &mut intern), ad.iter().map(&mut intern).collect()))
                .collect(),
            cost: a.cost,
        });
    }
    let n_atoms = index.len();
    let words = n_atoms.div_ceil(64).max(1);
    let mut start = Bits(vec![0; words]);
    for a in initial {
        start.set(index[a], true);
    }
    let goal_lits: Vec<(usize, bool)> = goal.literals().map(|l| (index[&l.atom], l.positive)).collect();
    let goal_atoms: BTreeSet<usize> = goal_lits.iter().map(|g| g.0).collect();

    let touches = |a: &IndexedAction| {
        let mut s: BTreeSet<usize> = a.add.iter().chain(&a.del).copied().collect();
        for (_, ad) in &a.cond {
            s.extend(ad.iter().copied());
        }
        s.intersection(&goal_atoms).count()
    };
    let max_touch = indexed.iter().map(touches).max().unwrap_or(0);
    let min_cost = indexed.iter().map(|a| a.cost).fold(f64::INFINITY, f64::min);
    let unsat = |s: &Bits| goal_lits.iter().filter(|(i, p)| s.get(*i) != *p).count();
    let h = |s: &Bits| -> f64 {
        let u = unsat(s);
        if u == 0 || max_touch == 0 {
            0.0
        } else {
            let counted = (u.div_ceil(max_touch)) as f64 * min_cost;
            counted.max(h_max(s, n_atoms, &indexed, &goal_lits))
        }
    };
    let holds = |s: &Bits, ls: &[(usize, bool)]| ls.iter().all(|(i, p)| s.get(*i) == *p);

    let mut heap = BinaryHeap::new();
    let mut closed: HashMap<Bits, ()> = HashMap::new();
    heap.push(Node {
        f: h(&start),
        g: 0.0,
        path: vec![],
        state: start,
    });
    while let Some(node) = heap.pop() {
        if closed.contains_key(&node.state) {
            continue;
        }
        if unsat(&node.state) == 0 {
            return Ok((node.path.iter().map(|&i| i as usize).collect(), node.g));
        }
        if closed.len() >= MAX_SEARCH_NODES {
            return Err(PlanError::SearchLimit(MAX_SEARCH_NODES));
        }
        for (ai, a) in indexed.iter().enumerate() {
            if !holds(&node.state, &a.pre) {
                continue;
            }
            let mut next = node.state.clone();
            for &d in &a.del {
                next.set(d, false);
            }
            for &ad in &a.add {
                next.set(ad, true);
            }
            for (w, ad) in &a.cond {
                if holds(&node.state, w) {
                    for &x in ad {
                        next.set(x, true);
                    }
                }
            }
            if closed.contains_key(&next) {
                continue;
            }
            let g = node.g + a.cost;
            let f = g + h(&next);
            if f.is_infinite() {
                continue;
            }
            let mut path = node.path.clone();
            path.push(ai as u32);
            heap.push(Node {
                f,
                g,
                path,
                state: next,
            });
        }
        closed.insert(node.state, ());
    }
    let hard = relaxed_unreachable(actions, initial, goal);
    if hard.is_empty() {
        Err(PlanError::Unsolvable(goal.unsatisfied(initial).cloned().collect()))
    } else {
        Err(PlanError::Unsolvable(hard))
    }
}

/// Actions that can still fire at some point: those whose negative
/// preconditions do not name an atom that is true now and can never be
/// deleted.
fn live_actions<'a>(actions: &'a [GroundAction], initial: &State) -> Vec<&'a GroundAction> {
    let mut live: Vec<&GroundAction> = actions.iter().collect();
    loop {
        let deletable: BTreeSet<&Atom> = live.iter().flat_map(|a| &a.del).collect();
        let before = live.len();
        live.retain(|a| {
            a.pre
                .iter()
                .all(|l| l.positive || !initial.contains(&l.atom) || deletable.contains(&l.atom))
        });
        if live.len() == before {
            return live;
        }
    }
}

/// Goal literals that fail even with delete effects ignored.
fn relaxed_unreachable(actions: &[GroundAction], initial: &State, goal: &Conjunction) -> Vec<Literal> {
    let live = live_actions(actions, initial);
    let mut reach = initial.clone();
    loop {
        let before = reach.len();
        for a in &live {
            if a.pre.iter().filter(|l| l.positive).all(|l| reach.contains(&l.atom)) {
                reach.extend(a.add.iter().cloned());
                for (when, add) in &a.cond {
                    if when.iter().filter(|l| l.positive).all(|l| reach.contains(&l.atom)) {
                        reach.extend(add.iter().cloned());
                    }
                }
            }
        }
        if reach.len() == before {
            break;
        }
    }
    let deletable: BTreeSet<&Atom> = live.iter().flat_map(|a| &a.del).collect();
    goal.literals()
        .filter(|l| {
            if l.positive {
                !reach.contains(&l.atom)
            } else {
                initial.contains(&l.atom) && !deletable.contains(&l.atom)
            }
        })
        .cloned()
        .collect()
}

fn plan_steps(
    stores: &Stores,
    state: &State,
    goal: &Conjunction,
) -> Result<(Vec<GroundAction>, f64), PlanError> {
    if entails(state, goal) {
        return Ok((vec![], 0.0));
    }
    let universe = grounding_universe(stores, state, goal);
    let actions = ground_actions(stores, &universe)?;
    let (idx, cost) = search(&actions, state, goal)?;
    Ok((idx.into_iter().map(|i| actions[i].clone()).collect(), cost))
}

/// Plans for `goal`; atoms the chosen steps could additionally produce
/// through conditional effects are then pursued as soft goals, keeping the
/// first plan if they cannot be met.
pub fn make_plan(
    goal_id: u64,
    goal: &Conjunction,
    state: &State,
    stores: &Stores,
    t: f64,
) -> Result<Plan, PlanError> {
    let (mut steps, _) = plan_steps(stores, state, goal)?;
    let soft: Vec<Literal> = steps
        .iter()
        .flat_map(|a| a.cond.iter().flat_map(|(_, add)| add.iter().cloned()))
        .filter(|a| !goal.literals().any(|l| &l.atom == a))
        .map(Atom::pos)
        .collect();
    if !soft.is_empty() {
        if let Ok(extended) = goal.with(soft) {
            if let Ok((better, _)) = plan_steps(stores, state, &extended) {
                steps = better;
            }
        }
    }
    Ok(Plan {
        goal_id,
        steps: steps.into_iter().map(|a| PlanStep::new(a.invocation)).collect(),
        created_at: t,
        provenance: PlanProvenance::Planned,
    })
}

/// Fresh plan from the current beliefs after step `failed_index` failed.
pub fn repair_plan(
    plan: &Plan,
    failed_index: usize,
    goal: &Conjunction,
    state: &State,
    stores: &Stores,
    t: f64,
) -> Result<Plan, PlanError> {
    debug_assert!(failed_index <= plan.steps.len());
    make_plan(plan.goal_id, goal, state, stores, t)
}

pub fn ground_step(behaviors: &BehaviorStore, step: &Atom) -> Result<GroundAction, PlanError> {
    let spec = behaviors
        .spec(&step.predicate)
        .map_err(|_| PlanError::UnknownBehavior(step.predicate.clone()))?;
    if spec.params.len() != step.args.len() {
        return Err(SymbolicError::Arity {
            predicate: step.predicate.clone(),
            expected: spec.params.len(),
            found: step.args.len(),
        }
        .into());
    }
    Ok(GroundAction::from_spec(spec, &step.args, 0.0)?)
}

/// Simulates add/delete effects of `steps` from `state`; reports the first
/// unmet precondition, or the first unmet goal literal at `steps.len()`.
pub fn validate_plan(
    steps: &[PlanStep],
    state: &State,
    goal: &Conjunction,
    behaviors: &BehaviorStore,
) -> Result<Verdict, PlanError> {
    let mut s = state.clone();
    for (i, step) in steps.iter().enumerate() {
        let action = ground_step(behaviors, &step.invocation)?;
        if let Some(l) = action.pre.iter().find(|l| !l.holds_in(&s)) {
            return Ok(Verdict::Violation {
                step: i,
                literal: l.clone(),
            });
        }
        s = action.apply(&s);
    }
    let missing = goal.unsatisfied(&s).next().cloned();
    Ok(match missing {
        Some(literal) => Verdict::Violation {
            step: steps.len(),
            literal,
        },
        None => Verdict::Ok,
    })
}

/// Recursively expands a grounded invocation into primitive invocations.
pub fn expand_composite(behaviors: &BehaviorStore, invocation: &Atom) -> Result<Vec<Atom>, PlanError> {
    fn go(b: &BehaviorStore, inv: &Atom, depth: usize, out: &mut Vec<Atom>) -> Result<(), PlanError> {
        if depth > MAX_EXPANSION_DEPTH {
            return Err(PlanError::DepthExceeded);
        }
        let spec = b
            .spec(&inv.predicate)
            .map_err(|_| PlanError::UnknownBehavior(inv.predicate.clone()))?;
        let children = spec.implementation.children();
        if !spec.is_composite() {
            out.push(inv.clone());
            return Ok(());
        }
        let s = substitution_for(spec, &inv.args);
        for c in children {
            go(b, &ground(c, &s)?, depth + 1, out)?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(behaviors, invocation, 0, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub invocation: Atom,
    pub status: StepStatus,
    pub expected_duration: f64,
    pub expected_energy: f64,
    pub success_rate: f64,
    pub no_history: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub goal_id: u64,
    pub steps: Vec<StepReport>,
    pub total_cost: f64,
    pub provenance: PlanProvenance,
    pub created_at: f64,
}

pub fn plan_report(plan: &Plan, stores: &Stores) -> PlanReport {
    let steps: Vec<StepReport> = plan
        .steps
        .iter()
        .map(|s| {
            let c = stores.assessments.estimate_cost(s.behavior());
            StepReport {
                invocation: s.invocation.clone(),
                status: s.status,
                expected_duration: c.duration,
                expected_energy: c.energy,
                success_rate: c.success_rate,
                no_history: c.no_history,
            }
        })
        .collect();
    PlanReport {
        goal_id: plan.goal_id,
        total_cost: steps.iter().map(|s| s.expected_duration).sum(),
        steps,
        provenance: plan.provenance,
        created_at: plan.created_at,
    }
}
