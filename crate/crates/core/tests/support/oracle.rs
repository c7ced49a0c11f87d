//! Random planning domains (at most 8 atoms, at most 6 behaviors) and an
//! exhaustive shortest-path oracle over their 256 states.
#![allow(dead_code)]


use std::collections::{BinaryHeap, HashMap};

use benthic::planner::{make_plan, validate_plan, PlanError};
use benthic::stores::{
    AssessmentRecord, BehaviorSpec, CommandTemplate, Implementation, Origin, Outcome, Param, Stores,
    TerminationCond,
};
use benthic::symbolic::{sym, Atom, Conjunction, Literal, ParamAtom, ParamLiteral, State};
use benthic::values::{ConcreteValue, ValueKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NULLARY: usize = 6;
const CONSTS: [&str; 2] = ["a", "b"];

/// Atom slots: p0..p5, then q(a), q(b).
fn atom_of(slot: usize) -> Atom {
    if slot < NULLARY {
        format!("p{slot}()").parse().unwrap()
    } else {
        format!("q({})", CONSTS[slot - NULLARY]).parse().unwrap()
    }
}

#[derive(Debug, Clone)]
pub struct RawBehavior {
    pub name: String,
    pub has_param: bool,
    // (slot or param marker, polarity); slot usize::MAX means q(?x)
    pub pre: Vec<(usize, bool)>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub cost: u32,
}

const PARAM_SLOT: usize = usize::MAX;

pub fn random_domain(rng: &mut ChaCha8Rng) -> (Vec<RawBehavior>, u8, Vec<(usize, bool)>) {
    let n = rng.gen_range(1..=6);
    let mut behaviors = Vec::new();
    for i in 0..n {
        let has_param = rng.gen_bool(0.35);
        let pick = |rng: &mut ChaCha8Rng| {
            if has_param && rng.gen_bool(0.3) {
                PARAM_SLOT
            } else {
                rng.gen_range(0..NULLARY + 2)
            }
        };
        let mut pre = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let s = pick(rng);
            if !pre.iter().any(|(x, _)| *x == s) {
                pre.push((s, rng.gen_bool(0.75)));
            }
        }
        let mut add = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let s = pick(rng);
            if !add.contains(&s) {
                add.push(s);
            }
        }
        let mut del = Vec::new();
        for _ in 0..rng.gen_range(0..=1) {
            let s = pick(rng);
            if !add.contains(&s) && !del.contains(&s) {
                del.push(s);
            }
        }
        if has_param && !pre.iter().any(|p| p.0 == PARAM_SLOT) && !add.contains(&PARAM_SLOT) && !del.contains(&PARAM_SLOT) {
            add.push(PARAM_SLOT);
        }
        behaviors.push(RawBehavior {
            name: format!("b{i}"),
            has_param,
            pre,
            add,
            del,
            cost: rng.gen_range(1..=9),
        });
    }
    let init: u8 = rng.gen();
    let mut goal = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let s = rng.gen_range(0..NULLARY + 2);
        if !goal.iter().any(|(x, _)| *x == s) {
            goal.push((s, rng.gen_bool(0.8)));
        }
    }
    (behaviors, init, goal)
}

fn slot_template(slot: usize) -> ParamAtom {
    if slot == PARAM_SLOT {
        "q(?x)".parse().unwrap()
    } else {
        ParamAtom::from(&atom_of(slot))
    }
}

fn to_stores(behaviors: &[RawBehavior]) -> Stores {
    let mut stores = Stores::new();
    for c in CONSTS {
        stores.numerics.bind(sym(c), ConcreteValue::Label(c.into()), 0.0).unwrap();
    }
    for b in behaviors {
        let spec = BehaviorSpec {
            name: sym(&b.name),
            params: if b.has_param { vec![Param::new("x", ValueKind::Any)] } else { vec![] },
            preconditions: b
                .pre
                .iter()
                .map(|&(s, pos)| ParamLiteral { atom: slot_template(s), positive: pos })
                .collect(),
            add: b.add.iter().map(|&s| slot_template(s)).collect(),
            delete: b.del.iter().map(|&s| slot_template(s)).collect(),
            conditional: vec![],
            termination: TerminationCond::Immediate,
            implementation: Implementation::Primitive { command: CommandTemplate::Wait },
            origin: Origin::Builtin,
        };
        stores.behaviors.register(spec).unwrap();
        stores.assessments.record_outcome(AssessmentRecord {
            behavior: sym(&b.name),
            outcome: Outcome::Success,
            duration: b.cost as f64,
            energy: 1.0,
            timestamp: 0.0,
        });
    }
    stores
}

/// Oracle ground actions as bitmask operations over the 8 atom slots.
fn oracle_actions(behaviors: &[RawBehavior]) -> Vec<(u8, u8, u8, u8, u32)> {
    let mut out = Vec::new();
    for b in behaviors {
        let bindings: Vec<Option<usize>> = if b.has_param { vec![Some(0), Some(1)] } else { vec![None] };
        for x in bindings {
            let resolve = |s: usize| if s == PARAM_SLOT { NULLARY + x.unwrap() } else { s };
            let (mut pre_pos, mut pre_neg, mut add, mut del) = (0u8, 0u8, 0u8, 0u8);
            let mut contradictory = false;
            for &(s, pos) in &b.pre {
                let bit = 1u8 << resolve(s);
                if pos {
                    pre_pos |= bit;
                } else {
                    pre_neg |= bit;
                }
            }
            if pre_pos & pre_neg != 0 {
                contradictory = true;
            }
            for &s in &b.add {
                add |= 1 << resolve(s);
            }
            for &s in &b.del {
                del |= 1 << resolve(s);
            }
            if !contradictory {
                out.push((pre_pos, pre_neg, add, del, b.cost));
            }
        }
    }
    out
}

/// Exhaustive Dijkstra over all 256 states.
pub fn oracle_cost(behaviors: &[RawBehavior], init: u8, goal: &[(usize, bool)]) -> Option<u32> {
    let actions = oracle_actions(behaviors);
    let is_goal = |s: u8| goal.iter().all(|&(slot, pos)| (s >> slot & 1 == 1) == pos);
    let mut dist: HashMap<u8, u32> = HashMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(std::cmp::Reverse((0u32, init)));
    while let Some(std::cmp::Reverse((d, s))) = heap.pop() {
        if dist.contains_key(&s) {
            continue;
        }
        dist.insert(s, d);
        if is_goal(s) {
            return Some(d);
        }
        for &(pp, pn, add, del, c) in &actions {
            if s & pp == pp && s & pn == 0 {
                let next = (s & !del) | add;
                if !dist.contains_key(&next) {
                    heap.push(std::cmp::Reverse((d + c, next)));
                }
            }
        }
    }
    None
}

pub fn check_seed(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (behaviors, init, goal_raw) = random_domain(&mut rng);
    let stores = to_stores(&behaviors);
    let state: State = (0..8).filter(|i| init >> i & 1 == 1).map(atom_of).collect();
    let goal = Conjunction::new(goal_raw.iter().map(|&(s, pos)| Literal::new(atom_of(s), pos))).unwrap();
    let expected = oracle_cost(&behaviors, init, &goal_raw);
    let first = make_plan(0, &goal, &state, &stores, 0.0);
    let second = make_plan(0, &goal, &state, &stores, 0.0);
    if first != second {
        return Err(format!("seed {seed}: nondeterministic plan"));
    }
    match (first, expected) {
        (Ok(plan), Some(cost)) => {
            let got: f64 = plan
                .steps
                .iter()
                .map(|s| stores.assessments.estimate_cost(s.behavior()).duration)
                .sum();
            if (got - cost as f64).abs() > 1e-9 {
                return Err(format!("seed {seed}: planner cost {got}, oracle {cost}, plan {:?}", plan.steps));
            }
            let verdict = validate_plan(&plan.steps, &state, &goal, &stores.behaviors).unwrap();
            if !verdict.is_ok() {
                return Err(format!("seed {seed}: invalid plan {verdict:?}"));
            }
            Ok(())
        }
        (Err(PlanError::Unsolvable(_)), None) => Ok(()),
        (got, want) => Err(format!("seed {seed}: planner {got:?}, oracle {want:?}")),
    }
}

pub fn run_oracle_suite(seeds: std::ops::Range<u64>) -> Vec<String> {
    seeds.filter_map(|s| check_seed(s).err()).collect()
}

