//! Controllability, normality and the supremal controllable and normal
//! sublanguage, over any label type.
//!
//! The fixed point works on a refined product `F = (G × E⊥) × Obs(G × E⊥)`,
//! where `E⊥` is the requirement completed with a sink and `Obs` is the
//! observer of the first factor under the natural projection. Every state of
//! `F` carries its observation class (the observer component). Deleting whole
//! states of `F` is then exact for both conditions:
//!
//! * controllability: a live state with an uncontrollable move into a dead
//!   state is dead;
//! * normality of the closure: a class holding both live and dead states
//!   kills every live state in it.
//!
//! The candidate only shrinks, so the loop stops after at most `|F|` passes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::alphabet::Symbol;
use crate::automaton::Automaton;
use crate::error::{Error, Result};
use crate::fsm::{Fsm, Label, StateId};
use crate::transducer::{PairEvent, Transducer};

/// Generator plus the uncontrollable and observable label sets.
#[derive(Debug, Clone)]
pub struct SynthesisContext<L> {
    pub generator: Fsm<L>,
    pub uncontrollable: BTreeSet<L>,
    pub observable: BTreeSet<L>,
}

impl<L: Label> SynthesisContext<L> {
    pub fn new(generator: Fsm<L>, uncontrollable: BTreeSet<L>, observable: BTreeSet<L>) -> Self {
        SynthesisContext {
            generator,
            uncontrollable,
            observable,
        }
    }

    fn is_observable(&self, l: &L) -> bool {
        self.observable.contains(l)
    }
}

impl SynthesisContext<Symbol> {
    /// Plant setting: the plant's own controllability and observability.
    pub fn for_plant(plant: &Automaton) -> Self {
        SynthesisContext::new(
            plant.fsm().clone(),
            plant.alphabet().uncontrollable(),
            plant.alphabet().observable(),
        )
    }
}

impl SynthesisContext<PairEvent> {
    /// Attack setting: every pair is controllable by the attacker and a pair
    /// is observable exactly when its input event is.
    pub fn for_attack(generator: &Transducer) -> Self {
        let observable = generator
            .fsm()
            .labels()
            .into_iter()
            .filter(|p| generator.alphabet().is_observable(&p.input))
            .collect();
        SynthesisContext::new(generator.fsm().clone(), BTreeSet::new(), observable)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationSummary {
    pub removed_controllability: usize,
    pub removed_normality: usize,
    pub removed_nonblocking: usize,
}

#[derive(Debug, Clone)]
pub struct SynthesisOutcome<L> {
    /// Trim recognizer of the result; its marked language is the supremal
    /// sublanguage and its closed language the closure.
    pub recognizer: Fsm<L>,
    /// Generator state behind every recognizer state.
    pub origin: Vec<StateId>,
    pub iterations: usize,
    pub trace: Vec<IterationSummary>,
    /// Shortest marked word of the result.
    pub witness: Option<Vec<L>>,
}

impl<L: Label> SynthesisOutcome<L> {
    pub fn is_empty(&self) -> bool {
        self.recognizer.is_empty()
    }
}

fn check_sublanguage<L: Label>(k: &Fsm<L>, ctx: &SynthesisContext<L>) -> Result<()> {
    match k.find_word_not_in(&ctx.generator) {
        None => Ok(()),
        Some(w) => Err(Error::domain(
            "candidate is not a sublanguage of the generator's marked language",
            Some(format!("{w:?}")),
        )),
    }
}

/// `K̄Λ_uc ∩ L(𝒢) ⊆ K̄`. On failure returns the shortest string of `K̄`
/// followed by the uncontrollable label that leaves it.
pub fn is_controllable<L: Label>(
    k: &Fsm<L>,
    ctx: &SynthesisContext<L>,
) -> Result<std::result::Result<(), Vec<L>>> {
    check_sublanguage(k, ctx)?;
    let closure = k.trim().prefix_close();
    let (prod, pairs) = closure.intersect(&ctx.generator);
    let leak = |s: StateId| -> Option<L> {
        let (kq, gq) = pairs[s];
        ctx.generator
            .transitions(gq)
            .keys()
            .find(|l| ctx.uncontrollable.contains(*l) && closure.step(kq, l).is_none())
            .cloned()
    };
    Ok(match prod.shortest_word_to(|s| leak(s).is_some()) {
        None => Ok(()),
        Some(mut w) => {
            let end = prod.run(&w).expect("word is in the product");
            w.push(leak(end).expect("violating state"));
            Err(w)
        }
    })
}

/// Normality of the closure: `P⁻¹(P(K̄)) ∩ L(𝒢) = K̄`. On failure returns
/// the shortest string of the left side missing from `K̄`.
pub fn is_normal<L: Label>(
    k: &Fsm<L>,
    ctx: &SynthesisContext<L>,
) -> Result<std::result::Result<(), Vec<L>>> {
    check_sublanguage(k, ctx)?;
    let closure = k.trim().prefix_close();
    let observed = closure.project(|l| ctx.is_observable(l).then(|| l.clone()))?;
    // Lift the observation back: unobservable generator labels self-loop.
    let mut lifted = observed.clone();
    if lifted.is_empty() {
        return Ok(Ok(()));
    }
    let hidden: Vec<L> = ctx
        .generator
        .labels()
        .into_iter()
        .filter(|l| !ctx.is_observable(l))
        .collect();
    for s in 0..lifted.num_states() {
        for l in &hidden {
            lifted.add_transition(s, l.clone(), s)?;
        }
    }
    let (both, _) = ctx.generator.prefix_close().intersect(&lifted);
    Ok(match both.find_word_not_in(&closure) {
        None => Ok(()),
        Some(w) => Err(w),
    })
}

/// The refined product shared by the fixed point and the test oracle.
#[derive(Debug)]
pub(crate) struct Refined<L> {
    pub fsm: Fsm<L>,
    /// Generator state of every state.
    pub plant: Vec<StateId>,
    /// Requirement state, `None` once the requirement has been left.
    pub req: Vec<Option<StateId>>,
    /// Observation class.
    pub class: Vec<StateId>,
}

pub(crate) fn refine<L: Label>(ctx: &SynthesisContext<L>, requirement: &Fsm<L>) -> Result<Option<Refined<L>>> {
    let g = &ctx.generator;
    let Some(g0) = g.initial() else {
        return Ok(None);
    };
    // M = G × E⊥, recognizing all of L(G).
    let mut m: Fsm<L> = Fsm::empty();
    let mut m_pairs: Vec<(StateId, Option<StateId>)> = Vec::new();
    let mut m_index: HashMap<(StateId, Option<StateId>), StateId> = HashMap::new();
    let mut visit_m = |p: (StateId, Option<StateId>), m: &mut Fsm<L>, pairs: &mut Vec<_>| {
        *m_index.entry(p).or_insert_with(|| {
            let marked = g.is_marked(p.0) && p.1.is_some_and(|e| requirement.is_marked(e));
            pairs.push(p);
            m.add_state(g.name(p.0).to_string(), marked)
        })
    };
    let m0 = visit_m((g0, requirement.initial()), &mut m, &mut m_pairs);
    m.set_initial(m0)?;
    let mut i = 0;
    while i < m_pairs.len() {
        let (x, e) = m_pairs[i];
        for (l, &tx) in g.transitions(x) {
            let te = e.and_then(|e| requirement.step(e, l));
            let t = visit_m((tx, te), &mut m, &mut m_pairs);
            m.add_transition(i, l.clone(), t)?;
        }
        i += 1;
    }

    let (obs, _) = m.project_with_subsets(|l| ctx.is_observable(l).then(|| l.clone()))?;
    let q0 = obs.initial().expect("observer of a nonempty machine");

    let mut fsm = Fsm::empty();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut visit = |p: (StateId, StateId), fsm: &mut Fsm<L>, pairs: &mut Vec<_>| {
        *index.entry(p).or_insert_with(|| {
            pairs.push(p);
            fsm.add_state(format!("{}#{}", m.name(p.0), p.1), m.is_marked(p.0))
        })
    };
    let f0 = visit((m0, q0), &mut fsm, &mut pairs);
    fsm.set_initial(f0)?;
    let mut i = 0;
    while i < pairs.len() {
        let (ms, q) = pairs[i];
        for (l, &tm) in m.transitions(ms) {
            let tq = if ctx.is_observable(l) {
                obs.step(q, l).expect("observer follows every observable move")
            } else {
                q
            };
            let t = visit((tm, tq), &mut fsm, &mut pairs);
            fsm.add_transition(i, l.clone(), t)?;
        }
        i += 1;
    }
    Ok(Some(Refined {
        plant: pairs.iter().map(|&(ms, _)| m_pairs[ms].0).collect(),
        req: pairs.iter().map(|&(ms, _)| m_pairs[ms].1).collect(),
        class: pairs.iter().map(|&(_, q)| q).collect(),
        fsm,
    }))
}

/// Live states reachable from the initial state through live states.
fn live_reach<L: Label>(fsm: &Fsm<L>, live: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; live.len()];
    let Some(init) = fsm.initial().filter(|&i| live[i]) else {
        return seen;
    };
    seen[init] = true;
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        for &t in fsm.transitions(s).values() {
            if live[t] && !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Live states that reach a live marked state through live states.
fn live_coreach<L: Label>(fsm: &Fsm<L>, live: &[bool]) -> Vec<bool> {
    let n = live.len();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (s, _, t) in fsm.edges() {
        if live[s] && live[t] {
            preds[t].push(s);
        }
    }
    let mut seen: Vec<bool> = (0..n).map(|s| live[s] && fsm.is_marked(s)).collect();
    let mut stack: Vec<StateId> = (0..n).filter(|&s| seen[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

/// Supremal sublanguage of `L_m(𝒢) ∩ L_m(requirement)` that is controllable
/// and whose closure is normal.
pub fn sup_cn<L: Label>(ctx: &SynthesisContext<L>, requirement: &Fsm<L>) -> Result<SynthesisOutcome<L>> {
    let empty = |iterations, trace| SynthesisOutcome {
        recognizer: Fsm::empty(),
        origin: Vec::new(),
        iterations,
        trace,
        witness: None,
    };
    let Some(f) = refine(ctx, requirement)? else {
        return Ok(empty(0, Vec::new()));
    };
    let n = f.fsm.num_states();
    let mut live: Vec<bool> = f.req.iter().map(Option::is_some).collect();
    let mut trace = Vec::new();

    // Class membership lists for the normality pass.
    let mut classes: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
    for s in 0..n {
        classes.entry(f.class[s]).or_default().push(s);
    }

    loop {
        let mut summary = IterationSummary::default();
        let reach = live_reach(&f.fsm, &live);
        let co = live_coreach(&f.fsm, &live);
        for s in 0..n {
            if live[s] && !(reach[s] && co[s]) {
                live[s] = false;
                summary.removed_nonblocking += 1;
            }
        }

        let mut kill = vec![false; n];
        for s in (0..n).filter(|&s| live[s]) {
            let leaks = f.fsm.transitions(s).iter().any(|(l, &t)| {
                ctx.uncontrollable.contains(l) && !live[t]
            });
            if leaks {
                kill[s] = true;
                summary.removed_controllability += 1;
            }
        }
        for members in classes.values() {
            let mixed = members.iter().any(|&s| !live[s]) && members.iter().any(|&s| live[s]);
            if mixed {
                for &s in members {
                    if live[s] && !kill[s] {
                        kill[s] = true;
                        summary.removed_normality += 1;
                    }
                }
            }
        }
        let changed = kill.iter().any(|&k| k);
        for s in 0..n {
            live[s] &= !kill[s];
        }
        trace.push(summary);
        if !changed {
            break;
        }
    }

    let (recognizer, kept) = f.fsm.restrict(&live);
    let origin: Vec<StateId> = kept.iter().map(|&s| f.plant[s]).collect();
    let iterations = trace.len();
    if recognizer.is_empty() {
        return Ok(empty(iterations, trace));
    }
    let witness = recognizer.shortest_marked_word();
    let outcome = SynthesisOutcome {
        recognizer,
        origin,
        iterations,
        trace,
        witness,
    };
    if cfg!(debug_assertions) {
        debug_assert!(is_controllable(&outcome.recognizer, ctx)?.is_ok());
        debug_assert!(is_normal(&outcome.recognizer, ctx)?.is_ok());
    }
    Ok(outcome)
}

/// Largest refined product `brute_force_sup_cn` will enumerate.
pub const BRUTE_FORCE_MAX_STATES: usize = 12;

/// Test oracle: enumerates every state subset of the refined product, keeps
/// the sub-automata whose marked language is controllable and whose closure
/// is normal (checked at language level), and returns their union.
pub fn brute_force_sup_cn<L: Label>(ctx: &SynthesisContext<L>, requirement: &Fsm<L>) -> Result<Fsm<L>> {
    let Some(f) = refine(ctx, requirement)? else {
        return Ok(Fsm::empty());
    };
    let candidates: Vec<StateId> = (0..f.fsm.num_states()).filter(|&s| f.req[s].is_some()).collect();
    if candidates.len() > BRUTE_FORCE_MAX_STATES {
        return Err(Error::domain(
            format!(
                "brute-force oracle limited to {} candidate states, got {}",
                BRUTE_FORCE_MAX_STATES,
                candidates.len()
            ),
            None,
        ));
    }
    let mut best: Fsm<L> = Fsm::empty();
    for mask in 1u32..(1u32 << candidates.len()) {
        let mut keep = vec![false; f.fsm.num_states()];
        for (bit, &s) in candidates.iter().enumerate() {
            keep[s] = mask & (1 << bit) != 0;
        }
        let sub = f.fsm.restrict(&keep).0.trim();
        if sub.is_empty() {
            continue;
        }
        if is_controllable(&sub, ctx)?.is_ok() && is_normal(&sub, ctx)?.is_ok() {
            best = best.union(&sub);
        }
    }
    Ok(best.trim())
}
