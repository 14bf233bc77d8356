//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use des_attack::attack::{AttackSpec, FeasibilityMode};
use des_attack::fsm::{Fsm, Label, StateId};
use des_attack::transducer::{build_delta_n, AlterationRelation};
use des_attack::{Alphabet, Automaton, Event, OutputString, PairEvent, Supervisor, Symbol, Transducer};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub events: usize,
    pub plant_states: usize,
    pub supervisor_states: usize,
    pub attack_states: usize,
    /// Probability that a given (state, label) slot carries a transition.
    pub density: f64,
}

pub const COMPOSITION: Shape = Shape {
    events: 4,
    plant_states: 6,
    supervisor_states: 3,
    attack_states: 3,
    density: 0.35,
};

pub const TINY: Shape = Shape {
    events: 3,
    plant_states: 4,
    supervisor_states: 3,
    attack_states: 2,
    density: 0.45,
};

/// Events `a`, `b`, ... with random attributes. At least one event is
/// observable and at least one uncontrollable event is observable, so attacks
/// have something to alter.
pub fn alphabet(r: &mut Rng8, max_events: usize) -> Alphabet {
    let k = r.gen_range(2..=max_events.max(2));
    let events = (0..k).map(|i| {
        let name = ((b'a' + i as u8) as char).to_string();
        let observable = i == 0 || r.gen_bool(0.75);
        let controllable = i != 0 && r.gen_bool(0.5);
        Event::new(&name, controllable, observable)
    });
    Alphabet::new(events).unwrap()
}

fn random_fsm<L: Label>(
    r: &mut Rng8,
    states: usize,
    labels: &[L],
    density: f64,
    p_marked: f64,
) -> Fsm<L> {
    let mut f = Fsm::empty();
    for s in 0..states {
        f.add_state(s.to_string(), r.gen_bool(p_marked));
    }
    f.set_initial(0).unwrap();
    for s in 0..states {
        for l in labels {
            if r.gen_bool(density) {
                let t = r.gen_range(0..states);
                f.add_transition(s, l.clone(), t).unwrap();
            }
        }
    }
    f
}

/// Random plant with at most `max_states` states. Some marked states are
/// bad markers.
pub fn plant(r: &mut Rng8, ab: &Alphabet, max_states: usize, density: f64) -> Automaton {
    let n = r.gen_range(2..=max_states.max(2));
    let labels: Vec<Symbol> = ab.symbols().cloned().collect();
    let mut f = random_fsm(r, n, &labels, density, 0.5);
    for s in 0..n {
        if f.is_marked(s) && r.gen_bool(0.4) {
            f.set_bad(s, true);
        }
    }
    Automaton::from_fsm(ab.clone(), f).unwrap()
}

/// Random supervisor over the observable events, with unobservable events
/// self-looped everywhere; all states marked.
pub fn supervisor(r: &mut Rng8, ab: &Alphabet, max_states: usize, density: f64) -> Supervisor {
    let n = r.gen_range(1..=max_states.max(1));
    let obs = ab.observable_in_order();
    // Denser than the plant so the closed loop is not trivially blocked.
    let mut f = random_fsm(r, n, &obs, (density * 1.8).min(0.95), 1.0);
    for s in 0..n {
        for e in ab.unobservable() {
            f.add_transition(s, e, s).unwrap();
        }
    }
    Supervisor::new(Automaton::from_fsm(ab.clone(), f).unwrap())
}

/// Every pair label an `n`-bounded attack may use: `(σ, u)` with `u ∈ Δn`
/// for observable `σ` and `(σ, ε)` otherwise.
pub fn pair_labels(ab: &Alphabet, n: usize) -> Vec<PairEvent> {
    let obs = ab.observable_in_order();
    let delta = build_delta_n(&obs, n).unwrap();
    let mut out = Vec::new();
    for e in ab.events() {
        if e.observable {
            out.extend(delta.iter().map(|u| PairEvent::new(e.name.clone(), u.clone())));
        } else {
            out.push(PairEvent::silent(&e.name));
        }
    }
    out
}

/// Most transitions leaving one attack state; keeps string enumeration of
/// compositions and unions tractable at length 10.
pub const ATTACK_OUT_DEGREE: usize = 2;

/// Random transducer with `1..=max_states` states, deterministic over pair
/// labels, with out-degree at most [`ATTACK_OUT_DEGREE`].
pub fn attack(r: &mut Rng8, ab: &Alphabet, max_states: usize, density: f64) -> Transducer {
    let n = r.gen_range(1..=max_states.max(1));
    let labels = pair_labels(ab, 1);
    let mut f = Fsm::empty();
    for s in 0..n {
        f.add_state(s.to_string(), r.gen_bool(0.6));
    }
    f.set_initial(0).unwrap();
    for s in 0..n {
        let k = (0..ATTACK_OUT_DEGREE).filter(|_| r.gen_bool(density.max(0.5))).count();
        for p in labels.choose_multiple(r, k) {
            let t = r.gen_range(0..n);
            f.add_transition(s, p.clone(), t).unwrap();
        }
    }
    Transducer::new(ab.clone(), 1, f).unwrap()
}

/// Random sub-transducer: each transition survives with probability `keep`.
pub fn sub_attack(r: &mut Rng8, t: &Transducer, keep: f64) -> Transducer {
    let drop: BTreeSet<(StateId, PairEvent)> = t
        .fsm()
        .edges()
        .filter(|_| !r.gen_bool(keep))
        .map(|(s, p, _)| (s, p.clone()))
        .collect();
    t.sub_transducer(|s, p, _| !drop.contains(&(s, p.clone())))
}

/// Random alteration relation over Δ1 for the observable events.
pub fn relation(r: &mut Rng8, ab: &Alphabet) -> AlterationRelation {
    let obs = ab.observable_in_order();
    let delta = build_delta_n(&obs, 1).unwrap();
    let mut rel = AlterationRelation::identity();
    for e in &obs {
        for u in &delta {
            if *u == OutputString::single(e.clone()) || r.gen_bool(0.5) {
                rel.allow(e.clone(), u.clone());
            }
        }
    }
    rel
}

pub fn spec(r: &mut Rng8, ab: &Alphabet) -> AttackSpec {
    let rel = if r.gen_bool(0.5) {
        AlterationRelation::full(ab, 1).unwrap()
    } else {
        relation(r, ab)
    };
    AttackSpec::new(1, BTreeSet::new(), rel).with_mode(FeasibilityMode::ActuatorPreserving)
}

/// Random requirement over the full alphabet, all transitions kept with the
/// given density.
pub fn requirement(r: &mut Rng8, ab: &Alphabet, max_states: usize, density: f64) -> Automaton {
    let n = r.gen_range(1..=max_states.max(1));
    let labels: Vec<Symbol> = ab.symbols().cloned().collect();
    let f = random_fsm(r, n, &labels, density, 0.6);
    Automaton::from_fsm(ab.clone(), f).unwrap()
}

pub fn choose<'a, T>(r: &mut Rng8, items: &'a [T]) -> Option<&'a T> {
    items.choose(r)
}

// ---------------------------------------------------------------------------
// Enumeration oracles. These only use single steps of the machines, never
// the library's products, projections or determinizations.

/// Words of the closed language up to `max_len`, with their marking.
pub fn words<L: Label>(f: &Fsm<L>, max_len: usize) -> Vec<(Vec<L>, bool)> {
    let mut out = Vec::new();
    let Some(init) = f.initial() else {
        return out;
    };
    let mut queue = VecDeque::from([(Vec::new(), init)]);
    while let Some((w, s)) = queue.pop_front() {
        if w.len() < max_len {
            for (l, &t) in f.transitions(s) {
                let mut next = w.clone();
                next.push(l.clone());
                queue.push_back((next, t));
            }
        }
        out.push((w, f.is_marked(s)));
    }
    out
}

pub fn closed<L: Label>(f: &Fsm<L>, max_len: usize) -> BTreeSet<Vec<L>> {
    words(f, max_len).into_iter().map(|(w, _)| w).collect()
}

pub fn marked<L: Label>(f: &Fsm<L>, max_len: usize) -> BTreeSet<Vec<L>> {
    words(f, max_len).into_iter().filter(|(_, m)| *m).map(|(w, _)| w).collect()
}

/// Where a pair string leaves `A∘S`: `Some(Some(z))` while the supervisor
/// follows, `Some(None)` once the string has entered the dump.
fn compose_step(
    ab: &Alphabet,
    s: &Fsm<Symbol>,
    z: Option<StateId>,
    p: &PairEvent,
) -> Option<Option<StateId>> {
    let z = z?;
    if ab.is_observable(&p.input) {
        let mut at = z;
        for e in p.output.events() {
            match s.step(at, e) {
                Some(t) => at = t,
                None => return Some(None),
            }
        }
        Some(Some(at))
    } else {
        s.step(z, &p.input).map(Some)
    }
}

/// Whether `w` is in `L(A∘S)` (`.0`) and `L_m(A∘S)` (`.1`), by running `A`
/// and `S` side by side on the string itself.
pub fn in_composition(a: &Transducer, s: &Supervisor, w: &[PairEvent]) -> (bool, bool) {
    let (Some(y0), Some(z0)) = (a.fsm().initial(), s.fsm().initial()) else {
        return (false, false);
    };
    let mut y = y0;
    let mut z = Some(z0);
    for p in w {
        let Some(ty) = a.fsm().step(y, p) else {
            return (false, false);
        };
        if z.is_none() {
            return (false, false);
        }
        let Some(tz) = compose_step(a.alphabet(), s.fsm(), z, p) else {
            return (false, false);
        };
        y = ty;
        z = tz;
    }
    let m = a.fsm().is_marked(y) && z.is_some_and(|z| s.fsm().is_marked(z));
    (true, m)
}

/// Closed and marked languages of `A∘S` up to `max_len`: strings of `A`
/// filtered through [`in_composition`].
pub fn composition_languages(
    a: &Transducer,
    s: &Supervisor,
    max_len: usize,
) -> (BTreeSet<Vec<PairEvent>>, BTreeSet<Vec<PairEvent>>) {
    let mut closed = BTreeSet::new();
    let mut marked = BTreeSet::new();
    for (w, _) in words(a.fsm(), max_len) {
        let (c, m) = in_composition(a, s, &w);
        if c {
            if m {
                marked.insert(w.clone());
            }
            closed.insert(w);
        }
    }
    (closed, marked)
}

pub fn psi(w: &[PairEvent]) -> Vec<Symbol> {
    w.iter().map(|p| p.input.clone()).collect()
}

pub fn theta(w: &[PairEvent]) -> Vec<Symbol> {
    w.iter().flat_map(|p| p.output.events().iter().cloned()).collect()
}

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

pub fn syms(names: &[&str]) -> BTreeSet<Symbol> {
    names.iter().map(|n| sym(n)).collect()
}
