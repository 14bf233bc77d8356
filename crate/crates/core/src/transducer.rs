//! Finite-state transducers over input events paired with bounded observable
//! output strings.
//!
//! An attack reads every event the plant generates and forwards an
//! [`OutputString`] of at most `n` observable events to the supervisor in its
//! place. Unobservable events are forwarded as `ε`. The constructions here
//! compose attacks with supervisors ([`seq_compose`]) and with the plant
//! ([`impact`]), and read off their input and output languages.
//!
//! For protected events the only admissible output is the event itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::alphabet::{Alphabet, Symbol};
use crate::automaton::{Automaton, Supervisor};
use crate::error::{Error, Result};
use crate::fsm::{Fsm, Nfa, StateId};
use crate::limits;

/// A string of observable events forwarded in place of one input event.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OutputString(Vec<Symbol>);

impl OutputString {
    pub fn epsilon() -> Self {
        OutputString(Vec::new())
    }

    pub fn single(e: Symbol) -> Self {
        OutputString(vec![e])
    }

    pub fn new(events: Vec<Symbol>) -> Self {
        OutputString(events)
    }

    pub fn events(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `ε`, `-` or an empty string as the empty output, otherwise a
    /// comma-separated event list.
    pub fn parse(s: &str) -> OutputString {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "-" || s == "eps" {
            return OutputString::epsilon();
        }
        OutputString(s.split(',').map(|e| Symbol::new(e.trim())).collect())
    }
}

impl fmt::Display for OutputString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else {
            let parts: Vec<&str> = self.0.iter().map(Symbol::as_str).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for OutputString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Transducer label `(σ, u)`. Ordered by input name, then output contents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairEvent {
    pub input: Symbol,
    pub output: OutputString,
}

impl PairEvent {
    pub fn new(input: Symbol, output: OutputString) -> Self {
        PairEvent { input, output }
    }

    pub fn identity(e: &Symbol) -> Self {
        PairEvent::new(e.clone(), OutputString::single(e.clone()))
    }

    pub fn silent(e: &Symbol) -> Self {
        PairEvent::new(e.clone(), OutputString::epsilon())
    }
}

impl fmt::Display for PairEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.input, self.output)
    }
}

impl fmt::Debug for PairEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn format_pairs(w: &[PairEvent]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        w.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Input projection `ψ` of a pair string.
pub fn psi(w: &[PairEvent]) -> Vec<Symbol> {
    w.iter().map(|p| p.input.clone()).collect()
}

/// Output projection `θ` of a pair string.
pub fn theta(w: &[PairEvent]) -> Vec<Symbol> {
    w.iter().flat_map(|p| p.output.events().iter().cloned()).collect()
}

/// All observable strings of length at most `n`, shortest first.
pub fn build_delta_n(sigma_o: &[Symbol], n: usize) -> Result<Vec<OutputString>> {
    let cap = limits::max_delta_strings();
    let k = sigma_o.len();
    let mut projected: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..=n {
        projected = projected.saturating_add(layer);
        layer = layer.saturating_mul(k.max(1));
        if k == 0 {
            break;
        }
    }
    if projected > cap {
        return Err(Error::Capacity {
            what: "bounded output vocabulary",
            limit: cap,
            hint: "use a smaller bound n or restrict the alteration relation",
        });
    }
    let mut out = vec![OutputString::epsilon()];
    let mut frontier = vec![Vec::<Symbol>::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for prefix in &frontier {
            for e in sigma_o {
                let mut w = prefix.clone();
                w.push(e.clone());
                next.push(w);
            }
        }
        out.extend(next.iter().cloned().map(OutputString));
        frontier = next;
    }
    Ok(out)
}

/// Which replacement strings an attack may use for each observable event.
///
/// Events without an entry may only be forwarded unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlterationRelation {
    entries: BTreeMap<Symbol, BTreeSet<OutputString>>,
}

impl AlterationRelation {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Every observable event may be replaced by any string of `Δn`.
    pub fn full(alphabet: &Alphabet, n: usize) -> Result<Self> {
        let sigma_o = alphabet.observable_in_order();
        let delta = build_delta_n(&sigma_o, n)?;
        let mut rel = Self::default();
        for e in &sigma_o {
            rel.entries.insert(e.clone(), delta.iter().cloned().collect());
        }
        Ok(rel)
    }

    /// Each event of `from` may be reported as any single event of `to`
    /// (including itself when listed).
    pub fn substitutions(from: &[Symbol], to: &[Symbol]) -> Self {
        let mut rel = Self::default();
        for e in from {
            let set = rel.entries.entry(e.clone()).or_default();
            set.insert(OutputString::single(e.clone()));
            set.extend(to.iter().cloned().map(OutputString::single));
        }
        rel
    }

    pub fn allow(&mut self, event: Symbol, output: OutputString) {
        self.entries.entry(event).or_default().insert(output);
    }

    /// Outputs available for `event`; the identity when nothing is declared.
    pub fn outputs(&self, event: &Symbol) -> BTreeSet<OutputString> {
        self.entries
            .get(event)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([OutputString::single(event.clone())]))
    }

    pub fn entries(&self) -> &BTreeMap<Symbol, BTreeSet<OutputString>> {
        &self.entries
    }

    /// Relation seen by an attack when `protected` events are locked to
    /// their identity output.
    pub fn restricted_to_unprotected(&self, protected: &BTreeSet<Symbol>) -> Self {
        AlterationRelation {
            entries: self
                .entries
                .iter()
                .filter(|(e, _)| !protected.contains(*e))
                .map(|(e, s)| (e.clone(), s.clone()))
                .collect(),
        }
    }
}

/// Provenance of a transducer state built by composition. Plain attack
/// states leave every field empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Composite {
    pub plant: Option<StateId>,
    pub attack: Option<StateId>,
    pub supervisor: Option<StateId>,
    /// The supervisor component is the dump state `d`.
    pub dump: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Transducer {
    alphabet: Alphabet,
    bound: usize,
    fsm: Fsm<PairEvent>,
    tags: Vec<Composite>,
}

impl fmt::Debug for Transducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transducer(n={}) {:?}", self.bound, self.fsm)
    }
}

impl Transducer {
    pub fn empty(alphabet: Alphabet, bound: usize) -> Self {
        Transducer {
            alphabet,
            bound,
            fsm: Fsm::empty(),
            tags: Vec::new(),
        }
    }

    /// Wraps a pair machine after checking the output bound, that outputs
    /// consist of observable events and that unobservable inputs only
    /// produce `ε`.
    pub fn new(alphabet: Alphabet, bound: usize, fsm: Fsm<PairEvent>) -> Result<Self> {
        let tags = vec![Composite::default(); fsm.num_states()];
        Self::with_tags(alphabet, bound, fsm, tags)
    }

    pub fn with_tags(
        alphabet: Alphabet,
        bound: usize,
        fsm: Fsm<PairEvent>,
        tags: Vec<Composite>,
    ) -> Result<Self> {
        assert_eq!(tags.len(), fsm.num_states());
        for (_, p, _) in fsm.edges() {
            let input = alphabet
                .get(&p.input)
                .ok_or_else(|| Error::UnknownEvent(p.input.to_string()))?;
            if p.output.len() > bound {
                return Err(Error::Validation(format!(
                    "output `{}` of {} is longer than the bound {}",
                    p.output, p, bound
                )));
            }
            if !input.observable && !p.output.is_empty() {
                return Err(Error::Validation(format!(
                    "unobservable input in {p} must produce ε"
                )));
            }
            for e in p.output.events() {
                if !alphabet.is_observable(e) {
                    return Err(Error::Validation(format!(
                        "output event `{e}` in {p} is not observable"
                    )));
                }
            }
        }
        Ok(Transducer {
            alphabet,
            bound,
            fsm,
            tags,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn fsm(&self) -> &Fsm<PairEvent> {
        &self.fsm
    }

    pub fn tag(&self, s: StateId) -> Composite {
        self.tags[s]
    }

    pub fn tags(&self) -> &[Composite] {
        &self.tags
    }

    pub fn is_empty(&self) -> bool {
        self.fsm.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.fsm.num_states()
    }

    pub fn is_dump(&self, s: StateId) -> bool {
        self.tags[s].dump
    }

    /// Transitions into a dump state: they would reveal the attack.
    pub fn revealing_transitions(&self) -> Vec<(StateId, PairEvent, StateId)> {
        self.fsm
            .edges()
            .filter(|&(_, _, t)| self.tags[t].dump)
            .map(|(s, p, t)| (s, p.clone(), t))
            .collect()
    }

    /// Replaces the machine, carrying tags over through `origin`.
    pub fn derive(&self, fsm: Fsm<PairEvent>, origin: &[StateId]) -> Transducer {
        Transducer {
            alphabet: self.alphabet.clone(),
            bound: self.bound,
            tags: origin.iter().map(|&o| self.tags[o]).collect(),
            fsm,
        }
    }

    pub fn trim(&self) -> Transducer {
        let (fsm, origin) = self.fsm.trim_with_origin();
        self.derive(fsm, &origin)
    }

    /// `Prefix(·)`: the reachable non-dump part with every state marked.
    /// Moves into the dump are dropped, so the closed language is the one a
    /// covert attacker can actually play.
    pub fn prefix(&self) -> Transducer {
        let keep: Vec<bool> = (0..self.num_states()).map(|s| !self.tags[s].dump).collect();
        let (fsm, origin) = self.fsm.restrict(&keep);
        let mut out = self.derive(fsm, &origin);
        out.fsm = out.fsm.remark(|_| true);
        out
    }

    /// Same transducer with its bad flags replaced by `bad` (and marking
    /// restricted to those states).
    pub fn mark_only(&self, bad: impl Fn(StateId) -> bool) -> Transducer {
        let mut out = self.clone();
        out.fsm = self.fsm.remark(|s| self.fsm.is_marked(s) && bad(s));
        out
    }

    /// Structural sub-transducer keeping only the transitions for which
    /// `keep` holds, restricted to the reachable part.
    pub fn sub_transducer(&self, keep: impl Fn(StateId, &PairEvent, StateId) -> bool) -> Transducer {
        let mut fsm = self.fsm.clone();
        let drop: Vec<(StateId, PairEvent)> = self
            .fsm
            .edges()
            .filter(|&(s, p, t)| !keep(s, p, t))
            .map(|(s, p, _)| (s, p.clone()))
            .collect();
        for (s, p) in drop {
            fsm.remove_transition(s, &p);
        }
        let (fsm, origin) = fsm.restrict(&fsm.reachable());
        self.derive(fsm, &origin)
    }
}

/// Single-state attack allowing every alteration in `relation`, identity on
/// protected events and `ε` on unobservable ones. All states marked.
pub fn build_a0(
    alphabet: &Alphabet,
    bound: usize,
    protected: &BTreeSet<Symbol>,
    relation: &AlterationRelation,
) -> Result<Transducer> {
    for (e, outs) in relation.entries() {
        if !alphabet.contains(e) {
            return Err(Error::UnknownEvent(e.to_string()));
        }
        if protected.contains(e) {
            if let Some(bad) = outs.iter().find(|u| **u != OutputString::single(e.clone())) {
                return Err(Error::ProtectionViolation {
                    event: e.to_string(),
                    output: bad.to_string(),
                });
            }
        }
    }
    let mut fsm = Fsm::empty();
    let y0 = fsm.add_state("y0", true);
    fsm.set_initial(y0)?;
    for ev in alphabet.events() {
        if !ev.observable {
            fsm.add_transition(y0, PairEvent::silent(&ev.name), y0)?;
        } else if protected.contains(&ev.name) {
            fsm.add_transition(y0, PairEvent::identity(&ev.name), y0)?;
        } else {
            for u in relation.outputs(&ev.name) {
                fsm.add_transition(y0, PairEvent::new(ev.name.clone(), u), y0)?;
            }
        }
    }
    Transducer::new(alphabet.clone(), bound, fsm)
}

/// Runs `s` from `z` over the events of `u`; `None` as soon as a step is
/// undefined.
fn run_output(s: &Fsm<Symbol>, z: StateId, u: &OutputString) -> Option<StateId> {
    u.events().iter().try_fold(z, |z, e| s.step(z, e))
}

/// Sequential composition `A∘S`. Outputs the supervisor cannot follow lead
/// to the (unmarked, deadlocking) dump state.
pub fn seq_compose(attack: &Transducer, supervisor: &Supervisor) -> Result<Transducer> {
    let alphabet = attack.alphabet.merge(supervisor.alphabet())?;
    let a = &attack.fsm;
    let s = supervisor.fsm();
    let mut fsm = Fsm::empty();
    let mut tags = Vec::new();
    let (Some(y0), Some(z0)) = (a.initial(), s.initial()) else {
        return Transducer::with_tags(alphabet, attack.bound, fsm, tags);
    };
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut order: Vec<((StateId, StateId), StateId)> = Vec::new();
    let mut dump: Option<StateId> = None;
    let mut visit = |p: (StateId, StateId),
                     fsm: &mut Fsm<PairEvent>,
                     tags: &mut Vec<Composite>,
                     order: &mut Vec<((StateId, StateId), StateId)>| {
        *index.entry(p).or_insert_with(|| {
            let id = fsm.add_state(
                format!("({},{})", a.name(p.0), s.name(p.1)),
                a.is_marked(p.0) && s.is_marked(p.1),
            );
            tags.push(Composite {
                plant: None,
                attack: Some(p.0),
                supervisor: Some(p.1),
                dump: false,
            });
            order.push((p, id));
            id
        })
    };
    let init = visit((y0, z0), &mut fsm, &mut tags, &mut order);
    fsm.set_initial(init)?;
    let mut i = 0;
    while i < order.len() {
        let ((y, z), from) = order[i];
        for (p, &ty) in a.transitions(y) {
            let observable = alphabet.is_observable(&p.input);
            let target = if observable {
                run_output(s, z, &p.output)
            } else if p.output.is_empty() {
                match s.step(z, &p.input) {
                    Some(tz) => Some(tz),
                    None => continue,
                }
            } else {
                continue;
            };
            let to = match target {
                Some(tz) => visit((ty, tz), &mut fsm, &mut tags, &mut order),
                None => *dump.get_or_insert_with(|| {
                    let d = fsm.add_state("d", false);
                    tags.push(Composite {
                        dump: true,
                        ..Composite::default()
                    });
                    d
                }),
            };
            fsm.add_transition(from, p.clone(), to)?;
        }
        i += 1;
    }
    Transducer::with_tags(alphabet, attack.bound, fsm, tags)
}

/// Impact `G×(A∘S)` of a composed attack on the plant. Marked states are
/// those with marked plant and non-dump marked inner components; bad states
/// are the marked ones whose plant component is a bad marker.
pub fn impact(plant: &Automaton, composed: &Transducer) -> Result<Transducer> {
    let alphabet = plant.alphabet().merge(&composed.alphabet)?;
    let g = plant.fsm();
    let w = &composed.fsm;
    let mut fsm = Fsm::empty();
    let mut tags = Vec::new();
    let (Some(x0), Some(w0)) = (g.initial(), w.initial()) else {
        return Transducer::with_tags(alphabet, composed.bound, fsm, tags);
    };
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut order: Vec<(StateId, StateId)> = Vec::new();
    let mut visit = |p: (StateId, StateId),
                     fsm: &mut Fsm<PairEvent>,
                     tags: &mut Vec<Composite>,
                     order: &mut Vec<(StateId, StateId)>| {
        *index.entry(p).or_insert_with(|| {
            let inner = composed.tags[p.1];
            let marked = g.is_marked(p.0) && w.is_marked(p.1) && !inner.dump;
            let id = fsm.add_state(format!("({},{})", g.name(p.0), w.name(p.1)), marked);
            fsm.set_bad(id, marked && g.is_bad(p.0));
            tags.push(Composite {
                plant: Some(p.0),
                ..inner
            });
            order.push(p);
            id
        })
    };
    let init = visit((x0, w0), &mut fsm, &mut tags, &mut order);
    fsm.set_initial(init)?;
    let mut i = 0;
    while i < order.len() {
        let (x, ws) = order[i];
        for (p, &tw) in w.transitions(ws) {
            if let Some(tx) = g.step(x, &p.input) {
                let to = visit((tx, tw), &mut fsm, &mut tags, &mut order);
                fsm.add_transition(i, p.clone(), to)?;
            }
        }
        i += 1;
    }
    Transducer::with_tags(alphabet, composed.bound, fsm, tags)
}

/// Recognizer of `ψ(L(t))` and `ψ(L_m(t))` over the transducer's alphabet.
pub fn input_automaton(t: &Transducer) -> Result<Automaton> {
    let fsm = t.fsm.project(|p| Some(p.input.clone()))?;
    Automaton::from_fsm(t.alphabet.clone(), fsm)
}

/// Recognizer of `θ(L(t))` and `θ(L_m(t))` over the observable events.
/// Multi-event outputs are expanded through fresh unmarked states.
pub fn output_automaton(t: &Transducer) -> Result<Automaton> {
    let mut nfa: Nfa<Symbol> = Nfa::new();
    let f = &t.fsm;
    for s in 0..f.num_states() {
        let id = nfa.add_state(f.is_marked(s));
        nfa.bad[id] = f.is_bad(s);
    }
    nfa.initial = f.initial();
    for (s, p, to) in f.edges() {
        let events = p.output.events();
        if events.is_empty() {
            nfa.edges[s].push((None, to));
            continue;
        }
        let mut at = s;
        for (k, e) in events.iter().enumerate() {
            let next = if k + 1 == events.len() {
                to
            } else {
                nfa.add_state(false)
            };
            nfa.edges[at].push((Some(e.clone()), next));
            at = next;
        }
    }
    let fsm = nfa.determinize()?;
    let observable = t.alphabet.observable();
    Automaton::from_fsm(t.alphabet.restrict(&observable), fsm)
}

/// Deterministic union: `L(t1 ∪ t2) = L(t1) ∪ L(t2)`.
pub fn union(t1: &Transducer, t2: &Transducer) -> Result<Transducer> {
    let alphabet = t1.alphabet.merge(&t2.alphabet)?;
    let fsm = t1.fsm.union(&t2.fsm);
    Transducer::new(alphabet, t1.bound.max(t2.bound), fsm)
}

/// Canonical attack `Prefix(G×(A∘S))`: same impact as `attack`, with input
/// language inside `L(G)`.
pub fn canonicalize(plant: &Automaton, attack: &Transducer, supervisor: &Supervisor) -> Result<Transducer> {
    let imp = impact(plant, &seq_compose(attack, supervisor)?)?;
    Ok(imp.prefix())
}
