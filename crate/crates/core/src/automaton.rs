//! Plant, supervisor and requirement automata with the language algebra used
//! by the synthesis procedures.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::fsm::{Fsm, StateId};

/// Deterministic automaton over an [`Alphabet`].
///
/// Marked states are split into desirable and bad ones; `bad` is only
/// meaningful for plants and is always a subset of the marked states.
#[derive(Clone, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Alphabet,
    fsm: Fsm<Symbol>,
}

impl fmt::Debug for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.fsm)
    }
}

pub type Word = Vec<Symbol>;

pub fn word(names: &[&str]) -> Word {
    names.iter().map(|n| Symbol::new(n)).collect()
}

pub fn format_word(w: &[Symbol]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
    }
}

impl Automaton {
    pub fn empty(alphabet: Alphabet) -> Self {
        Automaton {
            alphabet,
            fsm: Fsm::empty(),
        }
    }

    /// Wraps an existing machine. Every label must belong to `alphabet`.
    pub fn from_fsm(alphabet: Alphabet, fsm: Fsm<Symbol>) -> Result<Self> {
        if let Some(l) = fsm.labels().into_iter().find(|l| !alphabet.contains(l)) {
            return Err(Error::UnknownEvent(l.to_string()));
        }
        for s in 0..fsm.num_states() {
            if fsm.is_bad(s) && !fsm.is_marked(s) {
                return Err(Error::Validation(format!(
                    "state `{}` is bad but not marked",
                    fsm.name(s)
                )));
            }
        }
        Ok(Automaton { alphabet, fsm })
    }

    /// Builds an automaton from `(from, event, to)` triples over named states.
    /// The first state in `states` is initial.
    pub fn build(
        alphabet: Alphabet,
        states: &[&str],
        marked: &[&str],
        bad: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self> {
        let mut fsm = Fsm::empty();
        let mut ids = HashMap::new();
        for name in states {
            let id = fsm.add_state(*name, marked.contains(name));
            fsm.set_bad(id, bad.contains(name));
            ids.insert(*name, id);
        }
        if let Some(first) = states.first() {
            fsm.set_initial(ids[first])?;
        }
        let lookup = |n: &str| {
            ids.get(n)
                .copied()
                .ok_or_else(|| Error::Validation(format!("undeclared state `{n}`")))
        };
        for (from, ev, to) in transitions {
            let ev = alphabet.lookup(ev)?.name.clone();
            fsm.add_transition(lookup(from)?, ev, lookup(to)?)?;
        }
        Automaton::from_fsm(alphabet, fsm)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn fsm(&self) -> &Fsm<Symbol> {
        &self.fsm
    }

    pub fn into_fsm(self) -> Fsm<Symbol> {
        self.fsm
    }

    pub fn is_empty(&self) -> bool {
        self.fsm.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.fsm.num_states()
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        (0..self.num_states()).find(|&s| self.fsm.name(s) == name)
    }

    /// `En(x)`: events with a defined transition at `state`.
    pub fn enabled(&self, state: StateId) -> Result<BTreeSet<Symbol>> {
        self.fsm.enabled(state)
    }

    pub fn accepts(&self, w: &[Symbol]) -> bool {
        self.fsm.accepts(w)
    }

    pub fn accepts_prefix(&self, w: &[Symbol]) -> bool {
        self.fsm.accepts_prefix(w)
    }

    /// Marked word ends in a bad state.
    pub fn is_bad_word(&self, w: &[Symbol]) -> bool {
        self.fsm.run(w).is_some_and(|s| self.fsm.is_bad(s))
    }

    fn with_fsm(&self, fsm: Fsm<Symbol>) -> Automaton {
        Automaton {
            alphabet: self.alphabet.clone(),
            fsm,
        }
    }

    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Automaton> {
        Automaton::from_fsm(alphabet, self.fsm.clone())
    }

    pub fn trim(&self) -> Automaton {
        self.with_fsm(self.fsm.trim())
    }

    pub fn accessible(&self) -> Automaton {
        self.with_fsm(self.fsm.accessible())
    }

    /// Marks every reachable state.
    pub fn prefix_close(&self) -> Automaton {
        self.with_fsm(self.fsm.prefix_close())
    }

    /// Synchronous product: shared events synchronize, private events
    /// interleave. Bad states are those whose `self` component is bad.
    pub fn sync_product(&self, other: &Automaton) -> Result<Automaton> {
        let alphabet = self.alphabet.merge(&other.alphabet)?;
        let (a, b) = (&self.fsm, &other.fsm);
        let mut fsm = Fsm::empty();
        let (Some(a0), Some(b0)) = (a.initial(), b.initial()) else {
            return Ok(Automaton { alphabet, fsm });
        };
        let in_a = |e: &Symbol| self.alphabet.contains(e);
        let in_b = |e: &Symbol| other.alphabet.contains(e);
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs: Vec<(StateId, StateId)> = Vec::new();
        let mut visit = |p: (StateId, StateId), fsm: &mut Fsm<Symbol>, pairs: &mut Vec<_>| {
            *index.entry(p).or_insert_with(|| {
                let marked = a.is_marked(p.0) && b.is_marked(p.1);
                let id = fsm.add_state(format!("({},{})", a.name(p.0), b.name(p.1)), marked);
                fsm.set_bad(id, marked && a.is_bad(p.0));
                pairs.push(p);
                id
            })
        };
        let init = visit((a0, b0), &mut fsm, &mut pairs);
        fsm.set_initial(init)?;
        let mut i = 0;
        while i < pairs.len() {
            let (x, y) = pairs[i];
            let mut moves: Vec<(Symbol, (StateId, StateId))> = Vec::new();
            for (e, &tx) in a.transitions(x) {
                if !in_b(e) {
                    moves.push((e.clone(), (tx, y)));
                } else if let Some(ty) = b.step(y, e) {
                    moves.push((e.clone(), (tx, ty)));
                }
            }
            for (e, &ty) in b.transitions(y) {
                if !in_a(e) {
                    moves.push((e.clone(), (x, ty)));
                }
            }
            for (e, p) in moves {
                let t = visit(p, &mut fsm, &mut pairs);
                fsm.add_transition(i, e, t)?;
            }
            i += 1;
        }
        Ok(Automaton { alphabet, fsm })
    }

    /// Natural projection onto `keep`: deterministic recognizer of `P(L)` and
    /// `P(L_m)` over the restricted alphabet.
    pub fn project(&self, keep: &BTreeSet<Symbol>) -> Result<Automaton> {
        let fsm = self
            .fsm
            .project(|e| keep.contains(e).then(|| e.clone()))?;
        Ok(Automaton {
            alphabet: self.alphabet.restrict(keep),
            fsm,
        })
    }

    /// Inverse projection into `full`: events of `full` outside this
    /// automaton's alphabet are self-looped at every state.
    pub fn inverse_project(&self, full: &Alphabet) -> Result<Automaton> {
        let alphabet = self.alphabet.merge(full)?;
        let mut fsm = self.fsm.clone();
        let extra: Vec<Symbol> = full
            .symbols()
            .filter(|e| !self.alphabet.contains(e))
            .cloned()
            .collect();
        for s in 0..fsm.num_states() {
            for e in &extra {
                fsm.add_transition(s, e.clone(), s)?;
            }
        }
        Ok(Automaton { alphabet, fsm })
    }

    /// Recognizer of `universe* ∖ L_m(self)`; its closed language is `universe*`.
    pub fn complement(&self, universe: &Alphabet) -> Result<Automaton> {
        let alphabet = self.alphabet.merge(universe)?;
        let events: BTreeSet<Symbol> = alphabet.symbols().cloned().collect();
        Ok(Automaton {
            fsm: self.fsm.complement(&events),
            alphabet,
        })
    }

    /// Trim recognizer of `L_m(self) ∖ L_m(other)`.
    pub fn difference(&self, other: &Automaton) -> Result<Automaton> {
        let alphabet = self.alphabet.merge(&other.alphabet)?;
        Ok(Automaton {
            fsm: self.fsm.difference(&other.fsm),
            alphabet,
        })
    }

    /// `L_m(self) ⊆ L_m(other)`; on failure the shortest, then
    /// lexicographically least, counterexample.
    pub fn is_sublanguage(&self, other: &Automaton) -> std::result::Result<(), Word> {
        match self.fsm.find_word_not_in(&other.fsm) {
            None => Ok(()),
            Some(w) => Err(w),
        }
    }

    /// Marked-language equality.
    pub fn equivalent(&self, other: &Automaton) -> bool {
        self.fsm.equivalent(&other.fsm)
    }

    /// Closed-language equality.
    pub fn closed_equivalent(&self, other: &Automaton) -> bool {
        self.fsm.closed_equivalent(&other.fsm)
    }
}

/// An automaton with every state marked, realizing a supervisory control map
/// through its enabled-event sets.
#[derive(Clone, PartialEq, Eq)]
pub struct Supervisor(Automaton);

impl fmt::Debug for Supervisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Supervisor{:?}", self.0)
    }
}

impl Supervisor {
    /// Marks every state; bad flags are dropped.
    pub fn new(automaton: Automaton) -> Self {
        let fsm = automaton.fsm.remark(|_| true);
        let mut fsm = fsm;
        for s in 0..fsm.num_states() {
            fsm.set_bad(s, false);
        }
        Supervisor(Automaton {
            alphabet: automaton.alphabet,
            fsm,
        })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.0
    }

    pub fn fsm(&self) -> &Fsm<Symbol> {
        &self.0.fsm
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.0.alphabet
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// State reached by running the supervisor over an observed word.
    pub fn run(&self, w: &[Symbol]) -> Option<StateId> {
        self.0.fsm.run(w)
    }
}

/// Findings of [`check_supervisor_feasibility`]; empty means feasible and legal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// Strings with equal observation but different enabled-event sets.
    pub observation_conflicts: Vec<(Word, Word)>,
    /// Strings of the closed loop that end in a bad marker state of the plant.
    pub legality_violations: Vec<Word>,
    /// Uncontrollable plant events the supervisor disables, with the string
    /// after which it happens.
    pub disabled_uncontrollable: Vec<(Word, Symbol)>,
}

impl FeasibilityReport {
    pub fn is_ok(&self) -> bool {
        self.observation_conflicts.is_empty()
            && self.legality_violations.is_empty()
            && self.disabled_uncontrollable.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "feasible: true\nlegal: true");
        }
        writeln!(f, "feasible: {}", self.observation_conflicts.is_empty() && self.disabled_uncontrollable.is_empty())?;
        writeln!(f, "legal: {}", self.legality_violations.is_empty())?;
        for (a, b) in &self.observation_conflicts {
            writeln!(f, "observation conflict: [{}] vs [{}]", format_word(a), format_word(b))?;
        }
        for (w, e) in &self.disabled_uncontrollable {
            writeln!(f, "uncontrollable {} disabled after [{}]", e, format_word(w))?;
        }
        for w in &self.legality_violations {
            writeln!(f, "reaches bad state: [{}]", format_word(w))?;
        }
        Ok(())
    }
}

/// Checks observation consistency of `supervisor`, that it never disables an
/// uncontrollable event the plant can execute, and legality against the
/// plant's bad marker states.
pub fn check_supervisor_feasibility(
    supervisor: &Supervisor,
    plant: &Automaton,
) -> Result<FeasibilityReport> {
    let mut report = FeasibilityReport::default();
    let s = supervisor.fsm();
    let alphabet = supervisor.alphabet();
    let observable = alphabet.observable();

    // (i) Pair the supervisor with itself along words of equal projection;
    // each state pair reached with different enabled sets is a conflict.
    if let Some(z0) = s.initial() {
        let mut parent: HashMap<(StateId, StateId), Option<((StateId, StateId), Symbol, bool)>> =
            HashMap::new();
        parent.insert((z0, z0), None);
        let mut queue = VecDeque::from([(z0, z0)]);
        let trace = |p: (StateId, StateId),
                     parent: &HashMap<(StateId, StateId), Option<((StateId, StateId), Symbol, bool)>>| {
            // Rebuild both words; `bool` says which side moved on a silent step
            // (`true` = left) or that both moved on an observable one.
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut at = p;
            while let Some(Some((prev, e, side))) = parent.get(&at) {
                let obs = observable.contains(e);
                if obs || *side {
                    left.push(e.clone());
                }
                if obs || !*side {
                    right.push(e.clone());
                }
                at = *prev;
            }
            left.reverse();
            right.reverse();
            (left, right)
        };
        while let Some((a, b)) = queue.pop_front() {
            if s.transitions(a).keys().ne(s.transitions(b).keys()) {
                report.observation_conflicts.push(trace((a, b), &parent));
                continue;
            }
            let mut next = Vec::new();
            for (e, &ta) in s.transitions(a) {
                if observable.contains(e) {
                    if let Some(tb) = s.step(b, e) {
                        next.push(((ta, tb), e.clone(), true));
                    }
                } else {
                    next.push(((ta, b), e.clone(), true));
                }
            }
            for (e, &tb) in s.transitions(b) {
                if !observable.contains(e) {
                    next.push(((a, tb), e.clone(), false));
                }
            }
            for (p, e, side) in next {
                if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(p) {
                    v.insert(Some(((a, b), e, side)));
                    queue.push_back(p);
                }
            }
        }
    }

    // (ii) Closed loop with the plant.
    let closed_loop = plant.sync_product(supervisor.automaton())?;
    let cl = closed_loop.fsm();
    let bad_word = cl.shortest_word_to(|st| cl.is_bad(st));
    if let Some(w) = bad_word {
        report.legality_violations.push(w);
    }

    // (iii) Uncontrollable events disabled in the closed loop.
    let uncontrollable = plant.alphabet().uncontrollable();
    let pf = plant.fsm();
    if let (Some(x0), Some(z0)) = (pf.initial(), s.initial()) {
        let mut seen = HashMap::new();
        seen.insert((x0, z0), Vec::<Symbol>::new());
        let mut queue = VecDeque::from([(x0, z0)]);
        while let Some((x, z)) = queue.pop_front() {
            let w = seen[&(x, z)].clone();
            for (e, &tx) in pf.transitions(x) {
                let tz = if supervisor.alphabet().contains(e) {
                    match s.step(z, e) {
                        Some(tz) => tz,
                        None => {
                            if uncontrollable.contains(e) {
                                report.disabled_uncontrollable.push((w.clone(), e.clone()));
                            }
                            continue;
                        }
                    }
                } else {
                    z
                };
                if !seen.contains_key(&(tx, tz)) {
                    let mut w2 = w.clone();
                    w2.push(e.clone());
                    seen.insert((tx, tz), w2);
                    queue.push_back((tx, tz));
                }
            }
        }
    }
    Ok(report)
}
