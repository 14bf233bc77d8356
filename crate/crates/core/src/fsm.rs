//! Deterministic finite-state machines over an arbitrary ordered label type.
//!
//! [`Fsm`] is the engine under both plain automata (labels are event
//! [`Symbol`](crate::alphabet::Symbol)s) and transducers (labels are
//! input/output pairs). Transition functions are partial. The empty machine
//! has no states and no initial state; every operation accepts it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::limits;

pub trait Label: Clone + Ord + Hash + fmt::Debug {}
impl<T: Clone + Ord + Hash + fmt::Debug> Label for T {}

pub type StateId = usize;

#[derive(Clone, PartialEq, Eq)]
pub struct Fsm<L> {
    initial: Option<StateId>,
    delta: Vec<BTreeMap<L, StateId>>,
    marked: Vec<bool>,
    bad: Vec<bool>,
    names: Vec<String>,
}

impl<L: fmt::Debug> fmt::Debug for Fsm<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Fsm(initial={:?})", self.initial)?;
        for s in 0..self.delta.len() {
            writeln!(
                f,
                "  {} [{}]{}{}",
                s,
                self.names[s],
                if self.marked[s] { " marked" } else { "" },
                if self.bad[s] { " bad" } else { "" }
            )?;
            for (l, t) in &self.delta[s] {
                writeln!(f, "    --{:?}--> {}", l, t)?;
            }
        }
        Ok(())
    }
}

impl<L: Label> Default for Fsm<L> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<L: Label> Fsm<L> {
    pub fn empty() -> Self {
        Fsm {
            initial: None,
            delta: Vec::new(),
            marked: Vec::new(),
            bad: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>, marked: bool) -> StateId {
        self.delta.push(BTreeMap::new());
        self.marked.push(marked);
        self.bad.push(false);
        self.names.push(name.into());
        self.delta.len() - 1
    }

    pub fn set_initial(&mut self, s: StateId) -> Result<()> {
        self.check(s)?;
        self.initial = Some(s);
        Ok(())
    }

    /// Adds `from --label--> to`. Redefining an existing `(from, label)` pair
    /// with a different target is a determinism violation.
    pub fn add_transition(&mut self, from: StateId, label: L, to: StateId) -> Result<()> {
        self.check(from)?;
        self.check(to)?;
        match self.delta[from].get(&label) {
            Some(&t) if t != to => Err(Error::Validation(format!(
                "nondeterministic transition from state `{}` on {:?}",
                self.names[from], label
            ))),
            _ => {
                self.delta[from].insert(label, to);
                Ok(())
            }
        }
    }

    pub fn remove_transition(&mut self, from: StateId, label: &L) -> Option<StateId> {
        self.delta.get_mut(from)?.remove(label)
    }

    fn check(&self, s: StateId) -> Result<()> {
        if s < self.delta.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(s))
        }
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().map(BTreeMap::len).sum()
    }

    pub fn initial(&self) -> Option<StateId> {
        self.initial
    }

    /// No initial state, hence empty closed and marked language.
    pub fn is_empty(&self) -> bool {
        self.initial.is_none()
    }

    pub fn is_marked(&self, s: StateId) -> bool {
        self.marked[s]
    }

    pub fn set_marked(&mut self, s: StateId, marked: bool) {
        self.marked[s] = marked;
    }

    pub fn is_bad(&self, s: StateId) -> bool {
        self.bad[s]
    }

    pub fn set_bad(&mut self, s: StateId, bad: bool) {
        self.bad[s] = bad;
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn set_name(&mut self, s: StateId, name: impl Into<String>) {
        self.names[s] = name.into();
    }

    pub fn step(&self, s: StateId, label: &L) -> Option<StateId> {
        self.delta[s].get(label).copied()
    }

    pub fn transitions(&self, s: StateId) -> &BTreeMap<L, StateId> {
        &self.delta[s]
    }

    pub fn enabled(&self, s: StateId) -> Result<BTreeSet<L>> {
        self.check(s)?;
        Ok(self.delta[s].keys().cloned().collect())
    }

    pub fn edges(&self) -> impl Iterator<Item = (StateId, &L, StateId)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(s, m)| m.iter().map(move |(l, &t)| (s, l, t)))
    }

    /// Every label used on some transition.
    pub fn labels(&self) -> BTreeSet<L> {
        self.delta.iter().flat_map(|m| m.keys().cloned()).collect()
    }

    pub fn run<'a>(&self, word: impl IntoIterator<Item = &'a L>) -> Option<StateId>
    where
        L: 'a,
    {
        let mut s = self.initial?;
        for l in word {
            s = self.step(s, l)?;
        }
        Some(s)
    }

    /// Membership in the closed language.
    pub fn accepts_prefix(&self, word: &[L]) -> bool {
        self.run(word).is_some()
    }

    /// Membership in the marked language.
    pub fn accepts(&self, word: &[L]) -> bool {
        self.run(word).is_some_and(|s| self.marked[s])
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let Some(init) = self.initial else {
            return seen;
        };
        let mut stack = vec![init];
        seen[init] = true;
        while let Some(s) = stack.pop() {
            for &t in self.delta[s].values() {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// States from which a marked state can be reached.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (s, _, t) in self.edges() {
            preds[t].push(s);
        }
        let mut seen = self.marked.clone();
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

    /// Sub-machine induced by the states in `keep` that are reachable through
    /// kept states. Returns the machine and, for each new state, its index in
    /// `self`.
    pub fn restrict(&self, keep: &[bool]) -> (Fsm<L>, Vec<StateId>) {
        let mut out = Fsm::empty();
        let mut origin = Vec::new();
        let Some(init) = self.initial.filter(|&i| keep[i]) else {
            return (out, origin);
        };
        let mut map: HashMap<StateId, StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        let add = |s: StateId, out: &mut Fsm<L>, origin: &mut Vec<StateId>| {
            let n = out.add_state(self.names[s].clone(), self.marked[s]);
            out.bad[n] = self.bad[s];
            origin.push(s);
            n
        };
        map.insert(init, add(init, &mut out, &mut origin));
        out.initial = Some(0);
        queue.push_back(init);
        while let Some(s) = queue.pop_front() {
            let from = map[&s];
            for (l, &t) in &self.delta[s] {
                if !keep[t] {
                    continue;
                }
                let to = match map.get(&t) {
                    Some(&to) => to,
                    None => {
                        let to = add(t, &mut out, &mut origin);
                        map.insert(t, to);
                        queue.push_back(t);
                        to
                    }
                };
                out.delta[from].insert(l.clone(), to);
            }
        }
        (out, origin)
    }

    /// Reachable part.
    pub fn accessible(&self) -> Fsm<L> {
        self.restrict(&self.reachable()).0
    }

    /// Reachable and co-reachable part, with the origin map.
    pub fn trim_with_origin(&self) -> (Fsm<L>, Vec<StateId>) {
        let reach = self.reachable();
        let co = self.coreachable();
        let keep: Vec<bool> = reach.iter().zip(&co).map(|(a, b)| *a && *b).collect();
        self.restrict(&keep)
    }

    pub fn trim(&self) -> Fsm<L> {
        self.trim_with_origin().0
    }

    /// Every reachable state marked: the marked language becomes the closed one.
    pub fn prefix_close(&self) -> Fsm<L> {
        let mut out = self.accessible();
        out.marked.iter_mut().for_each(|m| *m = true);
        out
    }

    /// Same structure with the marking replaced by `pred`. Bad flags are
    /// cleared on states that stop being marked.
    pub fn remark(&self, pred: impl Fn(StateId) -> bool) -> Fsm<L> {
        let mut out = self.clone();
        for s in 0..out.num_states() {
            out.marked[s] = pred(s);
            out.bad[s] &= out.marked[s];
        }
        out
    }

    /// Renames every label. `f` must be injective on the labels in use.
    pub fn map_labels<M: Label>(&self, f: impl Fn(&L) -> M) -> Fsm<M> {
        Fsm {
            initial: self.initial,
            delta: self
                .delta
                .iter()
                .map(|m| m.iter().map(|(l, &t)| (f(l), t)).collect())
                .collect(),
            marked: self.marked.clone(),
            bad: self.bad.clone(),
            names: self.names.clone(),
        }
    }

    /// Synchronous product over a shared label set (language intersection).
    /// Marked and bad flags are conjunctions of the components' marking,
    /// with bad taken from `self`. Returns the component pair of every state.
    pub fn intersect(&self, other: &Fsm<L>) -> (Fsm<L>, Vec<(StateId, StateId)>) {
        let mut out = Fsm::empty();
        let mut pairs: Vec<(StateId, StateId)> = Vec::new();
        let (Some(a0), Some(b0)) = (self.initial, other.initial) else {
            return (out, pairs);
        };
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut visit = |p: (StateId, StateId), out: &mut Fsm<L>, pairs: &mut Vec<(StateId, StateId)>| {
            *index.entry(p).or_insert_with(|| {
                let marked = self.marked[p.0] && other.marked[p.1];
                let n = out.add_state(
                    format!("({},{})", self.names[p.0], other.names[p.1]),
                    marked,
                );
                out.bad[n] = marked && self.bad[p.0];
                pairs.push(p);
                n
            })
        };
        out.initial = Some(visit((a0, b0), &mut out, &mut pairs));
        let mut i = 0;
        while i < pairs.len() {
            let (a, b) = pairs[i];
            for (l, &ta) in &self.delta[a] {
                if let Some(&tb) = other.delta[b].get(l) {
                    let to = visit((ta, tb), &mut out, &mut pairs);
                    out.delta[i].insert(l.clone(), to);
                }
            }
            i += 1;
        }
        (out, pairs)
    }

    /// Machine accepting `L_m(self) ∪ L_m(other)` (closed language likewise),
    /// built as the product of the two partial machines where a missing
    /// component means "that side has already died".
    pub fn union(&self, other: &Fsm<L>) -> Fsm<L> {
        type Pair = (Option<StateId>, Option<StateId>);
        let mut out = Fsm::empty();
        if self.is_empty() && other.is_empty() {
            return out;
        }
        let mut index: HashMap<Pair, StateId> = HashMap::new();
        let mut order: Vec<Pair> = Vec::new();
        let start = (self.initial, other.initial);
        let name = |p: &Pair| {
            let f = |s: Option<StateId>, m: &Fsm<L>| s.map_or("-".to_string(), |s| m.names[s].clone());
            format!("({},{})", f(p.0, self), f(p.1, other))
        };
        let mark = |p: &Pair| {
            p.0.is_some_and(|s| self.marked[s]) || p.1.is_some_and(|s| other.marked[s])
        };
        let bad = |p: &Pair| {
            p.0.is_some_and(|s| self.bad[s]) || p.1.is_some_and(|s| other.bad[s])
        };
        let s0 = out.add_state(name(&start), mark(&start));
        out.bad[s0] = bad(&start);
        out.initial = Some(s0);
        index.insert(start, s0);
        order.push(start);
        let mut i = 0;
        while i < order.len() {
            let (a, b) = order[i];
            let mut labels: BTreeSet<&L> = BTreeSet::new();
            if let Some(a) = a {
                labels.extend(self.delta[a].keys());
            }
            if let Some(b) = b {
                labels.extend(other.delta[b].keys());
            }
            for l in labels {
                let next = (
                    a.and_then(|a| self.step(a, l)),
                    b.and_then(|b| other.step(b, l)),
                );
                let to = match index.get(&next) {
                    Some(&t) => t,
                    None => {
                        let t = out.add_state(name(&next), mark(&next));
                        out.bad[t] = bad(&next);
                        index.insert(next, t);
                        order.push(next);
                        t
                    }
                };
                out.delta[i].insert(l.clone(), to);
            }
            i += 1;
        }
        out
    }

    /// Completion over `universe` with a fresh sink, then marking swapped.
    /// The closed language of the result is `universe*`.
    pub fn complement(&self, universe: &BTreeSet<L>) -> Fsm<L> {
        let mut out = self.accessible();
        let sink = out.add_state("⊥", false);
        if out.initial.is_none() {
            out.initial = Some(sink);
        }
        for s in 0..out.num_states() {
            for l in universe {
                out.delta[s].entry(l.clone()).or_insert(sink);
            }
            out.marked[s] = !out.marked[s];
            out.bad[s] = false;
        }
        out
    }

    /// Trim recognizer of `L_m(self) ∖ L_m(other)`.
    pub fn difference(&self, other: &Fsm<L>) -> Fsm<L> {
        let mut universe = self.labels();
        universe.extend(other.labels());
        self.intersect(&other.complement(&universe)).0.trim()
    }

    /// Shortest (then lexicographically least) word of `L_m(self)` outside
    /// `L_m(other)`, if any.
    pub fn find_word_not_in(&self, other: &Fsm<L>) -> Option<Vec<L>> {
        let a0 = self.initial?;
        let start = (a0, other.initial);
        let mut parent: HashMap<(StateId, Option<StateId>), ((StateId, Option<StateId>), L)> =
            HashMap::new();
        let mut seen = std::collections::HashSet::new();
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            let (a, b) = cur;
            if self.marked[a] && !b.is_some_and(|b| other.marked[b]) {
                let mut word = Vec::new();
                let mut at = cur;
                while let Some((prev, l)) = parent.get(&at) {
                    word.push(l.clone());
                    at = *prev;
                }
                word.reverse();
                return Some(word);
            }
            for (l, &ta) in &self.delta[a] {
                let next = (ta, b.and_then(|b| other.step(b, l)));
                if seen.insert(next) {
                    parent.insert(next, (cur, l.clone()));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    pub fn marked_subset_of(&self, other: &Fsm<L>) -> bool {
        self.find_word_not_in(other).is_none()
    }

    /// Marked-language equality.
    pub fn equivalent(&self, other: &Fsm<L>) -> bool {
        self.marked_subset_of(other) && other.marked_subset_of(self)
    }

    /// Closed-language equality.
    pub fn closed_equivalent(&self, other: &Fsm<L>) -> bool {
        self.prefix_close().equivalent(&other.prefix_close())
    }

    /// Shortest, lexicographically least marked word reaching a state that
    /// satisfies `target`.
    pub fn shortest_word_to(&self, target: impl Fn(StateId) -> bool) -> Option<Vec<L>> {
        let init = self.initial?;
        let mut parent: Vec<Option<(StateId, L)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[init] = true;
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            if target(s) {
                let mut word = Vec::new();
                let mut at = s;
                while let Some((p, l)) = parent[at].clone() {
                    word.push(l);
                    at = p;
                }
                word.reverse();
                return Some(word);
            }
            for (l, &t) in &self.delta[s] {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((s, l.clone()));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn shortest_marked_word(&self) -> Option<Vec<L>> {
        self.shortest_word_to(|s| self.marked[s])
    }

    /// Deterministic machine for the image of both languages under a
    /// relabelling where `None` erases the label (subset construction).
    pub fn project<M: Label>(&self, f: impl Fn(&L) -> Option<M>) -> Result<Fsm<M>> {
        Nfa::from_fsm(self, f).determinize()
    }

    /// Same as [`Fsm::project`], also returning the subset of `self`'s states
    /// behind every result state.
    pub fn project_with_subsets<M: Label>(
        &self,
        f: impl Fn(&L) -> Option<M>,
    ) -> Result<(Fsm<M>, Vec<Vec<StateId>>)> {
        Nfa::from_fsm(self, f).determinize_with_subsets()
    }
}

/// Nondeterministic machine with silent (`None`) moves. Only used as an
/// intermediate form on the way to [`Fsm`].
#[derive(Debug, Clone)]
pub struct Nfa<M> {
    pub initial: Option<StateId>,
    pub edges: Vec<Vec<(Option<M>, StateId)>>,
    pub marked: Vec<bool>,
    pub bad: Vec<bool>,
}

impl<M: Label> Nfa<M> {
    pub fn new() -> Self {
        Nfa {
            initial: None,
            edges: Vec::new(),
            marked: Vec::new(),
            bad: Vec::new(),
        }
    }

    pub fn add_state(&mut self, marked: bool) -> StateId {
        self.edges.push(Vec::new());
        self.marked.push(marked);
        self.bad.push(false);
        self.edges.len() - 1
    }

    pub fn from_fsm<L: Label>(fsm: &Fsm<L>, f: impl Fn(&L) -> Option<M>) -> Self {
        Nfa {
            initial: fsm.initial,
            edges: fsm
                .delta
                .iter()
                .map(|m| m.iter().map(|(l, &t)| (f(l), t)).collect())
                .collect(),
            marked: fsm.marked.clone(),
            bad: fsm.bad.clone(),
        }
    }

    fn closure(&self, set: &mut BTreeSet<StateId>) {
        let mut stack: Vec<StateId> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (l, t) in &self.edges[s] {
                if l.is_none() && set.insert(*t) {
                    stack.push(*t);
                }
            }
        }
    }

    pub fn determinize(&self) -> Result<Fsm<M>> {
        Ok(self.determinize_with_subsets()?.0)
    }

    pub fn determinize_with_subsets(&self) -> Result<(Fsm<M>, Vec<Vec<StateId>>)> {
        self.determinize_capped(limits::max_observer_states())
    }

    pub fn determinize_capped(&self, cap: usize) -> Result<(Fsm<M>, Vec<Vec<StateId>>)> {
        let mut out = Fsm::empty();
        let mut subsets: Vec<Vec<StateId>> = Vec::new();
        let Some(init) = self.initial else {
            return Ok((out, subsets));
        };
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut start = BTreeSet::from([init]);
        self.closure(&mut start);
        let mut add = |set: BTreeSet<StateId>,
                       out: &mut Fsm<M>,
                       subsets: &mut Vec<Vec<StateId>>|
         -> Result<StateId> {
            let key: Vec<StateId> = set.into_iter().collect();
            if let Some(&s) = index.get(&key) {
                return Ok(s);
            }
            if subsets.len() >= cap {
                return Err(Error::Capacity {
                    what: "subset construction",
                    limit: cap,
                    hint: "reduce the model or raise the observer-state limit",
                });
            }
            let marked = key.iter().any(|&s| self.marked[s]);
            let name = format!(
                "{{{}}}",
                key.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
            );
            let n = out.add_state(name, marked);
            out.bad[n] = key.iter().any(|&s| self.bad[s] && self.marked[s]);
            index.insert(key.clone(), n);
            subsets.push(key);
            Ok(n)
        };
        let s0 = add(start, &mut out, &mut subsets)?;
        out.initial = Some(s0);
        let mut i = 0;
        while i < subsets.len() {
            let mut moves: BTreeMap<M, BTreeSet<StateId>> = BTreeMap::new();
            for &s in &subsets[i] {
                for (l, t) in &self.edges[s] {
                    if let Some(l) = l {
                        moves.entry(l.clone()).or_default().insert(*t);
                    }
                }
            }
            for (l, mut set) in moves {
                self.closure(&mut set);
                let t = add(set, &mut out, &mut subsets)?;
                out.delta[i].insert(l, t);
            }
            i += 1;
        }
        Ok((out, subsets))
    }
}

impl<M: Label> Default for Nfa<M> {
    fn default() -> Self {
        Self::new()
    }
}
