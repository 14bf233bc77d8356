//! Events and alphabets.
//!
//! An [`Alphabet`] is an ordered set of [`Event`]s. Each event carries the
//! three attributes the control problems care about: whether a supervisor can
//! disable it, whether a sensor reports it, and whether its sensor reading is
//! protected against alteration. Automata refer to events by [`Symbol`], a
//! cheap reference-counted name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Name of an event, used as a transition label.
///
/// Ordering is plain string ordering, which gives every search in the crate
/// its deterministic tie-break.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub name: Symbol,
    pub controllable: bool,
    pub observable: bool,
    /// The event's sensor reading cannot be altered. Implies `observable`.
    pub protected: bool,
}

impl Event {
    pub fn new(name: &str, controllable: bool, observable: bool) -> Self {
        Event {
            name: Symbol::new(name),
            controllable,
            observable,
            protected: false,
        }
    }

    fn same_attributes(&self, other: &Event) -> bool {
        self.controllable == other.controllable
            && self.observable == other.observable
            && self.protected == other.protected
    }
}

/// Ordered event set. Declaration order is preserved and is the order used
/// whenever subsets of the alphabet are enumerated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    events: Vec<Event>,
    index: BTreeMap<Symbol, usize>,
}

impl Alphabet {
    pub fn new(events: impl IntoIterator<Item = Event>) -> Result<Self> {
        let mut alphabet = Alphabet::default();
        for event in events {
            alphabet.insert(event)?;
        }
        Ok(alphabet)
    }

    /// Adds an event. Re-declaring an existing name is accepted only when the
    /// attributes agree.
    pub fn insert(&mut self, event: Event) -> Result<()> {
        if event.name.as_str().is_empty() {
            return Err(Error::Validation("event names must be non-empty".into()));
        }
        if event.protected && !event.observable {
            return Err(Error::Validation(format!(
                "event `{}` is protected but unobservable",
                event.name
            )));
        }
        match self.index.get(&event.name) {
            Some(&i) if self.events[i].same_attributes(&event) => Ok(()),
            Some(_) => Err(Error::AttributeMismatch {
                event: event.name.to_string(),
            }),
            None => {
                self.index.insert(event.name.clone(), self.events.len());
                self.events.push(event);
                Ok(())
            }
        }
    }

    /// Union of two alphabets; `self`'s order comes first.
    pub fn merge(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut out = self.clone();
        for e in &other.events {
            out.insert(e.clone())?;
        }
        Ok(out)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn get(&self, name: &Symbol) -> Option<&Event> {
        self.index.get(name).map(|&i| &self.events[i])
    }

    pub fn lookup(&self, name: &str) -> Result<&Event> {
        self.get(&Symbol::new(name))
            .ok_or_else(|| Error::UnknownEvent(name.to_string()))
    }

    pub fn contains(&self, name: &Symbol) -> bool {
        self.index.contains_key(name)
    }

    /// Position of the event in declaration order.
    pub fn position(&self, name: &Symbol) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> + '_ {
        self.events.iter().map(|e| &e.name)
    }

    fn select(&self, pred: impl Fn(&Event) -> bool) -> BTreeSet<Symbol> {
        self.events
            .iter()
            .filter(|e| pred(e))
            .map(|e| e.name.clone())
            .collect()
    }

    pub fn controllable(&self) -> BTreeSet<Symbol> {
        self.select(|e| e.controllable)
    }

    pub fn uncontrollable(&self) -> BTreeSet<Symbol> {
        self.select(|e| !e.controllable)
    }

    pub fn observable(&self) -> BTreeSet<Symbol> {
        self.select(|e| e.observable)
    }

    pub fn unobservable(&self) -> BTreeSet<Symbol> {
        self.select(|e| !e.observable)
    }

    pub fn protected(&self) -> BTreeSet<Symbol> {
        self.select(|e| e.protected)
    }

    /// Observable events in declaration order.
    pub fn observable_in_order(&self) -> Vec<Symbol> {
        self.events
            .iter()
            .filter(|e| e.observable)
            .map(|e| e.name.clone())
            .collect()
    }

    pub fn is_controllable(&self, name: &Symbol) -> bool {
        self.get(name).is_some_and(|e| e.controllable)
    }

    pub fn is_observable(&self, name: &Symbol) -> bool {
        self.get(name).is_some_and(|e| e.observable)
    }

    pub fn is_protected(&self, name: &Symbol) -> bool {
        self.get(name).is_some_and(|e| e.protected)
    }

    /// Copy of the alphabet with the protected flag set exactly on `protect`.
    pub fn with_protected(&self, protect: &BTreeSet<Symbol>) -> Result<Alphabet> {
        for name in protect {
            if !self.contains(name) {
                return Err(Error::UnknownEvent(name.to_string()));
            }
        }
        Alphabet::new(self.events.iter().map(|e| Event {
            protected: protect.contains(&e.name),
            ..e.clone()
        }))
    }

    /// Sub-alphabet containing only the listed events, in this alphabet's order.
    pub fn restrict(&self, keep: &BTreeSet<Symbol>) -> Alphabet {
        Alphabet::new(self.events.iter().filter(|e| keep.contains(&e.name)).cloned())
            .expect("restriction of a valid alphabet is valid")
    }
}
