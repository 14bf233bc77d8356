//! Line-oriented model files.
//!
//! ```text
//! # comment
//! format 1
//! kind automaton            # or: transducer
//! bound 1                   # transducers only
//!
//! [alphabet]
//! h=L uncontrollable observable
//! q_o=0 controllable observable protected
//!
//! [states]
//! 0 initial
//! 5 marked
//! 9 marked bad
//!
//! [transitions]
//! 0 h=L 1                   # automaton: from event to
//! y h=M h=L y               # transducer: from input output to (output `ε` or `a,b`)
//!
//! [attack]                  # optional
//! n 1
//! mode actuator-preserving
//! protect h=H
//! relation h=M h=L          # event output; `relation full` allows all of Δn
//! ```
//!
//! Transducer files omit the `(σ, ε)` self-loops of unobservable events; they
//! are added on load wherever the state has no move on that pair.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::alphabet::{Alphabet, Event, Symbol};
use crate::attack::{AttackSpec, FeasibilityMode};
use crate::automaton::Automaton;
use crate::error::{Error, Result};
use crate::fsm::{Fsm, Label, StateId};
use crate::transducer::{AlterationRelation, OutputString, PairEvent, Transducer};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum Model {
    Automaton(Automaton),
    Transducer(Transducer),
}

/// Parsed file: the model plus an optional attack description.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: Model,
    pub attack_spec: Option<AttackSpec>,
}

impl ModelFile {
    pub fn automaton(a: Automaton) -> Self {
        ModelFile {
            model: Model::Automaton(a),
            attack_spec: None,
        }
    }

    pub fn transducer(t: Transducer) -> Self {
        ModelFile {
            model: Model::Transducer(t),
            attack_spec: None,
        }
    }

    pub fn into_automaton(self) -> Result<Automaton> {
        match self.model {
            Model::Automaton(a) => Ok(a),
            Model::Transducer(_) => Err(Error::Validation("expected an automaton, found a transducer".into())),
        }
    }

    pub fn into_transducer(self) -> Result<Transducer> {
        match self.model {
            Model::Transducer(t) => Ok(t),
            Model::Automaton(_) => Err(Error::Validation("expected a transducer, found an automaton".into())),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Alphabet,
    States,
    Transitions,
    Attack,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct StateDecl {
    name: String,
    line: usize,
    initial: bool,
    marked: bool,
    bad: bool,
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let mut section = Section::Header;
    let mut version = None;
    let mut kind: Option<String> = None;
    let mut bound: Option<usize> = None;
    let mut events = Vec::new();
    let mut states: Vec<StateDecl> = Vec::new();
    let mut transitions: Vec<(usize, Vec<String>)> = Vec::new();
    let mut attack_lines: Vec<(usize, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[alphabet]" => Section::Alphabet,
                "[states]" => Section::States,
                "[transitions]" => Section::Transitions,
                "[attack]" => Section::Attack,
                other => return Err(perr(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        let tokens: Vec<String> = content.split_whitespace().map(str::to_string).collect();
        match section {
            Section::Header => match (tokens[0].as_str(), tokens.get(1), tokens.len()) {
                ("format", Some(v), 2) => {
                    let v: u32 = v.parse().map_err(|_| perr(line, "format version must be an integer"))?;
                    if v != FORMAT_VERSION {
                        return Err(perr(line, format!("unsupported format version {v}")));
                    }
                    version = Some(v);
                }
                ("kind", Some(k), 2) if k == "automaton" || k == "transducer" => kind = Some(k.clone()),
                ("kind", Some(k), 2) => return Err(perr(line, format!("unknown kind `{k}`"))),
                ("bound", Some(b), 2) => {
                    bound = Some(b.parse().map_err(|_| perr(line, "bound must be a non-negative integer"))?)
                }
                _ => return Err(perr(line, format!("unexpected header line `{content}`"))),
            },
            Section::Alphabet => events.push(parse_event(line, &tokens)?),
            Section::States => {
                let mut decl = StateDecl {
                    name: tokens[0].clone(),
                    line,
                    initial: false,
                    marked: false,
                    bad: false,
                };
                for flag in &tokens[1..] {
                    match flag.as_str() {
                        "initial" => decl.initial = true,
                        "marked" => decl.marked = true,
                        "bad" => decl.bad = true,
                        other => return Err(perr(line, format!("unknown state flag `{other}`"))),
                    }
                }
                if decl.bad && !decl.marked {
                    return Err(perr(line, format!("bad state `{}` must also be marked", decl.name)));
                }
                states.push(decl);
            }
            Section::Transitions => transitions.push((line, tokens)),
            Section::Attack => attack_lines.push((line, tokens)),
        }
    }

    if version.is_none() {
        return Err(perr(1, "missing `format` line"));
    }
    let kind = kind.ok_or_else(|| perr(1, "missing `kind` line"))?;
    let mut alphabet = Alphabet::default();
    for (line, e) in events {
        alphabet.insert(e).map_err(|err| perr(line, err.to_string()))?;
    }

    let mut ids: HashMap<String, StateId> = HashMap::new();
    let mut initial = None;
    for (id, d) in states.iter().enumerate() {
        if ids.insert(d.name.clone(), id).is_some() {
            return Err(perr(d.line, format!("state `{}` declared twice", d.name)));
        }
        if d.initial {
            if initial.is_some() {
                return Err(Error::Validation(format!(
                    "line {}: second initial state `{}`",
                    d.line, d.name
                )));
            }
            initial = Some(id);
        }
    }
    if !states.is_empty() && initial.is_none() {
        return Err(Error::Validation("no initial state declared".into()));
    }
    let state = |line: usize, name: &str| -> Result<StateId> {
        ids.get(name)
            .copied()
            .ok_or_else(|| perr(line, format!("undeclared state `{name}`")))
    };
    let event = |line: usize, name: &str| -> Result<Symbol> {
        alphabet
            .get(&Symbol::new(name))
            .map(|e| e.name.clone())
            .ok_or_else(|| perr(line, format!("undeclared event `{name}`")))
    };

    let model = if kind == "automaton" {
        if bound.is_some() {
            return Err(perr(1, "`bound` is only valid for transducers"));
        }
        let mut fsm: Fsm<Symbol> = skeleton(&states, initial)?;
        for (line, t) in &transitions {
            if t.len() != 3 {
                return Err(perr(*line, "expected `from event to`"));
            }
            let (from, ev, to) = (state(*line, &t[0])?, event(*line, &t[1])?, state(*line, &t[2])?);
            add(&mut fsm, *line, from, ev, to)?;
        }
        Model::Automaton(Automaton::from_fsm(alphabet.clone(), fsm)?)
    } else {
        let bound = bound.ok_or_else(|| perr(1, "transducers need a `bound` line"))?;
        let mut fsm: Fsm<PairEvent> = skeleton(&states, initial)?;
        for (line, t) in &transitions {
            if t.len() != 4 {
                return Err(perr(*line, "expected `from input output to`"));
            }
            let (from, input, to) = (state(*line, &t[0])?, event(*line, &t[1])?, state(*line, &t[3])?);
            let output = parse_output(*line, &t[2], &event)?;
            add(&mut fsm, *line, from, PairEvent::new(input, output), to)?;
        }
        for s in 0..fsm.num_states() {
            for e in alphabet.events().iter().filter(|e| !e.observable) {
                let p = PairEvent::silent(&e.name);
                if fsm.step(s, &p).is_none() {
                    fsm.add_transition(s, p, s)?;
                }
            }
        }
        Model::Transducer(Transducer::new(alphabet.clone(), bound, fsm)?)
    };

    let attack_spec = if attack_lines.is_empty() {
        None
    } else {
        Some(parse_attack(&attack_lines, &alphabet, &event)?)
    };
    Ok(ModelFile { model, attack_spec })
}

fn parse_event(line: usize, tokens: &[String]) -> Result<(usize, Event)> {
    let name = &tokens[0];
    if name.contains(',') || name == "ε" || name == "-" {
        return Err(perr(line, format!("`{name}` is not a valid event name")));
    }
    let mut controllable = None;
    let mut observable = None;
    let mut protected = false;
    for flag in &tokens[1..] {
        match flag.as_str() {
            "controllable" => controllable = Some(true),
            "uncontrollable" => controllable = Some(false),
            "observable" => observable = Some(true),
            "unobservable" => observable = Some(false),
            "protected" => protected = true,
            other => return Err(perr(line, format!("unknown event flag `{other}`"))),
        }
    }
    let controllable = controllable.ok_or_else(|| perr(line, format!("event `{name}` needs (un)controllable")))?;
    let observable = observable.ok_or_else(|| perr(line, format!("event `{name}` needs (un)observable")))?;
    Ok((
        line,
        Event {
            protected,
            ..Event::new(name, controllable, observable)
        },
    ))
}

fn parse_output(line: usize, token: &str, event: &impl Fn(usize, &str) -> Result<Symbol>) -> Result<OutputString> {
    let raw = OutputString::parse(token);
    let events = raw
        .events()
        .iter()
        .map(|e| event(line, e.as_str()))
        .collect::<Result<Vec<_>>>()?;
    Ok(OutputString::new(events))
}

fn parse_attack(
    lines: &[(usize, Vec<String>)],
    alphabet: &Alphabet,
    event: &impl Fn(usize, &str) -> Result<Symbol>,
) -> Result<AttackSpec> {
    let mut n = 1;
    let mut mode = FeasibilityMode::default();
    let mut protected = BTreeSet::new();
    let mut relation = AlterationRelation::identity();
    let mut full = false;
    let mut explicit: Vec<(usize, Symbol, OutputString)> = Vec::new();
    for (line, t) in lines {
        let line = *line;
        match (t[0].as_str(), t.len()) {
            ("n", 2) => n = t[1].parse().map_err(|_| perr(line, "n must be a non-negative integer"))?,
            ("mode", 2) => mode = t[1].parse().map_err(|e: Error| perr(line, e.to_string()))?,
            ("protect", 2) => {
                for name in t[1].split(',').filter(|s| !s.is_empty()) {
                    protected.insert(event(line, name)?);
                }
            }
            ("relation", 2) if t[1] == "full" => full = true,
            ("relation", 3) => explicit.push((line, event(line, &t[1])?, parse_output(line, &t[2], event)?)),
            _ => return Err(perr(line, format!("unexpected attack line `{}`", t.join(" ")))),
        }
    }
    if full {
        relation = AlterationRelation::full(alphabet, n)?;
    }
    for (line, e, u) in explicit {
        if u.len() > n {
            return Err(perr(line, format!("output `{u}` is longer than n = {n}")));
        }
        relation.allow(e, u);
    }
    Ok(AttackSpec::new(n, protected, relation).with_mode(mode))
}

/// Relation file: one `event output` pair per line, or the single word
/// `full` for all of `Δn`. `#` starts a comment.
pub fn parse_relation(text: &str, alphabet: &Alphabet, n: usize) -> Result<AlterationRelation> {
    let event = |line: usize, name: &str| -> Result<Symbol> {
        alphabet
            .get(&Symbol::new(name))
            .map(|e| e.name.clone())
            .ok_or_else(|| perr(line, format!("undeclared event `{name}`")))
    };
    let mut relation = AlterationRelation::identity();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["full"] => {
                for (e, outs) in AlterationRelation::full(alphabet, n)?.entries() {
                    for u in outs {
                        relation.allow(e.clone(), u.clone());
                    }
                }
            }
            [e, u] => {
                let u = parse_output(line, u, &event)?;
                if u.len() > n {
                    return Err(perr(line, format!("output `{u}` is longer than n = {n}")));
                }
                relation.allow(event(line, e)?, u);
            }
            _ => return Err(perr(line, "expected `event output` or `full`")),
        }
    }
    Ok(relation)
}

fn skeleton<L: Label>(states: &[StateDecl], initial: Option<StateId>) -> Result<Fsm<L>> {
    let mut fsm = Fsm::empty();
    for d in states {
        let id = fsm.add_state(d.name.clone(), d.marked);
        fsm.set_bad(id, d.bad);
    }
    if let Some(i) = initial {
        fsm.set_initial(i)?;
    }
    Ok(fsm)
}

fn add<L: Label + std::fmt::Display>(fsm: &mut Fsm<L>, line: usize, from: StateId, l: L, to: StateId) -> Result<()> {
    if let Some(existing) = fsm.step(from, &l) {
        if existing != to {
            return Err(Error::Validation(format!(
                "line {line}: nondeterministic transitions from `{}` on `{l}` (to `{}` and `{}`)",
                fsm.name(from),
                fsm.name(existing),
                fsm.name(to)
            )));
        }
        return Ok(());
    }
    fsm.add_transition(from, l, to)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    parse_model(&fs::read_to_string(path)?)
}

/// State names used on output: the machine's own names when they are usable
/// and distinct, `s0, s1, …` otherwise.
fn output_names<L: Label>(fsm: &Fsm<L>) -> Vec<String> {
    let names: Vec<String> = (0..fsm.num_states()).map(|s| fsm.name(s).to_string()).collect();
    let usable = names
        .iter()
        .all(|n| !n.is_empty() && !n.contains(char::is_whitespace) && !n.contains('#') && !n.starts_with('['));
    let distinct = names.iter().collect::<BTreeSet<_>>().len() == names.len();
    if usable && distinct {
        names
    } else {
        (0..fsm.num_states()).map(|s| format!("s{s}")).collect()
    }
}

fn emit_alphabet(out: &mut String, alphabet: &Alphabet) {
    out.push_str("\n[alphabet]\n");
    for e in alphabet.events() {
        let _ = write!(
            out,
            "{} {} {}",
            e.name,
            if e.controllable { "controllable" } else { "uncontrollable" },
            if e.observable { "observable" } else { "unobservable" }
        );
        if e.protected {
            out.push_str(" protected");
        }
        out.push('\n');
    }
}

fn emit_states<L: Label>(out: &mut String, fsm: &Fsm<L>, names: &[String]) {
    out.push_str("\n[states]\n");
    let mut order: Vec<StateId> = (0..fsm.num_states()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    for s in order {
        out.push_str(&names[s]);
        if fsm.initial() == Some(s) {
            out.push_str(" initial");
        }
        if fsm.is_marked(s) {
            out.push_str(" marked");
        }
        if fsm.is_bad(s) {
            out.push_str(" bad");
        }
        out.push('\n');
    }
}

fn emit_attack(out: &mut String, spec: &AttackSpec) {
    out.push_str("\n[attack]\n");
    let _ = writeln!(out, "n {}", spec.n);
    let _ = writeln!(out, "mode {}", spec.feasibility_mode);
    if !spec.protected.is_empty() {
        let list: Vec<&str> = spec.protected.iter().map(Symbol::as_str).collect();
        let _ = writeln!(out, "protect {}", list.join(","));
    }
    for (e, outs) in spec.relation.entries() {
        for u in outs {
            let _ = writeln!(out, "relation {e} {u}");
        }
    }
}

/// Deterministic text form: states sorted by name, transitions sorted by
/// (source, label, target).
pub fn emit_model(file: &ModelFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format {FORMAT_VERSION}");
    match &file.model {
        Model::Automaton(a) => {
            out.push_str("kind automaton\n");
            emit_alphabet(&mut out, a.alphabet());
            let names = output_names(a.fsm());
            emit_states(&mut out, a.fsm(), &names);
            out.push_str("\n[transitions]\n");
            let mut lines: BTreeMap<(String, String, String), ()> = BTreeMap::new();
            for (s, l, t) in a.fsm().edges() {
                lines.insert((names[s].clone(), l.to_string(), names[t].clone()), ());
            }
            for (s, l, t) in lines.keys() {
                let _ = writeln!(out, "{s} {l} {t}");
            }
        }
        Model::Transducer(t) => {
            out.push_str("kind transducer\n");
            let _ = writeln!(out, "bound {}", t.bound());
            emit_alphabet(&mut out, t.alphabet());
            let names = output_names(t.fsm());
            emit_states(&mut out, t.fsm(), &names);
            out.push_str("\n[transitions]\n");
            let mut lines = BTreeSet::new();
            for (s, p, to) in t.fsm().edges() {
                let implicit = s == to && p.output.is_empty() && !t.alphabet().is_observable(&p.input);
                if !implicit {
                    lines.insert((names[s].clone(), p.input.to_string(), p.output.to_string(), names[to].clone()));
                }
            }
            for (s, i, o, to) in lines {
                let _ = writeln!(out, "{s} {i} {o} {to}");
            }
        }
    }
    if let Some(spec) = &file.attack_spec {
        emit_attack(&mut out, spec);
    }
    out
}

pub fn write_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, emit_model(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::fixtures;

    #[test]
    fn tank_round_trip() {
        let g = fixtures::tank_plant();
        let text = emit_model(&ModelFile::automaton(g.clone()));
        let back = parse_model(&text).unwrap().into_automaton().unwrap();
        assert_eq!(back.num_states(), 10);
        assert!(back.equivalent(&g));
        assert!(back.closed_equivalent(&g));
        assert_eq!(emit_model(&ModelFile::automaton(back)), text);
    }

    #[test]
    fn two_initial_states_rejected() {
        let text = "format 1\nkind automaton\n[alphabet]\na controllable observable\n[states]\n0 initial\n1 initial\n";
        assert!(matches!(parse_model(text), Err(Error::Validation(_))));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "format 1\nkind automaton\n[alphabet]\na controllable observable\n[states]\n0 initial\n[transitions]\n0 a\n";
        match parse_model(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nondeterminism_rejected() {
        let text = "format 1\nkind automaton\n[alphabet]\na controllable observable\n[states]\n0 initial\n1\n[transitions]\n0 a 0\n0 a 1\n";
        let err = parse_model(text).unwrap_err();
        assert!(err.to_string().contains("nondeterministic"), "{err}");
    }

    #[test]
    fn protected_unobservable_rejected() {
        let text = "format 1\nkind automaton\n[alphabet]\na controllable unobservable protected\n";
        assert!(parse_model(text).is_err());
    }

    #[test]
    fn transducer_gets_silent_self_loops() {
        let text = "format 1\nkind transducer\nbound 1\n[alphabet]\na uncontrollable observable\nu uncontrollable unobservable\n[states]\ny initial marked\n[transitions]\ny a ε y\n";
        let t = parse_model(text).unwrap().into_transducer().unwrap();
        assert!(t.fsm().step(0, &PairEvent::silent(&"u".into())).is_some());
        let emitted = emit_model(&ModelFile::transducer(t));
        assert!(!emitted.contains("y u"));
        assert!(emitted.contains("y a ε y"));
    }

    #[test]
    fn attack_section_round_trip() {
        let g = fixtures::tank_plant();
        let spec = AttackSpec::new(1, [Symbol::new("h=H")].into_iter().collect(), fixtures::tank_level_relation());
        let file = ModelFile {
            model: Model::Automaton(g),
            attack_spec: Some(spec.clone()),
        };
        let back = parse_model(&emit_model(&file)).unwrap();
        assert_eq!(back.attack_spec.unwrap(), spec);
    }
}
