//! Supremal attack synthesis and the independent attack verifier.
//!
//! Protected events: the only output allowed for a protected event is the
//! event itself (identity pairs over the protected observable events).
//!
//! The enablement condition compares, at every composite state `(x, y, z)`,
//! the input events the attacked closed loop allows with what the plant and
//! the supervisor would allow. Its granularity is a [`FeasibilityMode`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::alphabet::{Alphabet, Symbol};
use crate::automaton::{check_supervisor_feasibility, format_word, Automaton, FeasibilityReport, Supervisor, Word};
use crate::error::{Error, Result};
use crate::fsm::{Fsm, StateId};
use crate::synthesis::{sup_cn, IterationSummary, SynthesisContext};
use crate::transducer::{
    build_a0, format_pairs, impact, input_automaton, output_automaton, seq_compose, union, AlterationRelation,
    PairEvent, Transducer,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum FeasibilityMode {
    /// `ψ(En) = En_S(z)`.
    PaperLiteral,
    /// `ψ(En) = En_G(x) ∩ En_S(z)`.
    PlantAware,
    /// Controllable events: `ψ(En) ∩ Σ_c = En_G(x) ∩ En_S(z) ∩ Σ_c`;
    /// uncontrollable ones the plant enables may not be blocked.
    #[default]
    ActuatorPreserving,
}

impl FromStr for FeasibilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(FeasibilityMode::PaperLiteral),
            "plant-aware" => Ok(FeasibilityMode::PlantAware),
            "actuator-preserving" => Ok(FeasibilityMode::ActuatorPreserving),
            other => Err(Error::Config(format!(
                "unknown feasibility mode `{other}` (expected paper-literal, plant-aware or actuator-preserving)"
            ))),
        }
    }
}

impl fmt::Display for FeasibilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeasibilityMode::PaperLiteral => "paper-literal",
            FeasibilityMode::PlantAware => "plant-aware",
            FeasibilityMode::ActuatorPreserving => "actuator-preserving",
        })
    }
}

/// What the attacker may do.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackSpec {
    pub n: usize,
    /// Protected events, on top of those flagged in the alphabet.
    pub protected: BTreeSet<Symbol>,
    pub relation: AlterationRelation,
    pub feasibility_mode: FeasibilityMode,
}

impl AttackSpec {
    pub fn new(n: usize, protected: BTreeSet<Symbol>, relation: AlterationRelation) -> Self {
        AttackSpec {
            n,
            protected,
            relation,
            feasibility_mode: FeasibilityMode::default(),
        }
    }

    /// Every observable event may be replaced by any string of `Δn`.
    pub fn full(alphabet: &Alphabet, n: usize) -> Result<Self> {
        Ok(AttackSpec::new(n, BTreeSet::new(), AlterationRelation::full(alphabet, n)?))
    }

    pub fn with_protected(mut self, protected: BTreeSet<Symbol>) -> Self {
        self.protected = protected;
        self
    }

    pub fn with_mode(mut self, mode: FeasibilityMode) -> Self {
        self.feasibility_mode = mode;
        self
    }

    /// Protected set in force against `alphabet`.
    pub fn effective_protected(&self, alphabet: &Alphabet) -> BTreeSet<Symbol> {
        let mut out = alphabet.protected();
        out.extend(self.protected.iter().cloned());
        out
    }

    /// Relation with protected events stripped of alterations, so that the
    /// same relation can be reused for every protected set.
    pub fn relation_for(&self, alphabet: &Alphabet) -> AlterationRelation {
        self.relation.restricted_to_unprotected(&self.effective_protected(alphabet))
    }

    pub fn build_a0(&self, alphabet: &Alphabet) -> Result<Transducer> {
        let protected = self.effective_protected(alphabet);
        for e in &protected {
            if !alphabet.is_observable(e) {
                return Err(Error::Validation(format!("protected event `{e}` is not observable")));
            }
        }
        build_a0(alphabet, self.n, &protected, &self.relation)
    }
}

/// Strings of the impact reaching a bad plant marker: the impact re-marked
/// to its bad composites, trimmed.
pub fn build_damage_requirement(imp: &Transducer) -> Fsm<PairEvent> {
    let f = imp.fsm();
    f.remark(|s| f.is_bad(s) && !imp.is_dump(s)).trim()
}

/// How the enabled input set `en` at composite `(x, z)` relates to the
/// enablement of plant and supervisor.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Enablement {
    Consistent,
    /// Consistent once the moves on these inputs are dropped.
    Excess(BTreeSet<Symbol>),
    /// A required input is missing; no sub-attack can restore it.
    Missing,
}

fn enablement(
    en: &BTreeSet<Symbol>,
    x: StateId,
    z: StateId,
    plant: &Automaton,
    s: &Supervisor,
    mode: FeasibilityMode,
) -> Enablement {
    let en_g: BTreeSet<Symbol> = plant.fsm().transitions(x).keys().cloned().collect();
    let en_s: BTreeSet<Symbol> = s.fsm().transitions(z).keys().cloned().collect();
    let both = &en_g & &en_s;
    // Inputs the composite must enable, no more and no less.
    let target: BTreeSet<Symbol> = match mode {
        FeasibilityMode::PaperLiteral => en_s,
        FeasibilityMode::PlantAware => both,
        FeasibilityMode::ActuatorPreserving => {
            let ab = plant.alphabet();
            en_g.into_iter()
                .filter(|e| !ab.is_controllable(e) || both.contains(e))
                .collect()
        }
    };
    if !target.is_subset(en) {
        return Enablement::Missing;
    }
    let excess: BTreeSet<Symbol> = en.difference(&target).cloned().collect();
    if excess.is_empty() {
        Enablement::Consistent
    } else {
        Enablement::Excess(excess)
    }
}

/// Composite states of `imp` whose enabled inputs interfere with the
/// enablement of plant and supervisor. Moves into the dump count as enabled:
/// the plant can take them even though they reveal the attack.
pub fn check_feasibility(
    imp: &Transducer,
    plant: &Automaton,
    s: &Supervisor,
    mode: FeasibilityMode,
) -> Vec<StateId> {
    let f = imp.fsm();
    let reach = f.reachable();
    (0..f.num_states())
        .filter(|&c| reach[c] && !imp.is_dump(c))
        .filter(|&c| {
            let tag = imp.tag(c);
            let (Some(x), Some(z)) = (tag.plant, tag.supervisor) else {
                return false;
            };
            let en: BTreeSet<Symbol> = f.transitions(c).keys().map(|p| p.input.clone()).collect();
            enablement(&en, x, z, plant, s, mode) != Enablement::Consistent
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbsraIteration {
    pub sup_cn: IterationSummary,
    pub sup_cn_passes: usize,
    /// Recognizer states dropped for lacking an input they must enable.
    pub infeasible_removed: usize,
    /// Moves dropped for enabling an input they must not.
    pub transitions_cut: usize,
}

#[derive(Debug, Clone)]
pub struct AbsraOutcome {
    /// Supremal attack; empty when none exists.
    pub attack: Transducer,
    /// `G×(A₀∘S)`, the candidate generator.
    pub impact: Transducer,
    /// Requirement of the last iteration.
    pub requirement: Fsm<PairEvent>,
    /// Marked recognizer of the final `K`.
    pub language: Fsm<PairEvent>,
    pub iterations: usize,
    /// States of the initial candidate product `G×(A₀∘S)`.
    pub candidate_states: usize,
    pub trace: Vec<AbsraIteration>,
    /// Shortest damage string, pairs ordered by input then output.
    pub witness: Option<Vec<PairEvent>>,
    pub initial_requirement_empty: bool,
    pub supervisor_report: FeasibilityReport,
}

impl AbsraOutcome {
    pub fn is_empty(&self) -> bool {
        self.attack.is_empty()
    }
}

/// Supremal attack with bounded sensor reading alterations against `(g, s)`.
pub fn synthesize_absra(g: &Automaton, s: &Supervisor, spec: &AttackSpec) -> Result<AbsraOutcome> {
    let supervisor_report = check_supervisor_feasibility(s, g)?;
    let a0 = spec.build_a0(g.alphabet())?;
    let imp = impact(g, &seq_compose(&a0, s)?)?;
    let ctx = SynthesisContext::for_attack(&imp);
    let mut requirement = build_damage_requirement(&imp);
    let initial_requirement_empty = requirement.is_empty();
    let candidate_states = imp.num_states();
    let mut trace = Vec::new();
    let mut iterations = 0;
    // K_1 is computed even when the damage requirement is already empty.
    let (language, origin) = loop {
        iterations += 1;
        let k = sup_cn(&ctx, &requirement)?;
        let rec = &k.recognizer;
        let verdicts: Vec<Enablement> = (0..rec.num_states())
            .map(|r| {
                let tag = imp.tag(k.origin[r]);
                let (Some(x), Some(z)) = (tag.plant, tag.supervisor) else {
                    return Enablement::Consistent;
                };
                let en = rec.transitions(r).keys().map(|p| p.input.clone()).collect();
                enablement(&en, x, z, g, s, spec.feasibility_mode)
            })
            .collect();
        let removed = verdicts.iter().filter(|v| **v == Enablement::Missing).count();
        // Excess inputs cost only their own moves; a missing one the state.
        let mut next = rec.clone();
        let mut cut = 0;
        for (r, v) in verdicts.iter().enumerate() {
            if let Enablement::Excess(inputs) = v {
                let drop: Vec<PairEvent> = rec
                    .transitions(r)
                    .keys()
                    .filter(|p| inputs.contains(&p.input))
                    .cloned()
                    .collect();
                cut += drop.len();
                for p in drop {
                    next.remove_transition(r, &p);
                }
            }
        }
        trace.push(AbsraIteration {
            sup_cn: k.trace.iter().fold(IterationSummary::default(), |acc, t| IterationSummary {
                removed_controllability: acc.removed_controllability + t.removed_controllability,
                removed_normality: acc.removed_normality + t.removed_normality,
                removed_nonblocking: acc.removed_nonblocking + t.removed_nonblocking,
            }),
            sup_cn_passes: k.iterations,
            infeasible_removed: removed,
            transitions_cut: cut,
        });
        if removed == 0 && cut == 0 {
            break (k.recognizer, k.origin);
        }
        let keep: Vec<bool> = verdicts.iter().map(|v| *v != Enablement::Missing).collect();
        requirement = next.restrict(&keep).0.trim();
    };
    debug_assert!(
        iterations <= candidate_states.max(1),
        "fixed point took {iterations} iterations on {candidate_states} candidate states"
    );
    let closed = language.prefix_close();
    let closed_origin: Vec<StateId> = {
        // prefix_close keeps the reachable part in BFS order; rebuild the map.
        let (_, sub) = language.restrict(&language.reachable());
        sub.iter().map(|&r| origin[r]).collect()
    };
    let mut closed = closed;
    for (c, &o) in closed_origin.iter().enumerate() {
        closed.set_bad(c, imp.fsm().is_bad(o));
    }
    let attack = imp.derive(closed, &closed_origin);
    let witness = language.shortest_marked_word();
    Ok(AbsraOutcome {
        attack,
        impact: imp,
        requirement,
        language,
        iterations,
        candidate_states,
        trace,
        witness,
        initial_requirement_empty,
        supervisor_report,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

impl<W> Check<W> {
    fn from_counterexample(w: Option<W>) -> Self {
        Check {
            holds: w.is_none(),
            witness: w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsraReport {
    /// Outputs stay inside `L(S)`; witness is an output string outside it.
    pub covert: Check<Word>,
    /// Every closed-loop string extends to damage; witness is a plant string
    /// on one side of the equality only.
    pub damage_strong: Check<Word>,
    /// Some closed-loop string reaches a bad marker; witness is such a string.
    pub damage_weak: Check<Word>,
    /// Witness: a plant string observationally equivalent to a closed-loop
    /// string but not itself one.
    pub normal: Check<Word>,
    pub feasible: bool,
    /// Composite states `(x, y, z)` interfering with enablement.
    pub violations: Vec<(StateId, StateId, StateId)>,
    pub is_absra: bool,
}

impl fmt::Display for AbsraReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn line(f: &mut fmt::Formatter<'_>, name: &str, c: &Check<Word>) -> fmt::Result {
            match &c.witness {
                Some(w) => writeln!(f, "{name}: {} (witness: {})", c.holds, format_word(w)),
                None => writeln!(f, "{name}: {}", c.holds),
            }
        }
        line(f, "covert", &self.covert)?;
        line(f, "damage_strong", &self.damage_strong)?;
        line(f, "damage_weak", &self.damage_weak)?;
        line(f, "normal", &self.normal)?;
        writeln!(f, "feasible: {}", self.feasible)?;
        for (x, y, z) in &self.violations {
            writeln!(f, "  violation at plant={x} attack={y} supervisor={z}")?;
        }
        writeln!(f, "is_absra: {}", self.is_absra)
    }
}

/// Checks the four attack properties on `a` against `(g, s)` using only
/// language operations on automata and transducers.
pub fn verify_absra(a: &Transducer, g: &Automaton, s: &Supervisor, spec: &AttackSpec) -> Result<AbsraReport> {
    if a.is_empty() {
        return Err(Error::domain("cannot verify an empty attack", None));
    }
    // (1) θ(L(A)) ⊆ L(S).
    let out = output_automaton(a)?;
    let s_closed = s.automaton().prefix_close().into_fsm();
    let covert = Check::from_counterexample(out.fsm().prefix_close().find_word_not_in(&s_closed));

    let imp = impact(g, &seq_compose(a, s)?)?;
    let closed_loop = input_automaton(&imp)?.into_fsm().prefix_close();
    let gf = g.fsm();
    let damage = imp
        .fsm()
        .remark(|c| imp.tag(c).plant.is_some_and(|x| gf.is_bad(x) && gf.is_marked(x)))
        .project(|p| Some(p.input.clone()))?
        .trim();

    // (2) ψ(L(G×(A∘S))) = closure of ψ(L(A∘S)) ∩ bad-marked strings of G.
    let damage_closed = damage.prefix_close();
    let damage_strong = Check::from_counterexample(
        closed_loop
            .find_word_not_in(&damage_closed)
            .or_else(|| damage_closed.find_word_not_in(&closed_loop)),
    );
    let damage_weak = match damage.shortest_marked_word() {
        Some(w) => Check {
            holds: true,
            witness: Some(w),
        },
        None => Check {
            holds: false,
            witness: None,
        },
    };

    // (3) P_o⁻¹P_o(ψ(L)) ∩ L(G) = ψ(L).
    let normal = {
        let ab = g.alphabet();
        let loop_aut = Automaton::from_fsm(ab.clone(), closed_loop.clone())?;
        let lifted = loop_aut.project(&ab.observable())?.inverse_project(ab)?;
        let both = lifted.sync_product(&g.prefix_close())?;
        Check::from_counterexample(both.fsm().find_word_not_in(&closed_loop))
    };

    // (4) enablement.
    let bad_states = check_feasibility(&imp, g, s, spec.feasibility_mode);
    let violations: Vec<(StateId, StateId, StateId)> = bad_states
        .iter()
        .map(|&c| {
            let t = imp.tag(c);
            (t.plant.unwrap_or(0), t.attack.unwrap_or(0), t.supervisor.unwrap_or(0))
        })
        .collect();
    let feasible = violations.is_empty();
    let is_absra = covert.holds && damage_strong.holds && normal.holds && feasible;
    Ok(AbsraReport {
        covert,
        damage_strong,
        damage_weak,
        normal,
        feasible,
        violations,
        is_absra,
    })
}

/// Verifies `a1 ∪ a2` after checking that both operands pass on their own.
pub fn union_preserves_absra_check(
    a1: &Transducer,
    a2: &Transducer,
    g: &Automaton,
    s: &Supervisor,
    spec: &AttackSpec,
) -> Result<AbsraReport> {
    for (name, a) in [("first", a1), ("second", a2)] {
        let r = verify_absra(a, g, s, spec)?;
        if !r.is_absra {
            return Err(Error::domain(format!("{name} operand is not an attack of the required kind"), None));
        }
    }
    verify_absra(&union(a1, a2)?, g, s, spec)
}

/// Human-readable witness: pairs, plant string and observed string.
pub fn describe_witness(w: &[PairEvent]) -> String {
    format!(
        "{}\n  plant:    {}\n  observed: {}",
        format_pairs(w),
        format_word(&crate::transducer::psi(w)),
        format_word(&crate::transducer::theta(w))
    )
}
