//! Supervisors no bounded-alteration attack can defeat, and the search for a
//! smallest set of sensor events to protect.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::alphabet::Symbol;
use crate::attack::{synthesize_absra, AbsraOutcome, AttackSpec};
use crate::automaton::{Automaton, Supervisor};
use crate::error::{Error, Result};
use crate::fsm::Fsm;
use crate::synthesis::{sup_cn, SynthesisContext};
use crate::transducer::{output_automaton, Transducer};

/// How the observed attack strings are cut out of the unattacked behavior.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum DifferenceMode {
    /// `L(Ŝ) − θ(K)Σ*`: every string continuing an observed damage string.
    #[default]
    Extensions,
    /// `L(Ŝ) − θ(K)`, the plain set difference.
    Literal,
    /// `L(Ŝ) − P_o⁻¹(θ(K))Σ*`, for partially observed plants.
    Lifted,
}

impl FromStr for DifferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extensions" => Ok(DifferenceMode::Extensions),
            "literal" => Ok(DifferenceMode::Literal),
            "lifted" => Ok(DifferenceMode::Lifted),
            other => Err(Error::Config(format!(
                "unknown difference mode `{other}` (expected extensions, literal or lifted)"
            ))),
        }
    }
}

impl fmt::Display for DifferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DifferenceMode::Extensions => "extensions",
            DifferenceMode::Literal => "literal",
            DifferenceMode::Lifted => "lifted",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RobustOutcome {
    /// Empty when no robust supervisor exists.
    pub supervisor: Supervisor,
    /// Recognizer of the final `K`.
    pub language: Automaton,
    pub hat_supervisor: Supervisor,
    pub hat_language: Automaton,
    /// Observed damage strings `θ(K_k)` of the attack against `Ŝ`.
    pub attack_language: Automaton,
    /// The supremal attack against the returned supervisor was recomputed
    /// and found empty.
    pub residual_attack_empty: bool,
    /// Fixed-point iterations of the attack synthesis against `Ŝ`.
    pub attack_iterations: usize,
    /// Removal rounds performed.
    pub rounds: usize,
}

impl RobustOutcome {
    pub fn is_empty(&self) -> bool {
        self.supervisor.is_empty()
    }
}

pub const DEFAULT_MAX_ROUNDS: usize = 64;

/// `sup𝒞𝒩(G, E)` with `E` lifted to the plant alphabet, together with the
/// supervisor realizing its closure.
pub fn unconstrained_supervisor(g: &Automaton, e: &Automaton) -> Result<(Automaton, Supervisor)> {
    let lifted = e.inverse_project(g.alphabet())?;
    let k = sup_cn(&SynthesisContext::for_plant(g), lifted.fsm())?;
    let language = Automaton::from_fsm(g.alphabet().clone(), k.recognizer)?;
    let s = Supervisor::new(language.prefix_close());
    Ok((language, s))
}

/// `θ(K)Σ*` over `sigma`: marked states of the observed-damage recognizer
/// become a universal sink.
fn extensions(damage: &Fsm<Symbol>, sigma: &BTreeSet<Symbol>) -> Result<Fsm<Symbol>> {
    let mut out = Fsm::empty();
    let Some(init) = damage.initial() else {
        return Ok(out);
    };
    for s in 0..damage.num_states() {
        out.add_state(damage.name(s), damage.is_marked(s));
    }
    out.set_initial(init)?;
    let sink = out.add_state("⊤", true);
    for e in sigma {
        out.add_transition(sink, e.clone(), sink)?;
    }
    for s in 0..damage.num_states() {
        if damage.is_marked(s) {
            for e in sigma {
                out.add_transition(s, e.clone(), sink)?;
            }
        } else {
            for (e, &t) in damage.transitions(s) {
                out.add_transition(s, e.clone(), t)?;
            }
        }
    }
    Ok(out.accessible())
}

/// Robust supervisor synthesis against attacks described by `spec`.
pub fn synthesize_robust(
    g: &Automaton,
    e: &Automaton,
    spec: &AttackSpec,
    mode: DifferenceMode,
) -> Result<RobustOutcome> {
    synthesize_robust_with(g, e, spec, mode, DEFAULT_MAX_ROUNDS)
}

/// As [`synthesize_robust`], with an explicit bound on the number of
/// removal rounds. One round is the plain single-pass procedure; further
/// rounds repeat the removal against the previous result for as long as an
/// attack against it survives.
pub fn synthesize_robust_with(
    g: &Automaton,
    e: &Automaton,
    spec: &AttackSpec,
    mode: DifferenceMode,
    max_rounds: usize,
) -> Result<RobustOutcome> {
    let (hat_language, hat) = unconstrained_supervisor(g, e)?;
    robust_against(g, &hat_language, &hat, spec, mode, max_rounds.max(1))
}

/// Steps after `Ŝ` is known; shared by the subset search.
fn robust_against(
    g: &Automaton,
    hat_language: &Automaton,
    hat: &Supervisor,
    spec: &AttackSpec,
    mode: DifferenceMode,
    max_rounds: usize,
) -> Result<RobustOutcome> {
    let ab = g.alphabet();
    let empty = |attack_language: Automaton, attack_iterations| RobustOutcome {
        supervisor: Supervisor::new(Automaton::empty(ab.clone())),
        language: Automaton::empty(ab.clone()),
        hat_supervisor: hat.clone(),
        hat_language: hat_language.clone(),
        attack_language,
        residual_attack_empty: true,
        attack_iterations,
        rounds: 0,
    };
    if hat.is_empty() {
        return Ok(empty(Automaton::empty(ab.restrict(&ab.observable())), 0));
    }

    let sigma: BTreeSet<Symbol> = ab.symbols().cloned().collect();
    let ctx = SynthesisContext::for_plant(g);
    let observe = |attack: &AbsraOutcome| -> Result<Automaton> {
        let damage = Transducer::new(attack.impact.alphabet().clone(), spec.n, attack.language.clone())?;
        output_automaton(&damage)
    };
    let mut current = hat.clone();
    let mut attack = synthesize_absra(g, hat, spec)?;
    let attack_language = observe(&attack)?;
    let attack_iterations = attack.iterations;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let observed = observe(&attack)?;
        let removed = match mode {
            DifferenceMode::Literal => observed.fsm().trim(),
            DifferenceMode::Extensions => extensions(&observed.fsm().trim(), &sigma)?,
            DifferenceMode::Lifted => extensions(&observed.inverse_project(ab)?.fsm().trim(), &sigma)?,
        };
        let allowed = current.fsm().prefix_close().difference(&removed);
        let k = sup_cn(&ctx, &allowed)?;
        if k.is_empty() {
            let mut out = empty(attack_language, attack_iterations);
            out.rounds = rounds;
            return Ok(out);
        }
        let language = Automaton::from_fsm(ab.clone(), k.recognizer)?;
        let candidate = Supervisor::new(language.prefix_close());
        // Never assumed: the attack against the result is recomputed.
        let residual = synthesize_absra(g, &candidate, spec)?;
        if residual.is_empty() || rounds >= max_rounds {
            return Ok(RobustOutcome {
                supervisor: candidate,
                language,
                hat_supervisor: hat.clone(),
                hat_language: hat_language.clone(),
                attack_language,
                residual_attack_empty: residual.is_empty(),
                attack_iterations,
                rounds,
            });
        }
        current = candidate;
        attack = residual;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetTrial {
    pub protected: Vec<Symbol>,
    pub supervisor_nonempty: bool,
    pub residual_attack_empty: bool,
    pub supervisor_states: usize,
}

impl SubsetTrial {
    pub fn succeeded(&self) -> bool {
        self.supervisor_nonempty && self.residual_attack_empty
    }
}

#[derive(Debug, Clone)]
pub struct MinProtectOutcome {
    /// `None` when not even protecting every observable event helps.
    pub protected_set: Option<Vec<Symbol>>,
    pub supervisor: Option<Supervisor>,
    pub subsets_examined: usize,
    pub trace: Vec<SubsetTrial>,
}

/// Index combinations of size `k` out of `n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Smallest protected set admitting a robust supervisor.
///
/// Subsets of the observable events are tried by increasing size; within a
/// size, in lexicographic order of the events' declaration positions. Every
/// subset of the first size that works is evaluated, and the one whose
/// supervisor is most permissive wins (ties and incomparable languages go to
/// the earliest subset). Events already protected in `spec_base` stay
/// protected.
pub fn min_protected(
    g: &Automaton,
    e: &Automaton,
    spec_base: &AttackSpec,
    mode: DifferenceMode,
) -> Result<MinProtectOutcome> {
    let (hat_language, hat) = unconstrained_supervisor(g, e)?;
    let already = spec_base.effective_protected(g.alphabet());
    let candidates: Vec<Symbol> = g
        .alphabet()
        .observable_in_order()
        .into_iter()
        .filter(|s| !already.contains(s))
        .collect();
    let mut trace = Vec::new();
    for size in 0..=candidates.len() {
        let mut found: Vec<(Vec<Symbol>, Supervisor)> = Vec::new();
        for combo in combinations(candidates.len(), size) {
            let chosen: Vec<Symbol> = combo.iter().map(|&i| candidates[i].clone()).collect();
            let mut protected = spec_base.protected.clone();
            protected.extend(chosen.iter().cloned());
            let spec = AttackSpec {
                relation: spec_base.relation.restricted_to_unprotected(&protected),
                protected,
                ..spec_base.clone()
            };
            let out = robust_against(g, &hat_language, &hat, &spec, mode, DEFAULT_MAX_ROUNDS)?;
            let trial = SubsetTrial {
                protected: chosen.clone(),
                supervisor_nonempty: !out.is_empty(),
                residual_attack_empty: out.residual_attack_empty,
                supervisor_states: out.supervisor.automaton().num_states(),
            };
            if trial.succeeded() {
                found.push((chosen, out.supervisor));
            }
            trace.push(trial);
        }
        let strictly_below = |i: usize, j: usize| {
            let (a, b) = (found[i].1.fsm(), found[j].1.fsm());
            a.marked_subset_of(b) && !b.marked_subset_of(a)
        };
        if let Some(best) = (0..found.len()).find(|&i| !(0..found.len()).any(|j| strictly_below(i, j))) {
            let (set, supervisor) = found.swap_remove(best);
            return Ok(MinProtectOutcome {
                protected_set: Some(set),
                supervisor: Some(supervisor),
                subsets_examined: trace.len(),
                trace,
            });
        }
    }
    Ok(MinProtectOutcome {
        protected_set: None,
        supervisor: None,
        subsets_examined: trace.len(),
        trace,
    })
}
