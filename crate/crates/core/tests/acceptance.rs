//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, followed by
//! the measured figures. Tolerances are pinned in the constants below.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use des_attack::attack::{
    build_damage_requirement, synthesize_absra, union_preserves_absra_check, verify_absra, AbsraOutcome,
    AttackSpec,
};
use des_attack::io::fixtures;
use des_attack::robust::{min_protected, synthesize_robust, DifferenceMode, RobustOutcome};
use des_attack::synthesis::{brute_force_sup_cn, sup_cn, SynthesisContext};
use des_attack::transducer::{
    canonicalize, impact, input_automaton, seq_compose, union, AlterationRelation,
};
use des_attack::{Automaton, Error, Supervisor, Transducer};

const TANK_LIMIT: Duration = Duration::from_secs(5);
const MIN_PROTECT_LIMIT: Duration = Duration::from_secs(30);
const ORACLE_LIMIT: Duration = Duration::from_secs(120);

const COMPOSITION_INSTANCES: usize = 200;
const COMPOSITION_MAX_LEN: usize = 10;
const THEOREM_INSTANCES: usize = 50;
const EXHAUSTIVE_TRANSITIONS: usize = 10;
const SAMPLED_CANDIDATES: usize = 300;
const UNION_PAIRS: usize = 40;
/// Enumeration depth of the containment cross-check.
const ORACLE_DEPTH: usize = 5;
const ORACLE_INSTANCES: usize = 200;
const ROBUST_INSTANCES: usize = 60;

/// Facts gathered from every synthesis run, for the cross-suite criteria.
#[derive(Default)]
struct Runs {
    absra_runs: usize,
    lemma1_violations: Vec<String>,
    lemma2_checked: usize,
    lemma2_violations: Vec<String>,
    robust_nonempty: usize,
    theorem3_violations: Vec<String>,
    inclusion_violations: Vec<String>,
    literal_nonempty: usize,
    literal_residual: usize,
}

impl Runs {
    fn absra(&mut self, label: &str, g: &Automaton, s: &Supervisor, spec: &AttackSpec) -> AbsraOutcome {
        let out = synthesize_absra(g, s, spec).expect("synthesis");
        self.record(label, g, s, &out);
        out
    }

    fn record(&mut self, label: &str, g: &Automaton, s: &Supervisor, out: &AbsraOutcome) {
        self.absra_runs += 1;
        if out.iterations > out.candidate_states.max(1) {
            self.lemma1_violations.push(format!(
                "{label}: {} iterations on {} candidate states",
                out.iterations, out.candidate_states
            ));
        }
        if out.is_empty() {
            return;
        }
        // Re-running the synthesis over G×(A*∘S) reproduces its damage language.
        let imp = impact(g, &seq_compose(&out.attack, s).unwrap()).unwrap();
        let damage = build_damage_requirement(&imp);
        let again = sup_cn(&SynthesisContext::for_attack(&imp), &damage).unwrap();
        self.lemma2_checked += 1;
        if !again.recognizer.equivalent(&damage) || !damage.equivalent(&out.language) {
            self.lemma2_violations.push(label.to_string());
        }
    }

    fn robust(
        &mut self,
        label: &str,
        g: &Automaton,
        e: &Automaton,
        spec: &AttackSpec,
        mode: DifferenceMode,
    ) -> RobustOutcome {
        let out = synthesize_robust(g, e, spec, mode).expect("robust synthesis");
        self.check_robust(label, g, e, spec, mode, &out);
        out
    }

    fn check_robust(
        &mut self,
        label: &str,
        g: &Automaton,
        e: &Automaton,
        spec: &AttackSpec,
        mode: DifferenceMode,
        out: &RobustOutcome,
    ) {
        if out.is_empty() {
            return;
        }
        // Theorem 3 is re-established from scratch, not read off the outcome.
        let residual = self.absra(&format!("{label} residual"), g, &out.supervisor, spec);
        if mode == DifferenceMode::Literal {
            self.literal_nonempty += 1;
            if !residual.is_empty() {
                self.literal_residual += 1;
            }
            return;
        }
        self.robust_nonempty += 1;
        if !residual.is_empty() {
            self.theorem3_violations.push(label.to_string());
        }
        let ge = g.sync_product(&e.inverse_project(g.alphabet()).unwrap()).unwrap();
        if !out.language.fsm().marked_subset_of(out.hat_language.fsm())
            || !out.hat_language.fsm().marked_subset_of(ge.fsm())
        {
            self.inclusion_violations.push(label.to_string());
        }
    }
}

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn level_spec(protected: &[&str]) -> AttackSpec {
    let protected = syms(protected);
    let rel = fixtures::tank_level_relation().restricted_to_unprotected(&protected);
    AttackSpec::new(1, protected, rel)
}

fn criterion_1(runs: &mut Runs) -> Verdict {
    let (g, s) = (fixtures::tank_plant(), fixtures::tank_supervisor());
    let spec = level_spec(&[]);
    let start = Instant::now();
    let out = runs.absra("tank", &g, &s, &spec);
    if out.is_empty() {
        return Err("empty attack".into());
    }
    let report = verify_absra(&out.attack, &g, &s, &spec).unwrap();
    let canonical = canonicalize(&g, &spec.build_a0(g.alphabet()).unwrap(), &s).unwrap();
    let equal = out.attack.fsm().closed_equivalent(canonical.fsm());
    let elapsed = start.elapsed();

    let levels = syms(&fixtures::LEVELS);
    let hl = sym("h=L");
    let witness_ok = out.witness.as_ref().is_some_and(|w| {
        psi(w).last() == Some(&sym("h=EH"))
            && s.fsm().accepts_prefix(&theta(w))
            && w.iter()
                .filter(|p| levels.contains(&p.input))
                .all(|p| p.output.events() == [hl.clone()])
    });
    let detail = format!(
        "is_absra={} witness_ok={} canonical_equal={} states={} iterations={} time={:.2?}",
        report.is_absra,
        witness_ok,
        equal,
        out.attack.num_states(),
        out.iterations,
        elapsed
    );
    check(report.is_absra && witness_ok && equal && elapsed < TANK_LIMIT, detail)
}

fn criterion_2(runs: &mut Runs) -> Verdict {
    let (g, s, e) = (fixtures::tank_plant(), fixtures::tank_supervisor(), fixtures::tank_requirement());
    let spec = level_spec(&["h=H"]);
    let start = Instant::now();
    let out = runs.absra("tank protect h=H", &g, &s, &spec);
    let robust = runs.robust("tank protect h=H", &g, &e, &spec, DifferenceMode::default());
    let elapsed = start.elapsed();
    let same = robust.language.fsm().equivalent(robust.hat_language.fsm());
    let detail = format!(
        "E0_empty={} attack_empty={} iterations={} robust_nonempty={} equals_hat={} time={:.2?}",
        out.initial_requirement_empty,
        out.is_empty(),
        out.iterations,
        !robust.is_empty(),
        same,
        elapsed
    );
    check(
        out.initial_requirement_empty
            && out.is_empty()
            && out.iterations == 1
            && !robust.is_empty()
            && same
            && elapsed < TANK_LIMIT,
        detail,
    )
}

fn criterion_3(runs: &mut Runs) -> Verdict {
    let (g, e) = (fixtures::tank_plant(), fixtures::tank_requirement());
    let base = AttackSpec::full(g.alphabet(), 1).unwrap();
    let start = Instant::now();
    let out = min_protected(&g, &e, &base, DifferenceMode::default()).unwrap();
    let elapsed = start.elapsed();
    let found: Option<Vec<&str>> = out.protected_set.as_ref().map(|v| v.iter().map(|s| s.as_str()).collect());
    let first_empty_failed = out
        .trace
        .first()
        .is_some_and(|t| t.protected.is_empty() && !t.succeeded());
    let size = found.as_ref().map_or(0, |f| f.len());
    let smaller_all_failed = out.trace.iter().filter(|t| t.protected.len() < size).all(|t| !t.succeeded());
    if let Some(s) = &out.supervisor {
        // The chosen supervisor must itself leave no attack.
        let protected = syms(&found.clone().unwrap_or_default());
        let spec = AttackSpec::new(1, protected.clone(), base.relation.restricted_to_unprotected(&protected));
        let residual = runs.absra("min-protect residual", &g, s, &spec);
        runs.robust_nonempty += 1;
        if !residual.is_empty() {
            runs.theorem3_violations.push("min-protect".into());
        }
    }
    let detail = format!(
        "protected={:?} subsets_examined={} empty_set_first_and_failed={} time={:.2?}",
        found, out.subsets_examined, first_empty_failed, elapsed
    );
    check(
        found == Some(vec!["h=H"]) && first_empty_failed && smaller_all_failed && elapsed < MIN_PROTECT_LIMIT,
        detail,
    )
}

fn criterion_4() -> Verdict {
    let mut violations: Vec<String> = Vec::new();
    let mut strings = 0usize;
    let mut nonempty_impacts = 0usize;
    let len = COMPOSITION_MAX_LEN;
    for seed in 0..COMPOSITION_INSTANCES as u64 {
        let r = &mut rng(0xC0_0000 + seed);
        let sh = COMPOSITION;
        let ab = alphabet(r, sh.events);
        let g = plant(r, &ab, sh.plant_states, sh.density);
        let s = supervisor(r, &ab, sh.supervisor_states, sh.density);
        let a1 = attack(r, &ab, sh.attack_states, sh.density);
        let a2 = attack(r, &ab, sh.attack_states, sh.density);
        let a_sub = sub_attack(r, &a2, 0.6);
        let mut fail = |what: &str| violations.push(format!("seed {seed}: {what}"));

        let c1 = seq_compose(&a1, &s).unwrap();
        let (o_closed, o_marked) = composition_languages(&a1, &s, len);
        strings += o_closed.len();
        if closed(c1.fsm(), len) != o_closed || marked(c1.fsm(), len) != o_marked {
            fail("A∘S differs from the step-by-step oracle");
        }
        // Prop. 0(1): θ(L_m(A∘S)) ⊆ L_m(S).
        if o_marked.iter().any(|w| !s.fsm().accepts(&theta(w))) {
            fail("Prop 0(1)");
        }
        // Prop. 0(2): L_m(A∘S) ⊆ L_m(A).
        if o_marked.iter().any(|w| !a1.fsm().accepts(w)) {
            fail("Prop 0(2)");
        }
        // Prop. 0(3): ψ(L(G×(A∘S))) = ψ(L(A∘S)) ∩ L(G).
        let imp = impact(&g, &c1).unwrap();
        if imp.num_states() > 1 {
            nonempty_impacts += 1;
        }
        let lhs = closed(input_automaton(&imp).unwrap().fsm(), len);
        let lhs_direct: BTreeSet<_> = closed(imp.fsm(), len).iter().map(|w| psi(w)).collect();
        let rhs: BTreeSet<_> = o_closed
            .iter()
            .map(|w| psi(w))
            .filter(|w| g.fsm().accepts_prefix(w))
            .collect();
        if lhs != rhs || lhs_direct != rhs {
            fail("Prop 0(3)");
        }
        // Prop. 1: L(A') ⊆ L(A) ⇒ L(A'∘S) ⊆ L(A∘S).
        if !a_sub.fsm().prefix_close().marked_subset_of(&a2.fsm().prefix_close()) {
            fail("generated sub-attack is not a sublanguage");
        }
        let (sub_closed, _) = composition_languages(&a_sub, &s, len);
        let (a2_closed, a2_marked) = composition_languages(&a2, &s, len);
        let c_sub = seq_compose(&a_sub, &s).unwrap();
        let c2 = seq_compose(&a2, &s).unwrap();
        if !sub_closed.is_subset(&a2_closed)
            || !c_sub.fsm().prefix_close().marked_subset_of(&c2.fsm().prefix_close())
        {
            fail("Prop 1");
        }
        // Prop. 2: L((A1∪A2)∘S) = L(A1∘S) ∪ L(A2∘S).
        let u = union(&a1, &a2).unwrap();
        let cu = seq_compose(&u, &s).unwrap();
        let want_closed: BTreeSet<_> = o_closed.union(&a2_closed).cloned().collect();
        let want_marked: BTreeSet<_> = o_marked.union(&a2_marked).cloned().collect();
        if closed(cu.fsm(), len) != want_closed || marked(cu.fsm(), len) != want_marked {
            fail("Prop 2");
        }
    }
    let detail = format!(
        "instances={COMPOSITION_INSTANCES} max_len={len} composed_strings={strings} nontrivial_impacts={nonempty_impacts} violations={}{}",
        violations.len(),
        violations.first().map(|v| format!(" first: {v}")).unwrap_or_default()
    );
    check(violations.is_empty(), detail)
}

/// Candidate attacks: sub-transducers of `Prefix(G×(A₀∘S))`, each also cut
/// down to the strings that can still reach damage.
fn candidates(r: &mut Rng8, base: &Transducer) -> Vec<Transducer> {
    let edges: Vec<_> = base.fsm().edges().map(|(s, p, _)| (s, p.clone())).collect();
    let subsets: Vec<BTreeSet<usize>> = if edges.len() <= EXHAUSTIVE_TRANSITIONS {
        (0u32..1 << edges.len())
            .map(|m| (0..edges.len()).filter(|i| m & (1 << i) != 0).collect())
            .collect()
    } else {
        use rand::Rng;
        (0..SAMPLED_CANDIDATES)
            .map(|_| {
                let keep = r.gen_range(0.3..1.0);
                (0..edges.len()).filter(|_| r.gen_bool(keep)).collect()
            })
            .collect()
    };
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for keep in subsets {
        let sub = base.sub_transducer(|s, p, _| {
            edges
                .iter()
                .position(|(es, ep)| *es == s && ep == p)
                .is_some_and(|i| keep.contains(&i))
        });
        let damaging = sub.mark_only(|c| sub.fsm().is_bad(c)).trim().prefix();
        for t in [sub, damaging] {
            if t.is_empty() {
                continue;
            }
            let key: BTreeSet<String> = t
                .fsm()
                .edges()
                .map(|(s, p, d)| format!("{:?}{p}{:?}", t.tag(s), t.tag(d)))
                .collect();
            if seen.insert(key) {
                out.push(t);
            }
        }
    }
    out
}

fn criterion_5(runs: &mut Runs) -> Verdict {
    let mut violations: Vec<String> = Vec::new();
    let (mut nonempty, mut examined, mut passing_total, mut unions) = (0, 0, 0, 0);
    let mut seed = 0u64;
    // Instances without any attack make both claims vacuous; draw until
    // enough have a nonempty supremal attack.
    while nonempty < THEOREM_INSTANCES && seed < 40 * THEOREM_INSTANCES as u64 {
        seed += 1;
        let r = &mut rng(0x7E_0000 + seed);
        let sh = TINY;
        let ab = alphabet(r, sh.events);
        let g = plant(r, &ab, sh.plant_states, sh.density);
        let s = supervisor(r, &ab, sh.supervisor_states, sh.density);
        let spec = spec(r, &ab);
        let out = runs.absra(&format!("theorem seed {seed}"), &g, &s, &spec);
        // An attack without transitions only covers damage at ε.
        if out.is_empty() || out.attack.fsm().num_transitions() == 0 {
            continue;
        }
        nonempty += 1;
        let base = out.impact.prefix();
        let mut passing = Vec::new();
        for t in candidates(r, &base) {
            examined += 1;
            if verify_absra(&t, &g, &s, &spec).unwrap().is_absra {
                passing.push(t);
            }
        }
        passing_total += passing.len();
        let star = out.attack.fsm().prefix_close();
        for t in &passing {
            let inside = t.fsm().prefix_close().marked_subset_of(&star)
                && closed(t.fsm(), ORACLE_DEPTH).is_subset(&closed(&star, ORACLE_DEPTH));
            if !inside {
                violations.push(format!("seed {seed}: passing attack outside L(A*)"));
            }
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..passing.len() {
            for j in i + 1..passing.len() {
                pairs.push((i, j));
            }
        }
        use rand::seq::SliceRandom;
        pairs.shuffle(r);
        for &(i, j) in pairs.iter().take(UNION_PAIRS) {
            unions += 1;
            match union_preserves_absra_check(&passing[i], &passing[j], &g, &s, &spec) {
                Ok(rep) if rep.is_absra => {}
                Ok(_) => violations.push(format!("seed {seed}: union of passing attacks fails")),
                Err(e) => violations.push(format!("seed {seed}: {e}")),
            }
        }
    }
    let detail = format!(
        "instances_with_attack={nonempty} drawn={seed} candidates={examined} passing={passing_total} unions={unions} violations={}{}",
        violations.len(),
        violations.first().map(|v| format!(" first: {v}")).unwrap_or_default()
    );
    check(violations.is_empty() && nonempty >= THEOREM_INSTANCES && passing_total > 0, detail)
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let (mut accepted, mut skipped, mut nonempty) = (0usize, 0usize, 0usize);
    let mut violations = Vec::new();
    let mut seed = 0u64;
    while accepted < ORACLE_INSTANCES && seed < 20 * ORACLE_INSTANCES as u64 {
        let r = &mut rng(0x5C_0000 + seed);
        seed += 1;
        let ab = alphabet(r, 3);
        let g = plant(r, &ab, 4, 0.5);
        let e = requirement(r, &ab, 3, 0.6);
        let ctx = SynthesisContext::for_plant(&g);
        let brute = match brute_force_sup_cn(&ctx, e.fsm()) {
            Ok(b) => b,
            Err(Error::Domain { .. }) => {
                skipped += 1;
                continue;
            }
            Err(err) => return Err(format!("seed {seed}: {err}")),
        };
        accepted += 1;
        let k = sup_cn(&ctx, e.fsm()).unwrap();
        if !k.is_empty() {
            nonempty += 1;
        }
        if !k.recognizer.equivalent(&brute) {
            violations.push(format!("seed {}", seed - 1));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "instances={accepted} nonempty={nonempty} skipped_over_cap={skipped} violations={} time={elapsed:.2?}{}",
        violations.len(),
        violations.first().map(|v| format!(" first: {v}")).unwrap_or_default()
    );
    check(
        violations.is_empty() && accepted >= ORACLE_INSTANCES && elapsed < ORACLE_LIMIT,
        detail,
    )
}

/// Extra Procedure 2 runs feeding criteria 7 and 8.
fn robust_suite(runs: &mut Runs) {
    let (g, e) = (fixtures::tank_plant(), fixtures::tank_requirement());
    let full = AlterationRelation::full(g.alphabet(), 1).unwrap();
    let mut sets: Vec<Vec<&str>> = vec![vec![]];
    sets.extend(fixtures::LEVELS.iter().chain(&fixtures::VALVE).map(|e| vec![*e]));
    for set in &sets {
        let protected = syms(set);
        for (name, rel) in [("full", &full), ("levels", &fixtures::tank_level_relation())] {
            let spec = AttackSpec::new(1, protected.clone(), rel.restricted_to_unprotected(&protected));
            for mode in [DifferenceMode::Extensions, DifferenceMode::Lifted, DifferenceMode::Literal] {
                runs.robust(&format!("tank {set:?} {name} {mode}"), &g, &e, &spec, mode);
            }
        }
    }
    for seed in 0..ROBUST_INSTANCES as u64 {
        let r = &mut rng(0x3B_0000 + seed);
        let ab = alphabet(r, 3);
        let g = plant(r, &ab, 4, 0.5);
        let e = requirement(r, &ab, 3, 0.7);
        let spec = spec(r, &ab);
        for mode in [DifferenceMode::Extensions, DifferenceMode::Lifted] {
            runs.robust(&format!("random seed {seed} {mode}"), &g, &e, &spec, mode);
        }
    }
}

fn criterion_7(runs: &Runs) -> Verdict {
    let detail = format!(
        "synthesis_runs={} lemma1_violations={} lemma2_checked={} lemma2_violations={}{}",
        runs.absra_runs,
        runs.lemma1_violations.len(),
        runs.lemma2_checked,
        runs.lemma2_violations.len(),
        runs.lemma1_violations
            .iter()
            .chain(&runs.lemma2_violations)
            .next()
            .map(|v| format!(" first: {v}"))
            .unwrap_or_default()
    );
    check(
        runs.lemma1_violations.is_empty() && runs.lemma2_violations.is_empty() && runs.lemma2_checked > 0,
        detail,
    )
}

fn criterion_8(runs: &Runs) -> Verdict {
    let detail = format!(
        "nonempty_robust_outputs={} residual_attack_nonempty={} inclusion_violations={} (literal difference, not default: {} of {} nonempty outputs keep an attack){}",
        runs.robust_nonempty,
        runs.theorem3_violations.len(),
        runs.inclusion_violations.len(),
        runs.literal_residual,
        runs.literal_nonempty,
        runs.theorem3_violations
            .iter()
            .chain(&runs.inclusion_violations)
            .next()
            .map(|v| format!(" first: {v}"))
            .unwrap_or_default()
    );
    check(
        runs.theorem3_violations.is_empty() && runs.inclusion_violations.is_empty() && runs.robust_nonempty > 0,
        detail,
    )
}

fn report(id: usize, title: &str, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(p) => Err(format!(
            "panicked: {}",
            p.downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| p.downcast_ref::<&str>().copied())
                .unwrap_or("?")
        )),
    };
    let (tag, detail) = match &verdict {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    // Straight to stdout so the lines show up without --nocapture.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {id}: {title} — {detail} ({:.1?})", start.elapsed());
    verdict.is_ok()
}

#[test]
fn acceptance_criteria() {
    let mut runs = Runs::default();
    let mut results = Vec::new();
    results.push(report(1, "tank attack synthesis", || criterion_1(&mut runs)));
    results.push(report(2, "tank protection of h=H", || criterion_2(&mut runs)));
    results.push(report(3, "minimum protection", || criterion_3(&mut runs)));
    results.push(report(4, "composition laws", criterion_4));
    results.push(report(5, "supremal attack and union closure", || criterion_5(&mut runs)));
    results.push(report(6, "supCN oracle equivalence", criterion_6));
    let suite = catch_unwind(AssertUnwindSafe(|| robust_suite(&mut runs)));
    results.push(report(7, "iteration bound and fixed point", || {
        suite.as_ref().map_err(|_| "robust suite panicked".to_string())?;
        criterion_7(&runs)
    }));
    results.push(report(8, "robust supervisors leave no attack", || criterion_8(&runs)));
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
