//! The bundled fixture files stay in sync with the in-code builders.

use std::fs;
use std::path::PathBuf;

use des_attack::io::{emit_model, fixtures, parse_model, parse_relation, ModelFile};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tank").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// File text without leading comment lines.
fn body(text: &str) -> String {
    text.lines()
        .skip_while(|l| l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn automaton_fixtures_match_builders() {
    let cases = [
        ("plant.des", fixtures::tank_plant()),
        ("supervisor.des", fixtures::tank_supervisor().automaton().clone()),
        ("requirement.des", fixtures::tank_requirement()),
    ];
    for (name, built) in cases {
        let text = fixture(name);
        let expected = emit_model(&ModelFile::automaton(built.clone()));
        assert_eq!(body(&text), expected, "{name}");
        let parsed = parse_model(&text).unwrap().into_automaton().unwrap();
        assert!(parsed.equivalent(&built) && parsed.closed_equivalent(&built), "{name}");
    }
}

#[test]
fn masking_attack_fixture_matches_builder() {
    let built = fixtures::tank_masking_attack().unwrap();
    let text = fixture("masking_attack.des");
    assert_eq!(body(&text), emit_model(&ModelFile::transducer(built.clone())));
    let parsed = parse_model(&text).unwrap().into_transducer().unwrap();
    assert!(parsed.fsm().equivalent(built.fsm()));
}

#[test]
fn level_relation_fixture_matches_builder() {
    let g = fixtures::tank_plant();
    let parsed = parse_relation(&fixture("level_relation.txt"), g.alphabet(), 1).unwrap();
    assert_eq!(parsed.entries(), fixtures::tank_level_relation().entries());
}
