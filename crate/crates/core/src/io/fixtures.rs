//! The single-tank example.
//!
//! A tank is filled by an inflow and drained through an outlet valve. Level
//! sensors report `h=L`, `h=M`, `h=H` and `h=EH` (extremely high, an
//! overflow); the valve commands `q_o=0` (close) and `q_o=1` (open) are the
//! only controllable events. With the valve open the level can only go down.
//! State 5 is the desirable marker, state 9 (overflow) the bad one.

use crate::alphabet::{Alphabet, Event};
use crate::automaton::{Automaton, Supervisor};
use crate::error::Result;
use crate::fsm::Fsm;
use crate::transducer::{OutputString, PairEvent, Transducer};

pub const LEVELS: [&str; 4] = ["h=L", "h=M", "h=H", "h=EH"];
pub const VALVE: [&str; 2] = ["q_o=0", "q_o=1"];

pub fn tank_alphabet() -> Alphabet {
    Alphabet::new(
        LEVELS
            .iter()
            .map(|e| Event::new(e, false, true))
            .chain(VALVE.iter().map(|e| Event::new(e, true, true))),
    )
    .expect("static alphabet")
}

const TANK_TRANSITIONS: [(&str, &str, &str); 14] = [
    ("0", "h=L", "1"),
    ("1", "q_o=0", "2"),
    ("1", "q_o=1", "5"),
    ("5", "h=L", "1"),
    ("2", "h=L", "1"),
    ("2", "h=M", "3"),
    ("3", "q_o=0", "4"),
    ("3", "q_o=1", "5"),
    ("4", "h=M", "3"),
    ("4", "h=H", "6"),
    ("6", "q_o=0", "8"),
    ("6", "q_o=1", "7"),
    ("7", "h=M", "3"),
    ("8", "h=EH", "9"),
];

const TANK_STATES: [&str; 10] = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];

pub fn tank_plant() -> Automaton {
    Automaton::build(tank_alphabet(), &TANK_STATES, &["5", "9"], &["9"], &TANK_TRANSITIONS)
        .expect("static plant")
}

/// The plant with the valve forced open at state 6.
pub fn tank_supervisor() -> Supervisor {
    let transitions: Vec<_> = TANK_TRANSITIONS
        .iter()
        .copied()
        .filter(|&(from, ev, _)| (from, ev) != ("6", "q_o=0") && from != "8")
        .collect();
    let a = Automaton::build(tank_alphabet(), &TANK_STATES[..8], &[], &[], &transitions)
        .expect("static supervisor");
    Supervisor::new(a)
}

/// Level events only, `h=EH` never occurs.
pub fn tank_requirement() -> Automaton {
    let alphabet = tank_alphabet().restrict(&LEVELS.iter().map(|e| (*e).into()).collect());
    Automaton::build(
        alphabet,
        &["r"],
        &["r"],
        &[],
        &[("r", "h=L", "r"), ("r", "h=M", "r"), ("r", "h=H", "r")],
    )
    .expect("static requirement")
}

/// Single-state attack reporting every level as `h=L` and leaving the valve
/// commands alone.
pub fn tank_masking_attack() -> Result<Transducer> {
    let alphabet = tank_alphabet();
    let mut fsm = Fsm::empty();
    let y = fsm.add_state("y", true);
    fsm.set_initial(y)?;
    for e in LEVELS {
        fsm.add_transition(y, PairEvent::new(e.into(), OutputString::single("h=L".into())), y)?;
    }
    for e in VALVE {
        fsm.add_transition(y, PairEvent::identity(&e.into()), y)?;
    }
    Transducer::new(alphabet, 1, fsm)
}

/// Level readings may be replaced by any level reading; valve commands are
/// never altered.
pub fn tank_level_relation() -> crate::transducer::AlterationRelation {
    let levels: Vec<_> = LEVELS.iter().map(|e| (*e).into()).collect();
    crate::transducer::AlterationRelation::substitutions(&levels, &levels)
}
