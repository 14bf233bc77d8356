//! Supervisory control of discrete-event systems under attacks that alter
//! sensor readings.
//!
//! The crate synthesizes the most permissive covert, damaging attack with
//! bounded sensor-reading alterations against a plant/supervisor pair,
//! verifies candidate attacks, synthesizes supervisors that no such attack
//! can defeat, and searches for a smallest set of sensor events to protect.

pub mod alphabet;
pub mod attack;
pub mod automaton;
pub mod error;
pub mod fsm;
pub mod io;
pub mod limits;
pub mod robust;
pub mod synthesis;
pub mod transducer;

pub use alphabet::{Alphabet, Event, Symbol};
pub use automaton::{Automaton, Supervisor};
pub use error::{Error, Result};
pub use transducer::{OutputString, PairEvent, Transducer};
