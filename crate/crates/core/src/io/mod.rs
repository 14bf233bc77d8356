//! Model files, DOT export and bundled fixtures.

pub mod dot;
pub mod fixtures;
pub mod model;

pub use dot::{automaton_to_dot, transducer_to_dot};
pub use model::{emit_model, parse_model, parse_relation, read_model, write_model, Model, ModelFile};
