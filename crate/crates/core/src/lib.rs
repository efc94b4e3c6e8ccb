//! Procedural task universe for training autonomous network defenders.
//!
//! A task pairs network dynamics with a goal-metric pair written in a small
//! PDDL fragment. The simulator runs gray, red and blue agents on an abstract
//! network; goal and metric are evaluated into a sparse reward; a curriculum
//! controller picks training tasks from evaluation scores; a reference
//! clipped-surrogate learner trains masked policies against the simulator.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curriculum;
pub mod env;
pub mod harness;
pub mod learner;
pub mod netsim;
pub mod pddl;
pub mod reward;
pub mod rng;
pub mod universe;
