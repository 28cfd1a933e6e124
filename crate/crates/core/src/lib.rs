//! Planning and simulation toolkit for two quadrotors carrying a slack rope.
//!
//! The pipeline: the rope is modelled as a [`catenary`]; the pair of vehicles
//! collapses into a six-dimensional [`formation`] state; each state gets a
//! [`vbody`] mesh enclosing vehicles and rope, checked against the
//! environment through [`geometry`]; the [`planner`] grows an RRT over
//! formation states; [`trajectory`] fits synchronized per-vehicle
//! polynomials; [`control`] tracks them with MPC in a simulator. [`scene`]
//! and [`pipeline`] tie it together for the command-line front end.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catenary;
pub mod control;
pub mod exec;
pub mod formation;
pub mod geometry;
pub mod pipeline;
pub mod planner;
pub mod scene;
pub mod trajectory;
pub mod vbody;

pub use exec::Execution;
