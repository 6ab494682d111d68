//! On-demand multimodal transit system (ODMTS) design, ridesharing,
//! dispatching, simulation and scenario costing.
pub mod design;
pub mod dispatch;
mod error;
pub mod flow;
pub mod lp;
pub mod od;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod rideshare;
pub mod scenario;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
