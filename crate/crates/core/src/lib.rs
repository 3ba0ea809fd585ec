//! Quasi-sure superhedging of claims on finite event trees under a finite
//! family of martingale models.
//!
//! The crate computes the minimal superhedging capital together with an
//! optimal strategy, the dual price over martingale measures that vanish on
//! the polar set, and the gap between that price and the best expectation
//! offered by any single model of the family.

pub mod cli;
pub mod hedge;
pub mod lp;
pub mod models;
pub mod oracle;
pub mod tree;

pub use hedge::{DualityReport, HedgePlan, Instance};
pub use models::{Model, ModelFamily, PolarReport};
pub use tree::{Claim, EventTree, NodeId, RawNode, Strategy};
