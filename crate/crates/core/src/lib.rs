//! Strategic resource sharing between network operators with instantaneous reciprocity.
//!
//! Players bid over every subset of players for a unit resource. A linear-program
//! resolution rule merges the bids into an agreed allocation, and sequential best-response
//! play converges to a Nash equilibrium. Operator utilities are α-fair sums over users
//! scheduled in an interference-limited indoor scenario.

pub mod allocation;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod oracle;
pub mod orchestrator;
pub mod resolution;
pub mod scenario;
pub mod scheduler;
pub mod solver;
pub mod strategy;
pub mod subset;

pub use allocation::{
    bid_box, default_pattern, is_feasible, reciprocity_shares, AllocationPattern, Bid, BidBox,
    DefaultKind,
};
pub use error::{Error, Result};
pub use subset::{subsets_containing, SubsetId};
