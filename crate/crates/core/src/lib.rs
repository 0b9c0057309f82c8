//! Zero-error classical capacity of quantum channels.
//!
//! Channels are held in Kraus form ([`channel`]); their Choi-Jamiołkowski
//! matrices and the capacity subspace `S = supp(CJ(E*∘E))` live in [`cj`].
//! [`product`] searches subspaces for product vectors, and [`capacity`]
//! combines both into one-shot zero-error capacity verdicts and
//! superactivation reports. [`campaign`] runs seeded randomized suites over
//! all of it.

mod bilinear;
pub mod campaign;
pub mod capacity;
pub mod channel;
pub mod cj;
mod error;
pub mod io;
pub mod linalg;
pub mod par;
pub mod product;
pub mod sampling;
pub mod state;

pub use capacity::{
    one_shot_zero_error_positive, superactivation_analysis, CapacityOptions, CapacityVerdict,
    Conclusion, SuperactivationOptions, SuperactivationReport, VerdictStatus,
};
pub use channel::{Channel, CpMap, DensityOperator};
pub use cj::{capacity_subspace, CjMatrix, Subspace};
pub use error::{Error, Result};
pub use par::Exec;
pub use state::PureState;
