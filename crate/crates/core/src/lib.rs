//! Declustered-parity layouts for disk arrays that tolerate several
//! simultaneous disk failures.
//!
//! A layout is built from two ingredients:
//!
//! * a balanced `δ`-parity group ([`parity_groups`]), obtained by stacking
//!   every placement of the parity columns of a horizontal MDS code
//!   ([`erasure_codes`]), and
//! * a `t`-`(n,k,λ)` design with `t = δ + 1` ([`designs`]), whose blocks say
//!   which `k` of the `n` disks each group instance occupies.
//!
//! [`layout`] combines the two, [`analysis`] counts rebuild reads per disk
//! (by enumeration and by closed form), and [`simulator`] stores real bytes,
//! fails disks, decodes, and measures the I/O that was actually performed.

pub mod analysis;
pub mod designs;
pub mod erasure_codes;
mod error;
pub mod layout;
pub mod parity_groups;
pub mod simulator;

pub use error::{Error, Result};

/// Exact rational used for all fractions (shares of a disk, disks worth of
/// parity, trade-off percentages).
pub type Ratio = num_rational::Ratio<u128>;
