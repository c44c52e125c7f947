//! Activity-aware multiuser detection for grant-free machine-type
//! communications.
//!
//! The crate simulates an uplink where `N` sporadically active devices share
//! `M` spreading chips (`N > M`), and detection works over the augmented
//! alphabet `A0 = A ∪ {0}` so that inactivity is just another symbol. It
//! provides the AA-MF-SIC detector with its shadow-area reliability test and
//! multi-feedback candidate rollout, the usual baselines (linear MMSE, oracle
//! MMSE, sparsity-aware SIC chains, activity-sorted QRD, K-Best, brute-force
//! S-MAP), complexity accounting, and a seeded Monte Carlo harness that
//! sweeps SNR, activity probability, and channel-estimate error.

pub mod complexity;
pub mod detectors;
pub mod harness;
pub mod model;
pub mod numerics;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
