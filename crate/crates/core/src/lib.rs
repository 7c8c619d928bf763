//! Capacity optimization for reflecting-surface-assisted MIMO links over
//! sparse beamspace channels.
//!
//! At mmWave and THz frequencies a MIMO channel consists of a few discrete
//! propagation paths. Viewed in the DFT (beamspace) bases of large uniform
//! linear arrays, such a channel is *row-sparse* — each arrival angle carries
//! at most one departure angle — and its SVD comes for free: singular values
//! are column norms, the right basis is the identity. This crate builds those
//! channels, pairs transmit beams with reflected beams on a programmable
//! surface, and splits transmit power and surface area across the pairs to
//! maximize capacity.
//!
//! Modules:
//! - [`channel`] — beamspace channel construction and the closed-form SVD
//! - [`direct`] — water filling and precoding for the direct link
//! - [`reflection`] — beam pairing, cyclic-shift encoding, phase synthesis
//! - [`alloc`] — joint power / surface-area allocation solvers
//! - [`oracle`] — independent optimizers that validate the solvers
//! - [`dft`] — DFT and cyclic-shift matrices shared by the above
//!
//! ```
//! use ris_sparse::alloc::{joint_power_ris_alloc_1, SolverConfig};
//!
//! // four beam pairs at 22..19 dB: the best split uses only the top two
//! let snr: Vec<f64> = [22.0, 21.0, 20.0, 19.0]
//!     .iter()
//!     .map(|db| 10f64.powf(db / 10.0))
//!     .collect();
//! let best = joint_power_ris_alloc_1(&snr, &SolverConfig::default()).unwrap();
//! assert_eq!(best.rank, 2);
//! assert!((best.capacity - 8.4444).abs() < 1e-3);
//! ```

pub mod alloc;
pub mod channel;
pub mod dft;
pub mod direct;
pub mod error;
pub mod oracle;
pub mod reflection;

pub use alloc::{AllocationResult, SolverConfig};
pub use channel::{ArrayGeometry, PathDescriptor, SparseSvd, VirtualChannel};
pub use num_complex::Complex64;
pub use direct::{LinkBudget, PowerAllocation};
pub use error::{Error, Result};
pub use oracle::OracleReport;
pub use reflection::{BeamPair, RisEncoding};
