//! Sum-rate analysis for the MIMO multiway distributed-relay channel.
//!
//! `K` multi-antenna users exchange all their messages through `N`
//! single-antenna relays that do not cooperate. Each user splits its uplink
//! into `N` sub-channels, and every relay decodes mod-lattice sums of
//! adjacent users' codewords. The crate computes the achievable sum-rate of
//! this scheme, a cooperative-relay reference, a relaxed cut-set bound and
//! two classical baselines, and simulates the lattice protocol end to end.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod linalg;
pub mod optim;
pub mod rates;

pub use channel::{sample_instance, ChannelInstance, OperatingPoint, PowerSpec, ScenarioConfig};
pub use error::{Error, Result};
pub use experiments::{Scheme, SweepRecord, SweepResult};
pub use lattice::{Codeword, NestedLatticeChain};
pub use linalg::Matrix;
pub use optim::RateSolution;
