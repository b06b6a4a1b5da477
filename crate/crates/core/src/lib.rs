//! Primal-dual machinery for bounding the quality of equilibria and one-round
//! walks in weighted congestion games.
//!
//! The crate is organised bottom-up:
//!
//! * [`game`] holds the game model and cost evaluation, [`format`] its JSON form.
//! * [`dynamics`] covers deviations, ε-equilibria, best responses, walks and potentials.
//! * [`metrics`] enumerates small games exhaustively and is the ground-truth oracle.
//! * [`lp`] is an exact two-phase simplex; [`primal`] builds `LP(K,O)` for a solution concept.
//! * [`poly`], [`certificate`] and [`verify`] describe dual certificates, reduce them to
//!   per-resource polynomial inequalities and prove or refute those inequalities.
//! * [`search`] looks for dual multipliers, [`gallery`] builds the lower-bound instances
//!   and [`report`] assembles the summary tables.

pub mod certificate;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod gallery;
pub mod game;
pub mod lp;
pub mod metrics;
pub mod poly;
pub mod primal;
pub mod report;
pub mod scalar;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
pub use game::{Game, LatencySpec, Profile, Sharing, Social};
pub use num_rational::BigRational;
pub use scalar::Scalar;
