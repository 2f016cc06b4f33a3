//! Persistent area coverage with synchronized loitering fixed-wing UAVs.
//!
//! - [`geometry`]: sensing/loiter radii, overlap areas, coverage predicates
//! - [`packing`]: square and hexagon loiter-circle layouts behind a
//!   strategy registry
//! - [`optimize`]: loiter radius for a fleet budget, coverage regimes
//! - [`dubins`]: bounded-curvature paths and phase-synchronized transitions
//! - [`assign`]: minimum-cost survivor-to-circle matching
//! - [`fleet`]: deployment, failure injection/detection and recovery
//!
//! ```
//! use loiter_core::geometry::{AreaSpec, PackingKind};
//! use loiter_core::packing::{builtin, pack};
//!
//! let area = AreaSpec::new(500.0, 650.0).unwrap();
//! let layout = pack(&area, 70.0, builtin(PackingKind::Hexagon)).unwrap();
//! assert_eq!(layout.len(), 35);
//! ```

pub mod assign;
pub mod coverage;
pub mod dubins;
pub mod error;
pub mod fleet;
pub mod geometry;
pub mod optimize;
pub mod packing;

pub use error::{Error, Result};
