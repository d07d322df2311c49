//! Covert wireless edge access and budget-constrained targeted advertising.
//!
//! The crate couples two models:
//!
//! * a physical layer where a friendly jammer hides an edge access point's
//!   downlink from a radiometer warden ([`covert`]), while users report
//!   tracking data over a Fisher-Snedecor F faded uplink ([`uplink`]);
//! * an economics layer where a service provider sells surplus bandwidth and
//!   drives sales with Vidale-Wolfe advertising under a budget
//!   ([`advertising`]).
//!
//! [`immersion`] links the two: the per-user basic bandwidth needed to meet a
//! Meta-Immersion floor fixes how much bandwidth is left to sell.
//! Every analytical result has an independent Monte Carlo or ODE counterpart
//! in [`oracle`].

pub mod advertising;
pub mod covert;
pub mod error;
pub mod fading;
pub mod immersion;
pub mod numerics;
pub mod oracle;
pub mod units;
pub mod uplink;

pub use error::{Error, Result};
