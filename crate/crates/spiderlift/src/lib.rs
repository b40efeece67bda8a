//! Exact combinatorics and numeric spider solvers linking unicritical
//! polynomials `z^d + c` of growing degree to postsingularly finite
//! exponential maps `λ e^z`.
//!
//! The crate is layered bottom-up:
//!
//! * [`angles`]: exact rational angles, the map `μ_d`, digit expansions,
//!   sectors, itineraries and kneading sequences.
//! * [`angle_lift`]: the degree-raising maps `Z_j` and their inverses.
//! * [`external_address`]: preperiodic external addresses and the
//!   construction of the angles `θ_d` attached to an address.
//! * [`spider_combinatorics`]: spiders, orbit portraits, companion pairs,
//!   internal addresses and angular classes.
//! * [`spider_dynamics`]: the numeric pullback iterations.

pub mod angle_lift;
pub mod angles;
mod cyclic;
mod error;
pub mod external_address;
mod seq;
pub mod spider_combinatorics;
pub mod spider_dynamics;

pub use angle_lift::{lift, lift_angle, lift_inverse, LiftContext};
pub use angles::{Angle, DigitExpansion, Itinerary, Orbit, Symbol};
pub use error::{Error, Result};
pub use external_address::{AddressAnglePlan, ExternalAddress, IntPolynomial};
pub use spider_combinatorics::{InternalAddress, OrbitPortrait, SpiderGraph};
pub use spider_dynamics::{SolveReport, SpiderConfiguration};
