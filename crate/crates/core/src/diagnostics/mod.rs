//! Constants, localized functionals and speed estimates evaluated on snapshots.

pub mod constants;
pub mod escape;
pub mod firewall;
pub mod frame;
pub mod speed;
pub mod standing;

pub use constants::{c_max, compute_constants, e_esc, kappa0, Constants};
pub use escape::{escape_points, EscapePoints, Hulls};
pub use firewall::{exp_filter, firewall_q0_f0, Firewall, LemmaTally};
pub use frame::{positive_energy_at_escape_check, traveling_frame_report, EnergyReport, FrameSpec, Markers};
pub use speed::{dissipation_delta, estimate_invasion_speed, DissipationDelta, InvasionSpeed};
pub use standing::{standing_relaxation_report, StandingFrame, StandingReport};
