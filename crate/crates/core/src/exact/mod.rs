//! Exact solutions: soliton, breather, double pole, and the mKdV breather
//! with nonvanishing boundary value.

mod breather;
mod double_pole;
mod params;
mod phase;
mod soliton;

pub use breather::{
    TWO_SQRT_2,
    angle_anchor, b_tilde, b_tilde_on_grid, b_zero, breather_derivative, breather_fg, breather_period,
    gardner_breather, jet_of, kernel_directions, mkdv_nvbc_breather, partial_mass, partial_mass_dt, resolved_grid, sample,
    sample_breather, sample_breather_wrapped, sample_jets, scaling_directions, tracked_angle, FgJets,
    ANCHOR_DECAY, RESOLVED_DECAY,
};
pub use double_pole::{double_pole, double_pole_jet};
pub use params::{BreatherParams, DoublePoleParams, Jet, SolitonParams};
pub use phase::Phase;
pub use soliton::gardner_soliton;
