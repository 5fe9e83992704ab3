//! Consumer resources: base load, PV output, battery and flexible demand.

mod battery;
mod flex;
mod profile;
mod synth;

pub use battery::{battery_from_sweep, option_s_eligible, BatteryDefaults, BatterySpec};
pub use flex::{flex_bounds, FlexBounds, FlexSpec};
pub use profile::{
    ingest_load_csv, ingest_pv_csv, read_profile_csv, write_profile_csv, LoadProfile, ProfileSeries,
    PvProfile, Resolution,
};
pub use synth::{synth_load, synth_pv, synth_pv_value, PV_DERATE};
pub(crate) use profile::with_path;
