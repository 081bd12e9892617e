//! Observables derived from population time series.

mod bootstrap;
mod efficiency;
mod fit;
mod light_cone;
mod width;

pub use bootstrap::{mean_of, bootstrap_ci, BootstrapInterval, DEFAULT_EFFICIENCY_RESAMPLES, DEFAULT_WIDTH_RESAMPLES};
pub use efficiency::{efficiency_samples, transport_efficiency, EfficiencyReport};
pub use fit::{bootstrap_power_law, fit_power_law, FitWindow, PowerLawFit};
pub use light_cone::{boundary_time, effective_couplings, max_group_velocity, LightCone};
pub use width::{wavepacket_width, width_bound, WidthSeries};
