//! Channel statistics computed on snapshot sequences.

pub mod correlation;
pub mod curve;
pub mod distribution;
pub mod music;
pub mod pdp;

pub use correlation::{
    acf, analytical_acf_per_cluster, coherence_bandwidth, coherence_bandwidth_from_pdp, fcf, fcf_by_frequency_average, fcf_from_pdp,
    rx_ccf, simulated_acf_per_cluster, stfcf, transfer_function, transfer_taps, tx_ccf, CorrelationResult,
    StfcfQuery,
};
pub use curve::Curve;
pub use distribution::{empirical_distribution, DistributionMode, EmpiricalDistribution};
pub use music::{find_peaks, hermitian_eigen, smooth_music_aps, steering_vector};
pub use pdp::{pdp, pdp_acf, rms_delay_spread, stationary_interval, BinnedPdp, Censored, Pdp};
