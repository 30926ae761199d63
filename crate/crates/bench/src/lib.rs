//! Fixtures shared by the benchmarks.

use gbsm::scenarios::{preset, PresetName};
use gbsm::{ChannelState, ScenarioConfig};

/// A preset state after `warmup` steps of its own time step.
pub fn warmed_state(name: PresetName, seed: u64, warmup: usize) -> ChannelState {
    let cfg: ScenarioConfig = preset(name);
    let mut state = ChannelState::new(&cfg, seed).expect("preset is valid");
    for _ in 0..warmup {
        state.evolve(cfg.dt).expect("evolution step");
    }
    state
}
