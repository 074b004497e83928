//! Polar transform, SC recursion and bit-channel statistics.

pub mod diagnostics;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod sc;
pub mod sets;
pub mod stats;
pub mod transform;

pub use diagnostics::{polarization_diagnostics, LayerDiagnostics, PolarizationReport, ReceiverDiagnostics};
pub use exact::{exact_layer_stats, exact_single_layer, MAX_EXACT_N};
pub use model::{Layer, LayerTables};
pub use montecarlo::monte_carlo_layer_stats;
pub use sc::{Pair, ScEngine};
pub use sets::{select_sets, BitChannelSets, LayerSets, RankTargets, ReceiverSets, SelectionMode};
pub use stats::{BitChannelStats, Estimation, LayerStats};
pub use transform::polar_transform;
