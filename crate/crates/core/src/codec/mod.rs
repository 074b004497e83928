//! Chained encoding and decoding over `k` blocks.

pub mod decoder;
pub mod encoder;
pub mod instance;
pub mod layout;
pub mod randomness;

pub use decoder::{decode_receiver1, decode_receiver2, decode_receiver3, DecodeOutput, Decoder};
pub use encoder::{encode_chain, encode_chain_with, layer_roles, sc_encode_layer, BlockVectors, LayerJob, Role};
pub use instance::{
    compute_stats, construct, construct_from_stats, CodeInstance, ConstructionParams, FrozenBits,
    SelectionSpec, INSTANCE_VERSION,
};
pub use layout::{
    build_layout, layout_for_rates, message_bit_budget, BitCounts, Budget, CaseTag, ChainingLayout,
    CopyLink, Slot, VPartitions, WPartitions,
};
pub use randomness::{BitSampler, CommonRandomness, FreshRandomness};
