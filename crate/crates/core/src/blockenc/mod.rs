//! Block encodings `M = Π̃ U Π` of post-selected maps.

mod circuit;
mod encoding;

pub use circuit::{Gate, HybridCircuit, Measurement};
pub use encoding::{
    add_gate, compression_gadget_encoding, counter_qubits, mixed_postselect_encoding, postselect_encoding,
    swap_deferral_encoding, BlockEncoding,
};
