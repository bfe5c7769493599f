//! File formats: instance JSON, DIMACS graphs and CNF, content digests.

pub mod dimacs;
mod instance;
mod real;

pub use instance::{cost_to_doc, graph_from_doc, CostDoc, GraphDoc, Instance, InstanceDoc, IonsDoc, MarginalsDoc};
pub use real::{floats, reals, Real};

use sha2::{Digest, Sha256};

/// Hex SHA-256 over the given input blobs, each length-prefixed.
pub fn digest<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}
