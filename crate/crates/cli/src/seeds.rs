use sha2::{Digest, Sha256};

/// SHA-256 over (master seed, topology, model, run index); first 8 bytes.
pub fn child_seed(master: u64, topology: &str, model: &str, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_be_bytes());
    h.update(topology.as_bytes());
    h.update([0]);
    h.update(model.as_bytes());
    h.update([0]);
    h.update((run as u64).to_be_bytes());
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Label used in place of a model name for per-topology endpoint draws.
pub const ENDPOINTS_LABEL: &str = "endpoints";
