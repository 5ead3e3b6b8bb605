//! Content digests used to tie Gram matrices and fits back to their data.

use sha2::{Digest, Sha256};

/// SHA-256 over the little-endian bytes of `values`, hex encoded.
pub fn digest_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>()
}
