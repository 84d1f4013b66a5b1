//! Named, splittable deterministic randomness.
//!
//! A [`SeedStream`] is a root seed plus a label path. Each path maps to an
//! independent ChaCha20 stream keyed by `SHA-256(root || path)`, so any sampled
//! object can be reproduced from its lineage string alone.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedStream {
    root: u64,
    path: String,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self {
            root,
            path: String::new(),
        }
    }

    /// A sub-stream; distinct labels give independent streams.
    pub fn child(&self, label: impl AsRef<str>) -> Self {
        Self {
            root: self.root,
            path: format!("{}/{}", self.path, label.as_ref()),
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    /// Printable lineage, `"<root>:<path>"`.
    pub fn lineage(&self) -> String {
        format!("{}:{}", self.root, self.path)
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(self.root.to_le_bytes());
        h.update(self.path.as_bytes());
        ChaCha20Rng::from_seed(h.finalize().into())
    }
}
