//! Textbook BFV over `R_q = Z_q[x]/(x^n + 1)` with plaintext modulus `t`.
//!
//! Ciphertexts carry no relinearization: a product has three components and
//! decryption evaluates `c0 + c1·s + c2·s²`. All host-side operations here run
//! on native integers and serve as the reference for the simulator kernels in
//! [`crate::pimsim`].

mod encoding;
pub(crate) mod host;
mod params;
mod scheme;
pub mod wire;

pub use encoding::{decode_scalar, decode_vector, encode_scalar, encode_vector, Plaintext};
pub use params::{
    HeParams, ParamsSummary, SecurityLevel, DEFAULT_NOISE_BOUND, MAX_PLAIN_MODULUS, MAX_Q_BITS,
};
pub use scheme::{
    decrypt, decrypt_with_budget, encrypt, encrypt_from, he_add, he_mul, he_scalar_mul, keygen,
    keygen_from, noise_budget, phase, poly_mul_reference, Ciphertext, PublicKey, SecretKey,
    MAX_COMPONENTS,
};
