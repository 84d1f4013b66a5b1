//! Bit-exact little-endian encoding of keys and ciphertexts.
//!
//! Layout: a 16-byte header (`"PIMHE1"`, the parameter digest as `u64`, the
//! component count as `u16`), then per component a `u32` limb count followed
//! by that many `u32` limbs.

use super::{Ciphertext, HeParams, PublicKey, SecretKey};
use crate::polyring::Polynomial;
use crate::{Error, Result};

pub const MAGIC: &[u8; 6] = b"PIMHE1";
pub const HEADER_LEN: usize = 16;

/// Encoded size of `components` polynomials.
pub fn serialized_len(params: &HeParams, components: usize) -> usize {
    HEADER_LEN + components * (4 + 4 * params.n() * params.width())
}

pub fn encode_polys(params: &HeParams, polys: &[&Polynomial]) -> Vec<u8> {
    let mut out = Vec::with_capacity(serialized_len(params, polys.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&params.digest().to_le_bytes());
    out.extend_from_slice(&(polys.len() as u16).to_le_bytes());
    for p in polys {
        out.extend_from_slice(&(p.limbs().len() as u32).to_le_bytes());
        for limb in p.limbs() {
            out.extend_from_slice(&limb.to_le_bytes());
        }
    }
    out
}

pub fn decode_polys(params: &HeParams, bytes: &[u8]) -> Result<Vec<Polynomial>> {
    if bytes.len() < HEADER_LEN || &bytes[..6] != MAGIC {
        return Err(Error::Decode("missing PIMHE1 header".into()));
    }
    let digest = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    if digest != params.digest() {
        return Err(Error::Decode(format!(
            "parameter digest {digest:016x} does not match {:016x}",
            params.digest()
        )));
    }
    let count = u16::from_le_bytes([bytes[14], bytes[15]]) as usize;
    let expect = params.n() * params.width();
    let mut rest = &bytes[HEADER_LEN..];
    let mut polys = Vec::with_capacity(count);
    for i in 0..count {
        if rest.len() < 4 {
            return Err(Error::Decode(format!("component {i} truncated")));
        }
        let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        if len != expect || rest.len() < 4 + 4 * len {
            return Err(Error::Decode(format!(
                "component {i} has {len} limbs, expected {expect}"
            )));
        }
        let limbs = rest[4..4 + 4 * len]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        polys.push(
            Polynomial::from_limbs(params.ring(), limbs)
                .map_err(|e| Error::Decode(format!("component {i}: {e}")))?,
        );
        rest = &rest[4 + 4 * len..];
    }
    if !rest.is_empty() {
        return Err(Error::Decode(format!("{} trailing bytes", rest.len())));
    }
    Ok(polys)
}

impl Ciphertext {
    pub fn to_bytes(&self, params: &HeParams) -> Vec<u8> {
        let polys: Vec<&Polynomial> = self.components().iter().collect();
        encode_polys(params, &polys)
    }

    /// Three-component ciphertexts come back at multiplicative depth 1.
    pub fn from_bytes(params: &HeParams, bytes: &[u8]) -> Result<Self> {
        let polys = decode_polys(params, bytes)?;
        let depth = polys.len().saturating_sub(2) as u32;
        Ciphertext::new(params, polys, depth)
    }
}

impl PublicKey {
    pub fn to_bytes(&self, params: &HeParams) -> Vec<u8> {
        encode_polys(params, &[self.p0(), self.p1()])
    }

    pub fn from_bytes(params: &HeParams, bytes: &[u8]) -> Result<Self> {
        let mut polys = decode_polys(params, bytes)?;
        if polys.len() != 2 {
            return Err(Error::Decode(format!(
                "public key needs 2 components, got {}",
                polys.len()
            )));
        }
        let p1 = polys.pop().expect("two components");
        let p0 = polys.pop().expect("two components");
        PublicKey::from_parts(p0, p1, String::new())
    }
}

impl SecretKey {
    pub fn to_bytes(&self, params: &HeParams) -> Vec<u8> {
        encode_polys(params, &[self.poly()])
    }

    pub fn from_bytes(params: &HeParams, bytes: &[u8]) -> Result<Self> {
        let mut polys = decode_polys(params, bytes)?;
        if polys.len() != 1 {
            return Err(Error::Decode(format!(
                "secret key needs 1 component, got {}",
                polys.len()
            )));
        }
        SecretKey::from_poly(params, polys.pop().expect("one component"), String::new())
    }
}
