use super::HeParams;
use crate::{Error, Result};

/// A message polynomial with coefficients in `[0, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaintext {
    coeffs: Vec<u64>,
    t: u64,
}

impl Plaintext {
    pub fn new(params: &HeParams, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != params.n() {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: params.n(),
            });
        }
        let t = params.t();
        if let Some((i, v)) = coeffs.iter().enumerate().find(|(_, &v)| v >= t) {
            return Err(Error::Contract(format!(
                "plaintext coefficient {i} = {v} is not below t = {t}"
            )));
        }
        Ok(Self { coeffs, t })
    }

    pub fn zero(params: &HeParams) -> Self {
        Self {
            coeffs: vec![0; params.n()],
            t: params.t(),
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Negacyclic product mod `t`, the plaintext image of a ciphertext product.
    pub fn negacyclic_mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len();
        let t = self.t as i128;
        let mut acc = vec![0i128; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                let p = a as i128 * b as i128;
                if i + j < n {
                    acc[i + j] += p;
                } else {
                    acc[i + j - n] -= p;
                }
            }
        }
        Self {
            coeffs: acc.iter().map(|v| v.rem_euclid(t) as u64).collect(),
            t: self.t,
        }
    }
}

/// `v` in the constant coefficient, zeros elsewhere.
pub fn encode_scalar(params: &HeParams, v: u64) -> Result<Plaintext> {
    encode_vector(params, &[v])
}

pub fn decode_scalar(pt: &Plaintext) -> u64 {
    pt.coeffs[0]
}

/// Value `i` in coefficient `i`. Addition acts slot-wise on this encoding;
/// multiplication does not.
pub fn encode_vector(params: &HeParams, values: &[u64]) -> Result<Plaintext> {
    if values.len() > params.n() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: params.n(),
        });
    }
    let mut coeffs = vec![0; params.n()];
    coeffs[..values.len()].copy_from_slice(values);
    Plaintext::new(params, coeffs)
}

/// The first `len` slots.
pub fn decode_vector(pt: &Plaintext, len: usize) -> Vec<u64> {
    pt.coeffs[..len.min(pt.coeffs.len())].to_vec()
}
