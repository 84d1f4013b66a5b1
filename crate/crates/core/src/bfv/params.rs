use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::limbint::WideInt;
use crate::polyring::RingParams;
use crate::{Error, Result};

/// Default half-width of the uniform noise distribution.
pub const DEFAULT_NOISE_BOUND: u32 = 6;

/// Largest supported plaintext modulus.
pub const MAX_PLAIN_MODULUS: u64 = 1 << 16;

/// Largest supported coefficient modulus, in bits.
pub const MAX_Q_BITS: u32 = 110;

/// The three standard parameter sets, named by coefficient-modulus size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
pub enum SecurityLevel {
    Bits27,
    Bits54,
    Bits109,
}

impl SecurityLevel {
    pub const ALL: [Self; 3] = [Self::Bits27, Self::Bits54, Self::Bits109];

    pub fn bits(self) -> u32 {
        match self {
            Self::Bits27 => 27,
            Self::Bits54 => 54,
            Self::Bits109 => 109,
        }
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            27 => Ok(Self::Bits27),
            54 => Ok(Self::Bits54),
            109 => Ok(Self::Bits109),
            other => Err(Error::Parameter(format!(
                "security level must be 27, 54 or 109, got {other}"
            ))),
        }
    }

    /// Ring dimension.
    pub fn n(self) -> usize {
        match self {
            Self::Bits27 => 1024,
            Self::Bits54 => 2048,
            Self::Bits109 => 4096,
        }
    }

    /// Largest prime below `2^bits` with `q ≡ 1 (mod 2n)`.
    pub fn q(self) -> u128 {
        match self {
            Self::Bits27 => 134_215_681,
            Self::Bits54 => 18_014_398_509_404_161,
            Self::Bits109 => 649_037_107_316_853_453_566_312_040_923_137,
        }
    }

    /// Limbs per coefficient: 32-, 64- and 128-bit integers.
    pub fn width(self) -> usize {
        match self {
            Self::Bits27 => 1,
            Self::Bits54 => 2,
            Self::Bits109 => 4,
        }
    }

    /// Plaintext modulus used unless overridden.
    ///
    /// At `n = 1024` with a 27-bit `q`, `t = 5` leaves about three bits of
    /// noise budget after one multiplication.
    pub fn default_t(self) -> u64 {
        match self {
            Self::Bits27 => 5,
            Self::Bits54 | Self::Bits109 => 257,
        }
    }
}

impl From<SecurityLevel> for u32 {
    fn from(level: SecurityLevel) -> u32 {
        level.bits()
    }
}

impl TryFrom<u32> for SecurityLevel {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Self> {
        Self::from_bits(bits)
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

impl FromStr for SecurityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .trim_end_matches("-bit")
            .parse::<u32>()
            .map_err(|_| Error::Parameter(format!("unrecognized security level `{s}`")))?;
        Self::from_bits(bits)
    }
}

/// One BFV instance: ring, plaintext modulus `t`, `Δ = floor(q/t)` and noise width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeParams {
    ring: Arc<RingParams>,
    t: u64,
    delta: u128,
    noise_bound: u32,
    security: Option<SecurityLevel>,
}

/// Flat description of a parameter set, as embedded in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub security: Option<u32>,
    pub n: usize,
    pub q: String,
    pub q_bits: u32,
    pub coeff_width: usize,
    pub t: u64,
    pub noise_bound: u32,
    pub digest: String,
}

impl HeParams {
    pub fn standard(level: SecurityLevel) -> Result<Self> {
        Self::with_plain_modulus(level, level.default_t())
    }

    pub fn with_plain_modulus(level: SecurityLevel, t: u64) -> Result<Self> {
        let q = WideInt::from_u128(level.q(), level.width())?;
        let ring = RingParams::new(level.n(), q)?;
        Self::build(ring, t, DEFAULT_NOISE_BOUND, Some(level))
    }

    /// A non-standard instance, typically a small ring for tests.
    pub fn custom(n: usize, q: u128, t: u64, noise_bound: u32) -> Result<Self> {
        Self::build(RingParams::from_u128(n, q)?, t, noise_bound, None)
    }

    fn build(
        ring: Arc<RingParams>,
        t: u64,
        noise_bound: u32,
        security: Option<SecurityLevel>,
    ) -> Result<Self> {
        let q = ring.q_u128();
        let bits = ring.modulus().bits();
        if bits > MAX_Q_BITS {
            return Err(Error::Parameter(format!(
                "q has {bits} bits, at most {MAX_Q_BITS} supported"
            )));
        }
        if !(2..=MAX_PLAIN_MODULUS).contains(&t) || t as u128 >= q {
            return Err(Error::Parameter(format!(
                "plaintext modulus {t} must lie in [2, min(2^16, q - 1)]"
            )));
        }
        if noise_bound as u128 >= q / 2 {
            return Err(Error::Parameter(format!(
                "noise bound {noise_bound} too large for q = {q}"
            )));
        }
        let params = Self {
            delta: q / t as u128,
            ring,
            t,
            noise_bound,
            security,
        };
        let digit = params.split_digit() as usize;
        if 2 * digit + params.log_n() + 3 > 127 {
            return Err(Error::Parameter(format!(
                "ring of dimension {} too large for {bits}-bit q",
                params.n()
            )));
        }
        Ok(params)
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.ring.n()
    }

    pub fn q(&self) -> u128 {
        self.ring.q_u128()
    }

    pub fn q_bits(&self) -> u32 {
        self.ring.modulus().bits()
    }

    pub fn width(&self) -> usize {
        self.ring.width()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn delta(&self) -> u128 {
        self.delta
    }

    pub fn noise_bound(&self) -> u32 {
        self.noise_bound
    }

    pub fn security(&self) -> Option<SecurityLevel> {
        self.security
    }

    /// `"27"`, `"54"`, `"109"` or `"custom"`.
    pub fn label(&self) -> String {
        self.security
            .map_or_else(|| "custom".to_string(), |s| s.to_string())
    }

    pub(crate) fn log_n(&self) -> usize {
        self.n().trailing_zeros() as usize
    }

    /// Digit size for splitting centered coefficients in exact host products.
    pub(crate) fn split_digit(&self) -> u32 {
        self.q_bits().div_ceil(2)
    }

    /// First 8 bytes of SHA-256 over `(n, width, q limbs, t, noise_bound)`, little-endian.
    pub fn digest(&self) -> u64 {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        h.update((self.width() as u64).to_le_bytes());
        for limb in self.ring.q().limbs() {
            h.update(limb.to_le_bytes());
        }
        h.update(self.t.to_le_bytes());
        h.update(self.noise_bound.to_le_bytes());
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            security: self.security.map(SecurityLevel::bits),
            n: self.n(),
            q: self.q().to_string(),
            q_bits: self.q_bits(),
            coeff_width: self.width(),
            t: self.t,
            noise_bound: self.noise_bound,
            digest: format!("{:016x}", self.digest()),
        }
    }
}
