//! The negacyclic ring `Z_q[x]/(x^n + 1)` over multi-limb coefficients.
//!
//! Coefficients are stored flat, `n · width` limbs, little-endian within
//! each coefficient. All arithmetic goes through [`crate::limbint`] and
//! charges an [`InstrCounter`], including one load or store per limb moved
//! and one `loop_overhead` per loop iteration.

use std::fmt;
use std::sync::Arc;

use crate::limbint::{
    add_in_place, cost as lcost, kmul, InstrCounter, Limb, Modulus, WideInt, MAX_LIMBS,
};
use crate::{Error, Result};

/// Largest coefficient width supported by rings.
pub const MAX_COEFF_LIMBS: usize = 4;

/// Ring dimension and coefficient modulus.
#[derive(Clone, PartialEq, Eq)]
pub struct RingParams {
    n: usize,
    modulus: Modulus,
}

impl RingParams {
    /// `n` must be a power of two (at least 2) and `q` at most 4 limbs wide.
    pub fn new(n: usize, q: WideInt) -> Result<Arc<Self>> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "ring degree {n} is not a power of two >= 2"
            )));
        }
        if q.width() > MAX_COEFF_LIMBS {
            return Err(Error::Parameter(format!(
                "coefficient width {} exceeds {MAX_COEFF_LIMBS} limbs",
                q.width()
            )));
        }
        Ok(Arc::new(Self {
            n,
            modulus: Modulus::new(q)?,
        }))
    }

    /// Ring with `q` stored in the fewest limbs that hold it.
    pub fn from_u128(n: usize, q: u128) -> Result<Arc<Self>> {
        let bits = 128 - q.leading_zeros() as usize;
        let width = match bits.div_ceil(32) {
            0 | 1 => 1,
            2 => 2,
            _ => 4,
        };
        Self::new(n, WideInt::from_u128(q, width)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &WideInt {
        self.modulus.q()
    }

    pub fn q_u128(&self) -> u128 {
        self.q().to_u128().expect("ring modulus fits 128 bits")
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Limbs per coefficient.
    pub fn width(&self) -> usize {
        self.modulus.width()
    }

    /// Width of the product accumulators, `2 · width + 1`.
    pub fn acc_width(&self) -> usize {
        2 * self.width() + 1
    }
}

impl fmt::Debug for RingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RingParams(n={}, q={}, w={})",
            self.n,
            self.q(),
            self.width()
        )
    }
}

/// An element of `R_q`; every coefficient is below `q`.
#[derive(Clone)]
pub struct Polynomial {
    ring: Arc<RingParams>,
    limbs: Vec<Limb>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.limbs == other.limbs && same_ring(&self.ring, &other.ring)
    }
}

impl Eq for Polynomial {}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<u128> = (0..self.n().min(8)).map(|i| self.coeff_u128(i)).collect();
        write!(f, "Polynomial({:?}, {head:?}", self.ring)?;
        if self.n() > 8 {
            write!(f, "..")?;
        }
        write!(f, ")")
    }
}

fn same_ring(a: &Arc<RingParams>, b: &Arc<RingParams>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn check_same_ring(a: &Arc<RingParams>, b: &Arc<RingParams>) -> Result<()> {
    if !same_ring(a, b) {
        return Err(Error::RingMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

impl Polynomial {
    pub fn zero(ring: &Arc<RingParams>) -> Self {
        Self {
            limbs: vec![0; ring.n * ring.width()],
            ring: Arc::clone(ring),
        }
    }

    /// Builds from raw limbs, `n · width` of them, validating every coefficient.
    pub fn from_limbs(ring: &Arc<RingParams>, limbs: Vec<Limb>) -> Result<Self> {
        let w = ring.width();
        if limbs.len() != ring.n * w {
            return Err(Error::LengthMismatch {
                left: limbs.len(),
                right: ring.n * w,
            });
        }
        let q = ring.q();
        for (i, c) in limbs.chunks_exact(w).enumerate() {
            if WideInt::from_limbs(c)?.value_cmp(q).is_ge() {
                return Err(Error::Contract(format!("coefficient {i} is not below q")));
            }
        }
        Ok(Self {
            ring: Arc::clone(ring),
            limbs,
        })
    }

    pub fn from_u128s(ring: &Arc<RingParams>, coeffs: &[u128]) -> Result<Self> {
        if coeffs.len() != ring.n {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: ring.n,
            });
        }
        let q = ring.q_u128();
        let w = ring.width();
        let mut limbs = Vec::with_capacity(ring.n * w);
        for (i, &c) in coeffs.iter().enumerate() {
            if c >= q {
                return Err(Error::Contract(format!(
                    "coefficient {i} = {c} is not below q"
                )));
            }
            limbs.extend_from_slice(WideInt::from_u128(c, w)?.limbs());
        }
        Ok(Self {
            ring: Arc::clone(ring),
            limbs,
        })
    }

    pub fn from_coeffs(ring: &Arc<RingParams>, coeffs: &[WideInt]) -> Result<Self> {
        if coeffs.len() != ring.n {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: ring.n,
            });
        }
        let mut limbs = Vec::with_capacity(ring.n * ring.width());
        for c in coeffs {
            if c.width() != ring.width() {
                return Err(Error::WidthMismatch {
                    left: c.width(),
                    right: ring.width(),
                });
            }
            limbs.extend_from_slice(c.limbs());
        }
        Self::from_limbs(ring, limbs)
    }

    /// `value · x^degree`.
    pub fn monomial(ring: &Arc<RingParams>, degree: usize, value: u128) -> Result<Self> {
        if degree >= ring.n {
            return Err(Error::Parameter(format!(
                "degree {degree} outside ring of dimension {}",
                ring.n
            )));
        }
        let mut coeffs = vec![0; ring.n];
        coeffs[degree] = value;
        Self::from_u128s(ring, &coeffs)
    }

    pub fn constant(ring: &Arc<RingParams>, value: u128) -> Result<Self> {
        Self::monomial(ring, 0, value)
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.ring.n
    }

    pub fn limbs(&self) -> &[Limb] {
        &self.limbs
    }

    pub fn coeff(&self, i: usize) -> WideInt {
        let w = self.ring.width();
        WideInt::from_limbs(&self.limbs[i * w..(i + 1) * w]).expect("ring width is valid")
    }

    pub fn coeff_u128(&self, i: usize) -> u128 {
        let w = self.ring.width();
        self.limbs[i * w..(i + 1) * w]
            .iter()
            .rev()
            .fold(0u128, |acc, &l| (acc << 32) | l as u128)
    }

    pub fn to_u128s(&self) -> Vec<u128> {
        (0..self.n()).map(|i| self.coeff_u128(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }
}

fn binary_map(
    p: &Polynomial,
    r: &Polynomial,
    ctr: &mut InstrCounter,
    op: impl Fn(&Modulus, &[Limb], &[Limb], &mut [Limb], &mut InstrCounter),
) -> Result<Polynomial> {
    check_same_ring(&p.ring, &r.ring)?;
    let w = p.ring.width();
    let m = p.ring.modulus();
    let mut out = Polynomial::zero(&p.ring);
    for ((dst, a), b) in out
        .limbs
        .chunks_exact_mut(w)
        .zip(p.limbs.chunks_exact(w))
        .zip(r.limbs.chunks_exact(w))
    {
        ctr.loop_overhead += 1;
        ctr.loads += 2 * w as u64;
        op(m, a, b, dst, ctr);
        ctr.stores += w as u64;
    }
    Ok(out)
}

/// Coefficient-wise `p + r mod q`.
pub fn poly_add(p: &Polynomial, r: &Polynomial, ctr: &mut InstrCounter) -> Result<Polynomial> {
    binary_map(p, r, ctr, |m, a, b, out, c| m.add_limbs(a, b, out, c))
}

/// Coefficient-wise `p - r mod q`.
pub fn poly_sub(p: &Polynomial, r: &Polynomial, ctr: &mut InstrCounter) -> Result<Polynomial> {
    binary_map(p, r, ctr, |m, a, b, out, c| m.sub_limbs(a, b, out, c))
}

/// Coefficient-wise `q - c`, with 0 fixed.
pub fn poly_negate(p: &Polynomial, ctr: &mut InstrCounter) -> Polynomial {
    let w = p.ring.width();
    let zero = [0; MAX_LIMBS];
    let m = p.ring.modulus();
    let mut out = Polynomial::zero(&p.ring);
    for (dst, a) in out.limbs.chunks_exact_mut(w).zip(p.limbs.chunks_exact(w)) {
        ctr.loop_overhead += 1;
        ctr.loads += w as u64;
        m.sub_limbs(&zero[..w], a, dst, ctr);
        ctr.stores += w as u64;
    }
    out
}

/// Every coefficient times `s`, mod `q`.
pub fn poly_scalar_mul(p: &Polynomial, s: &WideInt, ctr: &mut InstrCounter) -> Result<Polynomial> {
    let w = p.ring.width();
    if s.width() != w {
        return Err(Error::WidthMismatch {
            left: s.width(),
            right: w,
        });
    }
    if s.value_cmp(p.ring.q()).is_ge() {
        return Err(Error::Contract(format!("scalar {s} is not below q")));
    }
    let m = p.ring.modulus();
    let mut out = Polynomial::zero(&p.ring);
    for (dst, a) in out.limbs.chunks_exact_mut(w).zip(p.limbs.chunks_exact(w)) {
        ctr.loop_overhead += 1;
        ctr.loads += w as u64;
        m.mul_limbs(a, s.limbs(), dst, ctr);
        ctr.stores += w as u64;
    }
    Ok(out)
}

/// Schoolbook product accumulated over the integers.
///
/// Returns `(pos, neg)`, `n` accumulators of [`RingParams::acc_width`] limbs
/// each: products landing at degree `i + j < n` go to `pos[i + j]`, wrapped
/// ones to `neg[i + j - n]`. Performs exactly `n²` coefficient products.
pub(crate) fn negacyclic_accumulate(
    a: &[Limb],
    b: &[Limb],
    ring: &RingParams,
    ctr: &mut InstrCounter,
) -> (Vec<Limb>, Vec<Limb>) {
    let (n, w, e) = (ring.n, ring.width(), ring.acc_width());
    let mut pos = vec![0; n * e];
    let mut neg = vec![0; n * e];
    let mut prod = [0; MAX_LIMBS];
    for i in 0..n {
        ctr.loop_overhead += 1;
        ctr.loads += w as u64;
        let ai = &a[i * w..(i + 1) * w];
        for j in 0..n {
            ctr.loop_overhead += 1;
            ctr.loads += (w + e) as u64;
            kmul(ai, &b[j * w..(j + 1) * w], &mut prod[..2 * w], ctr);
            let k = i + j;
            let acc = if k < n {
                &mut pos[k * e..(k + 1) * e]
            } else {
                &mut neg[(k - n) * e..(k - n + 1) * e]
            };
            add_in_place(acc, &prod[..2 * w], ctr);
            ctr.stores += e as u64;
        }
    }
    (pos, neg)
}

/// `p · r mod (x^n + 1, q)` by the schoolbook double loop.
pub fn poly_negacyclic_mul(
    p: &Polynomial,
    r: &Polynomial,
    ctr: &mut InstrCounter,
) -> Result<Polynomial> {
    check_same_ring(&p.ring, &r.ring)?;
    let ring = &p.ring;
    let (w, e) = (ring.width(), ring.acc_width());
    let (pos, neg) = negacyclic_accumulate(&p.limbs, &r.limbs, ring, ctr);
    let m = ring.modulus();
    let mut out = Polynomial::zero(ring);
    let (mut rp, mut rn) = ([0; MAX_LIMBS], [0; MAX_LIMBS]);
    for ((dst, ap), an) in out
        .limbs
        .chunks_exact_mut(w)
        .zip(pos.chunks_exact(e))
        .zip(neg.chunks_exact(e))
    {
        ctr.loop_overhead += 1;
        ctr.loads += 2 * e as u64;
        m.reduce_limbs(ap, &mut rp[..w], ctr);
        m.reduce_limbs(an, &mut rn[..w], ctr);
        m.sub_limbs(&rp[..w], &rn[..w], dst, ctr);
        ctr.stores += w as u64;
    }
    Ok(out)
}

/// Closed-form instruction counts of the ring operations.
pub mod cost {
    use super::*;

    fn io(loads: usize, stores: usize, iters: usize) -> InstrCounter {
        InstrCounter {
            loads: loads as u64,
            stores: stores as u64,
            loop_overhead: iters as u64,
            ..Default::default()
        }
    }

    /// [`poly_add`] or [`poly_sub`].
    pub fn add(n: usize, w: usize) -> InstrCounter {
        (lcost::mod_add(w) + io(2 * w, w, 1)) * n as u64
    }

    pub fn negate(n: usize, w: usize) -> InstrCounter {
        (lcost::mod_add(w) + io(w, w, 1)) * n as u64
    }

    pub fn scalar_mul(n: usize, w: usize, k: usize) -> InstrCounter {
        (lcost::mod_mul(w, k) + io(w, w, 1)) * n as u64
    }

    /// The accumulation stage alone.
    pub fn negacyclic_accumulate(n: usize, w: usize) -> InstrCounter {
        let e = 2 * w + 1;
        let inner = lcost::karatsuba(w) + lcost::wide_add(e) + io(w + e, e, 1);
        let outer = io(w, 0, 1);
        inner * (n * n) as u64 + outer * n as u64
    }

    /// [`poly_negacyclic_mul`].
    pub fn negacyclic_mul(n: usize, w: usize, k: usize) -> InstrCounter {
        let e = 2 * w + 1;
        let fin = lcost::reduce(e, k) * 2 + lcost::mod_add(w) + io(2 * e, w, 1);
        negacyclic_accumulate(n, w) + fin * n as u64
    }
}
