use num_bigint::BigUint;

use super::{
    add_in_place, add_to, kmul, sub_in_place, sub_to, InstrCounter, Limb, WideInt, MAX_LIMBS,
    MAX_MUL_LIMBS,
};
use crate::{Error, Result};

/// A coefficient modulus with its precomputed Barrett reciprocal.
///
/// `k` is the number of significant limbs of `q` and `mu = floor(B^(2k) / q)`
/// with `B = 2^32`. Residues are carried at the width of `q` as supplied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    q: WideInt,
    k: usize,
    mu: [Limb; MAX_LIMBS],
    half: WideInt,
}

impl Modulus {
    /// Precomputes the reciprocal. Rejects zero and exact powers of `2^32`
    /// (including 1), whose reciprocal does not fit `k + 1` limbs.
    pub fn new(q: WideInt) -> Result<Self> {
        let k = q.significant_limbs();
        if k == 0 {
            return Err(Error::Parameter("modulus must be nonzero".into()));
        }
        if q.limbs()[..k - 1].iter().all(|&l| l == 0) && q.limbs()[k - 1] == 1 {
            return Err(Error::Parameter(format!(
                "modulus {q} is a power of 2^32; Barrett reduction needs a non-power"
            )));
        }
        if q.width() > MAX_MUL_LIMBS || k + 1 > MAX_MUL_LIMBS {
            return Err(Error::Parameter(format!(
                "modulus of {} limbs exceeds the {MAX_MUL_LIMBS}-limb multiplier",
                q.width()
            )));
        }
        let big_q = BigUint::from_slice(q.limbs());
        let mu_big = (BigUint::from(1u32) << (64 * k)) / &big_q;
        let mut mu = [0; MAX_LIMBS];
        for (dst, src) in mu.iter_mut().zip(mu_big.to_u32_digits()) {
            *dst = src;
        }
        let half_big: BigUint = (big_q - 1u32) >> 1;
        let mut half = WideInt::zero(q.width())?;
        for (dst, src) in half.limbs.iter_mut().zip(half_big.to_u32_digits()) {
            *dst = src;
        }
        Ok(Self { q, k, mu, half })
    }

    pub fn q(&self) -> &WideInt {
        &self.q
    }

    /// Limb width of residues.
    pub fn width(&self) -> usize {
        self.q.width()
    }

    /// Significant limbs of `q`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> u32 {
        self.q.bits()
    }

    /// `floor((q - 1) / 2)`, the largest centered-positive residue.
    pub fn half(&self) -> &WideInt {
        &self.half
    }

    /// `a mod q` for `a` of any width.
    pub fn reduce(&self, a: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
        let mut out = WideInt::zero(self.width())?;
        self.reduce_limbs(a.limbs(), &mut out.limbs[..self.width()], ctr);
        Ok(out)
    }

    /// `(a + b) mod q`.
    pub fn add(&self, a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
        self.check_residues(a, b)?;
        let mut out = *a;
        self.add_limbs(a.limbs(), b.limbs(), &mut out.limbs[..self.width()], ctr);
        Ok(out)
    }

    /// `(a - b) mod q`.
    pub fn sub(&self, a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
        self.check_residues(a, b)?;
        let mut out = *a;
        self.sub_limbs(a.limbs(), b.limbs(), &mut out.limbs[..self.width()], ctr);
        Ok(out)
    }

    /// `(a · b) mod q` through Karatsuba and Barrett.
    pub fn mul(&self, a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
        self.check_residues(a, b)?;
        let mut out = *a;
        self.mul_limbs(a.limbs(), b.limbs(), &mut out.limbs[..self.width()], ctr);
        Ok(out)
    }

    /// `-a mod q`.
    pub fn neg(&self, a: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
        let zero = WideInt::zero(self.width())?;
        self.sub(&zero, a, ctr)
    }

    fn check_residues(&self, a: &WideInt, b: &WideInt) -> Result<()> {
        for v in [a, b] {
            if v.width() != self.width() {
                return Err(Error::WidthMismatch {
                    left: v.width(),
                    right: self.width(),
                });
            }
            if v.value_cmp(&self.q).is_ge() {
                return Err(Error::Contract(format!(
                    "operand {v} is not reduced modulo {}",
                    self.q
                )));
            }
        }
        Ok(())
    }

    /// `out = (a + b) mod q` on `width()`-limb residues.
    ///
    /// Charges 2 `add` and `2(w - 1)` `addc`.
    pub(crate) fn add_limbs(
        &self,
        a: &[Limb],
        b: &[Limb],
        out: &mut [Limb],
        ctr: &mut InstrCounter,
    ) {
        let w = self.width();
        let mut r = [0; MAX_LIMBS];
        let carry = add_to(&mut r[..w], a, b, ctr);
        let mut d = [0; MAX_LIMBS];
        let borrow = sub_to(&mut d[..w], &r[..w], self.q.limbs(), ctr);
        let pick = if carry || !borrow { &d } else { &r };
        out.copy_from_slice(&pick[..w]);
    }

    /// `out = (a - b) mod q` on `width()`-limb residues. Same charge as [`Self::add_limbs`].
    pub(crate) fn sub_limbs(
        &self,
        a: &[Limb],
        b: &[Limb],
        out: &mut [Limb],
        ctr: &mut InstrCounter,
    ) {
        let w = self.width();
        let mut d = [0; MAX_LIMBS];
        let borrow = sub_to(&mut d[..w], a, b, ctr);
        let mut e = [0; MAX_LIMBS];
        add_to(&mut e[..w], &d[..w], self.q.limbs(), ctr);
        let pick = if borrow { &e } else { &d };
        out.copy_from_slice(&pick[..w]);
    }

    /// `out = (a · b) mod q` on `width()`-limb residues.
    pub(crate) fn mul_limbs(
        &self,
        a: &[Limb],
        b: &[Limb],
        out: &mut [Limb],
        ctr: &mut InstrCounter,
    ) {
        let w = self.width();
        let mut prod = [0; MAX_LIMBS];
        kmul(a, b, &mut prod[..2 * w], ctr);
        self.reduce_limbs(&prod[..2 * w], out, ctr);
    }

    /// `out = x mod q` for any `x.len()`, `out.len() == width()`.
    ///
    /// One Barrett step on the top `2k` limbs, then Horner folding of the
    /// remaining limbs in chunks of at most `k`.
    pub(crate) fn reduce_limbs(&self, x: &[Limb], out: &mut [Limb], ctr: &mut InstrCounter) {
        let k = self.k;
        let len = x.len();
        let mut window = [0; MAX_LIMBS];
        let mut r = [0; MAX_LIMBS];
        let mut pos = len.saturating_sub(2 * k);
        window[..len - pos].copy_from_slice(&x[pos..]);
        self.barrett_step(&window[..2 * k], &mut r[..k], ctr);
        while pos > 0 {
            let c = pos.min(k);
            pos -= c;
            window = [0; MAX_LIMBS];
            window[..c].copy_from_slice(&x[pos..pos + c]);
            window[c..c + k].copy_from_slice(&r[..k]);
            self.barrett_step(&window[..2 * k], &mut r[..k], ctr);
        }
        out.fill(0);
        out[..k].copy_from_slice(&r[..k]);
    }

    /// `r = x mod q` for a `2k`-limb `x`.
    ///
    /// Charges `2 K(k + 1)` for the two products, `3` `add` and `3k` `addc`.
    fn barrett_step(&self, x: &[Limb], r: &mut [Limb], ctr: &mut InstrCounter) {
        let k = self.k;
        debug_assert!(x.len() == 2 * k && r.len() == k);
        let e = k + 1;

        let mut q1 = [0; MAX_LIMBS];
        q1[..e].copy_from_slice(&x[k - 1..]);
        let mut q2 = [0; MAX_LIMBS];
        kmul(&q1[..e], &self.mu[..e], &mut q2[..2 * e], ctr);
        let mut q3 = [0; MAX_LIMBS];
        q3[..e].copy_from_slice(&q2[e..2 * e]);

        let mut q_ext = [0; MAX_LIMBS];
        q_ext[..k].copy_from_slice(&self.q.limbs()[..k]);
        let mut r2 = [0; MAX_LIMBS];
        kmul(&q3[..e], &q_ext[..e], &mut r2[..2 * e], ctr);

        let mut acc = [0; MAX_LIMBS];
        acc[..e].copy_from_slice(&x[..e]);
        sub_in_place(&mut acc[..e], &r2[..e], ctr);

        // at most two corrections are ever needed
        for _ in 0..2 {
            let mut d = acc;
            let borrow = sub_in_place(&mut d[..e], &q_ext[..e], ctr);
            if !borrow {
                acc = d;
            }
        }
        r.copy_from_slice(&acc[..k]);
    }

    /// `quot = floor(x / q)` by restoring bit-serial division; `quot.len() == x.len()`.
    ///
    /// Per dividend bit: 4 `add`, `2k` `addc` and one loop iteration.
    pub(crate) fn div_floor(&self, x: &[Limb], quot: &mut [Limb], ctr: &mut InstrCounter) {
        let k = self.k;
        let e = k + 1;
        let mut q_ext = [0; MAX_LIMBS];
        q_ext[..k].copy_from_slice(&self.q.limbs()[..k]);
        let mut rem = [0; MAX_LIMBS];
        quot.fill(0);
        for i in (0..32 * x.len()).rev() {
            ctr.loop_overhead += 1;
            let dbl = rem;
            add_in_place(&mut rem[..e], &dbl[..e], ctr);
            ctr.adds += 1;
            rem[0] |= (x[i / 32] >> (i % 32)) & 1;
            let mut d = rem;
            let borrow = sub_in_place(&mut d[..e], &q_ext[..e], ctr);
            if !borrow {
                rem = d;
            }
            ctr.adds += 1;
            quot[i / 32] |= ((!borrow) as Limb) << (i % 32);
        }
    }
}
