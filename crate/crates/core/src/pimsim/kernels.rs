//! Item kernels executed on the simulated cores.
//!
//! Each kernel processes one work item (a ciphertext pair, a polynomial pair,
//! or a ciphertext and a scalar) entirely through [`crate::limbint`] and
//! [`crate::polyring`], charging an [`InstrCounter`]. The traces are
//! data-independent, which is what lets [`cost`] reproduce them in closed form.

use std::sync::Arc;

use crate::bfv::{Ciphertext, HeParams};
use crate::limbint::{
    add_in_place, kmul, mul32_shift_add, sub_to, InstrCounter, Limb, Modulus, WideInt, MAX_LIMBS,
};
use crate::polyring::{poly_add, poly_negacyclic_mul, poly_scalar_mul, Polynomial, RingParams};
use crate::Result;

/// Centered representatives as magnitude limbs plus a sign per coefficient.
struct Lifted {
    mag: Vec<Limb>,
    neg: Vec<bool>,
}

fn lift(p: &Polynomial, m: &Modulus, ctr: &mut InstrCounter) -> Lifted {
    let (n, w) = (p.n(), m.width());
    let mut mag = vec![0; n * w];
    let mut neg = vec![false; n];
    let (half, q) = (m.half().limbs(), m.q().limbs());
    let mut d = [0; MAX_LIMBS];
    let mut r = [0; MAX_LIMBS];
    for (i, c) in p.limbs().chunks_exact(w).enumerate() {
        ctr.loop_overhead += 1;
        ctr.loads += w as u64;
        let above = sub_to(&mut d[..w], half, c, ctr);
        sub_to(&mut r[..w], q, c, ctr);
        mag[i * w..(i + 1) * w].copy_from_slice(if above { &r[..w] } else { c });
        neg[i] = above;
        ctr.stores += w as u64 + 1;
    }
    Lifted { mag, neg }
}

/// Adds the signed negacyclic product `x · y` into `acc`, which holds the
/// positive accumulators followed by the negative ones.
fn accumulate_signed(
    x: &Lifted,
    y: &Lifted,
    ring: &RingParams,
    acc: &mut [Limb],
    ctr: &mut InstrCounter,
) {
    let (n, w, e) = (ring.n(), ring.width(), ring.acc_width());
    let mut local = InstrCounter::default();
    let mut prod = [0; MAX_LIMBS];
    for i in 0..n {
        local.loop_overhead += 1;
        local.loads += w as u64 + 1;
        let xi = &x.mag[i * w..(i + 1) * w];
        for j in 0..n {
            local.loop_overhead += 1;
            local.loads += (w + 1 + e) as u64;
            kmul(
                xi,
                &y.mag[j * w..(j + 1) * w],
                &mut prod[..2 * w],
                &mut local,
            );
            // x^n = -1: a wrapped term flips sign
            let wrap = i + j >= n;
            let slot = i + j - usize::from(wrap) * n;
            let negative = x.neg[i] ^ y.neg[j] ^ wrap;
            let at = (usize::from(negative) * n + slot) * e;
            add_in_place(&mut acc[at..at + e], &prod[..2 * w], &mut local);
            local.stores += e as u64;
        }
    }
    *ctr += local;
}

/// `sign(D) · floor((t·|D| + floor((q-1)/2)) / q) mod q` for `D = pos - neg`.
fn scale_round(
    pos: &[Limb],
    neg: &[Limb],
    t: Limb,
    ring: &Arc<RingParams>,
    ctr: &mut InstrCounter,
) -> Result<Polynomial> {
    let (w, e) = (ring.width(), ring.acc_width());
    let m = ring.modulus();
    let zero = [0; MAX_LIMBS];
    let mut out = Vec::with_capacity(ring.n() * w);
    for (ap, an) in pos.chunks_exact(e).zip(neg.chunks_exact(e)) {
        ctr.loop_overhead += 1;
        ctr.loads += 2 * e as u64;
        let (mut d1, mut d2) = ([0; MAX_LIMBS], [0; MAX_LIMBS]);
        let negative = sub_to(&mut d1[..e], ap, an, ctr);
        sub_to(&mut d2[..e], an, ap, ctr);
        let mag = if negative { &d2 } else { &d1 };

        let (mut scaled, mut carries) = ([0; MAX_LIMBS], [0; MAX_LIMBS]);
        for l in 0..e {
            let (lo, hi) = mul32_shift_add(mag[l], t, ctr);
            scaled[l] = lo;
            carries[l + 1] = hi;
        }
        add_in_place(&mut scaled[..e + 1], &carries[..e + 1], ctr);
        add_in_place(&mut scaled[..e + 1], m.half().limbs(), ctr);

        let mut quot = [0; MAX_LIMBS];
        m.div_floor(&scaled[..e + 1], &mut quot[..e + 1], ctr);
        let (mut r, mut rn) = ([0; MAX_LIMBS], [0; MAX_LIMBS]);
        m.reduce_limbs(&quot[..e + 1], &mut r[..w], ctr);
        m.sub_limbs(&zero[..w], &r[..w], &mut rn[..w], ctr);
        out.extend_from_slice(if negative { &rn[..w] } else { &r[..w] });
        ctr.stores += w as u64;
    }
    Polynomial::from_limbs(ring, out)
}

/// Component-wise sum, the shorter operand zero-padded.
pub(crate) fn add_item(
    params: &HeParams,
    a: &Ciphertext,
    b: &Ciphertext,
    ctr: &mut InstrCounter,
) -> Result<Ciphertext> {
    let zero = Polynomial::zero(params.ring());
    let len = a.len().max(b.len());
    let comps = (0..len)
        .map(|i| {
            let x = a.components().get(i).unwrap_or(&zero);
            let y = b.components().get(i).unwrap_or(&zero);
            poly_add(x, y, ctr)
        })
        .collect::<Result<Vec<_>>>()?;
    Ciphertext::new(params, comps, a.mul_depth().max(b.mul_depth()))
}

/// Tensor product with scale-and-round; the caller has checked depths.
pub(crate) fn mul_item(
    params: &HeParams,
    a: &Ciphertext,
    b: &Ciphertext,
    ctr: &mut InstrCounter,
) -> Result<Ciphertext> {
    let ring = params.ring();
    let m = ring.modulus();
    let (n, e) = (ring.n(), ring.acc_width());
    let [a0, a1] = [
        lift(&a.components()[0], m, ctr),
        lift(&a.components()[1], m, ctr),
    ];
    let [b0, b1] = [
        lift(&b.components()[0], m, ctr),
        lift(&b.components()[1], m, ctr),
    ];
    let t = params.t() as Limb;
    let mut comps = Vec::with_capacity(3);
    let terms: [&[(&Lifted, &Lifted)]; 3] =
        [&[(&a0, &b0)], &[(&a0, &b1), (&a1, &b0)], &[(&a1, &b1)]];
    for pairs in terms {
        let mut acc = vec![0; 2 * n * e];
        for (x, y) in pairs {
            accumulate_signed(x, y, ring, &mut acc, ctr);
        }
        let (pos, neg) = acc.split_at(n * e);
        comps.push(scale_round(pos, neg, t, ring, ctr)?);
    }
    Ciphertext::new(params, comps, 1)
}

/// Every component times `w`, mod `q`.
pub(crate) fn scalar_mul_item(
    params: &HeParams,
    ct: &Ciphertext,
    w: u64,
    ctr: &mut InstrCounter,
) -> Result<Ciphertext> {
    let s = WideInt::from_u64(w, params.width())?;
    let comps = ct
        .components()
        .iter()
        .map(|c| poly_scalar_mul(c, &s, ctr))
        .collect::<Result<Vec<_>>>()?;
    Ciphertext::new(params, comps, ct.mul_depth())
}

pub(crate) fn raw_mul_item(
    a: &Polynomial,
    b: &Polynomial,
    ctr: &mut InstrCounter,
) -> Result<Polynomial> {
    poly_negacyclic_mul(a, b, ctr)
}

/// Closed-form per-item instruction counts of the kernels above.
pub mod cost {
    use crate::limbint::{cost as lc, InstrCounter};
    use crate::polyring::cost as pc;

    fn io(loads: usize, stores: usize) -> InstrCounter {
        InstrCounter {
            loads: loads as u64,
            stores: stores as u64,
            loop_overhead: 1,
            ..Default::default()
        }
    }

    /// Add kernel producing `components` output polynomials.
    pub fn add_item(n: usize, w: usize, components: usize) -> InstrCounter {
        pc::add(n, w) * components as u64
    }

    /// Scalar-multiply kernel over `components` polynomials.
    pub fn scalar_mul_item(n: usize, w: usize, k: usize, components: usize) -> InstrCounter {
        pc::scalar_mul(n, w, k) * components as u64
    }

    pub fn raw_mul_item(n: usize, w: usize, k: usize) -> InstrCounter {
        pc::negacyclic_mul(n, w, k)
    }

    /// Ciphertext multiply: four lifts, four signed product loops and
    /// three scale-and-round passes.
    pub fn mul_item(n: usize, w: usize, k: usize) -> InstrCounter {
        let e = 2 * w + 1;
        let lift = (lc::wide_add(w) * 2 + io(w, w + 1)) * n as u64;
        let inner = lc::karatsuba(w) + lc::wide_add(e) + io(w + 1 + e, e);
        let product = io(w + 1, 0) * n as u64 + inner * (n * n) as u64;
        let times_t = InstrCounter {
            muls32: e as u64,
            ..Default::default()
        };
        let round = (io(2 * e, w)
            + lc::wide_add(e) * 2
            + times_t
            + lc::wide_add(e + 1) * 2
            + lc::div_floor(e + 1, k)
            + lc::reduce(e + 1, k)
            + lc::mod_add(w))
            * n as u64;
        lift * 4 + product * 4 + round * 3
    }
}
