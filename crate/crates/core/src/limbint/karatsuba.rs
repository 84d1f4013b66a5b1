use super::{add_in_place, mul32_shift_add, sub_in_place, sub_to, InstrCounter, Limb, MAX_LIMBS};

/// `out = a · b` for equal-width limb slices, `out.len() == 2 · a.len()`.
///
/// Splits into a low half of `h = ceil(w/2)` limbs and a zero-padded high
/// half, forms `z0 = lo·lo`, `z2 = hi·hi` and the middle term
/// `z0 + z2 + (a_lo - a_hi)(b_hi - b_lo)`. The difference factors are kept in
/// sign-magnitude form: both orders are subtracted and the borrow flag picks
/// the magnitude, so the instruction trace is operand-independent.
#[inline(always)]
pub(crate) fn kmul(a: &[Limb], b: &[Limb], out: &mut [Limb], ctr: &mut InstrCounter) {
    debug_assert!(b.len() == a.len() && out.len() == 2 * a.len() && out.len() <= MAX_LIMBS);
    if a.len() == 1 {
        let (lo, hi) = mul32_shift_add(a[0], b[0], ctr);
        out[0] = lo;
        out[1] = hi;
    } else {
        kmul_split(a, b, out, ctr);
    }
}

const HALF: usize = MAX_LIMBS / 4;
const MID: usize = 2 * HALF + 1;

fn kmul_split(a: &[Limb], b: &[Limb], out: &mut [Limb], ctr: &mut InstrCounter) {
    let w = a.len();

    let h = w.div_ceil(2);
    let (mut a_lo, mut a_hi) = ([0; HALF], [0; HALF]);
    let (mut b_lo, mut b_hi) = ([0; HALF], [0; HALF]);
    a_lo[..h].copy_from_slice(&a[..h]);
    a_hi[..w - h].copy_from_slice(&a[h..]);
    b_lo[..h].copy_from_slice(&b[..h]);
    b_hi[..w - h].copy_from_slice(&b[h..]);

    let mut z0 = [0; 2 * HALF];
    let mut z2 = [0; 2 * HALF];
    kmul(&a_lo[..h], &b_lo[..h], &mut z0[..2 * h], ctr);
    kmul(&a_hi[..h], &b_hi[..h], &mut z2[..2 * h], ctr);

    let (mut da_pos, mut da_neg) = ([0; HALF], [0; HALF]);
    let a_borrow = sub_to(&mut da_pos[..h], &a_lo[..h], &a_hi[..h], ctr);
    sub_to(&mut da_neg[..h], &a_hi[..h], &a_lo[..h], ctr);
    let da = if a_borrow { da_neg } else { da_pos };

    let (mut db_pos, mut db_neg) = ([0; HALF], [0; HALF]);
    let b_borrow = sub_to(&mut db_pos[..h], &b_hi[..h], &b_lo[..h], ctr);
    sub_to(&mut db_neg[..h], &b_lo[..h], &b_hi[..h], ctr);
    let db = if b_borrow { db_neg } else { db_pos };

    let mut zm = [0; 2 * HALF];
    kmul(&da[..h], &db[..h], &mut zm[..2 * h], ctr);

    // middle = a_lo·b_hi + a_hi·b_lo, non-negative and below B^(2h+1)
    let m = 2 * h + 1;
    let mut sum = [0; MID];
    sum[..2 * h].copy_from_slice(&z0[..2 * h]);
    add_in_place(&mut sum[..m], &z2[..2 * h], ctr);
    let mut plus = sum;
    add_in_place(&mut plus[..m], &zm[..2 * h], ctr);
    let mut minus = sum;
    sub_in_place(&mut minus[..m], &zm[..2 * h], ctr);
    let middle = if a_borrow ^ b_borrow { minus } else { plus };

    out.fill(0);
    out[..2 * h].copy_from_slice(&z0[..2 * h]);
    out[2 * h..].copy_from_slice(&z2[..2 * w - 2 * h]);
    // the product fits 2w limbs, so middle limbs past the window are zero
    let room = 2 * w - h;
    add_in_place(&mut out[h..], &middle[..m.min(room)], ctr);
}
