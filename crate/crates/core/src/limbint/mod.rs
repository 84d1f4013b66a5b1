//! Fixed-width unsigned integers stored as little-endian 32-bit limbs.
//!
//! Everything in this module is assembled from the three operations the
//! modeled PIM core offers natively or through its compiler runtime:
//! 32-bit `add`, 32-bit `addc` (add with carry-in) and a software
//! shift-and-add 32x32 multiply. Every routine charges an [`InstrCounter`]
//! and the charge never depends on operand values, so instruction counts are
//! a function of widths alone (see [`cost`]).

mod barrett;
pub mod cost;
mod counter;
mod karatsuba;

use std::cmp::Ordering;
use std::fmt;

pub use barrett::Modulus;
pub use counter::InstrCounter;
pub(crate) use karatsuba::kmul;

use crate::{Error, Result};

/// One 32-bit machine word.
pub type Limb = u32;

/// Storage capacity of a [`WideInt`] in limbs.
///
/// Operands of a multiplication may use up to half of it.
pub const MAX_LIMBS: usize = 16;

/// Largest operand width accepted by the multipliers.
pub const MAX_MUL_LIMBS: usize = MAX_LIMBS / 2;

/// A fixed-width unsigned integer of `width` little-endian limbs.
///
/// Limbs above `width` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct WideInt {
    limbs: [Limb; MAX_LIMBS],
    width: u8,
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_LIMBS {
        return Err(Error::Parameter(format!(
            "limb width {width} outside 1..={MAX_LIMBS}"
        )));
    }
    Ok(())
}

impl WideInt {
    pub fn zero(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            limbs: [0; MAX_LIMBS],
            width: width as u8,
        })
    }

    pub fn one(width: usize) -> Result<Self> {
        let mut v = Self::zero(width)?;
        v.limbs[0] = 1;
        Ok(v)
    }

    pub fn from_limbs(limbs: &[Limb]) -> Result<Self> {
        let mut v = Self::zero(limbs.len())?;
        v.limbs[..limbs.len()].copy_from_slice(limbs);
        Ok(v)
    }

    pub fn from_u128(value: u128, width: usize) -> Result<Self> {
        let mut v = Self::zero(width)?;
        let mut rest = value;
        for limb in v.limbs.iter_mut().take(width.min(4)) {
            *limb = rest as Limb;
            rest >>= 32;
        }
        if rest != 0 {
            return Err(Error::Parameter(format!(
                "value {value:#x} does not fit in {width} limbs"
            )));
        }
        Ok(v)
    }

    pub fn from_u64(value: u64, width: usize) -> Result<Self> {
        Self::from_u128(value as u128, width)
    }

    pub fn limbs(&self) -> &[Limb] {
        &self.limbs[..self.width as usize]
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    /// Value as `u128`, or `None` if it does not fit.
    pub fn to_u128(&self) -> Option<u128> {
        if self.limbs[4..].iter().any(|&l| l != 0) {
            return None;
        }
        Some(
            self.limbs[..4]
                .iter()
                .rev()
                .fold(0u128, |acc, &l| (acc << 32) | l as u128),
        )
    }

    /// Number of significant bits.
    pub fn bits(&self) -> u32 {
        match self.limbs.iter().rposition(|&l| l != 0) {
            Some(i) => 32 * i as u32 + (32 - self.limbs[i].leading_zeros()),
            None => 0,
        }
    }

    /// Number of significant limbs (0 for zero).
    pub fn significant_limbs(&self) -> usize {
        self.limbs
            .iter()
            .rposition(|&l| l != 0)
            .map_or(0, |i| i + 1)
    }

    /// The same value at another width; fails if it would not fit.
    pub fn resize(&self, width: usize) -> Result<Self> {
        check_width(width)?;
        if self.significant_limbs() > width {
            return Err(Error::Parameter(format!(
                "value needs {} limbs, cannot narrow to {width}",
                self.significant_limbs()
            )));
        }
        Ok(Self {
            limbs: self.limbs,
            width: width as u8,
        })
    }

    /// Numeric comparison, ignoring widths.
    pub fn value_cmp(&self, other: &Self) -> Ordering {
        self.limbs.iter().rev().cmp(other.limbs.iter().rev())
    }

    fn ensure_same_width(&self, other: &Self) -> Result<()> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                left: self.width(),
                right: other.width(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for WideInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideInt<{}>(0x", self.width)?;
        for l in self.limbs().iter().rev() {
            write!(f, "{l:08x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for WideInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u128() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{self:?}"),
        }
    }
}

/// `a + b + cin`, returning the low limb and the carry-out. Charges one `addc`.
#[inline(always)]
pub fn add_carry(a: Limb, b: Limb, cin: bool, ctr: &mut InstrCounter) -> (Limb, bool) {
    ctr.addcs += 1;
    let s = a as u64 + b as u64 + cin as u64;
    (s as Limb, s >> 32 != 0)
}

/// Charge of one ripple pass over `len` limbs: a plain first limb, then carries.
#[inline(always)]
fn charge_ripple(len: usize, ctr: &mut InstrCounter) {
    ctr.adds += 1;
    ctr.addcs += len as u64 - 1;
}

/// `acc += b` over `acc.len()` limbs, `b` zero-extended. Returns the carry-out.
///
/// Charges 1 `add` and `acc.len() - 1` `addc`.
#[inline(always)]
pub(crate) fn add_in_place(acc: &mut [Limb], b: &[Limb], ctr: &mut InstrCounter) -> bool {
    debug_assert!(!acc.is_empty() && b.len() <= acc.len());
    charge_ripple(acc.len(), ctr);
    let (lo, hi) = acc.split_at_mut(b.len());
    let mut carry = false;
    for (x, &y) in lo.iter_mut().zip(b) {
        let s = *x as u64 + y as u64 + carry as u64;
        *x = s as Limb;
        carry = s >> 32 != 0;
    }
    for x in hi {
        let (s, c) = x.overflowing_add(carry as Limb);
        *x = s;
        carry = c;
    }
    carry
}

/// `acc -= b` over `acc.len()` limbs, `b` zero-extended. Returns the borrow-out.
///
/// Same charge as [`add_in_place`].
#[inline(always)]
pub(crate) fn sub_in_place(acc: &mut [Limb], b: &[Limb], ctr: &mut InstrCounter) -> bool {
    debug_assert!(!acc.is_empty() && b.len() <= acc.len());
    charge_ripple(acc.len(), ctr);
    let (lo, hi) = acc.split_at_mut(b.len());
    let mut borrow = false;
    for (x, &y) in lo.iter_mut().zip(b) {
        let (d1, b1) = x.overflowing_sub(y);
        let (d2, b2) = d1.overflowing_sub(borrow as Limb);
        *x = d2;
        borrow = b1 | b2;
    }
    for x in hi {
        let (d, b) = x.overflowing_sub(borrow as Limb);
        *x = d;
        borrow = b;
    }
    borrow
}

/// `out = a + b`, all three of equal length. Returns the carry-out.
#[inline(always)]
pub(crate) fn add_to(out: &mut [Limb], a: &[Limb], b: &[Limb], ctr: &mut InstrCounter) -> bool {
    out.copy_from_slice(a);
    add_in_place(out, b, ctr)
}

/// `out = a - b`, all three of equal length. Returns the borrow-out.
#[inline(always)]
pub(crate) fn sub_to(out: &mut [Limb], a: &[Limb], b: &[Limb], ctr: &mut InstrCounter) -> bool {
    out.copy_from_slice(a);
    sub_in_place(out, b, ctr)
}

/// Ripple-carry addition modulo `2^(32·width)`.
///
/// Charges exactly 1 `add` and `width - 1` `addc`.
pub fn wide_add(a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<(WideInt, bool)> {
    a.ensure_same_width(b)?;
    let mut out = *a;
    let w = a.width();
    let carry = add_in_place(&mut out.limbs[..w], b.limbs(), ctr);
    Ok((out, carry))
}

/// Borrow-chain subtraction modulo `2^(32·width)`; the flag is set iff `a < b`.
pub fn wide_sub(a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<(WideInt, bool)> {
    a.ensure_same_width(b)?;
    let mut out = *a;
    let w = a.width();
    let borrow = sub_in_place(&mut out.limbs[..w], b.limbs(), ctr);
    Ok((out, borrow))
}

/// 32x32 -> 64-bit product of the device's software multiply.
///
/// The device runtime computes this with a shift-and-add loop; the host
/// evaluates it natively. Either way the counter is charged one `muls32`
/// invocation, which the cost table prices (96 cycles by default).
#[inline(always)]
pub fn mul32_shift_add(a: Limb, b: Limb, ctr: &mut InstrCounter) -> (Limb, Limb) {
    ctr.muls32 += 1;
    let p = a as u64 * b as u64;
    (p as Limb, (p >> 32) as Limb)
}

/// The shift-and-add loop itself: one conditional add and one shift per
/// multiplier bit.
pub fn shift_add_reference(a: Limb, b: Limb) -> (Limb, Limb) {
    let mut acc: u64 = 0;
    let mut addend = a as u64;
    let mut m = b;
    while m != 0 {
        acc = acc.wrapping_add(addend & 0u64.wrapping_sub((m & 1) as u64));
        addend <<= 1;
        m >>= 1;
    }
    (acc as Limb, (acc >> 32) as Limb)
}

fn check_mul_widths(a: &WideInt, b: &WideInt) -> Result<()> {
    a.ensure_same_width(b)?;
    if a.width() > MAX_MUL_LIMBS {
        return Err(Error::Parameter(format!(
            "multiplication operands limited to {MAX_MUL_LIMBS} limbs, got {}",
            a.width()
        )));
    }
    Ok(())
}

/// Exact double-width product over the full limb-product grid.
pub fn schoolbook_mul(a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
    check_mul_widths(a, b)?;
    let w = a.width();
    let mut out = WideInt::zero(2 * w)?;
    for i in 0..w {
        let mut carry: Limb = 0;
        for j in 0..w {
            let (lo, hi) = mul32_shift_add(a.limbs[i], b.limbs[j], ctr);
            ctr.adds += 1;
            let (s1, c1) = out.limbs[i + j].overflowing_add(lo);
            let (s2, c2) = add_carry(s1, carry, false, ctr);
            out.limbs[i + j] = s2;
            // a·b + out + carry < 2^64, so the new carry fits one limb.
            carry = hi + c1 as Limb + c2 as Limb;
        }
        out.limbs[i + w] = carry;
    }
    Ok(out)
}

/// Exact double-width product by recursive Karatsuba over 32-bit chunks.
///
/// Bitwise identical to [`schoolbook_mul`]; at width 2 it performs three
/// 32-bit multiplies instead of four.
pub fn karatsuba_mul(a: &WideInt, b: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
    check_mul_widths(a, b)?;
    let w = a.width();
    let mut out = WideInt::zero(2 * w)?;
    kmul(a.limbs(), b.limbs(), &mut out.limbs[..2 * w], ctr);
    Ok(out)
}

/// `a mod q` for an `a` of any width, by Barrett reduction.
///
/// Builds the Barrett context for `q` on every call; hot paths hold a
/// [`Modulus`] instead.
pub fn mod_reduce(a: &WideInt, q: &WideInt, ctr: &mut InstrCounter) -> Result<WideInt> {
    Modulus::new(*q)?.reduce(a, ctr)
}
