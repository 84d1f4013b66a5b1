//! Closed-form instruction counts of the limb routines.
//!
//! Every routine in [`crate::limbint`] executes a data-independent instruction
//! trace, so these formulas reproduce the measured counters exactly and let
//! the cost model skip materializing operands.

use super::InstrCounter;

fn ic(adds: u64, addcs: u64) -> InstrCounter {
    InstrCounter {
        adds,
        addcs,
        ..Default::default()
    }
}

/// Ripple add or subtract over `w` limbs.
pub fn wide_add(w: usize) -> InstrCounter {
    ic(1, w as u64 - 1)
}

/// Karatsuba product of two `w`-limb operands.
pub fn karatsuba(w: usize) -> InstrCounter {
    if w == 1 {
        return InstrCounter {
            muls32: 1,
            ..Default::default()
        };
    }
    let h = w.div_ceil(2) as u64;
    let w = w as u64;
    karatsuba(h as usize) * 3 + ic(8, 4 * (h - 1) + 6 * h + (2 * w - h - 1))
}

/// Schoolbook product of two `w`-limb operands.
pub fn schoolbook(w: usize) -> InstrCounter {
    let cells = (w * w) as u64;
    InstrCounter {
        adds: cells,
        addcs: cells,
        muls32: cells,
        ..Default::default()
    }
}

/// One Barrett step for a modulus of `k` significant limbs.
pub fn barrett_step(k: usize) -> InstrCounter {
    karatsuba(k + 1) * 2 + ic(3, 3 * k as u64)
}

/// Number of Barrett steps needed to reduce a `len`-limb value.
pub fn reduce_steps(len: usize, k: usize) -> u64 {
    1 + len.saturating_sub(2 * k).div_ceil(k) as u64
}

/// Reduction of a `len`-limb value modulo a `k`-limb modulus.
pub fn reduce(len: usize, k: usize) -> InstrCounter {
    barrett_step(k) * reduce_steps(len, k)
}

/// Modular addition or subtraction of `w`-limb residues.
pub fn mod_add(w: usize) -> InstrCounter {
    wide_add(w) * 2
}

/// Modular multiplication of `w`-limb residues modulo a `k`-limb modulus.
pub fn mod_mul(w: usize, k: usize) -> InstrCounter {
    karatsuba(w) + reduce(2 * w, k)
}

/// Bit-serial floor division of a `len`-limb value by a `k`-limb modulus.
pub fn div_floor(len: usize, k: usize) -> InstrCounter {
    let bits = 32 * len as u64;
    InstrCounter {
        adds: 4 * bits,
        addcs: 2 * k as u64 * bits,
        loop_overhead: bits,
        ..Default::default()
    }
}
