use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// Instruction counts by cost class.
///
/// Subtraction and logical shifts are single-cycle ALU operations on the
/// modeled device and are charged to the `adds` (first limb) and `addcs`
/// (borrow/carry-chained limbs) classes. `muls32` counts invocations of the
/// software 32x32 multiply; its cycle price lives in the cost table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstrCounter {
    pub adds: u64,
    pub addcs: u64,
    pub muls32: u64,
    pub loads: u64,
    pub stores: u64,
    pub loop_overhead: u64,
}

impl InstrCounter {
    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }

    /// Sum of all class counts, unweighted.
    pub fn total(&self) -> u64 {
        self.adds + self.addcs + self.muls32 + self.loads + self.stores + self.loop_overhead
    }
}

impl AddAssign for InstrCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.adds += rhs.adds;
        self.addcs += rhs.addcs;
        self.muls32 += rhs.muls32;
        self.loads += rhs.loads;
        self.stores += rhs.stores;
        self.loop_overhead += rhs.loop_overhead;
    }
}

impl Add for InstrCounter {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl Mul<u64> for InstrCounter {
    type Output = Self;

    fn mul(self, k: u64) -> Self {
        Self {
            adds: self.adds * k,
            addcs: self.addcs * k,
            muls32: self.muls32 * k,
            loads: self.loads * k,
            stores: self.stores * k,
            loop_overhead: self.loop_overhead * k,
        }
    }
}

impl std::iter::Sum for InstrCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |acc, c| acc + c)
    }
}
