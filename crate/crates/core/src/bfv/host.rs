//! Host-side reference arithmetic on `u128` residues.
//!
//! Deliberately independent of the limb kernels: products are accumulated in
//! native `i128` (splitting coefficients into two digits when they are too
//! wide) and scaled with arbitrary-precision integers. The simulator kernels
//! are checked against this path.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

/// Signed representative in `(-q/2, q/2]`, negative iff `c > floor((q-1)/2)`.
#[inline]
pub(crate) fn center(c: u128, q: u128) -> i128 {
    if c > (q - 1) / 2 {
        -((q - c) as i128)
    } else {
        c as i128
    }
}

#[inline]
pub(crate) fn reduce_signed(v: i128, q: u128) -> u128 {
    v.rem_euclid(q as i128) as u128
}

pub(crate) fn add_vec(a: &[u128], b: &[u128], q: u128) -> Vec<u128> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = x + y;
            if s >= q {
                s - q
            } else {
                s
            }
        })
        .collect()
}

pub(crate) fn neg_vec(a: &[u128], q: u128) -> Vec<u128> {
    a.iter().map(|&x| if x == 0 { 0 } else { q - x }).collect()
}

/// `(a · s) mod (x^n + 1, q)` for ternary `s`.
pub(crate) fn mul_ternary(a: &[u128], s: &[i8], q: u128) -> Vec<u128> {
    let n = a.len();
    let ac: Vec<i128> = a.iter().map(|&c| center(c, q)).collect();
    let mut acc = vec![0i128; n];
    for (i, &si) in s.iter().enumerate() {
        match si {
            1 => {
                for j in 0..n - i {
                    acc[i + j] += ac[j];
                }
                for j in n - i..n {
                    acc[i + j - n] -= ac[j];
                }
            }
            -1 => {
                for j in 0..n - i {
                    acc[i + j] -= ac[j];
                }
                for j in n - i..n {
                    acc[i + j - n] += ac[j];
                }
            }
            _ => {}
        }
    }
    acc.into_iter().map(|v| reduce_signed(v, q)).collect()
}

/// `acc[k] += sign · Σ x_i y_j` over the negacyclic index pattern.
fn conv_accumulate(acc: &mut [i128], x: &[i64], y: &[i64]) {
    let n = x.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let xi = xi as i128;
        let (lo, hi) = acc.split_at_mut(i);
        for (a, &yj) in hi.iter_mut().zip(&y[..n - i]) {
            *a += xi * yj as i128;
        }
        for (a, &yj) in lo.iter_mut().zip(&y[n - i..]) {
            *a -= xi * yj as i128;
        }
    }
}

/// Exact negacyclic `Σ a_p · b_p` over the integers, on centered representatives.
///
/// `digit` is the split size used when products would overflow `i128`.
pub(crate) fn exact_product_sum(pairs: &[(&[u128], &[u128])], q: u128, digit: u32) -> Vec<BigInt> {
    let n = pairs[0].0.len();
    let bits = 128 - q.leading_zeros();
    let log2n = n.trailing_zeros() + pairs.len().next_power_of_two().trailing_zeros();
    let centered = |v: &[u128]| -> Vec<i128> { v.iter().map(|&c| center(c, q)).collect() };

    if 2 * (bits - 1) + log2n <= 126 {
        let mut acc = vec![0i128; n];
        for (a, b) in pairs {
            let x: Vec<i64> = centered(a).into_iter().map(|v| v as i64).collect();
            let y: Vec<i64> = centered(b).into_iter().map(|v| v as i64).collect();
            conv_accumulate(&mut acc, &x, &y);
        }
        return acc.into_iter().map(BigInt::from).collect();
    }

    // c = hi · 2^digit + lo with 0 <= lo < 2^digit; the middle digit product
    // comes from (hi + lo)(hi' + lo') - hi·hi' - lo·lo'.
    let mask = (1i128 << digit) - 1;
    let split = |v: &[u128]| -> [Vec<i64>; 3] {
        let c = centered(v);
        let lo: Vec<i64> = c.iter().map(|&x| (x & mask) as i64).collect();
        let hi: Vec<i64> = c.iter().map(|&x| (x >> digit) as i64).collect();
        let sum: Vec<i64> = lo.iter().zip(&hi).map(|(l, h)| l + h).collect();
        [lo, hi, sum]
    };
    let parts: Vec<([Vec<i64>; 3], [Vec<i64>; 3])> =
        pairs.iter().map(|(a, b)| (split(a), split(b))).collect();
    let accs: Vec<Vec<i128>> = (0..3)
        .into_par_iter()
        .map(|d| {
            let mut acc = vec![0i128; n];
            for (x, y) in &parts {
                conv_accumulate(&mut acc, &x[d], &y[d]);
            }
            acc
        })
        .collect();
    let (a0, a2, s) = (&accs[0], &accs[1], &accs[2]);
    (0..n)
        .map(|k| {
            let mid = BigInt::from(s[k]) - a0[k] - a2[k];
            (BigInt::from(a2[k]) << (2 * digit)) + (mid << digit) + a0[k]
        })
        .collect()
}

/// `sign(d) · floor((t·|d| + floor((q-1)/2)) / q) mod q`.
pub(crate) fn scale_round(d: &BigInt, t: u64, q: u128) -> u128 {
    let qb = BigUint::from(q);
    let half = BigUint::from((q - 1) / 2);
    let mag = d.magnitude() * t + half;
    let r = (mag / &qb)
        .mod_floor(&qb)
        .to_u128()
        .expect("residue below q");
    if d.sign() == Sign::Minus && !r.is_zero() {
        q - r
    } else {
        r
    }
}

/// Plain negacyclic product `a · b mod (x^n + 1, q)`.
pub(crate) fn mul_mod(a: &[u128], b: &[u128], q: u128, digit: u32) -> Vec<u128> {
    let qb = BigInt::from(q);
    exact_product_sum(&[(a, b)], q, digit)
        .iter()
        .map(|v| v.mod_floor(&qb).to_u128().expect("residue below q"))
        .collect()
}

/// Decryption rounding: `floor((t·v + floor((q-1)/2)) / q) mod t` for `v` in `[0, q)`.
pub(crate) fn round_to_plain(v: u128, t: u64, q: u128) -> u64 {
    let num = BigUint::from(v) * t + (q - 1) / 2;
    ((num / q) % t).to_u64().expect("below t")
}

/// Largest `b >= 0` with `2 · m · t · 2^b <= q`, or 0 if none.
pub(crate) fn budget_bits(max_residual: u128, t: u64, q: u128) -> u32 {
    let denom = BigUint::from(max_residual.max(1)) * t * 2u32;
    let q = BigUint::from(q);
    if denom > q {
        return 0;
    }
    let ratio = q / denom;
    ratio.bits() as u32 - 1
}
