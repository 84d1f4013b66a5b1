//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p pimhe-bench --test acceptance`. Each check prints
//! `[PASS]` or `[FAIL]` with its measured figures; the process exits nonzero
//! if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use pimhe::bfv::{
    decode_scalar, decode_vector, decrypt, decrypt_with_budget, encode_scalar, encrypt, he_add,
    he_mul, keygen, Ciphertext, HeParams, Plaintext, SecurityLevel,
};
use pimhe::limbint::{karatsuba_mul, mod_reduce, schoolbook_mul, InstrCounter, WideInt};
use pimhe::pimsim::{
    cost_only_estimate, run_vector_add_kernel, run_vector_mul_kernel, KernelKind, PimConfig,
};
use pimhe::polyring::{poly_negacyclic_mul, Polynomial, RingParams};
use pimhe::workloads::{
    linreg_pipeline, mean_pipeline, mean_plan, variance_pipeline, Dataset, Encoding, KeyBundle,
    LinregModel, LinregOptions, MeanOptions, Reduction,
};
use pimhe_bench::{run, BenchSpec, Cli};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const LEVELS: [SecurityLevel; 3] = [
    SecurityLevel::Bits27,
    SecurityLevel::Bits54,
    SecurityLevel::Bits109,
];

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_plain(p: &HeParams, rng: &mut impl Rng) -> Plaintext {
    Plaintext::new(p, (0..p.n()).map(|_| rng.gen_range(0..p.t())).collect()).unwrap()
}

fn random_ciphertext(p: &HeParams, rng: &mut impl Rng) -> Ciphertext {
    let comps = (0..2)
        .map(|_| {
            let c: Vec<u128> = (0..p.n()).map(|_| rng.gen_range(0..p.q())).collect();
            Polynomial::from_u128s(p.ring(), &c).unwrap()
        })
        .collect();
    Ciphertext::new(p, comps, 0).unwrap()
}

fn big_ratio(r: &Ratio<i128>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn to_big(w: &WideInt) -> BigUint {
    BigUint::from_slice(w.limbs())
}

fn wide(rng: &mut impl Rng, width: usize) -> WideInt {
    let limbs: Vec<u32> = (0..width).map(|_| rng.gen()).collect();
    WideInt::from_limbs(&limbs).unwrap()
}

fn roundtrip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut exact = 0;
    for level in LEVELS {
        let p = HeParams::standard(level).unwrap();
        let (sk, pk) = keygen(&p, 11).unwrap();
        for i in 0..100 {
            let m = random_plain(&p, &mut rng);
            let ct = encrypt(&p, &pk, &m, 1000 + i).unwrap();
            exact += usize::from(decrypt(&p, &sk, &ct).unwrap() == m);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        exact == 300 && secs < 60.0,
        format!("{exact}/300 exact in {secs:.1} s (limit 60 s)"),
    )
}

fn additive() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut exact = 0;
    for level in LEVELS {
        let p = HeParams::standard(level).unwrap();
        let t = p.t();
        let (sk, pk) = keygen(&p, 12).unwrap();
        for i in 0..100 {
            let (a, b) = (random_plain(&p, &mut rng), random_plain(&p, &mut rng));
            let ca = encrypt(&p, &pk, &a, 2 * i).unwrap();
            let cb = encrypt(&p, &pk, &b, 2 * i + 1).unwrap();
            let got = decode_vector(
                &decrypt(&p, &sk, &he_add(&p, &ca, &cb).unwrap()).unwrap(),
                p.n(),
            );
            let want: Vec<u64> = a
                .coeffs()
                .iter()
                .zip(b.coeffs())
                .map(|(x, y)| (x + y) % t)
                .collect();
            exact += usize::from(got == want);
        }
    }
    ensure(exact == 300, format!("{exact}/300 slot-wise sums exact"))
}

fn multiplicative() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut exact = 0;
    let mut notes = Vec::new();
    for level in LEVELS {
        let p = HeParams::standard(level).unwrap();
        let t = p.t();
        let (sk, pk) = keygen(&p, 13).unwrap();
        let mut min_budget = u32::MAX;
        for i in 0..100 {
            let (a, b) = (rng.gen_range(0..t), rng.gen_range(0..t));
            let ca = encrypt(&p, &pk, &encode_scalar(&p, a).unwrap(), 2 * i).unwrap();
            let cb = encrypt(&p, &pk, &encode_scalar(&p, b).unwrap(), 2 * i + 1).unwrap();
            let (pt, budget) =
                decrypt_with_budget(&p, &sk, &he_mul(&p, &ca, &cb).unwrap()).unwrap();
            min_budget = min_budget.min(budget);
            exact += usize::from(decode_scalar(&pt) == a * b % t && budget > 0);
        }
        notes.push(format!("{level}-bit t={t} min budget {min_budget}"));
    }
    ensure(
        exact == 300,
        format!("{exact}/300 exact with budget > 0 ({})", notes.join(", ")),
    )
}

fn arithmetic() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ctr = InstrCounter::default();
    let mut bad = Vec::new();

    let mut mul_ok = 0;
    for width in [2, 4] {
        for _ in 0..1000 {
            let (a, b) = (wide(&mut rng, width), wide(&mut rng, width));
            let k = karatsuba_mul(&a, &b, &mut ctr).unwrap();
            let s = schoolbook_mul(&a, &b, &mut ctr).unwrap();
            mul_ok += usize::from(k == s && to_big(&k) == to_big(&a) * to_big(&b));
        }
    }
    if mul_ok != 2000 {
        bad.push(format!("karatsuba {mul_ok}/2000"));
    }

    let primes: [u128; 3] = [
        134215681,
        18014398509404161,
        649037107316853453566312040923137,
    ];
    let mut red_ok = 0;
    for i in 0..10_000 {
        let q = if i % 4 == 0 {
            WideInt::from_u128(primes[i % 3], [1, 2, 4][i % 3]).unwrap()
        } else {
            loop {
                let w = rng.gen_range(1..=6);
                let q = wide(&mut rng, w);
                let k = q.significant_limbs();
                let power =
                    k > 0 && q.limbs()[..k - 1].iter().all(|&l| l == 0) && q.limbs()[k - 1] == 1;
                if k > 0 && !power {
                    break q;
                }
            }
        };
        let w = rng.gen_range(q.width()..=16);
        let a = wide(&mut rng, w);
        let r = mod_reduce(&a, &q, &mut ctr).unwrap();
        red_ok += usize::from(to_big(&r) == to_big(&a) % to_big(&q));
    }
    if red_ok != 10_000 {
        bad.push(format!("mod_reduce {red_ok}/10000"));
    }

    let mut poly_ok = 0;
    for n in [4usize, 8, 16] {
        for q in [17u128, 97] {
            let ring = RingParams::from_u128(n, q).unwrap();
            for _ in 0..200 {
                let a: Vec<u128> = (0..n).map(|_| rng.gen_range(0..q)).collect();
                let b: Vec<u128> = (0..n).map(|_| rng.gen_range(0..q)).collect();
                let mut want = vec![BigInt::zero(); n];
                for i in 0..n {
                    for j in 0..n {
                        let term = BigInt::from(a[i]) * BigInt::from(b[j]);
                        if i + j < n {
                            want[i + j] += term;
                        } else {
                            want[i + j - n] -= term;
                        }
                    }
                }
                let qb = BigInt::from(q);
                let want: Vec<u128> = want
                    .into_iter()
                    .map(|v| {
                        let r = ((v % &qb) + &qb) % &qb;
                        u128::try_from(r).unwrap()
                    })
                    .collect();
                let pa = Polynomial::from_u128s(&ring, &a).unwrap();
                let pb = Polynomial::from_u128s(&ring, &b).unwrap();
                let got = poly_negacyclic_mul(&pa, &pb, &mut ctr).unwrap().to_u128s();
                poly_ok += usize::from(got == want);
            }
        }
    }
    if poly_ok != 1200 {
        bad.push(format!("negacyclic {poly_ok}/1200"));
    }
    let detail = format!(
        "karatsuba {mul_ok}/2000, mod_reduce {red_ok}/10000, negacyclic {poly_ok}/1200 vs arbitrary precision"
    );
    ensure(bad.is_empty(), detail)
}

fn transparency() -> Check {
    let p = HeParams::standard(SecurityLevel::Bits27).unwrap();
    let cfg = PimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs = |k: usize, rng: &mut ChaCha8Rng| -> (Vec<Ciphertext>, Vec<Ciphertext>) {
        (0..k)
            .map(|_| (random_ciphertext(&p, rng), random_ciphertext(&p, rng)))
            .unzip()
    };
    let (a, b) = pairs(1000, &mut rng);
    let (sums, _) = run_vector_add_kernel(&p, &a, &b, &cfg).unwrap();
    let add_ok = (0..1000)
        .filter(|&i| sums[i] == he_add(&p, &a[i], &b[i]).unwrap())
        .count();
    let (a, b) = pairs(100, &mut rng);
    let (prods, _) = run_vector_mul_kernel(&p, &a, &b, &cfg).unwrap();
    let mul_ok = (0..100)
        .filter(|&i| prods[i] == he_mul(&p, &a[i], &b[i]).unwrap())
        .count();
    ensure(
        add_ok == 1000 && mul_ok == 100,
        format!("add {add_ok}/1000, mul {mul_ok}/100 bit-identical at n=1024"),
    )
}

fn saturation() -> Check {
    let mut bad = Vec::new();
    let mut sample = String::new();
    for level in LEVELS {
        let p = HeParams::standard(level).unwrap();
        for (kind, items) in [
            (KernelKind::Add { lhs: 2, rhs: 2 }, 20_480),
            (KernelKind::Mul, 5_120),
        ] {
            let ms: Vec<f64> = (1..=16)
                .map(|tasklets| {
                    let cfg = PimConfig {
                        tasklets,
                        ..Default::default()
                    };
                    cost_only_estimate(kind, items, &p, &cfg)
                        .unwrap()
                        .elapsed_ms
                })
                .collect();
            let falling = ms[..11].windows(2).all(|w| w[1] < w[0]);
            let flat = ms[10..].iter().all(|&v| v == ms[10]);
            if !(falling && flat) {
                bad.push(format!("{level}-bit {kind}"));
            }
            if level == SecurityLevel::Bits109 && kind == KernelKind::Mul {
                sample = format!(
                    "109-bit mul {:.0} ms at 1 tasklet, {:.0} ms at 11..16",
                    ms[0], ms[10]
                );
            }
        }
    }
    ensure(
        bad.is_empty(),
        format!(
            "strictly decreasing 1->11, equal 11->16 for add and mul at all sets; {sample}{}",
            fail_list(&bad)
        ),
    )
}

fn fail_list(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(", "))
    }
}

fn asymmetry() -> Check {
    let p = HeParams::standard(SecurityLevel::Bits109).unwrap();
    let cfg = PimConfig {
        num_cores: 1,
        ..Default::default()
    };
    let per_item = |kind| {
        let r = cost_only_estimate(kind, 64, &p, &cfg).unwrap();
        r.cycles_per_core as f64 / 64.0
    };
    let (add, mul) = (
        per_item(KernelKind::Add { lhs: 2, rhs: 2 }),
        per_item(KernelKind::Mul),
    );
    let ratio = mul / add;
    ensure(
        ratio >= 30.0,
        format!(
            "128-bit mul/add per-element cycles = {ratio:.0} (>= 30); add {add:.0}, mul {mul:.0}"
        ),
    )
}

fn flatness() -> Check {
    let cfg = PimConfig::default();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for level in LEVELS {
        let p = HeParams::standard(level).unwrap();
        let ms: Vec<f64> = [640, 1280, 2560]
            .iter()
            .map(|&u| {
                mean_plan(u, 1, &p, &cfg, MeanOptions::default())
                    .unwrap()
                    .total
                    .elapsed_ms
            })
            .collect();
        let lo = ms.iter().cloned().fold(f64::MAX, f64::min);
        let hi = ms.iter().cloned().fold(0.0, f64::max);
        let spread = (hi - lo) / lo;
        worst = worst.max(spread);
        notes.push(format!(
            "{level}-bit {:.4}/{:.4}/{:.4} ms",
            ms[0], ms[1], ms[2]
        ));
    }
    ensure(
        worst < 0.10,
        format!(
            "mean at 640/1280/2560 users on 2524 cores: max spread {:.1}% (< 10%); {}",
            worst * 100.0,
            notes.join(", ")
        ),
    )
}

fn oracle_mean(d: &Dataset) -> Vec<BigRational> {
    (0..d.cols())
        .map(|j| {
            let s: BigInt = d.column(j).iter().map(|&v| BigInt::from(v)).sum();
            BigRational::new(s, BigInt::from(d.users()))
        })
        .collect()
}

fn oracle_variance(d: &Dataset) -> Vec<BigRational> {
    let u = BigRational::from_integer(BigInt::from(d.users()));
    oracle_mean(d)
        .into_iter()
        .enumerate()
        .map(|(j, mu)| {
            let ss: BigRational = d
                .column(j)
                .iter()
                .map(|&v| {
                    let dev = BigRational::from_integer(BigInt::from(v)) - &mu;
                    &dev * &dev
                })
                .sum();
            ss / &u
        })
        .collect()
}

fn oracle_dot(d: &Dataset, m: &LinregModel, t: u64) -> Vec<BigRational> {
    let t = BigInt::from(t);
    d.rows()
        .iter()
        .map(|row| {
            let s: BigInt = row
                .iter()
                .zip(&m.weights)
                .map(|(&x, &w)| BigInt::from(x) * BigInt::from(w))
                .sum::<BigInt>()
                + BigInt::from(m.bias);
            let r = ((s % &t) + &t) % &t;
            debug_assert!(!r.is_negative());
            BigRational::from_integer(r)
        })
        .collect()
}

fn matches(answers: &[Ratio<i128>], want: &[BigRational]) -> bool {
    answers.len() == want.len() && answers.iter().zip(want).all(|(a, w)| big_ratio(a) == *w)
}

fn random_rows(rng: &mut impl Rng, users: usize, cols: usize, max: u64) -> Dataset {
    Dataset::new(
        (0..users)
            .map(|_| (0..cols).map(|_| rng.gen_range(0..=max)).collect())
            .collect(),
    )
    .unwrap()
}

fn workloads() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let wide_t = HeParams::with_plain_modulus(SecurityLevel::Bits27, 257).unwrap();
    let std27 = HeParams::standard(SecurityLevel::Bits27).unwrap();
    let t = std27.t();
    let (mut mean_ok, mut var_ok, mut lin_ok) = (0, 0, 0);
    let mut errors = Vec::new();

    for seed in 0..20u64 {
        let cfg = PimConfig {
            num_cores: if seed % 3 == 0 { 16 } else { 2524 },
            ..Default::default()
        };

        let users = rng.gen_range(1..=64);
        let cols = rng.gen_range(1..=3);
        let d = random_rows(&mut rng, users, cols, 256 / users as u64);
        let opts = MeanOptions {
            encoding: if seed % 2 == 0 {
                Encoding::Scalar
            } else {
                Encoding::Packed
            },
            reduction: if seed % 4 < 2 {
                Reduction::BankLocal
            } else {
                Reduction::FullTree
            },
        };
        let keys = KeyBundle::generate(wide_t.clone(), seed).unwrap();
        match mean_pipeline(&d, &keys, &cfg, opts, seed) {
            Ok(r) => mean_ok += usize::from(matches(&r.answers, &oracle_mean(&d))),
            Err(e) => errors.push(format!("mean {seed}: {e}")),
        }

        let keys = KeyBundle::generate(std27.clone(), seed).unwrap();
        let users = rng.gen_range(2..=4);
        let cols = rng.gen_range(1..=2);
        let d = random_rows(&mut rng, users, cols, 1);
        match variance_pipeline(&d, &keys, &cfg, Reduction::default(), seed) {
            Ok(r) => var_ok += usize::from(matches(&r.answers, &oracle_variance(&d))),
            Err(e) => errors.push(format!("variance {seed}: {e}")),
        }

        let (users, per_user) = (rng.gen_range(1..=4), rng.gen_range(1..=2));
        let d = random_rows(&mut rng, users * per_user, 3, t - 1);
        let model = LinregModel::new(
            (0..3).map(|_| rng.gen_range(0..t)).collect(),
            rng.gen_range(0..t),
        );
        let opts = LinregOptions {
            samples_per_user: per_user,
            ..Default::default()
        };
        match linreg_pipeline(&d, &model, &keys, &cfg, opts, seed) {
            Ok(r) => lin_ok += usize::from(matches(&r.answers, &oracle_dot(&d, &model, t))),
            Err(e) => errors.push(format!("linreg {seed}: {e}")),
        }
    }
    ensure(
        mean_ok == 20 && var_ok == 20 && lin_ok == 20,
        format!(
            "mean {mean_ok}/20 (t=257), variance {var_ok}/20, linreg {lin_ok}/20 (t={t}) at n=1024{}",
            fail_list(&errors)
        ),
    )
}

fn sweep_feasibility() -> Check {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut rows = 0;
    for mode in ["microbench-add", "microbench-mul"] {
        for sec in ["27", "54", "109"] {
            let cli =
                Cli::try_parse_from(["pimhe", "--mode", mode, "--security", sec, "--cost-only"])
                    .unwrap();
            let o = run(&BenchSpec::resolve(cli, None).unwrap()).unwrap();
            rows += o.rows.len();
            let monotone = o
                .rows
                .windows(2)
                .all(|w| w[1].elapsed_ms >= w[0].elapsed_ms);
            let (first, last) = (o.rows[0].items, o.rows[o.rows.len() - 1].items);
            let range = if mode.ends_with("add") {
                (20_480, 327_680)
            } else {
                (5_120, 81_920)
            };
            if !monotone || (first, last) != range {
                bad.push(format!("{mode} {sec}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        bad.is_empty() && secs < 10.0,
        format!("{rows} cost-only points (add 20480..327680, mul 5120..81920) monotone in {secs:.2} s (< 10 s){}", fail_list(&bad)),
    )
}

fn main() -> ExitCode {
    let checks: [Criterion; 10] = [
        ("HE roundtrip", roundtrip),
        ("additive homomorphism", additive),
        ("multiplicative homomorphism", multiplicative),
        ("arithmetic oracles", arithmetic),
        ("simulator transparency", transparency),
        ("tasklet saturation", saturation),
        ("mul/add asymmetry", asymmetry),
        ("user-count flatness", flatness),
        ("workload exactness", workloads),
        ("full-scale sweep feasibility", sweep_feasibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
