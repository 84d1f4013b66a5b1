use pimhe::bfv::{
    decode_scalar, decrypt, encode_scalar, encrypt, he_add, he_mul, he_scalar_mul, keygen,
    poly_mul_reference, Ciphertext, HeParams, SecurityLevel,
};
use pimhe::pimsim::{
    cost_only_estimate, estimate_cycles, run_raw_mul_kernel, run_scalar_mul_kernel,
    run_vector_add_kernel, run_vector_mul_kernel, KernelKind, KernelReport, PimConfig,
};
use pimhe::polyring::Polynomial;
use pimhe::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(p: &HeParams, rng: &mut impl Rng) -> Polynomial {
    let q = p.q();
    let coeffs: Vec<u128> = (0..p.n()).map(|_| rng.gen_range(0..q)).collect();
    Polynomial::from_u128s(p.ring(), &coeffs).unwrap()
}

/// Uniformly random components: exercises the full residue range, not just
/// the shapes produced by honest encryption.
fn random_ct(p: &HeParams, comps: usize, rng: &mut impl Rng) -> Ciphertext {
    let polys = (0..comps).map(|_| random_poly(p, rng)).collect();
    Ciphertext::new(p, polys, comps as u32 - 2).unwrap()
}

fn small_sets() -> Vec<HeParams> {
    vec![
        HeParams::custom(32, 134215681, 7, 6).unwrap(),
        HeParams::custom(32, 18014398509404161, 257, 6).unwrap(),
        HeParams::custom(32, 649037107316853453566312040923137, 257, 6).unwrap(),
    ]
}

fn assert_same_counts(measured: &KernelReport, estimated: &KernelReport) {
    assert_eq!(measured.instr, estimated.instr);
    assert_eq!(measured.cycles_per_core, estimated.cycles_per_core);
    assert_eq!(measured.bytes_to_pim, estimated.bytes_to_pim);
    assert_eq!(measured.bytes_from_pim, estimated.bytes_from_pim);
    assert_eq!(measured.cores_used, estimated.cores_used);
    assert_eq!(measured.tasklets_used, estimated.tasklets_used);
    assert_eq!(measured, estimated);
}

#[test]
fn add_kernel_matches_host_at_n1024() {
    let p = HeParams::standard(SecurityLevel::Bits27).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let lhs: Vec<Ciphertext> = (0..1000).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let rhs: Vec<Ciphertext> = (0..1000).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let (out, report) = run_vector_add_kernel(&p, &lhs, &rhs, &PimConfig::default()).unwrap();
    for ((a, b), c) in lhs.iter().zip(&rhs).zip(&out) {
        assert_eq!(c, &he_add(&p, a, b).unwrap());
    }
    assert_eq!(report.instr.muls32, 0);
    let est = cost_only_estimate(
        KernelKind::Add { lhs: 2, rhs: 2 },
        1000,
        &p,
        &PimConfig::default(),
    );
    assert_same_counts(&report, &est.unwrap());
}

#[test]
fn add_kernel_pads_mixed_lengths() {
    for p in small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lhs: Vec<Ciphertext> = (0..20).map(|_| random_ct(&p, 3, &mut rng)).collect();
        let rhs: Vec<Ciphertext> = (0..20).map(|_| random_ct(&p, 2, &mut rng)).collect();
        let cfg = PimConfig::default();
        let (out, report) = run_vector_add_kernel(&p, &lhs, &rhs, &cfg).unwrap();
        for ((a, b), c) in lhs.iter().zip(&rhs).zip(&out) {
            assert_eq!(c, &he_add(&p, a, b).unwrap());
            assert_eq!(c.len(), 3);
        }
        let est = cost_only_estimate(KernelKind::Add { lhs: 3, rhs: 2 }, 20, &p, &cfg).unwrap();
        assert_same_counts(&report, &est);
    }
}

#[test]
fn mul_kernel_matches_host_at_n1024() {
    let p = HeParams::standard(SecurityLevel::Bits27).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lhs: Vec<Ciphertext> = (0..100).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let rhs: Vec<Ciphertext> = (0..100).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let cfg = PimConfig::default();
    let (out, report) = run_vector_mul_kernel(&p, &lhs, &rhs, &cfg).unwrap();
    for ((a, b), c) in lhs.iter().zip(&rhs).zip(&out) {
        assert_eq!(c, &he_mul(&p, a, b).unwrap());
    }
    assert_same_counts(
        &report,
        &cost_only_estimate(KernelKind::Mul, 100, &p, &cfg).unwrap(),
    );
}

#[test]
fn mul_kernel_matches_host_on_wide_moduli() {
    for p in small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut lhs: Vec<Ciphertext> = (0..30).map(|_| random_ct(&p, 2, &mut rng)).collect();
        let mut rhs: Vec<Ciphertext> = (0..30).map(|_| random_ct(&p, 2, &mut rng)).collect();
        // extreme residues around the centering boundary
        let q = p.q();
        for (k, v) in [0, 1, (q - 1) / 2, q.div_ceil(2), q - 1]
            .into_iter()
            .enumerate()
        {
            let c = Polynomial::from_u128s(p.ring(), &vec![v; p.n()]).unwrap();
            lhs[k] = Ciphertext::new(&p, vec![c.clone(), c.clone()], 0).unwrap();
            rhs[k + 5] = Ciphertext::new(&p, vec![c.clone(), c], 0).unwrap();
        }
        let cfg = PimConfig::default();
        let (out, report) = run_vector_mul_kernel(&p, &lhs, &rhs, &cfg).unwrap();
        for ((a, b), c) in lhs.iter().zip(&rhs).zip(&out) {
            assert_eq!(c, &he_mul(&p, a, b).unwrap(), "q = {q}");
        }
        assert_same_counts(
            &report,
            &cost_only_estimate(KernelKind::Mul, 30, &p, &cfg).unwrap(),
        );
    }
}

#[test]
fn mul_kernel_on_real_ciphertexts() {
    let p = HeParams::custom(64, 18014398509404161, 257, 6).unwrap();
    let (sk, pk) = keygen(&p, 3).unwrap();
    let values = [0u64, 1, 5, 17, 200, 256];
    let xs: Vec<Ciphertext> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| encrypt(&p, &pk, &encode_scalar(&p, v).unwrap(), i as u64).unwrap())
        .collect();
    let one = encrypt(&p, &pk, &encode_scalar(&p, 1).unwrap(), 99).unwrap();
    let ones = vec![one; xs.len()];
    let (out, _) = run_vector_mul_kernel(&p, &xs, &ones, &PimConfig::default()).unwrap();
    for (c, &v) in out.iter().zip(&values) {
        assert_eq!(decode_scalar(&decrypt(&p, &sk, c).unwrap()), v);
    }
    let (sq, _) = run_vector_mul_kernel(&p, &xs, &xs, &PimConfig::default()).unwrap();
    for (c, &v) in sq.iter().zip(&values) {
        assert_eq!(decode_scalar(&decrypt(&p, &sk, c).unwrap()), v * v % 257);
    }
    assert!(matches!(
        run_vector_mul_kernel(&p, &sq[..1], &xs[..1], &PimConfig::default()),
        Err(Error::Depth(_))
    ));
    assert!(matches!(
        run_vector_mul_kernel(&p, &xs[..2], &xs[..1], &PimConfig::default()),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn raw_and_scalar_kernels_match_host() {
    for p in small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cfg = PimConfig::default();
        let a: Vec<Polynomial> = (0..12).map(|_| random_poly(&p, &mut rng)).collect();
        let b: Vec<Polynomial> = (0..12).map(|_| random_poly(&p, &mut rng)).collect();
        let (out, report) = run_raw_mul_kernel(&p, &a, &b, &cfg).unwrap();
        for ((x, y), z) in a.iter().zip(&b).zip(&out) {
            assert_eq!(z, &poly_mul_reference(&p, x, y).unwrap());
        }
        assert_same_counts(
            &report,
            &cost_only_estimate(KernelKind::RawMul, 12, &p, &cfg).unwrap(),
        );

        let cts: Vec<Ciphertext> = (0..12).map(|_| random_ct(&p, 2, &mut rng)).collect();
        let ws: Vec<u64> = (0..12).map(|_| rng.gen_range(0..p.t())).collect();
        let (out, report) = run_scalar_mul_kernel(&p, &cts, &ws, &cfg).unwrap();
        for ((ct, &w), z) in cts.iter().zip(&ws).zip(&out) {
            assert_eq!(z, &he_scalar_mul(&p, ct, w).unwrap());
        }
        let est =
            cost_only_estimate(KernelKind::ScalarMul { components: 2 }, 12, &p, &cfg).unwrap();
        assert_same_counts(&report, &est);
        assert!(run_scalar_mul_kernel(&p, &cts[..1], &[p.t()], &cfg).is_err());
    }
}

#[test]
fn cost_only_matches_measured_for_100_items() {
    let p = HeParams::custom(16, 649037107316853453566312040923137, 257, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    // few cores so that items share cores unevenly
    let cfg = PimConfig {
        num_cores: 7,
        tasklets: 5,
        ..Default::default()
    };
    let lhs: Vec<Ciphertext> = (0..100).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let rhs: Vec<Ciphertext> = (0..100).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let (_, add) = run_vector_add_kernel(&p, &lhs, &rhs, &cfg).unwrap();
    let (_, mul) = run_vector_mul_kernel(&p, &lhs, &rhs, &cfg).unwrap();
    assert_same_counts(
        &add,
        &cost_only_estimate("add".parse().unwrap(), 100, &p, &cfg).unwrap(),
    );
    assert_same_counts(
        &mul,
        &cost_only_estimate(KernelKind::Mul, 100, &p, &cfg).unwrap(),
    );
    assert_eq!(mul.cores_used, 7);
    assert_eq!(mul.tasklets_used, 5);
}

#[test]
fn tasklet_saturation() {
    let base = PimConfig::default();
    for level in SecurityLevel::ALL {
        let p = HeParams::standard(level).unwrap();
        for kind in [KernelKind::Add { lhs: 2, rhs: 2 }, KernelKind::Mul] {
            let at = |t: usize| {
                let cfg = PimConfig {
                    tasklets: t,
                    ..base.clone()
                };
                cost_only_estimate(kind, 5120, &p, &cfg).unwrap().elapsed_ms
            };
            for t in 1..11 {
                assert!(at(t + 1) < at(t), "{kind} at {level}: {t} -> {}", t + 1);
            }
            for t in 11..16 {
                assert_eq!(at(t + 1), at(t));
            }
        }
    }
    let i = KernelKind::Mul.item_cost(&HeParams::standard(SecurityLevel::Bits27).unwrap());
    assert_eq!(
        estimate_cycles(&i, 1, &base),
        11 * estimate_cycles(&i, 11, &base)
    );
}

#[test]
fn mul_add_asymmetry_at_128_bits() {
    let p = HeParams::standard(SecurityLevel::Bits109).unwrap();
    let cfg = PimConfig::default();
    let add = cost_only_estimate(KernelKind::Add { lhs: 2, rhs: 2 }, 1, &p, &cfg).unwrap();
    let mul = cost_only_estimate(KernelKind::Mul, 1, &p, &cfg).unwrap();
    let raw = cost_only_estimate(KernelKind::RawMul, 1, &p, &cfg).unwrap();
    assert!(mul.cycles_per_core as f64 / add.cycles_per_core as f64 >= 30.0);
    assert!(raw.cycles_per_core as f64 / add.cycles_per_core as f64 >= 30.0);
    // software multiplies dominate the weighted count
    let mul32_cycles = mul.instr.muls32 * cfg.cost_table.mul32;
    assert!(mul32_cycles * 2 > cfg.cost_table.weigh(&mul.instr));
}

#[test]
fn partition_driven_scaling() {
    let p = HeParams::standard(SecurityLevel::Bits54).unwrap();
    let cfg = PimConfig::default();
    let add = |items: usize, cores: usize| {
        let cfg = PimConfig {
            num_cores: cores,
            ..cfg.clone()
        };
        cost_only_estimate(KernelKind::Add { lhs: 2, rhs: 2 }, items, &p, &cfg).unwrap()
    };
    // un-saturated device: more items, more cores, same per-core time
    assert_eq!(
        add(500, 2524).cycles_per_core,
        add(1000, 2524).cycles_per_core
    );
    assert_eq!(add(1000, 2524).cores_used, 1000);
    // elapsed halves with twice the cores, down to one item per core
    let mut last = add(4096, 16).elapsed_ms;
    for cores in [32, 64, 128, 256, 512, 1024, 2048, 4096] {
        let now = add(4096, cores).elapsed_ms;
        assert!((last / now - 2.0).abs() < 1e-9, "{cores} cores");
        last = now;
    }
    assert_eq!(add(4096, 8192).elapsed_ms, last);

    let mut prev = 0.0;
    for items in (20_480..=327_680).step_by(20_480) {
        let r = add(items, 2524);
        assert!(r.elapsed_ms >= prev);
        prev = r.elapsed_ms;
    }
    // transfer totals are the sum of the stages
    let a = add(100, 2524);
    let b = cost_only_estimate(KernelKind::Mul, 100, &p, &cfg).unwrap();
    let t = KernelReport::total([&a, &b]);
    assert_eq!(t.bytes_to_pim, a.bytes_to_pim + b.bytes_to_pim);
    assert!((t.transfer_ms - a.transfer_ms - b.transfer_ms).abs() < 1e-12);
}

#[test]
fn single_and_multi_threaded_runs_agree() {
    let p = HeParams::custom(32, 18014398509404161, 257, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let lhs: Vec<Ciphertext> = (0..8).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let rhs: Vec<Ciphertext> = (0..8).map(|_| random_ct(&p, 2, &mut rng)).collect();
    let cfg = PimConfig::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let single = pool.install(|| run_vector_mul_kernel(&p, &lhs, &rhs, &cfg).unwrap());
    let multi = run_vector_mul_kernel(&p, &lhs, &rhs, &cfg).unwrap();
    assert_eq!(single.0, multi.0);
    assert_eq!(single.1, multi.1);
}
