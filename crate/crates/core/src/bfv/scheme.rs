use rand::Rng;

use super::host;
use super::{HeParams, Plaintext};
use crate::polyring::{check_same_ring, Polynomial};
use crate::rng::SeedStream;
use crate::{Error, Result};

/// Ternary secret `s`, stored both lifted mod `q` and as `{-1, 0, 1}`.
#[derive(Clone, Debug)]
pub struct SecretKey {
    s: Polynomial,
    ternary: Vec<i8>,
    lineage: String,
}

impl SecretKey {
    pub(crate) fn from_ternary(
        params: &HeParams,
        ternary: Vec<i8>,
        lineage: String,
    ) -> Result<Self> {
        let q = params.q();
        let lifted: Vec<u128> = ternary
            .iter()
            .map(|&v| host::reduce_signed(v as i128, q))
            .collect();
        Ok(Self {
            s: Polynomial::from_u128s(params.ring(), &lifted)?,
            ternary,
            lineage,
        })
    }

    /// Rebuilds from the lifted polynomial; every coefficient must be 0, 1 or `q - 1`.
    pub fn from_poly(params: &HeParams, s: Polynomial, lineage: String) -> Result<Self> {
        check_same_ring(s.ring(), params.ring())?;
        let q = params.q();
        let ternary = s
            .to_u128s()
            .into_iter()
            .map(|c| match c {
                0 => Ok(0),
                1 => Ok(1),
                c if c == q - 1 => Ok(-1),
                c => Err(Error::Decode(format!(
                    "secret coefficient {c} is not ternary"
                ))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(Self {
            s,
            ternary,
            lineage,
        })
    }

    pub fn poly(&self) -> &Polynomial {
        &self.s
    }

    pub fn ternary(&self) -> &[i8] {
        &self.ternary
    }

    /// Seed lineage of the sampled secret.
    pub fn lineage(&self) -> &str {
        &self.lineage
    }
}

#[derive(Clone, Debug)]
pub struct PublicKey {
    p0: Polynomial,
    p1: Polynomial,
    lineage: String,
}

impl PublicKey {
    pub fn from_parts(p0: Polynomial, p1: Polynomial, lineage: String) -> Result<Self> {
        check_same_ring(p0.ring(), p1.ring())?;
        Ok(Self { p0, p1, lineage })
    }

    pub fn p0(&self) -> &Polynomial {
        &self.p0
    }

    pub fn p1(&self) -> &Polynomial {
        &self.p1
    }

    pub fn lineage(&self) -> &str {
        &self.lineage
    }
}

impl PartialEq for SecretKey {
    fn eq(&self, other: &Self) -> bool {
        self.s == other.s
    }
}

impl Eq for SecretKey {}

impl PartialEq for PublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.p0 == other.p0 && self.p1 == other.p1
    }
}

impl Eq for PublicKey {}

/// Two or three polynomials; three after one multiplication.
#[derive(Clone, Debug)]
pub struct Ciphertext {
    components: Vec<Polynomial>,
    mul_depth: u32,
    lineage: Option<String>,
}

impl PartialEq for Ciphertext {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.mul_depth == other.mul_depth
    }
}

impl Eq for Ciphertext {}

/// Components a ciphertext may have.
pub const MAX_COMPONENTS: usize = 3;

impl Ciphertext {
    pub fn new(params: &HeParams, components: Vec<Polynomial>, mul_depth: u32) -> Result<Self> {
        if !(2..=MAX_COMPONENTS).contains(&components.len()) {
            return Err(Error::Parameter(format!(
                "ciphertext needs 2 or 3 components, got {}",
                components.len()
            )));
        }
        for c in &components {
            check_same_ring(c.ring(), params.ring())?;
        }
        Ok(Self {
            components,
            mul_depth,
            lineage: None,
        })
    }

    /// The noiseless encryption `(Δ·m, 0)`.
    pub fn trivial(params: &HeParams, m: &Plaintext) -> Result<Self> {
        check_plain(params, m)?;
        let delta = params.delta();
        let c0: Vec<u128> = m.coeffs().iter().map(|&v| delta * v as u128).collect();
        Self::new(
            params,
            vec![
                Polynomial::from_u128s(params.ring(), &c0)?,
                Polynomial::zero(params.ring()),
            ],
            0,
        )
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn mul_depth(&self) -> u32 {
        self.mul_depth
    }

    /// Seed lineage of a fresh encryption; `None` for derived ciphertexts.
    pub fn lineage(&self) -> Option<&str> {
        self.lineage.as_deref()
    }

    pub(crate) fn check_params(&self, params: &HeParams) -> Result<()> {
        for c in &self.components {
            check_same_ring(c.ring(), params.ring())?;
        }
        Ok(())
    }
}

fn check_plain(params: &HeParams, m: &Plaintext) -> Result<()> {
    if m.t() != params.t() || m.coeffs().len() != params.n() {
        return Err(Error::Contract(format!(
            "plaintext (n = {}, t = {}) does not match parameters (n = {}, t = {})",
            m.coeffs().len(),
            m.t(),
            params.n(),
            params.t()
        )));
    }
    Ok(())
}

fn sample_ternary(stream: &SeedStream, n: usize) -> Vec<i8> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.gen_range(-1..=1)).collect()
}

fn sample_noise(stream: &SeedStream, n: usize, bound: u32) -> Vec<i128> {
    let b = bound as i128;
    let mut rng = stream.rng();
    (0..n).map(|_| rng.gen_range(-b..=b)).collect()
}

fn sample_uniform(stream: &SeedStream, n: usize, q: u128) -> Vec<u128> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

fn add_signed(a: &[u128], e: &[i128], q: u128) -> Vec<u128> {
    a.iter()
        .zip(e)
        .map(|(&x, &y)| host::reduce_signed(x as i128 + y, q))
        .collect()
}

/// Deterministic key pair from `seed`.
pub fn keygen(params: &HeParams, seed: u64) -> Result<(SecretKey, PublicKey)> {
    keygen_from(params, &SeedStream::new(seed).child("keygen"))
}

pub fn keygen_from(params: &HeParams, stream: &SeedStream) -> Result<(SecretKey, PublicKey)> {
    let (n, q) = (params.n(), params.q());
    let s_stream = stream.child("s");
    let s = sample_ternary(&s_stream, n);
    let a = sample_uniform(&stream.child("a"), n, q);
    let e = sample_noise(&stream.child("e"), n, params.noise_bound());
    let as_e = add_signed(&host::mul_ternary(&a, &s, q), &e, q);
    let p0 = host::neg_vec(&as_e, q);
    let sk = SecretKey::from_ternary(params, s, s_stream.lineage())?;
    let pk = PublicKey {
        p0: Polynomial::from_u128s(params.ring(), &p0)?,
        p1: Polynomial::from_u128s(params.ring(), &a)?,
        lineage: stream.lineage(),
    };
    Ok((sk, pk))
}

/// `(p0·u + e1 + Δ·m, p1·u + e2)` with `u, e1, e2` drawn from `seed`.
pub fn encrypt(params: &HeParams, pk: &PublicKey, m: &Plaintext, seed: u64) -> Result<Ciphertext> {
    encrypt_from(params, pk, m, &SeedStream::new(seed).child("encrypt"))
}

pub fn encrypt_from(
    params: &HeParams,
    pk: &PublicKey,
    m: &Plaintext,
    stream: &SeedStream,
) -> Result<Ciphertext> {
    check_plain(params, m)?;
    check_same_ring(pk.p0.ring(), params.ring())?;
    let (n, q) = (params.n(), params.q());
    let u = sample_ternary(&stream.child("u"), n);
    let e1 = sample_noise(&stream.child("e1"), n, params.noise_bound());
    let e2 = sample_noise(&stream.child("e2"), n, params.noise_bound());
    let delta = params.delta();
    let mut c0 = add_signed(&host::mul_ternary(&pk.p0.to_u128s(), &u, q), &e1, q);
    for (c, &v) in c0.iter_mut().zip(m.coeffs()) {
        *c = (*c + delta * v as u128) % q;
    }
    let c1 = add_signed(&host::mul_ternary(&pk.p1.to_u128s(), &u, q), &e2, q);
    let mut ct = Ciphertext::new(
        params,
        vec![
            Polynomial::from_u128s(params.ring(), &c0)?,
            Polynomial::from_u128s(params.ring(), &c1)?,
        ],
        0,
    )?;
    ct.lineage = Some(stream.lineage());
    Ok(ct)
}

/// `Σ c_i · s^i mod (x^n + 1, q)`.
pub fn phase(params: &HeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Vec<u128>> {
    ct.check_params(params)?;
    check_same_ring(sk.s.ring(), params.ring())?;
    let q = params.q();
    let mut acc = ct.components[0].to_u128s();
    for (i, c) in ct.components.iter().enumerate().skip(1) {
        // s^i applied one ternary factor at a time
        let mut term = c.to_u128s();
        for _ in 0..i {
            term = host::mul_ternary(&term, &sk.ternary, q);
        }
        acc = host::add_vec(&acc, &term, q);
    }
    Ok(acc)
}

/// Rounds `t · phase / q` coefficient-wise.
pub fn decrypt(params: &HeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    let v = phase(params, sk, ct)?;
    let (t, q) = (params.t(), params.q());
    Plaintext::new(
        params,
        v.into_iter()
            .map(|c| host::round_to_plain(c, t, q))
            .collect(),
    )
}

/// Bits of headroom left: `floor(log2(q / (2 · max|residual| · t)))`, clamped at 0.
pub fn noise_budget(params: &HeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<u32> {
    let v = phase(params, sk, ct)?;
    Ok(budget_of_phase(params, &v))
}

/// [`decrypt`] and [`noise_budget`] from a single phase computation.
pub fn decrypt_with_budget(
    params: &HeParams,
    sk: &SecretKey,
    ct: &Ciphertext,
) -> Result<(Plaintext, u32)> {
    let v = phase(params, sk, ct)?;
    let budget = budget_of_phase(params, &v);
    let (t, q) = (params.t(), params.q());
    let pt = Plaintext::new(
        params,
        v.into_iter()
            .map(|c| host::round_to_plain(c, t, q))
            .collect(),
    )?;
    Ok((pt, budget))
}

fn budget_of_phase(params: &HeParams, v: &[u128]) -> u32 {
    let (t, q, delta) = (params.t(), params.q(), params.delta());
    let max = v
        .iter()
        .map(|&c| {
            let m = host::round_to_plain(c, t, q) as u128;
            let r = host::reduce_signed(c as i128 - (delta * m) as i128, q);
            host::center(r, q).unsigned_abs()
        })
        .max()
        .unwrap_or(0);
    host::budget_bits(max, t, q)
}

/// Component-wise sum; the shorter ciphertext is zero-padded.
pub fn he_add(params: &HeParams, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    a.check_params(params)?;
    b.check_params(params)?;
    let q = params.q();
    let len = a.len().max(b.len());
    let zero = Polynomial::zero(params.ring());
    let comps = (0..len)
        .map(|i| {
            let x = a.components.get(i).unwrap_or(&zero).to_u128s();
            let y = b.components.get(i).unwrap_or(&zero).to_u128s();
            Polynomial::from_u128s(params.ring(), &host::add_vec(&x, &y, q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ciphertext::new(params, comps, a.mul_depth.max(b.mul_depth))
}

/// Tensor product of two fresh-depth ciphertexts, scaled by `t/q` and rounded.
pub fn he_mul(params: &HeParams, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    a.check_params(params)?;
    b.check_params(params)?;
    if a.len() != 2 || b.len() != 2 || a.mul_depth > 0 || b.mul_depth > 0 {
        return Err(Error::Depth(format!(
            "he_mul needs two fresh 2-component ciphertexts, got lengths {}/{} at depths {}/{}",
            a.len(),
            b.len(),
            a.mul_depth,
            b.mul_depth
        )));
    }
    let (t, q, digit) = (params.t(), params.q(), params.split_digit());
    let [a0, a1] = [a.components[0].to_u128s(), a.components[1].to_u128s()];
    let [b0, b1] = [b.components[0].to_u128s(), b.components[1].to_u128s()];
    let tensors = [
        host::exact_product_sum(&[(&a0, &b0)], q, digit),
        host::exact_product_sum(&[(&a0, &b1), (&a1, &b0)], q, digit),
        host::exact_product_sum(&[(&a1, &b1)], q, digit),
    ];
    let comps = tensors
        .iter()
        .map(|d| {
            let scaled: Vec<u128> = d.iter().map(|v| host::scale_round(v, t, q)).collect();
            Polynomial::from_u128s(params.ring(), &scaled)
        })
        .collect::<Result<Vec<_>>>()?;
    Ciphertext::new(params, comps, 1)
}

/// Every component times the plaintext scalar `w < t`.
pub fn he_scalar_mul(params: &HeParams, ct: &Ciphertext, w: u64) -> Result<Ciphertext> {
    ct.check_params(params)?;
    if w >= params.t() {
        return Err(Error::Contract(format!(
            "scalar {w} is not below t = {}",
            params.t()
        )));
    }
    let q = params.q();
    let comps = ct
        .components
        .iter()
        .map(|c| {
            let v: Vec<u128> = c
                .to_u128s()
                .into_iter()
                .map(|x| x * w as u128 % q)
                .collect();
            Polynomial::from_u128s(params.ring(), &v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ciphertext::new(params, comps, ct.mul_depth)
}

/// Raw negacyclic product of two ring elements, mod `q`.
pub fn poly_mul_reference(params: &HeParams, a: &Polynomial, b: &Polynomial) -> Result<Polynomial> {
    check_same_ring(a.ring(), params.ring())?;
    check_same_ring(b.ring(), params.ring())?;
    let v = host::mul_mod(
        &a.to_u128s(),
        &b.to_u128s(),
        params.q(),
        params.split_digit(),
    );
    Polynomial::from_u128s(params.ring(), &v)
}
