//! Arithmetic in `F_q = F_{p^ell}`.
//!
//! Elements are stored as their polynomial-basis coordinates packed into a
//! single base-`p` integer: coefficient `i` (of `x^i`) is the `i`-th base-`p`
//! digit, so the constants `0..p` are the elements with index `0..p`.
//! Multiplication goes through log/antilog tables built once per field from
//! the reference polynomial arithmetic; small fields additionally get full
//! addition tables.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::RngCore;
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{ell} exceeds 2^16")]
    OrderTooLarge { p: u32, ell: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("modulus must have {expected} coefficients, got {got}")]
    ModulusLength { expected: usize, got: usize },
    #[error("modulus is not monic")]
    NotMonic,
    #[error("modulus coefficient {0} is not a residue mod p")]
    CoefficientRange(u32),
    #[error("modulus is reducible over F_p")]
    Reducible,
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("init of the zero vector")]
    ZeroVector,
    #[error("element index {0} out of range")]
    ElementRange(u32),
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A field element, meaningful only together with its [`FieldSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(pub(crate) u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    p: u32,
    ell: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Option<Vec<u16>>,
    sub: Option<Vec<u16>>,
    neg: Vec<u16>,
    log: Vec<u32>,
    exp: Vec<u16>,
    trace: Vec<u16>,
    roots: Vec<Complex64>,
    // uniform sampling: `per_word` digits from each accepted u64 below `limit`
    per_word: u32,
    limit: u64,
}

/// The field `F_{p^ell}` with a fixed modulus.  Cheap to clone.
#[derive(Clone)]
pub struct FieldSpec(Arc<Tables>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.modulus == other.0.modulus
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldSpec({self})")
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn checked_order(p: u32, ell: u32) -> Result<u32, GfError> {
    if ell == 0 {
        return Err(GfError::ZeroDegree);
    }
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    let mut q: u64 = 1;
    for _ in 0..ell {
        q *= p as u64;
        if q > MAX_ORDER {
            return Err(GfError::OrderTooLarge { p, ell });
        }
    }
    Ok(q as u32)
}

/// Dense polynomials over `F_p`, coefficient lists constant term first.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap() as u64;
            let shift = r.len() - 1 - dm;
            for (i, &c) in m.iter().enumerate() {
                let t = (lead * c as u64) % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - t) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|v| v as u32).collect();
        rem(&prod, m, p)
    }

    pub fn pow_mod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut base = rem(a, m, p);
        let mut acc = rem(&[1], m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(&acc, &base, m, p);
            }
            base = mul_mod(&base, &base, m, p);
            e >>= 1;
        }
        acc
    }

    /// Evaluates `c(y)` in `F_p[x]/(m)` by Horner's rule.
    pub fn eval_mod(c: &[u32], y: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut acc: Vec<u32> = Vec::new();
        for &coef in c.iter().rev() {
            acc = mul_mod(&acc, y, m, p);
            if acc.is_empty() {
                acc.push(0);
            }
            acc[0] = (acc[0] + coef) % p;
            trim(&mut acc);
        }
        acc
    }

    /// Monic polynomials of exactly degree `deg`, in increasing order of
    /// their lower coefficients read as a base-`p` number.
    pub fn monic_of_degree(p: u32, deg: u32) -> impl Iterator<Item = Vec<u32>> {
        let count = (p as u64).pow(deg);
        (0..count).map(move |mut idx| {
            let mut c = Vec::with_capacity(deg as usize + 1);
            for _ in 0..deg {
                c.push((idx % p as u64) as u32);
                idx /= p as u64;
            }
            c.push(1);
            c
        })
    }

    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let deg = (m.len() - 1) as u32;
        for d in 1..=deg / 2 {
            for g in monic_of_degree(p, d) {
                if rem(m, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

fn conway_cache() -> &'static Mutex<HashMap<(u32, u32), Vec<u32>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Vec<u32>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The Conway polynomial `C_{p,ell}` (constant term first, monic).
///
/// Found by walking monic degree-`ell` polynomials in Conway order and
/// keeping the first one that is primitive and compatible with the Conway
/// polynomials of every proper subfield.
pub fn conway_polynomial(p: u32, ell: u32) -> Result<Vec<u32>, GfError> {
    let q = checked_order(p, ell)? as u64;
    if let Some(c) = conway_cache().lock().unwrap().get(&(p, ell)) {
        return Ok(c.clone());
    }
    let subfields: Vec<(u32, Vec<u32>)> = (1..ell)
        .filter(|d| ell % d == 0)
        .map(|d| conway_polynomial(p, d).map(|c| (d, c)))
        .collect::<Result<_, _>>()?;
    let order = q - 1;
    let factors = prime_factors(order);
    let x = [0u32, 1];
    let total = (p as u64).pow(ell);
    for key in 0..total {
        // key digits, most significant first, are (a_{ell-1}, ..., a_0);
        // coefficient i of the candidate is (-1)^(ell-i) a_i.
        let mut f = vec![0u32; ell as usize + 1];
        f[ell as usize] = 1;
        let mut rest = key;
        for i in 0..ell as usize {
            let a = (rest % p as u64) as u32;
            rest /= p as u64;
            f[i] = if (ell as usize - i) % 2 == 0 { a } else { (p - a) % p };
        }
        if f[0] == 0 {
            continue;
        }
        let one = poly::rem(&[1], &f, p);
        if poly::pow_mod(&x, order, &f, p) != one {
            continue;
        }
        if factors
            .iter()
            .any(|r| poly::pow_mod(&x, order / r, &f, p) == one)
        {
            continue;
        }
        let compatible = subfields.iter().all(|(d, c)| {
            let y = poly::pow_mod(&x, order / ((p as u64).pow(*d) - 1), &f, p);
            poly::eval_mod(c, &y, &f, p).is_empty()
        });
        if compatible {
            conway_cache().lock().unwrap().insert((p, ell), f.clone());
            return Ok(f);
        }
    }
    unreachable!("every finite field has a Conway polynomial")
}

/// Writes `n` as `p^ell`.
pub fn prime_power(n: u64) -> Result<(u32, u32), GfError> {
    if n < 2 || n > MAX_ORDER {
        return Err(GfError::NotPrimePower(n));
    }
    let f = prime_factors(n);
    if f.len() != 1 {
        return Err(GfError::NotPrimePower(n));
    }
    let p = f[0];
    let mut ell = 0;
    let mut m = n;
    while m > 1 {
        m /= p;
        ell += 1;
    }
    Ok((p as u32, ell))
}

impl FieldSpec {
    /// `F_{p^ell}` with the Conway polynomial as modulus.
    pub fn new(p: u32, ell: u32) -> Result<Self, GfError> {
        let modulus = conway_polynomial(p, ell)?;
        Self::with_modulus(p, ell, modulus)
    }

    /// The field of order `q` (a prime power).
    pub fn of_order(q: u64) -> Result<Self, GfError> {
        let (p, ell) = prime_power(q)?;
        Self::new(p, ell)
    }

    pub fn with_modulus(p: u32, ell: u32, modulus: Vec<u32>) -> Result<Self, GfError> {
        let q = checked_order(p, ell)?;
        if modulus.len() != ell as usize + 1 {
            return Err(GfError::ModulusLength {
                expected: ell as usize + 1,
                got: modulus.len(),
            });
        }
        if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
            return Err(GfError::CoefficientRange(c));
        }
        if modulus[ell as usize] != 1 {
            return Err(GfError::NotMonic);
        }
        if !poly::is_irreducible(&modulus, p) {
            return Err(GfError::Reducible);
        }
        Ok(FieldSpec(Arc::new(build_tables(p, ell, q, modulus))))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn ell(&self) -> u32 {
        self.0.ell
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn element(&self, index: u32) -> Result<Fq, GfError> {
        if index < self.q() {
            Ok(Fq(index as u16))
        } else {
            Err(GfError::ElementRange(index))
        }
    }

    /// The prime-field element `n mod p`.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p() as i64) as u16)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq, GfError> {
        if coeffs.len() > self.ell() as usize {
            return Err(GfError::Parse(format!(
                "{} coefficients for degree {}",
                coeffs.len(),
                self.ell()
            )));
        }
        let mut idx = 0u32;
        for &c in coeffs.iter().rev() {
            if c >= self.p() {
                return Err(GfError::CoefficientRange(c));
            }
            idx = idx * self.p() + c;
        }
        Ok(Fq(idx as u16))
    }

    /// Polynomial-basis coordinates, constant term first, length `ell`.
    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        let mut v = a.0 as u32;
        (0..self.ell())
            .map(|_| {
                let d = v % self.p();
                v /= self.p();
                d
            })
            .collect()
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q()).map(|i| Fq(i as u16))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fq> {
        (1..self.q()).map(|i| Fq(i as u16))
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let t = &*self.0;
        if let Some(tab) = &t.add {
            return Fq(tab[a.index() * t.q as usize + b.index()]);
        }
        if t.p == 2 {
            return Fq(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut place) = (a.0 as u32, b.0 as u32, 0u32, 1u32);
        while x > 0 || y > 0 {
            let d = (x % t.p + y % t.p) % t.p;
            out += d * place;
            place *= t.p;
            x /= t.p;
            y /= t.p;
        }
        Fq(out as u16)
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.0.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        let t = &*self.0;
        if let Some(tab) = &t.sub {
            return Fq(tab[a.index() * t.q as usize + b.index()]);
        }
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        let t = &*self.0;
        Fq(t.exp[(t.log[a.index()] + t.log[b.index()]) as usize])
    }

    pub fn inv(&self, a: Fq) -> Result<Fq, GfError> {
        if a.is_zero() {
            return Err(GfError::InverseOfZero);
        }
        let t = &*self.0;
        let l = t.log[a.index()];
        Ok(Fq(t.exp[((t.q - 1 - l) % (t.q - 1)) as usize]))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        if a.is_zero() {
            return Fq::ZERO;
        }
        let t = &*self.0;
        let l = (t.log[a.index()] as u64 * (e % (t.q as u64 - 1))) % (t.q as u64 - 1);
        Fq(t.exp[l as usize])
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> Fq {
        let mut one = [Fq::ZERO];
        self.fill_uniform(rng, &mut one);
        one[0]
    }

    /// Fills `out` with independent uniform elements.
    pub fn fill_uniform<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [Fq]) {
        let t = &*self.0;
        if t.q == 1 << 16 {
            for chunk in out.chunks_mut(4) {
                let mut w = rng.next_u64();
                for v in chunk {
                    *v = Fq(w as u16);
                    w >>= 16;
                }
            }
            return;
        }
        if t.q.is_power_of_two() {
            let bits = t.q.trailing_zeros();
            let mask = (t.q - 1) as u64;
            for chunk in out.chunks_mut((64 / bits) as usize) {
                let mut w = rng.next_u64();
                for v in chunk {
                    *v = Fq((w & mask) as u16);
                    w >>= bits;
                }
            }
            return;
        }
        let q = t.q as u64;
        for chunk in out.chunks_mut(t.per_word as usize) {
            let mut w = loop {
                let w = rng.next_u64();
                if w < t.limit {
                    break w;
                }
            };
            for v in chunk {
                *v = Fq((w % q) as u16);
                w /= q;
            }
        }
    }

    /// `Tr(a)` as a residue in `0..p`.
    #[inline]
    pub fn trace(&self, a: Fq) -> u32 {
        self.0.trace[a.index()] as u32
    }

    /// `e(a) = exp(2 pi i Tr(a) / p)`.
    #[inline]
    pub fn character(&self, a: Fq) -> Complex64 {
        self.0.roots[self.0.trace[a.index()] as usize]
    }

    /// The `t`-th `p`-th root of unity.
    #[inline]
    pub fn root_of_unity(&self, t: u32) -> Complex64 {
        self.0.roots[(t % self.p()) as usize]
    }

    /// `sum_i a_i b_i`.
    #[inline]
    pub fn dot(&self, a: &[Fq], b: &[Fq]) -> Fq {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(Fq::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// `sum_{(i, c)} c x_i` for a sparse coefficient list.
    #[inline]
    pub fn dot_sparse(&self, terms: &[(usize, Fq)], x: &[Fq]) -> Fq {
        terms
            .iter()
            .fold(Fq::ZERO, |acc, &(i, c)| self.add(acc, self.mul(c, x[i])))
    }

    pub fn scale(&self, c: Fq, v: &FieldVector) -> FieldVector {
        FieldVector(v.0.iter().map(|&a| self.mul(c, a)).collect())
    }

    pub fn add_vectors(&self, a: &FieldVector, b: &FieldVector) -> Result<FieldVector, GfError> {
        if a.len() != b.len() {
            return Err(GfError::LengthMismatch(a.len(), b.len()));
        }
        Ok(FieldVector(
            a.0.iter().zip(&b.0).map(|(&x, &y)| self.add(x, y)).collect(),
        ))
    }

    /// Element token: base-`p` digits, most significant first.  Digits use
    /// `0-9a-z` when `p <= 36`, otherwise decimal digit values joined by `.`.
    pub fn format_element(&self, a: Fq) -> String {
        let digits = self.coeffs(a);
        if self.p() <= 36 {
            digits
                .iter()
                .rev()
                .map(|&d| char::from_digit(d, 36).unwrap())
                .collect()
        } else {
            digits
                .iter()
                .rev()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Parses an element token; fewer than `ell` digits are left-padded.
    pub fn parse_element(&self, s: &str) -> Result<Fq, GfError> {
        let bad = || GfError::Parse(format!("bad element token {s:?}"));
        let digits: Vec<u32> = if self.p() <= 36 {
            s.chars()
                .map(|c| c.to_digit(36).ok_or_else(bad))
                .collect::<Result<_, _>>()?
        } else {
            s.split('.')
                .map(|d| d.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?
        };
        if digits.is_empty() || digits.len() > self.ell() as usize {
            return Err(bad());
        }
        if digits.iter().any(|&d| d >= self.p()) {
            return Err(bad());
        }
        let mut idx = 0u32;
        for d in digits {
            idx = idx * self.p() + d;
        }
        Ok(Fq(idx as u16))
    }

    pub fn format_vector(&self, v: &[Fq]) -> String {
        v.iter()
            .map(|&a| self.format_element(a))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_vector(&self, s: &str) -> Result<FieldVector, GfError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(FieldVector(Vec::new()));
        }
        s.split(',')
            .map(|t| self.parse_element(t.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map(FieldVector)
    }
}

fn build_tables(p: u32, ell: u32, q: u32, modulus: Vec<u32>) -> Tables {
    let qs = q as usize;
    let to_poly = |idx: u32| -> Vec<u32> {
        let mut v = idx;
        let mut c: Vec<u32> = (0..ell)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect();
        poly::trim(&mut c);
        c
    };
    let from_poly = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &d| acc * p + d) };

    let neg: Vec<u16> = (0..q)
        .map(|i| from_poly(&to_poly(i).iter().map(|&d| (p - d) % p).collect::<Vec<_>>()) as u16)
        .collect();

    // Smallest-index primitive element.
    let order = (q - 1) as u64;
    let factors = prime_factors(order);
    let one = poly::rem(&[1], &modulus, p);
    let generator = (1..q)
        .map(to_poly)
        .find(|g| {
            order == 1
                || factors
                    .iter()
                    .all(|r| poly::pow_mod(g, order / r, &modulus, p) != one)
        })
        .expect("multiplicative group is cyclic");

    let mut exp = vec![0u16; 2 * (qs - 1).max(1)];
    let mut log = vec![0u32; qs];
    let mut cur = one.clone();
    for e in 0..(qs - 1) {
        let idx = from_poly(&cur);
        exp[e] = idx as u16;
        exp[e + qs - 1] = idx as u16;
        log[idx as usize] = e as u32;
        cur = poly::mul_mod(&cur, &generator, &modulus, p);
    }

    let add_digits = |a: u32, b: u32| -> u32 {
        let (mut x, mut y, mut out, mut place) = (a, b, 0u32, 1u32);
        for _ in 0..ell {
            out += ((x % p + y % p) % p) * place;
            place *= p;
            x /= p;
            y /= p;
        }
        out
    };
    let (add, sub) = if q <= 256 {
        let mut add = vec![0u16; qs * qs];
        let mut sub = vec![0u16; qs * qs];
        for a in 0..q {
            for b in 0..q {
                add[(a * q + b) as usize] = add_digits(a, b) as u16;
                sub[(a * q + b) as usize] = add_digits(a, neg[b as usize] as u32) as u16;
            }
        }
        (Some(add), Some(sub))
    } else {
        (None, None)
    };

    // Tr(a) = sum_j a^(p^j); a^(p^j) read off the log table.
    let mut trace = vec![0u16; qs];
    for a in 1..q {
        let la = log[a as usize] as u64;
        let mut acc = 0u32;
        let mut pj = 1u64;
        for _ in 0..ell {
            let term = exp[((la * pj) % order.max(1)) as usize] as u32;
            acc = add_digits(acc, term);
            pj = (pj * p as u64) % order.max(1);
        }
        debug_assert!(acc < p, "trace must land in the prime field");
        trace[a as usize] = acc as u16;
    }

    let mut per_word = 0u32;
    let mut span: u64 = 1;
    while let Some(next) = span.checked_mul(q as u64) {
        span = next;
        per_word += 1;
    }
    let limit = if q.is_power_of_two() { u64::MAX } else { (u64::MAX / span) * span };

    let roots = (0..p)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / p as f64))
        .collect();

    Tables {
        p,
        ell,
        q,
        modulus,
        add,
        sub,
        neg,
        log,
        exp,
        trace,
        roots,
        per_word,
        limit,
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.modulus().iter().map(|c| c.to_string()).collect();
        write!(f, "{}:{}:{}", self.p(), self.ell(), m.join(","))
    }
}

impl FromStr for FieldSpec {
    type Err = GfError;

    /// `p:ell:c0,c1,...,c_ell`, or `p:ell` for the Conway modulus.
    fn from_str(s: &str) -> Result<Self, GfError> {
        let bad = |what: &str| GfError::Parse(format!("{what} in field token {s:?}"));
        let mut parts = s.trim().split(':');
        let p: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad characteristic"))?;
        let ell: u32 = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad degree"))?;
        let modulus = parts.next();
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        match modulus {
            None => FieldSpec::new(p, ell),
            Some(m) => {
                let coeffs: Vec<u32> = m
                    .split(',')
                    .map(|c| c.trim().parse().map_err(|_| bad("bad coefficient")))
                    .collect::<Result<_, _>>()?;
                FieldSpec::with_modulus(p, ell, coeffs)
            }
        }
    }
}

/// A length-`n` vector over `F_q`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldVector(pub Vec<Fq>);

impl FieldVector {
    pub fn zeros(n: usize) -> Self {
        FieldVector(vec![Fq::ZERO; n])
    }

    /// `e_i` scaled by `c`.
    pub fn unit(n: usize, i: usize, c: Fq) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = c;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Fq] {
        &self.0
    }

    /// Number of nonzero entries.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|a| !a.is_zero()).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.is_zero())
    }

    /// The first nonzero entry.
    pub fn init(&self) -> Result<Fq, GfError> {
        self.0
            .iter()
            .copied()
            .find(|a| !a.is_zero())
            .ok_or(GfError::ZeroVector)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    /// Nonzero entries as `(index, value)` pairs.
    pub fn sparse(&self) -> Vec<(usize, Fq)> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, &a)| (i, a))
            .collect()
    }

    /// `alpha^J`: entries outside `side` of `part` zeroed.
    pub fn restrict(&self, part: &Partition, side: Side) -> FieldVector {
        FieldVector(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &a)| if part.side_of(i) == side { a } else { Fq::ZERO })
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for FieldVector {
    type Output = Fq;

    fn index(&self, i: usize) -> &Fq {
        &self.0[i]
    }
}

impl From<Vec<Fq>> for FieldVector {
    fn from(v: Vec<Fq>) -> Self {
        FieldVector(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    J,
    Complement,
}

/// A split `(J, J-bar)` of `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    in_j: Vec<bool>,
}

impl Partition {
    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut in_j = vec![false; n];
        for &i in members {
            in_j[i] = true;
        }
        Partition { in_j }
    }

    /// `ceil(n/2)` cyclically consecutive coordinates starting at `start`.
    pub fn consecutive(n: usize, start: usize) -> Self {
        let members: Vec<usize> = (0..n.div_ceil(2)).map(|t| (start + t) % n).collect();
        Self::from_members(n, &members)
    }

    pub fn n(&self) -> usize {
        self.in_j.len()
    }

    pub fn side_of(&self, i: usize) -> Side {
        if self.in_j[i] {
            Side::J
        } else {
            Side::Complement
        }
    }

    /// Coordinates on `side`, increasing.
    pub fn coords(&self, side: Side) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.side_of(i) == side).collect()
    }

    pub fn members(&self) -> Vec<usize> {
        self.coords(Side::J)
    }

    pub fn complement(&self) -> Vec<usize> {
        self.coords(Side::Complement)
    }
}

/// The `n` consecutive partitions of `0..n`, the `i`-th starting at `i`.
pub fn consecutive_partitions(n: usize) -> Vec<Partition> {
    (0..n).map(|i| Partition::consecutive(n, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    #[test]
    fn f4_x_squared_is_x_plus_one() {
        let k = f(4);
        let x = k.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(k.mul(x, x), k.from_coeffs(&[1, 1]).unwrap());
        assert_eq!(k.trace(x), 1);
    }

    #[test]
    fn f5_inverse_of_two() {
        let k = f(5);
        assert_eq!(k.inv(k.from_int(2)).unwrap(), k.from_int(3));
        assert_eq!(k.inv(Fq::ZERO), Err(GfError::InverseOfZero));
    }

    #[test]
    fn conway_table() {
        let known: &[((u32, u32), &[u32])] = &[
            ((2, 1), &[1, 1]),
            ((2, 2), &[1, 1, 1]),
            ((2, 3), &[1, 1, 0, 1]),
            ((2, 4), &[1, 1, 0, 0, 1]),
            ((2, 5), &[1, 0, 1, 0, 0, 1]),
            ((2, 6), &[1, 1, 0, 1, 1, 0, 1]),
            ((2, 8), &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
            ((3, 1), &[1, 1]),
            ((3, 2), &[2, 2, 1]),
            ((3, 3), &[1, 2, 0, 1]),
            ((3, 4), &[2, 0, 0, 2, 1]),
            ((5, 1), &[3, 1]),
            ((5, 2), &[2, 4, 1]),
            ((5, 3), &[3, 3, 0, 1]),
            ((7, 1), &[4, 1]),
            ((7, 2), &[3, 6, 1]),
            ((7, 3), &[4, 0, 6, 1]),
        ];
        for &((p, ell), c) in known {
            assert_eq!(conway_polynomial(p, ell).unwrap(), c, "C_{{{p},{ell}}}");
        }
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, 1), Err(GfError::NotPrime(4)));
        assert_eq!(FieldSpec::new(2, 0), Err(GfError::ZeroDegree));
        assert_eq!(
            FieldSpec::new(2, 17),
            Err(GfError::OrderTooLarge { p: 2, ell: 17 })
        );
        assert_eq!(
            FieldSpec::with_modulus(2, 2, vec![1, 0, 1]),
            Err(GfError::Reducible)
        );
        assert_eq!(
            FieldSpec::with_modulus(2, 2, vec![1, 1, 0]),
            Err(GfError::NotMonic)
        );
        assert!(FieldSpec::of_order(6).is_err());
        assert!(FieldSpec::of_order(1 << 16).is_ok());
    }

    #[test]
    fn tables_match_polynomial_arithmetic() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 81, 125, 243, 256, 343, 512, 625] {
            let k = f(q);
            let (p, m) = (k.p(), k.modulus().to_vec());
            let poly_of = |a: Fq| {
                let mut c = k.coeffs(a);
                poly::trim(&mut c);
                c
            };
            let elem_of = |c: &[u32]| {
                let mut c = c.to_vec();
                c.resize(k.ell() as usize, 0);
                k.from_coeffs(&c).unwrap()
            };
            let step = (q as usize / 40).max(1);
            for a in k.elements().step_by(step) {
                for b in k.elements() {
                    assert_eq!(k.mul(a, b), elem_of(&poly::mul_mod(&poly_of(a), &poly_of(b), &m, p)));
                    let s: Vec<u32> = k
                        .coeffs(a)
                        .iter()
                        .zip(k.coeffs(b))
                        .map(|(x, y)| (x + y) % p)
                        .collect();
                    assert_eq!(k.add(a, b), elem_of(&s));
                    assert_eq!(k.sub(k.add(a, b), b), a);
                }
            }
        }
    }

    #[test]
    fn element_tokens_round_trip() {
        let k = f(9);
        for a in k.elements() {
            let t = k.format_element(a);
            assert_eq!(t.len(), 2);
            assert_eq!(k.parse_element(&t).unwrap(), a);
        }
        let x = k.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(k.format_element(x), "10");
        assert_eq!(k.parse_element("2").unwrap(), k.from_int(2));
        assert!(k.parse_element("3").is_err());
        assert!(k.parse_element("100").is_err());
        assert!(k.parse_element("").is_err());
        let big = FieldSpec::new(37, 1).unwrap();
        assert_eq!(big.format_element(big.from_int(36)), "36");
        assert_eq!(big.parse_element("36").unwrap(), big.from_int(36));
    }

    #[test]
    fn field_token_round_trip() {
        let k: FieldSpec = "2:2:1,1,1".parse().unwrap();
        assert_eq!(k.q(), 4);
        assert_eq!(k.to_string(), "2:2:1,1,1");
        let c: FieldSpec = "3:2".parse().unwrap();
        assert_eq!(c.modulus(), &[2, 2, 1]);
        assert!("2:2:1,0,1".parse::<FieldSpec>().is_err());
        assert!("2".parse::<FieldSpec>().is_err());
        assert!("2:2:1,1,1:9".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn weight_init_restrict() {
        let k = f(3);
        let v = k.parse_vector("0,2,0,1").unwrap();
        assert_eq!(v.weight(), 2);
        let w = k.parse_vector("0,0,2,1").unwrap();
        assert_eq!(w.init().unwrap(), k.from_int(2));
        assert_eq!(FieldVector::zeros(3).init(), Err(GfError::ZeroVector));
        let a = k.parse_vector("1,2,0,1").unwrap();
        let part = Partition::from_members(4, &[0, 1]);
        assert_eq!(a.restrict(&part, Side::J), k.parse_vector("1,2,0,0").unwrap());
        let back = k
            .add_vectors(&a.restrict(&part, Side::J), &a.restrict(&part, Side::Complement))
            .unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn uniform_sampling_hits_every_element() {
        use rand::SeedableRng;
        for q in [2u64, 3, 4, 5, 7, 9, 16, 256, 65536] {
            let k = f(q);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(q);
            let draws = (q as usize * 60).max(2000);
            let mut buf = vec![Fq::ZERO; draws];
            k.fill_uniform(&mut rng, &mut buf);
            let mut counts = vec![0usize; q as usize];
            for a in &buf {
                counts[a.index()] += 1;
            }
            if q <= 256 {
                let expect = draws as f64 / q as f64;
                let sd = (expect * (1.0 - 1.0 / q as f64)).sqrt();
                for c in counts {
                    assert!((c as f64 - expect).abs() < 5.0 * sd, "q={q}");
                }
            } else {
                assert!(counts.iter().filter(|&&c| c > 0).count() > (q as usize * 9) / 10);
            }
        }
    }

    #[test]
    fn partitions_of_four_and_five() {
        let ps = consecutive_partitions(4);
        let sets: Vec<Vec<usize>> = ps.iter().map(|p| p.members()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]);
        assert!(consecutive_partitions(5).iter().all(|p| p.members().len() == 3));
    }
}
