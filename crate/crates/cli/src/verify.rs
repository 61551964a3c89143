//! Exact and statistical property suites behind `fqj verify`.
//!
//! Every suite reports how many cases it checked, how many violated the
//! property, and the smallest slack observed (negative on a violation).

use fq_junta::analysis::{
    character_distance, filter_probability_exact, fourier_exact, fourier_subcube, max_scaled_coefficient,
    projection_exact, projection_via_fourier, statistical_distance, DistributionTable, ProjectionParams,
};
use fq_junta::funcs::{decode_mixed, gen_random_junta, JuntaFunction, LdmeTarget, NoiseModel};
use fq_junta::gf::consecutive_partitions;
use fq_junta::ldme::{binarized_agreement, binarized_agreement_bound};
use fq_junta::rng::stream;
use fq_junta::{FieldSpec, FieldVector, Fq, Side, StreamRng};
use rand::Rng;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: u64,
    pub violations: u64,
    pub min_margin: f64,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            cases: 0,
            violations: 0,
            min_margin: f64::INFINITY,
        }
    }

    /// Records one case whose slack is `margin` (violation below `-TOL`).
    fn record(&mut self, margin: f64) {
        self.cases += 1;
        if margin < -TOL || margin.is_nan() {
            self.violations += 1;
        }
        if margin < self.min_margin || margin.is_nan() {
            self.min_margin = margin;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }

    pub fn line(&self) -> String {
        format!(
            "suite={} status={} cases={} violations={} min_margin={:.3e}",
            self.name,
            if self.passed() { "pass" } else { "fail" },
            self.cases,
            self.violations,
            self.min_margin
        )
    }
}

type SuiteFn = fn(u64) -> SuiteResult;

pub const SUITES: &[(&str, SuiteFn)] = &[
    ("lemma2.1", lemma_2_1),
    ("lemma2.2", lemma_2_2),
    ("fact2.3", fact_2_3),
    ("parseval", parseval),
    ("lemma2.5", lemma_2_5),
    ("fact2.6", fact_2_6),
    ("lemma4.1", lemma_4_1),
    ("lemma4.2", lemma_4_2),
    ("claimC1", claim_c1),
    ("claimC2", claim_c2),
    ("claimC4", claim_c4),
    ("claimD1", claim_d1),
    ("claimD2", claim_d2),
    ("claimD3", claim_d3),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, seed: u64) -> Option<SuiteResult> {
    SUITES.iter().find(|(n, _)| *n == name).map(|(_, f)| f(seed))
}

fn field(q: u64) -> FieldSpec {
    FieldSpec::of_order(q).expect("prime power")
}

/// Every point of `F_q^n`, as index vectors.
fn all_points(q: u32, n: usize) -> impl Iterator<Item = Vec<Fq>> {
    let total = (q as usize).pow(n as u32);
    (0..total).map(move |t| {
        let mut x = vec![Fq::ZERO; n];
        decode_mixed(t, q as usize, &mut x);
        x
    })
}

fn dot(f: &FieldSpec, a: &[Fq], x: &[Fq]) -> Fq {
    f.dot(a, x)
}

/// Some consecutive split puts `ceil(w/2)` of a weight-`w` support in `J`.
fn lemma_2_1(_seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("lemma2.1");
    for _q in [2u32, 3, 4, 5] {
        for n in 2..=10usize {
            let parts = consecutive_partitions(n);
            for mask in 1u32..(1 << n) {
                let w = mask.count_ones() as usize;
                let ok = parts.iter().any(|p| {
                    let in_j = (0..n).filter(|&i| mask >> i & 1 == 1 && p.side_of(i) == Side::J).count();
                    in_j == w.div_ceil(2)
                });
                r.record(if ok { 0.0 } else { -1.0 });
            }
        }
    }
    r
}

/// Each relevant coordinate of `f` stays relevant for `Tr(c_j f)` for
/// one of the first `p^(ell-1)` nonzero scalars.
fn lemma_2_2(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("lemma2.2");
    for q in [4u64, 8, 9] {
        let k = field(q);
        let cs: Vec<Fq> = k.nonzero().take(k.p().pow(k.ell() - 1) as usize).collect();
        for t in 0..40 {
            let mut rng = stream(seed, "lemma2.2", q * 1000 + t);
            let kk = if q == 4 { 3 } else { 2 };
            let f = gen_random_junta(&k, 4, kk, &mut rng).expect("small junta");
            for (pos, _) in f.relevant().iter().enumerate() {
                let rel = f.relevant().len();
                let qq = q as usize;
                let stride = qq.pow((rel - 1 - pos) as u32);
                let ok = cs.iter().any(|&c| {
                    (0..f.table().len()).any(|idx| {
                        let digit = (idx / stride) % qq;
                        digit == 0
                            && (1..qq).any(|dd| {
                                k.trace(k.mul(c, f.table()[idx + dd * stride])) != k.trace(k.mul(c, f.table()[idx]))
                            })
                    })
                });
                r.record(if ok { 0.0 } else { -1.0 });
            }
        }
    }
    r
}

/// Coefficients touching an irrelevant coordinate vanish (computed on the
/// full subcube, without the shortcut).
fn fact_2_3(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("fact2.3");
    for q in [2u64, 3, 4, 5] {
        let k = field(q);
        for t in 0..50 {
            let mut rng = stream(seed, "fact2.3", q * 1000 + t);
            let f = gen_random_junta(&k, 4, 2, &mut rng).expect("small junta");
            let irrelevant: Vec<usize> = (0..4).filter(|i| !f.relevant().contains(i)).collect();
            let mut alpha = FieldVector::zeros(4);
            for i in 0..4 {
                if rng.gen_bool(0.5) {
                    alpha.0[i] = k.random(&mut rng);
                }
            }
            let i = irrelevant[rng.gen_range(0..irrelevant.len())];
            alpha.0[i] = k.element(rng.gen_range(1..q) as u32).unwrap();
            let c = fourier_subcube(&f, Fq::ONE, &alpha).expect("enumerable");
            r.record(TOL - c.norm());
        }
    }
    r
}

/// `sum_alpha |f^(alpha)|^2 = 1` over the relevant coordinates.
fn parseval(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("parseval");
    for q in [2u64, 3, 4] {
        let k = field(q);
        for t in 0..20 {
            let mut rng = stream(seed, "parseval", q * 1000 + t);
            let f = gen_random_junta(&k, 3, 2, &mut rng).expect("small junta");
            let rel = f.relevant().to_vec();
            let mut total = 0.0;
            for v in all_points(k.q(), rel.len()) {
                let mut alpha = FieldVector::zeros(3);
                for (&i, &c) in rel.iter().zip(&v) {
                    alpha.0[i] = c;
                }
                total += fourier_exact(&f, &alpha).expect("enumerable").norm_sqr();
            }
            r.record(TOL - (total - 1.0).abs());
        }
    }
    r
}

fn random_params(k: &FieldSpec, m: usize, n: usize, rng: &mut StreamRng, allow_zero: bool) -> ProjectionParams {
    let a = if allow_zero { k.random(rng) } else { k.element(rng.gen_range(1..k.q())).unwrap() };
    ProjectionParams::random(k, a, m, n, rng)
}

/// The projection computed from its definition equals the filtered
/// Fourier sum.
fn lemma_2_5(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("lemma2.5");
    for t in 0..200u64 {
        let mut rng = stream(seed, "lemma2.5", t);
        let q = [2u64, 3, 4][(t % 3) as usize];
        let k = field(q);
        let n = rng.gen_range(2..=6);
        let f = gen_random_junta(&k, n, 2.min(n), &mut rng).expect("small junta");
        let m = rng.gen_range(1..=3);
        let params = random_params(&k, m, n, &mut rng, t % 10 == 0);
        let mut x = vec![Fq::ZERO; n];
        k.fill_uniform(&mut rng, &mut x);
        let lhs = projection_exact(&f, &params, &x).expect("enumerable");
        let rhs = projection_via_fourier(&f, &params, &x).expect("enumerable");
        r.record(TOL - (lhs - rhs).norm());
    }
    r
}

/// `CD <= 2 SD <= sqrt(q-1) CD`.
fn fact_2_6(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("fact2.6");
    for q in [2u64, 3, 4, 5] {
        let k = field(q);
        let mut rng = stream(seed, "fact2.6", q);
        for _ in 0..1000 {
            let a = DistributionTable::random(q as usize, &mut rng);
            let b = DistributionTable::random(q as usize, &mut rng);
            let sd = statistical_distance(&a, &b).expect("same size");
            let cd = character_distance(&a, &b, &k).expect("same size");
            r.record((2.0 * sd - cd).min(((q - 1) as f64).sqrt() * cd - 2.0 * sd));
        }
    }
    r
}

/// `|E e(X)| >= rho` forces some value with probability `1/q + rho/q^2`.
fn lemma_4_1(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("lemma4.1");
    for q in [2u64, 3, 4, 5, 7] {
        let k = field(q);
        let mut rng = stream(seed, "lemma4.1", q);
        for _ in 0..1000 {
            let d = DistributionTable::random(q as usize, &mut rng);
            let rho = d.character_mean(&k, Fq::ONE).norm();
            let best = d.probs().iter().cloned().fold(0.0, f64::max);
            let qf = q as f64;
            r.record(best - (1.0 / qf + rho / (qf * qf)));
        }
    }
    r
}

fn random_channel(k: &FieldSpec, rng: &mut StreamRng) -> NoiseModel {
    let q = k.q() as usize;
    let mut rows = Vec::with_capacity(q * q);
    for _ in 0..q {
        rows.extend_from_slice(DistributionTable::random(q, rng).probs());
    }
    NoiseModel::from_rows(k, rows).expect("valid rows")
}

/// Exact law of `label - chi_beta(x)` for an LDME target.
fn residual_law(target: &LdmeTarget, beta: &[Fq]) -> Vec<f64> {
    let k = target.field();
    let n = target.n();
    let q = k.q() as usize;
    let mut law = vec![0.0; q];
    let w = 1.0 / (q as f64).powi(n as i32);
    for x in all_points(k.q(), n) {
        let v = dot(k, target.alpha().as_slice(), &x);
        let cb = dot(k, beta, &x);
        for out in k.elements() {
            law[k.sub(out, cb).index()] += w * target.noise().prob(v, out);
        }
    }
    law
}

fn random_nonzero_vector(k: &FieldSpec, n: usize, rng: &mut StreamRng) -> FieldVector {
    loop {
        let mut v = vec![Fq::ZERO; n];
        k.fill_uniform(rng, &mut v);
        let v = FieldVector(v);
        if !v.is_zero() {
            return v;
        }
    }
}

fn independent(k: &FieldSpec, a: &FieldVector, b: &FieldVector) -> bool {
    k.elements().all(|c| k.scale(c, a) != *b)
}

/// The residual against an independent linear form is exactly uniform.
fn lemma_4_2(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("lemma4.2");
    for q in [2u64, 3, 4, 5] {
        let k = field(q);
        let mut rng = stream(seed, "lemma4.2", q);
        let mut done = 0;
        while done < 30 {
            let n = 3;
            let alpha = random_nonzero_vector(&k, n, &mut rng);
            let beta = random_nonzero_vector(&k, n, &mut rng);
            if !independent(&k, &alpha, &beta) {
                continue;
            }
            done += 1;
            let target = LdmeTarget::new(alpha, random_channel(&k, &mut rng)).expect("valid target");
            let law = residual_law(&target, beta.as_slice());
            let dev = law.iter().map(|p| (p - 1.0 / q as f64).abs()).fold(0.0, f64::max);
            r.record(TOL - dev);
        }
    }
    r
}

/// Joint law of `(chi_alpha, chi_beta)`: uniform on `F_q^2` for independent
/// pairs, `1/q` on the line `b = c a` when `beta = c alpha`.
fn claim_c1(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimC1");
    for q in [2u64, 3, 4] {
        let k = field(q);
        let qs = q as usize;
        for n in 1..=5usize {
            if qs.pow(n as u32) > 1024 {
                continue;
            }
            let mut rng = stream(seed, "claimC1", q * 100 + n as u64);
            for _ in 0..10 {
                let alpha = random_nonzero_vector(&k, n, &mut rng);
                let beta = if rng.gen_bool(0.3) {
                    k.scale(k.element(rng.gen_range(1..q) as u32).unwrap(), &alpha)
                } else {
                    random_nonzero_vector(&k, n, &mut rng)
                };
                let mut joint = vec![0.0; qs * qs];
                let total = qs.pow(n as u32) as f64;
                for x in all_points(k.q(), n) {
                    let a = dot(&k, alpha.as_slice(), &x);
                    let b = dot(&k, beta.as_slice(), &x);
                    joint[a.index() * qs + b.index()] += 1.0 / total;
                }
                let c = k.elements().find(|&c| k.scale(c, &alpha) == beta);
                let mut dev = 0.0f64;
                for a in k.elements() {
                    for b in k.elements() {
                        let want = match c {
                            None => 1.0 / (qs * qs) as f64,
                            Some(c) if k.mul(c, a) == b => 1.0 / qs as f64,
                            Some(_) => 0.0,
                        };
                        dev = dev.max((joint[a.index() * qs + b.index()] - want).abs());
                    }
                }
                r.record(TOL - dev);
            }
        }
    }
    r
}

/// Isolation probability of a random `A` against `(q^(m-k) - 1)/q^(2m-k)`.
fn claim_c2(_seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimC2");
    for q in [2u64, 3] {
        let k = field(q);
        for d in 1..=2usize {
            for alpha in all_points(k.q(), d) {
                let alpha = FieldVector(alpha);
                if alpha.is_zero() {
                    continue;
                }
                for m in d..=3usize {
                    let (hits, total) = filter_probability_exact(&k, &alpha, m).expect("enumerable");
                    let qf = q as f64;
                    let bound = (qf.powi((m - d) as i32) - 1.0) / qf.powi((2 * m - d) as i32);
                    r.record(hits as f64 / total as f64 - bound);
                }
            }
        }
    }
    r
}

/// Every nonzero coefficient of a non-constant `k`-junta keeps scaled mass
/// `max_a |(af)^(a alpha)| >= 1/q^(k+1)`.
fn claim_c4(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimC4");
    for (q, kk, exhaustive) in [(2u64, 2usize, true), (3, 1, true), (3, 2, false), (4, 1, true), (4, 2, false)] {
        let k = field(q);
        let qs = q as usize;
        let tables: Vec<Vec<Fq>> = if exhaustive {
            let len = qs.pow(kk as u32);
            (0..qs.pow(len as u32))
                .map(|t| {
                    let mut tab = vec![Fq::ZERO; len];
                    decode_mixed(t, qs, &mut tab);
                    tab
                })
                .collect()
        } else {
            let mut rng = stream(seed, "claimC4", q * 10 + kk as u64);
            (0..200)
                .map(|_| {
                    let mut tab = vec![Fq::ZERO; qs.pow(kk as u32)];
                    k.fill_uniform(&mut rng, &mut tab);
                    tab
                })
                .collect()
        };
        for tab in tables {
            let f = JuntaFunction::from_fn(k.clone(), kk, &(0..kk).collect::<Vec<_>>(), |x| tab[encode(x, qs)]);
            let Ok(f) = f else { continue };
            if f.relevant().is_empty() {
                continue;
            }
            for v in all_points(k.q(), kk) {
                let alpha = FieldVector(v);
                if alpha.is_zero() {
                    continue;
                }
                if fourier_exact(&f, &alpha).expect("enumerable").norm() < TOL {
                    continue;
                }
                let best = max_scaled_coefficient(&f, &alpha).expect("enumerable");
                r.record(best - (q as f64).powi(-(kk as i32 + 1)));
            }
        }
    }
    r
}

fn encode(x: &[Fq], q: usize) -> usize {
    x.iter().fold(0, |acc, v| acc * q + v.index())
}

/// Non-target column pairs are uniform and independent given `chi_alpha`.
fn claim_d1(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimD1");
    for q in [2u64, 3] {
        let k = field(q);
        let qs = q as usize;
        let n = 4;
        let mut rng = stream(seed, "claimD1", q);
        for _ in 0..6 {
            let alpha = random_nonzero_vector(&k, n, &mut rng);
            for part in consecutive_partitions(n) {
                let aj = alpha.restrict(&part, Side::J);
                let ajb = alpha.restrict(&part, Side::Complement);
                if aj.is_zero() || ajb.is_zero() {
                    continue;
                }
                let cols: Vec<FieldVector> = all_points(k.q(), n)
                    .map(FieldVector)
                    .filter(|v| !v.is_zero())
                    .filter(|v| *v == v.restrict(&part, Side::J) || *v == v.restrict(&part, Side::Complement))
                    .collect();
                let not_scaled = |v: &FieldVector| {
                    k.nonzero().filter(|&a| a != Fq::ONE).all(|a| {
                        let av = k.scale(a, v);
                        av != aj && av != ajb
                    })
                };
                for (bi, b) in cols.iter().enumerate() {
                    for b2 in &cols[bi + 1..] {
                        let sum = k.add_vectors(b, b2).expect("same length");
                        if !independent(&k, b, b2) || !not_scaled(b) || !not_scaled(b2) || sum == alpha {
                            continue;
                        }
                        let mut joint = vec![0u32; qs * qs * qs];
                        for x in all_points(k.q(), n) {
                            let v1 = dot(&k, b.as_slice(), &x).index();
                            let v2 = dot(&k, b2.as_slice(), &x).index();
                            let v3 = dot(&k, alpha.as_slice(), &x).index();
                            joint[(v1 * qs + v2) * qs + v3] += 1;
                        }
                        let want = qs.pow(n as u32 - 3) as u32;
                        let ok = joint.iter().all(|&c| c == want);
                        r.record(if ok { 0.0 } else { -1.0 });
                    }
                }
            }
        }
    }
    r
}

/// A correlated target concentrates on some `(a1, a2)` across any split.
fn claim_d2(seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimD2");
    for q in [2u64, 3, 4] {
        let k = field(q);
        let qs = q as usize;
        let n = 4;
        let mut rng = stream(seed, "claimD2", q);
        for _ in 0..20 {
            let alpha = random_nonzero_vector(&k, n, &mut rng);
            let target = LdmeTarget::new(alpha.clone(), random_channel(&k, &mut rng)).expect("valid target");
            let rho = {
                let law = residual_law(&target, alpha.as_slice());
                DistributionTable::new(law).expect("law").character_mean(&k, Fq::ONE).norm()
            };
            for part in consecutive_partitions(n) {
                let aj = alpha.restrict(&part, Side::J);
                let ajb = alpha.restrict(&part, Side::Complement);
                let mut best = 0.0f64;
                for a1 in k.elements() {
                    for a2 in k.elements() {
                        let mut p = 0.0;
                        let w = 1.0 / (qs.pow(n as u32)) as f64;
                        for x in all_points(k.q(), n) {
                            if dot(&k, ajb.as_slice(), &x) != a2 {
                                continue;
                            }
                            let v = dot(&k, alpha.as_slice(), &x);
                            let cj = dot(&k, aj.as_slice(), &x);
                            let want = k.add(k.add(a2, a1), cj);
                            p += w * target.noise().prob(v, want);
                        }
                        best = best.max(p);
                    }
                }
                let qf = q as f64;
                r.record(best - (1.0 / (qf * qf) + rho / qf.powi(3)));
            }
        }
    }
    r
}

/// Binarized agreement against `1/2 + 2 p_h^2 mu` on a `(q, mu)` grid.
fn claim_d3(_seed: u64) -> SuiteResult {
    let mut r = SuiteResult::new("claimD3");
    for q in [2u32, 3, 4, 5, 7, 8, 9, 11, 16] {
        let qf = q as f64;
        let max_mu = 1.0 / qf - 1.0 / (qf * qf);
        for t in 0..=100 {
            let mu = max_mu * t as f64 / 100.0;
            r.record(binarized_agreement(q, mu) - binarized_agreement_bound(q, mu));
        }
    }
    r
}
