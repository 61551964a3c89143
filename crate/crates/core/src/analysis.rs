//! Fourier analysis over `F_q`, distances between `F_q`-valued laws and the
//! `(a, A)`-projection.
//!
//! For `f: F_q^n -> F_q`, `f^(alpha) = E_x[e(f(x) - chi_alpha(x))]`.  Exact
//! routines enumerate only the coordinates that matter, so they stay cheap
//! for any ambient `n`.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::funcs::{decode_mixed, ExampleOracle, JuntaFunction, LdmeTarget, OracleError};
use crate::gf::{FieldSpec, FieldVector, Fq};
use crate::rng::StreamRng;

/// Largest number of points an exact enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("exact enumeration of {0} points exceeds the budget")]
    BudgetExceeded(u64),
    #[error("vector length {got} does not match arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("probabilities must be nonnegative and sum to 1 (sum {0})")]
    NotADistribution(f64),
    #[error("distribution has {got} entries, field has {expected}")]
    SupportSize { expected: usize, got: usize },
    #[error("projection scalar must be nonzero")]
    ZeroScalar,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn points(q: u32, t: usize) -> Result<usize, AnalysisError> {
    let n = (q as u64).checked_pow(t as u32).unwrap_or(u64::MAX);
    if n > ENUMERATION_BUDGET {
        return Err(AnalysisError::BudgetExceeded(n));
    }
    Ok(n as usize)
}

/// Mean of `g` over all assignments to `coords`, other coordinates zero.
fn subcube_mean(
    field: &FieldSpec,
    n: usize,
    coords: &[usize],
    mut g: impl FnMut(&[Fq]) -> Complex64,
) -> Result<Complex64, AnalysisError> {
    let count = points(field.q(), coords.len())?;
    let mut x = vec![Fq::ZERO; n];
    let mut digits = vec![Fq::ZERO; coords.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..count {
        decode_mixed(t, field.q() as usize, &mut digits);
        for (&i, &d) in coords.iter().zip(&digits) {
            x[i] = d;
        }
        acc += g(&x);
    }
    Ok(acc / count as f64)
}

fn union_coords(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// `(a f)^(alpha)` by summing over the subcube on `support(alpha) ∪ relevant(f)`.
pub fn fourier_subcube(f: &JuntaFunction, a: Fq, alpha: &FieldVector) -> Result<Complex64, AnalysisError> {
    if alpha.len() != f.n() {
        return Err(AnalysisError::ArityMismatch {
            expected: f.n(),
            got: alpha.len(),
        });
    }
    let field = f.field();
    let terms = alpha.sparse();
    let support: Vec<usize> = terms.iter().map(|&(i, _)| i).collect();
    let coords = union_coords(&support, f.relevant());
    subcube_mean(field, f.n(), &coords, |x| {
        let v = field.mul(a, f.eval_unchecked(x));
        field.character(field.sub(v, field.dot_sparse(&terms, x)))
    })
}

/// `(a f)^(alpha)`; exactly zero when `alpha` touches an irrelevant coordinate.
pub fn fourier_exact_scaled(f: &JuntaFunction, a: Fq, alpha: &FieldVector) -> Result<Complex64, AnalysisError> {
    if alpha.len() != f.n() {
        return Err(AnalysisError::ArityMismatch {
            expected: f.n(),
            got: alpha.len(),
        });
    }
    let rel = f.relevant();
    if alpha.support().iter().any(|i| rel.binary_search(i).is_err()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    fourier_subcube(f, a, alpha)
}

/// `f^(alpha) = E[e(f(x) - chi_alpha(x))]`.
pub fn fourier_exact(f: &JuntaFunction, alpha: &FieldVector) -> Result<Complex64, AnalysisError> {
    fourier_exact_scaled(f, Fq::ONE, alpha)
}

/// Empirical mean of `e(label - chi_alpha(x))`.
pub fn fourier_estimate(
    oracle: &dyn ExampleOracle,
    alpha: &FieldVector,
    samples: u64,
    rng: &mut StreamRng,
) -> Result<Complex64, AnalysisError> {
    let field = oracle.field();
    let terms = alpha.sparse();
    let mut x = vec![Fq::ZERO; oracle.arity()];
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..samples.max(1) {
        let b = oracle.draw(rng, &mut x)?;
        acc += field.character(field.sub(b, field.dot_sparse(&terms, &x)));
    }
    Ok(acc / samples.max(1) as f64)
}

/// `max_{a != 0} |(a f)^(a alpha)|`.
pub fn max_scaled_coefficient(f: &JuntaFunction, alpha: &FieldVector) -> Result<f64, AnalysisError> {
    let field = f.field();
    let mut best = 0.0f64;
    for a in field.nonzero() {
        let c = fourier_exact_scaled(f, a, &field.scale(a, alpha))?;
        best = best.max(c.norm());
    }
    Ok(best)
}

/// Law of an `F_q`-valued random variable, indexed by element.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    probs: Vec<f64>,
}

impl DistributionTable {
    pub fn new(probs: Vec<f64>) -> Result<Self, AnalysisError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(AnalysisError::NotADistribution(sum));
        }
        Ok(DistributionTable { probs })
    }

    pub fn uniform(q: usize) -> Self {
        DistributionTable {
            probs: vec![1.0 / q as f64; q],
        }
    }

    pub fn point(q: usize, a: Fq) -> Self {
        let mut probs = vec![0.0; q];
        probs[a.index()] = 1.0;
        DistributionTable { probs }
    }

    /// Random law: normalized exponentials, with a random subset zeroed so
    /// boundary cases show up.
    pub fn random(q: usize, rng: &mut StreamRng) -> Self {
        loop {
            let w: Vec<f64> = (0..q)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        -rng.gen::<f64>().max(1e-300).ln()
                    }
                })
                .collect();
            let s: f64 = w.iter().sum();
            if s > 0.0 {
                let mut probs: Vec<f64> = w.iter().map(|x| x / s).collect();
                let drift: f64 = 1.0 - probs.iter().sum::<f64>();
                let top = (0..q).max_by(|&i, &j| probs[i].total_cmp(&probs[j])).unwrap();
                probs[top] += drift;
                return DistributionTable { probs };
            }
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E[e(a X)]`.
    pub fn character_mean(&self, field: &FieldSpec, a: Fq) -> Complex64 {
        field
            .elements()
            .zip(&self.probs)
            .map(|(x, &p)| field.character(field.mul(a, x)) * p)
            .sum()
    }
}

/// `(1/2) sum_x |P(x) - P'(x)|`.
pub fn statistical_distance(p: &DistributionTable, r: &DistributionTable) -> Result<f64, AnalysisError> {
    if p.probs.len() != r.probs.len() {
        return Err(AnalysisError::SupportSize {
            expected: p.probs.len(),
            got: r.probs.len(),
        });
    }
    Ok(0.5 * p.probs.iter().zip(&r.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `max_a |E[e(a X)] - E[e(a X')]|` over all `a` in `F_q`.
pub fn character_distance(p: &DistributionTable, r: &DistributionTable, field: &FieldSpec) -> Result<f64, AnalysisError> {
    let q = field.q() as usize;
    for t in [p, r] {
        if t.probs.len() != q {
            return Err(AnalysisError::SupportSize {
                expected: q,
                got: t.probs.len(),
            });
        }
    }
    Ok(field
        .elements()
        .map(|a| (p.character_mean(field, a) - r.character_mean(field, a)).norm())
        .fold(0.0, f64::max))
}

/// If `gamma = c alpha` for some `c` (possibly zero), returns `c`.
pub fn multiple_of(field: &FieldSpec, gamma: &FieldVector, alpha: &FieldVector) -> Option<Fq> {
    let (i0, a0) = alpha.sparse().first().copied()?;
    let c = field.div(gamma[i0], a0).ok()?;
    (gamma.len() == alpha.len() && (0..alpha.len()).all(|i| gamma[i] == field.mul(c, alpha[i]))).then_some(c)
}

/// Exact `Cor(f, chi_gamma)` for an LDME target.
///
/// When `gamma = c alpha` the label law given `chi_gamma` follows from the
/// channel; otherwise `(chi_alpha, chi_gamma)` is uniform on `F_q^2` and the
/// correlation vanishes.
pub fn correlation_exact(target: &LdmeTarget, gamma: &FieldVector) -> f64 {
    let field = target.field();
    if gamma.is_zero() {
        return target.noise().correlation_with_multiple(Fq::ZERO);
    }
    match multiple_of(field, gamma, target.alpha()) {
        Some(c) => target.noise().correlation_with_multiple(c),
        None => 0.0,
    }
}

/// The matrix `A` (`m x n'`) and scalar `a` of an `(a, A)`-projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionParams {
    pub a: Fq,
    rows: Vec<Vec<Fq>>,
}

impl ProjectionParams {
    pub fn new(a: Fq, rows: Vec<Vec<Fq>>) -> Result<Self, AnalysisError> {
        if let Some(r) = rows.first() {
            if let Some(bad) = rows.iter().find(|s| s.len() != r.len()) {
                return Err(AnalysisError::ArityMismatch {
                    expected: r.len(),
                    got: bad.len(),
                });
            }
        }
        Ok(ProjectionParams { a, rows })
    }

    /// Uniform `A` in `F_q^{m x n}`.
    pub fn random(field: &FieldSpec, a: Fq, m: usize, n: usize, rng: &mut StreamRng) -> Self {
        let rows = (0..m)
            .map(|_| {
                let mut r = vec![Fq::ZERO; n];
                field.fill_uniform(rng, &mut r);
                r
            })
            .collect();
        ProjectionParams { a, rows }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn rows(&self) -> &[Vec<Fq>] {
        &self.rows
    }

    /// `A v`.
    pub fn apply(&self, field: &FieldSpec, v: &[Fq]) -> Vec<Fq> {
        self.rows.iter().map(|r| field.dot(r, v)).collect()
    }
}

/// `f^a_A(x) = E_z[e(a f(x + A^T z)) conj e(a sum_j z_j)]`, by enumerating `z`.
pub fn projection_exact(f: &JuntaFunction, params: &ProjectionParams, x: &[Fq]) -> Result<Complex64, AnalysisError> {
    let field = f.field();
    if params.a.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if x.len() != f.n() || params.n() != f.n() {
        return Err(AnalysisError::ArityMismatch {
            expected: f.n(),
            got: x.len(),
        });
    }
    let m = params.m();
    let count = points(field.q(), m)?;
    let mut z = vec![Fq::ZERO; m];
    let mut y = x.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..count {
        decode_mixed(t, field.q() as usize, &mut z);
        for i in 0..f.n() {
            let shift = (0..m).fold(Fq::ZERO, |s, r| field.add(s, field.mul(params.rows[r][i], z[r])));
            y[i] = field.add(x[i], shift);
        }
        let zsum = z.iter().fold(Fq::ZERO, |s, &v| field.add(s, v));
        let val = field.sub(field.mul(params.a, f.eval_unchecked(&y)), field.mul(params.a, zsum));
        acc += field.character(val);
    }
    Ok(acc / count as f64)
}

/// `sum_{alpha : A alpha = a^m} (a f)^(alpha) e(chi_alpha(x))`, with `alpha`
/// ranging over vectors supported on the relevant coordinates of `f`.
pub fn projection_via_fourier(f: &JuntaFunction, params: &ProjectionParams, x: &[Fq]) -> Result<Complex64, AnalysisError> {
    let field = f.field();
    if params.a.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let rel = f.relevant();
    let count = points(field.q(), rel.len())?;
    let target = vec![params.a; params.m()];
    let mut digits = vec![Fq::ZERO; rel.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..count {
        decode_mixed(t, field.q() as usize, &mut digits);
        let mut alpha = FieldVector::zeros(f.n());
        for (&i, &d) in rel.iter().zip(&digits) {
            alpha.0[i] = d;
        }
        if params.apply(field, alpha.as_slice()) != target {
            continue;
        }
        let c = fourier_exact_scaled(f, params.a, &alpha)?;
        acc += c * field.character(field.dot(alpha.as_slice(), x));
    }
    Ok(acc)
}

/// Simulates the projected oracle: draws `p` uniform in `F_q^m` and maps
/// `(x, b)` to `(x - A^T p, a (b - sum_j p_j))`.
pub struct Projected<O> {
    parent: O,
    a: Fq,
    m: usize,
    // column-major copy of A: entry (r, i) at i * m + r
    cols: Vec<Fq>,
}

pub fn projected_oracle<O: ExampleOracle>(parent: O, params: &ProjectionParams) -> Result<Projected<O>, AnalysisError> {
    if params.a.is_zero() {
        return Err(AnalysisError::ZeroScalar);
    }
    if params.n() != parent.arity() {
        return Err(AnalysisError::ArityMismatch {
            expected: parent.arity(),
            got: params.n(),
        });
    }
    let m = params.m();
    let n = params.n();
    let mut cols = vec![Fq::ZERO; n * m];
    for (r, row) in params.rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            cols[i * m + r] = v;
        }
    }
    Ok(Projected {
        parent,
        a: params.a,
        m,
        cols,
    })
}

impl<O: ExampleOracle> ExampleOracle for Projected<O> {
    fn field(&self) -> &FieldSpec {
        self.parent.field()
    }

    fn arity(&self) -> usize {
        self.parent.arity()
    }

    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        let field = self.parent.field();
        let b = self.parent.draw(rng, x)?;
        let mut p = [Fq::ZERO; 16];
        let p = if self.m <= 16 {
            &mut p[..self.m]
        } else {
            return self.draw_wide(rng, x, b);
        };
        field.fill_uniform(rng, p);
        for (i, xi) in x.iter_mut().enumerate() {
            let col = &self.cols[i * self.m..(i + 1) * self.m];
            let shift = col.iter().zip(p.iter()).fold(Fq::ZERO, |s, (&c, &v)| field.add(s, field.mul(c, v)));
            *xi = field.sub(*xi, shift);
        }
        let psum = p.iter().fold(Fq::ZERO, |s, &v| field.add(s, v));
        Ok(field.mul(self.a, field.sub(b, psum)))
    }
}

impl<O: ExampleOracle> Projected<O> {
    fn draw_wide(&self, rng: &mut StreamRng, x: &mut [Fq], b: Fq) -> Result<Fq, OracleError> {
        let field = self.parent.field();
        let mut p = vec![Fq::ZERO; self.m];
        field.fill_uniform(rng, &mut p);
        for (i, xi) in x.iter_mut().enumerate() {
            let col = &self.cols[i * self.m..(i + 1) * self.m];
            *xi = field.sub(*xi, field.dot(col, &p));
        }
        let psum = p.iter().fold(Fq::ZERO, |s, &v| field.add(s, v));
        Ok(field.mul(self.a, field.sub(b, psum)))
    }
}

/// Exact `Pr_A[A alpha = 1^m and A beta != 1^m for all other beta]` over
/// uniform `A` in `F_q^{m x |D|}`, as `(favourable, total)`.
pub fn filter_probability_exact(field: &FieldSpec, alpha: &FieldVector, m: usize) -> Result<(u64, u64), AnalysisError> {
    let d = alpha.len();
    let q = field.q() as usize;
    let total = points(field.q(), m * d)?;
    let betas = points(field.q(), d)?;
    let mut entries = vec![Fq::ZERO; m * d];
    let mut beta = vec![Fq::ZERO; d];
    let mut hits = 0u64;
    let hits_one = |entries: &[Fq], v: &[Fq]| (0..m).all(|r| field.dot(&entries[r * d..(r + 1) * d], v) == Fq::ONE);
    for t in 0..total {
        decode_mixed(t, q, &mut entries);
        if !hits_one(&entries, alpha.as_slice()) {
            continue;
        }
        let isolated = (0..betas).all(|s| {
            decode_mixed(s, q, &mut beta);
            beta.as_slice() == alpha.as_slice() || !hits_one(&entries, &beta)
        });
        if isolated {
            hits += 1;
        }
    }
    Ok((hits, total as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::gen_random_junta;
    use crate::rng::stream;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    #[test]
    fn coefficient_spot_values() {
        let k = f(3);
        let c = JuntaFunction::constant(k.clone(), 3, k.from_int(2));
        let z = fourier_exact(&c, &FieldVector::zeros(3)).unwrap();
        assert!((z - k.character(k.from_int(2))).norm() < 1e-12);
        let alpha = k.parse_vector("1,0,2").unwrap();
        let chi = JuntaFunction::linear(k.clone(), &alpha);
        assert!((fourier_exact(&chi, &alpha).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let off = k.parse_vector("1,1,2").unwrap();
        assert_eq!(fourier_exact(&chi, &off).unwrap(), Complex64::new(0.0, 0.0));
        assert!(fourier_subcube(&chi, Fq::ONE, &off).unwrap().norm() < 1e-12);
    }

    #[test]
    fn parseval() {
        let mut rng = stream(11, "parseval", 0);
        for q in [2u64, 3, 4] {
            let k = f(q);
            for _ in 0..5 {
                let g = gen_random_junta(&k, 3, 2, &mut rng).unwrap();
                let mut total = 0.0;
                for t in 0..(q as usize).pow(3) {
                    let mut a = vec![Fq::ZERO; 3];
                    decode_mixed(t, q as usize, &mut a);
                    total += fourier_exact(&g, &FieldVector(a)).unwrap().norm_sqr();
                }
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn distances() {
        let k = f(3);
        let u = DistributionTable::uniform(3);
        let pt = DistributionTable::point(3, Fq::ZERO);
        assert!((statistical_distance(&u, &pt).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(statistical_distance(&u, &u).unwrap(), 0.0);
        let k2 = f(2);
        let u2 = DistributionTable::uniform(2);
        let p2 = DistributionTable::point(2, Fq::ZERO);
        assert!((character_distance(&u2, &p2, &k2).unwrap() - 1.0).abs() < 1e-12);
        assert!((statistical_distance(&u2, &p2).unwrap() - 0.5).abs() < 1e-12);
        assert!(character_distance(&u, &u, &k).unwrap() < 1e-12);
        assert!(DistributionTable::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn filter_example() {
        let k = f(2);
        let (hits, total) = filter_probability_exact(&k, &FieldVector(vec![Fq::ONE]), 2).unwrap();
        assert_eq!((hits, total), (1, 4));
    }

    #[test]
    fn projection_zero_function() {
        let k = f(3);
        let zero = JuntaFunction::constant(k.clone(), 2, Fq::ZERO);
        let mut rng = stream(2, "p", 0);
        let params = ProjectionParams::random(&k, Fq::ONE, 2, 2, &mut rng);
        let v = projection_exact(&zero, &params, &[Fq::ZERO, Fq::ONE]).unwrap();
        assert!(v.norm() < 1e-12);
        let p0 = ProjectionParams::random(&k, Fq::ZERO, 2, 2, &mut rng);
        assert_eq!(projection_exact(&zero, &p0, &[Fq::ZERO; 2]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn projected_oracle_with_zero_matrix_shifts_labels() {
        let k = f(3);
        let mut rng = stream(5, "z", 0);
        let g = gen_random_junta(&k, 4, 2, &mut rng).unwrap();
        let params = ProjectionParams::new(Fq::ONE, vec![vec![Fq::ZERO; 4]; 2]).unwrap();
        let o = projected_oracle(&g, &params).unwrap();
        let mut counts = vec![0u32; 3];
        for _ in 0..3000 {
            let (x, b) = o.sample(&mut rng).unwrap();
            // label is f(x) plus a uniform shift
            counts[k.sub(b, g.eval(x.as_slice()).unwrap()).index()] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 - 1000.0).abs() < 150.0));
    }
}
