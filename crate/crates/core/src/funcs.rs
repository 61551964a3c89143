//! Target functions and the example-oracle interface.
//!
//! Learners only ever see a target through an [`ExampleOracle`]: a sampler
//! producing `(x, label)` with `x` uniform over `F_q^n`.  Restriction and
//! label scaling are oracle transformations, as is the projection in
//! [`crate::analysis`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use thiserror::Error;

use crate::gf::{FieldSpec, FieldVector, Fq, GfError};
use crate::rng::StreamRng;
use crate::text::{content_lines, parse_num, ParseError};

/// Largest truth table a junta may carry.
pub const TABLE_BUDGET: u64 = 1 << 24;

/// Largest field for which dense channel matrices are stored.
pub const DENSE_CHANNEL_MAX_Q: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("relevant coordinates must be strictly increasing and below n")]
    BadRelevant,
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("coordinate {0} is declared relevant but the table ignores it")]
    NotRelevant(usize),
    #[error("{got} relevant coordinates exceed the declared bound {k}")]
    TooManyRelevant { k: usize, got: usize },
    #[error("q^k = {0} table entries exceed the budget")]
    Budget(u64),
    #[error("channel row {row} is not a distribution (sum {sum})")]
    ChannelRow { row: usize, sum: f64 },
    #[error("dense channels need q <= {DENSE_CHANNEL_MAX_Q}")]
    ChannelTooLarge,
    #[error("correlation {0} is not in (0, 1]")]
    InfeasibleCorrelation(f64),
    #[error("LDME target vector must be nonzero")]
    ZeroTarget,
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no example consistent with the restriction after {0} draws")]
    RejectionBudgetExhausted(u64),
}

/// Source of uniformly distributed labelled examples.
pub trait ExampleOracle {
    fn field(&self) -> &FieldSpec;

    fn arity(&self) -> usize;

    /// Writes a uniform point into `x` (of length `arity`) and returns its label.
    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError>;

    fn sample(&self, rng: &mut StreamRng) -> Result<(FieldVector, Fq), OracleError> {
        let mut x = vec![Fq::ZERO; self.arity()];
        let b = self.draw(rng, &mut x)?;
        Ok((FieldVector(x), b))
    }
}

impl<O: ExampleOracle + ?Sized> ExampleOracle for &O {
    fn field(&self) -> &FieldSpec {
        (**self).field()
    }

    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        (**self).draw(rng, x)
    }
}

impl<O: ExampleOracle + ?Sized> ExampleOracle for Box<O> {
    fn field(&self) -> &FieldSpec {
        (**self).field()
    }

    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        (**self).draw(rng, x)
    }
}

/// A function of `n` variables depending only on `relevant`.
#[derive(Clone, Debug, PartialEq)]
pub struct JuntaFunction {
    field: FieldSpec,
    n: usize,
    relevant: Vec<usize>,
    table: Vec<Fq>,
}

fn table_len(q: u32, k: usize) -> Result<usize, FuncError> {
    let len = (q as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if len > TABLE_BUDGET {
        return Err(FuncError::Budget(len));
    }
    Ok(len as usize)
}

/// For each digit position of a mixed-radix table, whether changing that
/// digit alone can change the value.
fn table_dependence(q: usize, k: usize, table: &[Fq]) -> Vec<bool> {
    (0..k)
        .map(|j| {
            let stride = q.pow((k - 1 - j) as u32);
            (0..table.len()).any(|t| {
                let digit = (t / stride) % q;
                digit == 0 && (1..q).any(|d| table[t + d * stride] != table[t])
            })
        })
        .collect()
}

impl JuntaFunction {
    /// Validates that `relevant` is increasing, in range and truly relevant.
    pub fn new(field: FieldSpec, n: usize, relevant: Vec<usize>, table: Vec<Fq>) -> Result<Self, FuncError> {
        if relevant.windows(2).any(|w| w[0] >= w[1]) || relevant.iter().any(|&i| i >= n) {
            return Err(FuncError::BadRelevant);
        }
        let expected = table_len(field.q(), relevant.len())?;
        if table.len() != expected {
            return Err(FuncError::TableLength {
                expected,
                got: table.len(),
            });
        }
        if let Some(&a) = table.iter().find(|a| a.index() >= field.q() as usize) {
            return Err(GfError::ElementRange(a.index() as u32).into());
        }
        let dep = table_dependence(field.q() as usize, relevant.len(), &table);
        if let Some(j) = dep.iter().position(|d| !d) {
            return Err(FuncError::NotRelevant(relevant[j]));
        }
        Ok(JuntaFunction {
            field,
            n,
            relevant,
            table,
        })
    }

    /// Tabulates `f` over the coordinates `coords`, then drops those `f`
    /// ignores.  `f` receives the assignment to `coords` in order.
    pub fn from_fn(
        field: FieldSpec,
        n: usize,
        coords: &[usize],
        f: impl Fn(&[Fq]) -> Fq,
    ) -> Result<Self, FuncError> {
        let q = field.q() as usize;
        let k = coords.len();
        let len = table_len(field.q(), k)?;
        let mut assignment = vec![Fq::ZERO; k];
        let full: Vec<Fq> = (0..len)
            .map(|t| {
                decode_mixed(t, q, &mut assignment);
                f(&assignment)
            })
            .collect();
        let dep = table_dependence(q, k, &full);
        let keep: Vec<usize> = (0..k).filter(|&j| dep[j]).collect();
        let mut pairs: Vec<(usize, usize)> = keep.iter().map(|&j| (coords[j], j)).collect();
        pairs.sort();
        let klen = table_len(field.q(), pairs.len())?;
        let mut table = Vec::with_capacity(klen);
        let mut sub = vec![Fq::ZERO; pairs.len()];
        for t in 0..klen {
            decode_mixed(t, q, &mut sub);
            let mut full_assign = vec![Fq::ZERO; k];
            for (slot, &(_, j)) in pairs.iter().enumerate() {
                full_assign[j] = sub[slot];
            }
            table.push(full[encode_mixed(&full_assign, q)]);
        }
        let relevant: Vec<usize> = pairs.iter().map(|&(c, _)| c).collect();
        JuntaFunction::new(field, n, relevant, table)
    }

    pub fn constant(field: FieldSpec, n: usize, value: Fq) -> Self {
        JuntaFunction {
            field,
            n,
            relevant: Vec::new(),
            table: vec![value],
        }
    }

    /// `chi_alpha(x) = sum_i alpha_i x_i`.
    pub fn linear(field: FieldSpec, alpha: &FieldVector) -> Self {
        let terms = alpha.sparse();
        let coords: Vec<usize> = terms.iter().map(|&(i, _)| i).collect();
        let coefs: Vec<Fq> = terms.iter().map(|&(_, c)| c).collect();
        let f2 = field.clone();
        JuntaFunction::from_fn(field, alpha.len(), &coords, move |v| f2.dot(&coefs, v))
            .expect("linear forms depend on their support")
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn table(&self) -> &[Fq] {
        &self.table
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[Fq]) -> Fq {
        let q = self.field.q() as usize;
        let idx = self.relevant.iter().fold(0usize, |acc, &i| acc * q + x[i].index());
        self.table[idx]
    }

    pub fn eval(&self, x: &[Fq]) -> Result<Fq, FuncError> {
        if x.len() != self.n {
            return Err(FuncError::ArityMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Value on the table row `t` (assignment to the relevant coordinates).
    pub fn table_value(&self, t: usize) -> Fq {
        self.table[t]
    }

    /// Writes the junta file format:
    ///
    /// ```text
    /// junta <p> <ell> <n> <k>
    /// modulus <c0,c1,...>      (optional, defaults to the Conway polynomial)
    /// relevant <i> <i> ...     (0-based, increasing)
    /// table <element> ...      (mixed radix, first relevant coordinate most significant)
    /// ```
    pub fn to_text(&self, k: usize) -> String {
        let f = &self.field;
        let mut s = format!("junta {} {} {} {}\n", f.p(), f.ell(), self.n, k.max(self.relevant.len()));
        let m: Vec<String> = f.modulus().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "modulus {}", m.join(","));
        s.push_str("relevant");
        for i in &self.relevant {
            let _ = write!(s, " {i}");
        }
        s.push_str("\ntable");
        for (t, &v) in self.table.iter().enumerate() {
            s.push(if t > 0 && t % 32 == 0 { '\n' } else { ' ' });
            s.push_str(&f.format_element(v));
        }
        s.push('\n');
        s
    }

    /// Parses the junta file format; returns the function and its declared `k`.
    pub fn parse(text: &str) -> Result<(Self, usize), FuncError> {
        let mut lines = content_lines(text).peekable();
        let (ln, header) = lines.next().ok_or_else(|| ParseError::new(0, "empty junta file"))?;
        let mut h = header.split_whitespace();
        if h.next() != Some("junta") {
            return Err(ParseError::new(ln, "expected `junta` header").into());
        }
        let p: u32 = parse_num(h.next(), ln, "p")?;
        let ell: u32 = parse_num(h.next(), ln, "ell")?;
        let n: usize = parse_num(h.next(), ln, "n")?;
        let k: usize = parse_num(h.next(), ln, "k")?;
        if h.next().is_some() {
            return Err(ParseError::new(ln, "trailing header tokens").into());
        }
        let field = parse_field_lines(p, ell, &mut lines)?;
        let (ln, rel) = lines.next().ok_or_else(|| ParseError::new(ln, "missing relevant line"))?;
        let mut r = rel.split_whitespace();
        if r.next() != Some("relevant") {
            return Err(ParseError::new(ln, "expected `relevant`").into());
        }
        let relevant: Vec<usize> = r
            .map(|t| t.parse().map_err(|_| ParseError::new(ln, "bad coordinate")))
            .collect::<Result<_, _>>()?;
        if relevant.len() > k {
            return Err(FuncError::TooManyRelevant {
                k,
                got: relevant.len(),
            });
        }
        let (ln, first) = lines.next().ok_or_else(|| ParseError::new(ln, "missing table"))?;
        let mut toks = first.split_whitespace();
        if toks.next() != Some("table") {
            return Err(ParseError::new(ln, "expected `table`").into());
        }
        let expected = table_len(field.q(), relevant.len())?;
        let mut table = Vec::with_capacity(expected);
        let mut push = |tok: &str, ln: usize| -> Result<(), FuncError> {
            if table.len() == expected {
                return Err(ParseError::new(ln, "too many table entries").into());
            }
            table.push(field.parse_element(tok).map_err(|e| ParseError::new(ln, e.to_string()))?);
            Ok(())
        };
        for t in toks {
            push(t, ln)?;
        }
        for (ln, l) in lines {
            for t in l.split_whitespace() {
                push(t, ln)?;
            }
        }
        Ok((JuntaFunction::new(field, n, relevant, table)?, k))
    }
}

fn parse_field_lines<'a>(
    p: u32,
    ell: u32,
    lines: &mut std::iter::Peekable<impl Iterator<Item = (usize, &'a str)>>,
) -> Result<FieldSpec, FuncError> {
    if let Some(&(ln, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("modulus") {
            lines.next();
            let coeffs: Vec<u32> = rest
                .trim()
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| ParseError::new(ln, "bad modulus")))
                .collect::<Result<_, _>>()?;
            return Ok(FieldSpec::with_modulus(p, ell, coeffs)?);
        }
    }
    Ok(FieldSpec::new(p, ell)?)
}

/// Mixed-radix digits of `t`, most significant first.
pub fn decode_mixed(mut t: usize, q: usize, out: &mut [Fq]) {
    for v in out.iter_mut().rev() {
        *v = Fq((t % q) as u16);
        t /= q;
    }
}

pub fn encode_mixed(digits: &[Fq], q: usize) -> usize {
    digits.iter().fold(0, |acc, d| acc * q + d.index())
}

impl ExampleOracle for JuntaFunction {
    fn field(&self) -> &FieldSpec {
        &self.field
    }

    fn arity(&self) -> usize {
        self.n
    }

    #[inline]
    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        self.field.fill_uniform(rng, x);
        Ok(self.eval_unchecked(x))
    }
}

/// Exact relevant set, read off the truth table.
pub fn relevant_bruteforce(f: &JuntaFunction) -> Vec<usize> {
    let dep = table_dependence(f.field.q() as usize, f.relevant.len(), &f.table);
    f.relevant
        .iter()
        .zip(dep)
        .filter(|(_, d)| *d)
        .map(|(&i, _)| i)
        .collect()
}

/// A random function with exactly `k` relevant coordinates among `n`.
pub fn gen_random_junta(field: &FieldSpec, n: usize, k: usize, rng: &mut StreamRng) -> Result<JuntaFunction, FuncError> {
    if k > n {
        return Err(FuncError::TooManyRelevant { k: n, got: k });
    }
    let len = table_len(field.q(), k)?;
    let mut relevant = sample_indices(rng, n, k).into_vec();
    relevant.sort_unstable();
    let mut table = vec![Fq::ZERO; len];
    loop {
        field.fill_uniform(rng, &mut table);
        if table_dependence(field.q() as usize, k, &table).iter().all(|&d| d) {
            return JuntaFunction::new(field.clone(), n, relevant, table);
        }
    }
}

/// A partial assignment `tau` on a coordinate set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Restriction {
    assignments: BTreeMap<usize, Fq>,
}

impl Restriction {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Fq)>) -> Self {
        Restriction {
            assignments: pairs.into_iter().collect(),
        }
    }

    /// The `t`-th assignment to `coords` (mixed radix, first coordinate most
    /// significant).
    pub fn nth(coords: &[usize], t: usize, q: u32) -> Self {
        let mut digits = vec![Fq::ZERO; coords.len()];
        decode_mixed(t, q as usize, &mut digits);
        Self::from_pairs(coords.iter().copied().zip(digits))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Fq> {
        self.assignments.get(&i).copied()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.assignments.keys().copied().collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, Fq)> + '_ {
        self.assignments.iter().map(|(&i, &v)| (i, v))
    }
}

/// `O(f|tau)` by rejection sampling on the parent oracle.  Coordinates of
/// the restricted oracle are the parent's unrestricted coordinates in
/// increasing order.
pub struct Restricted<O> {
    parent: O,
    fixed: Vec<(usize, Fq)>,
    keep: Vec<usize>,
    cap: u64,
}

pub const DEFAULT_CAP_MULTIPLIER: u64 = 64;

pub fn restricted_oracle<O: ExampleOracle>(parent: O, tau: &Restriction, cap_multiplier: u64) -> Restricted<O> {
    let n = parent.arity();
    let fixed: Vec<(usize, Fq)> = tau.pairs().collect();
    let keep: Vec<usize> = (0..n).filter(|i| tau.get(*i).is_none()).collect();
    let q = parent.field().q() as u64;
    let cap = cap_multiplier
        .saturating_mul(q.saturating_pow(fixed.len() as u32))
        .max(1);
    Restricted {
        parent,
        fixed,
        keep,
        cap,
    }
}

impl<O> Restricted<O> {
    /// Parent coordinate of each restricted coordinate.
    pub fn kept_coords(&self) -> &[usize] {
        &self.keep
    }
}

impl<O: ExampleOracle> ExampleOracle for Restricted<O> {
    fn field(&self) -> &FieldSpec {
        self.parent.field()
    }

    fn arity(&self) -> usize {
        self.keep.len()
    }

    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        if self.fixed.is_empty() {
            return self.parent.draw(rng, x);
        }
        let mut buf = vec![Fq::ZERO; self.parent.arity()];
        for _ in 0..self.cap {
            let b = self.parent.draw(rng, &mut buf)?;
            if self.fixed.iter().all(|&(i, v)| buf[i] == v) {
                for (dst, &i) in x.iter_mut().zip(&self.keep) {
                    *dst = buf[i];
                }
                return Ok(b);
            }
        }
        Err(OracleError::RejectionBudgetExhausted(self.cap))
    }
}

/// `O(cf)`: labels multiplied by `c`.
pub struct Scaled<O> {
    parent: O,
    c: Fq,
}

pub fn scaled_oracle<O: ExampleOracle>(parent: O, c: Fq) -> Scaled<O> {
    Scaled { parent, c }
}

impl<O: ExampleOracle> ExampleOracle for Scaled<O> {
    fn field(&self) -> &FieldSpec {
        self.parent.field()
    }

    fn arity(&self) -> usize {
        self.parent.arity()
    }

    #[inline]
    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        let b = self.parent.draw(rng, x)?;
        Ok(self.parent.field().mul(self.c, b))
    }
}

/// Counts successful draws passing through it.
pub struct Counted<O> {
    parent: O,
    count: AtomicU64,
}

impl<O: ExampleOracle> Counted<O> {
    pub fn new(parent: O) -> Self {
        Counted {
            parent,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }
}

impl<O: ExampleOracle> ExampleOracle for Counted<O> {
    fn field(&self) -> &FieldSpec {
        self.parent.field()
    }

    fn arity(&self) -> usize {
        self.parent.arity()
    }

    #[inline]
    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        let b = self.parent.draw(rng, x)?;
        self.count.fetch_add(1, Ordering::Relaxed);
        Ok(b)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Channel {
    /// Keep the input with probability `eta`, else emit a uniform value.
    Mix { eta: f64 },
    /// Row-major `q x q` probabilities and per-row cumulative sums.
    Dense { probs: Vec<f64>, cdf: Vec<f64> },
}

/// Memoryless channel: the label's law depends only on `chi_alpha(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    field: FieldSpec,
    channel: Channel,
}

impl NoiseModel {
    pub fn identity(field: &FieldSpec) -> Self {
        Self::eta_mix(field, 1.0).expect("eta = 1 is valid")
    }

    pub fn eta_mix(field: &FieldSpec, eta: f64) -> Result<Self, FuncError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(FuncError::InfeasibleCorrelation(eta));
        }
        Ok(NoiseModel {
            field: field.clone(),
            channel: Channel::Mix { eta },
        })
    }

    /// `w = v + c` deterministically.
    pub fn constant_shift(field: &FieldSpec, c: Fq) -> Result<Self, FuncError> {
        let q = field.q() as usize;
        let mut rows = vec![0.0; q * q];
        for v in field.elements() {
            rows[v.index() * q + field.add(v, c).index()] = 1.0;
        }
        Self::from_rows(field, rows)
    }

    /// Row-major `q x q` row-stochastic matrix.
    pub fn from_rows(field: &FieldSpec, probs: Vec<f64>) -> Result<Self, FuncError> {
        let q = field.q() as usize;
        if field.q() > DENSE_CHANNEL_MAX_Q {
            return Err(FuncError::ChannelTooLarge);
        }
        if probs.len() != q * q {
            return Err(FuncError::TableLength {
                expected: q * q,
                got: probs.len(),
            });
        }
        let mut cdf = vec![0.0; q * q];
        for row in 0..q {
            let r = &probs[row * q..(row + 1) * q];
            let sum: f64 = r.iter().sum();
            if r.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) || (sum - 1.0).abs() > 1e-12 {
                return Err(FuncError::ChannelRow { row, sum });
            }
            let mut acc = 0.0;
            for w in 0..q {
                acc += r[w];
                cdf[row * q + w] = acc;
            }
        }
        Ok(NoiseModel {
            field: field.clone(),
            channel: Channel::Dense { probs, cdf },
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// `Pr[output = w | chi_alpha(x) = v]`.
    pub fn prob(&self, v: Fq, w: Fq) -> f64 {
        let q = self.field.q() as usize;
        match &self.channel {
            Channel::Mix { eta } => (1.0 - eta) / q as f64 + if v == w { *eta } else { 0.0 },
            Channel::Dense { probs, .. } => probs[v.index() * q + w.index()],
        }
    }

    #[inline]
    pub fn apply(&self, v: Fq, rng: &mut StreamRng) -> Fq {
        match &self.channel {
            Channel::Mix { eta } => {
                if *eta >= 1.0 || rng.gen::<f64>() < *eta {
                    v
                } else {
                    self.field.random(rng)
                }
            }
            Channel::Dense { cdf, .. } => {
                let q = self.field.q() as usize;
                let row = &cdf[v.index() * q..(v.index() + 1) * q];
                let u: f64 = rng.gen();
                let w = row.iter().position(|&c| u < c).unwrap_or_else(|| {
                    // rounding left the last cumulative sum just below 1
                    row.iter().rposition(|&c| c > 0.0).unwrap_or(q - 1)
                });
                Fq(w as u16)
            }
        }
    }

    /// `|E[e(f(x)) conj e(c chi_alpha(x))]|` for a target built on this channel.
    pub fn correlation_with_multiple(&self, c: Fq) -> f64 {
        let f = &self.field;
        let q = f.q() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for v in f.elements() {
            for w in f.elements() {
                let pr = self.prob(v, w);
                if pr != 0.0 {
                    acc += f.character(f.sub(w, f.mul(c, v))) * (pr / q);
                }
            }
        }
        acc.norm()
    }
}

/// An LDME target: `x` uniform, label drawn from the channel row `chi_alpha(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LdmeTarget {
    alpha: FieldVector,
    terms: Vec<(usize, Fq)>,
    noise: NoiseModel,
    correlation: f64,
}

impl LdmeTarget {
    pub fn new(alpha: FieldVector, noise: NoiseModel) -> Result<Self, FuncError> {
        if alpha.is_zero() {
            return Err(FuncError::ZeroTarget);
        }
        let correlation = noise.correlation_with_multiple(Fq::ONE);
        Ok(LdmeTarget {
            terms: alpha.sparse(),
            alpha,
            noise,
            correlation,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.noise.field
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &FieldVector {
        &self.alpha
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Exact `Cor(f, chi_alpha)`.
    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    /// Writes the LDME file format:
    ///
    /// ```text
    /// ldme <p> <ell> <n> <k>
    /// modulus <c0,c1,...>      (optional)
    /// alpha <vector>
    /// <q lines of q probabilities: row v is the law of the label given chi_alpha(x) = v>
    /// ```
    pub fn to_text(&self, k: usize) -> String {
        let f = self.field();
        let mut s = format!(
            "ldme {} {} {} {}\n",
            f.p(),
            f.ell(),
            self.n(),
            k.max(self.alpha.weight())
        );
        let m: Vec<String> = f.modulus().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "modulus {}", m.join(","));
        let _ = writeln!(s, "alpha {}", f.format_vector(self.alpha.as_slice()));
        for v in f.elements() {
            let row: Vec<String> = f.elements().map(|w| format!("{}", self.noise.prob(v, w))).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Parses the LDME file format; returns the target and its declared `k`.
    pub fn parse(text: &str) -> Result<(Self, usize), FuncError> {
        let mut lines = content_lines(text).peekable();
        let (ln, header) = lines.next().ok_or_else(|| ParseError::new(0, "empty ldme file"))?;
        let mut h = header.split_whitespace();
        if h.next() != Some("ldme") {
            return Err(ParseError::new(ln, "expected `ldme` header").into());
        }
        let p: u32 = parse_num(h.next(), ln, "p")?;
        let ell: u32 = parse_num(h.next(), ln, "ell")?;
        let n: usize = parse_num(h.next(), ln, "n")?;
        let k: usize = parse_num(h.next(), ln, "k")?;
        if h.next().is_some() {
            return Err(ParseError::new(ln, "trailing header tokens").into());
        }
        let field = parse_field_lines(p, ell, &mut lines)?;
        if field.q() > DENSE_CHANNEL_MAX_Q {
            return Err(FuncError::ChannelTooLarge);
        }
        let (ln, al) = lines.next().ok_or_else(|| ParseError::new(ln, "missing alpha"))?;
        let rest = al
            .strip_prefix("alpha")
            .ok_or_else(|| ParseError::new(ln, "expected `alpha`"))?;
        let alpha = field
            .parse_vector(rest)
            .map_err(|e| ParseError::new(ln, e.to_string()))?;
        if alpha.len() != n {
            return Err(FuncError::ArityMismatch {
                expected: n,
                got: alpha.len(),
            });
        }
        if alpha.weight() > k {
            return Err(FuncError::TooManyRelevant {
                k,
                got: alpha.weight(),
            });
        }
        let q = field.q() as usize;
        let mut probs = Vec::with_capacity(q * q);
        for _ in 0..q {
            let (ln, row) = lines.next().ok_or_else(|| ParseError::new(ln, "missing channel row"))?;
            let vals: Vec<f64> = row
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| ParseError::new(ln, "bad probability")))
                .collect::<Result<_, _>>()?;
            if vals.len() != q {
                return Err(ParseError::new(ln, format!("expected {q} probabilities")).into());
            }
            probs.extend(vals);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(ParseError::new(ln, "trailing content").into());
        }
        let noise = NoiseModel::from_rows(&field, probs)?;
        Ok((LdmeTarget::new(alpha, noise)?, k))
    }
}

impl ExampleOracle for LdmeTarget {
    fn field(&self) -> &FieldSpec {
        &self.noise.field
    }

    fn arity(&self) -> usize {
        self.alpha.len()
    }

    #[inline]
    fn draw(&self, rng: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
        let f = &self.noise.field;
        f.fill_uniform(rng, x);
        let v = f.dot_sparse(&self.terms, x);
        Ok(self.noise.apply(v, rng))
    }
}

/// Target `chi_alpha` behind the eta-mix channel with `eta = rho`, so the
/// exact correlation is `rho`.
pub fn gen_ldme_target(field: &FieldSpec, alpha: FieldVector, rho: f64) -> Result<LdmeTarget, FuncError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FuncError::InfeasibleCorrelation(rho));
    }
    LdmeTarget::new(alpha, NoiseModel::eta_mix(field, rho)?)
}

/// A uniformly random vector of exactly the given weight.
pub fn random_vector_of_weight(field: &FieldSpec, n: usize, weight: usize, rng: &mut StreamRng) -> FieldVector {
    let mut v = FieldVector::zeros(n);
    for i in sample_indices(rng, n, weight.min(n)) {
        v.0[i] = Fq(rng.gen_range(1..field.q()) as u16);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    #[test]
    fn linear_evaluation() {
        let k = f(3);
        let mut alpha = FieldVector::zeros(4);
        alpha.0[0] = Fq::ONE;
        let chi = JuntaFunction::linear(k.clone(), &alpha);
        let x = k.parse_vector("2,1,0,1").unwrap();
        assert_eq!(chi.eval(x.as_slice()).unwrap(), k.from_int(2));
        assert_eq!(chi.relevant(), &[0]);
        assert!(matches!(chi.eval(&[Fq::ZERO]), Err(FuncError::ArityMismatch { .. })));
    }

    #[test]
    fn from_fn_drops_ignored_coordinates() {
        let k = f(3);
        let k2 = k.clone();
        let g = JuntaFunction::from_fn(k.clone(), 5, &[4, 1, 2], move |v| k2.add(v[0], v[2])).unwrap();
        assert_eq!(g.relevant(), &[2, 4]);
        assert_eq!(relevant_bruteforce(&g), vec![2, 4]);
    }

    #[test]
    fn constructor_rejects_fake_relevance() {
        let k = f(2);
        let err = JuntaFunction::new(k.clone(), 3, vec![1], vec![Fq::ONE, Fq::ONE]).unwrap_err();
        assert_eq!(err, FuncError::NotRelevant(1));
        assert_eq!(
            JuntaFunction::new(k.clone(), 3, vec![2, 1], vec![Fq::ZERO; 4]).unwrap_err(),
            FuncError::BadRelevant
        );
    }

    #[test]
    fn junta_text_round_trip() {
        let k = f(4);
        let mut rng = stream(1, "t", 0);
        let g = gen_random_junta(&k, 9, 2, &mut rng).unwrap();
        let text = g.to_text(3);
        let (back, kk) = JuntaFunction::parse(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(kk, 3);
        assert!(JuntaFunction::parse("junta 2 1 3 1\nrelevant 0\ntable 0 1 1\n").is_err());
        assert!(JuntaFunction::parse("junta 2 1 3 0\nrelevant 0\ntable 0 1\n").is_err());
    }

    #[test]
    fn ldme_text_round_trip() {
        let k = f(3);
        let alpha = k.parse_vector("0,1,2").unwrap();
        let t = gen_ldme_target(&k, alpha, 0.5).unwrap();
        let (back, kk) = LdmeTarget::parse(&t.to_text(2)).unwrap();
        assert_eq!(kk, 2);
        assert_eq!(back.alpha(), t.alpha());
        assert!((back.correlation() - 0.5).abs() < 1e-9);
        for v in k.elements() {
            for w in k.elements() {
                assert!((back.noise().prob(v, w) - t.noise().prob(v, w)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn restriction_of_sum() {
        let k = f(3);
        let k2 = k.clone();
        let g = JuntaFunction::from_fn(k.clone(), 2, &[0, 1], move |v| k2.add(v[0], v[1])).unwrap();
        let tau = Restriction::from_pairs([(0, k.from_int(2))]);
        let r = restricted_oracle(&g, &tau, DEFAULT_CAP_MULTIPLIER);
        assert_eq!(r.arity(), 1);
        let mut rng = stream(3, "r", 0);
        for _ in 0..200 {
            let (x, b) = r.sample(&mut rng).unwrap();
            assert_eq!(b, k.add(k.from_int(2), x[0]));
        }
    }

    #[test]
    fn rejection_budget_is_enforced() {
        struct Fixed(FieldSpec);
        impl ExampleOracle for Fixed {
            fn field(&self) -> &FieldSpec {
                &self.0
            }
            fn arity(&self) -> usize {
                1
            }
            fn draw(&self, _: &mut StreamRng, x: &mut [Fq]) -> Result<Fq, OracleError> {
                x[0] = Fq::ZERO;
                Ok(Fq::ZERO)
            }
        }
        let k = f(2);
        let o = Fixed(k.clone());
        let r = restricted_oracle(&o, &Restriction::from_pairs([(0, Fq::ONE)]), 3);
        let mut rng = stream(0, "x", 0);
        assert_eq!(r.sample(&mut rng), Err(OracleError::RejectionBudgetExhausted(6)));
    }

    #[test]
    fn channels() {
        let k = f(3);
        let c = k.from_int(1);
        let shift = NoiseModel::constant_shift(&k, c).unwrap();
        assert!((shift.correlation_with_multiple(Fq::ONE) - 1.0).abs() < 1e-12);
        let mix = NoiseModel::eta_mix(&k, 0.3).unwrap();
        assert!((mix.correlation_with_multiple(Fq::ONE) - 0.3).abs() < 1e-12);
        assert!(NoiseModel::from_rows(&k, vec![0.5; 9]).is_err());
        assert!(gen_ldme_target(&k, FieldVector::zeros(3), 0.5).is_err());
        assert!(gen_ldme_target(&k, FieldVector::unit(3, 0, Fq::ONE), 0.0).is_err());
    }
}
