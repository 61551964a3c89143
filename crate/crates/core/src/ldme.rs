//! Learning with discrete memoryless errors.
//!
//! [`solve_ldme`] first tries every weight-1 candidate with [`check_cor`],
//! then for every consecutive partition `(J, J-bar)`, pair of values
//! `(a1, a2)` and pair of leading coefficients `(s1, s2)` builds a light
//! bulb instance whose columns are the linear forms of weight at most
//! `ceil(k/2)` on each side, solves it, and verifies `gamma1 + gamma2`.
//!
//! Column order (and so label order for tie-breaking) is lexicographic by
//! coefficient vector, `J` side before `J-bar` side.

use std::collections::HashMap;

use thiserror::Error;

use crate::budget;
use crate::funcs::{ExampleOracle, OracleError};
use crate::gf::{consecutive_partitions, FieldSpec, FieldVector, Fq, Partition, Side};
use crate::lbp::{self, BitMatrix, LbpError, LbpInstance, PairSearch};
use crate::rng::{mix3, StreamRng};
use rand::RngCore;

/// Default cap on columns per light bulb instance.
pub const COLUMN_BUDGET: usize = 1 << 22;

/// Cap on stored instance cells (`columns x rows x stored batches`).
pub const CELL_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LdmeError {
    #[error("no candidate passed the correlation check ({} rounds, {} examples)", .stats.rounds, .stats.examples)]
    NotFound { stats: LdmeStats },
    #[error("{columns} columns exceed the budget of {budget}")]
    ColumnBudgetExceeded { columns: u64, budget: u64 },
    #[error("{0} instance cells exceed the memory budget")]
    CellBudgetExceeded(u64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lbp(#[from] LbpError),
}

/// One light bulb round's configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitConfig {
    pub partition: Partition,
    pub a1: Fq,
    pub a2: Fq,
    pub s1: Fq,
    pub s2: Fq,
}

/// Column label: a linear form supported on one side of the partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnIndex {
    pub side: Side,
    pub coeffs: FieldVector,
}

/// Examples stored coordinate-major.
#[derive(Clone, Debug)]
pub struct ExampleBatch {
    n: usize,
    len: usize,
    coords: Vec<Fq>,
    labels: Vec<Fq>,
}

impl ExampleBatch {
    pub fn draw(oracle: &dyn ExampleOracle, len: usize, rng: &mut StreamRng) -> Result<Self, OracleError> {
        let n = oracle.arity();
        let mut coords = vec![Fq::ZERO; n * len];
        let mut labels = Vec::with_capacity(len);
        let mut x = vec![Fq::ZERO; n];
        for r in 0..len {
            labels.push(oracle.draw(rng, &mut x)?);
            for (i, &v) in x.iter().enumerate() {
                coords[i * len + r] = v;
            }
        }
        Ok(ExampleBatch {
            n,
            len,
            coords,
            labels,
        })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn labels(&self) -> &[Fq] {
        &self.labels
    }

    pub fn coord(&self, i: usize) -> &[Fq] {
        &self.coords[i * self.len..(i + 1) * self.len]
    }

    /// `out[r] = sum_(i, c) c x_i` over rows `range`.
    fn linear_values(&self, field: &FieldSpec, terms: &[(usize, Fq)], range: std::ops::Range<usize>, out: &mut [Fq]) {
        out.fill(Fq::ZERO);
        let q = field.q() as usize;
        let mut row = vec![Fq::ZERO; q];
        for &(i, c) in terms {
            for v in field.elements() {
                row[v.index()] = field.mul(c, v);
            }
            let col = &self.coord(i)[range.clone()];
            for (o, &x) in out.iter_mut().zip(col) {
                *o = field.add(*o, row[x.index()]);
            }
        }
    }
}

/// Passing count for one value `a`: `(1/q + rho/(2 q^2)) m`.
fn cor_threshold(q: u32, rho: f64, m: u64) -> f64 {
    let q = q as f64;
    (1.0 / q + rho / (2.0 * q * q)) * m as f64
}

/// Counting form of the correlation check on a batch of `q m` examples:
/// block `a` (examples `a m .. (a+1) m`) votes for value `a`.
fn check_cor_on(field: &FieldSpec, batch: &ExampleBatch, m: u64, terms: &[(usize, Fq)], rho: f64) -> bool {
    let m = m as usize;
    let need = cor_threshold(field.q(), rho, m as u64);
    let mut chi = vec![Fq::ZERO; m];
    for a in field.elements() {
        let range = a.index() * m..(a.index() + 1) * m;
        batch.linear_values(field, terms, range.clone(), &mut chi);
        let labels = &batch.labels[range];
        let hits = labels
            .iter()
            .zip(&chi)
            .filter(|(&b, &c)| field.sub(b, c) == a)
            .count();
        if hits as f64 >= need {
            return true;
        }
    }
    false
}

/// Correlation check with a sample multiplier: draws
/// `m = ceil(mult (2 q^4 / rho^2) ln(q/delta))` fresh examples per value
/// `a` and passes iff some `a` is hit by `label - chi_gamma(x)` at least
/// `(1/q + rho/(2q^2)) m` times.
pub fn check_cor_scaled(
    oracle: &dyn ExampleOracle,
    rho: f64,
    gamma: &FieldVector,
    delta: f64,
    mult: f64,
    rng: &mut StreamRng,
) -> Result<bool, LdmeError> {
    check_params(rho, delta)?;
    let field = oracle.field();
    let m = budget::check_cor_samples(field.q(), rho, delta, mult);
    let batch = ExampleBatch::draw(oracle, (m * field.q() as u64) as usize, rng)?;
    Ok(check_cor_on(field, &batch, m, &gamma.sparse(), rho))
}

pub fn check_cor(
    oracle: &dyn ExampleOracle,
    rho: f64,
    gamma: &FieldVector,
    delta: f64,
    rng: &mut StreamRng,
) -> Result<bool, LdmeError> {
    check_cor_scaled(oracle, rho, gamma, delta, 1.0, rng)
}

fn check_params(rho: f64, delta: f64) -> Result<(), LdmeError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(LdmeError::BadParameter(format!("rho = {rho}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LdmeError::BadParameter(format!("delta = {delta}")));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of columns on a side with `m` coordinates.
pub fn column_count(q: u32, m: usize, max_weight: usize) -> u128 {
    (1..=max_weight.min(m))
        .map(|w| binomial(m as u64, w as u64) * ((q - 1) as u128).pow(w as u32 - 1))
        .sum()
}

/// Every vector supported on `side` with weight in `1..=max_weight` and
/// first nonzero entry `init`, in lexicographic order.
pub fn enumerate_columns(
    field: &FieldSpec,
    partition: &Partition,
    side: Side,
    max_weight: usize,
    init: Fq,
    budget: usize,
) -> Result<Vec<FieldVector>, LdmeError> {
    let coords = partition.coords(side);
    let count = column_count(field.q(), coords.len(), max_weight);
    if count > budget as u128 {
        return Err(LdmeError::ColumnBudgetExceeded {
            columns: count.min(u64::MAX as u128) as u64,
            budget: budget as u64,
        });
    }
    let n = partition.n();
    let q = field.q() as usize;
    let mut out = Vec::with_capacity(count as usize);
    for w in 1..=max_weight.min(coords.len()) {
        let mut pick: Vec<usize> = (0..w).collect();
        loop {
            let tails = (q - 1).pow(w as u32 - 1);
            for t in 0..tails {
                let mut v = FieldVector::zeros(n);
                v.0[coords[pick[0]]] = init;
                let mut rest = t;
                for &slot in pick[1..].iter().rev() {
                    v.0[coords[slot]] = Fq((rest % (q - 1) + 1) as u16);
                    rest /= q - 1;
                }
                out.push(v);
            }
            // next combination
            let mut i = w;
            while i > 0 && pick[i - 1] == coords.len() - w + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            pick[i - 1] += 1;
            for j in i..w {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `p_h = q / (2(q-1))`: probability a non-matching entry becomes `-1`.
pub fn flip_probability(q: u32) -> f64 {
    q as f64 / (2.0 * (q as f64 - 1.0))
}

fn coin_threshold(q: u32) -> Option<u64> {
    let ph = flip_probability(q);
    (ph < 1.0).then(|| (ph * 2f64.powi(64)) as u64)
}

/// The two sides' columns for one `(partition, s1, s2)`, in label order.
struct Columns {
    vectors: Vec<FieldVector>,
    sides: Vec<Side>,
    terms: Vec<Vec<(usize, Fq)>>,
}

impl Columns {
    fn new(j: &[FieldVector], jbar: &[FieldVector]) -> Self {
        let vectors: Vec<FieldVector> = j.iter().chain(jbar).cloned().collect();
        let sides = std::iter::repeat(Side::J)
            .take(j.len())
            .chain(std::iter::repeat(Side::Complement).take(jbar.len()))
            .collect();
        let terms = vectors.iter().map(|v| v.sparse()).collect();
        Columns {
            vectors,
            sides,
            terms,
        }
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }
}

/// Pre-binarization values, column-major: `b - chi_alpha(x)` on the `J`
/// side (before subtracting `a1`), `chi_beta(x)` on the `J-bar` side.
struct RawValues {
    d: usize,
    values: Vec<Fq>,
}

impl RawValues {
    fn build(field: &FieldSpec, cols: &Columns, batch: &ExampleBatch, rows: std::ops::Range<usize>) -> Self {
        let d = rows.len();
        let mut values = vec![Fq::ZERO; cols.len() * d];
        let labels = &batch.labels()[rows.clone()];
        for c in 0..cols.len() {
            let out = &mut values[c * d..(c + 1) * d];
            batch.linear_values(field, &cols.terms[c], rows.clone(), out);
            if cols.sides[c] == Side::J {
                for (o, &b) in out.iter_mut().zip(labels) {
                    *o = field.sub(b, *o);
                }
            }
        }
        RawValues { d, values }
    }

    /// Entry `+1` iff it equals `a2` after the `a1` shift; otherwise `-1`
    /// when the `(coin_key, row, column)` coin falls below `p_h`.
    fn binarize(&self, field: &FieldSpec, cols: &Columns, a1: Fq, a2: Fq, coin_key: u64) -> BitMatrix {
        let mut bits = self.mismatch(field, cols, a1, a2);
        if let Some(th) = coin_threshold(field.q()) {
            for c in 0..cols.len() {
                for (wi, w) in bits.col_words_mut(c).iter_mut().enumerate() {
                    let mut m = *w;
                    while m != 0 {
                        let b = m.trailing_zeros() as usize;
                        let row = wi * 64 + b;
                        if mix3(coin_key, row as u64, c as u64) >= th {
                            *w &= !(1u64 << b);
                        }
                        m &= m - 1;
                    }
                }
            }
        }
        bits
    }

    /// Same as [`RawValues::binarize`] with every coin precomputed in `coins`.
    fn binarize_masked(&self, field: &FieldSpec, cols: &Columns, a1: Fq, a2: Fq, coins: Option<&BitMatrix>) -> BitMatrix {
        let mut bits = self.mismatch(field, cols, a1, a2);
        if let Some(coins) = coins {
            for c in 0..cols.len() {
                for (w, &m) in bits.col_words_mut(c).iter_mut().zip(coins.col_words(c)) {
                    *w &= m;
                }
            }
        }
        bits
    }

    /// Bit set iff the entry misses its target.
    fn mismatch(&self, field: &FieldSpec, cols: &Columns, a1: Fq, a2: Fq) -> BitMatrix {
        let d = self.d;
        let mut bits = BitMatrix::new(cols.len(), d);
        let target_j = field.add(a1, a2);
        for c in 0..cols.len() {
            let target = if cols.sides[c] == Side::J { target_j } else { a2 };
            let vals = &self.values[c * d..(c + 1) * d];
            for (w, chunk) in bits.col_words_mut(c).iter_mut().zip(vals.chunks(64)) {
                let mut word = 0u64;
                for (b, &v) in chunk.iter().enumerate() {
                    word |= ((v != target) as u64) << b;
                }
                *w = word;
            }
        }
        bits
    }
}

/// Bit set where the `(coin_key, row, column)` coin comes up heads; `None`
/// when every coin does (`q = 2`).
fn coin_mask(q: u32, cols: usize, d: usize, coin_key: u64) -> Option<BitMatrix> {
    let th = coin_threshold(q)?;
    let mut bits = BitMatrix::new(cols, d);
    for c in 0..cols {
        for (wi, w) in bits.col_words_mut(c).iter_mut().enumerate() {
            let rows = (d - wi * 64).min(64);
            let mut word = 0u64;
            for b in 0..rows {
                let row = wi * 64 + b;
                word |= ((mix3(coin_key, row as u64, c as u64) < th) as u64) << b;
            }
            *w = word;
        }
    }
    Some(bits)
}

/// Builds one light bulb instance from `d` fresh examples.
pub fn build_lbp_instance(
    oracle: &dyn ExampleOracle,
    k: usize,
    cfg: &SplitConfig,
    d: usize,
    rng: &mut StreamRng,
) -> Result<LbpInstance<ColumnIndex>, LdmeError> {
    let field = oracle.field();
    if cfg.s1.is_zero() || cfg.s2.is_zero() {
        return Err(LdmeError::BadParameter("s1 and s2 must be nonzero".into()));
    }
    let half = k.div_ceil(2);
    let j = enumerate_columns(field, &cfg.partition, Side::J, half, cfg.s1, COLUMN_BUDGET)?;
    let jbar = enumerate_columns(field, &cfg.partition, Side::Complement, half, cfg.s2, COLUMN_BUDGET)?;
    let cols = Columns::new(&j, &jbar);
    check_cells(cols.len(), d, 1)?;
    let batch = ExampleBatch::draw(oracle, d, rng)?;
    let coin_key = rng.next_u64();
    let raw = RawValues::build(field, &cols, &batch, 0..d);
    let bits = raw.binarize(field, &cols, cfg.a1, cfg.a2, coin_key);
    let labels = cols
        .vectors
        .iter()
        .zip(&cols.sides)
        .map(|(v, &side)| ColumnIndex {
            side,
            coeffs: v.clone(),
        })
        .collect();
    Ok(LbpInstance::new(bits, labels, 0.0)?)
}

fn check_cells(cols: usize, d: usize, batches: usize) -> Result<(), LdmeError> {
    let cells = cols as u64 * d as u64 * batches as u64;
    if cells > CELL_BUDGET {
        return Err(LdmeError::CellBudgetExceeded(cells));
    }
    Ok(())
}

/// How examples are shared between the checks and rounds of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleReuse {
    /// Every check and every round draws its own examples.
    #[default]
    Fresh,
    /// One batch serves all weight-1 checks, one batch all later checks,
    /// and repeat `r` of every configuration reads row batch `r`.  Each
    /// individual check or round still sees examples with the right law.
    Pooled,
}

impl std::str::FromStr for SampleReuse {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fresh" => Ok(SampleReuse::Fresh),
            "pooled" => Ok(SampleReuse::Pooled),
            _ => Err(format!("unknown sample reuse mode {s:?}")),
        }
    }
}

impl std::fmt::Display for SampleReuse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleReuse::Fresh => "fresh",
            SampleReuse::Pooled => "pooled",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdmeConfig {
    pub backend: lbp::Backend,
    /// Repeats per configuration; default `ceil(log2(2/delta))`.
    pub repeats: Option<u64>,
    /// Multiplier on the correlation-check sample size.
    pub cor_multiplier: f64,
    /// Multiplier on the rows per instance.
    pub row_multiplier: f64,
    pub reuse: SampleReuse,
    pub column_budget: usize,
}

impl Default for LdmeConfig {
    fn default() -> Self {
        LdmeConfig {
            backend: lbp::Backend::Naive,
            repeats: None,
            cor_multiplier: 1.0,
            row_multiplier: 1.0,
            reuse: SampleReuse::Fresh,
            column_budget: COLUMN_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LdmeStats {
    /// 1 if found by the weight-1 scan, 2 if by a light bulb round, 0 if not found.
    pub phase: u8,
    pub rounds: u64,
    pub examples: u64,
    pub rows_per_instance: u64,
    pub lbp_misses: u64,
    pub cor_checks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdmeOutcome {
    pub gamma: FieldVector,
    pub stats: LdmeStats,
}

/// Source of check batches: fresh per call or one shared pool.
struct CheckSource<'a> {
    oracle: &'a dyn ExampleOracle,
    rho: f64,
    m: u64,
    pool: Option<ExampleBatch>,
    cache: HashMap<FieldVector, bool>,
}

impl<'a> CheckSource<'a> {
    fn new(
        oracle: &'a dyn ExampleOracle,
        rho: f64,
        delta: f64,
        mult: f64,
        reuse: SampleReuse,
        stats: &mut LdmeStats,
        rng: &mut StreamRng,
    ) -> Result<Self, LdmeError> {
        let q = oracle.field().q();
        let m = budget::check_cor_samples(q, rho, delta, mult);
        let pool = match reuse {
            SampleReuse::Fresh => None,
            SampleReuse::Pooled => {
                stats.examples += m * q as u64;
                Some(ExampleBatch::draw(oracle, (m * q as u64) as usize, rng)?)
            }
        };
        Ok(CheckSource {
            oracle,
            rho,
            m,
            pool,
            cache: HashMap::new(),
        })
    }

    fn check(&mut self, gamma: &FieldVector, stats: &mut LdmeStats, rng: &mut StreamRng) -> Result<bool, LdmeError> {
        let field = self.oracle.field();
        stats.cor_checks += 1;
        match &self.pool {
            Some(pool) => {
                if let Some(&v) = self.cache.get(gamma) {
                    return Ok(v);
                }
                let v = check_cor_on(field, pool, self.m, &gamma.sparse(), self.rho);
                self.cache.insert(gamma.clone(), v);
                Ok(v)
            }
            None => {
                let q = field.q() as u64;
                stats.examples += self.m * q;
                let batch = ExampleBatch::draw(self.oracle, (self.m * q) as usize, rng)?;
                Ok(check_cor_on(field, &batch, self.m, &gamma.sparse(), self.rho))
            }
        }
    }
}

/// Finds a nonzero multiple of the hidden `alpha` (weight at most `k`) from
/// examples whose labels correlate with `chi_alpha` at least `rho`.
pub fn solve_ldme(
    oracle: &dyn ExampleOracle,
    k: usize,
    rho: f64,
    delta: f64,
    cfg: &LdmeConfig,
    rng: &mut StreamRng,
) -> Result<LdmeOutcome, LdmeError> {
    check_params(rho, delta)?;
    if k == 0 {
        return Err(LdmeError::BadParameter("k must be at least 1".into()));
    }
    let field = oracle.field().clone();
    let q = field.q();
    let n = oracle.arity();
    let mut stats = LdmeStats::default();
    let nf = n.max(1) as f64;
    let qf = q as f64;

    // Weight-1 scan.
    let delta1 = delta / (4.0 * nf * (qf - 1.0));
    let mut scan = CheckSource::new(oracle, rho, delta1, cfg.cor_multiplier, cfg.reuse, &mut stats, rng)?;
    for i in 0..n {
        for c in field.nonzero() {
            let gamma = FieldVector::unit(n, i, c);
            if scan.check(&gamma, &mut stats, rng)? {
                stats.phase = 1;
                return Ok(LdmeOutcome { gamma, stats });
            }
        }
    }
    drop(scan);
    // A weight-1 secret is covered by the scan.
    if n < 2 || k == 1 {
        return Err(LdmeError::NotFound { stats });
    }

    let repeats = cfg.repeats.unwrap_or_else(|| budget::ldme_repeats(delta)).max(1) as usize;
    let lbp_rho = rho / (2.0 * qf.powi(3));
    let half = k.div_ceil(2);
    let partitions = consecutive_partitions(n);
    // Column counts are the same for every partition and leading value.
    let j_count = column_count(q, n.div_ceil(2), half);
    let jbar_count = column_count(q, n / 2, half);
    let total_cols = j_count + jbar_count;
    if total_cols > cfg.column_budget as u128 {
        return Err(LdmeError::ColumnBudgetExceeded {
            columns: total_cols.min(u64::MAX as u128) as u64,
            budget: cfg.column_budget as u64,
        });
    }
    let d = (budget::ldme_rows(q, rho, cfg.row_multiplier) as usize)
        .max(cfg.backend.min_rows(total_cols as usize, lbp_rho));
    stats.rows_per_instance = d as u64;
    let stored = if cfg.reuse == SampleReuse::Pooled { repeats } else { 1 };
    check_cells(total_cols as usize, d, stored)?;

    let delta2 = delta / (4.0 * repeats as f64 * nf * qf * qf * (qf - 1.0) * (qf - 1.0));
    let mut checks = CheckSource::new(oracle, rho, delta2, cfg.cor_multiplier, cfg.reuse, &mut stats, rng)?;
    let pools: Vec<ExampleBatch> = if cfg.reuse == SampleReuse::Pooled {
        stats.examples += (repeats * d) as u64;
        (0..repeats)
            .map(|_| ExampleBatch::draw(oracle, d, rng))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let run_key = rng.next_u64();

    for (pi, part) in partitions.iter().enumerate() {
        let sides: Vec<(Vec<FieldVector>, Vec<FieldVector>)> = field
            .nonzero()
            .map(|s| {
                Ok((
                    enumerate_columns(&field, part, Side::J, half, s, cfg.column_budget)?,
                    enumerate_columns(&field, part, Side::Complement, half, s, cfg.column_budget)?,
                ))
            })
            .collect::<Result<_, LdmeError>>()?;
        for s1 in field.nonzero() {
            for s2 in field.nonzero() {
                let cols = Columns::new(&sides[s1.index() - 1].0, &sides[s2.index() - 1].1);
                if cols.len() < 2 {
                    continue;
                }
                let cfg_key = mix3(run_key, pi as u64, (s1.index() * q as usize + s2.index()) as u64);
                let pooled_raw: Vec<RawValues> = pools
                    .iter()
                    .map(|b| RawValues::build(&field, &cols, b, 0..d))
                    .collect();
                let pooled_coins: Vec<Option<BitMatrix>> = (0..pools.len())
                    .map(|rep| coin_mask(q, cols.len(), d, mix3(cfg_key, rep as u64, u64::MAX)))
                    .collect();
                for a1 in field.elements() {
                    for a2 in field.elements() {
                        for rep in 0..repeats {
                            stats.rounds += 1;
                            let bits = if cfg.reuse == SampleReuse::Pooled {
                                pooled_raw[rep].binarize_masked(&field, &cols, a1, a2, pooled_coins[rep].as_ref())
                            } else {
                                stats.examples += d as u64;
                                let batch = ExampleBatch::draw(oracle, d, rng)?;
                                let coin_key = rng.next_u64();
                                RawValues::build(&field, &cols, &batch, 0..d).binarize(&field, &cols, a1, a2, coin_key)
                            };
                            let labels: Vec<u32> = (0..cols.len() as u32).collect();
                            let inst = LbpInstance::new(bits, labels, lbp_rho)?;
                            let found = match lbp::solve(&inst, lbp_rho, &cfg.backend) {
                                Ok(r) => r,
                                Err(LbpError::NoCorrelatedPair { .. }) => {
                                    stats.lbp_misses += 1;
                                    continue;
                                }
                                Err(e) => return Err(e.into()),
                            };
                            let (i, j) = found.columns;
                            let gamma = field.add_vectors(&cols.vectors[i], &cols.vectors[j]).expect("same length");
                            if gamma.is_zero() {
                                continue;
                            }
                            if checks.check(&gamma, &mut stats, rng)? {
                                stats.phase = 2;
                                return Ok(LdmeOutcome { gamma, stats });
                            }
                        }
                    }
                }
            }
        }
    }
    Err(LdmeError::NotFound { stats })
}

/// `Pr[product = 1]` after binarizing a pair of entries that each equal
/// their target with probability `1/q` and both do with probability
/// `1/q^2 + mu`; computed from the four-cell table.
pub fn binarized_agreement(q: u32, mu: f64) -> f64 {
    let qf = q as f64;
    let ph = flip_probability(q);
    let both = 1.0 / (qf * qf) + mu;
    let one = 1.0 / qf - both;
    let none = 1.0 - both - 2.0 * one;
    let keep = 1.0 - ph;
    // +1 stays +1; a miss is +1 w.p. keep and -1 w.p. ph
    both + 2.0 * one * keep + none * (keep * keep + ph * ph)
}

/// `1/2 + 2 p_h^2 mu`.
pub fn binarized_agreement_bound(q: u32, mu: f64) -> f64 {
    let ph = flip_probability(q);
    0.5 + 2.0 * ph * ph * mu
}
