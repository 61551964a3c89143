//! Light bulb problem: find the one correlated pair among `N` random
//! `±1` columns of length `d`.
//!
//! Columns are bit-packed (bit set means `-1`), so an inner product is
//! `d - 2 popcount(u xor v)`.  Solvers implement [`PairSearch`]; the exact
//! quadratic scan and a grouped matrix-product backend are provided.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::rng::StreamRng;
use crate::text::{content_lines, parse_num, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LbpError {
    #[error("best score {best} is below the threshold {threshold}")]
    NoCorrelatedPair { best: i64, threshold: f64 },
    #[error("an instance needs at least two columns")]
    TooFewColumns,
    #[error("column labels must be unique")]
    DuplicateLabel,
    #[error("{got} labels for {expected} columns")]
    LabelCount { expected: usize, got: usize },
    #[error("correlation {0} is not in [0, 1]")]
    BadRho(f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Column-major packed `±1` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    d: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// All entries `+1`.
    pub fn new(cols: usize, d: usize) -> Self {
        let words = d.div_ceil(64);
        BitMatrix {
            cols,
            d,
            words,
            data: vec![0; cols * words],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn set_minus(&mut self, col: usize, row: usize, minus: bool) {
        let w = &mut self.data[col * self.words + row / 64];
        let bit = 1u64 << (row % 64);
        if minus {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    /// Entry as `+1` / `-1`.
    #[inline]
    pub fn entry(&self, col: usize, row: usize) -> i8 {
        if self.data[col * self.words + row / 64] >> (row % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn col_words(&self, col: usize) -> &[u64] {
        &self.data[col * self.words..(col + 1) * self.words]
    }

    #[inline]
    pub fn col_words_mut(&mut self, col: usize) -> &mut [u64] {
        &mut self.data[col * self.words..(col + 1) * self.words]
    }

    #[inline]
    pub fn inner(&self, i: usize, j: usize) -> i64 {
        inner_words(self.col_words(i), self.col_words(j), self.d)
    }
}

#[inline]
fn inner_words(a: &[u64], b: &[u64], d: usize) -> i64 {
    let diff: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
    d as i64 - 2 * diff as i64
}

/// An LBP instance with opaque, unique column labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LbpInstance<L> {
    bits: BitMatrix,
    labels: Vec<L>,
    rho: f64,
}

impl<L: Ord + Clone> LbpInstance<L> {
    pub fn new(bits: BitMatrix, labels: Vec<L>, rho: f64) -> Result<Self, LbpError> {
        if labels.len() != bits.cols() {
            return Err(LbpError::LabelCount {
                expected: bits.cols(),
                got: labels.len(),
            });
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(LbpError::BadRho(rho));
        }
        let mut sorted: Vec<&L> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(LbpError::DuplicateLabel);
        }
        Ok(LbpInstance { bits, labels, rho })
    }
}

impl<L> LbpInstance<L> {
    pub fn n(&self) -> usize {
        self.bits.cols()
    }

    pub fn d(&self) -> usize {
        self.bits.d()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn inner(&self, i: usize, j: usize) -> i64 {
        self.bits.inner(i, j)
    }
}

impl<L: std::fmt::Display> LbpInstance<L> {
    /// Writes the LBP file format:
    ///
    /// ```text
    /// lbp <N> <d> <rho>
    /// <d characters from {+,-}> <label>     (N lines)
    /// planted <label> <label>               (optional)
    /// ```
    pub fn to_text(&self, planted: Option<(&L, &L)>) -> String {
        let mut s = format!("lbp {} {} {}\n", self.n(), self.d(), self.rho);
        for c in 0..self.n() {
            for r in 0..self.d() {
                s.push(if self.bits.entry(c, r) == 1 { '+' } else { '-' });
            }
            let _ = writeln!(s, " {}", self.labels[c]);
        }
        if let Some((a, b)) = planted {
            let _ = writeln!(s, "planted {a} {b}");
        }
        s
    }
}

/// A parsed instance plus its optional planted pair.
pub type ParsedLbp<L> = (LbpInstance<L>, Option<(L, L)>);

impl<L: Ord + Clone + FromStr> LbpInstance<L> {
    pub fn parse(text: &str) -> Result<ParsedLbp<L>, LbpError> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| ParseError::new(0, "empty lbp file"))?;
        let mut h = header.split_whitespace();
        if h.next() != Some("lbp") {
            return Err(ParseError::new(ln, "expected `lbp` header").into());
        }
        let n: usize = parse_num(h.next(), ln, "N")?;
        let d: usize = parse_num(h.next(), ln, "d")?;
        let rho: f64 = parse_num(h.next(), ln, "rho")?;
        if h.next().is_some() {
            return Err(ParseError::new(ln, "trailing header tokens").into());
        }
        if n > 1 << 24 || d > 1 << 24 || (n as u64) * (d as u64) > 1 << 32 {
            return Err(ParseError::new(ln, "instance too large").into());
        }
        let mut bits = BitMatrix::new(n, d);
        let mut labels = Vec::with_capacity(n);
        let parse_label = |tok: &str, ln: usize| -> Result<L, LbpError> {
            tok.parse()
                .map_err(|_| ParseError::new(ln, format!("bad label {tok:?}")).into())
        };
        for c in 0..n {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| ParseError::new(ln, format!("expected {n} columns, found {c}")))?;
            let mut toks = line.split_whitespace();
            let signs = toks.next().unwrap_or("");
            let label = toks.next().ok_or_else(|| ParseError::new(ln, "missing label"))?;
            if toks.next().is_some() {
                return Err(ParseError::new(ln, "trailing tokens").into());
            }
            if signs.len() != d {
                return Err(ParseError::new(ln, format!("expected {d} signs")).into());
            }
            for (r, ch) in signs.bytes().enumerate() {
                match ch {
                    b'+' => {}
                    b'-' => bits.set_minus(c, r, true),
                    _ => return Err(ParseError::new(ln, "signs must be + or -").into()),
                }
            }
            labels.push(parse_label(label, ln)?);
        }
        let mut planted = None;
        if let Some((ln, line)) = lines.next() {
            let mut toks = line.split_whitespace();
            if toks.next() != Some("planted") {
                return Err(ParseError::new(ln, "unexpected content after columns").into());
            }
            let a = parse_label(toks.next().unwrap_or(""), ln)?;
            let b = parse_label(toks.next().unwrap_or(""), ln)?;
            if toks.next().is_some() {
                return Err(ParseError::new(ln, "trailing tokens").into());
            }
            if a == b || !labels.contains(&a) || !labels.contains(&b) {
                return Err(ParseError::new(ln, "planted labels must be two distinct column labels").into());
            }
            planted = Some((a, b));
            if let Some((ln, _)) = lines.next() {
                return Err(ParseError::new(ln, "trailing content").into());
            }
        }
        Ok((LbpInstance::new(bits, labels, rho)?, planted))
    }
}

/// Returned pair: labels in increasing order, their column indices and score.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbpResult<L> {
    pub pair: (L, L),
    pub columns: (usize, usize),
    pub score: i64,
}

/// Candidate pair in index space, with tie-break ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoredPair {
    pub i: usize,
    pub j: usize,
    pub score: i64,
    rank_lo: u32,
    rank_hi: u32,
}

impl ScoredPair {
    #[inline]
    fn new(i: usize, j: usize, score: i64, rank: &[u32]) -> Self {
        let (a, b) = (rank[i], rank[j]);
        ScoredPair {
            i,
            j,
            score,
            rank_lo: a.min(b),
            rank_hi: a.max(b),
        }
    }

    /// Higher score wins; ties go to the lexicographically smaller label pair.
    #[inline]
    fn beats(&self, other: &ScoredPair) -> bool {
        self.score > other.score
            || (self.score == other.score && (self.rank_lo, self.rank_hi) < (other.rank_lo, other.rank_hi))
    }
}

#[inline]
fn keep_best(best: &mut Option<ScoredPair>, cand: ScoredPair) {
    match best {
        Some(b) if !cand.beats(b) => {}
        _ => *best = Some(cand),
    }
}

/// A correlated-pair search over a packed matrix.  `rank[i]` is column
/// `i`'s position in label order, used only to break score ties.
pub trait PairSearch {
    fn name(&self) -> String;

    fn best_pair(&self, bits: &BitMatrix, rank: &[u32]) -> Option<ScoredPair>;

    /// Fewest rows the backend needs for `n` columns at correlation `rho`;
    /// exact backends need none beyond the caller's own bound.
    fn min_rows(&self, _n: usize, _rho: f64) -> usize {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Exact scan over all pairs.
    #[default]
    Naive,
    /// Group sums and one integer matrix product, then exact re-scoring;
    /// `None` uses `ceil(N^(1/3))` columns per group.
    Grouped { group_size: Option<usize> },
}

impl FromStr for Backend {
    type Err = String;

    /// `naive`, `grouped` or `grouped:<g>`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "naive" => Ok(Backend::Naive),
            "grouped" => Ok(Backend::Grouped { group_size: None }),
            _ => {
                let g = s
                    .strip_prefix("grouped:")
                    .and_then(|g| g.parse::<usize>().ok())
                    .filter(|&g| g >= 1)
                    .ok_or_else(|| format!("unknown backend {s:?}"))?;
                Ok(Backend::Grouped { group_size: Some(g) })
            }
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Naive => write!(f, "naive"),
            Backend::Grouped { group_size: None } => write!(f, "grouped"),
            Backend::Grouped { group_size: Some(g) } => write!(f, "grouped:{g}"),
        }
    }
}

impl PairSearch for Backend {
    fn name(&self) -> String {
        self.to_string()
    }

    fn best_pair(&self, bits: &BitMatrix, rank: &[u32]) -> Option<ScoredPair> {
        match *self {
            Backend::Naive => naive_best(bits, rank),
            Backend::Grouped { group_size } => {
                let g = group_size.unwrap_or_else(|| default_group_size(bits.cols()));
                grouped_best(bits, rank, g)
            }
        }
    }
}

/// `ceil(N^(1/3))`.
pub fn default_group_size(n: usize) -> usize {
    let mut g = (n as f64).cbrt().round() as usize;
    while g.pow(3) < n {
        g += 1;
    }
    while g > 1 && (g - 1).pow(3) >= n {
        g -= 1;
    }
    g.max(1)
}

/// Group size that keeps a pair of correlation `rho` visible after
/// grouping: a group-pair score has noise of order `g sqrt(d)` against a
/// signal of `rho d`, so `g = floor(rho sqrt(d) / 4)` leaves a margin of four
/// noise units.  Never larger than [`default_group_size`].
pub fn signal_group_size(n: usize, d: usize, rho: f64) -> usize {
    let g = (rho * (d as f64).sqrt() / 4.0).floor() as usize;
    g.clamp(1, default_group_size(n))
}

fn naive_best(bits: &BitMatrix, rank: &[u32]) -> Option<ScoredPair> {
    let n = bits.cols();
    let d = bits.d();
    let mut best: Option<ScoredPair> = None;
    for i in 0..n {
        let a = bits.col_words(i);
        for j in i + 1..n {
            let s = inner_words(a, bits.col_words(j), d);
            if let Some(b) = &best {
                if s < b.score {
                    continue;
                }
            }
            keep_best(&mut best, ScoredPair::new(i, j, s, rank));
        }
    }
    best
}

/// Signed column sums per group, row-major `groups x d`.
enum GroupSums {
    Narrow(Vec<i16>),
    Wide(Vec<i32>),
}

fn group_sums(bits: &BitMatrix, g: usize) -> GroupSums {
    let n = bits.cols();
    let d = bits.d();
    let groups = n.div_ceil(g);
    let mut sums = vec![0i32; groups * d];
    for c in 0..n {
        let row = &mut sums[(c / g) * d..(c / g + 1) * d];
        let words = bits.col_words(c);
        for (r, s) in row.iter_mut().enumerate() {
            *s += 1 - 2 * ((words[r / 64] >> (r % 64)) & 1) as i32;
        }
    }
    if g <= 181 {
        GroupSums::Narrow(sums.into_iter().map(|v| v as i16).collect())
    } else {
        GroupSums::Wide(sums)
    }
}

#[inline]
fn dot_narrow(a: &[i16], b: &[i16]) -> i64 {
    // |a_r b_r| <= 181^2, so 4096-term partial sums fit in i32
    let mut total = 0i64;
    for (ca, cb) in a.chunks(4096).zip(b.chunks(4096)) {
        let s: i32 = ca.iter().zip(cb).map(|(&x, &y)| x as i32 * y as i32).sum();
        total += s as i64;
    }
    total
}

#[inline]
fn dot_wide(a: &[i32], b: &[i32]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

fn grouped_best(bits: &BitMatrix, rank: &[u32], g: usize) -> Option<ScoredPair> {
    let n = bits.cols();
    let d = bits.d();
    if n < 2 {
        return None;
    }
    let g = g.clamp(1, n);
    let groups = n.div_ceil(g);
    let size = |gi: usize| (n - gi * g).min(g);
    let sums = group_sums(bits, g);
    let dot = |a: usize, b: usize| match &sums {
        GroupSums::Narrow(s) => dot_narrow(&s[a * d..(a + 1) * d], &s[b * d..(b + 1) * d]),
        GroupSums::Wide(s) => dot_wide(&s[a * d..(a + 1) * d], &s[b * d..(b + 1) * d]),
    };
    // Score of a group pair: the sum of inner products over its column pairs.
    let mut cands: Vec<(i64, usize, usize)> = Vec::with_capacity(groups * (groups + 1) / 2);
    for a in 0..groups {
        if size(a) >= 2 {
            let self_dot = dot(a, a);
            cands.push(((self_dot - (size(a) * d) as i64) / 2, a, a));
        }
        for b in a + 1..groups {
            cands.push((dot(a, b), a, b));
        }
    }
    let keep = (2 * n).div_ceil(g).max(1);
    cands.sort_unstable_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let cutoff = cands[keep.min(cands.len()) - 1].0;
    let mut best: Option<ScoredPair> = None;
    for &(score, a, b) in cands.iter().take_while(|c| c.0 >= cutoff) {
        let _ = score;
        let (ra, rb) = (a * g..a * g + size(a), b * g..b * g + size(b));
        for i in ra.clone() {
            let wi = bits.col_words(i);
            let start = if a == b { i + 1 } else { rb.start };
            for j in start..rb.end {
                let s = inner_words(wi, bits.col_words(j), d);
                keep_best(&mut best, ScoredPair::new(i, j, s, rank));
            }
        }
    }
    best
}

fn label_ranks<L: Ord>(labels: &[L]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let mut rank = vec![0u32; labels.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as u32;
    }
    rank
}

/// Runs `backend`; fails when the best score is below `threshold_rho * d / 2`.
pub fn solve<L: Ord + Clone>(
    instance: &LbpInstance<L>,
    threshold_rho: f64,
    backend: &dyn PairSearch,
) -> Result<LbpResult<L>, LbpError> {
    if instance.n() < 2 {
        return Err(LbpError::TooFewColumns);
    }
    let rank = label_ranks(&instance.labels);
    let best = backend
        .best_pair(&instance.bits, &rank)
        .ok_or(LbpError::TooFewColumns)?;
    let threshold = threshold_rho * instance.d() as f64 / 2.0;
    if (best.score as f64) < threshold {
        return Err(LbpError::NoCorrelatedPair {
            best: best.score,
            threshold,
        });
    }
    let (i, j) = if rank[best.i] < rank[best.j] {
        (best.i, best.j)
    } else {
        (best.j, best.i)
    };
    Ok(LbpResult {
        pair: (instance.labels[i].clone(), instance.labels[j].clone()),
        columns: (i, j),
        score: best.score,
    })
}

pub fn solve_naive<L: Ord + Clone>(instance: &LbpInstance<L>, threshold_rho: f64) -> Result<LbpResult<L>, LbpError> {
    solve(instance, threshold_rho, &Backend::Naive)
}

pub fn solve_grouped<L: Ord + Clone>(
    instance: &LbpInstance<L>,
    threshold_rho: f64,
    group_size: Option<usize>,
) -> Result<LbpResult<L>, LbpError> {
    solve(instance, threshold_rho, &Backend::Grouped { group_size })
}

fn random_column(words: &mut [u64], d: usize, rng: &mut StreamRng) {
    for w in words.iter_mut() {
        *w = rng.next_u64();
    }
    if d % 64 != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << (d % 64)) - 1;
        }
    }
}

/// `N` uniform columns, except column `j*` copies column `i*` with each
/// entry flipped independently with probability `(1 - rho)/2`.  Labels are
/// `0..N`; returns the planted pair with the smaller label first.
pub fn gen_planted(n: usize, d: usize, rho: f64, rng: &mut StreamRng) -> Result<(LbpInstance<usize>, (usize, usize)), LbpError> {
    if n < 2 {
        return Err(LbpError::TooFewColumns);
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(LbpError::BadRho(rho));
    }
    let mut bits = BitMatrix::new(n, d);
    for c in 0..n {
        random_column(bits.col_words_mut(c), d, rng);
    }
    let pick = sample_indices(rng, n, 2);
    let (a, b) = (pick.index(0).min(pick.index(1)), pick.index(0).max(pick.index(1)));
    let flip = (1.0 - rho) / 2.0;
    let src: Vec<u64> = bits.col_words(a).to_vec();
    let dst = bits.col_words_mut(b);
    dst.copy_from_slice(&src);
    if flip > 0.0 {
        for r in 0..d {
            if rng.gen::<f64>() < flip {
                dst[r / 64] ^= 1u64 << (r % 64);
            }
        }
    }
    let labels: Vec<usize> = (0..n).collect();
    Ok((LbpInstance::new(bits, labels, rho)?, (a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn hand_instance() -> LbpInstance<usize> {
        // columns: c0 = ++++, c1 = ++-+, c2 = --+-
        let mut bits = BitMatrix::new(3, 4);
        bits.set_minus(1, 2, true);
        for r in [0, 1, 3] {
            bits.set_minus(2, r, true);
        }
        LbpInstance::new(bits, vec![0, 1, 2], 0.5).unwrap()
    }

    #[test]
    fn hand_computed_products() {
        let inst = hand_instance();
        assert_eq!(inst.inner(0, 1), 2);
        assert_eq!(inst.inner(0, 2), -2);
        assert_eq!(inst.inner(1, 2), -4);
        let r = solve_naive(&inst, 0.5).unwrap();
        assert_eq!((r.pair, r.score), ((0, 1), 2));
        assert!(matches!(solve_naive(&inst, 1.5), Err(LbpError::NoCorrelatedPair { .. })));
    }

    #[test]
    fn identical_columns_score_d() {
        let mut rng = stream(9, "id", 0);
        let (inst, planted) = gen_planted(40, 300, 1.0, &mut rng).unwrap();
        let r = solve_naive(&inst, 0.5).unwrap();
        assert_eq!(r.pair, planted);
        assert_eq!(r.score, 300);
    }

    #[test]
    fn ties_break_on_labels() {
        let bits = BitMatrix::new(4, 8);
        let inst = LbpInstance::new(bits, vec!["d", "b", "c", "a"], 0.0).unwrap();
        let r = solve_naive(&inst, 0.0).unwrap();
        assert_eq!(r.pair, ("a", "b"));
        let g = solve_grouped(&inst, 0.0, Some(2)).unwrap();
        assert_eq!(g.pair, ("a", "b"));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let bits = BitMatrix::new(2, 8);
        assert_eq!(LbpInstance::new(bits, vec![1, 1], 0.1), Err(LbpError::DuplicateLabel));
    }

    #[test]
    fn default_group_sizes() {
        assert_eq!(default_group_size(1), 1);
        assert_eq!(default_group_size(8), 2);
        assert_eq!(default_group_size(9), 3);
        assert_eq!(default_group_size(500), 8);
        assert_eq!(default_group_size(5000), 18);
    }

    #[test]
    fn backend_tokens() {
        for b in ["naive", "grouped", "grouped:7"] {
            assert_eq!(b.parse::<Backend>().unwrap().to_string(), b);
        }
        assert!("grouped:0".parse::<Backend>().is_err());
        assert!("fast".parse::<Backend>().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut rng = stream(4, "txt", 0);
        let (inst, planted) = gen_planted(5, 70, 0.4, &mut rng).unwrap();
        let text = inst.to_text(Some((&planted.0, &planted.1)));
        let (back, p) = LbpInstance::<usize>::parse(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(p, Some(planted));
        assert!(LbpInstance::<usize>::parse("lbp 2 3 0.5\n+++ 0\n++ 1\n").is_err());
        assert!(LbpInstance::<usize>::parse("lbp 2 3 0.5\n+++ 0\n+x+ 1\n").is_err());
        assert!(LbpInstance::<usize>::parse("lbp 2 3 0.5\n+++ 0\n+++ 0\n").is_err());
    }
}
