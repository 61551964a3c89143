//! The junta learner.
//!
//! [`learn_junta`] alternates a checking phase (is every restriction of `f`
//! to the known relevant set `R` constant?) with a detection phase
//! ([`add_rc`]) that projects `O(c f|tau)` onto a random subspace, hands the
//! result to the LDME solver, and admits a candidate's support into `R` only
//! after [`check_rc`] confirms it.
//!
//! All sub-oracles of one detection phase live on the coordinates outside
//! `R`, renumbered in increasing order; candidates are translated back to
//! the caller's indexing exactly once, when they are inserted.

use std::collections::BTreeSet;

use rand::{RngCore, SeedableRng};
use thiserror::Error;

use crate::analysis::{projected_oracle, AnalysisError, ProjectionParams};
use crate::budget;
use crate::funcs::{restricted_oracle, scaled_oracle, Counted, ExampleOracle, OracleError, Restriction, DEFAULT_CAP_MULTIPLIER};
use crate::gf::{FieldVector, Fq};
use crate::ldme::{solve_ldme, LdmeConfig, LdmeError, SampleReuse};
use crate::rng::{mix3, StreamRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JuntaError {
    #[error("found {size} relevant coordinates, more than k = {k}")]
    SizeOverflow { size: usize, k: usize },
    #[error("no candidate accepted after {trials} projection trials")]
    ExhaustedTrials { trials: u64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ldme(#[from] LdmeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    /// Overall failure probability.
    pub delta: f64,
    /// Scales the constant check, relevance check and trial counts.
    pub sample_multiplier: f64,
    /// LDME solver settings (backend, row and check multipliers, reuse).
    pub ldme: LdmeConfig,
    /// Correlation handed to LDME; default `1/q^(k+1)`.
    pub ldme_rho: Option<f64>,
    /// Confidence of a single LDME run.
    pub ldme_delta: f64,
    /// LDME runs per projection; default `ceil(log2(4/delta'))`.
    pub ldme_repeats: Option<u64>,
    /// Rejection-sampling cap for restricted oracles, per `q^|R|`.
    pub cap_multiplier: u64,
    /// Size projections, LDME and the relevance check for `k - |R|`
    /// instead of `k`: every restriction of `f` to `R` is a
    /// `(k - |R|)`-junta.
    pub residual_k: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            delta: 0.1,
            sample_multiplier: 1.0,
            ldme: LdmeConfig::default(),
            ldme_rho: None,
            ldme_delta: 0.5,
            ldme_repeats: None,
            cap_multiplier: DEFAULT_CAP_MULTIPLIER,
            residual_k: false,
        }
    }
}

impl LearnerConfig {
    /// Desk-scale settings: one LDME run per projection, told a fixed
    /// correlation (0.2 or 0.25) instead of `1/q^(k+1)`, with shared example
    /// pools, one round per split configuration, scaled-down rows and
    /// checks, and sizes shrunk to the residual arity `k - |R|`.  The
    /// relevance gate keeps its exact sample size.
    pub fn desk(q: u32) -> Self {
        let (rho, rows) = match q {
            2 => (0.25, 0.1),
            3 => (0.2, 0.05),
            _ => (0.25, 0.05),
        };
        LearnerConfig {
            ldme: LdmeConfig {
                repeats: Some(1),
                cor_multiplier: 0.5,
                row_multiplier: rows,
                reuse: SampleReuse::Pooled,
                ..LdmeConfig::default()
            },
            ldme_rho: Some(rho),
            ldme_repeats: Some(1),
            residual_k: true,
            ..LearnerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), JuntaError> {
        check_delta(self.delta)?;
        check_delta(self.ldme_delta)?;
        if !(self.sample_multiplier >= 0.0 && self.sample_multiplier.is_finite()) {
            return Err(JuntaError::BadParameter(format!("sample multiplier {}", self.sample_multiplier)));
        }
        if let Some(rho) = self.ldme_rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(JuntaError::BadParameter(format!("ldme rho {rho}")));
            }
        }
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<(), JuntaError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(JuntaError::BadParameter(format!("delta = {delta}")))
    }
}

/// Verdict of [`check_const`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstVerdict {
    Constant(Fq),
    NotConstant,
}

/// Draws `ceil(mult q^k ln(2/delta))` examples and reports the common label
/// if they all agree.
pub fn check_const_scaled(
    oracle: &dyn ExampleOracle,
    k: usize,
    delta: f64,
    mult: f64,
    rng: &mut StreamRng,
) -> Result<ConstVerdict, JuntaError> {
    check_delta(delta)?;
    let m = budget::check_const_samples(oracle.field().q(), k, delta, mult);
    let mut x = vec![Fq::ZERO; oracle.arity()];
    let first = oracle.draw(rng, &mut x)?;
    let mut same = true;
    for _ in 1..m {
        same &= oracle.draw(rng, &mut x)? == first;
    }
    Ok(if same {
        ConstVerdict::Constant(first)
    } else {
        ConstVerdict::NotConstant
    })
}

pub fn check_const(oracle: &dyn ExampleOracle, k: usize, delta: f64, rng: &mut StreamRng) -> Result<ConstVerdict, JuntaError> {
    check_const_scaled(oracle, k, delta, 1.0, rng)
}

/// For each `a` in `F_p` draws `ceil(mult 2 q^(2k) ln(p/delta))` examples and
/// accepts once `Tr(label - chi_alpha(x)) = a` holds at least
/// `(1/p + 1/(2 q^k)) m` times.
pub fn check_rc_scaled(
    oracle: &dyn ExampleOracle,
    k: usize,
    alpha: &FieldVector,
    delta: f64,
    mult: f64,
    rng: &mut StreamRng,
) -> Result<bool, JuntaError> {
    check_delta(delta)?;
    let field = oracle.field();
    if alpha.len() != oracle.arity() {
        return Err(JuntaError::BadParameter(format!(
            "candidate of length {} for arity {}",
            alpha.len(),
            oracle.arity()
        )));
    }
    let (p, q) = (field.p(), field.q());
    let m = budget::check_rc_samples(q, p, k, delta, mult);
    let need = (1.0 / p as f64 + 0.5 / (q as f64).powi(k as i32)) * m as f64;
    let terms = alpha.sparse();
    let mut x = vec![Fq::ZERO; oracle.arity()];
    for a in 0..p {
        let mut hits = 0u64;
        for _ in 0..m {
            let b = oracle.draw(rng, &mut x)?;
            if field.trace(field.sub(b, field.dot_sparse(&terms, &x))) == a {
                hits += 1;
            }
        }
        if hits as f64 >= need {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn check_rc(
    oracle: &dyn ExampleOracle,
    k: usize,
    alpha: &FieldVector,
    delta: f64,
    rng: &mut StreamRng,
) -> Result<bool, JuntaError> {
    check_rc_scaled(oracle, k, alpha, delta, 1.0, rng)
}

/// One LDME candidate seen by [`add_rc`].
#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub round: usize,
    pub tau: Restriction,
    /// Index of the label scalar `c_j`.
    pub j: usize,
    pub trial: u64,
    pub a: Fq,
    /// Candidate in the caller's coordinates.
    pub candidate: Vec<(usize, Fq)>,
    pub accepted: bool,
}

/// Counters of one [`add_rc`] call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AddRcStats {
    /// Projection trials per `(tau, c_j)` cell.
    pub trials_per_cell: u64,
    pub trials: u64,
    pub ldme_runs: u64,
    pub ldme_found: u64,
    pub rc_checks: u64,
}

/// Everything the learner has done so far.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnerState {
    pub relevant: BTreeSet<usize>,
    pub loops: usize,
    pub const_calls: u64,
    pub add_rc_calls: u64,
    pub examples: u64,
    pub add_rc: AddRcStats,
    pub audit: Vec<AuditEntry>,
}

impl LearnerState {
    pub fn relevant_sorted(&self) -> Vec<usize> {
        self.relevant.iter().copied().collect()
    }
}

/// Finds at least one relevant coordinate outside `state.relevant`.
pub fn add_rc(
    oracle: &dyn ExampleOracle,
    k: usize,
    delta: f64,
    state: &mut LearnerState,
    cfg: &LearnerConfig,
    rng: &mut StreamRng,
) -> Result<(), JuntaError> {
    let r: Vec<usize> = state.relevant_sorted();
    let q = oracle.field().q();
    let count = restriction_count(q, r.len())?;
    let order: Vec<usize> = (0..count).collect();
    add_rc_ordered(oracle, k, delta, state, cfg, &order, rng)
}

fn restriction_count(q: u32, r: usize) -> Result<usize, JuntaError> {
    (q as usize)
        .checked_pow(r as u32)
        .ok_or_else(|| JuntaError::BadParameter(format!("q^{r} restrictions")))
}

/// [`add_rc`] visiting restrictions in the given order (indices as in
/// [`Restriction::nth`]).
fn add_rc_ordered(
    oracle: &dyn ExampleOracle,
    k: usize,
    delta: f64,
    state: &mut LearnerState,
    cfg: &LearnerConfig,
    order: &[usize],
    rng: &mut StreamRng,
) -> Result<(), JuntaError> {
    check_delta(delta)?;
    let field = oracle.field().clone();
    let (p, q, ell) = (field.p(), field.q(), field.ell());
    let r: Vec<usize> = state.relevant_sorted();
    let trials = budget::add_rc_trials(q, k, delta, cfg.sample_multiplier);
    let kr = if cfg.residual_k { k.saturating_sub(r.len()).max(1) } else { k };
    let reps = cfg
        .ldme_repeats
        .unwrap_or_else(|| budget::add_rc_ldme_repeats(delta))
        .max(1);
    let rho = cfg.ldme_rho.unwrap_or_else(|| (q as f64).powi(-(kr as i32 + 1)));
    let qf = q as f64;
    let delta_rc = delta / (2.0 * trials as f64 * qf.powi(k as i32 + 3));
    let scalars: Vec<Fq> = field.nonzero().take(p.pow(ell - 1) as usize).collect();
    let key = rng.next_u64();
    state.add_rc_calls += 1;
    state.add_rc.trials_per_cell = trials;

    let cells: Vec<_> = order
        .iter()
        .map(|&t| {
            let tau = Restriction::nth(&r, t, q);
            let restricted = restricted_oracle(oracle, &tau, cfg.cap_multiplier);
            (t, tau, restricted)
        })
        .filter(|(_, _, o)| !o.kept_coords().is_empty())
        .collect();
    let targets: Vec<_> = cells
        .iter()
        .map(|(_, _, o)| scalars.iter().map(|&c| scaled_oracle(o, c)).collect::<Vec<_>>())
        .collect();

    // Trials run round-robin over the (tau, c_j) cells, so one cell that
    // cannot succeed does not hold up the others.
    let mut tried = 0u64;
    for trial in 0..trials {
        for ((t, tau, restricted), scaled) in cells.iter().zip(&targets) {
            let kept = restricted.kept_coords();
            for (j, target) in scaled.iter().enumerate() {
                tried += 1;
                state.add_rc.trials += 1;
                let cell = (t * scalars.len() + j) as u64;
                let mut crng = StreamRng::seed_from_u64(mix3(key, cell, trial));
                let rows = ProjectionParams::random(&field, Fq::ONE, kr + 1, kept.len(), &mut crng).rows().to_vec();
                for a in field.nonzero() {
                    let params = ProjectionParams::new(a, rows.clone())?;
                    let projected = projected_oracle(target, &params)?;
                    for _ in 0..reps {
                        state.add_rc.ldme_runs += 1;
                        let gamma = match solve_ldme(&projected, kr, rho, cfg.ldme_delta, &cfg.ldme, &mut crng) {
                            Ok(out) => out.gamma,
                            Err(LdmeError::NotFound { .. }) => continue,
                            Err(e) => return Err(e.into()),
                        };
                        state.add_rc.ldme_found += 1;
                        let mut accepted = false;
                        for a2 in field.nonzero() {
                            state.add_rc.rc_checks += 1;
                            let cand = field.scale(a2, &gamma);
                            if check_rc_scaled(target, kr, &cand, delta_rc, cfg.sample_multiplier, &mut crng)? {
                                accepted = true;
                                break;
                            }
                        }
                        let candidate: Vec<(usize, Fq)> = gamma.sparse().into_iter().map(|(i, v)| (kept[i], v)).collect();
                        state.audit.push(AuditEntry {
                            round: state.loops,
                            tau: tau.clone(),
                            j,
                            trial,
                            a,
                            candidate: candidate.clone(),
                            accepted,
                        });
                        if accepted {
                            state.relevant.extend(candidate.iter().map(|&(i, _)| i));
                            return Ok(());
                        }
                    }
                }
            }
        }
    }
    Err(JuntaError::ExhaustedTrials { trials: tried })
}

/// Returns the relevant coordinates of a `k`-junta oracle, in increasing order.
pub fn learn_junta(
    oracle: &dyn ExampleOracle,
    k: usize,
    cfg: &LearnerConfig,
    rng: &mut StreamRng,
) -> Result<Vec<usize>, JuntaError> {
    let mut state = LearnerState::default();
    learn_junta_with_state(oracle, k, cfg, &mut state, rng)?;
    Ok(state.relevant_sorted())
}

/// [`learn_junta`] recording progress in `state`, which stays inspectable
/// when the run fails.
pub fn learn_junta_with_state(
    oracle: &dyn ExampleOracle,
    k: usize,
    cfg: &LearnerConfig,
    state: &mut LearnerState,
    rng: &mut StreamRng,
) -> Result<(), JuntaError> {
    cfg.validate()?;
    let counted = Counted::new(oracle);
    let result = main_loop(&counted, k, cfg, state, rng);
    state.examples += counted.count();
    result
}

fn main_loop(
    oracle: &dyn ExampleOracle,
    k: usize,
    cfg: &LearnerConfig,
    state: &mut LearnerState,
    rng: &mut StreamRng,
) -> Result<(), JuntaError> {
    let q = oracle.field().q();
    let calls = (k as f64 + 1.0) * (q as f64).powi(k as i32) + k as f64;
    let delta = cfg.delta / calls;
    loop {
        if state.relevant.len() > k {
            return Err(JuntaError::SizeOverflow {
                size: state.relevant.len(),
                k,
            });
        }
        state.loops += 1;
        let r = state.relevant_sorted();
        let count = restriction_count(q, r.len())?;
        let mut flagged = Vec::new();
        let mut quiet = Vec::new();
        for t in 0..count {
            let tau = Restriction::nth(&r, t, q);
            let restricted = restricted_oracle(oracle, &tau, cfg.cap_multiplier);
            state.const_calls += 1;
            match check_const_scaled(&restricted, k, delta, cfg.sample_multiplier, rng)? {
                ConstVerdict::Constant(_) => quiet.push(t),
                ConstVerdict::NotConstant => flagged.push(t),
            }
        }
        if flagged.is_empty() {
            return Ok(());
        }
        // Restrictions already seen to vary are the ones known to hide a
        // relevant coordinate; visit them first.
        flagged.extend(quiet);
        add_rc_ordered(oracle, k, delta, state, cfg, &flagged, rng)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::JuntaFunction;
    use crate::gf::FieldSpec;
    use crate::rng::stream;

    #[test]
    fn constant_function_is_reported() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        let f = JuntaFunction::constant(f3.clone(), 5, f3.from_int(2));
        let mut rng = stream(1, "const", 0);
        assert_eq!(
            check_const(&f, 2, 0.05, &mut rng).unwrap(),
            ConstVerdict::Constant(f3.from_int(2))
        );
        assert_eq!(learn_junta(&f, 2, &LearnerConfig::default(), &mut rng).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn linear_function_passes_rc() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let alpha = FieldVector(vec![Fq::ZERO, Fq::ONE, Fq::ONE, Fq::ZERO]);
        let f = JuntaFunction::linear(f2, &alpha);
        let mut rng = stream(2, "rc", 0);
        assert!(check_rc(&f, 2, &alpha, 0.1, &mut rng).unwrap());
        let wrong = FieldVector(vec![Fq::ONE, Fq::ONE, Fq::ONE, Fq::ZERO]);
        assert!(!check_rc(&f, 2, &wrong, 0.1, &mut rng).unwrap());
    }

    #[test]
    fn single_coordinate_is_learned() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let f = JuntaFunction::linear(f2.clone(), &FieldVector::unit(6, 1, Fq::ONE));
        let mut rng = stream(3, "learn", 0);
        let cfg = LearnerConfig::default();
        let mut state = LearnerState::default();
        learn_junta_with_state(&f, 1, &cfg, &mut state, &mut rng).unwrap();
        assert_eq!(state.relevant_sorted(), vec![1]);
        assert_eq!(state.loops, 2);
        assert!(state.examples > 0);
    }

    #[test]
    fn bad_delta_is_rejected() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let f = JuntaFunction::constant(f2, 3, Fq::ZERO);
        let cfg = LearnerConfig {
            delta: 1.5,
            ..Default::default()
        };
        let mut rng = stream(4, "bad", 0);
        assert!(matches!(learn_junta(&f, 1, &cfg, &mut rng), Err(JuntaError::BadParameter(_))));
    }
}
