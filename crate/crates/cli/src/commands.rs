//! The `gen`, `learn`, `ldme`, `lbp` and `bench` drivers.
//!
//! Random streams are derived from the root seed by label: `instance`
//! (generated targets, one index per trial), `learn`, `ldme`, `lbp` (solver
//! randomness per trial) and `gen` (file generation).

use std::fs;
use std::time::Instant;

use fq_junta::analysis::multiple_of;
use fq_junta::funcs::{gen_ldme_target, gen_random_junta, random_vector_of_weight, relevant_bruteforce, JuntaFunction, LdmeTarget};
use fq_junta::junta::{learn_junta_with_state, LearnerConfig, LearnerState};
use fq_junta::lbp::{self, gen_planted, Backend, LbpInstance};
use fq_junta::ldme::{solve_ldme, LdmeConfig, LdmeError, SampleReuse};
use fq_junta::rng::stream;

use crate::config::RunConfig;
use crate::report::{list, Report};
use crate::CliError;

/// Outcome of a driver: `true` when every threshold was met.
pub type Verdict = Result<bool, CliError>;

fn seed(cfg: &RunConfig) -> Result<u64, CliError> {
    Ok(cfg.get("seed")?)
}

fn timing(cfg: &RunConfig) -> Result<bool, CliError> {
    Ok(cfg.get("timing")?)
}

/// Rows for an LBP instance: `ceil(32 ln N / rho^2)` unless `d` is given.
pub fn lbp_rows(cfg: &RunConfig, count: usize, rho: f64) -> Result<usize, CliError> {
    Ok(match cfg.get_opt::<usize>("d")? {
        Some(d) => d,
        None => (32.0 * (count as f64).ln() / (rho * rho)).ceil() as usize,
    })
}

pub fn ldme_config(cfg: &RunConfig) -> Result<LdmeConfig, CliError> {
    Ok(LdmeConfig {
        backend: cfg.get::<Backend>("backend")?,
        repeats: cfg.get_opt("repeats")?,
        cor_multiplier: cfg.get("cor_multiplier")?,
        row_multiplier: cfg.get("row_multiplier")?,
        reuse: cfg.get::<SampleReuse>("reuse")?,
        ..LdmeConfig::default()
    })
}

/// `profile = exact` starts from the exact constants, `profile = desk`
/// from [`LearnerConfig::desk`]; keys set explicitly override either.
pub fn learner_config(cfg: &RunConfig, q: u32) -> Result<LearnerConfig, CliError> {
    let mut lc = match cfg.raw("profile") {
        "exact" => LearnerConfig::default(),
        "desk" => LearnerConfig::desk(q),
        other => return Err(CliError::Usage(format!("unknown profile {other:?}"))),
    };
    let explicit = |k: &str| cfg.source(k) != crate::config::Source::Default;
    lc.delta = cfg.get("delta")?;
    if explicit("multiplier") || cfg.raw("profile") == "exact" {
        lc.sample_multiplier = cfg.get("multiplier")?;
    }
    lc.ldme.backend = cfg.get("backend")?;
    if explicit("repeats") {
        lc.ldme.repeats = cfg.get_opt("repeats")?;
    }
    if explicit("cor_multiplier") {
        lc.ldme.cor_multiplier = cfg.get("cor_multiplier")?;
    }
    if explicit("row_multiplier") {
        lc.ldme.row_multiplier = cfg.get("row_multiplier")?;
    }
    if explicit("reuse") {
        lc.ldme.reuse = cfg.get("reuse")?;
    }
    if explicit("ldme_rho") {
        lc.ldme_rho = cfg.get_opt("ldme_rho")?;
    }
    if explicit("ldme_runs") {
        lc.ldme_repeats = cfg.get_opt("ldme_runs")?;
    }
    if let Some(v) = cfg.get_opt("residual_k")? {
        lc.residual_k = v;
    }
    lc.validate()?;
    Ok(lc)
}

pub fn cmd_gen(cfg: &RunConfig, report: &mut Report) -> Verdict {
    let mut rng = stream(seed(cfg)?, "gen", 0);
    let text = match cfg.raw("kind") {
        "junta" => {
            let field = cfg.field()?;
            let (n, k): (usize, usize) = (cfg.get("n")?, cfg.get("k")?);
            gen_random_junta(&field, n, k, &mut rng)?.to_text(k)
        }
        "ldme" => {
            let field = cfg.field()?;
            let (n, k): (usize, usize) = (cfg.get("n")?, cfg.get("k")?);
            let w = cfg.get_opt::<usize>("weight")?.unwrap_or(k);
            let alpha = random_vector_of_weight(&field, n, w, &mut rng);
            gen_ldme_target(&field, alpha, cfg.get("rho")?)?.to_text(k)
        }
        "lbp" => {
            let count: usize = cfg.get("count")?;
            let rho: f64 = cfg.get("rho")?;
            let d = lbp_rows(cfg, count, rho)?;
            let (inst, (a, b)) = gen_planted(count, d, rho, &mut rng)?;
            inst.to_text(Some((&a, &b)))
        }
        other => return Err(CliError::Usage(format!("unknown kind {other:?}"))),
    };
    match cfg.get_opt::<String>("out")? {
        Some(path) => {
            fs::write(&path, text)?;
            report.line(format!("wrote={path} kind={}", cfg.raw("kind")))?;
        }
        None => {
            print!("{text}");
        }
    }
    Ok(true)
}

fn load_junta(cfg: &RunConfig) -> Result<Option<(JuntaFunction, usize)>, CliError> {
    match cfg.get_opt::<String>("instance")? {
        Some(path) => Ok(Some(JuntaFunction::parse(&fs::read_to_string(path)?)?)),
        None => Ok(None),
    }
}

fn success_line(report: &mut Report, trials: u64, ok: u64, min: f64) -> Verdict {
    let rate = if trials == 0 { 0.0 } else { ok as f64 / trials as f64 };
    report.line(format!("summary trials={trials} success={ok} success_rate={rate:.4} min_success={min}"))?;
    Ok(rate >= min)
}

pub fn cmd_learn(cfg: &RunConfig, report: &mut Report) -> Verdict {
    let root = seed(cfg)?;
    let trials: u64 = cfg.get("trials")?;
    let file = load_junta(cfg)?;
    let timed = timing(cfg)?;
    let mut ok = 0;
    for t in 0..trials {
        let (f, k) = match &file {
            Some((f, fk)) => (f.clone(), cfg.get_opt::<usize>("k")?.filter(|_| cfg.source("k") != crate::config::Source::Default).unwrap_or(*fk)),
            None => {
                let field = cfg.field()?;
                let (n, k): (usize, usize) = (cfg.get("n")?, cfg.get("k")?);
                (gen_random_junta(&field, n, k, &mut stream(root, "instance", t))?, k)
            }
        };
        let lc = learner_config(cfg, f.field().q())?;
        let truth = relevant_bruteforce(&f);
        let mut rng = stream(root, "learn", t);
        let mut state = LearnerState::default();
        let start = Instant::now();
        let res = learn_junta_with_state(&f, k, &lc, &mut state, &mut rng);
        let got = state.relevant_sorted();
        let verdict = match &res {
            Err(_) => "error",
            Ok(()) if got == truth => "exact",
            Ok(()) => "wrong",
        };
        ok += (verdict == "exact") as u64;
        let mut line = format!(
            "trial={t} R={} loops={} examples={} verdict={verdict} truth={}",
            list(&got),
            state.loops,
            state.examples,
            list(&truth)
        );
        if let Err(e) = &res {
            line.push_str(&format!(" error=\"{e}\""));
        }
        if timed {
            line.push_str(&format!(" seconds={:.3}", start.elapsed().as_secs_f64()));
        }
        report.line(line)?;
    }
    success_line(report, trials, ok, cfg.get("min_success")?)
}

pub fn cmd_ldme(cfg: &RunConfig, report: &mut Report) -> Verdict {
    let root = seed(cfg)?;
    let trials: u64 = cfg.get("trials")?;
    let file = match cfg.get_opt::<String>("instance")? {
        Some(path) => Some(LdmeTarget::parse(&fs::read_to_string(path)?)?),
        None => None,
    };
    let lc = ldme_config(cfg)?;
    let delta: f64 = cfg.get("delta")?;
    let rho: f64 = cfg.get("rho")?;
    let timed = timing(cfg)?;
    let mut ok = 0;
    for t in 0..trials {
        let (target, k) = match &file {
            Some((target, k)) => (target.clone(), *k),
            None => {
                let field = cfg.field()?;
                let (n, k): (usize, usize) = (cfg.get("n")?, cfg.get("k")?);
                let w = cfg.get_opt::<usize>("weight")?.unwrap_or(k);
                let alpha = random_vector_of_weight(&field, n, w, &mut stream(root, "instance", t));
                (gen_ldme_target(&field, alpha, rho)?, k)
            }
        };
        let mut rng = stream(root, "ldme", t);
        let start = Instant::now();
        let res = solve_ldme(&target, k, rho, delta, &lc, &mut rng);
        let field = target.field();
        let mut line = format!("trial={t} alpha={}", field.format_vector(target.alpha().as_slice()));
        match res {
            Ok(out) => {
                let good = multiple_of(field, &out.gamma, target.alpha()).is_some_and(|c| !c.is_zero());
                ok += good as u64;
                line.push_str(&format!(
                    " gamma={} phase={} rounds={} examples={} verdict={}",
                    field.format_vector(out.gamma.as_slice()),
                    out.stats.phase,
                    out.stats.rounds,
                    out.stats.examples,
                    if good { "multiple" } else { "wrong" }
                ));
            }
            Err(LdmeError::NotFound { stats }) => {
                line.push_str(&format!(
                    " phase=0 rounds={} examples={} verdict=notfound",
                    stats.rounds, stats.examples
                ));
            }
            Err(e) => line.push_str(&format!(" verdict=error error=\"{e}\"")),
        }
        if timed {
            line.push_str(&format!(" seconds={:.3}", start.elapsed().as_secs_f64()));
        }
        report.line(line)?;
    }
    success_line(report, trials, ok, cfg.get("min_success")?)
}

fn pair_str<L: std::fmt::Display>(r: &Result<lbp::LbpResult<L>, lbp::LbpError>) -> String {
    match r {
        Ok(r) => format!("({},{})", r.pair.0, r.pair.1),
        Err(_) => "none".to_string(),
    }
}

/// `backend = naive | grouped[:g] | both`; with `both` the line records
/// whether the grouped pair agrees with the naive one.
pub fn cmd_lbp(cfg: &RunConfig, report: &mut Report) -> Verdict {
    let root = seed(cfg)?;
    let trials: u64 = cfg.get("trials")?;
    let file = match cfg.get_opt::<String>("instance")? {
        Some(path) => Some(LbpInstance::<usize>::parse(&fs::read_to_string(path)?)?),
        None => None,
    };
    let backends: Vec<Backend> = match cfg.raw("backend") {
        "both" => vec![Backend::Naive, Backend::Grouped { group_size: None }],
        b => vec![b.parse().map_err(CliError::Usage)?],
    };
    let timed = timing(cfg)?;
    let (mut found, mut agree) = (vec![0u64; backends.len()], 0u64);
    for t in 0..trials {
        let mut rng = stream(root, "lbp", t);
        let (inst, planted) = match &file {
            Some((inst, planted)) => (inst.clone(), *planted),
            None => {
                let count: usize = cfg.get("count")?;
                let rho: f64 = cfg.get("rho")?;
                let d = lbp_rows(cfg, count, rho)?;
                let (inst, p) = gen_planted(count, d, rho, &mut rng)?;
                (inst, Some(p))
            }
        };
        let rho = inst.rho();
        let mut line = format!("trial={t} N={} d={}", inst.n(), inst.d());
        if let Some((a, b)) = planted {
            line.push_str(&format!(" planted=({a},{b})"));
        }
        let mut pairs = Vec::new();
        for (bi, b) in backends.iter().enumerate() {
            let start = Instant::now();
            let r = lbp::solve(&inst, rho, b);
            let hit = matches!((&r, planted), (Ok(r), Some(p)) if r.pair == p);
            found[bi] += hit as u64;
            line.push_str(&format!(" {}={}", b, pair_str(&r)));
            if timed {
                line.push_str(&format!(" {}_seconds={:.4}", b, start.elapsed().as_secs_f64()));
            }
            pairs.push(r.ok().map(|r| r.pair));
        }
        if pairs.len() == 2 {
            let same = pairs[0].is_some() && pairs[0] == pairs[1];
            agree += same as u64;
            line.push_str(&format!(" agree={same}"));
        }
        report.line(line)?;
    }
    let min: f64 = cfg.get("min_success")?;
    let mut pass = true;
    for (b, f) in backends.iter().zip(&found) {
        let rate = *f as f64 / trials.max(1) as f64;
        report.line(format!("summary backend={b} trials={trials} found_planted={f} success_rate={rate:.4}"))?;
        pass &= rate >= min;
    }
    if backends.len() == 2 {
        let rate = agree as f64 / trials.max(1) as f64;
        report.line(format!("summary agreement={agree} agreement_rate={rate:.4}"))?;
        pass &= rate >= min;
    }
    Ok(pass)
}

/// Wall-clock comparison of the LBP backends and one LDME solve.
pub fn cmd_bench(cfg: &RunConfig, report: &mut Report) -> Verdict {
    let root = seed(cfg)?;
    let count: usize = if cfg.source("count") == crate::config::Source::Default { 5000 } else { cfg.get("count")? };
    let d: usize = cfg.get_opt("d")?.unwrap_or(2048);
    let rho: f64 = cfg.get("rho")?;
    let (inst, planted) = gen_planted(count, d, rho, &mut stream(root, "bench", 0))?;
    let mut times = Vec::new();
    for b in [Backend::Naive, Backend::Grouped { group_size: None }] {
        let start = Instant::now();
        let r = lbp::solve(&inst, rho, &b);
        let secs = start.elapsed().as_secs_f64();
        times.push(secs);
        let hit = matches!(&r, Ok(r) if r.pair == planted);
        report.line(format!("bench=lbp backend={b} N={count} d={d} seconds={secs:.4} found_planted={hit}"))?;
    }
    report.line(format!("bench=lbp speedup={:.2}", times[0] / times[1].max(1e-9)))?;

    let field = cfg.field()?;
    let (n, k): (usize, usize) = (cfg.get("n")?, cfg.get("k")?);
    let alpha = random_vector_of_weight(&field, n, k, &mut stream(root, "bench", 1));
    let target = gen_ldme_target(&field, alpha, 0.5)?;
    let start = Instant::now();
    let res = solve_ldme(&target, k, 0.5, cfg.get("delta")?, &ldme_config(cfg)?, &mut stream(root, "bench", 2));
    report.line(format!(
        "bench=ldme q={} n={n} k={k} seconds={:.4} solved={}",
        field.q(),
        start.elapsed().as_secs_f64(),
        res.is_ok()
    ))?;
    Ok(true)
}
