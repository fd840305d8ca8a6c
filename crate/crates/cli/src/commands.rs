//! Subcommand bodies. Each returns run records; the caller writes them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use weylab_core::diophantine::{self, ArcSet, RationalApprox};
use weylab_core::expsum::{eval_k, eval_sum, sup_partial_sum, PhasePolynomial};
use weylab_core::fracsearch::{
    bound_check, empirical_exponent, exhaustive_min, mitm_min, random_min, CheckMode, Engine,
    MinResult, PolySystem, Theorem,
};
use weylab_core::kprofile::thresholds;
use weylab_core::meanvalue::{
    arc_meanvalue, solution_distribution, system_count, Backend, PowerSystem,
};
use weylab_core::{ExponentProfile, FixedReal};

use crate::args::{
    ArcsArgs, ArcsChoice, MeanvalueArgs, MinfracArgs, ModeArg, SuiteArg, SumArgs, SumKind,
    SystemChoice,
};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::record::{big_json, rational_json, RunRecord};
use crate::verify::{self, Suite};

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_profile(s: &str) -> Result<ExponentProfile, CliError> {
    Ok(s.parse::<ExponentProfile>()?)
}

fn parse_real(s: &str) -> Result<FixedReal, CliError> {
    Ok(FixedReal::parse(s)?)
}

/// A single value or a comma-separated grid, returned sorted and deduplicated.
pub fn parse_grid(s: &str) -> Result<Vec<u64>, CliError> {
    let mut grid = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("invalid X value {p:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    grid.sort_unstable();
    grid.dedup();
    if grid.first() == Some(&0) {
        return Err(usage("X must be positive"));
    }
    Ok(grid)
}

/// Parses `j:alpha` terms separated by commas.
pub fn parse_phase(s: &str) -> Result<PhasePolynomial, CliError> {
    let mut phase = PhasePolynomial::new();
    for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (j, a) = term
            .split_once(':')
            .ok_or_else(|| usage(format!("phase term {term:?} is not j:alpha")))?;
        let j: u32 = j
            .trim()
            .parse()
            .map_err(|_| usage(format!("invalid exponent in {term:?}")))?;
        if j == 0 {
            return Err(usage("phase exponents start at 1"));
        }
        phase.set(j, parse_real(a)?)?;
    }
    Ok(phase)
}

fn approx_json(w: &Option<RationalApprox>) -> Value {
    match w {
        Some(r) => json!({"a": r.a, "q": r.q, "err": r.err}),
        None => Value::Null,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn sigma(profile: &str, cfg: &ExperimentConfig) -> Result<RunRecord, CliError> {
    let t = Instant::now();
    let p = parse_profile(profile)?;
    let th = thresholds(&p);
    let result = json!({
        "profile": p.exps(),
        "missing": p.missing(),
        "sigma": {
            "num": rational_json(&th.sigma.value)["num"],
            "den": rational_json(&th.sigma.value)["den"],
            "l": th.sigma.l,
        },
        "D": th.degree_sum,
        "L": th.l_const,
        "thresholds": {
            "s_thm11": th.s_thm11,
            "s_thm12_exclusive": th.s_thm12,
            "s_meanvalue_major": th.s_mv_major,
            "s_meanvalue_minor": th.s_mv_minor,
        },
    });
    Ok(RunRecord::new(
        "sigma",
        json!({"profile": p.exps()}),
        result,
        ms(t),
        cfg.seed,
    ))
}

pub fn sum(a: &SumArgs, cfg: &ExperimentConfig) -> Result<RunRecord, CliError> {
    let t = Instant::now();
    let phase = parse_phase(&a.phase)?;
    let gamma = parse_real(&a.gamma)?;
    let result = match a.kind {
        SumKind::Weyl => {
            let mut p = phase.clone();
            p.set(1, phase.coeff(1).wrapping_add(gamma))?;
            let z = eval_sum(&p, a.x)?;
            json!({"re": z.re, "im": z.im, "abs": z.abs()})
        }
        SumKind::K => {
            let z = eval_k(gamma, a.x)?;
            json!({"re": z.re, "im": z.im, "abs": z.abs()})
        }
        SumKind::Sup => json!({"sup": sup_partial_sum(&phase, a.x)?}),
    };
    let terms: Vec<Value> = phase
        .terms()
        .map(|(j, c)| json!({"j": j, "alpha": c.to_hex()}))
        .collect();
    let params = json!({
        "phase": terms, "X": a.x,
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "gamma": gamma.to_hex(),
    });
    Ok(RunRecord::new("sum", params, result, ms(t), cfg.seed))
}

pub fn arcs(a: &ArcsArgs, cfg: &ExperimentConfig) -> Result<RunRecord, CliError> {
    let t = Instant::now();
    let (set, family) = match a.h {
        Some(h) => (ArcSet::major_arcs_h(a.x, a.k, h)?, json!({"H": h})),
        None => {
            let l = a.l.unwrap_or(1);
            (ArcSet::major_arcs(a.x, a.k, l)?, json!({"l": l}))
        }
    };
    let mut result = json!({
        "interval_count": set.intervals().len(),
        "measure": set.measure(),
    });
    if let Some(text) = &a.alpha {
        let alpha = parse_real(text)?;
        let v = match a.h {
            Some(h) => diophantine::classify_arc_h(alpha, a.x, a.k, h)?,
            None => diophantine::classify_arc(alpha, a.x, a.k, a.l.unwrap_or(1))?,
        };
        result["major"] = json!(v.major);
        result["witness"] = approx_json(&v.witness);
    }
    if a.intervals {
        result["intervals"] = set
            .intervals()
            .iter()
            .map(|i| json!({"lo": i.lo, "hi": i.hi, "q": i.q, "a": i.a}))
            .collect();
    }
    if let Some(path) = &a.csv {
        write_file(path, &set.to_csv())?;
    }
    let params = json!({"alpha": a.alpha, "X": a.x, "k": a.k, "arcs": family});
    Ok(RunRecord::new("arcs", params, result, ms(t), cfg.seed))
}

fn grid_path(base: &Path, x: u64, grid_len: usize) -> PathBuf {
    if grid_len == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("dist");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_X{x}.{ext}"))
}

pub fn meanvalue(a: &MeanvalueArgs, cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    let profile = parse_profile(&a.profile)?;
    let system = match a.system {
        SystemChoice::Vinogradov => PowerSystem::vinogradov(profile.k())?,
        SystemChoice::Auto if profile.t() == 1 => PowerSystem::vinogradov(profile.k())?,
        _ => PowerSystem::from(&profile),
    };
    let backend: Backend = a.backend.parse()?;
    let grid = parse_grid(&a.x)?;
    let mut records = Vec::with_capacity(grid.len());
    for &x in &grid {
        let t = Instant::now();
        let params = json!({
            "profile": profile.exps(), "system": system.exps(), "s": a.s, "X": x,
            "arcs": format!("{:?}", a.arcs).to_lowercase(), "l": a.l, "backend": backend.to_string(),
        });
        let needs_dist = a.arcs != ArcsChoice::Full || a.dist_csv.is_some();
        let dist = if needs_dist {
            Some(solution_distribution(&system, a.s, x, cfg.budget)?)
        } else {
            None
        };
        if let (Some(path), Some(d)) = (&a.dist_csv, &dist) {
            write_file(&grid_path(path, x, grid.len()), &d.to_csv())?;
        }
        let size = dist.as_ref().map(|d| d.len());
        let result = match a.arcs {
            ArcsChoice::Full => {
                let c = system_count(&system, a.s, x, backend, cfg.budget)?;
                json!({"count": big_json(&c.count), "distribution_size": size})
            }
            choice => {
                let major = ArcSet::major_arcs(x, system.leading(), a.l)?;
                let set = if choice == ArcsChoice::Major {
                    major
                } else {
                    major.complement()
                };
                let d = dist
                    .as_ref()
                    .expect("distribution computed for arc integrals");
                json!({"value": arc_meanvalue(d, &set), "distribution_size": size, "arc_measure": set.measure()})
            }
        };
        records.push(RunRecord::new("meanvalue", params, result, ms(t), cfg.seed));
    }
    Ok(records)
}

/// Coefficients for `minfrac`: `s` rows of `t` reals.
pub fn minfrac_coefficients(
    spec: &str,
    s: usize,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<FixedReal>>, CliError> {
    if spec == "random" {
        return Ok((0..s)
            .map(|_| (0..t).map(|_| FixedReal::random(rng)).collect())
            .collect());
    }
    let text = match spec.strip_prefix("file:") {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?
        }
        None => spec.to_string(),
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|v| !v.is_empty())
        .map(parse_real)
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != s * t {
        return Err(usage(format!(
            "expected s*t = {} coefficients, got {}",
            s * t,
            values.len()
        )));
    }
    Ok(values.chunks(t).map(<[FixedReal]>::to_vec).collect())
}

fn run_engine(
    sys: &PolySystem,
    engine: Engine,
    samples: u64,
    cfg: &ExperimentConfig,
    x: u64,
) -> Result<MinResult, CliError> {
    Ok(match engine {
        Engine::Exhaustive => exhaustive_min(sys, cfg.box_budget)?,
        Engine::Mitm => mitm_min(sys, cfg.box_budget)?,
        Engine::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ x.rotate_left(32));
            random_min(sys, samples, &mut rng)?
        }
    })
}

pub fn minfrac(a: &MinfracArgs, cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    let profile = parse_profile(&a.profile)?;
    let engine: Engine = a.engine.parse()?;
    let theorem: Theorem = match &a.theorem {
        Some(t) => t.parse()?,
        None if profile.t() == 1 => Theorem::T41,
        None => Theorem::T12,
    };
    let mode = match a.mode {
        ModeArg::Strict => CheckMode::Strict,
        ModeArg::Proxy => CheckMode::Proxy,
    };
    let grid = parse_grid(&a.x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coeffs = minfrac_coefficients(&a.alpha, a.s, profile.t(), &mut rng)?;
    let base = PolySystem::new(profile.clone(), coeffs, grid[0])?;
    let coeff_hex: Vec<Vec<String>> = base
        .polys()
        .iter()
        .map(|p| {
            profile
                .exps()
                .iter()
                .map(|&k| p.coeff(k).to_hex())
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity(grid.len());
    let mut csv = String::from("X,min,sigma_emp\n");
    for &x in &grid {
        let t = Instant::now();
        let sys = base.with_x(x)?;
        let r = run_engine(&sys, engine, a.samples, cfg, x)?;
        let report = bound_check(&sys, &r, theorem, mode, cfg.epsilon);
        let sigma_emp = empirical_exponent(r.value, x);
        csv.push_str(&format!(
            "{x},{:e},{}\n",
            r.value,
            sigma_emp.map_or(String::new(), |v| v.to_string())
        ));
        let params = json!({
            "profile": profile.exps(), "s": a.s, "X": x, "engine": engine.to_string(),
            "alpha": coeff_hex, "theorem": theorem.to_string(),
            "mode": format!("{:?}", a.mode).to_lowercase(), "epsilon": cfg.epsilon,
            "samples": (engine == Engine::Random).then_some(a.samples),
        });
        let result = json!({
            "min": r.value,
            "min_hex": r.norm.to_hex(),
            "argmin": r.argmin,
            "engine": r.engine.to_string(),
            "sigma_target": report.sigma_target,
            "threshold": report.threshold,
            "hypotheses": report.hypotheses,
            "verdict": report.verdict.to_string(),
            "pass": report.verdict == weylab_core::fracsearch::Verdict::Pass,
            "sigma_emp": sigma_emp,
        });
        records.push(RunRecord::new("minfrac", params, result, ms(t), cfg.seed));
    }
    if let Some(path) = &a.csv {
        write_file(path, &csv)?;
    }
    Ok(records)
}

pub fn verify(
    suite: SuiteArg,
    cfg: &ExperimentConfig,
    err: &mut dyn Write,
) -> Result<(RunRecord, bool), CliError> {
    let t = Instant::now();
    let suite = match suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let counter = verify::default_counter(cfg.budget);
    let outcomes = verify::run_suite(suite, cfg, &counter, |o| {
        let _ = writeln!(err, "{}", o.line());
    });
    let passed = verify::all_passed(&outcomes);
    let result = json!({"passed": passed, "criteria": outcomes});
    let params = json!({"suite": suite.to_string()});
    Ok((
        RunRecord::new("verify", params, result, ms(t), cfg.seed),
        passed,
    ))
}
