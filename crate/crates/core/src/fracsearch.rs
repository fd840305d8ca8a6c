//! Small values of `||phi_1(x_1) + ... + phi_s(x_s)||` over boxes, plus the
//! arc-pattern partition of `[1, H]` and related diagnostics.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::diophantine::{classify_arc, classify_arc_h, classify_joint_arc};
use crate::error::{check_budget, Error, Result};
use crate::expsum::{eval_sum, CompensatedComplex, ComplexValue, PhasePolynomial};
use crate::fixed::FixedReal;
use crate::kprofile::{rational_to_f64, sigma_sk, thresholds, ExponentProfile};
use crate::meanvalue::slope_fit;

pub const MAX_VARIABLES: usize = 32;

/// `phi_i(x) = sum_j alpha_{ji} x^{k_j}` for `1 <= i <= s`, over `0 <= x_i <= X`.
#[derive(Clone, Debug)]
pub struct PolySystem {
    profile: ExponentProfile,
    polys: Vec<PhasePolynomial>,
    x: u64,
    /// `tables[i][x] = phi_i(x)`
    tables: Vec<Vec<FixedReal>>,
}

impl PolySystem {
    /// `coeffs[i][j]` is the coefficient of `x^{k_{j+1}}` in `phi_{i+1}`.
    pub fn new(profile: ExponentProfile, coeffs: Vec<Vec<FixedReal>>, x: u64) -> Result<Self> {
        let s = coeffs.len();
        if s == 0 || s > MAX_VARIABLES {
            return Err(Error::OutOfRange(format!(
                "s = {s} must lie in 1..={MAX_VARIABLES}"
            )));
        }
        if x == 0 {
            return Err(Error::OutOfRange("X must be positive".into()));
        }
        let mut polys = Vec::with_capacity(s);
        for row in &coeffs {
            if row.len() != profile.t() {
                return Err(Error::OutOfRange(format!(
                    "{} coefficients for a profile with t = {}",
                    row.len(),
                    profile.t()
                )));
            }
            let k_max = profile.k().max(crate::expsum::DEFAULT_K_MAX);
            let mut p = PhasePolynomial::with_k_max(k_max);
            for (&e, &a) in profile.exps().iter().zip(row) {
                p.set(e, a)?;
            }
            polys.push(p);
        }
        let tables = polys
            .iter()
            .map(|p| (0..=x as i64).map(|v| p.eval_at(v)).collect())
            .collect();
        Ok(PolySystem {
            profile,
            polys,
            x,
            tables,
        })
    }

    /// Uniformly random coefficients.
    pub fn random<R: Rng + ?Sized>(
        profile: ExponentProfile,
        s: usize,
        x: u64,
        rng: &mut R,
    ) -> Result<Self> {
        let t = profile.t();
        let coeffs = (0..s)
            .map(|_| (0..t).map(|_| FixedReal::random(rng)).collect())
            .collect();
        PolySystem::new(profile, coeffs, x)
    }

    pub fn profile(&self) -> &ExponentProfile {
        &self.profile
    }

    pub fn s(&self) -> usize {
        self.polys.len()
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn polys(&self) -> &[PhasePolynomial] {
        &self.polys
    }

    /// `sum_i phi_i(x_i)` mod 1.
    pub fn eval(&self, point: &[u64]) -> FixedReal {
        point
            .iter()
            .zip(&self.polys)
            .fold(FixedReal::ZERO, |acc, (&v, p)| {
                acc.wrapping_add(p.eval_at(v as i64))
            })
    }

    /// Same system with `X` replaced.
    pub fn with_x(&self, x: u64) -> Result<Self> {
        let coeffs = self
            .polys
            .iter()
            .map(|p| self.profile.exps().iter().map(|&e| p.coeff(e)).collect())
            .collect();
        PolySystem::new(self.profile.clone(), coeffs, x)
    }

    /// Every coefficient multiplied by `m`.
    pub fn scaled(&self, m: u64) -> Result<Self> {
        let coeffs = self
            .polys
            .iter()
            .map(|p| {
                self.profile
                    .exps()
                    .iter()
                    .map(|&e| p.coeff(e).wrapping_mul_u64(m))
                    .collect()
            })
            .collect();
        PolySystem::new(self.profile.clone(), coeffs, self.x)
    }

    fn box_size(&self, vars: usize) -> f64 {
        ((self.x + 1) as f64).powi(vars as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Exhaustive,
    Mitm,
    Random,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exhaustive => "exhaustive",
            Engine::Mitm => "mitm",
            Engine::Random => "random",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Engine::Exhaustive),
            "mitm" => Ok(Engine::Mitm),
            "random" => Ok(Engine::Random),
            _ => Err(Error::Parse {
                what: "engine",
                input: s.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinResult {
    pub value: f64,
    pub norm: FixedReal,
    pub argmin: Vec<u64>,
    pub engine: Engine,
}

/// Mixed-radix digits of `idx` in base `X + 1`, most significant first.
fn digits(mut idx: u64, len: usize, base: u64) -> Vec<u64> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    out
}

/// `(norm, index)` pairs ordered by norm then lexicographic tuple.
type Candidate = (FixedReal, u64);

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if y < x { y } else { x }),
    }
}

fn finish(sys: &PolySystem, idx: u64, engine: Engine) -> MinResult {
    let argmin = digits(idx, sys.s(), sys.x + 1);
    let norm = sys.eval(&argmin).norm();
    MinResult {
        value: norm.to_f64(),
        norm,
        argmin,
        engine,
    }
}

/// Half-sums over variables `range`, indexed in lexicographic order.
fn half_sums(sys: &PolySystem, range: std::ops::Range<usize>) -> Vec<FixedReal> {
    let mut sums = vec![FixedReal::ZERO];
    for i in range {
        let table = &sys.tables[i];
        sums = sums
            .iter()
            .flat_map(|&acc| table.iter().map(move |&v| acc.wrapping_add(v)))
            .collect();
    }
    sums
}

/// Scans the whole box `0 <= x <= X`, `x != 0`.
pub fn exhaustive_min(sys: &PolySystem, budget: u64) -> Result<MinResult> {
    check_budget("exhaustive box", sys.box_size(sys.s()), budget)?;
    let s = sys.s();
    let rest = half_sums(sys, 1..s);
    let width = rest.len() as u64;
    let best = sys.tables[0]
        .par_iter()
        .enumerate()
        .map(|(x0, &head)| {
            let mut best: Option<Candidate> = None;
            for (j, &r) in rest.iter().enumerate() {
                let idx = x0 as u64 * width + j as u64;
                if idx == 0 {
                    continue;
                }
                let n = head.wrapping_add(r).norm();
                if best.is_none_or(|(b, _)| n < b) {
                    best = Some((n, idx));
                }
            }
            best
        })
        .reduce(|| None, better)
        .expect("box has a nonzero point");
    Ok(finish(sys, best.1, Engine::Exhaustive))
}

/// Meet in the middle: sort the right half-sums and look up the circular
/// neighbours of `-left` for each left half.
pub fn mitm_min(sys: &PolySystem, budget: u64) -> Result<MinResult> {
    let s = sys.s();
    if s == 1 {
        return exhaustive_min(sys, budget).map(|r| MinResult {
            engine: Engine::Mitm,
            ..r
        });
    }
    let split = s.div_ceil(2);
    check_budget("meet-in-the-middle half", sys.box_size(split), budget)?;
    let left = half_sums(sys, 0..split);
    let right_raw = half_sums(sys, split..s);
    let width = right_raw.len() as u64;
    let mut right: Vec<(FixedReal, u64)> = right_raw
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u64))
        .collect();
    right.par_sort_unstable();
    let run_start = |pos: usize| -> usize {
        let v = right[pos].0;
        right.partition_point(|e| e.0 < v)
    };
    let best = left
        .par_iter()
        .enumerate()
        .map(|(a, &l)| {
            let base = a as u64 * width;
            if a == 0 {
                // all-zero left half: exclude b = 0
                let mut best: Option<Candidate> = None;
                for (j, &r) in right_raw.iter().enumerate().skip(1) {
                    let n = r.norm();
                    if best.is_none_or(|(b, _)| n < b) {
                        best = Some((n, j as u64));
                    }
                }
                return best;
            }
            let target = l.wrapping_neg();
            let succ = right.partition_point(|e| e.0 < target);
            let succ = if succ == right.len() { 0 } else { succ };
            let pred = if succ == 0 { right.len() - 1 } else { succ - 1 };
            let pred = run_start(pred);
            let cand = |p: usize| (l.wrapping_add(right[p].0).norm(), base + right[p].1);
            better(Some(cand(succ)), Some(cand(pred)))
        })
        .reduce(|| None, better)
        .expect("box has a nonzero point");
    Ok(finish(sys, best.1, Engine::Mitm))
}

/// Best of `samples` uniformly random nonzero points.
pub fn random_min<R: Rng + ?Sized>(
    sys: &PolySystem,
    samples: u64,
    rng: &mut R,
) -> Result<MinResult> {
    if samples == 0 {
        return Err(Error::OutOfRange("need at least one sample".into()));
    }
    let mut best: Option<(FixedReal, Vec<u64>)> = None;
    let mut drawn = 0;
    while drawn < samples {
        let p: Vec<u64> = (0..sys.s()).map(|_| rng.gen_range(0..=sys.x)).collect();
        if p.iter().all(|&v| v == 0) {
            continue;
        }
        drawn += 1;
        let n = sys.eval(&p).norm();
        if best
            .as_ref()
            .is_none_or(|(b, q)| n < *b || (n == *b && p < *q))
        {
            best = Some((n, p));
        }
    }
    let (norm, argmin) = best.expect("at least one sample");
    Ok(MinResult {
        value: norm.to_f64(),
        norm,
        argmin,
        engine: Engine::Random,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    T11,
    T12,
    T41,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::T11 => "T11",
            Theorem::T12 => "T12",
            Theorem::T41 => "T41",
        })
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T11" => Ok(Theorem::T11),
            "T12" => Ok(Theorem::T12),
            "T41" => Ok(Theorem::T41),
            _ => Err(Error::Parse {
                what: "theorem",
                input: s.into(),
            }),
        }
    }
}

/// `Strict` requires the theorem's hypotheses; `Proxy` evaluates the same
/// target at scales where they fail (small `k`, few variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Strict,
    Proxy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inapplicable => "inapplicable",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub verdict: Verdict,
    /// Hypotheses of the theorem hold for `(profile, s)`; `X` large is not checkable.
    pub hypotheses: bool,
    /// Exponent `sigma` in `X^{-sigma + eps}`; `None` when undefined.
    pub sigma_target: Option<f64>,
    pub threshold: Option<f64>,
    pub value: f64,
}

/// Target exponent and whether the hypotheses on `(k, t, s)` hold.
fn theorem_target(profile: &ExponentProfile, s: u64, theorem: Theorem) -> (bool, Option<f64>) {
    let k = profile.k() as u64;
    let t = profile.t();
    match theorem {
        Theorem::T11 => (t == 1 && k >= 6 && 2 * s >= k * (k + 1), Some(1.0)),
        Theorem::T12 => {
            let report = thresholds(profile);
            (k >= 6 && t >= 2 && report.thm12_applies(s), Some(1.0))
        }
        Theorem::T41 => {
            let ok = t == 1 && k >= 6 && s >= k + 2;
            let sigma = if 2 * s >= k * (k + 1) {
                Some(1.0)
            } else if s >= k + 2 {
                sigma_sk(s, k).ok().map(|r| rational_to_f64(&r))
            } else if s < k * (k + 1) {
                Some((s as f64 / (k * (k + 1) - s) as f64).min(1.0))
            } else {
                None
            };
            (ok, sigma)
        }
    }
}

/// Compares `result.value` with `X^{-sigma + eps}`. Never an error: the
/// theorems hold only for large `X` with unstated constants.
pub fn bound_check(
    sys: &PolySystem,
    result: &MinResult,
    theorem: Theorem,
    mode: CheckMode,
    eps: f64,
) -> BoundReport {
    let (hypotheses, sigma) = theorem_target(sys.profile(), sys.s() as u64, theorem);
    let mut report = BoundReport {
        theorem,
        verdict: Verdict::Inapplicable,
        hypotheses,
        sigma_target: sigma,
        threshold: None,
        value: result.value,
    };
    if mode == CheckMode::Strict && !hypotheses {
        return report;
    }
    let Some(sigma) = sigma else {
        return report;
    };
    let threshold = (sys.x() as f64).powf(-sigma + eps);
    report.threshold = Some(threshold);
    report.verdict = if result.value <= threshold {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    report
}

/// `h` in `[1, H]` grouped by which `h alpha_{1j}` lie in `M_2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPartition {
    pub classes: BTreeMap<u64, Vec<u64>>,
}

impl HPartition {
    pub fn mask_of(&self, h: u64) -> Option<u64> {
        self.classes
            .iter()
            .find(|(_, hs)| hs.binary_search(&h).is_ok())
            .map(|(&m, _)| m)
    }
}

/// Bit `j` of the mask of `h` is set when `h alpha_j` lies in the major arcs `M_2`.
pub fn h_partition(
    alphas: &[FixedReal],
    h: u64,
    x: u64,
    k: u32,
    budget: u64,
) -> Result<HPartition> {
    if alphas.is_empty() || alphas.len() > MAX_VARIABLES {
        return Err(Error::OutOfRange(format!(
            "s = {} must lie in 1..={MAX_VARIABLES}",
            alphas.len()
        )));
    }
    check_budget("H range", h as f64, budget)?;
    let masks: Vec<Result<u64>> = (1..=h)
        .into_par_iter()
        .map(|hh| {
            let mut mask = 0;
            for (j, a) in alphas.iter().enumerate() {
                if classify_arc(a.wrapping_mul_u64(hh), x, k, 2)?.major {
                    mask |= 1 << j;
                }
            }
            Ok(mask)
        })
        .collect();
    let mut classes: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (hh, mask) in (1..=h).zip(masks) {
        classes.entry(mask?).or_default().push(hh);
    }
    Ok(HPartition { classes })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma42Report {
    /// `sum_{h <= H} |sum_n e(h x_n)|`
    pub value: f64,
    /// `min_n ||x_n|| >= 1/H`
    pub hypothesis: bool,
    /// `value / N`
    pub ratio: f64,
}

pub fn lemma42_sum(xs: &[FixedReal], h: f64) -> Result<Lemma42Report> {
    if !(h.is_finite() && h >= 1.0) {
        return Err(Error::OutOfRange(format!("H = {h} must be at least 1")));
    }
    if xs.is_empty() {
        return Err(Error::InsufficientData("empty sequence".into()));
    }
    let hmax = h.floor() as u64;
    let mut total = crate::expsum::CompensatedSum::default();
    for hh in 1..=hmax {
        let mut inner = CompensatedComplex::default();
        for x in xs {
            inner.add(ComplexValue::unit(x.wrapping_mul_u64(hh)));
        }
        total.add(inner.value().abs());
    }
    let hypothesis = xs.iter().all(|x| x.norm_f64() * h >= 1.0);
    let value = total.value();
    Ok(Lemma42Report {
        value,
        hypothesis,
        ratio: value / xs.len() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylScan {
    /// `max_{h <= H} |sum_x e(h phi(x))| / X`
    pub normalized_max: f64,
    pub argmax_h: u64,
    /// Coefficients lie on the minor arcs used as the gate.
    pub gate_minor: bool,
}

/// Large values of the Weyl sum of `h phi` with `phi(x) = sum_j alpha_j x^{k_j}`.
/// The gate is `M^H` for `t = 1` and the joint arcs otherwise.
pub fn weyl_large_value_scan(
    alphas: &[FixedReal],
    profile: &ExponentProfile,
    h: f64,
    x: u64,
    budget: u64,
) -> Result<WeylScan> {
    if alphas.len() != profile.t() {
        return Err(Error::OutOfRange(format!(
            "{} coefficients for a profile with t = {}",
            alphas.len(),
            profile.t()
        )));
    }
    if !(h.is_finite() && h >= 1.0) {
        return Err(Error::OutOfRange(format!("H = {h} must be at least 1")));
    }
    check_budget("Weyl scan", h.floor() * x as f64, budget)?;
    let gate_minor = if profile.t() == 1 {
        !classify_arc_h(alphas[0], x, profile.k(), h)?.major
    } else {
        !classify_joint_arc(alphas, profile, x, h)?.major
    };
    let k_max = profile.k().max(crate::expsum::DEFAULT_K_MAX);
    let phase =
        PhasePolynomial::from_terms(profile.exps().iter().copied().zip(alphas.iter().copied()))
            .and_then(|p| {
                let mut q = PhasePolynomial::with_k_max(k_max);
                for (j, a) in p.terms() {
                    q.set(j, a)?;
                }
                Ok(q)
            })?;
    let values: Vec<Result<(f64, u64)>> = (1..=h.floor() as u64)
        .into_par_iter()
        .map(|hh| Ok((eval_sum(&phase.scaled(hh as i64), x)?.abs() / x as f64, hh)))
        .collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for v in values {
        let v = v?;
        if v.0 > best.0 {
            best = v;
        }
    }
    Ok(WeylScan {
        normalized_max: best.0,
        argmax_h: best.1,
        gate_minor,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub sigma_emp: f64,
    pub max_residual: f64,
    /// `X` values dropped because the minimum was exactly zero.
    pub excluded: Vec<f64>,
}

/// `-slope` of `log min` against `log X`, skipping zero minima.
pub fn exponent_fit(runs: &[(f64, f64)]) -> Result<ExponentFit> {
    let excluded: Vec<f64> = runs.iter().filter(|r| r.1 <= 0.0).map(|r| r.0).collect();
    let kept: Vec<(f64, f64)> = runs.iter().copied().filter(|r| r.1 > 0.0).collect();
    let fit = slope_fit(&kept).map_err(|e| match e {
        Error::InsufficientData(m) => {
            Error::InsufficientData(format!("{m} ({} zero minima excluded)", excluded.len()))
        }
        other => other,
    })?;
    Ok(ExponentFit {
        sigma_emp: -fit.slope,
        max_residual: fit.max_residual,
        excluded,
    })
}

/// `log(value) / log(X)` helper for reporting, `None` at zero.
pub fn empirical_exponent(value: f64, x: u64) -> Option<f64> {
    (value > 0.0 && x > 1).then(|| -value.ln() / (x as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const B: u64 = 200_000_000;

    fn fr(n: i64, d: u64) -> FixedReal {
        FixedReal::from_ratio_i64(n, d)
    }

    fn single(k: u32, alphas: &[FixedReal], x: u64) -> PolySystem {
        let p = ExponentProfile::new(vec![k]).unwrap();
        PolySystem::new(p, alphas.iter().map(|&a| vec![a]).collect(), x).unwrap()
    }

    #[test]
    fn exhaustive_examples() {
        // 1/7 is rounded onto the binary grid, so 49/7 misses an integer by ~49 ulp
        let r = exhaustive_min(&single(2, &[fr(1, 7)], 10), B).unwrap();
        assert_eq!(r.argmin, vec![7]);
        assert!(r.value < 1e-55);
        let r = exhaustive_min(&single(2, &[FixedReal::sqrt2()], 10), B).unwrap();
        assert_eq!(r.argmin, vec![6]);
        assert!((r.value - 0.0883).abs() < 1e-4);
        let r = exhaustive_min(
            &single(
                3,
                &[FixedReal::golden(), FixedReal::ZERO, FixedReal::pi()],
                9,
            ),
            B,
        )
        .unwrap();
        assert_eq!((r.value, r.argmin), (0.0, vec![0, 1, 0]));
        assert!(exhaustive_min(&single(2, &[FixedReal::pi(); 5], 100), 1000)
            .unwrap_err()
            .is_budget());
    }

    #[test]
    fn mitm_small_cases() {
        let sys = single(2, &[FixedReal::sqrt2(), FixedReal::sqrt2()], 1);
        let r = mitm_min(&sys, B).unwrap();
        assert_eq!(r.engine, Engine::Mitm);
        // ||2 sqrt2|| < ||sqrt2||
        assert_eq!(r.argmin, vec![1, 1]);
        assert_eq!(
            r,
            MinResult {
                engine: Engine::Mitm,
                ..exhaustive_min(&sys, B).unwrap()
            }
        );
        let tie = single(2, &[FixedReal::pi(), FixedReal::pi()], 3);
        let r = mitm_min(&tie, B).unwrap();
        assert!(r.argmin[0] <= r.argmin[1]);
        assert_eq!(r.argmin, exhaustive_min(&tie, B).unwrap().argmin);
        let r = mitm_min(&single(2, &[fr(1, 7)], 10), B).unwrap();
        assert_eq!(r.argmin, vec![7]);
    }

    #[test]
    fn engines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..100 {
            let k = rng.gen_range(3..=5u32);
            let profile = if i % 2 == 0 {
                ExponentProfile::new(vec![k]).unwrap()
            } else {
                ExponentProfile::new(vec![k, 1]).unwrap()
            };
            let s = rng.gen_range(1..=4usize);
            let x = rng.gen_range(1..=if s == 4 { 20 } else { 50 });
            let sys = if i % 5 == 0 {
                // rational coefficients produce ties
                let coeffs = (0..s)
                    .map(|_| {
                        (0..profile.t())
                            .map(|_| fr(rng.gen_range(0..6), 6))
                            .collect()
                    })
                    .collect();
                PolySystem::new(profile, coeffs, x).unwrap()
            } else {
                PolySystem::random(profile, s, x, &mut rng).unwrap()
            };
            let e = exhaustive_min(&sys, B).unwrap();
            let m = mitm_min(&sys, B).unwrap();
            assert_eq!((e.norm, &e.argmin), (m.norm, &m.argmin));
            assert_eq!(sys.eval(&e.argmin).norm(), e.norm);
            assert!(e.argmin.iter().any(|&v| v != 0));
        }
    }

    #[test]
    fn monotone_in_x_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..30 {
            let p = ExponentProfile::new(vec![3]).unwrap();
            let sys = PolySystem::random(p, 3, 8, &mut rng).unwrap();
            let small = exhaustive_min(&sys, B).unwrap();
            let large = exhaustive_min(&sys.with_x(12).unwrap(), B).unwrap();
            assert!(large.norm <= small.norm);
            let m = rng.gen_range(2..=5u64);
            let scaled = exhaustive_min(&sys.scaled(m).unwrap(), B).unwrap();
            assert!(scaled.value <= m as f64 * small.value + 1e-15);
        }
    }

    #[test]
    fn random_engine_is_an_upper_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let sys = single(2, &[FixedReal::pi(), FixedReal::golden()], 30);
        let r = random_min(&sys, 200, &mut rng).unwrap();
        assert!(r.norm >= exhaustive_min(&sys, B).unwrap().norm);
        assert_eq!(sys.eval(&r.argmin).norm(), r.norm);
    }

    #[test]
    fn bound_check_gates() {
        let sys = single(6, &[FixedReal::pi(); 3], 4);
        let r = exhaustive_min(&sys, B).unwrap();
        let rep = bound_check(&sys, &r, Theorem::T11, CheckMode::Strict, 0.05);
        assert_eq!(rep.verdict, Verdict::Inapplicable);
        let rep = bound_check(&sys, &r, Theorem::T11, CheckMode::Proxy, 0.05);
        assert_ne!(rep.verdict, Verdict::Inapplicable);
        let zero = MinResult {
            value: 0.0,
            norm: FixedReal::ZERO,
            argmin: vec![1, 0, 0],
            engine: Engine::Exhaustive,
        };
        for th in [Theorem::T11, Theorem::T12, Theorem::T41] {
            assert_ne!(
                bound_check(&sys, &zero, th, CheckMode::Proxy, 0.05).verdict,
                Verdict::Fail
            );
        }
        let big = single(6, &[FixedReal::pi(); 21], 2);
        let rep = bound_check(&big, &zero, Theorem::T11, CheckMode::Strict, 0.05);
        assert!(rep.hypotheses && rep.verdict == Verdict::Pass);
        let rep = bound_check(&sys, &zero, Theorem::T41, CheckMode::Proxy, 0.05);
        assert_eq!(rep.sigma_target, Some(3.0 / 39.0));
        // T12 needs t >= 2
        assert!(!bound_check(&big, &zero, Theorem::T12, CheckMode::Strict, 0.05).hypotheses);
    }

    #[test]
    fn h_partition_examples() {
        let part = h_partition(&[fr(1, 3)], 20, 10, 3, B).unwrap();
        assert_eq!(part.classes.len(), 1);
        assert_eq!(part.classes[&1].len(), 20);
        let alphas = [fr(1, 3), FixedReal::sqrt2()];
        let part = h_partition(&alphas, 4, 5, 3, B).unwrap();
        for h in 1..=4u64 {
            let mut want = 0;
            for (j, a) in alphas.iter().enumerate() {
                if crate::diophantine::scan::classify_arc(a.wrapping_mul_u64(h), 5, 3, 2) {
                    want |= 1 << j;
                }
            }
            assert_eq!(part.mask_of(h), Some(want));
        }
        let all: Vec<u64> = {
            let mut v: Vec<u64> = part.classes.values().flatten().copied().collect();
            v.sort();
            v
        };
        assert_eq!(all, vec![1, 2, 3, 4]);
    }

    #[test]
    fn h_partition_of_badly_approximable() {
        let part = h_partition(&[FixedReal::golden()], 200, 3, 2, B).unwrap();
        for (&mask, hs) in &part.classes {
            for &h in hs {
                let major = crate::diophantine::scan::classify_arc(
                    FixedReal::golden().wrapping_mul_u64(h),
                    3,
                    2,
                    2,
                );
                assert_eq!(mask == 1, major);
            }
        }
        assert_eq!(part.classes.values().map(Vec::len).sum::<usize>(), 200);
    }

    #[test]
    fn lemma42_examples() {
        let xs = vec![fr(1, 2); 7];
        let r = lemma42_sum(&xs, 2.0).unwrap();
        assert!((r.value - 14.0).abs() < 1e-12 && r.hypothesis);
        assert!((r.ratio - 2.0).abs() < 1e-12);
        assert!(!lemma42_sum(&[FixedReal::ZERO; 3], 1e4).unwrap().hypothesis);
        assert!(lemma42_sum(&xs, 0.5).is_err());
    }

    #[test]
    fn weyl_scan_examples() {
        let p = ExponentProfile::new(vec![2]).unwrap();
        let r = weyl_large_value_scan(&[FixedReal::sqrt2()], &p, 50.0, 200, B).unwrap();
        assert!(r.gate_minor && r.normalized_max < 1.0);
        let r = weyl_large_value_scan(&[FixedReal::ZERO], &p, 50.0, 200, B).unwrap();
        assert!(!r.gate_minor && (r.normalized_max - 1.0).abs() < 1e-12);
        let r = weyl_large_value_scan(&[fr(1, 3)], &p, 10.0, 100, B).unwrap();
        assert!(!r.gate_minor);
        let p2 = ExponentProfile::new(vec![3, 1]).unwrap();
        let r = weyl_large_value_scan(&[FixedReal::pi(), FixedReal::sqrt2()], &p2, 5.0, 100, B)
            .unwrap();
        assert!(r.normalized_max <= 1.0);
    }

    #[test]
    fn exponent_fit_examples() {
        let inv: Vec<(f64, f64)> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&x: &f64| (x, 1.0 / x))
            .collect();
        assert!((exponent_fit(&inv).unwrap().sigma_emp - 1.0).abs() < 1e-9);
        let flat = [(10.0, 0.2), (20.0, 0.2), (40.0, 0.2)];
        assert!(exponent_fit(&flat).unwrap().sigma_emp.abs() < 1e-12);
        let mixed = [(10.0, 0.1), (20.0, 0.0), (40.0, 0.025), (80.0, 0.0125)];
        let f = exponent_fit(&mixed).unwrap();
        assert_eq!(f.excluded, vec![20.0]);
        assert!(exponent_fit(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.5)]).is_err());
    }
}
