//! Mean values of exponential sums computed as exact solution counts.
//!
//! By orthogonality the `2s`-th moment of `F(alpha) = sum_{x<=X} e(sum_j alpha_j x^{k_j})`
//! over the torus equals the number of pairs of `s`-tuples with equal power
//! sums. Integrating over some coordinates only leaves a finite trigonometric
//! sum `sum_d c_d e(alpha d)`, kept here as a [`SolutionDistribution`].

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::diophantine::ArcSet;
use crate::error::{check_budget, Error, Result};
use crate::expsum::{CompensatedComplex, CompensatedSum, ComplexValue};
use crate::fixed::FixedReal;
use crate::kprofile::ExponentProfile;

pub const DEFAULT_BUDGET: u64 = 200_000_000;

/// Dense accumulation is used for distributions up to this many cells.
const DENSE_LIMIT: u128 = 1 << 26;

/// A strictly decreasing list of positive exponents defining the system
/// `sum x_i^{k_j} = sum y_i^{k_j}` for every `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PowerSystem {
    exps: Vec<u32>,
}

impl PowerSystem {
    pub fn new(exps: Vec<u32>) -> Result<Self> {
        if exps.is_empty() {
            return Err(Error::InvalidProfile("empty exponent list".into()));
        }
        if exps.contains(&0) {
            return Err(Error::InvalidProfile("exponents must be positive".into()));
        }
        if exps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidProfile(
                "exponents must be strictly decreasing".into(),
            ));
        }
        Ok(PowerSystem { exps })
    }

    /// The full Vinogradov system `k, k-1, ..., 1`.
    pub fn vinogradov(k: u32) -> Result<Self> {
        PowerSystem::new((1..=k).rev().collect())
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn leading(&self) -> u32 {
        self.exps[0]
    }

    /// The exponents after the leading one (possibly empty).
    pub fn tail(&self) -> &[u32] {
        &self.exps[1..]
    }
}

impl From<&ExponentProfile> for PowerSystem {
    fn from(p: &ExponentProfile) -> Self {
        PowerSystem {
            exps: p.exps().to_vec(),
        }
    }
}

impl fmt::Display for PowerSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exps.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Brute,
    Hashed,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Brute => "brute",
            Backend::Hashed => "hashed",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Backend::Brute),
            "hashed" => Ok(Backend::Hashed),
            _ => Err(Error::Parse {
                what: "backend",
                input: s.into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub count: BigUint,
    pub elapsed: Duration,
    pub backend: Backend,
}

fn power_table(x: u64, exps: &[u32]) -> Result<Vec<Vec<u128>>> {
    (1..=x)
        .map(|v| {
            exps.iter()
                .map(|&e| {
                    (v as u128)
                        .checked_pow(e)
                        .ok_or(Error::Overflow("power sums"))
                })
                .collect()
        })
        .collect()
}

fn check_params(s: u64, x: u64) -> Result<()> {
    if s == 0 || x == 0 {
        Err(Error::OutOfRange("s and X must be positive".into()))
    } else {
        Ok(())
    }
}

fn pow_f(x: u64, e: u64) -> f64 {
    (x as f64).powf(e as f64)
}

/// Power-sum keys of all nondecreasing `s`-tuples starting at `first`, each
/// with its number of orderings. Calls `visit(key, leading, weight)` where
/// `key` holds the sums for `exps[1..]` and `leading` the sum for `exps[0]`.
fn walk_nondecreasing(
    table: &[Vec<u128>],
    s: usize,
    first: usize,
    mut visit: impl FnMut(&[u128], u128, u128),
) -> Result<()> {
    let t = table[0].len();
    let mut tuple = vec![first; s];
    let fact: Vec<u128> = (0..=s as u128)
        .scan(1u128, |acc, i| {
            if i > 0 {
                *acc *= i;
            }
            Some(*acc)
        })
        .collect();
    let mut sums = vec![0u128; t];
    loop {
        sums.iter_mut().for_each(|v| *v = 0);
        for &v in &tuple {
            for (acc, p) in sums.iter_mut().zip(&table[v]) {
                *acc = acc.checked_add(*p).ok_or(Error::Overflow("power sums"))?;
            }
        }
        let mut weight = fact[s];
        let mut run = 1;
        for i in 1..=s {
            if i < s && tuple[i] == tuple[i - 1] {
                run += 1;
            } else {
                weight /= fact[run];
                run = 1;
            }
        }
        visit(&sums[1..], sums[0], weight);
        // next nondecreasing tuple with tuple[0] fixed
        let mut i = s;
        loop {
            if i <= 1 {
                return Ok(());
            }
            i -= 1;
            if tuple[i] + 1 < table.len() {
                let v = tuple[i] + 1;
                for slot in tuple[i..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Multiplicities `r(v)` of the full key `v`, merged over workers.
fn key_counts(table: &[Vec<u128>], s: usize) -> Result<HashMap<Vec<u128>, u128>> {
    let parts: Vec<Result<HashMap<Vec<u128>, u128>>> = (0..table.len())
        .into_par_iter()
        .map(|first| {
            let mut map: HashMap<Vec<u128>, u128> = HashMap::new();
            walk_nondecreasing(table, s, first, |rest, lead, w| {
                let mut key = Vec::with_capacity(rest.len() + 1);
                key.push(lead);
                key.extend_from_slice(rest);
                *map.entry(key).or_insert(0) += w;
            })?;
            Ok(map)
        })
        .collect();
    let mut total: HashMap<Vec<u128>, u128> = HashMap::new();
    for part in parts {
        for (k, v) in part? {
            *total.entry(k).or_insert(0) += v;
        }
    }
    Ok(total)
}

fn hashed_count(table: &[Vec<u128>], s: usize) -> Result<BigUint> {
    let counts = key_counts(table, s)?;
    let mut total = BigUint::zero();
    for r in counts.values() {
        total += BigUint::from(*r) * BigUint::from(*r);
    }
    Ok(total)
}

/// All ordered `s`-tuples with their keys, then all ordered pairs.
fn brute_count(table: &[Vec<u128>], s: usize) -> Result<BigUint> {
    let x = table.len();
    let t = table[0].len();
    let total = x.pow(s as u32);
    let mut keys: Vec<Vec<u128>> = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut key = vec![0u128; t];
        for _ in 0..s {
            let v = idx % x;
            idx /= x;
            for (acc, p) in key.iter_mut().zip(&table[v]) {
                *acc = acc.checked_add(*p).ok_or(Error::Overflow("power sums"))?;
            }
        }
        keys.push(key);
    }
    let count: u64 = keys
        .par_iter()
        .map(|a| keys.iter().filter(|b| *b == a).count() as u64)
        .sum();
    Ok(BigUint::from(count))
}

/// Number of `(x, y)` in `[1, X]^{2s}` with equal power sums for every exponent of `system`.
pub fn system_count(
    system: &PowerSystem,
    s: u64,
    x: u64,
    backend: Backend,
    budget: u64,
) -> Result<CountResult> {
    check_params(s, x)?;
    let start = Instant::now();
    let table = power_table(x, system.exps())?;
    let count = match backend {
        Backend::Hashed => {
            check_budget("hashed key map", pow_f(x, s), budget)?;
            hashed_count(&table, s as usize)?
        }
        Backend::Brute => {
            check_budget("brute pair scan", pow_f(x, 2 * s), budget)?;
            brute_count(&table, s as usize)?
        }
    };
    Ok(CountResult {
        count,
        elapsed: start.elapsed(),
        backend,
    })
}

/// `J_{s,k}(X)`.
pub fn vinogradov_count(
    s: u64,
    k: u32,
    x: u64,
    backend: Backend,
    budget: u64,
) -> Result<CountResult> {
    system_count(&PowerSystem::vinogradov(k)?, s, x, backend, budget)
}

/// The full mean value `oint |F|^{2s}` for the profile.
pub fn profile_count(
    profile: &ExponentProfile,
    s: u64,
    x: u64,
    backend: Backend,
    budget: u64,
) -> Result<CountResult> {
    system_count(&profile.into(), s, x, backend, budget)
}

/// `d -> c_d`: pairs solving the equations for `exps[1..]`, grouped by the
/// difference `d` of the leading power sums.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionDistribution {
    pub system: PowerSystem,
    pub s: u64,
    pub x: u64,
    /// Sorted by `d`; only nonzero `c_d`.
    entries: Vec<(i128, BigUint)>,
}

impl SolutionDistribution {
    pub fn entries(&self) -> &[(i128, BigUint)] {
        &self.entries
    }

    pub fn get(&self, d: i128) -> BigUint {
        self.entries
            .binary_search_by(|(e, _)| e.cmp(&d))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_default()
    }

    /// `sum_d c_d`, the number of solutions of the subsystem.
    pub fn total(&self) -> BigUint {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with header `d,c_d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,c_d\n");
        for (d, c) in &self.entries {
            out.push_str(&format!("{d},{c}\n"));
        }
        out
    }
}

type Histograms = HashMap<Vec<u128>, HashMap<u128, u128>>;

/// Histogram of leading power sums for each key of the subsystem.
fn leading_histograms(table: &[Vec<u128>], s: usize) -> Result<Histograms> {
    let parts: Vec<Result<Histograms>> = (0..table.len())
        .into_par_iter()
        .map(|first| {
            let mut map: HashMap<Vec<u128>, HashMap<u128, u128>> = HashMap::new();
            walk_nondecreasing(table, s, first, |rest, lead, w| {
                *map.entry(rest.to_vec())
                    .or_default()
                    .entry(lead)
                    .or_insert(0) += w;
            })?;
            Ok(map)
        })
        .collect();
    let mut total: Histograms = HashMap::new();
    for part in parts {
        for (k, hist) in part? {
            let slot = total.entry(k).or_default();
            for (lead, w) in hist {
                *slot.entry(lead).or_insert(0) += w;
            }
        }
    }
    Ok(total)
}

/// Distribution of `sigma_{s,k_1}` over solutions of the equations for `k_2, ..., k_t`.
pub fn solution_distribution(
    system: &PowerSystem,
    s: u64,
    x: u64,
    budget: u64,
) -> Result<SolutionDistribution> {
    check_params(s, x)?;
    check_budget("hashed key map", pow_f(x, s), budget)?;
    let table = power_table(x, system.exps())?;
    let hists = leading_histograms(&table, s as usize)?;
    let span = (s as u128)
        .checked_mul(
            (x as u128)
                .checked_pow(system.leading())
                .ok_or(Error::Overflow("power sums"))?,
        )
        .ok_or(Error::Overflow("power sums"))?;
    let sorted: Vec<Vec<(u128, u128)>> = hists
        .into_values()
        .map(|h| {
            let mut v: Vec<(u128, u128)> = h.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect();
    let entries = if 2 * span < DENSE_LIMIT {
        correlate_dense(&sorted, span)
    } else {
        correlate_sparse(&sorted)
    };
    Ok(SolutionDistribution {
        system: system.clone(),
        s,
        x,
        entries,
    })
}

fn correlate_dense(hists: &[Vec<(u128, u128)>], span: u128) -> Vec<(i128, BigUint)> {
    let width = (2 * span + 1) as usize;
    let offset = span as i128;
    let acc = hists
        .par_iter()
        .fold(
            || vec![0u128; width],
            |mut acc, h| {
                for &(a, wa) in h {
                    for &(b, wb) in h {
                        let d = a as i128 - b as i128;
                        acc[(d + offset) as usize] += wa * wb;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u128; width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    acc.into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0)
        .map(|(i, c)| (i as i128 - offset, BigUint::from(c)))
        .collect()
}

fn correlate_sparse(hists: &[Vec<(u128, u128)>]) -> Vec<(i128, BigUint)> {
    let mut acc: HashMap<i128, BigUint> = HashMap::new();
    for h in hists {
        for &(a, wa) in h {
            for &(b, wb) in h {
                *acc.entry(a as i128 - b as i128).or_default() += BigUint::from(wa * wb);
            }
        }
    }
    let mut entries: Vec<(i128, BigUint)> = acc.into_iter().collect();
    entries.sort_unstable_by_key(|(d, _)| *d);
    entries
}

fn phase_of(alpha: FixedReal, d: i128) -> FixedReal {
    // |d| < 2^127; split into two i64 multiplications when large
    match i64::try_from(d) {
        Ok(d) => alpha.wrapping_mul_i64(d),
        Err(_) => alpha.wrapping_mul_big(&d.into()),
    }
}

fn big_to_f64(c: &BigUint) -> f64 {
    c.to_f64().unwrap_or(f64::INFINITY)
}

/// `sum_d c_d e(alpha d)`: the mean value with `alpha_{k_1} = alpha` fixed and
/// the remaining coefficients integrated out. Real by the symmetry `c_d = c_{-d}`.
pub fn restricted_meanvalue(dist: &SolutionDistribution, alpha: FixedReal) -> f64 {
    let mut sum = CompensatedSum::default();
    for (d, c) in &dist.entries {
        sum.add(big_to_f64(c) * phase_of(alpha, *d).unit().0);
    }
    sum.value()
}

fn unit_at(u: f64, d: i128) -> ComplexValue {
    ComplexValue::unit(phase_of(FixedReal::from_f64(u), d))
}

/// `int over arcs of e(alpha d) d alpha` in closed form.
pub fn arc_integral(d: i128, arcs: &ArcSet) -> ComplexValue {
    if d == 0 {
        return ComplexValue::new(arcs.measure(), 0.0);
    }
    let mut acc = CompensatedComplex::default();
    for iv in arcs.intervals() {
        let hi = if iv.hi >= 1.0 {
            ComplexValue::new(1.0, 0.0)
        } else {
            unit_at(iv.hi, d)
        };
        let diff = hi - unit_at(iv.lo, d);
        acc.add(diff);
    }
    let z = acc.value();
    let c = 2.0 * std::f64::consts::PI * d as f64;
    // z / (i c)
    ComplexValue::new(z.im / c, -z.re / c)
}

/// `int over arcs of sum_d c_d e(alpha d) d alpha`.
pub fn arc_meanvalue(dist: &SolutionDistribution, arcs: &ArcSet) -> f64 {
    let parts: Vec<f64> = dist
        .entries
        .par_iter()
        .map(|(d, c)| big_to_f64(c) * arc_integral(*d, arcs).re)
        .collect();
    let mut sum = CompensatedSum::default();
    for p in parts {
        sum.add(p);
    }
    sum.value()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Least-squares fit of `log value = slope * log X + intercept`.
pub fn slope_fit(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} points, need at least 3",
            points.len()
        )));
    }
    if points.iter().any(|&(x, v)| !(x > 0.0 && v > 0.0)) {
        return Err(Error::InsufficientData(
            "X and values must be positive".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, v)| (x.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all X values coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::ArcInterval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const B: u64 = DEFAULT_BUDGET;

    fn sys(e: &[u32]) -> PowerSystem {
        PowerSystem::new(e.to_vec()).unwrap()
    }

    fn count(system: &PowerSystem, s: u64, x: u64, backend: Backend) -> u64 {
        system_count(system, s, x, backend, B)
            .unwrap()
            .count
            .to_u64()
            .unwrap()
    }

    #[test]
    fn vinogradov_examples() {
        for k in 1..=4 {
            assert_eq!(
                vinogradov_count(1, k, 17, Backend::Hashed, B)
                    .unwrap()
                    .count,
                17u32.into()
            );
        }
        for x in [5u64, 10, 20, 30] {
            let want = 2 * x * x - x;
            let h = vinogradov_count(2, 2, x, Backend::Hashed, B).unwrap();
            assert_eq!(h.count, want.into());
            let b = vinogradov_count(2, 2, x, Backend::Brute, B).unwrap();
            assert_eq!(b.count, want.into());
        }
    }

    #[test]
    fn profile_examples() {
        let p = ExponentProfile::new(vec![5]).unwrap();
        assert_eq!(
            profile_count(&p, 1, 9, Backend::Hashed, B).unwrap().count,
            9u32.into()
        );
        let p = ExponentProfile::new(vec![3, 1]).unwrap();
        assert_eq!(
            profile_count(&p, 2, 6, Backend::Hashed, B).unwrap().count,
            profile_count(&p, 2, 6, Backend::Brute, B).unwrap().count
        );
        for x in 1..=12 {
            assert_eq!(count(&sys(&[2, 1]), 2, x, Backend::Hashed), 2 * x * x - x);
        }
    }

    #[test]
    fn budget_and_validation() {
        let e = vinogradov_count(3, 2, 1000, Backend::Hashed, 1000).unwrap_err();
        assert!(e.is_budget());
        assert!(vinogradov_count(2, 2, 100, Backend::Brute, 1000)
            .unwrap_err()
            .is_budget());
        assert!(PowerSystem::new(vec![1, 2]).is_err());
        assert!(PowerSystem::new(vec![]).is_err());
        assert!(vinogradov_count(0, 2, 5, Backend::Hashed, B).is_err());
    }

    #[test]
    fn multiset_weights_match_plain_enumeration() {
        // sum of weights over nondecreasing tuples = X^s
        let table = power_table(7, &[1]).unwrap();
        for s in 1..=4 {
            let mut total = 0u128;
            for first in 0..7 {
                walk_nondecreasing(&table, s, first, |_, _, w| total += w).unwrap();
            }
            assert_eq!(total, 7u128.pow(s as u32));
        }
    }

    #[test]
    fn backends_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut done = 0;
        while done < 50 {
            let k = rng.gen_range(1..=5u32);
            let mut exps: Vec<u32> = (1..=k).rev().filter(|_| rng.gen_bool(0.6)).collect();
            if exps.is_empty() {
                exps.push(k);
            }
            let s = rng.gen_range(1..=3u64);
            let x = rng.gen_range(1..=12u64);
            if pow_f(x, 2 * s) > 1e7 {
                continue;
            }
            let system = sys(&exps);
            assert_eq!(
                count(&system, s, x, Backend::Hashed),
                count(&system, s, x, Backend::Brute),
                "{system} s={s} X={x}"
            );
            done += 1;
        }
    }

    #[test]
    fn distribution_examples() {
        let d = solution_distribution(&sys(&[3, 1]), 1, 2, B).unwrap();
        assert_eq!(d.entries(), &[(0, BigUint::from(2u32))]);
        let d = solution_distribution(&sys(&[2]), 1, 2, B).unwrap();
        assert_eq!(
            d.entries(),
            &[
                (-3, BigUint::from(1u32)),
                (0, BigUint::from(2u32)),
                (3, BigUint::from(1u32))
            ]
        );
        let d = solution_distribution(&sys(&[3, 1]), 2, 5, B).unwrap();
        assert_eq!(
            d.total(),
            system_count(&sys(&[1]), 2, 5, Backend::Hashed, B)
                .unwrap()
                .count
        );
        assert_eq!(
            d.get(0),
            system_count(&sys(&[3, 1]), 2, 5, Backend::Hashed, B)
                .unwrap()
                .count
        );
        for (dd, c) in d.entries() {
            assert_eq!(&d.get(-dd), c);
        }
        assert!(d.to_csv().starts_with("d,c_d\n"));
    }

    #[test]
    fn sparse_and_dense_correlation_agree() {
        let table = power_table(6, &[3, 1]).unwrap();
        let hists: Vec<Vec<(u128, u128)>> = leading_histograms(&table, 2)
            .unwrap()
            .into_values()
            .map(|h| {
                let mut v: Vec<_> = h.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        assert_eq!(correlate_dense(&hists, 2 * 216), correlate_sparse(&hists));
    }

    /// `oint |F(alpha, beta)|^{2s} d beta` over the trailing coefficients by an
    /// `n`-point rectangle rule per dimension, exact once `n` exceeds the degree.
    fn quadrature(system: &PowerSystem, s: u64, x: u64, alpha: FixedReal, n: u64) -> f64 {
        let tail = system.tail();
        let dims = tail.len() as u32;
        let mut total = 0.0;
        for idx in 0..n.pow(dims) {
            let mut betas = Vec::new();
            let mut r = idx;
            for _ in 0..dims {
                betas.push(FixedReal::from_ratio_i64((r % n) as i64, n));
                r /= n;
            }
            let mut f = ComplexValue::ZERO;
            for v in 1..=x as i64 {
                let mut ph = alpha.wrapping_mul_i64(v.pow(system.leading()));
                for (b, &e) in betas.iter().zip(tail) {
                    ph = ph.wrapping_add(b.wrapping_mul_i64(v.pow(e)));
                }
                f = f + ComplexValue::unit(ph);
            }
            total += (f.abs() * f.abs()).powi(s as i32);
        }
        total / n.pow(dims) as f64
    }

    #[test]
    fn restricted_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for (exps, s, x) in [
            (vec![3u32, 1], 2u64, 4u64),
            (vec![3, 1], 1, 3),
            (vec![4, 2, 1], 2, 3),
            (vec![2], 2, 4),
        ] {
            let system = sys(&exps);
            let dist = solution_distribution(&system, s, x, B).unwrap();
            let n = 2 * s * x.pow(system.exps().get(1).copied().unwrap_or(1)) + 1;
            for _ in 0..5 {
                let alpha = FixedReal::random(&mut rng);
                let exact = restricted_meanvalue(&dist, alpha);
                let quad = quadrature(&system, s, x, alpha, n);
                assert!(
                    (exact - quad).abs() <= 1e-8 * quad.abs().max(1.0),
                    "{exact} vs {quad}"
                );
            }
        }
        let dist = solution_distribution(&sys(&[3, 1]), 1, 2, B).unwrap();
        assert!((restricted_meanvalue(&dist, FixedReal::golden()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn restricted_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let dist = solution_distribution(&sys(&[3, 1]), 2, 6, B).unwrap();
        assert_eq!(
            restricted_meanvalue(&dist, FixedReal::ZERO),
            big_to_f64(&dist.total())
        );
        for _ in 0..1000 {
            assert!(restricted_meanvalue(&dist, FixedReal::random(&mut rng)) >= -1e-9);
        }
    }

    #[test]
    fn arc_integral_examples() {
        let arcs = ArcSet::major_arcs(10, 3, 2).unwrap();
        assert_eq!(arc_integral(0, &arcs).re, arcs.measure());
        let full = ArcSet::full();
        for d in [1i128, -7, 1000, 123_456_789] {
            assert!(arc_integral(d, &full).abs() < 1e-15);
        }
        let half = ArcSet::from_intervals(vec![ArcInterval {
            lo: 0.0,
            hi: 0.5,
            q: 1,
            a: 0,
        }]);
        let z = arc_integral(1, &half);
        assert!(z.re.abs() < 1e-15 && (z.im - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn arc_meanvalue_by_hand() {
        // profile (2), s = 1, X = 2: c = {0: 2, 3: 1, -3: 1}
        let dist = solution_distribution(&sys(&[2]), 1, 2, B).unwrap();
        let arcs = ArcSet::major_arcs(2, 2, 2).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut want = 2.0 * arcs.measure();
        for iv in arcs.intervals() {
            want += 2.0 * ((two_pi * 3.0 * iv.hi).sin() - (two_pi * 3.0 * iv.lo).sin())
                / (two_pi * 3.0);
        }
        assert!((arc_meanvalue(&dist, &arcs) - want).abs() < 1e-12);
        // fine-grid midpoint rule
        let n = 200_000;
        let mut quad = 0.0;
        for i in 0..n {
            let a = (i as f64 + 0.5) / n as f64;
            if arcs.contains(a) {
                quad += (2.0 + 2.0 * (two_pi * 3.0 * a).cos()) / n as f64;
            }
        }
        assert!((quad - want).abs() < 1e-4);
    }

    #[test]
    fn arc_additivity() {
        for (exps, x) in [
            (vec![2u32], 4u64),
            (vec![2], 8),
            (vec![3, 1], 4),
            (vec![3, 1], 8),
        ] {
            let system = sys(&exps);
            let k = system.leading();
            let dist = solution_distribution(&system, 2, x, B).unwrap();
            let major = ArcSet::major_arcs(x, k, 2).unwrap();
            let total = system_count(&system, 2, x, Backend::Hashed, B)
                .unwrap()
                .count;
            let sum = arc_meanvalue(&dist, &major) + arc_meanvalue(&dist, &major.complement());
            let total = big_to_f64(&total);
            assert!((sum - total).abs() <= 1e-6 * total);
            assert!((arc_meanvalue(&dist, &ArcSet::full()) - total).abs() <= 1e-9 * total);
        }
    }

    #[test]
    fn slope_examples() {
        let cube: Vec<(f64, f64)> = [2.0, 3.0, 5.0, 8.0]
            .iter()
            .map(|&x: &f64| (x, x.powi(3)))
            .collect();
        let f = slope_fit(&cube).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-9 && f.max_residual < 1e-9);
        let flat = [(1.0, 4.0), (2.0, 4.0), (3.0, 4.0)];
        assert!(slope_fit(&flat).unwrap().slope.abs() < 1e-12);
        let j: Vec<(f64, f64)> = [5.0, 10.0, 20.0, 30.0]
            .iter()
            .map(|&x: &f64| (x, 2.0 * x * x - x))
            .collect();
        // local slope (4X-1)/(2X-1) exceeds 2 and tends to it from above
        let s = slope_fit(&j).unwrap().slope;
        assert!((s - 2.049_092).abs() < 1e-5);
        assert!(slope_fit(&flat[..2]).is_err());
        assert!(slope_fit(&[(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
    }
}
