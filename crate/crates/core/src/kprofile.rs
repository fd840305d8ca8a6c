//! Exponent calculus: every quantity that depends on the exponent tuple
//! `k = (k_1, ..., k_t)` alone.
//!
//! All results here are exact rationals or integers. The only floating-point
//! output is [`r_l_factor`], whose inputs include the real parameters `q`, `X`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A strictly decreasing tuple `k_1 > k_2 > ... > k_t >= 1` with `t < k_1`,
/// together with its missing exponents `i_1 > ... > i_{k-t}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentProfile {
    exps: Vec<u32>,
    missing: Vec<u32>,
}

impl ExponentProfile {
    pub fn new(exps: Vec<u32>) -> Result<Self> {
        let Some(&k) = exps.first() else {
            return Err(Error::InvalidProfile("empty profile".into()));
        };
        if exps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidProfile(format!(
                "{exps:?} is not strictly decreasing"
            )));
        }
        if *exps.last().unwrap() < 1 {
            return Err(Error::InvalidProfile("exponents must be positive".into()));
        }
        if exps.len() >= k as usize {
            return Err(Error::InvalidProfile(format!(
                "{exps:?} has t = {} but needs t < k_1 = {k}",
                exps.len()
            )));
        }
        let missing = (1..=k).rev().filter(|i| !exps.contains(i)).collect();
        Ok(ExponentProfile { exps, missing })
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    /// The leading exponent `k = k_1`.
    pub fn k(&self) -> u32 {
        self.exps[0]
    }

    pub fn t(&self) -> usize {
        self.exps.len()
    }

    /// Missing exponents in descending order; `missing()[l - 1]` is `i_l`.
    pub fn missing(&self) -> &[u32] {
        &self.missing
    }

    /// `i_l` for `1 <= l <= k - t`.
    pub fn missing_at(&self, l: usize) -> Result<u32> {
        self.check_l(l)?;
        Ok(self.missing[l - 1])
    }

    pub(crate) fn check_l(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.missing.len() {
            Err(Error::OutOfRange(format!(
                "l = {l} outside 1..={} for profile {self}",
                self.missing.len()
            )))
        } else {
            Ok(())
        }
    }

    /// `D = k_1 + ... + k_t`.
    pub fn degree_sum(&self) -> u64 {
        self.exps.iter().map(|&k| k as u64).sum()
    }

    /// `2p = (k - i_l)(k - i_l + 1)`, the moment used with index `l`.
    pub fn two_p(&self, l: usize) -> Result<u64> {
        let i = self.missing_at(l)? as u64;
        let k = self.k() as u64;
        Ok((k - i) * (k - i + 1))
    }
}

impl fmt::Display for ExponentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exps.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for ExponentProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let exps = s
            .split(',')
            .map(|p| {
                p.trim().parse::<u32>().map_err(|_| Error::Parse {
                    what: "exponent profile",
                    input: s.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ExponentProfile::new(exps)
    }
}

pub fn missing_exponents(profile: &ExponentProfile) -> Vec<u32> {
    profile.missing.clone()
}

/// `sigma(k)` and the smallest index `l` attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaExponent {
    pub value: BigRational,
    pub l: usize,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `max over l of l / ((k - i_l)(k - i_l + 1))`, ties broken toward the smallest `l`.
pub fn sigma_exponent(profile: &ExponentProfile) -> SigmaExponent {
    let k = profile.k() as u64;
    let mut best: Option<SigmaExponent> = None;
    for (idx, &i) in profile.missing.iter().enumerate() {
        let l = idx + 1;
        let i = i as u64;
        let term = ratio(l as u64, (k - i) * (k - i + 1));
        if best.as_ref().is_none_or(|b| term > b.value) {
            best = Some(SigmaExponent { value: term, l });
        }
    }
    // t < k guarantees at least one missing exponent
    best.expect("profile has a missing exponent")
}

/// Variable-count thresholds and derived constants of a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdReport {
    pub sigma: SigmaExponent,
    /// `D = k_1 + ... + k_t`.
    pub degree_sum: u64,
    /// `L = (k_1^2 + k_1)/2 + ceil(sigma (1 - k_1))`.
    pub l_const: i64,
    /// Smallest `s` with `s >= k(k+1)/2` (single-exponent minimization).
    pub s_thm11: u64,
    /// The general-profile minimization needs `s` strictly greater than this (`2L`).
    pub s_thm12: i64,
    /// Smallest `s` with `2s >= k^2 + (1 - 2 sigma) k + 2 sigma` (major-arc mean value).
    pub s_mv_major: u64,
    /// Smallest `s` with `2s >= k(k+1)` (minor-arc mean value).
    pub s_mv_minor: u64,
}

impl ThresholdReport {
    pub fn thm12_applies(&self, s: u64) -> bool {
        (s as i64) > self.s_thm12
    }
}

fn ceil_rational(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

pub fn l_constant(profile: &ExponentProfile, sigma: &BigRational) -> i64 {
    let k = profile.k() as i64;
    let shift = sigma * BigRational::from_integer(BigInt::from(1 - k));
    let c = ceil_rational(&shift).to_i64().expect("small integer");
    (k * k + k) / 2 + c
}

pub fn thresholds(profile: &ExponentProfile) -> ThresholdReport {
    let sigma = sigma_exponent(profile);
    let k = profile.k() as u64;
    let l_const = l_constant(profile, &sigma.value);
    let kk = BigRational::from_integer(BigInt::from(k));
    let two_sigma = &sigma.value * BigRational::from_integer(BigInt::from(2));
    let major_rhs = &kk * &kk + (BigRational::one() - &two_sigma) * &kk + &two_sigma;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let s_mv_major = ceil_rational(&(major_rhs * half))
        .to_u64()
        .expect("small integer");
    ThresholdReport {
        degree_sum: profile.degree_sum(),
        l_const,
        s_thm11: k * (k + 1) / 2,
        s_thm12: 2 * l_const,
        s_mv_major,
        s_mv_minor: k * (k + 1) / 2,
        sigma,
    }
}

/// `sigma(s, k) = min{ s / (k(k+1) - s), 1 }` for `s >= k + 2`.
pub fn sigma_sk(s: u64, k: u64) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::OutOfRange(format!("k = {k} must be at least 2")));
    }
    if s < k + 2 {
        return Err(Error::OutOfRange(format!(
            "s = {s} is below k + 2 = {}",
            k + 2
        )));
    }
    let kk = k * (k + 1);
    if s >= kk {
        // denominator would be nonpositive; the min is 1 well before this
        return Ok(BigRational::one());
    }
    let v = ratio(s, kk - s);
    Ok(if v > BigRational::one() {
        BigRational::one()
    } else {
        v
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RlFactor {
    /// `R_l = prod_{j<=l} (1/q + X^{-i_j} + X^{-k+i_j} + q X^{-k})`.
    pub product: f64,
    /// `2p = (k - i_l)(k - i_l + 1)`.
    pub two_p: u64,
    /// `R_l^{1/(2p)}`.
    pub root: f64,
}

pub fn r_l_factor(profile: &ExponentProfile, l: usize, q: u64, x: u64) -> Result<RlFactor> {
    profile.check_l(l)?;
    if q == 0 || x == 0 {
        return Err(Error::OutOfRange("q and X must be positive".into()));
    }
    let k = profile.k() as i32;
    let xf = x as f64;
    let qf = q as f64;
    let product: f64 = profile.missing[..l]
        .iter()
        .map(|&i| {
            let i = i as i32;
            1.0 / qf + xf.powi(-i) + xf.powi(-k + i) + qf * xf.powi(-k)
        })
        .product();
    let two_p = profile.two_p(l)?;
    Ok(RlFactor {
        product,
        two_p,
        root: product.powf(1.0 / two_p as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiReport {
    /// `m_1 = min{k(k+1-m), s-m}`.
    pub m1: u64,
    /// `phi` with the supplied `nu` (epsilon omitted).
    pub phi: BigRational,
    /// `phi` at `nu = 0`.
    pub phi_nu_free: BigRational,
    pub phi_at_most_s: bool,
    pub phi_nu_free_at_most_s: bool,
}

/// `phi = s + (1 - (km + m_1)/(k(k+1))) (sigma(s,k) - nu) - m_1/(k(k+1))`.
pub fn phi_exponent(
    s: u64,
    k: u64,
    m: u64,
    sigma: &BigRational,
    nu: &BigRational,
) -> Result<PhiReport> {
    if m > s {
        return Err(Error::OutOfRange(format!("m = {m} exceeds s = {s}")));
    }
    if k == 0 {
        return Err(Error::OutOfRange("k must be positive".into()));
    }
    let kk = k * (k + 1);
    // k(k+1-m) can go negative once m > k+1; clamp before taking the min
    let m1 = if m > k + 1 {
        0
    } else {
        (k * (k + 1 - m)).min(s - m)
    };
    let big = |v: u64| BigRational::from_integer(BigInt::from(v));
    let weight = BigRational::one() - ratio(k * m + m1, kk);
    let tail = ratio(m1, kk);
    let phi_of = |nu: &BigRational| big(s) + &weight * (sigma - nu) - &tail;
    let phi = phi_of(nu);
    let phi_nu_free = phi_of(&BigRational::zero());
    Ok(PhiReport {
        m1,
        phi_at_most_s: phi <= big(s),
        phi_nu_free_at_most_s: phi_nu_free <= big(s),
        phi,
        phi_nu_free,
    })
}

/// Numerator and denominator of a reduced rational as machine integers.
pub fn rational_parts(r: &BigRational) -> (i64, i64) {
    let r = r.reduced();
    (
        r.numer().to_i64().expect("numerator fits"),
        r.denom().abs().to_i64().expect("denominator fits"),
    )
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(exps: &[u32]) -> ExponentProfile {
        ExponentProfile::new(exps.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rejects_invalid_profiles() {
        assert!(ExponentProfile::new(vec![]).is_err());
        assert!(ExponentProfile::new(vec![3, 3]).is_err());
        assert!(ExponentProfile::new(vec![1, 3]).is_err());
        assert!(ExponentProfile::new(vec![2, 1]).is_err(), "t = k");
        assert!(ExponentProfile::new(vec![1]).is_err(), "t = k");
        assert!("4,x".parse::<ExponentProfile>().is_err());
    }

    #[test]
    fn missing_exponents_examples() {
        assert_eq!(
            missing_exponents(&p(&[10, 9, 8])),
            vec![7, 6, 5, 4, 3, 2, 1]
        );
        assert_eq!(missing_exponents(&p(&[3, 1])), vec![2]);
        assert_eq!(missing_exponents(&p(&[5, 4, 2, 1])), vec![3]);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(
            sigma_exponent(&p(&[10, 9, 8])),
            SigmaExponent {
                value: r(1, 10),
                l: 2
            }
        );
        assert_eq!(
            sigma_exponent(&p(&[3, 1])),
            SigmaExponent {
                value: r(1, 2),
                l: 1
            }
        );
        assert_eq!(
            sigma_exponent(&p(&[6])),
            SigmaExponent {
                value: r(1, 2),
                l: 1
            }
        );
    }

    #[test]
    fn observation_three_follows_the_formula() {
        // (k, k-1, k_3, ...) with k_3 != k-2: i_1 = k-2 gives 1/6 at l = 1,
        // and the maximum is not 1/2 since i_1 <= k-2 for every such profile.
        let s = sigma_exponent(&p(&[8, 7, 5]));
        assert_eq!(s.value, r(1, 6));
        // a profile with k_2 != k-1 does reach 1/2
        assert_eq!(sigma_exponent(&p(&[8, 6, 5])).value, r(1, 2));
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(thresholds(&p(&[6])).s_thm11, 21);
        let t = thresholds(&p(&[3, 1]));
        assert_eq!(t.sigma.value, r(1, 2));
        assert_eq!(t.l_const, 5);
        assert_eq!(t.s_thm12, 10);
        assert!(!t.thm12_applies(10) && t.thm12_applies(11));
        assert_eq!(thresholds(&p(&[5, 4, 2, 1])).degree_sum, 12);
        // k = 3, sigma = 1/2: 2s >= 9 + 0 + 1
        assert_eq!(t.s_mv_major, 5);
        assert_eq!(t.s_mv_minor, 6);
    }

    #[test]
    fn sigma_sk_examples() {
        assert_eq!(sigma_sk(14, 6).unwrap(), r(1, 2));
        assert_eq!(sigma_sk(21, 6).unwrap(), r(1, 1));
        assert_eq!(sigma_sk(8, 6).unwrap(), r(4, 17));
        assert!(sigma_sk(7, 6).is_err());
        assert!(sigma_sk(5, 1).is_err());
        assert_eq!(sigma_sk(100, 6).unwrap(), r(1, 1));
    }

    #[test]
    fn r_l_examples() {
        let prof = p(&[3, 1]);
        let f = r_l_factor(&prof, 1, 1, 10).unwrap();
        assert!((f.product - 1.111).abs() < 1e-12);
        assert_eq!(f.two_p, 2);
        assert!((f.root - 1.111f64.sqrt()).abs() < 1e-12);
        let g = r_l_factor(&prof, 1, 10, 10).unwrap();
        assert!((g.product - 0.22).abs() < 1e-12);
        assert!(r_l_factor(&prof, 2, 1, 10).is_err());
        assert!(r_l_factor(&prof, 0, 1, 10).is_err());
        // q = 1: each factor tends to 1
        let big = r_l_factor(&p(&[6, 2]), 3, 1, 1_000_000).unwrap();
        assert!((big.product - 1.0).abs() < 1e-5);
    }

    #[test]
    fn phi_examples() {
        let one = r(1, 1);
        let zero = r(0, 1);
        let rep = phi_exponent(12, 3, 0, &one, &zero).unwrap();
        assert_eq!(rep.m1, 12);
        assert_eq!(rep.phi, r(11, 1));
        assert!(rep.phi_at_most_s);

        // s >= k(k+1)/2, sigma = 1, m1 = s - m: phi = s + 1 - ((k-2)m + 2s)/(k(k+1)),
        // which is exactly s at s = k(k+1)/2, m = 0
        for k in 2..10u64 {
            let kk = (k * (k + 1)) as i64;
            for s in [k * (k + 1) / 2, k * (k + 1) / 2 + 3] {
                for m in 0..=k.min(s) {
                    let rep = phi_exponent(s, k, m, &one, &zero).unwrap();
                    if rep.m1 != s - m {
                        continue;
                    }
                    let expected =
                        r(s as i64 + 1, 1) - r((k as i64 - 2) * m as i64 + 2 * s as i64, kk);
                    assert_eq!(rep.phi, expected);
                    assert!(rep.phi_at_most_s);
                }
            }
            let s = k * (k + 1) / 2;
            assert_eq!(
                phi_exponent(s, k, 0, &one, &zero).unwrap().phi,
                r(s as i64, 1)
            );
        }

        // m = s: m1 = 0
        let sigma = r(3, 7);
        let rep = phi_exponent(5, 4, 5, &sigma, &zero).unwrap();
        assert_eq!(rep.m1, 0);
        assert_eq!(rep.phi, r(5, 1) + (r(1, 1) - r(4 * 5, 20)) * sigma);

        let with_nu = phi_exponent(12, 3, 2, &one, &r(1, 10)).unwrap();
        assert!(with_nu.phi <= with_nu.phi_nu_free);
        assert!(phi_exponent(3, 3, 4, &one, &zero).is_err());
    }

    fn brute_sigma(exps: &[u32]) -> (BigRational, usize) {
        // independent path: rebuild the missing set with a boolean table
        let k = exps[0] as usize;
        let mut present = vec![false; k + 1];
        for &e in exps {
            present[e as usize] = true;
        }
        let missing: Vec<usize> = (1..=k).rev().filter(|&i| !present[i]).collect();
        let mut best = (r(0, 1), 0);
        for (idx, &i) in missing.iter().enumerate() {
            let l = idx as i64 + 1;
            let d = ((k - i) * (k - i + 1)) as i64;
            let v = r(l, d);
            if v > best.0 {
                best = (v, idx + 1);
            }
        }
        best
    }

    fn profile_strategy() -> impl Strategy<Value = Vec<u32>> {
        (2u32..=20).prop_flat_map(|k| {
            proptest::collection::vec(any::<bool>(), (k - 1) as usize).prop_map(move |mask| {
                let mut exps = vec![k];
                for (j, keep) in mask.iter().enumerate() {
                    let e = k - 1 - j as u32;
                    if *keep && exps.len() + 1 < k as usize {
                        exps.push(e);
                    }
                }
                exps
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn sigma_matches_direct_loop(exps in profile_strategy()) {
            let prof = ExponentProfile::new(exps.clone()).unwrap();
            let s = sigma_exponent(&prof);
            let (v, l) = brute_sigma(&exps);
            prop_assert_eq!(&s.value, &v);
            prop_assert_eq!(s.l, l);
            prop_assert!(s.value > r(0, 1) && s.value <= r(1, 2));
            prop_assert_eq!(prof.missing().len(), prof.k() as usize - prof.t());
        }

        #[test]
        fn two_l_one_plus_sigma_dominates(exps in profile_strategy()) {
            let prof = ExponentProfile::new(exps).unwrap();
            let t = thresholds(&prof);
            let k = prof.k() as i64;
            let lhs = r(2 * t.l_const, 1) * (r(1, 1) + t.sigma.value.clone());
            prop_assert!(lhs >= r(k * (k + 1), 1));
            // 2L = k^2 + k + 2 ceil(sigma (1 - k))
            let c = ceil_rational(&(t.sigma.value.clone() * r(1 - k, 1))).to_i64().unwrap();
            prop_assert_eq!(2 * t.l_const, k * k + k + 2 * c);
        }
    }

    #[test]
    fn observation_lower_bounds() {
        for k in 3..=24u32 {
            for t in 1..=k {
                if 2 * t >= k {
                    break;
                }
                let exps: Vec<u32> = (0..t).map(|j| k - j).collect();
                let s = sigma_exponent(&p(&exps)).value;
                let t = t as i64;
                assert!(s >= r(t, (2 * t - 1) * (2 * t)), "k={k} t={t}");
            }
            for m1 in 1..k {
                for m2 in 0..k {
                    if 2 * (m1 + m2) >= k {
                        continue;
                    }
                    let mut exps: Vec<u32> = (0..m1).map(|j| k - j).collect();
                    exps.extend((1..=m2).rev());
                    let s = sigma_exponent(&p(&exps)).value;
                    let m1 = m1 as i64;
                    assert!(s >= r(m1, (2 * m1 - 1) * (2 * m1)), "k={k} m1={m1} m2={m2}");
                }
            }
        }
    }
}
