//! Rational approximation, major/minor arc membership and the counting
//! quantities built on fractional parts.
//!
//! Every membership test compares an exact distance `||q alpha||` against an
//! exact rational threshold through [`Cutoff`], so verdicts are statements
//! about the [`FixedReal`] input itself. Arc endpoints stored in an
//! [`ArcSet`] are doubles; they are only used for integration.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{check_budget, Error, Result};
use crate::expsum::{binomial, h_box_radii, h_box_size, PhasePolynomial};
use crate::fixed::{f64_to_ratio, FixedReal, RealCutoff};
use crate::kprofile::{rational_to_f64, ExponentProfile};

/// `a/q` with `gcd(a, q) = 1` and `err = |q alpha - a|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcVerdict {
    pub major: bool,
    pub witness: Option<RationalApprox>,
}

impl ArcVerdict {
    fn minor() -> Self {
        ArcVerdict {
            major: false,
            witness: None,
        }
    }
}

/// Witness for simultaneous approximation: `|q alpha_i - a_i|` small for every `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointApprox {
    pub q: u64,
    pub a: Vec<i64>,
    pub err: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointArcVerdict {
    pub major: bool,
    pub witness: Option<JointApprox>,
}

fn pow_u(base: u64, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

/// Exact `|q alpha - a|` as a double.
pub fn approx_error(alpha: FixedReal, q: u64, a: i64) -> f64 {
    let scale = BigInt::one() << FixedReal::BITS as usize;
    let num = BigInt::from(alpha.to_biguint()) * BigInt::from(q) - BigInt::from(a) * &scale;
    let n = num.magnitude().to_f64().unwrap_or(f64::INFINITY);
    n * 2f64.powi(-(FixedReal::BITS as i32))
}

/// The integer nearest to `q alpha` for `alpha` in `[0, 1)`.
fn nearest_numerator(alpha: FixedReal, q: u64) -> i64 {
    let scale = BigUint::one() << FixedReal::BITS as usize;
    let prod = alpha.to_biguint() * BigUint::from(q);
    let half = BigUint::one() << (FixedReal::BITS as usize - 1);
    ((prod + half) / scale).to_i64().expect("numerator fits")
}

fn approx_at(alpha: FixedReal, q: u64) -> RationalApprox {
    let a = nearest_numerator(alpha, q);
    RationalApprox {
        a,
        q,
        err: approx_error(alpha, q, a),
    }
}

/// Continued-fraction convergents `a/q` of `alpha` with `q <= q_max`, in
/// increasing order of `q`. `err` is measured against the convergent's own
/// numerator.
pub fn convergents(alpha: FixedReal, q_max: u64) -> Vec<RationalApprox> {
    let mut out = Vec::new();
    // alpha = num / den exactly
    let mut num = alpha.to_biguint();
    let mut den = BigUint::one() << FixedReal::BITS as usize;
    let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
    let (mut p_cur, mut q_cur) = (BigUint::zero(), BigUint::one());
    // a_0 = floor(alpha) = 0, so the first convergent is 0/1
    out.push(RationalApprox {
        a: 0,
        q: 1,
        err: alpha.to_f64(),
    });
    let limit = BigUint::from(q_max);
    if q_max < 1 {
        return Vec::new();
    }
    while !num.is_zero() {
        let (quot, rem) = den.div_rem(&num);
        den = num;
        num = rem;
        let p_next = &quot * &p_cur + &p_prev;
        let q_next = &quot * &q_cur + &q_prev;
        if q_next > limit {
            break;
        }
        let q = q_next.to_u64().expect("bounded by q_max");
        let a = p_next.to_i64().expect("a <= q");
        out.push(RationalApprox {
            a,
            q,
            err: approx_error(alpha, q, a),
        });
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
    }
    out
}

/// Denominators of convergents up to `q_max`, deduplicated, increasing.
fn convergent_denominators(alpha: FixedReal, q_max: u64) -> Vec<u64> {
    let mut qs: Vec<u64> = convergents(alpha, q_max).iter().map(|c| c.q).collect();
    qs.dedup();
    qs
}

/// Smallest `q <= Q` with `|q alpha - a| <= 1/Q`.
pub fn dirichlet_approx(alpha: FixedReal, big_q: u64) -> Result<RationalApprox> {
    if big_q == 0 {
        return Err(Error::OutOfRange("Q must be positive".into()));
    }
    let cut = RealCutoff::closed(&BigUint::one(), &BigUint::from(big_q));
    convergent_denominators(alpha, big_q)
        .into_iter()
        .find(|&q| cut.admits(alpha.wrapping_mul_u64(q)))
        .map(|q| approx_at(alpha, q))
        .ok_or_else(|| Error::OutOfRange("no Dirichlet approximation found".into()))
}

/// First denominator `q <= x_max` (convergents only) with `||q alpha||` admitted.
fn first_admitted(alpha: FixedReal, x_max: u64, cut: &RealCutoff) -> ArcVerdict {
    for q in convergent_denominators(alpha, x_max) {
        if cut.admits(alpha.wrapping_mul_u64(q)) {
            return ArcVerdict {
                major: true,
                witness: Some(approx_at(alpha, q)),
            };
        }
    }
    ArcVerdict::minor()
}

/// Threshold `(l k)^{-1} X^{1-k}` defining the major arcs `M_l`.
pub fn major_cutoff(x: u64, k: u32, l: u64) -> RealCutoff {
    RealCutoff::closed(
        &BigUint::one(),
        &(BigUint::from(l * k as u64) * pow_u(x, k - 1)),
    )
}

/// Threshold `X^{1-k} H^{-1}` (strict) defining `M^H`.
pub fn major_h_cutoff(x: u64, k: u32, h: f64) -> RealCutoff {
    let (hn, hd) = f64_to_ratio(h);
    RealCutoff::open(&hd, &(hn.magnitude() * pow_u(x, k - 1)))
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        Err(Error::OutOfRange(format!("k = {k} must be at least 2")))
    } else {
        Ok(())
    }
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "H = {h} must be positive and finite"
        )))
    }
}

/// Membership of `alpha` in `M_l = union of |q alpha - a| <= (lk)^{-1} X^{1-k}, q <= X`.
pub fn classify_arc(alpha: FixedReal, x: u64, k: u32, l: u64) -> Result<ArcVerdict> {
    check_k(k)?;
    if x == 0 || l == 0 {
        return Err(Error::OutOfRange("X and l must be positive".into()));
    }
    Ok(first_admitted(alpha, x, &major_cutoff(x, k, l)))
}

/// Membership of `alpha` in `M^H = union of |q alpha - a| < X^{1-k} H^{-1}, q <= X`.
pub fn classify_arc_h(alpha: FixedReal, x: u64, k: u32, h: f64) -> Result<ArcVerdict> {
    check_k(k)?;
    check_h(h)?;
    if x == 0 {
        return Err(Error::OutOfRange("X must be positive".into()));
    }
    Ok(first_admitted(alpha, x, &major_h_cutoff(x, k, h)))
}

/// Per-coordinate thresholds `t^{-1} X^{1-k_i} H^{-1}` of the joint arcs.
fn joint_cutoffs(profile: &ExponentProfile, x: u64, h: f64) -> Vec<RealCutoff> {
    let (hn, hd) = f64_to_ratio(h);
    let t = profile.t() as u64;
    profile
        .exps()
        .iter()
        .map(|&ki| RealCutoff::closed(&hd, &(hn.magnitude() * BigUint::from(t) * pow_u(x, ki - 1))))
        .collect()
}

/// Membership of `(alpha_1, ..., alpha_t)` in the joint major arcs: some
/// `q <= X` with `|q alpha_i - a_i| <= t^{-1} X^{1-k_i} H^{-1}` for every `i`.
pub fn classify_joint_arc(
    alphas: &[FixedReal],
    profile: &ExponentProfile,
    x: u64,
    h: f64,
) -> Result<JointArcVerdict> {
    check_h(h)?;
    if alphas.len() != profile.t() {
        return Err(Error::OutOfRange(format!(
            "{} coefficients for a profile with t = {}",
            alphas.len(),
            profile.t()
        )));
    }
    let cuts = joint_cutoffs(profile, x, h);
    for q in 1..=x {
        if alphas
            .iter()
            .zip(&cuts)
            .all(|(a, c)| c.admits(a.wrapping_mul_u64(q)))
        {
            let mut nums: Vec<i64> = alphas.iter().map(|&a| nearest_numerator(a, q)).collect();
            // reduce to gcd(q, a_1, ..., a_t) = 1; the inequalities only tighten
            let g = nums.iter().fold(q as i64, |g, &a| g.gcd(&a));
            let q = q / g as u64;
            for n in nums.iter_mut() {
                *n /= g;
            }
            let err = alphas
                .iter()
                .zip(&nums)
                .map(|(&a, &n)| approx_error(a, q, n))
                .collect();
            return Ok(JointArcVerdict {
                major: true,
                witness: Some(JointApprox { q, a: nums, err }),
            });
        }
    }
    Ok(JointArcVerdict {
        major: false,
        witness: None,
    })
}

/// Brute-force scans over every denominator, kept as oracles for the
/// convergent-based classifiers.
pub mod scan {
    use super::*;

    /// `min over 1 <= q <= X of ||q alpha||` and the smallest `q` attaining it.
    pub fn min_distance(alpha: FixedReal, x: u64) -> (FixedReal, u64) {
        let mut best = (FixedReal::half(), 1);
        let mut best_set = false;
        let mut v = FixedReal::ZERO;
        for q in 1..=x {
            v = v.wrapping_add(alpha);
            let d = v.norm();
            if !best_set || d < best.0 {
                best = (d, q);
                best_set = true;
            }
        }
        best
    }

    pub fn classify_arc(alpha: FixedReal, x: u64, k: u32, l: u64) -> bool {
        let cut = major_cutoff(x, k, l);
        (1..=x).any(|q| cut.admits(alpha.wrapping_mul_u64(q)))
    }

    pub fn classify_arc_h(alpha: FixedReal, x: u64, k: u32, h: f64) -> bool {
        let cut = major_h_cutoff(x, k, h);
        (1..=x).any(|q| cut.admits(alpha.wrapping_mul_u64(q)))
    }

    /// Scans every `q <= X` and every numerator tuple `0 <= a_i <= q`.
    pub fn classify_joint_arc(
        alphas: &[FixedReal],
        profile: &ExponentProfile,
        x: u64,
        h: f64,
    ) -> bool {
        let (hn, hd) = f64_to_ratio(h);
        let t = profile.t() as u64;
        let scale = BigInt::one() << FixedReal::BITS as usize;
        // |q alpha_i - a_i| <= hd / (hn t X^{k_i - 1})  <=>  |q n_i - a_i 2^F| * hn t X^{k_i-1} <= hd 2^F
        let bounds: Vec<BigInt> = profile
            .exps()
            .iter()
            .map(|&ki| BigInt::from(hn.magnitude() * BigUint::from(t) * pow_u(x, ki - 1)))
            .collect();
        let rhs = BigInt::from(hd.clone()) * &scale;
        let nums: Vec<BigInt> = alphas
            .iter()
            .map(|a| BigInt::from(a.to_biguint()))
            .collect();
        for q in 1..=x {
            let ok = nums.iter().zip(&bounds).all(|(n, b)| {
                (0..=q as i64).any(|a| {
                    let diff = n * BigInt::from(q) - BigInt::from(a) * &scale;
                    BigInt::from(diff.magnitude().clone()) * b <= rhs
                })
            });
            if ok {
                return true;
            }
        }
        false
    }
}

/// Number of `|x| <= X` with `||m alpha x + beta|| <= 1/Y`.
pub fn baker_count(m: u64, alpha: FixedReal, beta: FixedReal, x: u64, y: f64) -> Result<u64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::OutOfRange(format!(
            "Y = {y} must be positive and finite"
        )));
    }
    let (yn, yd) = f64_to_ratio(y);
    let cut = RealCutoff::closed(&yd, yn.magnitude());
    Ok(count_progression(alpha.wrapping_mul_u64(m), beta, x, &cut))
}

fn count_progression(step: FixedReal, beta: FixedReal, x: u64, cut: &RealCutoff) -> u64 {
    let mut v = beta.wrapping_add(step.wrapping_mul_i64(-(x as i64)));
    let mut count = 0;
    for _ in 0..=(2 * x) {
        if cut.admits(v) {
            count += 1;
        }
        v = v.wrapping_add(step);
    }
    count
}

/// `(1 + 4q/Y)(1 + 4mX/q)`, valid when `|alpha - a/q| <= q^{-2}`.
pub fn baker_bound(m: u64, q: u64, x: f64, y: f64) -> f64 {
    let q = q as f64;
    (1.0 + 4.0 * q / y) * (1.0 + 4.0 * m as f64 * x / q)
}

/// Coefficient table for the triangular system `delta_{k-i_j}`:
/// `coef[j][n] = alpha_{k-i_j+i_n} C(k-i_j+i_n, i_n)` for `n >= j` (0-based).
fn triangular_coefficients(
    phase: &PhasePolynomial,
    profile: &ExponentProfile,
    l: usize,
) -> Vec<Vec<FixedReal>> {
    let k = profile.k();
    let missing = &profile.missing()[..l];
    (0..l)
        .map(|j| {
            (0..l)
                .map(|n| {
                    if n < j {
                        return FixedReal::ZERO;
                    }
                    let e = k - missing[j] + missing[n];
                    if e > k {
                        FixedReal::ZERO
                    } else {
                        phase.coeff(e).wrapping_mul_u64(binomial(e, missing[n]))
                    }
                })
                .collect()
        })
        .collect()
}

fn h_l_cutoffs(profile: &ExponentProfile, l: usize, x: u64) -> Vec<RealCutoff> {
    let k = profile.k();
    profile.missing()[..l]
        .iter()
        .map(|&i| {
            let n = k - i;
            RealCutoff::closed(
                &BigUint::one(),
                &(BigUint::from(4 * k as u64) * pow_u(x, n)),
            )
        })
        .collect()
}

/// `H_l(theta)`: the number of `(h_{i_1}, ..., h_{i_l})` with `|h_{i_j}| <= s X^{i_j}` and
/// `||delta_{k-i_j} - theta_j|| <= 1/(4k X^{k-i_j})` for every `j`. Any shift of
/// `delta_1` (the `Gamma` term) is absorbed into `theta`.
///
/// Enumerates the box with `h_{i_l}` outermost, discarding a prefix as soon as
/// the condition it fully determines fails.
pub fn h_l_count(
    profile: &ExponentProfile,
    l: usize,
    phase: &PhasePolynomial,
    theta: &[FixedReal],
    s: u64,
    x: u64,
    budget: u64,
) -> Result<u64> {
    profile.check_l(l)?;
    if theta.len() != l {
        return Err(Error::OutOfRange(format!(
            "expected {l} theta values, got {}",
            theta.len()
        )));
    }
    let radii = h_box_radii(profile, l, s, x)?;
    check_budget("H_l h-box", h_box_size(&radii), budget)?;
    let coef = triangular_coefficients(phase, profile, l);
    let cuts = h_l_cutoffs(profile, l, x);
    // acc[j] = sum over already-fixed n of coef[j][n] h_n, minus theta_j
    let mut acc: Vec<FixedReal> = theta.iter().map(|t| t.wrapping_neg()).collect();
    let mut count = 0u64;
    descend(l - 1, &radii, &coef, &cuts, &mut acc, &mut count);
    Ok(count)
}

fn descend(
    j: usize,
    radii: &[i64],
    coef: &[Vec<FixedReal>],
    cuts: &[RealCutoff],
    acc: &mut [FixedReal],
    count: &mut u64,
) {
    for h in -radii[j]..=radii[j] {
        let own = acc[j].wrapping_add(coef[j][j].wrapping_mul_i64(h));
        if !cuts[j].admits(own) {
            continue;
        }
        if j == 0 {
            *count += 1;
            continue;
        }
        let saved: Vec<FixedReal> = acc[..j].to_vec();
        for jj in 0..j {
            acc[jj] = acc[jj].wrapping_add(coef[jj][j].wrapping_mul_i64(h));
        }
        descend(j - 1, radii, coef, cuts, acc, count);
        acc[..j].copy_from_slice(&saved);
    }
}

/// `H_l(theta)` by plain enumeration of the whole box through `delta_coeffs`.
pub fn h_l_count_brute(
    profile: &ExponentProfile,
    l: usize,
    phase: &PhasePolynomial,
    theta: &[FixedReal],
    s: u64,
    x: u64,
    budget: u64,
) -> Result<u64> {
    let radii = h_box_radii(profile, l, s, x)?;
    check_budget("H_l h-box", h_box_size(&radii), budget)?;
    let cuts = h_l_cutoffs(profile, l, x);
    let k = profile.k();
    let missing = profile.missing()[..l].to_vec();
    let mut count = 0u64;
    let mut failure = None;
    crate::expsum::for_each_in_box(&radii, |h| {
        match crate::expsum::delta_coeffs(phase, profile, l, h) {
            Ok(delta) => {
                let ok = missing.iter().enumerate().all(|(j, &i)| {
                    let n = (k - i) as usize;
                    cuts[j].admits(delta[n].wrapping_sub(theta[j]))
                });
                if ok {
                    count += 1;
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(count),
    }
}

/// `prod_j (1 + 4q/Y_j)(1 + 4 m_j X_j / q)` with `m_j = C(k, i_j)`,
/// `X_j = s X^{i_j}`, `Y_j = 4k X^{k-i_j}`: the elimination bound on `H_l`.
pub fn h_l_chain_bound(profile: &ExponentProfile, l: usize, q: u64, s: u64, x: u64) -> Result<f64> {
    profile.check_l(l)?;
    let k = profile.k();
    Ok(profile.missing()[..l]
        .iter()
        .map(|&i| {
            let m = binomial(k, i);
            let xj = s as f64 * (x as f64).powi(i as i32);
            let yj = 4.0 * k as f64 * (x as f64).powi((k - i) as i32);
            baker_bound(m, q, xj, yj)
        })
        .product())
}

fn floor_h(h: f64) -> Result<u64> {
    check_h(h)?;
    Ok(h.floor() as u64)
}

fn m_cutoff(x: u64, k: u32, kj: u32) -> RealCutoff {
    RealCutoff::open(
        &BigUint::one(),
        &(BigUint::from(4 * k as u64) * pow_u(x, kj)),
    )
}

/// `M(H, gamma) = #{1 <= h <= H : ||h alpha - gamma|| < (4k)^{-1} X^{-k}}`.
pub fn m_h_gamma_count(alpha: FixedReal, gamma: FixedReal, h: f64, x: u64, k: u32) -> Result<u64> {
    let hmax = floor_h(h)?;
    let cut = m_cutoff(x, k, k);
    let mut v = gamma.wrapping_neg();
    let mut count = 0;
    for _ in 1..=hmax {
        v = v.wrapping_add(alpha);
        if cut.admits(v) {
            count += 1;
        }
    }
    Ok(count)
}

fn check_joint(alphas: &[FixedReal], profile: &ExponentProfile) -> Result<()> {
    if alphas.len() != profile.t() {
        Err(Error::OutOfRange(format!(
            "{} coefficients for a profile with t = {}",
            alphas.len(),
            profile.t()
        )))
    } else {
        Ok(())
    }
}

/// `N(H, gamma) = #{1 <= h <= H : ||h alpha_j - gamma_j|| < (4k)^{-1} X^{-k_j} for all j}`.
pub fn n_h_count(
    alphas: &[FixedReal],
    gammas: &[FixedReal],
    h: f64,
    x: u64,
    profile: &ExponentProfile,
) -> Result<u64> {
    check_joint(alphas, profile)?;
    check_joint(gammas, profile)?;
    let hmax = floor_h(h)?;
    let cuts: Vec<RealCutoff> = profile
        .exps()
        .iter()
        .map(|&kj| m_cutoff(x, profile.k(), kj))
        .collect();
    let mut v: Vec<FixedReal> = gammas.iter().map(|g| g.wrapping_neg()).collect();
    let mut count = 0;
    for _ in 1..=hmax {
        for (vj, a) in v.iter_mut().zip(alphas) {
            *vj = vj.wrapping_add(*a);
        }
        if v.iter().zip(&cuts).all(|(vj, c)| c.admits(*vj)) {
            count += 1;
        }
    }
    Ok(count)
}

/// A pair `h_1 < h_2 <= H` sharing a common `gamma` (so `N(H) >= 2`), if one
/// exists. This happens exactly when `||(h_2 - h_1) alpha_j|| < 2 (4k)^{-1} X^{-k_j}`
/// for every `j`, which makes the test exact over all `gamma`.
pub fn n_h_pair(
    alphas: &[FixedReal],
    h: f64,
    x: u64,
    profile: &ExponentProfile,
) -> Result<Option<(u64, u64)>> {
    check_joint(alphas, profile)?;
    let hmax = floor_h(h)?;
    let k = profile.k() as u64;
    let cuts: Vec<RealCutoff> = profile
        .exps()
        .iter()
        .map(|&kj| RealCutoff::open(&BigUint::from(2u32), &(BigUint::from(4 * k) * pow_u(x, kj))))
        .collect();
    for d in 1..hmax {
        if alphas
            .iter()
            .zip(&cuts)
            .all(|(a, c)| c.admits(a.wrapping_mul_u64(d)))
        {
            return Ok(Some((1, 1 + d)));
        }
    }
    Ok(None)
}

/// `max N(H, gamma)` over `gamma` on the grid `{0, 1/G, ..., (G-1)/G}^t`.
pub fn n_h_grid_max(
    alphas: &[FixedReal],
    h: f64,
    x: u64,
    profile: &ExponentProfile,
    grid: u64,
) -> Result<u64> {
    check_joint(alphas, profile)?;
    if grid == 0 {
        return Err(Error::OutOfRange("grid size must be positive".into()));
    }
    let hmax = floor_h(h)?;
    let k = profile.k();
    let cuts: Vec<RealCutoff> = profile
        .exps()
        .iter()
        .map(|&kj| m_cutoff(x, k, kj))
        .collect();
    let grid_point = |g: u64| FixedReal::from_ratio_i64(g as i64, grid);
    let mut tally: HashMap<Vec<u64>, u64> = HashMap::new();
    for hh in 1..=hmax {
        // grid points within the window of each coordinate
        let mut per_coord: Vec<Vec<u64>> = Vec::with_capacity(alphas.len());
        for (a, c) in alphas.iter().zip(&cuts) {
            let v = a.wrapping_mul_u64(hh);
            let center = (v.to_f64() * grid as f64).round() as i64;
            let hits: Vec<u64> = (center - 1..=center + 1)
                .map(|g| g.rem_euclid(grid as i64) as u64)
                .filter(|&g| c.admits(v.wrapping_sub(grid_point(g))))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            per_coord.push(hits);
        }
        let mut keys: Vec<Vec<u64>> = vec![Vec::new()];
        for hits in &per_coord {
            keys = keys
                .iter()
                .flat_map(|prefix| {
                    hits.iter().map(move |&g| {
                        let mut key = prefix.clone();
                        key.push(g);
                        key
                    })
                })
                .collect();
        }
        for key in keys {
            *tally.entry(key).or_insert(0) += 1;
        }
    }
    Ok(tally.values().copied().max().unwrap_or(0))
}

/// `lambda = r + X^k |r alpha - b|`.
pub fn lambda_transfer(alpha: FixedReal, b: i64, r: u64, x: u64, k: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be positive".into()));
    }
    if b.gcd(&(r as i64)) != 1 {
        return Err(Error::OutOfRange(format!("gcd({b}, {r}) != 1")));
    }
    Ok(r as f64 + (x as f64).powi(k as i32) * approx_error(alpha, r, b))
}

/// `Psi(alpha) = (q + X^k |q alpha - a|)^{-sigma}` on `M_2(q, a)`, zero on the minor arcs.
pub fn psi_weight(alpha: FixedReal, x: u64, k: u32, sigma: &BigRational) -> Result<f64> {
    let verdict = classify_arc(alpha, x, k, 2)?;
    Ok(match verdict.witness {
        Some(w) => (w.q as f64 + (x as f64).powi(k as i32) * w.err).powf(-rational_to_f64(sigma)),
        None => 0.0,
    })
}

/// One interval `[lo, hi)` of an [`ArcSet`] with the `(q, a)` that generated it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcInterval {
    pub lo: f64,
    pub hi: f64,
    pub q: u64,
    pub a: u64,
}

/// A finite union of disjoint subintervals of `[0, 1)`, sorted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArcSet {
    intervals: Vec<ArcInterval>,
}

impl ArcSet {
    pub fn full() -> Self {
        ArcSet {
            intervals: vec![ArcInterval {
                lo: 0.0,
                hi: 1.0,
                q: 1,
                a: 0,
            }],
        }
    }

    pub fn empty() -> Self {
        ArcSet::default()
    }

    /// Builds a normalized set: clipped to `[0, 1)`, sorted, overlapping or
    /// touching pieces merged (keeping the first generator).
    pub fn from_intervals(mut raw: Vec<ArcInterval>) -> Self {
        for iv in raw.iter_mut() {
            iv.lo = iv.lo.max(0.0);
            iv.hi = iv.hi.min(1.0);
        }
        raw.retain(|iv| iv.hi > iv.lo);
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.q.cmp(&b.q)));
        let mut merged: Vec<ArcInterval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        ArcSet { intervals: merged }
    }

    fn around_rationals(x: u64, half_width_times_q: f64) -> Self {
        let mut raw = Vec::new();
        for q in 1..=x {
            let w = half_width_times_q / q as f64;
            for a in 0..=q {
                if a.gcd(&q) != 1 {
                    continue;
                }
                let c = a as f64 / q as f64;
                raw.push(ArcInterval {
                    lo: c - w,
                    hi: c + w,
                    q,
                    a,
                });
            }
        }
        Self::from_intervals(raw)
    }

    /// `M_l`: all `alpha` in `[0,1)` with `|q alpha - a| <= (lk)^{-1} X^{1-k}`, `0 <= a <= q <= X`.
    pub fn major_arcs(x: u64, k: u32, l: u64) -> Result<Self> {
        check_k(k)?;
        if x == 0 || l == 0 {
            return Err(Error::OutOfRange("X and l must be positive".into()));
        }
        let tau = 1.0 / (l as f64 * k as f64 * (x as f64).powi(k as i32 - 1));
        Ok(Self::around_rationals(x, tau))
    }

    /// `M^H`: `|q alpha - a| < X^{1-k} H^{-1}`.
    pub fn major_arcs_h(x: u64, k: u32, h: f64) -> Result<Self> {
        check_k(k)?;
        check_h(h)?;
        let tau = 1.0 / ((x as f64).powi(k as i32 - 1) * h);
        Ok(Self::around_rationals(x, tau))
    }

    pub fn intervals(&self) -> &[ArcInterval] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|iv| iv.hi - iv.lo).sum()
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.intervals
            .iter()
            .any(|iv| iv.lo <= alpha && alpha < iv.hi)
    }

    /// `[0, 1)` minus this set. Gaps carry `q = 0, a = 0`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = 0.0;
        for iv in &self.intervals {
            if iv.lo > cursor {
                out.push(ArcInterval {
                    lo: cursor,
                    hi: iv.lo,
                    q: 0,
                    a: 0,
                });
            }
            cursor = iv.hi;
        }
        if cursor < 1.0 {
            out.push(ArcInterval {
                lo: cursor,
                hi: 1.0,
                q: 0,
                a: 0,
            });
        }
        ArcSet { intervals: out }
    }

    /// CSV with header `lo,hi,q,a`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi,q,a\n");
        for iv in &self.intervals {
            let _ = writeln!(s, "{:.17e},{:.17e},{},{}", iv.lo, iv.hi, iv.q, iv.a);
        }
        s
    }
}

/// `sum_{q <= X} (q + 1) * 2 (lk)^{-1} X^{1-k} / q`, an explicit bound on `|M_l|`.
pub fn major_arc_measure_bound(x: u64, k: u32, l: u64) -> f64 {
    let tau = 1.0 / (l as f64 * k as f64 * (x as f64).powi(k as i32 - 1));
    (1..=x).map(|q| (q + 1) as f64 * 2.0 * tau / q as f64).sum()
}
