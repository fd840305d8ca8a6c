//! Exponential sums with exact phases.
//!
//! Every phase `sum_j alpha_j x^j` is reduced modulo 1 in [`FixedReal`]
//! arithmetic (Horner's rule with wrapping integer multiplication), so the
//! only rounding is the final `e(theta)` evaluation and the compensated
//! accumulation of unit vectors.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::error::{check_budget, Error, Result};
use crate::fixed::FixedReal;
use crate::kprofile::ExponentProfile;

/// Largest exponent accepted by default in a [`PhasePolynomial`].
pub const DEFAULT_K_MAX: u32 = 16;

/// Default cap on `X` for the quadratic subinterval scan.
pub const DEFAULT_SUP_X_MAX: u64 = 20_000;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub const ZERO: Self = ComplexValue { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        ComplexValue { re, im }
    }

    /// `e(theta)` for an exact phase.
    pub fn unit(theta: FixedReal) -> Self {
        let (re, im) = theta.unit();
        ComplexValue { re, im }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(&self) -> Self {
        ComplexValue::new(self.re, -self.im)
    }

    pub fn scale(&self, k: f64) -> Self {
        ComplexValue::new(self.re * k, self.im * k)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).abs()
    }
}

impl Add for ComplexValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ComplexValue::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for ComplexValue {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ComplexValue::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for ComplexValue {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        ComplexValue::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for ComplexValue {
    type Output = Self;
    fn neg(self) -> Self {
        ComplexValue::new(-self.re, -self.im)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub fn add(&mut self, z: ComplexValue) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &CompensatedComplex) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> ComplexValue {
        ComplexValue::new(self.re.value(), self.im.value())
    }
}

/// `sum_j alpha_j x^j` with exponents `1..=k_max`; absent exponents are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePolynomial {
    coeffs: BTreeMap<u32, FixedReal>,
    k_max: u32,
}

impl Default for PhasePolynomial {
    fn default() -> Self {
        Self::new()
    }
}

impl PhasePolynomial {
    pub fn new() -> Self {
        Self::with_k_max(DEFAULT_K_MAX)
    }

    pub fn with_k_max(k_max: u32) -> Self {
        PhasePolynomial {
            coeffs: BTreeMap::new(),
            k_max,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, FixedReal)>>(terms: I) -> Result<Self> {
        let mut p = Self::new();
        for (j, a) in terms {
            p.set(j, a)?;
        }
        Ok(p)
    }

    /// Sets the coefficient of `x^j`; zero coefficients are dropped.
    pub fn set(&mut self, j: u32, alpha: FixedReal) -> Result<()> {
        if j == 0 {
            return Err(Error::OutOfRange("phase exponents start at 1".into()));
        }
        if j > self.k_max {
            return Err(Error::ExponentTooLarge {
                exponent: j,
                max: self.k_max,
            });
        }
        if alpha.is_zero() {
            self.coeffs.remove(&j);
        } else {
            self.coeffs.insert(j, alpha);
        }
        Ok(())
    }

    pub fn coeff(&self, j: u32) -> FixedReal {
        self.coeffs.get(&j).copied().unwrap_or(FixedReal::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, FixedReal)> + '_ {
        self.coeffs.iter().map(|(&j, &a)| (j, a))
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn negated(&self) -> Self {
        PhasePolynomial {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&j, a)| (j, a.wrapping_neg()))
                .collect(),
            k_max: self.k_max,
        }
    }

    /// Every coefficient multiplied by the integer `m`.
    pub fn scaled(&self, m: i64) -> Self {
        let mut out = Self::with_k_max(self.k_max);
        for (j, a) in self.terms() {
            out.set(j, a.wrapping_mul_i64(m)).expect("same support");
        }
        out
    }

    /// Dense coefficients `[c_0, c_1, ..., c_d]` with the given constant term.
    fn dense(&self, constant: FixedReal) -> Vec<FixedReal> {
        let d = self.degree() as usize;
        let mut v = vec![FixedReal::ZERO; d + 1];
        v[0] = constant;
        for (j, a) in self.terms() {
            v[j as usize] = a;
        }
        v
    }

    /// The phase at an integer point, reduced modulo 1 exactly.
    pub fn eval_at(&self, x: i64) -> FixedReal {
        horner(&self.dense(FixedReal::ZERO), x)
    }
}

fn horner(dense: &[FixedReal], x: i64) -> FixedReal {
    let mut acc = FixedReal::ZERO;
    for c in dense.iter().rev() {
        acc = acc.wrapping_mul_i64(x).wrapping_add(*c);
    }
    acc
}

/// `sum_{x=lo}^{hi} e(c_0 + c_1 x + ... + c_d x^d)` for dense exact coefficients.
fn sum_dense(dense: &[FixedReal], lo: i64, hi: i64) -> ComplexValue {
    let mut acc = CompensatedComplex::default();
    for x in lo..=hi {
        acc.add(ComplexValue::unit(horner(dense, x)));
    }
    acc.value()
}

fn check_x(x: u64) -> Result<()> {
    if x == 0 {
        Err(Error::OutOfRange("X must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `F = sum_{1<=x<=X} e(phase(x))`.
pub fn eval_sum(phase: &PhasePolynomial, x: u64) -> Result<ComplexValue> {
    check_x(x)?;
    Ok(sum_dense(&phase.dense(FixedReal::ZERO), 1, x as i64))
}

/// `sum_{lo<=x<=hi} e(constant + phase(x))` over an arbitrary integer range.
pub fn eval_range(phase: &PhasePolynomial, constant: FixedReal, lo: i64, hi: i64) -> ComplexValue {
    sum_dense(&phase.dense(constant), lo, hi)
}

/// `2 sin^2(pi theta) + i sin(2 pi theta) = 1 - e(-theta)`, stable near zero.
fn one_minus_e_neg(theta: FixedReal) -> ComplexValue {
    let t = theta.centered_f64();
    let s = (std::f64::consts::PI * t).sin();
    ComplexValue::new(2.0 * s * s, (std::f64::consts::TAU * t).sin())
}

fn complex_div(a: ComplexValue, b: ComplexValue) -> ComplexValue {
    let den = b.re * b.re + b.im * b.im;
    ComplexValue::new(
        (a.re * b.re + a.im * b.im) / den,
        (a.im * b.re - a.re * b.im) / den,
    )
}

/// `K(gamma) = sum_{1<=z<=X} e(-gamma z)`, in closed form when `gamma` is not an integer.
pub fn eval_k(gamma: FixedReal, x: u64) -> Result<ComplexValue> {
    check_x(x)?;
    if gamma.is_zero() {
        return Ok(ComplexValue::new(x as f64, 0.0));
    }
    // e(-gamma) (1 - e(-gamma X)) / (1 - e(-gamma))
    let num = one_minus_e_neg(gamma.wrapping_mul_u64(x));
    let den = one_minus_e_neg(gamma);
    Ok(ComplexValue::unit(gamma.wrapping_neg()) * complex_div(num, den))
}

/// Term-by-term evaluation of `K(gamma)`.
pub fn eval_k_direct(gamma: FixedReal, x: u64) -> Result<ComplexValue> {
    check_x(x)?;
    let mut acc = CompensatedComplex::default();
    let step = gamma.wrapping_neg();
    let mut theta = FixedReal::ZERO;
    for _ in 0..x {
        theta = theta.wrapping_add(step);
        acc.add(ComplexValue::unit(theta));
    }
    Ok(acc.value())
}

/// `psi(x - y) = beta_0 + sum_{i>=1} beta_i x^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedPhase {
    pub poly: PhasePolynomial,
    pub constant: FixedReal,
}

impl ShiftedPhase {
    pub fn beta(&self, i: u32) -> FixedReal {
        if i == 0 {
            self.constant
        } else {
            self.poly.coeff(i)
        }
    }
}

/// Binomial coefficient for the small arguments used with phase exponents.
pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// `beta_i = sum_{j>=i} C(j,i) (-y)^{j-i} alpha_j`, computed exactly modulo 1.
pub fn shift_coeffs(phase: &PhasePolynomial, y: i64) -> ShiftedPhase {
    let d = phase.degree();
    let mut beta = vec![FixedReal::ZERO; d as usize + 1];
    for (j, alpha) in phase.terms() {
        // alpha_j C(j,i) (-y)^{j-i}, building powers of -y from i = j downward
        let mut power = alpha;
        for i in (0..=j).rev() {
            let term = power.wrapping_mul_u64(binomial(j, i));
            beta[i as usize] = beta[i as usize].wrapping_add(term);
            power = power.wrapping_mul_i64(-y);
        }
    }
    let mut poly = PhasePolynomial::with_k_max(phase.k_max());
    for (i, b) in beta.iter().enumerate().skip(1) {
        poly.set(i as u32, *b).expect("degree preserved");
    }
    ShiftedPhase {
        poly,
        constant: beta[0],
    }
}

/// `f_y(gamma) = sum_{1<=x<=2X} e(psi(x-y) + gamma (x-y))`.
pub fn eval_fy(phase: &PhasePolynomial, y: i64, gamma: FixedReal, x: u64) -> Result<ComplexValue> {
    check_x(x)?;
    let shifted = shift_coeffs(phase, y);
    let mut poly = shifted.poly.clone();
    poly.set(1, shifted.poly.coeff(1).wrapping_add(gamma))?;
    let constant = shifted.constant.wrapping_sub(gamma.wrapping_mul_i64(y));
    Ok(eval_range(&poly, constant, 1, 2 * x as i64))
}

/// `delta_m = sum_{n<=l} alpha_{m+i_n} C(m+i_n, i_n) h_{i_n}` for `0 <= m <= k - i_l`,
/// with `alpha_j = 0` outside `1..=k`. `h[n-1]` is `h_{i_n}`.
pub fn delta_coeffs(
    phase: &PhasePolynomial,
    profile: &ExponentProfile,
    l: usize,
    h: &[i64],
) -> Result<Vec<FixedReal>> {
    profile.check_l(l)?;
    if h.len() != l {
        return Err(Error::OutOfRange(format!(
            "expected {l} h-values, got {}",
            h.len()
        )));
    }
    let k = profile.k();
    let missing = &profile.missing()[..l];
    let top = k - missing[l - 1];
    let alpha = |j: u32| {
        if j >= 1 && j <= k {
            phase.coeff(j)
        } else {
            FixedReal::ZERO
        }
    };
    let mut delta = vec![FixedReal::ZERO; top as usize + 1];
    for (m, slot) in delta.iter_mut().enumerate() {
        let m = m as u32;
        for (&i, &hv) in missing.iter().zip(h) {
            let a = alpha(m + i);
            if a.is_zero() {
                continue;
            }
            let term = a.wrapping_mul_u64(binomial(m + i, i)).wrapping_mul_i64(hv);
            *slot = slot.wrapping_add(term);
        }
    }
    Ok(delta)
}

/// The h-box `|h_{i_j}| <= s X^{i_j}` for `j = 1..=l`: one radius per coordinate.
pub fn h_box_radii(profile: &ExponentProfile, l: usize, s: u64, x: u64) -> Result<Vec<i64>> {
    profile.check_l(l)?;
    profile.missing()[..l]
        .iter()
        .map(|&i| {
            (x as i128)
                .checked_pow(i)
                .and_then(|p| p.checked_mul(s as i128))
                .filter(|&r| r <= i64::MAX as i128 / 4)
                .map(|r| r as i64)
                .ok_or(Error::Overflow("h-box radius"))
        })
        .collect()
}

pub fn h_box_size(radii: &[i64]) -> f64 {
    radii.iter().map(|&r| (2 * r + 1) as f64).product()
}

/// Calls `visit` on every point of the box, the last coordinate varying fastest.
pub(crate) fn for_each_in_box(radii: &[i64], mut visit: impl FnMut(&[i64])) {
    let mut h: Vec<i64> = radii.iter().map(|&r| -r).collect();
    loop {
        visit(&h);
        let mut idx = h.len();
        loop {
            if idx == 0 {
                return;
            }
            idx -= 1;
            if h[idx] < radii[idx] {
                h[idx] += 1;
                break;
            }
            h[idx] = -radii[idx];
        }
    }
}

/// Splits a box enumeration on its first coordinate for parallel workers.
fn first_coordinate_slices(radii: &[i64]) -> Vec<i64> {
    (-radii[0]..=radii[0]).collect()
}

/// `Xi = X^{-1} sum_y sum_h e(-Gamma y) e(-sum_m delta_m y^m)`.
pub fn eval_xi(
    phase: &PhasePolynomial,
    profile: &ExponentProfile,
    l: usize,
    big_gamma: FixedReal,
    s: u64,
    x: u64,
    budget: u64,
) -> Result<ComplexValue> {
    check_x(x)?;
    let radii = h_box_radii(profile, l, s, x)?;
    check_budget("Xi h-box", h_box_size(&radii), budget)?;
    let partials: Vec<Result<CompensatedComplex>> = first_coordinate_slices(&radii)
        .into_par_iter()
        .map(|h1| {
            let mut acc = CompensatedComplex::default();
            let mut failure = None;
            for_each_in_box(&radii[1..], |rest| {
                let mut h = Vec::with_capacity(radii.len());
                h.push(h1);
                h.extend_from_slice(rest);
                match delta_coeffs(phase, profile, l, &h) {
                    Ok(mut delta) => {
                        delta[1] = delta[1].wrapping_add(big_gamma);
                        let neg: Vec<FixedReal> = delta.iter().map(|d| d.wrapping_neg()).collect();
                        for y in 1..=x as i64 {
                            acc.add(ComplexValue::unit(horner(&neg, y)));
                        }
                    }
                    Err(e) => failure = Some(e),
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok(acc),
            }
        })
        .collect();
    let mut total = CompensatedComplex::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total.value().scale(1.0 / x as f64))
}

/// `max over 1<=a<=b<=X of |sum_{x=a}^{b} e(phase(x))|`.
pub fn sup_partial_sum(phase: &PhasePolynomial, x: u64) -> Result<f64> {
    sup_partial_sum_bounded(phase, x, DEFAULT_SUP_X_MAX)
}

pub fn sup_partial_sum_bounded(phase: &PhasePolynomial, x: u64, x_max: u64) -> Result<f64> {
    check_x(x)?;
    if x > x_max {
        return Err(Error::OutOfRange(format!(
            "X = {x} exceeds the subinterval-scan bound {x_max}"
        )));
    }
    Ok(sup_dense(&phase.dense(FixedReal::ZERO), x))
}

fn sup_dense(dense: &[FixedReal], x: u64) -> f64 {
    let mut prefix = Vec::with_capacity(x as usize + 1);
    let mut acc = CompensatedComplex::default();
    prefix.push(ComplexValue::ZERO);
    for n in 1..=x as i64 {
        acc.add(ComplexValue::unit(horner(dense, n)));
        prefix.push(acc.value());
    }
    let mut best = 0.0f64;
    for b in 1..prefix.len() {
        for a in 0..b {
            best = best.max(prefix[b].dist(&prefix[a]));
        }
    }
    best
}

/// `Upsilon_p = sum over the h-box of S*(delta'(h); X)^{2p}`, where the inner
/// sum has phase `-sum_{m>=1} delta'_m y^m` and `delta'_1 = delta_1 + Gamma`.
pub fn eval_upsilon(
    profile: &ExponentProfile,
    l: usize,
    phase: &PhasePolynomial,
    big_gamma: FixedReal,
    s: u64,
    x: u64,
    budget: u64,
) -> Result<f64> {
    check_x(x)?;
    let two_p = profile.two_p(l)? as i32;
    let radii = h_box_radii(profile, l, s, x)?;
    check_budget("Upsilon h-box", h_box_size(&radii), budget)?;
    let partials: Vec<Result<CompensatedSum>> = first_coordinate_slices(&radii)
        .into_par_iter()
        .map(|h1| {
            let mut acc = CompensatedSum::default();
            let mut failure = None;
            for_each_in_box(&radii[1..], |rest| {
                let mut h = vec![h1];
                h.extend_from_slice(rest);
                match delta_coeffs(phase, profile, l, &h) {
                    Ok(mut delta) => {
                        delta[1] = delta[1].wrapping_add(big_gamma);
                        let mut neg: Vec<FixedReal> =
                            delta.iter().map(|d| d.wrapping_neg()).collect();
                        neg[0] = FixedReal::ZERO;
                        acc.add(sup_dense(&neg, x).powi(two_p));
                    }
                    Err(e) => failure = Some(e),
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok(acc),
            }
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total.value())
}
