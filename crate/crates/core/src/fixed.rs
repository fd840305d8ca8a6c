//! Binary fixed-point reals modulo one.
//!
//! A [`Fixed`] holds `n / 2^F` with `0 <= n < 2^F`, where `F = 64 * L`. Addition
//! and multiplication by integers wrap modulo `2^F`, which is exactly reduction
//! modulo 1 of the represented real. Polynomial phases `alpha * x^j` therefore
//! keep every fractional bit no matter how large `x^j` grows; conversion to
//! `f64` happens only when a value is fed to `e(.)` or reported.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Number of 64-bit limbs in the default [`FixedReal`] (192 fractional bits).
pub const DEFAULT_LIMBS: usize = 3;

/// The working representation of every real coefficient in the crate.
pub type FixedReal = Fixed<DEFAULT_LIMBS>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fixed<const L: usize> {
    // little endian: limbs[L - 1] holds the most significant bits
    limbs: [u64; L],
}

impl<const L: usize> Default for Fixed<L> {
    fn default() -> Self {
        Self::ZERO
    }
}

impl<const L: usize> Fixed<L> {
    pub const BITS: u32 = 64 * L as u32;
    pub const ZERO: Self = Fixed { limbs: [0; L] };

    pub const fn from_limbs(limbs: [u64; L]) -> Self {
        Fixed { limbs }
    }

    pub fn limbs(&self) -> &[u64; L] {
        &self.limbs
    }

    /// The value 1/2.
    pub fn half() -> Self {
        let mut limbs = [0; L];
        limbs[L - 1] = 1 << 63;
        Fixed { limbs }
    }

    /// The smallest positive value, `2^-F`.
    pub fn ulp() -> Self {
        let mut limbs = [0; L];
        limbs[0] = 1;
        Fixed { limbs }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&w| w == 0)
    }

    pub fn wrapping_add(self, rhs: Self) -> Self {
        let mut out = [0u64; L];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s1, c1) = self.limbs[i].overflowing_add(rhs.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        Fixed { limbs: out }
    }

    pub fn wrapping_sub(self, rhs: Self) -> Self {
        self.wrapping_add(rhs.wrapping_neg())
    }

    pub fn wrapping_neg(self) -> Self {
        let mut out = [0u64; L];
        let mut carry = true;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s, c) = (!self.limbs[i]).overflowing_add(carry as u64);
            *slot = s;
            carry = c;
        }
        Fixed { limbs: out }
    }

    pub fn wrapping_mul_u64(self, m: u64) -> Self {
        let mut out = [0u64; L];
        let mut carry: u128 = 0;
        for (i, slot) in out.iter_mut().enumerate() {
            let p = self.limbs[i] as u128 * m as u128 + carry;
            *slot = p as u64;
            carry = p >> 64;
        }
        Fixed { limbs: out }
    }

    pub fn wrapping_mul_i64(self, m: i64) -> Self {
        let p = self.wrapping_mul_u64(m.unsigned_abs());
        if m < 0 {
            p.wrapping_neg()
        } else {
            p
        }
    }

    /// Multiplication by an arbitrary integer, reduced modulo 1.
    pub fn wrapping_mul_big(self, m: &BigInt) -> Self {
        let reduced = Self::from_biguint(&m.magnitude().clone());
        let p = self.wrapping_mul_fixed_int(&reduced);
        if m.sign() == Sign::Minus {
            p.wrapping_neg()
        } else {
            p
        }
    }

    // self * (other's limbs read as an integer), modulo 2^F
    fn wrapping_mul_fixed_int(self, other: &Self) -> Self {
        let mut out = [0u64; L];
        for i in 0..L {
            let mut carry: u128 = 0;
            for j in 0..(L - i) {
                let cur =
                    out[i + j] as u128 + self.limbs[j] as u128 * other.limbs[i] as u128 + carry;
                out[i + j] = cur as u64;
                carry = cur >> 64;
            }
        }
        Fixed { limbs: out }
    }

    /// Interprets `n mod 2^F` as the fraction `n / 2^F`.
    pub fn from_biguint(n: &BigUint) -> Self {
        let digits = n.to_u64_digits();
        let mut limbs = [0u64; L];
        for (slot, d) in limbs.iter_mut().zip(digits) {
            *slot = d;
        }
        Fixed { limbs }
    }

    /// The numerator `n` of `n / 2^F`.
    pub fn to_biguint(&self) -> BigUint {
        let mut bytes = Vec::with_capacity(8 * L);
        for w in &self.limbs {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        BigUint::from_bytes_le(&bytes)
    }

    /// `floor(2^F * num / den) mod 2^F`, i.e. the fractional part of `num/den`
    /// rounded down onto the grid.
    pub fn from_ratio(num: &BigInt, den: &BigUint) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let scaled = num << Self::BITS as usize;
        let q = scaled.div_floor(&BigInt::from(den.clone()));
        let modulus = BigInt::one() << Self::BITS as usize;
        let r = q.mod_floor(&modulus);
        Self::from_biguint(r.magnitude())
    }

    pub fn from_ratio_i64(num: i64, den: u64) -> Self {
        Self::from_ratio(&BigInt::from(num), &BigUint::from(den))
    }

    /// The fractional part of a finite `f64`, exact when `F` covers its bits.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite input");
        let (num, den) = f64_to_ratio(x);
        Self::from_ratio(&num, &den)
    }

    /// Value in `[0, 1)` as a double.
    pub fn to_f64(&self) -> f64 {
        magnitude_to_f64(&self.limbs)
    }

    /// Representative in `[-1/2, 1/2)` as a double, with full relative precision
    /// near zero.
    pub fn centered_f64(&self) -> f64 {
        if self.limbs[L - 1] >> 63 == 1 {
            -magnitude_to_f64(&self.wrapping_neg().limbs)
        } else {
            magnitude_to_f64(&self.limbs)
        }
    }

    /// Distance to the nearest integer, `||x||`, as an exact value in `[0, 1/2]`.
    pub fn norm(self) -> Self {
        if self.limbs[L - 1] >> 63 == 1 {
            self.wrapping_neg()
        } else {
            self
        }
    }

    pub fn norm_f64(&self) -> f64 {
        self.norm().to_f64()
    }

    /// `e(x) = exp(2 pi i x)` as `(cos, sin)`.
    pub fn unit(&self) -> (f64, f64) {
        let (s, c) = (TAU * self.centered_f64()).sin_cos();
        (c, s)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut limbs = [0u64; L];
        for w in limbs.iter_mut() {
            *w = rng.gen();
        }
        Fixed { limbs }
    }

    /// Big-endian hexadecimal digits of the numerator, `F/4` characters.
    pub fn to_hex(&self) -> String {
        self.limbs
            .iter()
            .rev()
            .map(|w| format!("{w:016x}"))
            .collect()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "hex fraction",
            input: s.to_string(),
        };
        if s.is_empty() || s.len() > 16 * L || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err());
        }
        // digits are the leading bits of the fraction
        let padded = format!("{s:0<width$}", width = 16 * L);
        let mut limbs = [0u64; L];
        for (i, chunk) in padded.as_bytes().chunks(16).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| err())?;
            limbs[L - 1 - i] = u64::from_str_radix(text, 16).map_err(|_| err())?;
        }
        Ok(Fixed { limbs })
    }

    /// Fractional part of `sqrt(2)`, rounded down.
    pub fn sqrt2() -> Self {
        let two_f = BigUint::one() << (2 * Self::BITS as usize + 1);
        Self::from_biguint(&two_f.sqrt())
    }

    /// `(sqrt(5) - 1) / 2`, the fractional part of the golden ratio, rounded down.
    pub fn golden() -> Self {
        let five = BigUint::from(5u32) << (2 * Self::BITS as usize + 2);
        // sqrt(5) * 2^(F+1), minus 2^(F+1), halved twice
        let root = five.sqrt();
        let one = BigUint::one() << (Self::BITS as usize + 1);
        Self::from_biguint(&((root - one) >> 2usize))
    }

    /// Fractional part of pi, from Machin's formula with guard bits.
    pub fn pi() -> Self {
        let guard = 32usize;
        let bits = Self::BITS as usize + guard;
        let one = BigInt::one() << bits;
        let atan_inv = |x: u64| -> BigInt {
            let x2 = BigInt::from(x * x);
            let mut power = &one / BigInt::from(x);
            let mut sum = BigInt::zero();
            let mut n = 0u64;
            while !power.is_zero() {
                let term = &power / BigInt::from(2 * n + 1);
                if n.is_multiple_of(2) {
                    sum += term;
                } else {
                    sum -= term;
                }
                power /= &x2;
                n += 1;
            }
            sum
        };
        let pi = BigInt::from(16) * atan_inv(5) - BigInt::from(4) * atan_inv(239);
        let pi = pi >> guard;
        Self::from_biguint(pi.magnitude())
    }

    /// Parses `p/q`, a decimal such as `-0.125` or `3.75`, `hex:<digits>`, or
    /// one of the named constants `sqrt2`, `pi`, `golden`. Values are reduced
    /// modulo 1 and rounded once onto the grid.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        let err = || Error::Parse {
            what: "real coefficient",
            input: text.to_string(),
        };
        match s {
            "sqrt2" => return Ok(Self::sqrt2()),
            "pi" => return Ok(Self::pi()),
            "golden" => return Ok(Self::golden()),
            _ => {}
        }
        if let Some(hex) = s.strip_prefix("hex:") {
            return Self::from_hex(hex);
        }
        if let Some((p, q)) = s.split_once('/') {
            let num = BigInt::from_str(p.trim()).map_err(|_| err())?;
            let den = BigInt::from_str(q.trim()).map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            let num = if den.is_negative() { -num } else { num };
            return Ok(Self::from_ratio(&num, den.magnitude()));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num = BigInt::from_str(&digits).map_err(|_| err())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigUint::from(10u32), frac_part.len());
        Ok(Self::from_ratio(&num, &den))
    }
}

impl<const L: usize> Ord for Fixed<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.limbs.iter().rev().cmp(other.limbs.iter().rev())
    }
}

impl<const L: usize> PartialOrd for Fixed<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const L: usize> fmt::Debug for Fixed<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed(0x{} ~ {})", self.to_hex(), self.to_f64())
    }
}

impl<const L: usize> fmt::Display for Fixed<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl<const L: usize> FromStr for Fixed<L> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn magnitude_to_f64<const L: usize>(limbs: &[u64; L]) -> f64 {
    let Some(top) = (0..L).rev().find(|&i| limbs[i] != 0) else {
        return 0.0;
    };
    let hi = limbs[top];
    let lz = hi.leading_zeros();
    let window = if lz == 0 {
        hi
    } else if top > 0 {
        (hi << lz) | (limbs[top - 1] >> (64 - lz))
    } else {
        hi << lz
    };
    let exponent = 64 * top as i32 - lz as i32 - 64 * L as i32;
    window as f64 * 2f64.powi(exponent)
}

/// Exact `(num, den)` with `x = num / den` for a finite double.
pub fn f64_to_ratio(x: f64) -> (BigInt, BigUint) {
    assert!(x.is_finite(), "non-finite input");
    if x == 0.0 {
        return (BigInt::zero(), BigUint::one());
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let m = BigInt::from(sign) * BigInt::from(mantissa);
    if e >= 0 {
        (m << e as usize, BigUint::one())
    } else {
        (m, BigUint::one() << (-e) as usize)
    }
}

/// A threshold test `||x|| <= t` (closed) or `||x|| < t` (open) for an exact
/// positive rational `t`, precomputed onto the fixed-point grid so that each
/// test is a single limb comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cutoff<const L: usize> {
    // largest numerator n with n/2^F passing the test, or None if none passes
    max_pass: Option<Fixed<L>>,
}

pub type RealCutoff = Cutoff<DEFAULT_LIMBS>;

impl<const L: usize> Cutoff<L> {
    /// `||x|| <= num/den`.
    pub fn closed(num: &BigUint, den: &BigUint) -> Self {
        let scaled = num << Fixed::<L>::BITS as usize;
        let floor = &scaled / den;
        Self::from_bound(floor)
    }

    /// `||x|| < num/den`.
    pub fn open(num: &BigUint, den: &BigUint) -> Self {
        let scaled = num << Fixed::<L>::BITS as usize;
        let (q, r) = scaled.div_rem(den);
        let ceil = if r.is_zero() { q } else { q + 1u32 };
        if ceil.is_zero() {
            return Cutoff { max_pass: None };
        }
        Self::from_bound(ceil - 1u32)
    }

    /// Closed or open cutoff at a positive finite double, taken exactly.
    pub fn from_f64(t: f64, closed: bool) -> Self {
        assert!(
            t.is_finite() && t >= 0.0,
            "cutoff must be finite and nonnegative"
        );
        let (num, den) = f64_to_ratio(t);
        let num = num.magnitude().clone();
        if closed {
            Self::closed(&num, &den)
        } else {
            Self::open(&num, &den)
        }
    }

    fn from_bound(n: BigUint) -> Self {
        // ||x|| never exceeds 1/2, so anything at or above it passes everything
        let half = BigUint::one() << (Fixed::<L>::BITS as usize - 1);
        let bound = if n >= half { half } else { n };
        Cutoff {
            max_pass: Some(Fixed::from_biguint(&bound)),
        }
    }

    /// Whether `||x||` passes the threshold.
    pub fn admits(&self, x: Fixed<L>) -> bool {
        match self.max_pass {
            Some(m) => x.norm() <= m,
            None => false,
        }
    }

    /// Whether an already-normed distance in `[0, 1/2]` passes.
    pub fn admits_distance(&self, dist: Fixed<L>) -> bool {
        match self.max_pass {
            Some(m) => dist <= m,
            None => false,
        }
    }
}
