//! Two-mode scalars: exact rationals and high-precision complex floats.
//!
//! Values of different modes never combine in arithmetic; the operator impls
//! panic on a mode mismatch, and every boundary that accepts user data
//! (sources, parsers) checks modes first and reports [`CfError::ModeMismatch`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::CfError;

/// Smallest accepted decimal precision for complex-float mode.
pub const MIN_DIGITS: u32 = 30;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: usize = 32;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Working precision in bits for a decimal digit count.
pub fn bits_for_digits(digits: u32) -> usize {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
}

/// Arithmetic mode of a [`Scalar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Complex { digits: u32 },
}

impl Mode {
    pub fn complex(digits: u32) -> Result<Mode, CfError> {
        if digits < MIN_DIGITS {
            return Err(CfError::Precision { digits, min: MIN_DIGITS });
        }
        Ok(Mode::Complex { digits })
    }

    /// True when both modes are rational, or both complex (any precision).
    pub fn same_kind(self, other: Mode) -> bool {
        matches!(
            (self, other),
            (Mode::Rational, Mode::Rational) | (Mode::Complex { .. }, Mode::Complex { .. })
        )
    }

    pub fn digits(self) -> Option<u32> {
        match self {
            Mode::Rational => None,
            Mode::Complex { digits } => Some(digits),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Complex { .. } => "complex",
        }
    }
}

/// A complex number with real and imaginary parts held as binary floats.
#[derive(Clone, Debug)]
pub struct ComplexFloat {
    re: BigFloat,
    im: BigFloat,
    digits: u32,
    mixed: bool,
}

impl ComplexFloat {
    fn bits(&self) -> usize {
        bits_for_digits(self.digits)
    }

    fn new(re: BigFloat, im: BigFloat, digits: u32, mixed: bool) -> Self {
        ComplexFloat { re, im, digits, mixed }
    }

    pub fn from_parts(re: BigFloat, im: BigFloat, digits: u32) -> Self {
        ComplexFloat::new(re, im, digits, false)
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Set when this value was produced by combining operands of differing precision.
    pub fn precision_mixed(&self) -> bool {
        self.mixed
    }

    fn join(&self, other: &ComplexFloat) -> (usize, u32, bool) {
        let digits = self.digits.min(other.digits);
        let mixed = self.mixed || other.mixed || self.digits != other.digits;
        (bits_for_digits(digits), digits, mixed)
    }

    fn zero(digits: u32) -> Self {
        let p = bits_for_digits(digits);
        ComplexFloat::new(BigFloat::new(p), BigFloat::new(p), digits, false)
    }

    fn real(x: BigFloat, digits: u32) -> Self {
        let p = bits_for_digits(digits);
        ComplexFloat::new(x, BigFloat::new(p), digits, false)
    }

    fn from_rational(r: &BigRational, digits: u32) -> Self {
        ComplexFloat::real(ratio_to_float(r, bits_for_digits(digits)), digits)
    }

    fn add(&self, o: &Self) -> Self {
        let (p, d, m) = self.join(o);
        ComplexFloat::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM), d, m)
    }

    fn sub(&self, o: &Self) -> Self {
        let (p, d, m) = self.join(o);
        ComplexFloat::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM), d, m)
    }

    fn mul(&self, o: &Self) -> Self {
        let (p, d, m) = self.join(o);
        if self.im.is_zero() && o.im.is_zero() {
            return ComplexFloat::new(self.re.mul(&o.re, p, RM), BigFloat::new(p), d, m);
        }
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        ComplexFloat::new(re, im, d, m)
    }

    fn div(&self, o: &Self) -> Self {
        let (p, d, m) = self.join(o);
        if o.im.is_zero() {
            return ComplexFloat::new(self.re.div(&o.re, p, RM), self.im.div(&o.re, p, RM), d, m);
        }
        let den = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM);
        ComplexFloat::new(re.div(&den, p, RM), im.div(&den, p, RM), d, m)
    }

    fn neg(&self) -> Self {
        ComplexFloat::new(-self.re.clone(), -self.im.clone(), self.digits, self.mixed)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn abs_sq(&self) -> BigFloat {
        let p = self.bits();
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    fn abs(&self) -> BigFloat {
        self.abs_sq().sqrt(self.bits(), RM)
    }

    fn sqrt(&self) -> Self {
        let p = self.bits();
        if self.is_zero() {
            return self.clone();
        }
        if self.im.is_zero() {
            let s = self.re.abs().sqrt(p, RM);
            return if self.re.is_negative() {
                ComplexFloat::new(BigFloat::new(p), s, self.digits, self.mixed)
            } else {
                ComplexFloat::new(s, BigFloat::new(p), self.digits, self.mixed)
            };
        }
        let r = self.abs();
        let two = BigFloat::from_i64(2, p);
        if !self.re.is_negative() {
            let t = r.add(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            let im = self.im.div(&t.mul(&two, p, RM), p, RM);
            ComplexFloat::new(t, im, self.digits, self.mixed)
        } else {
            let mut t = r.sub(&self.re, p, RM).div(&two, p, RM).sqrt(p, RM);
            if self.im.is_negative() {
                t = t.neg();
            }
            let re = self.im.div(&t.mul(&two, p, RM), p, RM);
            ComplexFloat::new(re, t, self.digits, self.mixed)
        }
    }

    fn arg(&self) -> BigFloat {
        let p = self.bits();
        with_consts(|cc| {
            if self.re.is_zero() {
                let half_pi = cc.pi(p, RM).div(&BigFloat::from_i64(2, p), p, RM);
                return if self.im.is_negative() { half_pi.neg() } else { half_pi };
            }
            let base = self.im.div(&self.re, p, RM).atan(p, RM, cc);
            if self.re.is_positive() {
                base
            } else if self.im.is_negative() {
                base.sub(&cc.pi(p, RM), p, RM)
            } else {
                base.add(&cc.pi(p, RM), p, RM)
            }
        })
    }

    fn ln(&self) -> Self {
        let p = self.bits();
        let modulus_ln = with_consts(|cc| self.abs_sq().ln(p, RM, cc))
            .div(&BigFloat::from_i64(2, p), p, RM);
        ComplexFloat::new(modulus_ln, self.arg(), self.digits, self.mixed)
    }

    fn exp(&self) -> Self {
        let p = self.bits();
        with_consts(|cc| {
            let scale = self.re.exp(p, RM, cc);
            if self.im.is_zero() {
                return ComplexFloat::new(scale, BigFloat::new(p), self.digits, self.mixed);
            }
            let re = scale.mul(&self.im.cos(p, RM, cc), p, RM);
            let im = scale.mul(&self.im.sin(p, RM, cc), p, RM);
            ComplexFloat::new(re, im, self.digits, self.mixed)
        })
    }

    /// Multiplies by 2^k exactly.
    fn scale_pow2(&mut self, k: i64) {
        for part in [&mut self.re, &mut self.im] {
            if let Some(e) = part.exponent() {
                if !part.is_zero() {
                    part.set_exponent((e as i64 + k) as i32);
                }
            }
        }
    }

    /// Binary exponent of the larger part, `None` for zero.
    fn max_exponent(&self) -> Option<i64> {
        let e = |x: &BigFloat| {
            if x.is_zero() {
                None
            } else {
                x.exponent().map(|e| e as i64)
            }
        };
        match (e(&self.re), e(&self.im)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(float_to_f64(&self.re), float_to_f64(&self.im))
    }

    fn format_with(&self, digits: usize) -> String {
        let re = format_float(&self.re, digits);
        if self.im.is_zero() {
            return re;
        }
        let im = format_float(&self.im.abs(), digits);
        let sign = if self.im.is_negative() { '-' } else { '+' };
        if self.re.is_zero() {
            let lead = if self.im.is_negative() { "-" } else { "" };
            return format!("{lead}{im}i");
        }
        format!("{re}{sign}{im}i")
    }
}

impl PartialEq for ComplexFloat {
    fn eq(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}

fn ratio_to_float(r: &BigRational, p: usize) -> BigFloat {
    let num = int_to_float(r.numer(), p);
    if r.denom().is_one() {
        return num;
    }
    num.div(&int_to_float(r.denom(), p), p, RM)
}

fn int_to_float(n: &BigInt, p: usize) -> BigFloat {
    if let Some(v) = n.to_i64() {
        return BigFloat::from_i64(v, p);
    }
    with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc))
}

fn float_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let s = with_consts(|cc| x.format(Radix::Dec, RM, cc)).unwrap_or_default();
    s.parse::<f64>().unwrap_or(f64::NAN)
}

/// Decimal rendering with at most `digits` significant digits.
fn format_float(x: &BigFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let raw = match with_consts(|cc| x.format(Radix::Dec, RM, cc)) {
        Ok(s) => s,
        Err(_) => return "NaN".to_string(),
    };
    let (negative, body) = match raw.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, raw.as_str()),
    };
    let (mant, exp) = match body.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let mut all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    // position of the decimal point relative to the start of `all`
    let mut point = int_part.len() as i64 + exp;
    let lead = all.iter().take_while(|&&d| d == 0).count();
    if lead == all.len() {
        return "0".to_string();
    }
    all.drain(..lead);
    point -= lead as i64;
    if all.len() > digits {
        let round_up = all[digits] >= 5;
        all.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    all.insert(0, 1);
                    point += 1;
                    all.truncate(digits);
                    break;
                }
                i -= 1;
                if all[i] == 9 {
                    all[i] = 0;
                } else {
                    all[i] += 1;
                    break;
                }
            }
        }
    }
    while all.len() > 1 && *all.last().unwrap() == 0 {
        all.pop();
    }
    let digits_str: String = all.iter().map(|d| char::from(b'0' + d)).collect();
    let sign = if negative { "-" } else { "" };
    let exp10 = point - 1;
    if (-6..=20).contains(&exp10) {
        if point <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-point) as usize), digits_str)
        } else if point as usize >= digits_str.len() {
            format!("{sign}{}{}", digits_str, "0".repeat(point as usize - digits_str.len()))
        } else {
            let (a, b) = digits_str.split_at(point as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = digits_str.split_at(1);
        if b.is_empty() {
            format!("{sign}{a}e{exp10}")
        } else {
            format!("{sign}{a}.{b}e{exp10}")
        }
    }
}

/// A scalar in one of the two arithmetic modes.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(BigRational),
    Complex(ComplexFloat),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Rational(_) => Mode::Rational,
            Scalar::Complex(c) => Mode::Complex { digits: c.digits },
        }
    }

    pub fn from_i64(n: i64, mode: Mode) -> Scalar {
        match mode {
            Mode::Rational => Scalar::Rational(BigRational::from_integer(n.into())),
            Mode::Complex { digits } => {
                Scalar::Complex(ComplexFloat::real(BigFloat::from_i64(n, bits_for_digits(digits)), digits))
            }
        }
    }

    pub fn from_ratio(num: i64, den: i64, mode: Mode) -> Scalar {
        Scalar::from_rational(BigRational::new(num.into(), den.into()), mode)
    }

    pub fn from_rational(r: BigRational, mode: Mode) -> Scalar {
        match mode {
            Mode::Rational => Scalar::Rational(r),
            Mode::Complex { digits } => Scalar::Complex(ComplexFloat::from_rational(&r, digits)),
        }
    }

    pub fn zero(mode: Mode) -> Scalar {
        match mode {
            Mode::Rational => Scalar::Rational(BigRational::zero()),
            Mode::Complex { digits } => Scalar::Complex(ComplexFloat::zero(digits)),
        }
    }

    pub fn one(mode: Mode) -> Scalar {
        Scalar::from_i64(1, mode)
    }

    /// The imaginary unit; only exists in complex-float mode.
    pub fn i(digits: u32) -> Scalar {
        let p = bits_for_digits(digits);
        Scalar::Complex(ComplexFloat::new(BigFloat::new(p), BigFloat::from_i64(1, p), digits, false))
    }

    /// Builds a complex-float scalar from f64 parts. Test and diagnostic helper.
    pub fn from_f64_parts(re: f64, im: f64, digits: u32) -> Scalar {
        let p = bits_for_digits(digits);
        Scalar::Complex(ComplexFloat::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p), digits, false))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Complex(c) => c.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Complex(c) => c.im.is_zero() && c.re == BigFloat::from_i64(1, c.bits()),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&ComplexFloat> {
        match self {
            Scalar::Complex(c) => Some(c),
            Scalar::Rational(_) => None,
        }
    }

    /// The integer value, when this scalar is an integer that fits in `i64`.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Rational(r) if r.is_integer() => r.numer().to_i64(),
            Scalar::Rational(_) => None,
            Scalar::Complex(c) => {
                if !c.im.is_zero() || !c.re.is_int() {
                    return None;
                }
                let v = float_to_f64(&c.re);
                (v.abs() < 9.0e15).then_some(v as i64)
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Rational(_) => true,
            Scalar::Complex(c) => c.im.is_zero(),
        }
    }

    /// Explicit conversion between modes. Complex to rational is refused.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar, CfError> {
        match (self, mode) {
            (Scalar::Rational(_), Mode::Rational) => Ok(self.clone()),
            (Scalar::Rational(r), Mode::Complex { digits }) => {
                Ok(Scalar::Complex(ComplexFloat::from_rational(r, digits)))
            }
            (Scalar::Complex(c), Mode::Complex { digits }) => {
                if c.digits == digits {
                    return Ok(self.clone());
                }
                let p = bits_for_digits(digits);
                let mut re = c.re.clone();
                let mut im = c.im.clone();
                re.set_precision(p, RM).map_err(|e| CfError::Numeric(format!("{e:?}")))?;
                im.set_precision(p, RM).map_err(|e| CfError::Numeric(format!("{e:?}")))?;
                Ok(Scalar::Complex(ComplexFloat::new(re, im, digits, c.mixed)))
            }
            (Scalar::Complex(_), Mode::Rational) => Err(CfError::ModeMismatch {
                context: "complex-float value cannot be converted to an exact rational".into(),
            }),
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, CfError> {
        self.check_mode(rhs)?;
        if rhs.is_zero() {
            return Err(CfError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn recip(&self) -> Result<Scalar, CfError> {
        Scalar::one(self.mode()).checked_div(self)
    }

    pub fn check_mode(&self, other: &Scalar) -> Result<(), CfError> {
        if self.mode().same_kind(other.mode()) {
            Ok(())
        } else {
            Err(CfError::ModeMismatch {
                context: format!("{} value combined with {} value", self.mode().name(), other.mode().name()),
            })
        }
    }

    /// |z|², exact in rational mode.
    pub fn abs_sq(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r * r),
            Scalar::Complex(c) => Scalar::Complex(ComplexFloat::real(c.abs_sq(), c.digits)),
        }
    }

    /// |z|; exact in rational mode.
    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r.abs()),
            Scalar::Complex(c) => Scalar::Complex(ComplexFloat::real(c.abs(), c.digits)),
        }
    }

    pub fn real_part(&self) -> Scalar {
        match self {
            Scalar::Rational(_) => self.clone(),
            Scalar::Complex(c) => Scalar::Complex(ComplexFloat::real(c.re.clone(), c.digits)),
        }
    }

    pub fn imag_part(&self) -> Scalar {
        match self {
            Scalar::Rational(_) => Scalar::zero(Mode::Rational),
            Scalar::Complex(c) => Scalar::Complex(ComplexFloat::real(c.im.clone(), c.digits)),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Rational(_) => self.clone(),
            Scalar::Complex(c) => Scalar::Complex(ComplexFloat::new(c.re.clone(), -c.im.clone(), c.digits, c.mixed)),
        }
    }

    /// Orders the real parts of two scalars of the same kind.
    pub fn cmp_real(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a.cmp(b),
            (Scalar::Complex(a), Scalar::Complex(b)) => a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal),
            (Scalar::Rational(a), Scalar::Complex(b)) => {
                ComplexFloat::from_rational(a, b.digits).re.partial_cmp(&b.re).unwrap_or(Ordering::Equal)
            }
            (Scalar::Complex(a), Scalar::Rational(b)) => {
                a.re.partial_cmp(&ComplexFloat::from_rational(b, a.digits).re).unwrap_or(Ordering::Equal)
            }
        }
    }

    /// Compares |self| with |bound| through squared moduli, so rational
    /// comparisons stay exact.
    pub fn cmp_abs(&self, bound: &Scalar) -> Ordering {
        let lhs = self.abs_sq();
        let rhs = match (&lhs, bound) {
            (Scalar::Complex(c), Scalar::Rational(_)) => {
                bound.to_mode(Mode::Complex { digits: c.digits }).expect("rational lifts").abs_sq()
            }
            _ => bound.abs_sq(),
        };
        lhs.cmp_real(&rhs)
    }

    /// Principal square root. In rational mode only perfect squares succeed.
    pub fn sqrt(&self) -> Result<Scalar, CfError> {
        match self {
            Scalar::Complex(c) => Ok(Scalar::Complex(c.sqrt())),
            Scalar::Rational(r) => {
                if r.is_negative() {
                    return Err(CfError::NeedsComplex("square root of a negative rational".into()));
                }
                let n = r.numer().sqrt();
                let d = r.denom().sqrt();
                if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                    Ok(Scalar::Rational(BigRational::new(n, d)))
                } else {
                    Err(CfError::NeedsComplex("irrational square root".into()))
                }
            }
        }
    }

    /// Principal natural logarithm; complex-float mode only.
    pub fn ln(&self) -> Result<Scalar, CfError> {
        match self {
            Scalar::Complex(c) if c.is_zero() => Err(CfError::Domain("logarithm of zero".into())),
            Scalar::Complex(c) => Ok(Scalar::Complex(c.ln())),
            Scalar::Rational(_) => Err(CfError::NeedsComplex("logarithm".into())),
        }
    }

    pub fn exp(&self) -> Result<Scalar, CfError> {
        match self {
            Scalar::Complex(c) => Ok(Scalar::Complex(c.exp())),
            Scalar::Rational(r) if r.is_zero() => Ok(Scalar::one(Mode::Rational)),
            Scalar::Rational(_) => Err(CfError::NeedsComplex("exponential".into())),
        }
    }

    /// Exact integer power.
    pub fn powi(&self, n: i64) -> Result<Scalar, CfError> {
        let mut base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Scalar::one(self.mode());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Principal power `self^w = exp(w log self)`. Integer exponents are
    /// evaluated exactly (and are the only ones allowed in rational mode).
    pub fn pow(&self, w: &Scalar) -> Result<Scalar, CfError> {
        if let Some(k) = w.as_i64() {
            if k == 0 {
                return Ok(Scalar::one(self.mode()));
            }
            if self.is_zero() && k < 0 {
                return Err(CfError::Domain("zero to a negative power".into()));
            }
            let base = match (self, w) {
                (Scalar::Rational(_), Scalar::Complex(c)) => self.to_mode(Mode::Complex { digits: c.digits })?,
                _ => self.clone(),
            };
            return base.powi(k);
        }
        let (z, w) = match (self, w) {
            (Scalar::Rational(_), Scalar::Rational(_)) => {
                return Err(CfError::NeedsComplex("non-integer power".into()));
            }
            (Scalar::Rational(_), Scalar::Complex(c)) => (self.to_mode(Mode::Complex { digits: c.digits })?, w.clone()),
            (Scalar::Complex(c), Scalar::Rational(_)) => (self.clone(), w.to_mode(Mode::Complex { digits: c.digits })?),
            _ => (self.clone(), w.clone()),
        };
        if z.is_zero() {
            return match w.cmp_real(&Scalar::zero(w.mode())) {
                Ordering::Greater => Ok(Scalar::zero(z.mode())),
                _ => Err(CfError::Domain("zero to a power with non-positive real part".into())),
            };
        }
        (&w * &z.ln()?).exp()
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        match self {
            Scalar::Rational(r) => num_complex::Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0),
            Scalar::Complex(c) => c.to_c64(),
        }
    }

    /// log10 |z|, `-inf` for zero. Works far outside the f64 exponent range.
    pub fn log10_abs(&self) -> f64 {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    return f64::NEG_INFINITY;
                }
                big_log10(r.numer()) - big_log10(r.denom())
            }
            Scalar::Complex(c) => {
                let Some(e) = c.max_exponent() else {
                    return f64::NEG_INFINITY;
                };
                let mut scaled = c.clone();
                scaled.scale_pow2(-e);
                let m = scaled.to_c64().norm();
                m.log10() + e as f64 * std::f64::consts::LOG10_2
            }
        }
    }

    /// Multiplies by 2^k; exact. Rational values are scaled by the power of two exactly as well.
    pub fn scale_pow2(&self, k: i64) -> Scalar {
        match self {
            Scalar::Complex(c) => {
                let mut c = c.clone();
                c.scale_pow2(k);
                Scalar::Complex(c)
            }
            Scalar::Rational(r) => {
                let two = BigInt::from(2);
                let f = num_traits::pow(two, k.unsigned_abs() as usize);
                if k >= 0 {
                    Scalar::Rational(r * BigRational::from_integer(f))
                } else {
                    Scalar::Rational(r / BigRational::from_integer(f))
                }
            }
        }
    }

    /// Binary exponent of the largest part (complex mode), used for renormalization.
    pub(crate) fn binary_exponent(&self) -> Option<i64> {
        match self {
            Scalar::Complex(c) => c.max_exponent(),
            Scalar::Rational(_) => None,
        }
    }

    pub fn precision_mixed(&self) -> bool {
        matches!(self, Scalar::Complex(c) if c.mixed)
    }

    /// |self − other| ≤ 10^(2−digits)·max(1, |other|) in complex mode; exact equality in rational mode.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a == b,
            _ => {
                let digits = self.mode().digits().or(other.mode().digits()).unwrap_or(MIN_DIGITS);
                self.rel_close(other, 2.0 - digits as f64)
            }
        }
    }

    /// |self − other| ≤ 10^log10_tol · max(1, |other|).
    pub fn rel_close(&self, other: &Scalar, log10_tol: f64) -> bool {
        let mode = match (self.mode(), other.mode()) {
            (Mode::Rational, m) | (m, Mode::Rational) => m,
            (a, _) => a,
        };
        let (Ok(a), Ok(b)) = (self.to_mode(mode), other.to_mode(mode)) else {
            return false;
        };
        let diff = (&a - &b).log10_abs();
        let scale = b.log10_abs().max(0.0);
        diff <= log10_tol + scale
    }

    /// Parses the text forms `p`, `p/q`, decimals, and complex `re+imi`.
    /// Integers and fractions give exact rationals; anything with a decimal
    /// point, exponent or imaginary unit gives a complex float at `digits`.
    pub fn parse(text: &str, digits: u32) -> Result<Scalar, CfError> {
        let t = text.trim();
        if looks_rational(t) {
            parse_fraction(t).map(Scalar::Rational)
        } else {
            parse_complex(t, digits)
        }
    }

    /// Parses into the requested mode. Decimal literals convert exactly in rational mode.
    pub fn parse_in(text: &str, mode: Mode) -> Result<Scalar, CfError> {
        let t = text.trim();
        match mode {
            Mode::Rational => {
                if looks_rational(t) {
                    parse_fraction(t).map(Scalar::Rational)
                } else if t.ends_with('i') {
                    Err(CfError::ModeMismatch {
                        context: format!("complex literal {t:?} in rational mode"),
                    })
                } else {
                    parse_decimal_exact(t).map(Scalar::Rational)
                }
            }
            Mode::Complex { digits } => {
                if looks_rational(t) {
                    Ok(Scalar::Rational(parse_fraction(t)?).to_mode(mode)?)
                } else {
                    parse_complex(t, digits)
                }
            }
        }
    }

    /// True when `text` is in the exact integer or fraction form.
    pub fn is_rational_text(text: &str) -> bool {
        looks_rational(text.trim())
    }
}

fn big_log10(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().map(|v| v.abs().log10()).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::NAN);
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

fn looks_rational(t: &str) -> bool {
    let body = t.strip_prefix('-').or_else(|| t.strip_prefix('+')).unwrap_or(t);
    let (num, den) = body.split_once('/').unwrap_or((body, "1"));
    let den = den.strip_prefix('+').unwrap_or(den);
    !num.is_empty() && !den.is_empty() && num.bytes().all(|b| b.is_ascii_digit()) && den.bytes().all(|b| b.is_ascii_digit())
}

fn parse_err(text: &str, reason: &str) -> CfError {
    CfError::Parse { text: text.to_string(), reason: reason.to_string() }
}

fn parse_fraction(t: &str) -> Result<BigRational, CfError> {
    let (num, den) = t.split_once('/').unwrap_or((t, "1"));
    let n = BigInt::from_str(num.trim_start_matches('+')).map_err(|_| parse_err(t, "bad integer"))?;
    let d = BigInt::from_str(den.trim_start_matches('+')).map_err(|_| parse_err(t, "bad integer"))?;
    if d.is_zero() {
        return Err(parse_err(t, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

/// Exact conversion of `[-]ddd.ddd[e[-]dd]` to a rational.
fn parse_decimal_exact(t: &str) -> Result<BigRational, CfError> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| parse_err(t, "bad exponent"))?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() || !ip.bytes().chain(fp.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(parse_err(t, "bad decimal"));
    }
    let digits = format!("{ip}{fp}");
    let mut n = BigInt::from_str(&digits).map_err(|_| parse_err(t, "bad decimal"))?;
    if neg {
        n = -n;
    }
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * p)
    } else {
        BigRational::new(n, p)
    })
}

fn parse_real_float(t: &str, digits: u32) -> Result<BigFloat, CfError> {
    let p = bits_for_digits(digits);
    if looks_rational(t) {
        return Ok(ratio_to_float(&parse_fraction(t)?, p));
    }
    // validate first: astro-float reports malformed input only as NaN
    parse_decimal_exact(t)?;
    let x = with_consts(|cc| BigFloat::parse(t, Radix::Dec, p, RM, cc));
    if x.is_nan() {
        return Err(parse_err(t, "not a number"));
    }
    Ok(x)
}

fn parse_complex(t: &str, digits: u32) -> Result<Scalar, CfError> {
    if digits < MIN_DIGITS {
        return Err(CfError::Precision { digits, min: MIN_DIGITS });
    }
    if let Some((num, den)) = t.rsplit_once('/').filter(|(num, _)| num.ends_with('i')) {
        // `z/q`: a complex literal over an exact denominator, e.g. `i/2`
        let den = parse_fraction(den.trim())?;
        let z = parse_complex(num.trim(), digits)?;
        return z.checked_div(&Scalar::Rational(den).to_mode(Mode::Complex { digits })?);
    }
    let Some(body) = t.strip_suffix('i') else {
        let re = parse_real_float(t, digits)?;
        return Ok(Scalar::Complex(ComplexFloat::real(re, digits)));
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_txt, im_txt) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im_txt = match im_txt {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = parse_real_float(re_txt, digits)?;
    let im = parse_real_float(im_txt.strip_prefix('+').unwrap_or(im_txt), digits)?;
    Ok(Scalar::Complex(ComplexFloat::new(re, im, digits, false)))
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a == b,
            (Scalar::Complex(a), Scalar::Complex(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Complex(c) => {
                let digits = f.precision().unwrap_or(c.digits as usize);
                f.write_str(&c.format_with(digits))
            }
        }
    }
}

impl Scalar {
    /// Text for reports: exact when the rational form is at most `max_len`
    /// characters, otherwise `digits` significant decimal digits.
    pub fn to_report_string(&self, digits: u32, max_len: usize) -> String {
        match self {
            Scalar::Rational(r) => {
                let exact = self.to_string();
                if exact.len() <= max_len {
                    exact
                } else {
                    ComplexFloat::from_rational(r, digits.max(MIN_DIGITS)).format_with(digits as usize)
                }
            }
            Scalar::Complex(c) => c.format_with((digits as usize).min(c.digits as usize)),
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn combine(lhs: &Scalar, rhs: &Scalar, op: &str) -> ! {
    panic!(
        "scalar mode mismatch in `{op}`: {} with {}",
        lhs.mode().name(),
        rhs.mode().name()
    )
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt, $cf:ident) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a $op b),
                    (Scalar::Complex(a), Scalar::Complex(b)) => Scalar::Complex(a.$cf(b)),
                    _ => combine(self, rhs, stringify!($method)),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +, add);
scalar_binop!(Sub, sub, -, sub);
scalar_binop!(Mul, mul, *, mul);
scalar_binop!(Div, div, /, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Complex(c) => Scalar::Complex(c.neg()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}
