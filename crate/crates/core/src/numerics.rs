//! Multi-precision scalars with running error bounds.
//!
//! A [`TrackedScalar`] pairs an MPFR value (round-to-nearest at the context
//! precision) with an absolute error bound `err` such that the exact real
//! quantity the computation denotes lies in `[value - err, value + err]`.
//!
//! The bound is kept as an `f64` and every operation on it is rounded toward
//! `+inf` by stepping one ulp up after a round-to-nearest operation. Values are
//! probabilities and small intermediates, so the `f64` exponent range is more
//! than enough; anything that underflows is bumped to the smallest subnormal,
//! which keeps the bound valid.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use rug::float::Round;
use rug::{Float, Rational};
use thiserror::Error;

/// Smallest mantissa length accepted by [`PrecisionContext::new`].
pub const MIN_MANTISSA_BITS: u32 = 24;
/// Precision used for certified runs.
pub const CERTIFIED_BITS: u32 = 256;
/// Precision used for quick runs.
pub const QUICK_BITS: u32 = 53;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("mantissa length {0} is below the minimum of {MIN_MANTISSA_BITS} bits")]
    PrecisionTooSmall(u32),
    #[error("mantissa length {0} exceeds the MPFR maximum")]
    PrecisionTooLarge(u32),
    #[error("divisor interval {value} +/- {err:e} contains zero")]
    DivisorContainsZero { value: f64, err: f64 },
}

/// Working precision shared by every scalar of one computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionContext {
    mantissa_bits: u32,
    unit_roundoff: f64,
}

impl PrecisionContext {
    pub fn new(mantissa_bits: u32) -> Result<Self, NumericsError> {
        if mantissa_bits < MIN_MANTISSA_BITS {
            return Err(NumericsError::PrecisionTooSmall(mantissa_bits));
        }
        if mantissa_bits > rug::float::prec_max() {
            return Err(NumericsError::PrecisionTooLarge(mantissa_bits));
        }
        // 2^(1-p); past the f64 range fall back to the smallest subnormal,
        // still an upper bound on the true roundoff.
        let exp = 1 - mantissa_bits as i64;
        let unit_roundoff = if exp >= -1022 {
            f64::from_bits(((exp + 1023) as u64) << 52)
        } else if exp >= -1074 {
            f64::from_bits(1u64 << (exp + 1074))
        } else {
            f64::from_bits(1)
        };
        Ok(Self {
            mantissa_bits,
            unit_roundoff,
        })
    }

    pub fn certified() -> Self {
        Self::new(CERTIFIED_BITS).expect("default precision is valid")
    }

    pub fn quick() -> Self {
        Self::new(QUICK_BITS).expect("default precision is valid")
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// Upper bound on the relative rounding error of one operation.
    pub fn unit_roundoff(&self) -> f64 {
        self.unit_roundoff
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.next_up()
    }
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

/// Sum of non-negative bounds, rounded up.
#[inline]
fn up_add(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        b
    } else if b == 0.0 {
        a
    } else {
        up(a + b)
    }
}

#[inline]
fn up_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        up(a * b)
    }
}

/// A floating-point value with a rigorous absolute error bound.
#[derive(Clone, PartialEq)]
pub struct TrackedScalar {
    value: Float,
    err: f64,
    ctx: PrecisionContext,
}

impl TrackedScalar {
    /// An exactly known value: `err = 0`. Panics if `v` is not representable.
    pub fn exact_int(v: i64, ctx: PrecisionContext) -> Self {
        let (value, ord) = Float::with_val_round(ctx.mantissa_bits, v, Round::Nearest);
        assert_eq!(
            ord,
            Ordering::Equal,
            "{v} is not representable at {} bits",
            ctx.mantissa_bits
        );
        Self {
            value,
            err: 0.0,
            ctx,
        }
    }

    pub fn zero(ctx: PrecisionContext) -> Self {
        Self::exact_int(0, ctx)
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        Self::exact_int(1, ctx)
    }

    /// Rounds an exact rational. Dyadic inputs that fit the mantissa carry no error.
    pub fn from_rational(q: &Rational, ctx: PrecisionContext) -> Self {
        let (value, ord) = Float::with_val_round(ctx.mantissa_bits, q, Round::Nearest);
        let err = if ord == Ordering::Equal {
            0.0
        } else {
            rounding_term(&value, ctx)
        };
        Self { value, err, ctx }
    }

    /// Rounds an `f64` input; exact whenever the context has at least 53 bits.
    pub fn from_f64(v: f64, ctx: PrecisionContext) -> Self {
        let (value, ord) = Float::with_val_round(ctx.mantissa_bits, v, Round::Nearest);
        let err = if ord == Ordering::Equal {
            0.0
        } else {
            rounding_term(&value, ctx)
        };
        Self { value, err, ctx }
    }

    /// Builds a scalar from explicit parts. The caller vouches for `err`.
    pub fn from_parts(value: Float, err: f64, ctx: PrecisionContext) -> Self {
        assert!(
            err >= 0.0 || err.is_nan(),
            "error bound must be non-negative"
        );
        let err = if err.is_nan() { f64::INFINITY } else { err };
        let mut value = value;
        value.set_prec_round(ctx.mantissa_bits, Round::Nearest);
        Self { value, err, ctx }
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn err(&self) -> f64 {
        self.err
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Upper bound on `|value|` as an `f64`.
    pub fn abs_upper(&self) -> f64 {
        abs_up(&self.value)
    }

    /// Rigorous lower end of the enclosure, rounded down.
    pub fn lower_f64(&self) -> f64 {
        down(self.value.to_f64_round(Round::Down) - self.err)
    }

    /// Rigorous upper end of the enclosure, rounded up.
    pub fn upper_f64(&self) -> f64 {
        up(self.value.to_f64_round(Round::Up) + self.err)
    }

    /// Uses the prior knowledge that the exact value lies in `[0, 1]`: the
    /// bound is capped at the distance to the farther end, so it never
    /// exceeds 1. The value itself is kept.
    pub fn clamp_unit(&self) -> Self {
        let (v_lo, v_hi) = (
            self.value.to_f64_round(Round::Down),
            self.value.to_f64_round(Round::Up),
        );
        if !(0.0..=1.0).contains(&v_lo) || !(0.0..=1.0).contains(&v_hi) {
            return self.clone();
        }
        let cap = up(v_hi.max(up(1.0 - v_lo)));
        if self.err <= cap {
            return self.clone();
        }
        Self {
            value: self.value.clone(),
            err: cap,
            ctx: self.ctx,
        }
    }

    /// A quantity known only to lie in `[0, 1]`, centred on `value` (clamped
    /// into the interval) with the smallest bound that covers all of it.
    pub fn unit_cover(value: Float, ctx: PrecisionContext) -> Self {
        let mut value = if value.is_nan() || value < 0 {
            Float::with_val(ctx.mantissa_bits, 0)
        } else if value > 1 {
            Float::with_val(ctx.mantissa_bits, 1)
        } else {
            value
        };
        value.set_prec_round(ctx.mantissa_bits, Round::Nearest);
        let (v_lo, v_hi) = (
            value.to_f64_round(Round::Down),
            value.to_f64_round(Round::Up),
        );
        let err = up(v_hi.max(up(1.0 - v_lo)));
        Self { value, err, ctx }
    }

    /// True when the enclosure `[value - err, value + err]` contains zero.
    pub fn interval_contains_zero(&self) -> bool {
        if self.value.is_zero() {
            return true;
        }
        abs_down(&self.value) <= self.err
    }

    /// True when `x` lies in the enclosure, checked exactly.
    pub fn encloses(&self, x: &Rational) -> bool {
        let v = self.value.to_rational().expect("finite value");
        let diff = Rational::from(&v - x).abs();
        match Rational::from_f64(self.err) {
            Some(e) => diff <= e,
            None => true,
        }
    }

    /// True when `other`'s value lies in this enclosure, widened by `other`'s own bound.
    pub fn agrees_with(&self, other: &TrackedScalar) -> bool {
        let a = self.value.to_rational().expect("finite value");
        let b = other.value.to_rational().expect("finite value");
        let diff = Rational::from(&a - &b).abs();
        match Rational::from_f64(up_add(self.err, other.err)) {
            Some(e) => diff <= e,
            None => true,
        }
    }

    fn check_ctx(&self, other: &Self) {
        debug_assert_eq!(
            self.ctx.mantissa_bits, other.ctx.mantissa_bits,
            "operands from different precision contexts"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value + &other.value);
        let err = up_add(up_add(self.err, other.err), rounding_term(&value, self.ctx));
        Self {
            value,
            err,
            ctx: self.ctx,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value - &other.value);
        let err = up_add(up_add(self.err, other.err), rounding_term(&value, self.ctx));
        Self {
            value,
            err,
            ctx: self.ctx,
        }
    }

    /// Product with the full rule `|a|eb + |b|ea + ea*eb + u|ab|`.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value * &other.value);
        let cross = up_add(
            up_mul(self.abs_upper(), other.err),
            up_mul(other.abs_upper(), self.err),
        );
        let err = up_add(
            up_add(cross, up_mul(self.err, other.err)),
            rounding_term(&value, self.ctx),
        );
        Self {
            value,
            err,
            ctx: self.ctx,
        }
    }

    /// Product with an exact integer.
    pub fn mul_int(&self, n: u32) -> Self {
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value * n);
        let err = up_add(up_mul(self.err, n as f64), rounding_term(&value, self.ctx));
        Self {
            value,
            err,
            ctx: self.ctx,
        }
    }

    /// Quotient. The divisor's enclosure must exclude zero.
    ///
    /// The propagated part is `(ea|b| + |a|eb) / (|b| (|b| - eb))`, which is
    /// exact for the worst case inside both enclosures.
    pub fn div(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_ctx(other);
        if other.interval_contains_zero() {
            return Err(NumericsError::DivisorContainsZero {
                value: other.to_f64(),
                err: other.err,
            });
        }
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value / &other.value);
        let b_lo = abs_down(&other.value);
        let gap = down(b_lo - other.err);
        let propagated = if self.err == 0.0 && other.err == 0.0 {
            0.0
        } else if gap <= 0.0 {
            f64::INFINITY
        } else {
            let num = up_add(
                up_mul(self.err, abs_up(&other.value)),
                up_mul(self.abs_upper(), other.err),
            );
            let den = down(b_lo * gap);
            if den <= 0.0 {
                f64::INFINITY
            } else {
                up(num / den)
            }
        };
        let err = up_add(propagated, rounding_term(&value, self.ctx));
        Ok(Self {
            value,
            err,
            ctx: self.ctx,
        })
    }

    /// Division by an exact positive integer.
    pub fn div_int(&self, n: u32) -> Self {
        assert!(n > 0, "division by zero");
        let value = Float::with_val(self.ctx.mantissa_bits, &self.value / n);
        let err = up_add(up(self.err / n as f64), rounding_term(&value, self.ctx));
        Self {
            value,
            err,
            ctx: self.ctx,
        }
    }

    /// Re-evaluates this scalar at another precision without changing its
    /// meaning: the bound gains the conversion rounding.
    pub fn with_ctx(&self, ctx: PrecisionContext) -> Self {
        let (value, ord) = Float::with_val_round(ctx.mantissa_bits, &self.value, Round::Nearest);
        let err = if ord == Ordering::Equal {
            self.err
        } else {
            up_add(self.err, rounding_term(&value, ctx))
        };
        Self { value, err, ctx }
    }

    /// Total order used by [`sum_sorted`]: by value, then by bound.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal)
            .then(self.err.total_cmp(&other.err))
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_string_digits(&self, digits: usize) -> String {
        format_float(&self.value, digits)
    }
}

impl fmt::Debug for TrackedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {:e} @{}b",
            format_float(&self.value, 25),
            self.err,
            self.ctx.mantissa_bits
        )
    }
}

impl fmt::Display for TrackedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", format_float(&self.value, 20), self.err)
    }
}

impl Add for &TrackedScalar {
    type Output = TrackedScalar;
    fn add(self, rhs: Self) -> TrackedScalar {
        TrackedScalar::add(self, rhs)
    }
}

impl Sub for &TrackedScalar {
    type Output = TrackedScalar;
    fn sub(self, rhs: Self) -> TrackedScalar {
        TrackedScalar::sub(self, rhs)
    }
}

impl Mul for &TrackedScalar {
    type Output = TrackedScalar;
    fn mul(self, rhs: Self) -> TrackedScalar {
        TrackedScalar::mul(self, rhs)
    }
}

fn rounding_term(value: &Float, ctx: PrecisionContext) -> f64 {
    if value.is_zero() {
        0.0
    } else {
        up_mul(ctx.unit_roundoff, abs_up(value)).max(f64::from_bits(1))
    }
}

fn abs_up(v: &Float) -> f64 {
    if v.is_sign_negative() {
        -v.to_f64_round(Round::Down)
    } else {
        v.to_f64_round(Round::Up)
    }
}

fn abs_down(v: &Float) -> f64 {
    if v.is_sign_negative() {
        -v.to_f64_round(Round::Up)
    } else {
        v.to_f64_round(Round::Down)
    }
}

/// Formats `v` in scientific-free decimal when reasonable, otherwise with an exponent.
pub fn format_float(v: &Float, digits: usize) -> String {
    let digits = digits.max(1);
    if v.is_zero() {
        return "0".to_string();
    }
    let s = v.to_string_radix(10, Some(digits));
    // rug renders as "d.ddde-N"; rewrite moderate exponents in plain form.
    match s.split_once('e') {
        Some((mant, exp)) => {
            let exp: i64 = exp.parse().unwrap_or(0);
            if (-30..=0).contains(&exp) {
                let neg = mant.starts_with('-');
                let digits_only: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
                let zeros = (-exp - 1) as usize;
                let body = format!("0.{}{}", "0".repeat(zeros), digits_only);
                if neg {
                    format!("-{body}")
                } else {
                    body
                }
            } else {
                s
            }
        }
        None => s,
    }
}

/// Sums the terms after sorting them by value.
///
/// Sorting makes the result depend only on the multiset of terms, so sums
/// whose terms are permuted (e.g. by the red/blue color swap) agree bit for bit.
pub fn sum_sorted(mut terms: Vec<TrackedScalar>, ctx: PrecisionContext) -> TrackedScalar {
    terms.sort_by(|a, b| a.total_cmp(b));
    let mut iter = terms.into_iter();
    match iter.next() {
        None => TrackedScalar::zero(ctx),
        Some(first) => iter.fold(first, |acc, t| acc.add(&t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits).unwrap()
    }

    #[test]
    fn context_rejects_small_mantissa() {
        assert_eq!(
            PrecisionContext::new(23),
            Err(NumericsError::PrecisionTooSmall(23))
        );
        assert!(PrecisionContext::new(24).is_ok());
    }

    #[test]
    fn unit_roundoff_is_power_of_two() {
        assert_eq!(ctx(53).unit_roundoff(), 2f64.powi(-52));
        assert_eq!(ctx(256).unit_roundoff(), 2f64.powi(-255));
        assert!(ctx(2000).unit_roundoff() > 0.0);
        let mut prev = f64::INFINITY;
        for bits in [
            24, 53, 64, 113, 256, 512, 1023, 1024, 1074, 1075, 1200, 4096,
        ] {
            let u = ctx(bits).unit_roundoff();
            assert!(u > 0.0 && u <= prev, "{bits}");
            prev = u;
        }
    }

    #[test]
    fn add_exact_sum_only_rounding_term() {
        let c = ctx(53);
        let s = TrackedScalar::one(c).add(&TrackedScalar::zero(c));
        assert_eq!(s.to_f64(), 1.0);
        assert!(s.err() >= c.unit_roundoff());
        assert!(s.err() <= 1.01 * c.unit_roundoff());
    }

    #[test]
    fn add_propagates_input_errors() {
        let c = ctx(53);
        let a = TrackedScalar::from_parts(Float::with_val(53, 0.5), 1e-20, c);
        let b = TrackedScalar::from_parts(Float::with_val(53, 0.25), 1e-20, c);
        let s = &a + &b;
        assert_eq!(s.to_f64(), 0.75);
        assert!(s.err() >= 2e-20 + c.unit_roundoff() * 0.75);
    }

    #[test]
    fn mul_by_zero_is_exact() {
        let c = ctx(53);
        let x = TrackedScalar::from_f64(0.3, c);
        let z = TrackedScalar::zero(c);
        let p = &x * &z;
        assert!(p.value().is_zero());
        assert_eq!(p.err(), 0.0);
    }

    #[test]
    fn mul_keeps_cross_term() {
        let c = ctx(53);
        let e = 1e-10;
        let h = TrackedScalar::from_parts(Float::with_val(53, 0.5), e, c);
        let p = &h * &h;
        assert_eq!(p.to_f64(), 0.25);
        assert!(p.err() >= 0.5 * e + 0.5 * e + e * e + c.unit_roundoff() * 0.25);
    }

    #[test]
    fn div_rejects_interval_through_zero() {
        let c = ctx(53);
        let a = TrackedScalar::one(c);
        let b = TrackedScalar::from_parts(Float::with_val(53, 1e-3), 2e-3, c);
        assert!(matches!(
            a.div(&b),
            Err(NumericsError::DivisorContainsZero { .. })
        ));
        assert!(a.div(&TrackedScalar::zero(c)).is_err());
    }

    #[test]
    fn div_encloses_worst_case() {
        let c = ctx(128);
        let a = TrackedScalar::from_parts(Float::with_val(128, 1), 1e-3, c);
        let b = TrackedScalar::from_parts(Float::with_val(128, 3), 1e-3, c);
        let q = a.div(&b).unwrap();
        for (x, y) in [
            (1.001, 2.999),
            (0.999, 3.001),
            (1.001, 3.001),
            (0.999, 2.999),
        ] {
            let exact = Rational::from_f64(x).unwrap() / Rational::from_f64(y).unwrap();
            assert!(q.encloses(&exact), "{x}/{y}");
        }
    }

    #[test]
    fn dyadic_rationals_convert_exactly() {
        let c = ctx(53);
        let q = Rational::from((1, 1u64 << 18));
        assert_eq!(TrackedScalar::from_rational(&q, c).err(), 0.0);
        let third = Rational::from((1, 3));
        let t = TrackedScalar::from_rational(&third, c);
        assert!(t.err() > 0.0);
        assert!(t.encloses(&third));
    }

    #[test]
    fn interval_zero_test_respects_sign() {
        let c = ctx(53);
        let neg = TrackedScalar::from_parts(Float::with_val(53, -0.5), 0.25, c);
        assert!(!neg.interval_contains_zero());
        let wide = TrackedScalar::from_parts(Float::with_val(53, -0.5), 0.75, c);
        assert!(wide.interval_contains_zero());
    }

    #[test]
    fn err_overflow_propagates_as_infinity() {
        let c = ctx(53);
        let big = TrackedScalar::from_parts(Float::with_val(53, 1), f64::MAX, c);
        let s = &big + &big;
        assert_eq!(s.err(), f64::INFINITY);
        let t = &s * &TrackedScalar::one(c);
        assert_eq!(t.err(), f64::INFINITY);
    }

    #[test]
    fn sorted_sum_is_permutation_invariant() {
        let c = ctx(53);
        let xs: Vec<_> = [0.1, 1e-9, 0.7, 3e-5, 0.2]
            .iter()
            .map(|&v| TrackedScalar::from_f64(v, c))
            .collect();
        let mut ys = xs.clone();
        ys.reverse();
        let a = sum_sorted(xs, c);
        let b = sum_sorted(ys, c);
        assert_eq!(a.value(), b.value());
        assert_eq!(a.err(), b.err());
    }

    #[test]
    fn clamp_unit_caps_bound_and_keeps_value() {
        let c = PrecisionContext::quick();
        let tight = TrackedScalar::from_f64(0.25, c);
        assert!(tight.clamp_unit() == tight);
        let wide = TrackedScalar::from_parts(Float::with_val(53, 0.9), 5.0, c).clamp_unit();
        assert_eq!(wide.to_f64(), 0.9);
        assert!(wide.err() < 0.9 + 1e-15);
        assert!(wide.encloses(&Rational::from(0)) && wide.encloses(&Rational::from(1)));
        let huge =
            TrackedScalar::from_parts(Float::with_val(53, 0.3), f64::INFINITY, c).clamp_unit();
        assert!(huge.encloses(&Rational::from(0)) && huge.encloses(&Rational::from(1)));
        assert!(huge.err() < 0.7 + 1e-15);
        let outside = TrackedScalar::from_parts(Float::with_val(53, 1.5), 3.0, c);
        assert!(outside.clamp_unit() == outside);
    }

    #[test]
    fn formats_plain_decimals() {
        let v = Float::with_val(64, 0.125);
        assert_eq!(format_float(&v, 5), "0.12500");
        assert_eq!(format_float(&Float::with_val(64, 1.5), 3), "1.50");
        assert!(format_float(&Float::with_val(64, 1e-40), 3).contains('e'));
    }
}
