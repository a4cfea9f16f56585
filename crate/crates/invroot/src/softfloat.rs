//! Simulated custom-precision binary floating point.
//!
//! A [`FloatFormat`] describes an IEEE-754-style binary format by its
//! exponent and stored mantissa widths. Values live in ordinary `f64`
//! variables; [`FloatFormat::quantize`] rounds an `f64` to the nearest
//! value representable in the format, and the arithmetic helpers compute
//! at reference precision and round once. Every representable value of
//! every admissible format is exactly representable in `f64`, so the
//! simulation is bit-faithful to narrow hardware for single operations.

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// 2^k as an exact `f64`, for k in -1074..=1023.
#[inline]
pub(crate) fn exp2i(k: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&k));
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        // subnormal powers of two
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// x * 2^k, exact whenever the mathematical result is representable.
#[inline]
fn mul_pow2(x: f64, k: i32) -> f64 {
    if k > 1023 {
        // split so each factor stays in range (k ≤ 1074 in practice)
        x * exp2i(1023) * exp2i(k - 1023)
    } else {
        x * exp2i(k)
    }
}

/// A custom binary floating-point format: 1 sign bit, `exponent_bits`
/// exponent bits and `mantissa_bits` stored mantissa bits, with IEEE
/// conventions (hidden leading bit, all-ones exponent reserved for
/// infinities/NaN, exponent zero for subnormals).
///
/// Rounding is always round-to-nearest-even. Subnormals are supported by
/// default and can be disabled with [`with_subnormals`](Self::with_subnormals),
/// in which case results in the subnormal range flush to signed zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatFormat {
    exponent_bits: u32,
    mantissa_bits: u32,
    subnormals: bool,
    // cached derived constants
    min_exp: i32, // exponent of the smallest normal value
    max_finite: f64,
    min_normal: f64,
}

impl FloatFormat {
    /// Builds a format with the given exponent and stored-mantissa widths.
    ///
    /// Widths are capped at the reference (`f64`) widths so that every
    /// representable value is exact at reference precision.
    pub fn new(exponent_bits: u32, mantissa_bits: u32) -> Result<Self> {
        if !(1..=11).contains(&exponent_bits) {
            return Err(Error::InvalidFormat(format!(
                "exponent bits must be in 1..=11, got {exponent_bits}"
            )));
        }
        if mantissa_bits > 52 {
            return Err(Error::InvalidFormat(format!(
                "mantissa bits must be in 0..=52, got {mantissa_bits}"
            )));
        }
        let bias = (1i32 << (exponent_bits - 1)) - 1;
        let min_exp = 1 - bias;
        let (max_finite, min_normal) = if exponent_bits >= 2 {
            let max_exp = bias; // 2^E - 2 - bias
            let max_significand = 2.0 - exp2i(-(mantissa_bits as i32));
            (mul_pow2(max_significand, max_exp), exp2i(min_exp))
        } else {
            // one exponent bit: the all-ones pattern is reserved, so only
            // subnormals exist
            let steps = (1u64 << mantissa_bits) - 1;
            (
                steps as f64 * exp2i(min_exp - mantissa_bits as i32),
                exp2i(min_exp),
            )
        };
        Ok(FloatFormat {
            exponent_bits,
            mantissa_bits,
            subnormals: true,
            min_exp,
            max_finite,
            min_normal,
        })
    }

    /// Builds a format with the reference exponent width (11 bits) and a
    /// custom mantissa width. Mantissa sweeps that do not care about the
    /// exponent range use this.
    pub fn with_mantissa(mantissa_bits: u32) -> Result<Self> {
        FloatFormat::new(11, mantissa_bits)
    }

    /// IEEE binary16: 5 exponent bits, 10 stored mantissa bits.
    pub fn half() -> Self {
        FloatFormat::new(5, 10).unwrap()
    }

    /// IEEE binary32: 8 exponent bits, 23 stored mantissa bits.
    pub fn single() -> Self {
        FloatFormat::new(8, 23).unwrap()
    }

    /// IEEE binary64: the reference format; quantization is the identity.
    pub fn double() -> Self {
        FloatFormat::new(11, 52).unwrap()
    }

    /// Returns a copy with subnormal support switched on or off.
    pub fn with_subnormals(mut self, enabled: bool) -> Self {
        self.subnormals = enabled;
        self
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn supports_subnormals(&self) -> bool {
        self.subnormals
    }

    /// Largest finite representable value.
    pub fn max_finite(&self) -> f64 {
        self.max_finite
    }

    /// Smallest positive normal value.
    pub fn min_normal(&self) -> f64 {
        self.min_normal
    }

    /// Smallest positive subnormal value (the grid quantum below
    /// `min_normal`).
    pub fn min_subnormal(&self) -> f64 {
        exp2i(self.min_exp - self.mantissa_bits as i32)
    }

    /// Rounds `x` to the nearest representable value (ties to even).
    ///
    /// Overflow beyond [`max_finite`](Self::max_finite) returns signed
    /// infinity, values closer to zero than half the smallest subnormal
    /// return signed zero, and NaN/infinities pass through unchanged.
    #[inline]
    pub fn quantize(&self, x: f64) -> f64 {
        if x.is_nan() || x.is_infinite() || x == 0.0 {
            return x;
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let y = if biased >= self.min_exp + 1023 {
            // normal range of the target: round the significand in place;
            // a mantissa carry propagates into the exponent field, which is
            // exactly the required behavior at a binade boundary
            let shift = 52 - self.mantissa_bits;
            if shift == 0 {
                x
            } else {
                let lsb = (bits >> shift) & 1;
                let round = (1u64 << (shift - 1)) - 1 + lsb;
                f64::from_bits((bits + round) & !((1u64 << shift) - 1))
            }
        } else {
            // subnormal range: fixed quantum 2^(min_exp - mantissa_bits)
            let quantum_exp = self.min_exp - self.mantissa_bits as i32;
            let scaled = mul_pow2(x, -quantum_exp);
            scaled.round_ties_even() * exp2i(quantum_exp)
        };
        if y.abs() > self.max_finite {
            return f64::INFINITY.copysign(x);
        }
        if y == 0.0 || (!self.subnormals && y.abs() < self.min_normal) {
            return 0.0f64.copysign(x);
        }
        y
    }

    /// Correctly rounded addition: the sum is formed at reference
    /// precision and rounded once.
    #[inline]
    pub fn add(&self, a: f64, b: f64) -> f64 {
        self.quantize(a + b)
    }

    /// Subtraction; negation is exact, so this matches `add(a, -b)`.
    #[inline]
    pub fn sub(&self, a: f64, b: f64) -> f64 {
        self.quantize(a - b)
    }

    /// Correctly rounded multiplication.
    #[inline]
    pub fn mul(&self, a: f64, b: f64) -> f64 {
        self.quantize(a * b)
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "float:e{}m{}", self.exponent_bits, self.mantissa_bits)
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    /// Parses `float:e<E>m<M>`, `float:m<M>` (exponent defaults to 11) or
    /// one of the aliases `half`, `single`, `double`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => return Ok(FloatFormat::half()),
            "single" => return Ok(FloatFormat::single()),
            "double" => return Ok(FloatFormat::double()),
            _ => {}
        }
        let body = s
            .strip_prefix("float:")
            .ok_or_else(|| Error::InvalidFormat(format!("not a float format: {s:?}")))?;
        let bad = || Error::InvalidFormat(format!("expected float:e<E>m<M>, got {s:?}"));
        if let Some(rest) = body.strip_prefix('e') {
            let (e, m) = rest.split_once('m').ok_or_else(bad)?;
            let e: u32 = e.parse().map_err(|_| bad())?;
            let m: u32 = m.parse().map_err(|_| bad())?;
            FloatFormat::new(e, m)
        } else if let Some(m) = body.strip_prefix('m') {
            FloatFormat::with_mantissa(m.parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_footnote_widths() {
        let h = FloatFormat::half();
        assert_eq!((h.exponent_bits(), h.mantissa_bits()), (5, 10));
        let s = FloatFormat::single();
        assert_eq!((s.exponent_bits(), s.mantissa_bits()), (8, 23));
        let d = FloatFormat::double();
        assert_eq!((d.exponent_bits(), d.mantissa_bits()), (11, 52));
    }

    #[test]
    fn half_range_constants() {
        let h = FloatFormat::half();
        assert_eq!(h.max_finite(), 65504.0);
        assert_eq!(h.min_normal(), exp2i(-14));
        assert_eq!(h.min_subnormal(), exp2i(-24));
    }

    #[test]
    fn quantize_powers_of_two_exact() {
        let h = FloatFormat::half();
        assert_eq!(h.quantize(1.0), 1.0);
        assert_eq!(h.quantize(-4.0), -4.0);
        assert_eq!(h.quantize(0.5), 0.5);
    }

    #[test]
    fn quantize_one_third_two_mantissa_bits() {
        // nearest 2-bit-mantissa value to 1/3 is 1.01b * 2^-2 = 0.3125
        let fmt = FloatFormat::new(8, 2).unwrap();
        assert_eq!(fmt.quantize(1.0 / 3.0), 0.3125);
    }

    #[test]
    fn quantize_overflow_to_infinity() {
        let h = FloatFormat::half();
        assert_eq!(h.quantize(65520.0), f64::INFINITY);
        assert_eq!(h.quantize(-65520.0), f64::NEG_INFINITY);
        assert_eq!(h.quantize(65519.0), 65504.0);
        assert_eq!(h.quantize(1e300), f64::INFINITY);
    }

    #[test]
    fn quantize_signed_zero_and_specials() {
        let h = FloatFormat::half();
        assert!(h.quantize(-0.0).is_sign_negative());
        assert_eq!(h.quantize(-0.0), 0.0);
        assert!(h.quantize(f64::NAN).is_nan());
        assert_eq!(h.quantize(f64::INFINITY), f64::INFINITY);
        // underflow keeps the sign
        assert!(h.quantize(-1e-30).is_sign_negative());
        assert_eq!(h.quantize(-1e-30), 0.0);
    }

    #[test]
    fn quantize_subnormal_grid() {
        let h = FloatFormat::half();
        let tiny = exp2i(-24);
        assert_eq!(h.quantize(tiny), tiny);
        // exactly half the smallest subnormal: ties-to-even gives zero
        assert_eq!(h.quantize(exp2i(-25)), 0.0);
        assert_eq!(h.quantize(1.5 * exp2i(-25)), tiny);
        // 3/2 quantum is a tie between 1 and 2 quanta: even wins
        assert_eq!(h.quantize(1.5 * tiny), 2.0 * tiny);
    }

    #[test]
    fn flush_to_zero_disables_subnormals() {
        let h = FloatFormat::half().with_subnormals(false);
        assert_eq!(h.quantize(exp2i(-24)), 0.0);
        assert_eq!(h.quantize(exp2i(-14)), exp2i(-14));
        assert!(h.quantize(-exp2i(-24)).is_sign_negative());
    }

    #[test]
    fn add_drops_bits_beyond_mantissa() {
        let h = FloatFormat::half();
        assert_eq!(h.add(1.0, 2.0), 3.0);
        // 2049 needs 12 mantissa bits; ties-to-even drops the addend
        assert_eq!(h.add(2048.0, 1.0), 2048.0);
        assert_eq!(h.add(2048.0, 3.0), 2052.0);
    }

    #[test]
    fn mul_rounds_once() {
        let h = FloatFormat::half();
        assert_eq!(h.mul(1.5, 2.0), 3.0);
        let tenth = h.quantize(0.1);
        assert_eq!(tenth, 0.0999755859375);
        assert_eq!(h.mul(tenth, tenth), h.quantize(tenth * tenth));
        assert_eq!(h.mul(h.max_finite(), 2.0), f64::INFINITY);
    }

    #[test]
    fn sub_is_add_of_negation() {
        let h = FloatFormat::half();
        assert_eq!(h.sub(2048.0, -1.0), h.add(2048.0, 1.0));
        assert_eq!(h.sub(1.0, 0.25), 0.75);
    }

    #[test]
    fn double_is_identity() {
        let d = FloatFormat::double();
        for &x in &[
            0.1,
            -1.0 / 3.0,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324,
            -5e-324,
            1.234567890123456e-300,
        ] {
            assert_eq!(d.quantize(x).to_bits(), x.to_bits());
        }
    }

    #[test]
    fn format_strings_round_trip() {
        for s in ["float:e5m10", "float:e11m8", "float:e8m23"] {
            let f: FloatFormat = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert_eq!("half".parse::<FloatFormat>().unwrap(), FloatFormat::half());
        assert_eq!(
            "float:m7".parse::<FloatFormat>().unwrap(),
            FloatFormat::new(11, 7).unwrap()
        );
        assert!("float:e0m3".parse::<FloatFormat>().is_err());
        assert!("float:e5m53".parse::<FloatFormat>().is_err());
        assert!("float:5m10".parse::<FloatFormat>().is_err());
        assert!("fixed:i3f4".parse::<FloatFormat>().is_err());
    }
}
