//! Simulated two's-complement fixed-point arithmetic.
//!
//! A [`FixedFormat`] splits a word into `int_bits` integer bits,
//! `frac_bits` fractional bits and one sign bit. Values are held in `f64`
//! variables as exact multiples of the grid step `2^-frac_bits`; the total
//! width is capped at 53 bits so every representable value is exact at
//! reference precision. Out-of-range results saturate to the range bounds
//! rather than wrapping, and on-grid rounding is round-half-to-even, the
//! same tie rule as the float path.

use crate::error::{Error, Result};
use crate::softfloat::exp2i;
use std::fmt;
use std::str::FromStr;

/// A fixed-point format with representable range
/// `[-2^int_bits, 2^int_bits - 2^-frac_bits]` and step `2^-frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedFormat {
    int_bits: u32,
    frac_bits: u32,
    // cached
    scale: f64,
    max_value: f64,
    min_value: f64,
}

impl FixedFormat {
    /// Default integer width when only the fractional width is given:
    /// enough headroom for intermediate sums on unit-scale matrices.
    pub const DEFAULT_INT_BITS: u32 = 13;

    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self> {
        if int_bits > 32 {
            return Err(Error::InvalidFormat(format!(
                "integer bits must be in 0..=32, got {int_bits}"
            )));
        }
        if frac_bits > 52 {
            return Err(Error::InvalidFormat(format!(
                "fractional bits must be in 0..=52, got {frac_bits}"
            )));
        }
        if int_bits + frac_bits == 0 {
            return Err(Error::InvalidFormat(
                "need at least one integer or fractional bit".into(),
            ));
        }
        if int_bits + frac_bits + 1 > 53 {
            return Err(Error::InvalidFormat(format!(
                "total width {} exceeds 53 bits",
                int_bits + frac_bits + 1
            )));
        }
        let scale = exp2i(frac_bits as i32);
        let max_value = (((1u64 << (int_bits + frac_bits)) - 1) as f64) / scale;
        Ok(FixedFormat {
            int_bits,
            frac_bits,
            scale,
            max_value,
            min_value: -exp2i(int_bits as i32),
        })
    }

    /// Format with the default integer width and `frac_bits` fractional bits.
    pub fn with_frac(frac_bits: u32) -> Result<Self> {
        FixedFormat::new(Self::DEFAULT_INT_BITS, frac_bits)
    }

    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Largest representable value, `2^int_bits - 2^-frac_bits`.
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    /// Smallest (most negative) representable value, `-2^int_bits`.
    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    /// Grid step `2^-frac_bits`.
    pub fn resolution(&self) -> f64 {
        1.0 / self.scale
    }

    /// `x` rounded onto the grid, assuming `x` is finite.
    #[inline]
    pub(crate) fn quantize_finite(&self, x: f64) -> f64 {
        if x >= self.max_value {
            return self.max_value;
        }
        if x <= self.min_value {
            return self.min_value;
        }
        // in-range: the scaling, the rounding and the descaling are all exact
        (x * self.scale).round_ties_even() / self.scale
    }

    /// Rounds `x` to the nearest grid value (ties to even), saturating to
    /// the representable range.
    ///
    /// Non-finite input is an error: fixed point has no encoding for
    /// infinities or NaN, so reaching one means the chosen model cannot
    /// represent this data.
    #[inline]
    pub fn quantize(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(self.quantize_finite(x))
    }

    /// Saturating addition: exact sum at reference precision, then grid
    /// rounding (which only acts when the sum saturates).
    #[inline]
    pub fn add(&self, a: f64, b: f64) -> Result<f64> {
        self.quantize(a + b)
    }

    /// Multiplication: the `2*frac_bits`-bit product is rounded back to
    /// `frac_bits` fractional bits and saturated.
    #[inline]
    pub fn mul(&self, a: f64, b: f64) -> Result<f64> {
        self.quantize(a * b)
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fixed:i{}f{}", self.int_bits, self.frac_bits)
    }
}

impl FromStr for FixedFormat {
    type Err = Error;

    /// Parses `fixed:i<I>f<F>` or `fixed:f<F>` (default integer width).
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("fixed:")
            .ok_or_else(|| Error::InvalidFormat(format!("not a fixed format: {s:?}")))?;
        let bad = || Error::InvalidFormat(format!("expected fixed:i<I>f<F>, got {s:?}"));
        if let Some(rest) = body.strip_prefix('i') {
            let (i, f) = rest.split_once('f').ok_or_else(bad)?;
            FixedFormat::new(i.parse().map_err(|_| bad())?, f.parse().map_err(|_| bad())?)
        } else if let Some(f) = body.strip_prefix('f') {
            FixedFormat::with_frac(f.parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }
}
