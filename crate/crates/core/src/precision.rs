//! Arithmetic back-ends for the simulation kernels.
//!
//! Every kernel is generic over [`Arith`], which fixes the storage type and
//! the exponential used by the channel kinetics. Three back-ends exist:
//! plain `f64` (the reference), plain `f32`, and `f32` whose exponentials go
//! through a reduced-significand rounding on both input and output. The last
//! one mimics accelerators that keep the single-precision exponent range but
//! evaluate transcendental functions with half-precision-like accuracy.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num_traits::{Float, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Number of explicit significand bits kept by [`round_reduced_precision`].
pub const REDUCED_MANTISSA_BITS: u32 = 10;

const F32_MANTISSA_BITS: u32 = 23;
const DROPPED_BITS: u32 = F32_MANTISSA_BITS - REDUCED_MANTISSA_BITS;

/// Round the significand of `x` to 10 explicit bits, ties to even, keeping the
/// 8-bit exponent. NaN and infinities pass through; values that round past
/// `f32::MAX` become infinite.
#[inline]
pub fn round_reduced_precision(x: f32) -> f32 {
    if !x.is_finite() {
        return x;
    }
    let bits = x.to_bits();
    let half = (1u32 << (DROPPED_BITS - 1)) - 1;
    let lsb = (bits >> DROPPED_BITS) & 1;
    let rounded = bits.wrapping_add(half + lsb) & !((1u32 << DROPPED_BITS) - 1);
    f32::from_bits(rounded)
}

/// Precision mode selectable from configuration and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Precision {
    #[default]
    #[serde(rename = "f64")]
    F64,
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "f32-approx-exp")]
    F32ApproxExp,
}

impl Precision {
    pub const ALL: [Precision; 3] = [Precision::F64, Precision::F32, Precision::F32ApproxExp];

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F64 => "f64",
            Precision::F32 => "f32",
            Precision::F32ApproxExp => "f32-approx-exp",
        }
    }

    /// Bytes per stored state value.
    pub fn width(self) -> usize {
        match self {
            Precision::F64 => 8,
            Precision::F32 | Precision::F32ApproxExp => 4,
        }
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            "f32-approx-exp" => Ok(Precision::F32ApproxExp),
            other => Err(Error::Parse(format!(
                "unknown precision `{other}` (expected f64, f32 or f32-approx-exp)"
            ))),
        }
    }
}

/// Storage type plus exponential for one precision mode.
pub trait Arith: Copy + Send + Sync + 'static {
    type F: Float + Debug + Default + Send + Sync + 'static;

    const MODE: Precision;

    /// Below this magnitude `w / (exp(w) - 1)` is replaced by its series.
    const EXPREL_CUTOFF: f64;

    fn exp(x: Self::F) -> Self::F;

    #[inline(always)]
    fn lit(x: f64) -> Self::F {
        <Self::F as num_traits::NumCast>::from(x).expect("finite literal")
    }

    #[inline(always)]
    fn to_f64(x: Self::F) -> f64 {
        ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
    }

    /// `w / (exp(w) - 1)`, continuous through `w = 0`.
    #[inline(always)]
    fn exprel_inv(w: Self::F) -> Self::F {
        let one = <Self::F as num_traits::One>::one();
        let series = one - w * Self::lit(0.5);
        let direct = w / (Self::exp(w) - one);
        if w.abs() < Self::lit(Self::EXPREL_CUTOFF) {
            series
        } else {
            direct
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct F64;

#[derive(Debug, Clone, Copy, Default)]
pub struct F32;

#[derive(Debug, Clone, Copy, Default)]
pub struct F32ApproxExp;

impl Arith for F64 {
    type F = f64;
    const MODE: Precision = Precision::F64;
    const EXPREL_CUTOFF: f64 = 1e-9;

    #[inline(always)]
    fn exp(x: f64) -> f64 {
        x.exp()
    }
}

impl Arith for F32 {
    type F = f32;
    const MODE: Precision = Precision::F32;
    const EXPREL_CUTOFF: f64 = 1e-4;

    #[inline(always)]
    fn exp(x: f32) -> f32 {
        x.exp()
    }
}

impl Arith for F32ApproxExp {
    type F = f32;
    const MODE: Precision = Precision::F32ApproxExp;
    // exp rounded to 10 bits equals 1.0 for |w| < 2^-11
    const EXPREL_CUTOFF: f64 = 1e-3;

    #[inline(always)]
    fn exp(x: f32) -> f32 {
        round_reduced_precision(round_reduced_precision(x).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rounds through exact f64 arithmetic: scale by the reduced ulp, round
    /// half-to-even, scale back.
    fn oracle(x: f32) -> f32 {
        let v = x as f64;
        if v == 0.0 {
            return x;
        }
        let exp = v.abs().log2().floor() as i32;
        let exp = exp.max(-126);
        let ulp = 2f64.powi(exp - REDUCED_MANTISSA_BITS as i32);
        ((v / ulp).round_ties_even() * ulp) as f32
    }

    #[test]
    fn representable_values_unchanged() {
        for x in [
            1.5f32,
            1.0,
            -2.0,
            0.0,
            1.0 + 2f32.powi(-10),
            1024.0,
            1.5 * 2f32.powi(-66),
        ] {
            assert_eq!(round_reduced_precision(x), x);
        }
    }

    #[test]
    fn tie_rounds_to_even() {
        assert_eq!(round_reduced_precision(1.0 + 2f32.powi(-11)), 1.0);
        // odd neighbour below, tie goes up
        let odd = 1.0 + 2f32.powi(-10);
        assert_eq!(
            round_reduced_precision(odd + 2f32.powi(-11)),
            1.0 + 2.0 * 2f32.powi(-10)
        );
    }

    #[test]
    fn nearest_rounding() {
        assert_eq!(
            round_reduced_precision(1.0 + 3.0 * 2f32.powi(-12)),
            1.0 + 2f32.powi(-10)
        );
        assert_eq!(round_reduced_precision(1.0 + 2f32.powi(-12)), 1.0);
    }

    #[test]
    fn non_finite_passthrough() {
        assert!(round_reduced_precision(f32::NAN).is_nan());
        assert_eq!(round_reduced_precision(f32::INFINITY), f32::INFINITY);
        assert_eq!(round_reduced_precision(f32::MAX), f32::INFINITY);
    }

    #[test]
    fn matches_bit_level_oracle_on_sweep() {
        let mut x = 1.0e-30f32;
        while x < 1.0e30 {
            for v in [x, -x, x * 1.000_123, x * 1.618_034] {
                assert_eq!(round_reduced_precision(v), oracle(v), "x = {v:e}");
            }
            x *= 1.37;
        }
    }

    #[test]
    fn precision_names_round_trip() {
        for p in Precision::ALL {
            assert_eq!(p.as_str().parse::<Precision>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.as_str()));
        }
        assert!("f16".parse::<Precision>().is_err());
    }

    #[test]
    fn exprel_inv_is_continuous() {
        for w in [-1e-2, -1e-5, 0.0, 1e-5, 1e-2] {
            let a = F64::exprel_inv(w);
            let exact = if w == 0.0 { 1.0 } else { w / w.exp_m1() };
            assert!((a - exact).abs() < 1e-6, "{w}: {a} vs {exact}");
            assert!(F32ApproxExp::exprel_inv(w as f32).is_finite());
        }
    }
}
