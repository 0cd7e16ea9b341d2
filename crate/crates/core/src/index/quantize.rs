//! Linear scalar quantization of term weights into integer impacts.

use crate::error::{Error, Result};
use crate::scalar::{from_f64, Scalar};

/// Maps non-negative real weights onto `[0, 2^bits - 1]` against a global
/// maximum weight: `round(w / max_weight * (2^bits - 1))`, round half up,
/// clamped. Monotone non-decreasing in the weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer<F> {
    max_weight: F,
    bits: u8,
}

impl<F: Scalar> Quantizer<F> {
    pub fn new(max_weight: F, bits: u8) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidBits { bits });
        }
        if max_weight <= F::zero() || !max_weight.is_finite() {
            return Err(Error::InvalidMaxWeight {
                max_weight: max_weight.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Quantizer { max_weight, bits })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn max_weight(&self) -> F {
        self.max_weight
    }

    /// The top code `2^bits - 1`.
    pub fn top_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn quantize(&self, weight: F) -> u32 {
        let top = self.top_code();
        // round half up: floor(x + 0.5)
        let scaled = weight / self.max_weight * from_f64::<F>(f64::from(top));
        let rounded = (scaled + from_f64::<F>(0.5)).floor();
        if rounded.is_nan() || rounded <= F::zero() {
            return 0;
        }
        if rounded >= from_f64::<F>(f64::from(top)) {
            return top;
        }
        rounded.to_u32().unwrap_or(top)
    }
}

/// One-shot form of [`Quantizer::quantize`].
pub fn quantize<F: Scalar>(weight: F, max_weight: F, bits: u8) -> Result<u32> {
    Ok(Quantizer::new(max_weight, bits)?.quantize(weight))
}
