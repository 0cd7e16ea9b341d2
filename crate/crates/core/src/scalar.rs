//! Scalar abstraction so weight and score math runs on f32 or f64.
//!
//! Quantized impacts and term frequencies are always integers; everything
//! real-valued (pre-quantization weights, BM25 scores, normalized fusion
//! scores, metric values) is generic over [`Scalar`]. The crate root pins
//! f64 aliases for the common case.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar for term weights and retrieval scores.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

pub(crate) fn from_f64<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("f64 converts to scalar")
}

pub(crate) fn from_u64<F: Scalar>(x: u64) -> F {
    F::from_u64(x).expect("u64 converts to scalar")
}

pub(crate) fn from_usize<F: Scalar>(x: usize) -> F {
    F::from_usize(x).expect("usize converts to scalar")
}
