//! Numeric abstractions.
//!
//! Probabilistic quantities (desire levels, effective degrees, sampling
//! probabilities) are generic over a floating-point type; budgets are exact
//! rationals so that their conservation identity can be checked with `==`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real: Float + FromPrimitive + Debug + Send + Sync {}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Send + Sync {}

/// Exact budget value.
pub type Budget = Ratio<BigInt>;

/// `2^-k` in `T`.
pub fn dyadic_level<T: Real>(k: u32) -> T {
    T::from_f64(0.5).unwrap().powi(k as i32)
}

/// Sum of `2^-k` over the given levels.
pub fn effective_degree<T: Real>(levels: impl IntoIterator<Item = u32>) -> T {
    levels
        .into_iter()
        .fold(T::zero(), |acc, k| acc + dyadic_level::<T>(k))
}

/// Floors a non-negative budget to a word count, saturating at `u64::MAX`.
pub fn floor_words(b: &Budget) -> u64 {
    b.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}
