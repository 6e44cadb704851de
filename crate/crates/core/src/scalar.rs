//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real floating-point type the receiver math is written against (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + rustfft::FftNum + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Numerically stable `log(sum(exp(xs)))`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: impl IntoIterator<Item = T> + Clone) -> T {
    let max = xs
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let s: T = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// Running log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator<T> {
    max: T,
    sum: T,
}

impl<T: Real> Default for LogAccumulator<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogAccumulator<T> {
    pub fn new() -> Self {
        Self {
            max: T::neg_infinity(),
            sum: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x <= self.max {
            self.sum = self.sum + (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + T::one();
            self.max = x;
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}
