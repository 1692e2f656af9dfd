//! Small numerical helpers shared across the crate.

use crate::scalar::Scalar;

/// Compensated accumulator (Neumaier's variant of Kahan summation).
///
/// Carries the rounding error of every addition in a correction term, so a
/// long fixed-order sum stays accurate to a few ulps of the true value
/// independent of its length. Used wherever a normalization or moment sum
/// feeds a tight tolerance.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    correction: T,
}

impl<T: Scalar> CompensatedSum<T> {
    #[inline]
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            correction: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        // The branch recovers the low-order bits lost by whichever operand
        // was smaller in magnitude.
        if self.sum.abs() >= x.abs() {
            self.correction = self.correction + ((self.sum - t) + x);
        } else {
            self.correction = self.correction + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.correction
    }
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = CompensatedSum::new();
    for x in values {
        acc.add(x);
    }
    acc.value()
}
