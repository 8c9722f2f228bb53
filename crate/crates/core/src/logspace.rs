//! Base-2 log-space arithmetic.
//!
//! Every log quantity in this crate is in bits. A probability of zero is
//! represented by `f64::NEG_INFINITY` and drops out of every sum.

/// `log2(sum(2^v))` over a slice; `-inf` for an empty slice or all `-inf` inputs.
pub fn log2_sum_exp2(values: &[f64]) -> f64 {
    let mut acc = LogSumExp2::new();
    for &v in values {
        acc.push(v);
    }
    acc.value()
}

/// Log of a probability, with `log2(0) = -inf`.
#[inline]
pub fn log2_prob(p: f64) -> f64 {
    if p > 0.0 {
        p.log2()
    } else {
        f64::NEG_INFINITY
    }
}

/// `count * log2(p)` under the convention `0 * log 0 = 0`.
#[inline]
pub fn weighted_log(count: f64, log_p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * log_p
    }
}

/// Streaming accumulator for `log2(sum(2^v))`.
///
/// Keeps a running maximum and a sum scaled by it, so pushing values in a
/// fixed order gives a deterministic result.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp2 {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp2 {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp2 {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled += (v - self.max).exp2();
        } else {
            self.scaled = self.scaled * (self.max - v).exp2() + 1.0;
            self.max = v;
        }
    }

    /// Combine two partial accumulators.
    pub fn merge(&mut self, other: &LogSumExp2) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp2();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp2() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.log2()
        }
    }
}
