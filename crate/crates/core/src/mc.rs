//! Replication driver shared by every Monte Carlo routine.

use rayon::prelude::*;

use crate::special::CompensatedSum;

/// Runs `f(0..reps)` in parallel and returns the results in replication order.
pub fn replicate<T, F>(reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..reps).into_par_iter().map(f).collect()
}

/// Mean and standard deviation accumulated in a fixed order with compensation.
#[derive(Debug, Clone, Default)]
pub struct Moments {
    n: usize,
    sum: CompensatedSum,
    // Welford running mean and centered sum of squares.
    running_mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        let delta = x - self.running_mean;
        self.running_mean += delta / self.n as f64;
        self.m2 += delta * (x - self.running_mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum.value() / self.n as f64
        }
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n as f64 - 1.0)).max(0.0).sqrt()
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sd() / (self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}
