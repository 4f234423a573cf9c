use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Streaming `x̄_k = Σ_{j=1}^k j·x_{j−1} / Σ_{j=1}^k j`.
#[derive(Clone, Debug)]
pub struct WeightedAverage<T> {
    avg: Vec<T>,
    count: u64,
}

impl<T: Scalar> WeightedAverage<T> {
    pub fn new(dimension: usize) -> Self {
        WeightedAverage {
            avg: vec![T::zero(); dimension],
            count: 0,
        }
    }

    /// Fold in the next iterate `x_{j−1}` with weight `j`.
    #[inline]
    pub fn push(&mut self, x: &[T]) {
        self.count += 1;
        let j = self.count as f64;
        // j / (j(j+1)/2)
        let w = T::of(2.0 / (j + 1.0));
        for (a, &v) in self.avg.iter_mut().zip(x) {
            *a = *a + w * (v - *a);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn value(&self) -> &[T] {
        &self.avg
    }
}

/// The `j`-weighted average of `x_0, …, x_{k−1}`.
pub fn weighted_average<T: Scalar, S: AsRef<[T]>>(iterates: &[S]) -> Result<Vec<T>> {
    let first = iterates.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let mut acc = WeightedAverage::new(first.as_ref().len());
    for x in iterates {
        crate::error::check_dim(first.as_ref().len(), x.as_ref().len())?;
        acc.push(x.as_ref());
    }
    Ok(acc.avg)
}
