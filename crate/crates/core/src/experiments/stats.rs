use serde::{Deserialize, Serialize};

/// Mean and population variance of one group of integer observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub group_key: String,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl AggregateStats {
    /// `None` for an empty group.
    pub fn from_values(key: &str, values: impl IntoIterator<Item = u64>) -> Option<Self> {
        let mut acc = Accumulator::default();
        values.into_iter().for_each(|v| acc.push(v));
        acc.finish(key)
    }
}

/// Exact running sums. Integer accumulation makes merging associative and
/// commutative, so batches can be reduced in any order with identical
/// results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Accumulator {
    count: u64,
    sum: u128,
    sum_sq: u128,
    min: u64,
    max: u64,
}

impl Accumulator {
    pub fn push(&mut self, v: u64) {
        if self.count == 0 {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        self.count += 1;
        self.sum += v as u128;
        self.sum_sq += (v as u128) * (v as u128);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, key: &str) -> Option<AggregateStats> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as u128;
        // n²·var = n·Σx² − (Σx)², exact in integers
        let scaled = n * self.sum_sq - self.sum * self.sum;
        let mean = (self.sum as f64 / n as f64).clamp(self.min as f64, self.max as f64);
        Some(AggregateStats {
            group_key: key.to_string(),
            count: self.count,
            mean,
            variance: scaled as f64 / (n * n) as f64,
            min: self.min as f64,
            max: self.max as f64,
        })
    }
}

/// Running mean after each observation.
pub fn running_mean(values: &[u64]) -> Vec<f64> {
    let mut sum = 0u128;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            sum += v as u128;
            sum as f64 / (i + 1) as f64
        })
        .collect()
}
