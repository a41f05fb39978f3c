use rand::Rng;

use crate::error::{Error, Result};

/// Inverse-CDF sampler over a fixed list of scenario indices.
///
/// Prefix sums are built once; each draw is a binary search. Entries with
/// zero mass are never returned.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    scenarios: Vec<usize>,
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(weights: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut scenarios = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (j, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::domain(format!("invalid sampling weight {w}")));
            }
            acc += w;
            scenarios.push(j);
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::domain("sampling distribution has no mass"));
        }
        Ok(DiscreteSampler {
            scenarios,
            cumulative,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.scenarios
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty by construction");
        let u = rng.random::<f64>() * total;
        let pos = self.cumulative.partition_point(|&c| c <= u);
        if pos < self.scenarios.len() {
            self.scenarios[pos]
        } else {
            // u rounded up to `total`: fall back to the last entry carrying mass
            let last = self
                .cumulative
                .iter()
                .rposition(|&c| c < total)
                .map_or(0, |p| p + 1);
            self.scenarios[last]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_empty_and_negative() {
        assert!(DiscreteSampler::new([]).is_err());
        assert!(DiscreteSampler::new([(0, 0.0)]).is_err());
        assert!(DiscreteSampler::new([(0, -0.1), (1, 1.1)]).is_err());
    }

    #[test]
    fn zero_mass_entries_skipped() {
        let s = DiscreteSampler::new([(0, 0.0), (1, 0.5), (2, 0.0), (3, 0.5), (4, 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let j = s.sample(&mut rng);
            assert!(j == 1 || j == 3);
        }
    }
}
