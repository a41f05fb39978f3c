//! Deterministic Monte Carlo replication.
//!
//! Every replicate gets its own ChaCha8 stream: the key is expanded from the
//! master seed and the 64-bit stream id is the replicate index. Streams for
//! distinct replicates therefore never overlap, and a replicate's draws do
//! not depend on which thread runs it.
//!
//! Replicates are grouped into fixed-size blocks. Blocks may run on any
//! number of threads, but their summaries are always merged in block order,
//! so the reduction is bitwise identical for every worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ReplicateRng = ChaCha8Rng;

const BLOCK: u64 = 1024;

/// Master seed and the replicate → stream derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    /// Independent stream for replicate `index`.
    pub fn stream(&self, index: u64) -> ReplicateRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }

    /// Policy for a sub-experiment, keyed by `label`.
    pub fn derive(&self, label: u64) -> SeedPolicy {
        SeedPolicy {
            master_seed: splitmix64(self.master_seed ^ splitmix64(label)),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parallelism for [`run_replicated`]. Results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Rayon's global pool.
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replicates: u64,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        count: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Runs `task` once per replicate and returns the mean with its standard error.
///
/// `task` receives the replicate's private stream and must be a pure
/// function of it.
pub fn run_replicated<F>(task: F, replicates: u64, policy: &SeedPolicy, workers: Workers) -> Result<EmpiricalEstimate>
where
    F: Fn(&mut ReplicateRng) -> f64 + Sync,
{
    if replicates == 0 {
        return Err(Error::domain("at least one replicate is required"));
    }
    let blocks = replicates.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let mut m = Moments::EMPTY;
        for index in b * BLOCK..((b + 1) * BLOCK).min(replicates) {
            let mut rng = policy.stream(index);
            m.push(task(&mut rng));
        }
        m
    };
    let summaries: Vec<Moments> = match workers {
        Workers::Auto => (0..blocks).into_par_iter().map(run_block).collect(),
        Workers::Fixed(1) => (0..blocks).map(run_block).collect(),
        Workers::Fixed(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
            .install(|| (0..blocks).into_par_iter().map(run_block).collect()),
    };
    let total = summaries.into_iter().fold(Moments::EMPTY, Moments::merge);
    let standard_error = if replicates > 1 {
        (total.m2.max(0.0) / (total.count - 1.0) / total.count).sqrt()
    } else {
        0.0
    };
    Ok(EmpiricalEstimate {
        mean: total.mean,
        standard_error,
        replicates,
    })
}
