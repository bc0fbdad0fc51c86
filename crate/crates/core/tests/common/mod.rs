#![allow(dead_code)]

use locality_mpc::{
    build_chain_network, build_locality_mask, ChainConfig, Executor, LocalityMask, LtiSystem,
    ProblemSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Spawns `n` scoped threads per parallel-for. Worker `w` takes items
/// `w, w + n, …` in reverse, so item order differs from the inline executor.
pub struct Threads(pub usize);

impl Executor for Threads {
    fn worker_count(&self) -> usize {
        self.0
    }

    fn parallel_for(&self, n: usize, body: &(dyn Fn(usize) + Sync)) {
        let workers = self.0;
        std::thread::scope(|s| {
            for w in 0..workers {
                s.spawn(move || {
                    let mut items: Vec<usize> = (w..n).step_by(workers).collect();
                    items.reverse();
                    for i in items {
                        body(i);
                    }
                });
            }
        });
    }
}

pub struct Bench {
    pub sys: LtiSystem,
    pub spec: ProblemSpec,
    pub mask: LocalityMask,
}

pub fn bench(n: usize, t: usize, d: usize) -> Bench {
    let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
    let spec = ProblemSpec::benchmark(sys.partition(), t).unwrap();
    let mask = build_locality_mask(&sys, d, t).unwrap();
    Bench { sys, spec, mask }
}

/// First state of each node uniform in [0, 1], second in [−0.5, 0.5].
pub fn sample_x0(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .flat_map(|_| {
            let a = rng.random_range(0.0..=1.0);
            let b = rng.random_range(-0.5..=0.5);
            [a, b]
        })
        .collect()
}
