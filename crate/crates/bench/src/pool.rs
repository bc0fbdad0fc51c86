use locality_mpc::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable read as the default worker count.
pub const WORKERS_ENV: &str = "LOCALITY_MPC_WORKERS";

/// Parallel-for on a dedicated rayon pool.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    pub fn new(workers: usize) -> Self {
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .thread_name(|i| format!("mpc-worker-{i}"))
            .build()
            .expect("failed to start worker pool");
        Self { pool }
    }
}

impl Executor for RayonExecutor {
    fn worker_count(&self) -> usize {
        self.pool.current_num_threads()
    }

    fn parallel_for(&self, n: usize, body: &(dyn Fn(usize) + Sync)) {
        self.pool.install(|| (0..n).into_par_iter().for_each(body));
    }
}

/// Hardware threads of this host.
pub fn available_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
