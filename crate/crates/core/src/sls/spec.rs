use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::rows::{RowSignal, SignalKind};
use crate::error::{Error, Result};
use crate::system::SubsystemPartition;

/// Closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const FREE: Bounds = Bounds {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_free(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }
}

/// Cost weights, box bounds and ADMM settings of the finite-horizon problem.
///
/// Time blocks follow the `Φ` row layout: states occupy blocks `0..T` with
/// block 0 the measured state and block `T - 1` terminal, inputs occupy
/// blocks `0..T - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    horizon: usize,
    n_states: usize,
    n_inputs: usize,
    /// `(T - 1) × n_states`, blocks `0..T-1`.
    state_weights: Vec<f64>,
    terminal_weights: Vec<f64>,
    /// `(T - 1) × n_inputs`.
    input_weights: Vec<f64>,
    /// `T × n_states`, terminal bounds in the last block.
    state_bounds: Vec<Bounds>,
    input_bounds: Vec<Bounds>,
    pub rho: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub max_iters: usize,
}

pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_EPS: f64 = 1e-4;
pub const DEFAULT_MAX_ITERS: usize = 5000;

impl ProblemSpec {
    /// Unit weights, no bounds, default ADMM settings.
    pub fn new(n_states: usize, n_inputs: usize, horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::arg("horizon must be at least 2"));
        }
        Ok(Self {
            horizon,
            n_states,
            n_inputs,
            state_weights: vec![1.0; (horizon - 1) * n_states],
            terminal_weights: vec![1.0; n_states],
            input_weights: vec![1.0; (horizon - 1) * n_inputs],
            state_bounds: vec![Bounds::FREE; horizon * n_states],
            input_bounds: vec![Bounds::FREE; (horizon - 1) * n_inputs],
            rho: DEFAULT_RHO,
            eps_pri: DEFAULT_EPS,
            eps_dual: DEFAULT_EPS,
            max_iters: DEFAULT_MAX_ITERS,
        })
    }

    /// The chain benchmark: unit costs on every predicted state and input, no
    /// cost on the measured block 0, and `-0.2 ≤ x_{i,1} ≤ 1.2` on the first
    /// state of each subsystem for blocks `1..T`.
    pub fn benchmark(partition: &SubsystemPartition, horizon: usize) -> Result<Self> {
        let mut spec = Self::new(partition.n_states(), partition.n_inputs(), horizon)?;
        for i in 0..spec.n_states {
            spec.set_state_weight(0, i, 0.0)?;
        }
        for s in 0..partition.subsystem_count() {
            let first = partition.state_range(s).start;
            for t in 1..horizon {
                spec.set_state_bounds(t, first, Bounds::new(-0.2, 1.2))?;
            }
        }
        Ok(spec)
    }

    /// Same problem with every bound removed.
    pub fn without_bounds(mut self) -> Self {
        self.state_bounds.fill(Bounds::FREE);
        self.input_bounds.fill(Bounds::FREE);
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    fn check_index(&self, t: usize, t_max: usize, i: usize, n: usize) -> Result<()> {
        if t >= t_max || i >= n {
            return Err(Error::arg(format!(
                "index (t={t}, i={i}) out of range ({t_max} blocks, {n} signals)"
            )));
        }
        Ok(())
    }

    /// Weight of state `i` at a non-terminal block `t < T - 1`.
    pub fn set_state_weight(&mut self, t: usize, i: usize, w: f64) -> Result<()> {
        self.check_index(t, self.horizon - 1, i, self.n_states)?;
        self.state_weights[t * self.n_states + i] = w;
        Ok(())
    }

    pub fn set_terminal_weight(&mut self, i: usize, w: f64) -> Result<()> {
        self.check_index(0, 1, i, self.n_states)?;
        self.terminal_weights[i] = w;
        Ok(())
    }

    pub fn set_input_weight(&mut self, t: usize, j: usize, w: f64) -> Result<()> {
        self.check_index(t, self.horizon - 1, j, self.n_inputs)?;
        self.input_weights[t * self.n_inputs + j] = w;
        Ok(())
    }

    pub fn set_state_bounds(&mut self, t: usize, i: usize, b: Bounds) -> Result<()> {
        self.check_index(t, self.horizon, i, self.n_states)?;
        self.state_bounds[t * self.n_states + i] = b;
        Ok(())
    }

    pub fn set_input_bounds(&mut self, t: usize, j: usize, b: Bounds) -> Result<()> {
        self.check_index(t, self.horizon - 1, j, self.n_inputs)?;
        self.input_bounds[t * self.n_inputs + j] = b;
        Ok(())
    }

    pub fn state_weight(&self, t: usize, i: usize) -> f64 {
        if t + 1 == self.horizon {
            self.terminal_weights[i]
        } else {
            self.state_weights[t * self.n_states + i]
        }
    }

    pub fn input_weight(&self, t: usize, j: usize) -> f64 {
        self.input_weights[t * self.n_inputs + j]
    }

    pub fn state_bounds(&self, t: usize, i: usize) -> Bounds {
        self.state_bounds[t * self.n_states + i]
    }

    pub fn input_bounds(&self, t: usize, j: usize) -> Bounds {
        self.input_bounds[t * self.n_inputs + j]
    }

    /// Per-step state weight used to score a closed-loop trajectory: the
    /// weight of the first predicted block.
    pub fn running_state_weight(&self, i: usize) -> f64 {
        self.state_weight(1, i)
    }

    pub fn running_input_weight(&self, j: usize) -> f64 {
        self.input_weight(0, j)
    }

    pub fn all_bounds_free(&self) -> bool {
        self.state_bounds
            .iter()
            .chain(&self.input_bounds)
            .all(Bounds::is_free)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::arg(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.eps_pri > 0.0 && self.eps_dual > 0.0) {
            return Err(Error::arg("convergence tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        let weights = self
            .state_weights
            .iter()
            .chain(&self.terminal_weights)
            .chain(&self.input_weights);
        if let Some(w) = weights.into_iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::arg(format!("weights must be finite and >= 0, got {w}")));
        }
        if let Some(b) = self
            .state_bounds
            .iter()
            .chain(&self.input_bounds)
            .find(|b| b.lo.is_nan() || b.hi.is_nan() || b.lo > b.hi)
        {
            return Err(Error::arg(format!("bounds [{}, {}] are empty", b.lo, b.hi)));
        }
        Ok(())
    }

    /// Cost weight and bounds for each row of `Φ`.
    pub fn row_meta(&self, signals: &[RowSignal]) -> Vec<RowMeta> {
        signals
            .iter()
            .map(|&signal| {
                let (weight, bounds) = match signal.kind {
                    SignalKind::State => (
                        self.state_weight(signal.time, signal.signal),
                        self.state_bounds(signal.time, signal.signal),
                    ),
                    SignalKind::Input => (
                        self.input_weight(signal.time, signal.signal),
                        self.input_bounds(signal.time, signal.signal),
                    ),
                };
                RowMeta {
                    signal,
                    weight,
                    bounds,
                }
            })
            .collect()
    }
}

/// A row of `Φ` together with its diagonal cost weight and bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMeta {
    pub signal: RowSignal,
    pub weight: f64,
    pub bounds: Bounds,
}
