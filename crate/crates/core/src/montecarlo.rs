//! Trajectory-level simulation of the erasure protocol.
//!
//! Every shot draws from its own ChaCha8 stream keyed by `(seed, shot index)`,
//! and batches aggregate into integer histograms, so results are bit-identical
//! however the shots are split across workers.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::SpinlaborDistribution;
use crate::error::{Error, Result};
use crate::fluctuation::trajectory_entropy_production;
use crate::params::{equilibrium_up_prob, ProtocolConfig, ReservoirParams};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Cnot,
    Equilibrate,
}

/// One protocol step. `cost_increment` is spinlabor for a CNOT and spintherm
/// to the reservoir for an equilibration, both in units of ħ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    pub kind: StepKind,
    pub memory_up_after: bool,
    pub cost_increment: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub initial_up: bool,
    pub final_up: bool,
    /// CNOT steps performed, `M`.
    pub cycles: usize,
    pub spinlabor: u64,
    pub spintherm_to_reservoir: i64,
    /// `None` for a pure initial memory state, where it is undefined.
    pub entropy_production: Option<f64>,
    pub steps: Vec<Step>,
}

impl TrajectoryRecord {
    /// Change of the memory-ancilla `J_z` in ħ: `(M+1) n_f - n_i`.
    pub fn delta_angular_momentum(&self) -> i64 {
        (self.cycles as i64 + 1) * i64::from(self.final_up) - i64::from(self.initial_up)
    }
}

/// Equilibrium up-probabilities `Q_up(C..=M)` as `f64` for sampling.
struct Schedule {
    c: usize,
    up: Vec<f64>,
    p_up: f64,
}

impl Schedule {
    fn new<S: Real>(config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> Self {
        let gamma = reservoir.gamma();
        let up = (config.c()..=config.max_cycles()).map(|m| equilibrium_up_prob(gamma, m).as_f64()).collect();
        Self { c: config.c(), up, p_up: config.p_up().as_f64() }
    }

    fn max_cycles(&self) -> usize {
        self.c + self.up.len() - 1
    }
}

struct Outcome {
    initial_up: bool,
    final_up: bool,
    spinlabor: u64,
    spintherm: i64,
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn run_shot(rng: &mut ChaCha8Rng, sched: &Schedule, mut steps: Option<&mut Vec<Step>>) -> Outcome {
    let initial_up = rng.gen::<f64>() < sched.p_up;
    let mut up = initial_up;
    let mut spinlabor = 0u64;
    let mut spintherm = 0i64;
    let mut cnot = |up: bool, steps: &mut Option<&mut Vec<Step>>| {
        spinlabor += u64::from(up);
        if let Some(s) = steps.as_deref_mut() {
            s.push(Step { kind: StepKind::Cnot, memory_up_after: up, cost_increment: i64::from(up) });
        }
    };
    for _ in 0..sched.c {
        cnot(up, &mut steps);
    }
    for (i, &q) in sched.up.iter().enumerate() {
        let m = (sched.c + i) as i64;
        let new_up = rng.gen::<f64>() < q;
        let to_reservoir = (m + 1) * (i64::from(up) - i64::from(new_up));
        spintherm += to_reservoir;
        up = new_up;
        if let Some(s) = steps.as_deref_mut() {
            s.push(Step { kind: StepKind::Equilibrate, memory_up_after: up, cost_increment: to_reservoir });
        }
        if i + 1 < sched.up.len() {
            cnot(up, &mut steps);
        }
    }
    Outcome { initial_up, final_up: up, spinlabor, spintherm }
}

/// Simulates shot `shot` of the batch seeded by `seed`, recording every step.
pub fn simulate_shot<S: Real>(
    seed: u64,
    shot: u64,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> TrajectoryRecord {
    let sched = Schedule::new(config, reservoir);
    let mut steps = Vec::with_capacity(2 * sched.max_cycles() + 1);
    let out = run_shot(&mut shot_rng(seed, shot), &sched, Some(&mut steps));
    let entropy_production =
        trajectory_entropy_production(out.initial_up, out.spinlabor as usize, config, reservoir, config.max_cycles())
            .ok()
            .map(|s| s.as_f64());
    TrajectoryRecord {
        initial_up: out.initial_up,
        final_up: out.final_up,
        cycles: sched.max_cycles(),
        spinlabor: out.spinlabor,
        spintherm_to_reservoir: out.spintherm,
        entropy_production,
        steps,
    }
}

/// Shot counts by initial memory state and spinlabor, plus exact spintherm sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    seed: u64,
    shots: u64,
    counts_down: Vec<u64>,
    counts_up: Vec<u64>,
    spintherm_sum: i128,
    spintherm_sq_sum: i128,
}

impl EmpiricalDistribution {
    fn empty(seed: u64) -> Self {
        Self { seed, shots: 0, counts_down: Vec::new(), counts_up: Vec::new(), spintherm_sum: 0, spintherm_sq_sum: 0 }
    }

    fn record(&mut self, out: &Outcome) {
        let counts = if out.initial_up { &mut self.counts_up } else { &mut self.counts_down };
        let n = out.spinlabor as usize;
        if counts.len() <= n {
            counts.resize(n + 1, 0);
        }
        counts[n] += 1;
        self.shots += 1;
        self.spintherm_sum += i128::from(out.spintherm);
        self.spintherm_sq_sum += i128::from(out.spintherm) * i128::from(out.spintherm);
    }

    /// Adds another histogram built from the same seed.
    pub fn merge(mut self, other: Self) -> Self {
        fn add(a: &mut Vec<u64>, b: &[u64]) {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        add(&mut self.counts_down, &other.counts_down);
        add(&mut self.counts_up, &other.counts_up);
        self.shots += other.shots;
        self.spintherm_sum += other.spintherm_sum;
        self.spintherm_sq_sum += other.spintherm_sq_sum;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Shots with spinlabor `n`, either initial state.
    pub fn count(&self, n: usize) -> u64 {
        self.joint_count(false, n) + self.joint_count(true, n)
    }

    pub fn joint_count(&self, initial_up: bool, n: usize) -> u64 {
        let counts = if initial_up { &self.counts_up } else { &self.counts_down };
        counts.get(n).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> Vec<u64> {
        (0..self.support_len()).map(|n| self.count(n)).collect()
    }

    pub fn support_len(&self) -> usize {
        self.counts_down.len().max(self.counts_up.len())
    }

    fn frac(&self, count: u64) -> f64 {
        count as f64 / self.shots as f64
    }

    /// `sum_n f(initial_up, n) * frequency`.
    pub fn expect(&self, f: impl Fn(bool, usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (up, counts) in [(false, &self.counts_down), (true, &self.counts_up)] {
            for (n, &k) in counts.iter().enumerate() {
                if k > 0 {
                    acc += f(up, n) * self.frac(k);
                }
            }
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        self.expect(|_, n| n as f64)
    }

    /// Population variance of the spinlabor.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.expect(|_, n| (n as f64 - mean).powi(2))
    }

    pub fn spintherm_mean(&self) -> f64 {
        self.spintherm_sum as f64 / self.shots as f64
    }

    pub fn spintherm_variance(&self) -> f64 {
        let mean = self.spintherm_mean();
        self.spintherm_sq_sum as f64 / self.shots as f64 - mean * mean
    }

    /// Total-variation distance from an exact distribution.
    pub fn tv_distance<S: Real>(&self, exact: &SpinlaborDistribution<S>) -> f64 {
        let len = self.support_len().max(exact.probs().len());
        0.5 * (0..len).map(|n| (self.frac(self.count(n)) - exact.prob(n).as_f64()).abs()).sum::<f64>()
    }

    pub fn summary<S: Real>(&self, config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> BatchSummary {
        let gamma = reservoir.gamma().as_f64();
        let degenerate = trajectory_entropy_production(false, 0, config, reservoir, config.max_cycles()).is_err();
        let ift_lhs = (!degenerate).then(|| {
            self.expect(|up, n| {
                let sigma = trajectory_entropy_production(up, n, config, reservoir, config.max_cycles())
                    .expect("memory is not degenerate");
                (-sigma.as_f64()).exp()
            })
        });
        BatchSummary {
            mean: self.mean(),
            variance: self.variance(),
            spintherm_mean: self.spintherm_mean(),
            jarzynski_lhs: self.expect(|_, n| (-gamma * n as f64).exp()),
            ift_lhs,
            seed: self.seed,
            shots: self.shots,
        }
    }

    /// CSV with header `n,count`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,count")?;
        for (n, k) in self.counts().into_iter().enumerate() {
            writeln!(w, "{n},{k}")?;
        }
        Ok(())
    }
}

/// Batch statistics. `ift_lhs` is `None` when the initial memory state is pure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub mean: f64,
    pub variance: f64,
    pub spintherm_mean: f64,
    pub jarzynski_lhs: f64,
    pub ift_lhs: Option<f64>,
    pub seed: u64,
    pub shots: u64,
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    Ok(())
}

fn run_range(seed: u64, range: std::ops::Range<u64>, sched: &Schedule) -> EmpiricalDistribution {
    let mut hist = EmpiricalDistribution::empty(seed);
    for shot in range {
        hist.record(&run_shot(&mut shot_rng(seed, shot), sched, None));
    }
    hist
}

/// Runs `shots` trajectories in parallel on the global rayon pool.
pub fn simulate_batch<S: Real>(
    seed: u64,
    shots: u64,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<EmpiricalDistribution> {
    check_shots(shots)?;
    let sched = Schedule::new(config, reservoir);
    const CHUNK: u64 = 4096;
    let chunks = shots.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|i| run_range(seed, i * CHUNK..((i + 1) * CHUNK).min(shots), &sched))
        .reduce(|| EmpiricalDistribution::empty(seed), EmpiricalDistribution::merge))
}

/// Splits the batch into `shards` contiguous shot ranges, runs each as an
/// independent job and merges. The result does not depend on `shards`.
pub fn simulate_batch_sharded<S: Real>(
    seed: u64,
    shots: u64,
    shards: usize,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<EmpiricalDistribution> {
    check_shots(shots)?;
    if shards == 0 {
        return Err(Error::Config("shard count must be at least 1".into()));
    }
    let sched = Schedule::new(config, reservoir);
    let shards = shards as u64;
    let bounds: Vec<_> = (0..shards).map(|k| (k * shots / shards, (k + 1) * shots / shards)).collect();
    Ok(bounds
        .into_par_iter()
        .map(|(lo, hi)| run_range(seed, lo..hi, &sched))
        .reduce(|| EmpiricalDistribution::empty(seed), EmpiricalDistribution::merge))
}
