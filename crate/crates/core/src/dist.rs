//! Exact spinlabor distributions: the step recurrence, its infinite-protocol
//! limit, the q-series closed forms, moments, and the lattice-Gaussian distance.

use std::io::{self, Write};

use serde_json::json;

use crate::error::{Error, Result};
use crate::params::{equilibrium_up_prob, ProtocolConfig, ReservoirParams};
use crate::qseries::{ln_neg_q_tail, ln_q_pochhammer_qq};
use crate::scalar::Real;

/// Trailing support whose total mass is below this is dropped from limit distributions.
const SUPPORT_TAIL_MASS: f64 = 1e-15;

/// How many CNOT steps a distribution accounts for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Step(usize),
    Limit,
}

/// Probability mass over the accumulated spinlabor `n` (units of ħ).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinlaborDistribution<S> {
    stage: Stage,
    probs: Vec<S>,
    c: usize,
    gamma: S,
    p_up: S,
}

impl<S: Real> SpinlaborDistribution<S> {
    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// `Pr(n)`, zero outside the stored support.
    pub fn prob(&self, n: usize) -> S {
        self.probs.get(n).copied().unwrap_or_else(S::zero)
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn gamma(&self) -> S {
        self.gamma
    }

    pub fn p_up(&self) -> S {
        self.p_up
    }

    pub fn total(&self) -> S {
        self.probs.iter().copied().sum()
    }

    pub fn mean(&self) -> S {
        self.probs.iter().enumerate().map(|(n, &p)| S::count(n) * p).sum()
    }

    /// Second central moment.
    pub fn variance(&self) -> S {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let d = S::count(n) - mean;
                d * d * p
            })
            .sum()
    }

    /// `sum_n f(n) Pr(n)`.
    pub fn expect(&self, f: impl Fn(usize) -> S) -> S {
        self.probs.iter().enumerate().map(|(n, &p)| f(n) * p).sum()
    }

    /// Total-variation distance to another distribution on the same lattice.
    pub fn tv_distance(&self, other: &Self) -> S {
        let len = self.probs.len().max(other.probs.len());
        let half = S::lit(0.5);
        half * (0..len).map(|n| (self.prob(n) - other.prob(n)).abs()).sum::<S>()
    }

    /// CSV with header `n,probability`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,probability")?;
        for (n, p) in self.probs.iter().enumerate() {
            writeln!(w, "{},{}", n, p.as_f64())?;
        }
        Ok(())
    }

    /// `{"C": .., "gamma": .., "p_up": .., "probs": [..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let probs: Vec<f64> = self.probs.iter().map(|p| p.as_f64()).collect();
        json!({
            "C": self.c,
            "gamma": self.gamma.as_f64(),
            "p_up": self.p_up.as_f64(),
            "probs": probs,
        })
    }
}

/// Distribution after `m <= C` CNOT steps, before any equilibration: cost `m`
/// if the memory started up, zero otherwise.
pub fn pre_equilibration_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
    m: usize,
) -> Result<SpinlaborDistribution<S>> {
    if m > config.c() {
        return Err(Error::Precondition(format!(
            "pre-equilibration phase ends at m = C = {}, asked for m = {m}",
            config.c()
        )));
    }
    let mut probs = vec![S::zero(); m + 1];
    probs[0] = config.p_down();
    probs[m] = probs[m] + config.p_up();
    Ok(SpinlaborDistribution {
        stage: Stage::Step(m),
        probs,
        c: config.c(),
        gamma: reservoir.gamma(),
        p_up: config.p_up(),
    })
}

/// Starting point of the recurrence: the distribution at `m = C`, just before
/// the first equilibration step.
pub fn initial_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> SpinlaborDistribution<S> {
    pre_equilibration_distribution(config, reservoir, config.c())
        .expect("m = C is always in the pre-equilibration phase")
}

/// One equilibration + CNOT cycle:
/// `P_{m+1}(n) = P_m(n) Q_down(m) + P_m(n-1) Q_up(m)`.
pub fn step_distribution<S: Real>(
    dist: &SpinlaborDistribution<S>,
    gamma: S,
) -> Result<SpinlaborDistribution<S>> {
    let m = match dist.stage {
        Stage::Step(m) if m >= dist.c => m,
        Stage::Step(m) => return Err(Error::Regime { m, c: dist.c }),
        Stage::Limit => {
            return Err(Error::Precondition("a limit distribution cannot be stepped".into()))
        }
    };
    let up = equilibrium_up_prob(gamma, m);
    let down = (S::one() + (-S::count(m + 1) * gamma).exp()).recip();
    let old = &dist.probs;
    let mut probs = Vec::with_capacity(old.len() + 1);
    probs.push(old[0] * down);
    for n in 1..old.len() {
        probs.push(old[n] * down + old[n - 1] * up);
    }
    probs.push(old[old.len() - 1] * up);
    Ok(SpinlaborDistribution { stage: Stage::Step(m + 1), probs, c: dist.c, gamma, p_up: dist.p_up })
}

/// Runs the recurrence until one step moves less than `tail_tol` in total
/// variation, then trims negligible trailing support.
pub fn limit_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<SpinlaborDistribution<S>> {
    let gamma = reservoir.gamma();
    let mut dist = initial_distribution(config, reservoir);
    let mut m = config.c();
    let mut change = S::infinity();
    while m < config.max_cycles() {
        let next = step_distribution(&dist, gamma)?;
        change = next.tv_distance(&dist);
        dist = next;
        m += 1;
        if change < config.tail_tol() {
            dist.stage = Stage::Limit;
            trim_tail(&mut dist.probs);
            return Ok(dist);
        }
    }
    Err(Error::NonConvergence { cycles: config.max_cycles(), change: change.as_f64() })
}

fn trim_tail<S: Real>(probs: &mut Vec<S>) {
    let limit = S::lit(SUPPORT_TAIL_MASS);
    let mut tail = S::zero();
    let mut keep = probs.len();
    while keep > 1 {
        let next = tail + probs[keep - 1];
        if next >= limit {
            break;
        }
        tail = next;
        keep -= 1;
    }
    probs.truncate(keep);
}

/// Limit distribution of the cost accrued after the first equilibration,
/// started from zero cost. The full limit is `p_down D + p_up D(· - C)`.
pub fn post_equilibration_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<SpinlaborDistribution<S>> {
    let started_down = ProtocolConfig::new(config.c(), S::zero(), config.max_cycles(), config.tail_tol())?;
    limit_distribution(&started_down, reservoir)
}

/// `ln D(k)` for the post-equilibration limit distribution:
/// `D(k) = e^{-k(C + (k+1)/2)γ} / [(q; q)_k (-q^{C+1}; q)_∞]`, `q = e^{-γ}`.
fn ln_post_equilibration<S: Real>(k: usize, c: usize, gamma: S, ln_norm: S) -> S {
    let exponent = S::count(k) * (S::count(c) + S::count(k + 1) * S::lit(0.5)) * gamma;
    -exponent - ln_q_pochhammer_qq(gamma, k) - ln_norm
}

/// Closed-form `Pr(L = n)` of the complete (infinite) protocol.
pub fn closed_form_pr<S: Real>(n: usize, config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> S {
    let (c, gamma) = (config.c(), reservoir.gamma());
    let ln_norm = ln_neg_q_tail(gamma, c + 1);
    let mut pr = config.p_down() * ln_post_equilibration(n, c, gamma, ln_norm).exp();
    if n >= c {
        pr = pr + config.p_up() * ln_post_equilibration(n - c, c, gamma, ln_norm).exp();
    }
    pr
}

/// Closed-form distribution over `0..=n_max`.
pub fn closed_form_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
    n_max: usize,
) -> SpinlaborDistribution<S> {
    SpinlaborDistribution {
        stage: Stage::Limit,
        probs: (0..=n_max).map(|n| closed_form_pr(n, config, reservoir)).collect(),
        c: config.c(),
        gamma: reservoir.gamma(),
        p_up: config.p_up(),
    }
}

/// `P_{C+j}(n)` from the nested-sum solution of the recurrence, valid for `j > n`.
pub fn finite_step_closed_form<S: Real>(
    n: usize,
    j: usize,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<S> {
    if j <= n {
        return Err(Error::Precondition(format!("closed form needs j > n, got j = {j}, n = {n}")));
    }
    let (c, gamma) = (config.c(), reservoir.gamma());
    // ln[R^{k(C+j)} A(j, k)] with R = e^{-γ}, one factor per nested sum.
    let ln_weight = |k: usize| -> S {
        (0..k)
            .map(|i| {
                let num = -(-S::count(j - i) * gamma).exp_m1();
                let den = (S::count(i + 1) * gamma).exp_m1();
                -S::count(c) * gamma + num.ln() - den.ln()
            })
            .sum()
    };
    let ln_s: S = -(c + 1..=c + j).map(|k| (-S::count(k) * gamma).exp().ln_1p()).sum::<S>();
    let mut pr = config.p_down() * (ln_weight(n) + ln_s).exp();
    if n >= c {
        pr = pr + config.p_up() * (ln_weight(n - c) + ln_s).exp();
    }
    Ok(pr)
}

/// `Q_up(C), Q_up(C+1), ...` until the geometric remainder drops below `tail_tol`.
fn post_equilibration_up_probs<S: Real>(config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> Vec<S> {
    let gamma = reservoir.gamma();
    let ratio_gap = -(-gamma).exp_m1();
    let mut out = Vec::new();
    let mut m = config.c();
    loop {
        let q = equilibrium_up_prob(gamma, m);
        out.push(q);
        let rest = equilibrium_up_prob(gamma, m + 1) / ratio_gap;
        if !(rest >= config.tail_tol()) {
            return out;
        }
        m += 1;
    }
}

/// Mean accumulated spinlabor `C p_up + sum_{m>=C} Q_up(m)`.
pub fn mean_spinlabor<S: Real>(config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> S {
    let tail: S = post_equilibration_up_probs(config, reservoir).into_iter().sum();
    S::count(config.c()) * config.p_up() + tail
}

/// Spinlabor variance: the pre-equilibration Bernoulli part `C^2 p_up p_down`
/// plus the nested double sum over post-equilibration steps.
pub fn variance_spinlabor<S: Real>(config: &ProtocolConfig<S>, reservoir: &ReservoirParams<S>) -> S {
    let qs = post_equilibration_up_probs(config, reservoir);
    let c = S::count(config.c());
    let p = config.p_up();
    let mut prefix = S::zero();
    let mut cross = S::zero();
    for &q in &qs {
        cross = cross + q * prefix;
        prefix = prefix + q;
    }
    c * c * (p - p * p) + S::lit(2.0) * cross + prefix - prefix * prefix
}

/// Total-variation distance to the lattice Gaussian with the same mean and variance.
pub fn gaussian_distance<S: Real>(dist: &SpinlaborDistribution<S>) -> S {
    let mean = dist.mean();
    let var = dist.variance();
    if !(var > S::zero()) {
        let centre = mean.round().to_usize().unwrap_or(0);
        let half = S::lit(0.5);
        let off: S = (0..dist.probs.len()).filter(|&n| n != centre).map(|n| dist.prob(n)).sum();
        return half * (off + (S::one() - dist.prob(centre)).abs());
    }
    lattice_gaussian_tv(dist, mean, var.sqrt())
}

/// Total-variation distance between `dist` and `N(mean, sd^2)` discretized onto
/// the integers (mass of `[n - 1/2, n + 1/2)` assigned to `n`).
pub fn lattice_gaussian_tv<S: Real>(dist: &SpinlaborDistribution<S>, mean: S, sd: S) -> S {
    let (mu, sigma) = (mean.as_f64(), sd.as_f64());
    let lo = (mu - 12.0 * sigma).floor().min(0.0) as i64;
    let hi = ((mu + 12.0 * sigma).ceil() as i64).max(dist.probs.len() as i64 - 1);
    let z = |x: f64| (x - mu) / sigma;
    let mut acc = 0.0;
    for n in lo..=hi {
        let g = normal_mass(z(n as f64 - 0.5), z(n as f64 + 0.5));
        let p = if n >= 0 { dist.prob(n as usize).as_f64() } else { 0.0 };
        acc += (p - g).abs();
    }
    acc += normal_mass(f64::NEG_INFINITY, z(lo as f64 - 0.5));
    acc += normal_mass(z(hi as f64 + 0.5), f64::INFINITY);
    S::lit(0.5 * acc)
}

/// Standard normal mass on `[a, b]`, computed from the nearer tail.
fn normal_mass(a: f64, b: f64) -> f64 {
    let upper = |x: f64| 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
    if a >= 0.0 {
        upper(a) - upper(b)
    } else if b <= 0.0 {
        upper(-b) - upper(-a)
    } else {
        1.0 - upper(-a) - upper(b)
    }
}
