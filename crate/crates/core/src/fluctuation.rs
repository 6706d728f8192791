//! Jarzynski-like equalities, free spin angular momentum, violation
//! probabilities and the integral fluctuation theorem, evaluated exactly.

use std::io::{self, Write};

use crate::dist::{post_equilibration_distribution, SpinlaborDistribution, Stage};
use crate::error::{Error, Result};
use crate::montecarlo::TrajectoryRecord;
use crate::params::{equilibrium_up_prob, ProtocolConfig, ReservoirParams};
use crate::scalar::Real;

/// Probability of one `(initial state, spinlabor)` outcome of the full protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome<S> {
    pub initial_up: bool,
    pub spinlabor: usize,
    pub probability: S,
}

/// Exact joint distribution: the post-equilibration cost distribution, weighted
/// by `p_down`, and shifted by `C` and weighted by `p_up`.
pub fn joint_distribution<S: Real>(
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<Vec<JointOutcome<S>>> {
    let post = post_equilibration_distribution(config, reservoir)?;
    let mut out = Vec::with_capacity(2 * post.probs().len());
    for (initial_up, weight, shift) in [(false, config.p_down(), 0), (true, config.p_up(), config.c())] {
        if weight > S::zero() {
            out.extend(post.probs().iter().enumerate().map(|(n, &p)| JointOutcome {
                initial_up,
                spinlabor: n + shift,
                probability: weight * p,
            }));
        }
    }
    Ok(out)
}

/// `A = (1 + e^{-Cγ}) / (1 + e^{-(C+1)γ})`.
pub fn jarzynski_a<S: Real>(c: usize, gamma: S) -> S {
    let q = |k: usize| (-S::count(k) * gamma).exp();
    (S::one() + q(c)) / (S::one() + q(c + 1))
}

/// `A' = (p_down + p_up e^{-Cγ}) / (1 + e^{-(C+1)γ})`; equals `A/2` at `p_up = 1/2`.
pub fn jarzynski_a_prime<S: Real>(c: usize, p_up: S, gamma: S) -> S {
    pre_equilibration_factor(c, p_up, gamma) * post_equilibration_factor(c, gamma)
}

/// `<e^{-γL}>` over the pre-equilibration CNOTs alone.
pub fn pre_equilibration_factor<S: Real>(c: usize, p_up: S, gamma: S) -> S {
    (S::one() - p_up) + p_up * (-S::count(c) * gamma).exp()
}

/// `<e^{-γL}>` over the stepwise-equilibrium part, `1 / (1 + e^{-(C+1)γ})`.
pub fn post_equilibration_factor<S: Real>(c: usize, gamma: S) -> S {
    (S::one() + (-S::count(c + 1) * gamma).exp()).recip()
}

/// `<e^{-γL}> = sum_n e^{-γn} Pr(n)`.
pub fn jarzynski_lhs<S: Real>(dist: &SpinlaborDistribution<S>, gamma: S) -> S {
    dist.expect(|n| (-S::count(n) * gamma).exp())
}

/// `<e^{-γL}>` for a limit distribution built with protocol `C` and initial
/// `p_up`; rejects a distribution built from different parameters.
pub fn jarzynski_lhs_asymmetric<S: Real>(dist: &SpinlaborDistribution<S>, gamma: S, c: usize, p_up: S) -> Result<S> {
    if dist.stage() != Stage::Limit || dist.c() != c || dist.p_up() != p_up {
        return Err(Error::Precondition(format!(
            "expected the limit distribution for C = {c}, p_up = {p_up}, got C = {}, p_up = {}, {:?}",
            dist.c(),
            dist.p_up(),
            dist.stage()
        )));
    }
    Ok(jarzynski_lhs(dist, gamma))
}

/// `-γ^{-1} ln <e^{-γL}>`.
pub fn exponential_average<S: Real>(dist: &SpinlaborDistribution<S>, gamma: S) -> S {
    -jarzynski_lhs(dist, gamma).ln() / gamma
}

/// Change in memory-ancilla free spin angular momentum over the whole erasure,
/// with `N̄` ancillas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpinChange<S> {
    pub delta_f: S,
    pub n_bar: usize,
    /// Initial memory inverse spin temperature `ln(p_down / p_up)`.
    pub gamma_m_initial: S,
    pub ln_z_initial: S,
    pub ln_z_final: S,
}

fn memory_log_odds<S: Real>(p_up: S) -> Result<S> {
    if !(p_up > S::zero() && p_up < S::one()) {
        return Err(Error::DegenerateMemory(p_up.as_f64()));
    }
    Ok((S::one() - p_up).ln() - p_up.ln())
}

/// `ΔF_s = -γ^{-1} [(N̄+1)(γ - ln(p_down/p_up))/2 + ln p_down]`.
pub fn delta_free_spin<S: Real>(p_up: S, gamma: S, n_bar: usize) -> Result<FreeSpinChange<S>> {
    let lambda = memory_log_odds(p_up)?;
    let half_spins = S::count(n_bar + 1) * S::lit(0.5);
    let ln_p_down = (-p_up).ln_1p();
    let ln_z_initial = half_spins * lambda - ln_p_down;
    let ln_z_final = half_spins * gamma;
    Ok(FreeSpinChange {
        delta_f: -(ln_z_final - ln_z_initial) / gamma,
        n_bar,
        gamma_m_initial: lambda,
        ln_z_initial,
        ln_z_final,
    })
}

/// Stochastic entropy production of one trajectory,
/// `σ = γ(L - ΔF_s) - (ln(p_down/p_up) - γ)(n_i - (N̄+1)/2)`.
pub fn trajectory_entropy_production<S: Real>(
    initial_up: bool,
    spinlabor: usize,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
    n_bar: usize,
) -> Result<S> {
    let gamma = reservoir.gamma();
    let free = delta_free_spin(config.p_up(), gamma, n_bar)?;
    let n_i = if initial_up { S::one() } else { S::zero() };
    let half_spins = S::count(n_bar + 1) * S::lit(0.5);
    Ok(gamma * (S::count(spinlabor) - free.delta_f) - (free.gamma_m_initial - gamma) * (n_i - half_spins))
}

/// Entropy production of a simulated trajectory.
pub fn entropy_production<S: Real>(
    traj: &TrajectoryRecord,
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
    n_bar: usize,
) -> Result<S> {
    trajectory_entropy_production(traj.initial_up, traj.spinlabor as usize, config, reservoir, n_bar)
}

/// `<e^{-σ}>` over an exact joint distribution.
pub fn ift_expectation<S: Real>(
    joint: &[JointOutcome<S>],
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
    n_bar: usize,
) -> Result<S> {
    let mut acc = S::zero();
    for o in joint {
        let sigma = trajectory_entropy_production(o.initial_up, o.spinlabor, config, reservoir, n_bar)?;
        acc = acc + (-sigma).exp() * o.probability;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEntropyProduction<S> {
    /// `<σ>` of the reservoir-memory-ancilla system.
    pub total: S,
    /// `<σ>` of the memory-ancilla system alone.
    pub memory: S,
    /// `γ <Q_s>`, the entropy carried into the reservoir by spintherm.
    pub spintherm_entropy: S,
}

/// Mean entropy production with `N̄ = max_cycles`. The memory part is
/// `γ(N̄+1)Q_up(N̄) - p_up ln(p_down/p_up) + ln p_down`.
pub fn mean_entropy_production<S: Real>(
    joint: &[JointOutcome<S>],
    config: &ProtocolConfig<S>,
    reservoir: &ReservoirParams<S>,
) -> Result<MeanEntropyProduction<S>> {
    let gamma = reservoir.gamma();
    let n_bar = config.max_cycles();
    let lambda = memory_log_odds(config.p_up())?;
    let mut total = S::zero();
    let mut mean_l = S::zero();
    for o in joint {
        let sigma = trajectory_entropy_production(o.initial_up, o.spinlabor, config, reservoir, n_bar)?;
        total = total + sigma * o.probability;
        mean_l = mean_l + S::count(o.spinlabor) * o.probability;
    }
    let memory = gamma * S::count(n_bar + 1) * equilibrium_up_prob(gamma, n_bar) - config.p_up() * lambda
        + (-config.p_up()).ln_1p();
    Ok(MeanEntropyProduction { total, memory, spintherm_entropy: gamma * (mean_l + config.p_up()) })
}

/// Reference value the spinlabor is compared against in a violation curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationBaseline<S> {
    /// `γ^{-1} ln(2/A)`, the bound for a symmetric memory.
    Symmetric,
    /// `γ^{-1} ln 2`.
    Landauer,
    /// `-γ^{-1} ln A'`, the bound for the given `p_up`.
    Asymmetric,
    Value(S),
}

impl<S: Real> ViolationBaseline<S> {
    pub fn resolve(self, c: usize, p_up: S, gamma: S) -> S {
        match self {
            Self::Symmetric => (S::lit(2.0) / jarzynski_a(c, gamma)).ln() / gamma,
            Self::Landauer => S::LN_2() / gamma,
            Self::Asymmetric => -jarzynski_a_prime(c, p_up, gamma).ln() / gamma,
            Self::Value(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<S> {
    pub epsilon: S,
    /// `Pr(L <= baseline - ε)`.
    pub probability: S,
    /// `e^{-γε}`.
    pub bound: S,
}

impl<S: Real> Violation<S> {
    pub fn within_bound(&self) -> bool {
        self.probability <= self.bound
    }
}

pub fn violation_probability<S: Real>(
    dist: &SpinlaborDistribution<S>,
    gamma: S,
    baseline: S,
    epsilon: S,
) -> Result<Violation<S>> {
    if !(epsilon >= S::zero()) {
        return Err(Error::Precondition(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let threshold = baseline - epsilon;
    let slack = S::epsilon() * S::lit(64.0) * threshold.abs().max(S::one());
    let probability = dist
        .probs()
        .iter()
        .enumerate()
        .take_while(|&(n, _)| S::count(n) <= threshold + slack)
        .map(|(_, &p)| p)
        .sum();
    Ok(Violation { epsilon, probability, bound: (-gamma * epsilon).exp() })
}

/// Violation probabilities at `ε = 0, step, 2 step, ..., <= max`.
pub fn violation_curve<S: Real>(
    dist: &SpinlaborDistribution<S>,
    gamma: S,
    baseline: S,
    step: S,
    max: S,
) -> Result<Vec<Violation<S>>> {
    if !(step > S::zero()) {
        return Err(Error::Precondition(format!("epsilon step must be positive, got {step}")));
    }
    let points = ((max / step) + S::lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=points).map(|k| violation_probability(dist, gamma, baseline, S::count(k) * step)).collect()
}

/// CSV with header `epsilon,pr_violation,exp_bound`.
pub fn write_violation_csv<S: Real, W: Write>(curve: &[Violation<S>], mut w: W) -> io::Result<()> {
    writeln!(w, "epsilon,pr_violation,exp_bound")?;
    for v in curve {
        writeln!(w, "{},{},{}", v.epsilon.as_f64(), v.probability.as_f64(), v.bound.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::limit_distribution;

    fn setup(c: usize, p_up: f64, gamma: f64) -> (ProtocolConfig<f64>, ReservoirParams<f64>) {
        let r = ReservoirParams::from_gamma(gamma).unwrap();
        (ProtocolConfig::for_reservoir(c, p_up, &r).unwrap(), r)
    }

    #[test]
    fn symmetric_lhs_c1_quarter() {
        let g = 4f64.ln();
        let (cfg, r) = setup(1, 0.5, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let want = 1.25 / 1.0625 / 2.0;
        assert!((jarzynski_a(1, g) / 2.0 - want).abs() < 1e-15);
        assert!((jarzynski_lhs(&d, g) - want).abs() < 1e-10);
        assert!((jarzynski_lhs(&d, g) - 0.588235).abs() < 1e-6);
    }

    #[test]
    fn cold_point_mass_lhs_is_one() {
        let (cfg, r) = setup(0, 0.5, 60.0);
        let d = limit_distribution(&cfg, &r).unwrap();
        assert_eq!(jarzynski_lhs(&d, 60.0), 1.0);
        assert_eq!(exponential_average(&d, 60.0), 0.0);
    }

    #[test]
    fn a_prime_reductions() {
        for g in [0.1f64, 1.0, 3.0] {
            assert!((jarzynski_a_prime(4, 0.5, g) - jarzynski_a(4, g) / 2.0).abs() < 1e-15);
            let c0 = 1.0 / (1.0 + (-g).exp());
            for p in [0.1, 0.7] {
                assert!((jarzynski_a_prime(0, p, g) - c0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn asymmetric_lhs_checks_parameters() {
        let g = 1.5f64.ln();
        let (cfg, r) = setup(10, 0.1, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let lhs = jarzynski_lhs_asymmetric(&d, g, 10, 0.1).unwrap();
        assert!((lhs - jarzynski_a_prime(10, 0.1, g)).abs() < 1e-10);
        assert!(jarzynski_lhs_asymmetric(&d, g, 9, 0.1).is_err());
        assert!(jarzynski_lhs_asymmetric(&d, g, 10, 0.5).is_err());
    }

    #[test]
    fn exponential_average_at_c0() {
        let g = 0.8;
        let (cfg, r) = setup(0, 0.5, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let want = (-g).exp().ln_1p() / g;
        assert!((exponential_average(&d, g) - want).abs() < 1e-10);
    }

    #[test]
    fn free_spin_equilibrium_start() {
        let g = 0.9f64;
        let p_up = equilibrium_up_prob(g, 0);
        for n_bar in [10, 100] {
            let f = delta_free_spin(p_up, g, n_bar).unwrap();
            assert!((f.gamma_m_initial - g).abs() < 1e-12);
            assert!((f.delta_f + (1.0 - p_up).ln() / g).abs() < 1e-10);
        }
        let (cfg, r) = setup(0, p_up, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let f = delta_free_spin(p_up, g, cfg.max_cycles()).unwrap();
        assert!((exponential_average(&d, g) - f.delta_f).abs() < 1e-10);
    }

    #[test]
    fn free_spin_generalized_jarzynski() {
        let g = 0.6f64;
        for c in [0, 1, 5] {
            for n_bar in [20, 40] {
                let f = delta_free_spin(0.5, g, n_bar).unwrap();
                let a = jarzynski_a(c, g);
                let lhs = (g * f.delta_f).exp() * a / 2.0;
                let rhs = a * (-(n_bar as f64 + 1.0) * g / 2.0).exp();
                assert!((lhs / rhs - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_memory_rejected() {
        for p in [0.0, 1.0] {
            assert!(matches!(delta_free_spin(p, 1.0, 10), Err(Error::DegenerateMemory(_))));
        }
        let (cfg, r) = setup(1, 1.0, 1.0);
        assert!(trajectory_entropy_production(true, 3, &cfg, &r, 10).is_err());
    }

    #[test]
    fn entropy_production_equilibrium_start_and_n_bar_invariance() {
        let g = 0.7;
        let (cfg, r) = setup(2, equilibrium_up_prob(g, 0), g);
        let m = cfg.max_cycles();
        for (up, n) in [(false, 0), (false, 3), (true, 2), (true, 7)] {
            let s1 = trajectory_entropy_production(up, n, &cfg, &r, m).unwrap();
            let s2 = trajectory_entropy_production(up, n, &cfg, &r, 2 * m).unwrap();
            assert!((s1 - s2).abs() < 1e-10);
            let f = delta_free_spin(cfg.p_up(), g, m).unwrap();
            assert!((s1 - g * (n as f64 - f.delta_f)).abs() < 1e-10);
        }
    }

    #[test]
    fn ift_examples() {
        for (c, g) in [(0, 4f64.ln()), (10, 1.5f64.ln())] {
            let (cfg, r) = setup(c, 0.5, g);
            let joint = joint_distribution(&cfg, &r).unwrap();
            let total: f64 = joint.iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!(joint.iter().all(|o| !o.initial_up || o.spinlabor >= c));
            let m = cfg.max_cycles();
            for n_bar in [m, 2 * m] {
                assert!((ift_expectation(&joint, &cfg, &r, n_bar).unwrap() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_entropy_production_symmetric_memory() {
        let g = 0.405;
        let (cfg, r) = setup(1, 0.5, g);
        let joint = joint_distribution(&cfg, &r).unwrap();
        let e = mean_entropy_production(&joint, &cfg, &r).unwrap();
        assert!(e.total >= 0.0);
        assert!((e.memory - 0.5f64.ln()).abs() < 1e-10);
        assert!(e.spintherm_entropy >= -e.memory);
        assert!(e.spintherm_entropy >= 2f64.ln());
        assert!((e.total - (e.spintherm_entropy + e.memory)).abs() < 1e-9);
    }

    #[test]
    fn violation_examples() {
        let g = 1.5f64.ln();
        let (cfg, r) = setup(10, 0.1, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let v = violation_probability(&d, g, 1.0, 2.5).unwrap();
        assert_eq!(v.probability, 0.0);
        let base = ViolationBaseline::Symmetric.resolve(10, 0.1, g);
        let v0 = violation_probability(&d, g, base, 0.0).unwrap();
        assert!((v0.probability - 0.9).abs() < 0.02, "{}", v0.probability);
        assert!(violation_probability(&d, g, base, -0.1).is_err());
    }

    #[test]
    fn symmetric_baseline_is_not_a_bound_for_asymmetric_memory() {
        // With p_up = 0.1 most mass sits at small n, so the symmetric baseline
        // overshoots; the p_up-aware baseline restores the exponential bound.
        let g = 1.5f64.ln();
        let (cfg, r) = setup(10, 0.1, g);
        let d = limit_distribution(&cfg, &r).unwrap();
        let sym = ViolationBaseline::Symmetric.resolve(10, 0.1, g);
        assert!(!violation_probability(&d, g, sym, 0.7).unwrap().within_bound());
        let asym = ViolationBaseline::Asymmetric.resolve(10, 0.1, g);
        let curve = violation_curve(&d, g, asym, 0.1, 3.0).unwrap();
        assert_eq!(curve.len(), 31);
        assert!(curve.iter().all(Violation::within_bound));
    }

    #[test]
    fn violation_csv_header() {
        let (cfg, r) = setup(0, 0.5, 1.0);
        let d = limit_distribution(&cfg, &r).unwrap();
        let curve = violation_curve(&d, 1.0, 1.0, 0.5, 1.0).unwrap();
        let mut buf = Vec::new();
        write_violation_csv(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("epsilon,pr_violation,exp_bound"));
        assert_eq!(text.lines().count(), 4);
    }
}
