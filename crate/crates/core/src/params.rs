//! Reservoir and protocol parameters plus the elementary probabilities of the
//! erasure protocol. All angular momenta are in units of ħ (ħ = 1).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default convergence tolerance for infinite-protocol limits.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Spin bath at polarization `alpha`, inverse spin temperature `gamma = ln((1-alpha)/alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams<S> {
    alpha: S,
    gamma: S,
}

impl<S: Real> ReservoirParams<S> {
    pub fn from_alpha(alpha: S) -> Result<Self> {
        let gamma = gamma_from_alpha(alpha)?;
        Ok(Self { alpha, gamma })
    }

    /// Any finite positive `gamma`. Very cold reservoirs (large `gamma`) are
    /// allowed even when `alpha` underflows.
    pub fn from_gamma(gamma: S) -> Result<Self> {
        if !(gamma > S::zero()) || !gamma.is_finite() {
            return Err(Error::Gamma(gamma.as_f64()));
        }
        Ok(Self { alpha: alpha_from_gamma(gamma), gamma })
    }

    pub fn alpha(&self) -> S {
        self.alpha
    }

    pub fn gamma(&self) -> S {
        self.gamma
    }

    /// Spin temperature `1/gamma`.
    pub fn temperature(&self) -> S {
        self.gamma.recip()
    }

    /// `Q_up(m)` for this reservoir.
    pub fn up_prob(&self, m: usize) -> S {
        equilibrium_up_prob(self.gamma, m)
    }
}

/// Protocol variation `c` (CNOT steps before the first equilibration), the
/// initial memory bias and the truncation controls for the infinite protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig<S> {
    c: usize,
    p_up: S,
    max_cycles: usize,
    tail_tol: S,
}

impl<S: Real> ProtocolConfig<S> {
    pub fn new(c: usize, p_up: S, max_cycles: usize, tail_tol: S) -> Result<Self> {
        if !(p_up >= S::zero() && p_up <= S::one()) {
            return Err(Error::Probability { name: "p_up", value: p_up.as_f64() });
        }
        if max_cycles < c + 1 {
            return Err(Error::Config(format!(
                "max_cycles = {max_cycles} must be at least C + 1 = {}",
                c + 1
            )));
        }
        if !(tail_tol > S::zero()) {
            return Err(Error::Config(format!("tail_tol = {} must be positive", tail_tol)));
        }
        Ok(Self { c, p_up, max_cycles, tail_tol })
    }

    /// Configuration with the default tolerance and a cycle budget large
    /// enough for the limit computations at this reservoir temperature.
    pub fn for_reservoir(c: usize, p_up: S, reservoir: &ReservoirParams<S>) -> Result<Self> {
        let tail_tol = S::lit(DEFAULT_TAIL_TOL);
        Self::new(c, p_up, default_max_cycles(c, reservoir.gamma(), tail_tol), tail_tol)
    }

    pub fn with_max_cycles(self, max_cycles: usize) -> Result<Self> {
        Self::new(self.c, self.p_up, max_cycles, self.tail_tol)
    }

    pub fn with_tail_tol(self, tail_tol: S) -> Result<Self> {
        Self::new(self.c, self.p_up, self.max_cycles, tail_tol)
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn p_up(&self) -> S {
        self.p_up
    }

    pub fn p_down(&self) -> S {
        S::one() - self.p_up
    }

    pub fn max_cycles(&self) -> usize {
        self.max_cycles
    }

    pub fn tail_tol(&self) -> S {
        self.tail_tol
    }
}

/// Cycle budget `M` such that `Q_up(M)` sits two decades below `tail_tol`.
pub fn default_max_cycles<S: Real>(c: usize, gamma: S, tail_tol: S) -> usize {
    let decay = (S::lit(100.0) / tail_tol).ln() / gamma;
    let extra = decay.ceil().to_usize().unwrap_or(usize::MAX / 2);
    c + 1 + extra
}

pub fn gamma_from_alpha<S: Real>(alpha: S) -> Result<S> {
    if !(alpha > S::zero() && alpha < S::lit(0.5)) {
        return Err(Error::Alpha(alpha.as_f64()));
    }
    Ok((-alpha).ln_1p() - alpha.ln())
}

pub fn alpha_from_gamma<S: Real>(gamma: S) -> S {
    (S::one() + gamma.exp()).recip()
}

/// `Q_up(m) = e^{-(m+1)γ} / (1 + e^{-(m+1)γ})`: probability the memory-ancilla
/// block is spin-up right after an equilibration that follows `m` CNOT steps.
pub fn equilibrium_up_prob<S: Real>(gamma: S, m: usize) -> S {
    debug_assert!(gamma > S::zero());
    (S::one() + (S::count(m + 1) * gamma).exp()).recip()
}

/// Polarization at which `e^{-γ(C+1)} = e^{-1}` (the "warm" reservoir).
pub fn critical_alpha<S: Real>(c: usize) -> S {
    (S::one() + S::count(c + 1).recip().exp()).recip()
}

/// `P_up(n + delta_n) / P_up(n) = e^{-γ delta_n}`.
pub fn reservoir_weight_ratio<S: Real>(gamma: S, delta_n: i64) -> S {
    (-gamma * S::from_i64(delta_n).expect("delta_n representable")).exp()
}
