//! Closed-form lower bounds on the erasure cost and the diagnostics comparing them.

use std::io::{self, Write};

use serde::Serialize;

use crate::dist::mean_spinlabor;
use crate::error::Result;
use crate::fluctuation::jarzynski_a_prime;
use crate::params::{ProtocolConfig, ReservoirParams};
use crate::scalar::Real;

/// `C p_up + γ^{-1} ln(1 + e^{-(C+1)γ})`, from bounding the tail sum by an integral.
pub fn spinlabor_bound_integral<S: Real>(c: usize, p_up: S, gamma: S) -> S {
    S::count(c) * p_up + (-S::count(c + 1) * gamma).exp().ln_1p() / gamma
}

/// `γ^{-1} ln(2/A)`, Jensen's inequality applied to the symmetric-memory equality.
/// Evaluated as `γ^{-1} [ln(1 + e^{-(C+1)γ}) + ln(1 + tanh(Cγ/2))]`.
pub fn spinlabor_bound_jensen<S: Real>(c: usize, gamma: S) -> S {
    let half_c = S::count(c) * gamma * S::lit(0.5);
    ((-S::count(c + 1) * gamma).exp().ln_1p() + half_c.tanh().ln_1p()) / gamma
}

/// `-γ^{-1} ln A'`, the Jensen bound for an arbitrary initial `p_up`.
pub fn spinlabor_bound_jensen_asymmetric<S: Real>(c: usize, p_up: S, gamma: S) -> S {
    -jarzynski_a_prime(c, p_up, gamma).ln() / gamma
}

/// `γ^{-1} ln 2 - 1/2`, independent of the protocol.
pub fn spinlabor_bound_universal<S: Real>(gamma: S) -> S {
    S::LN_2() / gamma - S::lit(0.5)
}

fn default_config<S: Real>(c: usize, p_up: S, gamma: S) -> Result<(ProtocolConfig<S>, ReservoirParams<S>)> {
    let reservoir = ReservoirParams::from_gamma(gamma)?;
    Ok((ProtocolConfig::for_reservoir(c, p_up, &reservoir)?, reservoir))
}

/// Mean spintherm absorbed by the reservoir, `<L> + p_up`.
pub fn spintherm_total<S: Real>(c: usize, p_up: S, gamma: S) -> Result<S> {
    let (config, reservoir) = default_config(c, p_up, gamma)?;
    Ok(mean_spinlabor(&config, &reservoir) + p_up)
}

/// `(C+1) p_up + γ^{-1} ln(1 + e^{-(C+1)γ})`.
pub fn spintherm_bound<S: Real>(c: usize, p_up: S, gamma: S) -> S {
    S::count(c + 1) * p_up + (-S::count(c + 1) * gamma).exp().ln_1p() / gamma
}

/// `γ^{-1} ln 2`.
pub fn spintherm_bound_universal<S: Real>(gamma: S) -> S {
    S::LN_2() / gamma
}

/// `R = <L> - γ^{-1} ln 2`: negative when the protocol beats the Landauer-like cost.
pub fn r_diagnostic<S: Real>(c: usize, alpha: S, p_up: S) -> Result<S> {
    let reservoir = ReservoirParams::from_alpha(alpha)?;
    let config = ProtocolConfig::for_reservoir(c, p_up, &reservoir)?;
    Ok(mean_spinlabor(&config, &reservoir) - S::LN_2() / reservoir.gamma())
}

/// Integral bound minus Jensen bound at `p_up = 1/2`:
/// `C/2 - γ^{-1} ln(2 / (1 + e^{-Cγ}))`.
pub fn delta_b<S: Real>(c: usize, gamma: S) -> S {
    let x = S::count(c) * gamma;
    S::count(c) * S::lit(0.5) - (x * S::lit(0.5)).tanh().ln_1p() / gamma
}

/// Mean costs and every bound for one `(C, α, p_up)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport<S> {
    #[serde(rename = "C")]
    pub c: usize,
    pub alpha: S,
    pub p_up: S,
    #[serde(rename = "mean_L")]
    pub mean_l: S,
    pub bound_integral: S,
    pub bound_jensen: S,
    #[serde(rename = "bound_universal_L")]
    pub bound_universal_l: S,
    pub spintherm_mean: S,
    pub bound_spintherm: S,
    #[serde(rename = "bound_universal_Q")]
    pub bound_universal_q: S,
    #[serde(rename = "R")]
    pub r: S,
    #[serde(rename = "delta_B")]
    pub delta_b: S,
}

pub const BOUNDS_CSV_HEADER: &str = "C,alpha,p_up,mean_L,bound_integral,bound_jensen,bound_universal_L,\
spintherm_mean,bound_spintherm,bound_universal_Q,R,delta_B";

/// Builds a report. `bound_jensen` is the `p_up`-aware form `-γ^{-1} ln A'`.
pub fn bounds_report<S: Real>(c: usize, alpha: S, p_up: S) -> Result<BoundsReport<S>> {
    let reservoir = ReservoirParams::from_alpha(alpha)?;
    let config = ProtocolConfig::for_reservoir(c, p_up, &reservoir)?;
    let gamma = reservoir.gamma();
    let mean_l = mean_spinlabor(&config, &reservoir);
    Ok(BoundsReport {
        c,
        alpha,
        p_up,
        mean_l,
        bound_integral: spinlabor_bound_integral(c, p_up, gamma),
        bound_jensen: spinlabor_bound_jensen_asymmetric(c, p_up, gamma),
        bound_universal_l: spinlabor_bound_universal(gamma),
        spintherm_mean: mean_l + p_up,
        bound_spintherm: spintherm_bound(c, p_up, gamma),
        bound_universal_q: spintherm_bound_universal(gamma),
        r: mean_l - S::LN_2() / gamma,
        delta_b: delta_b(c, gamma),
    })
}

impl<S: Real> BoundsReport<S> {
    pub fn csv_row(&self) -> String {
        let vals = [
            self.alpha,
            self.p_up,
            self.mean_l,
            self.bound_integral,
            self.bound_jensen,
            self.bound_universal_l,
            self.spintherm_mean,
            self.bound_spintherm,
            self.bound_universal_q,
            self.r,
            self.delta_b,
        ];
        let mut row = self.c.to_string();
        for v in vals {
            row.push(',');
            row.push_str(&v.as_f64().to_string());
        }
        row
    }
}

/// Writes the header followed by one row per report, in order.
pub fn write_bounds_csv<S: Real, W: Write>(reports: &[BoundsReport<S>], mut w: W) -> io::Result<()> {
    writeln!(w, "{BOUNDS_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
