use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin polarization alpha = {0} outside the open interval (0, 0.5)")]
    Alpha(f64),
    #[error("inverse spin temperature gamma = {0} must be finite and positive")]
    Gamma(f64),
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("recurrence applies only after the first equilibration step (m = {m} < C = {c})")]
    Regime { m: usize, c: usize },
    #[error("no convergence within {cycles} cycles (last per-step change {change:e})")]
    NonConvergence { cycles: usize, change: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infinite q-product diverges for |q| = {0} >= 1")]
    Divergence(f64),
    #[error("memory bias p_up = {0} is degenerate (entropy production undefined)")]
    DegenerateMemory(f64),
    #[error("brute-force nested sum refused for j = {j}, n = {n} (limits n <= 8, j <= 24)")]
    TooLarge { j: usize, n: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
