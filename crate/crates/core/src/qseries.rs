//! q-Pochhammer products and the nested geometric sums behind the closed-form
//! spinlabor distributions.

use num_traits::{pow, Num};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Length of a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    Finite(usize),
    Infinite,
}

/// Factors closer to 1 than this are accumulated as logarithms.
const LOG_SPACE_THRESHOLD: f64 = 1e-8;
/// Infinite products stop once `|a q^k|` drops below this.
const TRUNCATION: f64 = 1e-16;

/// `(a; q)_n = prod_{k=0}^{n-1} (1 - a q^k)`, with `(a; q)_0 = 1`.
pub fn q_pochhammer<S: Real>(a: S, q: S, terms: Terms) -> Result<S> {
    let limit = match terms {
        Terms::Finite(n) => Some(n),
        Terms::Infinite => {
            if a == S::zero() {
                return Ok(S::one());
            }
            if q.abs() >= S::one() {
                return Err(Error::Divergence(q.abs().as_f64()));
            }
            None
        }
    };
    let threshold = S::lit(LOG_SPACE_THRESHOLD);
    let cutoff = S::lit(TRUNCATION);
    let mut product = S::one();
    let mut log_part = S::zero();
    let mut term = a;
    let mut k = 0usize;
    loop {
        match limit {
            Some(n) if k >= n => break,
            None if term.abs() < cutoff => break,
            _ => {}
        }
        if term.abs() < threshold {
            log_part = log_part + (-term).ln_1p();
        } else {
            product = product * (S::one() - term);
        }
        term = term * q;
        k += 1;
    }
    Ok(product * log_part.exp())
}

/// `ln (e^{-γ}; e^{-γ})_n`, accurate for small `γ` where `1 - e^{-kγ}` cancels.
pub fn ln_q_pochhammer_qq<S: Real>(gamma: S, n: usize) -> S {
    (1..=n).map(|k| (-(-S::count(k) * gamma).exp_m1()).ln()).sum()
}

/// `ln (-e^{-sγ}; e^{-γ})_∞ = sum_{k>=s} ln(1 + e^{-kγ})`.
pub fn ln_neg_q_tail<S: Real>(gamma: S, start: usize) -> S {
    let cutoff = S::lit(TRUNCATION) * S::lit(1e-2);
    let mut acc = S::zero();
    let mut k = start;
    loop {
        let x = (-S::count(k) * gamma).exp();
        if x < cutoff {
            break;
        }
        acc = acc + x.ln_1p();
        k += 1;
    }
    acc
}

/// Closed product form of the `n`-fold nested sum `A(j, n)`:
/// `prod_{k=0}^{n-1} (r^k - r^j) / (1 - r^{k+1})`, with `A(j, 0) = 1`.
///
/// Works over any field, so it can be evaluated exactly with rationals.
pub fn product_a<T: Clone + Num>(j: usize, n: usize, r: &T) -> Result<T> {
    if n > j {
        return Err(Error::Precondition(format!("A(j, n) needs j >= n, got j = {j}, n = {n}")));
    }
    let r_j = pow(r.clone(), j);
    let mut acc = T::one();
    for k in 0..n {
        let den = T::one() - pow(r.clone(), k + 1);
        if den.is_zero() {
            return Err(Error::Precondition("product form of A(j, n) undefined at r = 1".into()));
        }
        acc = acc * (pow(r.clone(), k) - r_j.clone()) / den;
    }
    Ok(acc)
}

/// Literal evaluation of the nested sum
/// `sum_{i1=n-1}^{j-1} sum_{i2=n-2}^{i1-1} ... sum_{in=0}^{i(n-1)-1} r^{i1 + ... + in}`.
///
/// Exponential cost; refuses `n > 8` or `j > 24`.
pub fn nested_sum_a_bruteforce<T: Clone + Num>(j: usize, n: usize, r: &T) -> Result<T> {
    if n > 8 || j > 24 {
        return Err(Error::TooLarge { j, n });
    }
    if n > j {
        return Err(Error::Precondition(format!("A(j, n) needs j >= n, got j = {j}, n = {n}")));
    }
    if n == 0 {
        return Ok(T::one());
    }
    let powers: Vec<T> = (0..j).map(|i| pow(r.clone(), i)).collect();
    Ok(nest(&powers, n, 0, j, T::one()))
}

fn nest<T: Clone + Num>(powers: &[T], n: usize, depth: usize, upper: usize, weight: T) -> T {
    if depth == n {
        return weight;
    }
    let lower = n - 1 - depth;
    let mut acc = T::zero();
    for i in lower..upper {
        acc = acc + nest(powers, n, depth + 1, i, weight.clone() * powers[i].clone());
    }
    acc
}
