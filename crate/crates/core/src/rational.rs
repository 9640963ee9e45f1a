//! Best rational approximation with a denominator bound, and the exponents
//! `u` defined by `|β - k/ℓ| = 1/(ℓ e^{s τ u})`.
//!
//! Targets are exact rationals `num/den`; a float target is read as a dyadic
//! rational with denominator `2^64`. The returned `a/b` minimizes `|bα - a|`
//! over `1 <= b <= B`, ties going to the smaller `b` and then the smaller `a`.
//! That minimizer is the last continued-fraction convergent with `b <= B`.

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{invalid, Result};

/// Smallest denominator bound used by the scan harness.
pub const BOUND_FLOOR: u64 = 32;

const DYADIC_SHIFT: u32 = 64;

/// `a/b ≈ num/den` with `gcd(a, b) = 1` and `1 <= b <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalApprox {
    pub a: u64,
    pub b: u64,
    pub bound: u64,
    num: u128,
    den: u128,
    /// `|b·num - a·den|`, so that `|bα - a| = err / den`.
    err: u128,
}

impl RationalApprox {
    pub fn target(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `|α - a/b|`.
    pub fn quality(&self) -> f64 {
        self.err as f64 / (self.den as f64 * self.b as f64)
    }

    /// `|bα - a|`.
    pub fn scaled_error(&self) -> f64 {
        self.err as f64 / self.den as f64
    }

    pub fn is_exact(&self) -> bool {
        self.err == 0
    }

    /// `|α - a/b| <= 1/(bB)`, checked exactly.
    pub fn satisfies_dirichlet(&self) -> bool {
        self.err * self.bound as u128 <= self.den
    }

    /// `u` with `|α - a/b| = 1/(b e^{s τ u})`.
    pub fn exponent_u(&self, tau: f64, scale: Scale) -> Result<ExponentU> {
        exponent_from_scaled(self.err, self.den, tau, scale)
    }
}

/// Best approximation to `num/den ∈ [0, 1]` with denominator at most `bound`.
pub fn best_approx_ratio(num: u64, den: u64, bound: u64) -> Result<RationalApprox> {
    if den == 0 || num > den {
        return invalid(format!("target {num}/{den} is not in [0, 1]"));
    }
    if bound == 0 {
        return invalid("denominator bound must be at least 1");
    }
    Ok(convergent(num as u128, den as u128, bound))
}

/// Best approximation to `α ∈ [0, 1]`, read as a multiple of `2^-64`.
pub fn best_approx(alpha: f64, bound: u64) -> Result<RationalApprox> {
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("α must lie in [0, 1], got {alpha}"));
    }
    if bound == 0 {
        return invalid("denominator bound must be at least 1");
    }
    let den = 1u128 << DYADIC_SHIFT;
    let num = (alpha * den as f64).round() as u128;
    Ok(convergent(num.min(den), den, bound))
}

fn convergent(num: u128, den: u128, bound: u64) -> RationalApprox {
    let bound128 = bound as u128;
    // (p_{k-2}, q_{k-2}), (p_{k-1}, q_{k-1})
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let (mut x, mut y) = (num, den);
    while y != 0 {
        let t = x / y;
        // next q = t·q1 + q0 must stay within the bound
        if q1 != 0 && t > (bound128 - q0) / q1 {
            break;
        }
        let (p2, q2) = (t * p1 + p0, t * q1 + q0);
        if q2 > bound128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (x, y) = (y, x - t * y);
    }
    let (a, b) = (p1, q1);
    let bn = b * num;
    let ad = a * den;
    RationalApprox {
        a: a as u64,
        b: b as u64,
        bound,
        num,
        den,
        err: bn.abs_diff(ad),
    }
}

/// `b` when `b` is prime, else 1.
pub fn b0_of(b: u64) -> u64 {
    if is_prime(b) {
        b
    } else {
        1
    }
}

/// The bound `τ^10` and the floored value actually used.
pub fn approx_bound(tau: f64) -> (f64, u64) {
    let nominal = tau.powi(10);
    let used = if nominal >= (1u64 << 62) as f64 {
        1u64 << 62
    } else {
        (nominal.floor() as u64).max(BOUND_FLOOR)
    };
    (nominal, used)
}

/// Multiplier `s` of `τ` in the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    One,
    Sqrt3,
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::One => 1.0,
            Scale::Sqrt3 => 3f64.sqrt(),
        }
    }
}

/// `u`, or `Infinite` when the approximation is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentU {
    Finite(f64),
    Infinite,
}

impl ExponentU {
    /// The value capped at `u_max`, and whether it was capped.
    pub fn clamp_to(self, u_max: f64) -> (f64, bool) {
        match self {
            ExponentU::Finite(u) if u <= u_max => (u, false),
            _ => (u_max, true),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            ExponentU::Finite(u) => u,
            ExponentU::Infinite => f64::INFINITY,
        }
    }
}

fn exponent_from_scaled(err: u128, den: u128, tau: f64, scale: Scale) -> Result<ExponentU> {
    if !(tau > 0.0) {
        return invalid(format!("τ must be positive, got {tau}"));
    }
    if err > den {
        return invalid("approximation error exceeds 1/ℓ");
    }
    if err == 0 {
        return Ok(ExponentU::Infinite);
    }
    let x = err as f64 / den as f64;
    Ok(ExponentU::Finite(-x.ln() / (scale.factor() * tau)))
}

/// `u = -log(ℓ|β - k/ℓ|) / (s τ)`.
pub fn exponent_u(beta: f64, k: u64, l: u64, tau: f64, scale: Scale) -> Result<ExponentU> {
    if l == 0 {
        return invalid("ℓ must be at least 1");
    }
    if !beta.is_finite() {
        return invalid(format!("β must be finite, got {beta}"));
    }
    if !(tau > 0.0) {
        return invalid(format!("τ must be positive, got {tau}"));
    }
    // one rounding: ℓβ - k is formed exactly before rounding
    let x = (l as f64).mul_add(beta, -(k as f64)).abs();
    if x > 1.0 {
        return invalid(format!("|β - {k}/{l}| exceeds 1/{l}"));
    }
    if x == 0.0 {
        return Ok(ExponentU::Infinite);
    }
    Ok(ExponentU::Finite(-x.ln() / (scale.factor() * tau)))
}
