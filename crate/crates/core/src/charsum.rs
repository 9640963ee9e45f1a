//! Batch evaluation of `χ_d` and the large character sum `M(χ_d)`.
//!
//! Values are produced by sieving: `χ_d(n) = χ_d(spf(n)) · χ_d(n / spf(n))`,
//! with the Kronecker symbol evaluated only at primes. Partial sums obey the
//! reflection `S(q-1-t) = -χ_d(-1) S(t)`, so only `t <= (q-1)/2` is scanned.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{kronecker, sieve_primes, FundamentalDiscriminant, Parity, PrimeSieve};
use crate::consts::EXP_GAMMA;
use crate::error::{invalid, Result};

/// `χ_d(n)` for `0 <= n <= limit`; index 0 holds `χ_d(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterValues {
    d: FundamentalDiscriminant,
    values: Vec<i8>,
}

impl CharacterValues {
    pub fn discriminant(&self) -> FundamentalDiscriminant {
        self.d
    }

    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> i8 {
        self.values[n as usize]
    }

    /// Values indexed by `n`, starting at `n = 0`.
    pub fn as_slice(&self) -> &[i8] {
        &self.values
    }
}

/// Fills `buf[0..=limit]` with `χ_d(n)`.
///
/// `buf` is reused across calls by the batch scanner.
pub fn fill_char_values(
    d: FundamentalDiscriminant,
    limit: u64,
    sieve: &PrimeSieve,
    buf: &mut Vec<i8>,
) -> Result<()> {
    sieve.require(limit)?;
    let n = limit as usize;
    buf.clear();
    buf.resize(n + 1, 0);
    if n >= 1 {
        buf[1] = 1;
    }
    let spf = sieve.spf_table();
    let cof = sieve.cofactor_table();
    let dv = d.get();
    for i in 2..=n {
        let c = cof[i] as usize;
        buf[i] = if c == 1 {
            kronecker(dv, i as i64)
        } else {
            buf[spf[i] as usize] * buf[c]
        };
    }
    Ok(())
}

pub fn char_values(
    d: FundamentalDiscriminant,
    limit: u64,
    sieve: &PrimeSieve,
) -> Result<CharacterValues> {
    let mut values = Vec::new();
    fill_char_values(d, limit, sieve, &mut values)?;
    Ok(CharacterValues { d, values })
}

/// `M(χ_d)`, its least attaining cutoff `N`, and `m(χ_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharSumProfile {
    pub d: i64,
    pub parity: Parity,
    /// `max_{1 <= t < |d|} |S(t)|`.
    pub max_sum: u64,
    /// Smallest `t` with `|S(t)| = max_sum`.
    pub argmax: u64,
    /// `max_sum · π / (e^γ √|d|)`.
    pub normalized: f64,
}

/// `M · π / (e^γ √q)`.
pub fn normalize(max_sum: u64, modulus: u64) -> f64 {
    max_sum as f64 * PI / (EXP_GAMMA * (modulus as f64).sqrt())
}

/// Half-range length `⌊(q-1)/2⌋` scanned for the maximum.
pub fn half_range(modulus: u64) -> u64 {
    (modulus - 1) / 2
}

/// Scans `S(t)` for `1 <= t <= (q-1)/2` using a caller-owned buffer.
pub fn profile_with(
    d: FundamentalDiscriminant,
    sieve: &PrimeSieve,
    buf: &mut Vec<i8>,
) -> Result<CharSumProfile> {
    let q = d.modulus();
    let h = half_range(q).max(1);
    fill_char_values(d, h, sieve, buf)?;
    let mut s: i64 = 0;
    let mut best: i64 = 0;
    let mut arg: u64 = 1;
    for (t, &v) in buf.iter().enumerate().skip(1) {
        s += v as i64;
        let a = s.abs();
        if a > best {
            best = a;
            arg = t as u64;
        }
    }
    Ok(CharSumProfile {
        d: d.get(),
        parity: d.parity(),
        max_sum: best as u64,
        argmax: arg,
        normalized: normalize(best as u64, q),
    })
}

fn own_sieve(limit: u64) -> PrimeSieve {
    sieve_primes(limit.max(2)).expect("limit within range")
}

/// `(M(χ_d), N_{χ_d})`.
pub fn max_partial_sum(d: FundamentalDiscriminant) -> (u64, u64) {
    let sieve = own_sieve(half_range(d.modulus()));
    let p = profile_with(d, &sieve, &mut Vec::new()).expect("sieve sized for d");
    (p.max_sum, p.argmax)
}

/// `m(χ_d) = M(χ_d) π / (e^γ √|d|)`.
pub fn normalized_m(d: FundamentalDiscriminant) -> f64 {
    normalize(max_partial_sum(d).0, d.modulus())
}

/// Exact partial sums `S(t)` of `χ_d` for every integer `t >= 0`.
#[derive(Debug, Clone)]
pub struct PartialSums {
    d: FundamentalDiscriminant,
    prefix: Vec<i64>,
}

impl PartialSums {
    pub fn new(d: FundamentalDiscriminant, sieve: &PrimeSieve) -> Result<Self> {
        let mut buf = Vec::new();
        let h = half_range(d.modulus()).max(1);
        fill_char_values(d, h, sieve, &mut buf)?;
        let mut prefix = Vec::with_capacity(buf.len());
        let mut s = 0i64;
        for &v in &buf {
            s += v as i64;
            prefix.push(s);
        }
        Ok(Self { d, prefix })
    }

    pub fn discriminant(&self) -> FundamentalDiscriminant {
        self.d
    }

    /// `S(t) = Σ_{n <= t} χ_d(n)`.
    pub fn at(&self, t: u64) -> i64 {
        let q = self.d.modulus();
        let t = t % q;
        let h = (self.prefix.len() - 1) as u64;
        if t <= h {
            return self.prefix[t as usize];
        }
        if t == q - 1 {
            return 0;
        }
        let mirrored = self.prefix[(q - 1 - t) as usize];
        match self.d.parity() {
            Parity::Odd => mirrored,
            Parity::Even => -mirrored,
        }
    }
}

/// `Σ_{n <= ⌊β|d|⌋} χ_d(n)` for `β ∈ [0, 1]`.
pub fn partial_sum_at(d: FundamentalDiscriminant, beta: f64) -> Result<i64> {
    if !(0.0..=1.0).contains(&beta) {
        return invalid(format!("β must lie in [0, 1], got {beta}"));
    }
    let t = (beta * d.modulus() as f64).floor() as u64;
    let sieve = own_sieve(half_range(d.modulus()));
    Ok(PartialSums::new(d, &sieve)?.at(t))
}
