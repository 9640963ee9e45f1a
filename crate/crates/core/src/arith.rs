//! Integer arithmetic: prime sieves, the Kronecker symbol, fundamental
//! discriminants and a few multiplicative functions.
//!
//! Sieve tables are flat `u32` arrays indexed by `n`. [`PrimeSieve`] keeps two
//! of them (smallest prime factor and cofactor), so it costs 8 bytes per
//! entry; desk-scale limits stay around `10^8`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest limit accepted by the sieves.
pub const MAX_SIEVE_LIMIT: u64 = 400_000_000;

/// Primes up to `limit` together with a smallest-prime-factor table.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u32,
    primes: Vec<u32>,
    spf: Vec<u32>,
    cofactor: Vec<u32>,
}

/// Linear sieve of Eratosthenes up to `limit`.
pub fn sieve_primes(limit: u64) -> Result<PrimeSieve> {
    if limit < 2 {
        return invalid(format!("prime sieve limit must be at least 2, got {limit}"));
    }
    if limit > MAX_SIEVE_LIMIT {
        return invalid(format!(
            "prime sieve limit {limit} exceeds {MAX_SIEVE_LIMIT}"
        ));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut cofactor = vec![0u32; n + 1];
    let mut primes = Vec::new();
    spf[1] = 1;
    cofactor[1] = 1;
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            cofactor[i] = 1;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
            cofactor[m] = i as u32;
        }
    }
    Ok(PrimeSieve {
        limit: limit as u32,
        primes,
        spf,
        cofactor,
    })
}

impl PrimeSieve {
    pub fn limit(&self) -> u64 {
        self.limit as u64
    }

    /// All primes up to the limit, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `p <= bound` (bound may exceed nothing beyond the limit).
    pub fn primes_up_to(&self, bound: u64) -> &[u32] {
        let end = self.primes.partition_point(|&p| (p as u64) <= bound);
        &self.primes[..end]
    }

    /// Smallest prime factor of `n` (`spf(1) = 1`).
    pub fn spf(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    pub fn spf_table(&self) -> &[u32] {
        &self.spf
    }

    /// `n / spf(n)` for every `n` in the table.
    pub fn cofactor_table(&self) -> &[u32] {
        &self.cofactor
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit as u64 && self.spf[n as usize] as u64 == n
    }

    pub(crate) fn require(&self, needed: u64) -> Result<()> {
        if needed > self.limit as u64 {
            Err(Error::SieveTooSmall {
                needed,
                have: self.limit as u64,
            })
        } else {
            Ok(())
        }
    }
}

/// Largest-prime-factor table; decides y-friability of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct SmoothnessSieve {
    lpf: Vec<u32>,
}

pub fn smoothness_sieve(limit: u64) -> Result<SmoothnessSieve> {
    if limit < 2 {
        return invalid(format!(
            "smoothness sieve limit must be at least 2, got {limit}"
        ));
    }
    if limit > MAX_SIEVE_LIMIT {
        return invalid(format!(
            "smoothness sieve limit {limit} exceeds {MAX_SIEVE_LIMIT}"
        ));
    }
    let n = limit as usize;
    let mut lpf = vec![0u32; n + 1];
    lpf[1] = 1;
    for p in 2..=n {
        if lpf[p] != 0 {
            continue;
        }
        // p is prime; larger primes visited later overwrite smaller ones.
        let mut m = p;
        while m <= n {
            lpf[m] = p as u32;
            m += p;
        }
    }
    Ok(SmoothnessSieve { lpf })
}

impl SmoothnessSieve {
    pub fn limit(&self) -> u64 {
        (self.lpf.len() - 1) as u64
    }

    /// Largest prime factor `P+(n)`, with `P+(1) = 1`.
    pub fn lpf(&self, n: u64) -> u32 {
        self.lpf[n as usize]
    }

    pub fn lpf_table(&self) -> &[u32] {
        &self.lpf
    }

    /// `n` is `y`-friable iff `P+(n) <= y`.
    pub fn is_friable(&self, n: u64, y: f64) -> bool {
        self.lpf[n as usize] as f64 <= y
    }

    pub(crate) fn require(&self, needed: u64) -> Result<()> {
        if needed > self.limit() {
            Err(Error::SieveTooSmall {
                needed,
                have: self.limit(),
            })
        } else {
            Ok(())
        }
    }
}

/// Kronecker symbol `(a/n)`.
///
/// Total on `i64 x i64`; `(a/0)` is 1 for `a = ±1` and 0 otherwise, and
/// `(a/-1)` is the sign of `a`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut k: i8 = 1;
    let mut b = n.unsigned_abs();
    if n < 0 && a < 0 {
        k = -k;
    }
    let v = b.trailing_zeros();
    b >>= v;
    if v % 2 == 1 {
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            k = -k;
        }
    }
    // b is odd and positive: Jacobi symbol of (a mod b / b).
    let mut a = a.rem_euclid(b as i64) as u64;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && (b & 7 == 3 || b & 7 == 5) {
            k = -k;
        }
        if a % 4 == 3 && b % 4 == 3 {
            k = -k;
        }
        let r = b % a;
        b = a;
        a = r;
    }
    if b == 1 {
        k
    } else {
        0
    }
}

fn is_squarefree(mut n: u64) -> bool {
    if n.is_multiple_of(4) {
        return false;
    }
    if n.is_multiple_of(2) {
        n /= 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// Whether `d` is a fundamental discriminant. `d = 1` is excluded.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Parity of the real character attached to a discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::Format(format!("unknown parity {other:?}"))),
        }
    }
}

/// A validated fundamental discriminant `d`, indexing the real primitive
/// character `χ_d = (d/·)` of modulus `|d|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if is_fundamental(d) {
            Ok(Self(d))
        } else {
            invalid(format!("{d} is not a fundamental discriminant"))
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }

    /// The modulus `|d|`.
    pub fn modulus(self) -> u64 {
        self.0.unsigned_abs()
    }

    /// `χ_d(-1) = sign(d)`.
    pub fn parity(self) -> Parity {
        if self.0 < 0 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// `χ_d(n)`.
    pub fn chi(self, n: i64) -> i8 {
        kronecker(self.0, n)
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All fundamental discriminants with `1 < |d| <= x`, ordered by `|d|`,
/// negative first at equal `|d|`.
pub fn enumerate_fundamental(x: u64) -> Result<Vec<FundamentalDiscriminant>> {
    if x < 3 {
        return invalid(format!("enumeration bound must be at least 3, got {x}"));
    }
    if x > MAX_SIEVE_LIMIT {
        return invalid(format!("enumeration bound {x} exceeds {MAX_SIEVE_LIMIT}"));
    }
    let n = x as usize;
    let mut squarefree = vec![true; n + 1];
    let mut k = 2usize;
    while k * k <= n {
        let sq = k * k;
        if squarefree[sq] {
            let mut m = sq;
            while m <= n {
                squarefree[m] = false;
                m += sq;
            }
        }
        k += 1;
    }
    let fundamental = |d: i64, a: usize| -> bool {
        match d.rem_euclid(4) {
            1 => squarefree[a],
            0 => matches!((d / 4).rem_euclid(4), 2 | 3) && squarefree[a / 4],
            _ => false,
        }
    };
    let mut out = Vec::with_capacity((0.61 * x as f64) as usize + 8);
    for a in 3..=n {
        for d in [-(a as i64), a as i64] {
            if fundamental(d, a) {
                out.push(FundamentalDiscriminant(d));
            }
        }
    }
    Ok(out)
}

/// Distinct prime factors of `n >= 1`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == [n]
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi needs n >= 1");
    prime_factors(n).iter().fold(n, |acc, &p| acc / p * (p - 1))
}

pub fn moebius(n: u64) -> i8 {
    assert!(n >= 1, "moebius needs n >= 1");
    let ps = prime_factors(n);
    let rad: u64 = ps.iter().product();
    if rad != n {
        0
    } else if ps.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    assert!(n >= 1, "omega needs n >= 1");
    prime_factors(n).len() as u32
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_criterion(d: i64, p: i64) -> i8 {
        let a = d.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        let mut r = 1i64;
        let mut base = a;
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        if r == 1 {
            1
        } else {
            assert_eq!(r, p - 1);
            -1
        }
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        assert!(matches!(sieve_primes(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn prime_count_million() {
        let s = sieve_primes(1_000_000).unwrap();
        // trial division count, independent of the sieve
        let count = (2..=1_000_000u64)
            .filter(|&n| {
                let mut p = 2;
                while p * p <= n {
                    if n % p == 0 {
                        return false;
                    }
                    p += 1;
                }
                true
            })
            .count();
        assert_eq!(count, 78498);
        assert_eq!(s.primes().len(), count);
    }

    #[test]
    fn spf_invariants() {
        let s = sieve_primes(5000).unwrap();
        for n in 2..=5000u64 {
            let p = s.spf(n) as u64;
            assert_eq!(n % p, 0);
            assert!((2..p).all(|q| n % q != 0));
            assert_eq!(s.cofactor_table()[n as usize] as u64 * p, n);
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-3, 2), -1);
        for d in -50..50 {
            assert_eq!(kronecker(d, 1), 1);
        }
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(-7, -1), -1);
        assert_eq!(kronecker(8, -1), 1);
    }

    #[test]
    fn kronecker_matches_euler_criterion() {
        let s = sieve_primes(300).unwrap();
        for &p in &s.primes()[1..] {
            for d in -300i64..=300 {
                assert_eq!(
                    kronecker(d, p as i64),
                    euler_criterion(d, p as i64),
                    "({d}/{p})"
                );
            }
        }
    }

    #[test]
    fn fundamental_examples() {
        assert!(is_fundamental(12));
        assert!(!is_fundamental(9));
        assert!(is_fundamental(-4));
        assert!(!is_fundamental(1));
        assert!(!is_fundamental(-1));
        assert!(!is_fundamental(0));
        assert!(!is_fundamental(4));
    }

    #[test]
    fn enumerate_small() {
        let got: Vec<i64> = enumerate_fundamental(8)
            .unwrap()
            .iter()
            .map(|d| d.get())
            .collect();
        assert_eq!(got, vec![-3, -4, 5, -7, -8, 8]);
        let got: Vec<i64> = enumerate_fundamental(3)
            .unwrap()
            .iter()
            .map(|d| d.get())
            .collect();
        assert_eq!(got, vec![-3]);
        assert!(enumerate_fundamental(2).is_err());
    }

    #[test]
    fn enumerate_matches_definition() {
        let x = 100_000i64;
        let got: Vec<i64> = enumerate_fundamental(x as u64)
            .unwrap()
            .iter()
            .map(|d| d.get())
            .collect();
        let oracle: Vec<i64> = (3..=x)
            .flat_map(|a| [-a, a])
            .filter(|&d| is_fundamental(d))
            .collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn parity_flag() {
        assert_eq!(
            FundamentalDiscriminant::new(-3).unwrap().parity(),
            Parity::Odd
        );
        assert_eq!(
            FundamentalDiscriminant::new(5).unwrap().parity(),
            Parity::Even
        );
        assert!(FundamentalDiscriminant::new(9).is_err());
    }

    #[test]
    fn lpf_examples() {
        let s = smoothness_sieve(10_000).unwrap();
        assert_eq!(s.lpf(12), 3);
        assert_eq!(s.lpf(97), 97);
        assert_eq!(s.lpf(1), 1);
        let oracle = (1..=10_000u64)
            .filter(|&n| prime_factors(n).last().is_none_or(|&p| p <= 10))
            .count();
        let got = (1..=10_000u64).filter(|&n| s.is_friable(n, 10.0)).count();
        assert_eq!(got, oracle);
    }

    #[test]
    fn multiplicative_helpers() {
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(moebius(30), -1);
        assert_eq!(moebius(12), 0);
        assert_eq!(moebius(1), 1);
        assert_eq!(omega(12), 2);
        assert_eq!(omega(1), 0);
    }
}
