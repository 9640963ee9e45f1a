//! Pretentious distance, primitive characters of small conductor, the
//! nearest primitive character to `χ_d`, and truncated Euler products.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{
    euler_phi, gcd, prime_factors, FundamentalDiscriminant, Parity, PrimeSieve, SmoothnessSieve,
};
use crate::consts::EXP_GAMMA;
use crate::error::{invalid, Result};
use crate::polya::{exp_sum, Character, ExpSumSpec, Restriction};

/// Largest conductor for which character tables are built.
pub const MAX_CONDUCTOR: u32 = 100;

/// A primitive Dirichlet character; values are `e(angle[n] / order)` on units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveCharacter {
    conductor: u32,
    order: u32,
    parity: Parity,
    /// Angle numerators indexed by `n mod conductor`; `None` off the units.
    angle: Vec<Option<u32>>,
}

impl PrimitiveCharacter {
    /// The character `n ↦ 1` of conductor 1.
    pub fn trivial() -> Self {
        Self {
            conductor: 1,
            order: 1,
            parity: Parity::Even,
            angle: vec![Some(0)],
        }
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Exact angle numerator over [`order`](Self::order), `None` when `gcd(n, D) > 1`.
    pub fn angle(&self, n: u64) -> Option<u32> {
        self.angle[(n % self.conductor as u64) as usize]
    }

    pub fn value(&self, n: u64) -> Complex64 {
        match self.angle(n) {
            None => Complex64::new(0.0, 0.0),
            Some(a) => Complex64::from_polar(1.0, 2.0 * PI * a as f64 / self.order as f64),
        }
    }

    /// `Re ψ(n)`.
    pub fn real_value(&self, n: u64) -> f64 {
        match self.angle(n) {
            None => 0.0,
            Some(a) => {
                // exact at the rational angles that give 0 and ±1
                let (a, o) = (a as u64 * 4, self.order as u64);
                if a % o == 0 {
                    [1.0, 0.0, -1.0, 0.0][(a / o % 4) as usize]
                } else {
                    (2.0 * PI * (a as f64 / 4.0) / o as f64).cos()
                }
            }
        }
    }
}

/// Local characters at one prime power: each is a list of angles over `den`.
struct LocalGroup {
    modulus: u32,
    /// `(residue, exponent vector)` for every unit residue.
    logs: Vec<(u32, Vec<u32>)>,
    /// Orders of the cyclic generators.
    gen_orders: Vec<u32>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root(p: u64, e: u32) -> u64 {
    let q = p.pow(e);
    let phi = euler_phi(q);
    let factors = prime_factors(phi);
    (2..q)
        .find(|&g| gcd(g, q) == 1 && factors.iter().all(|&f| pow_mod(g, phi / f, q) != 1))
        .expect("odd prime powers have primitive roots")
}

fn local_group(p: u64, e: u32) -> LocalGroup {
    let q = p.pow(e);
    let mut logs = Vec::new();
    let gen_orders;
    if p == 2 {
        if e == 1 {
            gen_orders = vec![];
            logs.push((1, vec![]));
        } else if e == 2 {
            gen_orders = vec![2];
            logs.push((1, vec![0]));
            logs.push((3, vec![1]));
        } else {
            let k = 1u32 << (e - 2);
            gen_orders = vec![2, k];
            for s in 0..2u32 {
                let mut v = if s == 0 { 1 } else { q - 1 };
                for j in 0..k {
                    logs.push((v as u32, vec![s, j]));
                    v = v * 5 % q;
                }
            }
        }
    } else {
        let g = primitive_root(p, e);
        let phi = euler_phi(q) as u32;
        gen_orders = vec![phi];
        let mut v = 1u64;
        for j in 0..phi {
            logs.push((v as u32, vec![j]));
            v = v * g % q;
        }
    }
    logs.sort_unstable();
    LocalGroup {
        modulus: q as u32,
        logs,
        gen_orders,
    }
}

/// Index vectors of the primitive characters of one prime power.
fn primitive_indices(p: u64, e: u32, group: &LocalGroup) -> Vec<Vec<u32>> {
    match (p, e) {
        (2, 1) => vec![],
        (2, 2) => vec![vec![1]],
        (2, _) => {
            let k = group.gen_orders[1];
            (0..2)
                .flat_map(|s| (0..k).filter(|j| j % 2 == 1).map(move |j| vec![s, j]))
                .collect()
        }
        (_, 1) => (1..group.gen_orders[0]).map(|j| vec![j]).collect(),
        _ => (0..group.gen_orders[0])
            .filter(|j| !(*j as u64).is_multiple_of(p))
            .map(|j| vec![j])
            .collect(),
    }
}

/// Primitive characters of conductor exactly `conductor`.
fn primitive_of_conductor(conductor: u32) -> Vec<PrimitiveCharacter> {
    if conductor == 1 {
        return vec![PrimitiveCharacter::trivial()];
    }
    let dn = conductor as u64;
    let mut pe: Vec<(u64, u32)> = Vec::new();
    for p in prime_factors(dn) {
        let mut e = 0;
        let mut t = dn;
        while t.is_multiple_of(p) {
            t /= p;
            e += 1;
        }
        pe.push((p, e));
    }
    let groups: Vec<LocalGroup> = pe.iter().map(|&(p, e)| local_group(p, e)).collect();
    let choices: Vec<Vec<Vec<u32>>> = pe
        .iter()
        .zip(&groups)
        .map(|(&(p, e), g)| primitive_indices(p, e, g))
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return vec![];
    }
    let phi = euler_phi(dn);
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        // angle of residue n over φ(D), summed across components
        let mut angle = vec![None; conductor as usize];
        for (n, slot) in angle.iter_mut().enumerate() {
            if gcd(n as u64, dn) != 1 {
                continue;
            }
            let mut total = 0u64;
            for (c, g) in groups.iter().enumerate() {
                let r = n as u32 % g.modulus;
                let pos = g
                    .logs
                    .binary_search_by_key(&r, |(res, _)| *res)
                    .expect("unit residue");
                let exps = &g.logs[pos].1;
                let chosen = &choices[c][idx[c]];
                for ((&x, &j), &ord) in exps.iter().zip(chosen).zip(&g.gen_orders) {
                    total += (x as u64 * j as u64 % ord as u64) * (phi / ord as u64);
                }
            }
            *slot = Some(total % phi);
        }
        let g = angle.iter().flatten().fold(phi, |acc, &a| gcd(acc, a));
        let order = (phi / g) as u32;
        let angle: Vec<Option<u32>> = angle
            .into_iter()
            .map(|a| a.map(|a| (a / g) as u32))
            .collect();
        let at_minus_one = angle[conductor as usize - 1].expect("-1 is a unit");
        let parity = if at_minus_one == 0 {
            Parity::Even
        } else {
            Parity::Odd
        };
        out.push(PrimitiveCharacter {
            conductor,
            order,
            parity,
            angle,
        });
        // next index tuple, last component fastest
        let mut c = choices.len();
        loop {
            if c == 0 {
                return out;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < choices[c].len() {
                break;
            }
            idx[c] = 0;
        }
    }
}

/// Number of primitive characters mod `n`.
pub fn primitive_count(n: u64) -> u64 {
    let mut count = 1;
    let mut t = n;
    for p in prime_factors(n) {
        let mut e = 0;
        while t.is_multiple_of(p) {
            t /= p;
            e += 1;
        }
        count *= match (p, e) {
            (2, 1) => 0,
            (2, 2) => 1,
            (2, _) => 1 << (e - 2),
            (_, 1) => p - 2,
            _ => p.pow(e - 2) * (p - 1) * (p - 1),
        };
    }
    count
}

/// Every primitive character of conductor `<= d_max`, conductor 1 included,
/// ordered by conductor.
pub fn primitive_characters(d_max: u32) -> Result<Vec<PrimitiveCharacter>> {
    if !(2..=MAX_CONDUCTOR).contains(&d_max) {
        return invalid(format!(
            "D_max must lie in [2, {MAX_CONDUCTOR}], got {d_max}"
        ));
    }
    Ok((1..=d_max).flat_map(primitive_of_conductor).collect())
}

/// Default conductor bound `max(10, ⌈log y⌉)`, capped at [`MAX_CONDUCTOR`].
pub fn default_dmax(y: f64) -> u32 {
    (y.ln().ceil().max(10.0) as u32).min(MAX_CONDUCTOR)
}

/// `Σ_{p <= y} (1 - Re f(p) conj(g(p))) / p`.
pub fn distance_sq<F, G>(f: F, g: G, y: f64, sieve: &PrimeSieve) -> Result<f64>
where
    F: Fn(u64) -> Complex64,
    G: Fn(u64) -> Complex64,
{
    if y < 2.0 {
        return Ok(0.0);
    }
    let bound = y.floor() as u64;
    sieve.require(bound)?;
    Ok(sieve
        .primes_up_to(bound)
        .iter()
        .map(|&p| {
            let p = p as u64;
            (1.0 - (f(p) * g(p).conj()).re) / p as f64
        })
        .sum())
}

/// The primitive character nearest to `χ_d` in pretentious distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PretenseResult {
    pub xi: PrimitiveCharacter,
    /// Position of `xi` in the searched list.
    pub index: usize,
    pub distance_sq: f64,
}

impl PretenseResult {
    pub fn conductor(&self) -> u32 {
        self.xi.conductor
    }
}

/// Minimizes `𝔻(χ_d, ψ; y)²` over `chars`; ties keep the earlier entry.
pub fn nearest_in(
    d: FundamentalDiscriminant,
    y: f64,
    chars: &[PrimitiveCharacter],
    sieve: &PrimeSieve,
) -> Result<PretenseResult> {
    if chars.is_empty() {
        return invalid("empty character list");
    }
    let primes: &[u32] = if y >= 2.0 {
        let bound = y.floor() as u64;
        sieve.require(bound)?;
        sieve.primes_up_to(bound)
    } else {
        &[]
    };
    let chi: Vec<f64> = primes.iter().map(|&p| d.chi(p as i64) as f64).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, psi) in chars.iter().enumerate() {
        let dist: f64 = primes
            .iter()
            .zip(&chi)
            .map(|(&p, &c)| (1.0 - c * psi.real_value(p as u64)) / p as f64)
            .sum();
        if best.is_none_or(|(_, b)| dist < b) {
            best = Some((i, dist));
        }
    }
    let (index, distance_sq) = best.expect("nonempty");
    Ok(PretenseResult {
        xi: chars[index].clone(),
        index,
        distance_sq,
    })
}

/// [`nearest_in`] over all primitive characters of conductor `<= d_max`.
pub fn nearest_primitive(
    d: FundamentalDiscriminant,
    y: f64,
    d_max: u32,
    sieve: &PrimeSieve,
) -> Result<PretenseResult> {
    if d_max < 3 {
        return invalid(format!("D_max must be at least 3, got {d_max}"));
    }
    nearest_in(d, y, &primitive_characters(d_max)?, sieve)
}

/// `L_k(1, χ_d; y) = Π_{p <= y, p ∤ k} (1 - χ_d(p)/p)^{-1}`.
pub fn truncated_l(d: FundamentalDiscriminant, y: f64, k: u64, sieve: &PrimeSieve) -> Result<f64> {
    truncated_l_twisted(d, None, y, k, sieve)
}

/// As [`truncated_l`] for `χ_d · χ_t` when `twist = Some(t)`.
pub fn truncated_l_twisted(
    d: FundamentalDiscriminant,
    twist: Option<FundamentalDiscriminant>,
    y: f64,
    k: u64,
    sieve: &PrimeSieve,
) -> Result<f64> {
    if k == 0 {
        return invalid("k must be positive");
    }
    if y < 2.0 {
        return Ok(1.0);
    }
    let bound = y.floor() as u64;
    sieve.require(bound)?;
    Ok(sieve
        .primes_up_to(bound)
        .iter()
        .filter(|&&p| !k.is_multiple_of(p as u64))
        .map(|&p| {
            let c = d.chi(p as i64) * twist.map_or(1, |t| t.chi(p as i64));
            1.0 / (1.0 - c as f64 / p as f64)
        })
        .product())
}

/// Measured sides of the bounds relating friable sums to distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretenseCheck {
    pub d: i64,
    pub y: f64,
    pub z: f64,
    /// `|Σ_{n <= z, n ∈ S(y)} χ_d(n)/n|`.
    pub friable_sum: f64,
    /// `log y · exp(-𝔻(χ_d, 1; y)²/2)`.
    pub distance_bound: f64,
    pub distance_ratio: f64,
    /// The same ratio for the trivial character.
    pub trivial_ratio: f64,
    pub coprime: Vec<CoprimeCheck>,
    pub rational: Vec<RationalCheck>,
}

/// Coprime sum against its product form for one modulus `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoprimeCheck {
    pub a: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(a/φ(a)) Σ_{p | a} log p / p`.
    pub error_bound: f64,
    /// `|lhs - rhs| <= 10 · error_bound`.
    pub within_envelope: bool,
}

/// Friable exponential sum at `1/b` against the bound for its case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalCheck {
    pub b: u64,
    /// `D ∤ b` or `χ_d conj(ξ)` even.
    pub generic_case: bool,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `(Σ_{n <= z, (n,a)=1} f(n)/n, Π_{p|a}(1 - f(p)/p) Σ_{n <= z} f(n)/n, error bound)`
/// for `f = χ_d`.
pub fn coprime_identity(d: FundamentalDiscriminant, a: u64, z: f64) -> Result<CoprimeCheck> {
    if a == 0 || !(z >= 1.0) {
        return invalid("need a >= 1 and z >= 1");
    }
    let zn = z.floor() as u64;
    let primes = prime_factors(a);
    let mut full = 0.0;
    let mut coprime = 0.0;
    for n in 1..=zn {
        let v = d.chi(n as i64) as f64 / n as f64;
        full += v;
        if primes.iter().all(|&p| n % p != 0) {
            coprime += v;
        }
    }
    let product: f64 = primes
        .iter()
        .map(|&p| 1.0 - d.chi(p as i64) as f64 / p as f64)
        .product();
    let rhs = product * full;
    let error_bound = a as f64 / euler_phi(a) as f64
        * primes
            .iter()
            .map(|&p| (p as f64).ln() / p as f64)
            .sum::<f64>();
    Ok(CoprimeCheck {
        a,
        lhs: coprime,
        rhs,
        error_bound,
        within_envelope: (coprime - rhs).abs() <= 10.0 * error_bound,
    })
}

/// Both sides of the distance bound, the coprime identity for each `a` in
/// `moduli`, and the rational-phase bounds for `b = 1..=6` coprime to `d`.
pub fn pretense_bound_check(
    d: FundamentalDiscriminant,
    y: f64,
    z: f64,
    moduli: &[u64],
    d_max: u32,
    sieve: &PrimeSieve,
    lpf: &SmoothnessSieve,
) -> Result<PretenseCheck> {
    let friable = |ch: Character, alpha: f64| -> Result<Complex64> {
        exp_sum(
            &ExpSumSpec::new(ch, z, y, Restriction::Friable)?,
            alpha,
            lpf,
        )
    };
    let log_y = y.ln();
    let friable_sum = friable(Character::Quadratic(d), 0.0)?.norm();
    let one = |_: u64| Complex64::new(1.0, 0.0);
    let chi = |p: u64| Complex64::new(d.chi(p as i64) as f64, 0.0);
    let dist = distance_sq(chi, one, y, sieve)?;
    let distance_bound = log_y * (-dist / 2.0).exp();
    let trivial_ratio = friable(Character::Trivial, 0.0)?.norm() / log_y;

    let coprime = moduli
        .iter()
        .map(|&a| coprime_identity(d, a, z))
        .collect::<Result<Vec<_>>>()?;

    let xi = nearest_primitive(d, y, d_max, sieve)?;
    let big_d = xi.conductor() as u64;
    let odd_twist = xi.xi.parity() != d.parity();
    let sign = match d.parity() {
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    let mut rational = Vec::new();
    for b in (1..=6u64).filter(|&b| gcd(b, d.modulus()) == 1) {
        let alpha = if b == 1 { 0.0 } else { 1.0 / b as f64 };
        // Σ over 1 <= |n| <= z folds to S(α) - χ(-1) S(-α)
        let plus = friable(Character::Quadratic(d), alpha)?;
        let minus = friable(Character::Quadratic(d), -alpha)?;
        let sum = (plus - minus * sign).norm();
        let generic_case = b % big_d != 0 || !odd_twist;
        let small = log_y.powf(0.86);
        let bound = if generic_case {
            small
        } else {
            let omega = crate::arith::omega(b / big_d) as i32;
            let first = 2.0 * EXP_GAMMA / (big_d as f64).sqrt() * (2.0f64 / 3.0).powi(omega);
            let second = (-xi.distance_sq / 2.0).exp();
            log_y * first.min(second) + small
        };
        rational.push(RationalCheck {
            b,
            generic_case,
            sum,
            bound,
            ratio: sum / bound,
        });
    }
    Ok(PretenseCheck {
        d: d.get(),
        y,
        z,
        friable_sum,
        distance_bound,
        distance_ratio: friable_sum / distance_bound,
        trivial_ratio,
        coprime,
        rational,
    })
}
