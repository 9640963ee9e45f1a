//! Gauss sums, the truncated Fourier expansion of partial character sums, and
//! the friable / non-friable exponential sums behind the structured set.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, kronecker, FundamentalDiscriminant, Parity, SmoothnessSieve};
use crate::charsum::normalized_m;
use crate::error::{invalid, Error, Result};

/// Default number of grid points for the phase maximisation.
pub const DEFAULT_GRID: usize = 1 << 16;
/// Largest grid the certified maximiser will allocate.
pub const MAX_GRID: usize = 1 << 24;
/// Slack required when the maximum is compared against the threshold 1.
pub const MEMBERSHIP_SLACK: f64 = 0.05;

/// Fractional part of `n·α` computed with an error-free product, so the
/// phase stays accurate to about `1e-16` even when `n·α` is large.
pub fn phase(n: f64, alpha: f64) -> f64 {
    let p = n * alpha;
    let err = n.mul_add(alpha, -p);
    let f = p - p.floor() + err;
    f - f.floor()
}

/// `e(x) = exp(2πix)` after reducing `x` to `[0, 1)`.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.floor();
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// `e(num/den)` with exact integer range reduction.
pub fn e_ratio(num: i64, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i64) as f64 / den as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// `G(χ_d) = Σ_{n <= |d|} χ_d(n) e(n/|d|)` by direct summation.
pub fn gauss_sum(d: FundamentalDiscriminant) -> Complex64 {
    let q = d.modulus();
    (1..=q)
        .filter_map(|n| {
            let c = kronecker(d.get(), n as i64);
            (c != 0).then(|| e_ratio(n as i64, q) * c as f64)
        })
        .sum()
}

/// Closed form `√d` (d > 0) or `i√|d|` (d < 0).
pub fn gauss_closed_form(d: FundamentalDiscriminant) -> Complex64 {
    let r = (d.modulus() as f64).sqrt();
    match d.parity() {
        Parity::Even => Complex64::new(r, 0.0),
        Parity::Odd => Complex64::new(0.0, r),
    }
}

/// Reseed interval for the rotation recurrence `e((n+1)α) = e(nα)·e(α)`.
const RESEED: u64 = 256;

/// `G(χ_d)/(2πi) · Σ_{1 <= |n| <= z} χ_d(n) (1 - e(-nα)) / n`.
///
/// Terms `n` and `-n` are paired: with `ε = χ_d(-1)` the pair contributes
/// `χ_d(n)/n · [(1 - e(-nα)) - ε(1 - e(nα))]`, which is `2(1 - cos 2πnα)`
/// for `ε = -1` and `2i sin 2πnα` for `ε = 1`. The Gauss sum is taken from
/// its closed form.
pub fn polya_rhs(d: FundamentalDiscriminant, alpha: f64, z: f64) -> Result<Complex64> {
    if !(z >= 1.0) {
        return invalid(format!("truncation length z must be at least 1, got {z}"));
    }
    let q = d.modulus() as usize;
    let period: Vec<f64> = (0..q)
        .map(|n| kronecker(d.get(), n as i64) as f64)
        .collect();
    let odd = d.parity() == Parity::Odd;
    let zn = z.floor() as u64;
    let term = |w: Complex64, c: f64, n: u64| c * if odd { 1.0 - w.re } else { w.im } / n as f64;
    // four interleaved rotations e(nα), reseeded at the start of every block
    let step4 = e(phase(4.0, alpha));
    let mut acc = 0.0f64;
    let mut r = 0usize;
    let mut n = 1u64;
    while n <= zn {
        let end = (n + RESEED - 1).min(zn);
        let mut w = [0u64, 1, 2, 3].map(|j| e(phase((n + j) as f64, alpha)));
        while n + 3 <= end {
            for (j, wj) in w.iter_mut().enumerate() {
                r += 1;
                if r == q {
                    r = 0;
                }
                acc += term(*wj, period[r], n + j as u64);
                *wj *= step4;
            }
            n += 4;
        }
        for (j, &wj) in w.iter().enumerate().take((end + 1 - n) as usize) {
            r += 1;
            if r == q {
                r = 0;
            }
            acc += term(wj, period[r], n + j as u64);
        }
        n = end + 1;
    }
    let pair_sum = if odd {
        Complex64::new(2.0 * acc, 0.0)
    } else {
        Complex64::new(0.0, 2.0 * acc)
    };
    Ok(gauss_closed_form(d) / Complex64::new(0.0, 2.0 * PI) * pair_sum)
}

/// Which character is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Character {
    Quadratic(FundamentalDiscriminant),
    /// The trivial character `n ↦ 1`.
    Trivial,
}

impl Character {
    pub fn value(self, n: u64) -> i8 {
        match self {
            Character::Quadratic(d) => kronecker(d.get(), n as i64),
            Character::Trivial => 1,
        }
    }
}

/// Which `n` enter an exponential sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    All,
    Friable,
    NonFriable,
}

/// Parameters of `Σ_{n <= z} χ(n) e(nα) / n` over a restricted range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSumSpec {
    pub character: Character,
    pub z: f64,
    pub y: f64,
    pub restriction: Restriction,
    pub coprime_to: u64,
}

impl ExpSumSpec {
    pub fn new(character: Character, z: f64, y: f64, restriction: Restriction) -> Result<Self> {
        let spec = Self {
            character,
            z,
            y,
            restriction,
            coprime_to: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn coprime_to(mut self, k: u64) -> Result<Self> {
        self.coprime_to = k;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.z >= 1.0) {
            return invalid(format!("z must be at least 1, got {}", self.z));
        }
        if !(self.y >= 2.0) {
            return invalid(format!("y must be at least 2, got {}", self.y));
        }
        if self.coprime_to == 0 {
            return invalid("coprime_to must be positive");
        }
        Ok(())
    }

    fn admits(&self, n: u64, lpf: &SmoothnessSieve) -> bool {
        let friable = lpf.is_friable(n, self.y);
        let keep = match self.restriction {
            Restriction::All => true,
            Restriction::Friable => friable,
            Restriction::NonFriable => !friable,
        };
        keep && (self.coprime_to == 1 || gcd(n, self.coprime_to) == 1)
    }
}

/// `Σ_{n <= z, restricted} χ(n) e(nα) / n`.
pub fn exp_sum(spec: &ExpSumSpec, alpha: f64, lpf: &SmoothnessSieve) -> Result<Complex64> {
    let zn = spec.z.floor() as u64;
    lpf.require(zn)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..=zn {
        if !spec.admits(n, lpf) {
            continue;
        }
        let c = spec.character.value(n);
        if c != 0 {
            acc += e(phase(n as f64, alpha)) * (c as f64 / n as f64);
        }
    }
    Ok(acc)
}

/// The non-friable part `Σ_{n <= z, P+(n) > y} χ_d(n) e(nα) / n` held as a
/// sparse coefficient list.
#[derive(Debug, Clone)]
pub struct NonFriableSum {
    terms: Vec<(u64, f64)>,
}

impl NonFriableSum {
    pub fn new(d: FundamentalDiscriminant, y: f64, z: f64, lpf: &SmoothnessSieve) -> Result<Self> {
        if !(y >= 2.0) {
            return invalid(format!("y must be at least 2, got {y}"));
        }
        if !(z >= 1.0) {
            return invalid(format!("z must be at least 1, got {z}"));
        }
        let zn = z.floor() as u64;
        lpf.require(zn)?;
        let first = (y.floor() as u64).saturating_add(1);
        let terms = (first..=zn)
            .filter(|&n| !lpf.is_friable(n, y))
            .filter_map(|n| {
                let c = kronecker(d.get(), n as i64);
                (c != 0).then(|| (n, c as f64 / n as f64))
            })
            .collect();
        Ok(Self { terms })
    }

    /// Number of nonzero coefficients.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(n, a)| e(phase(n as f64, alpha)) * a)
            .sum()
    }

    /// Lipschitz constant of `α ↦ F(α)`: `Σ 2π n |a_n| = 2π · #terms`.
    pub fn lipschitz(&self) -> f64 {
        2.0 * PI * self.terms.len() as f64
    }

    /// Certified slack of a uniform grid with `grid` points.
    pub fn slack(&self, grid: usize) -> f64 {
        self.lipschitz() / (2.0 * grid as f64)
    }

    /// Smallest power-of-two grid (at least `floor`) meeting `max_slack`.
    pub fn grid_for(&self, max_slack: f64, floor: usize) -> usize {
        let need = (self.lipschitz() / (2.0 * max_slack)).ceil() as usize;
        need.max(floor).max(1).next_power_of_two()
    }

    /// Maximum of `|F|` on the grid `{j/G}` plus the Lipschitz slack.
    pub fn certified_max(&self, grid: usize, max_slack: f64) -> Result<CertifiedMax> {
        if grid == 0 {
            return invalid("grid must have at least one point");
        }
        if grid > MAX_GRID {
            return Err(Error::Accuracy(format!(
                "grid of {grid} points exceeds {MAX_GRID}"
            )));
        }
        let slack = self.slack(grid);
        if slack > max_slack {
            return Err(Error::Accuracy(format!(
                "grid of {grid} points gives slack {slack:.4} > {max_slack} ({} terms)",
                self.terms.len()
            )));
        }
        if self.terms.is_empty() {
            return Ok(CertifiedMax {
                value: 0.0,
                grid_max: 0.0,
                slack: 0.0,
                argmax: 0.0,
                grid,
                terms: 0,
            });
        }
        // F(j/G) = Σ_r c_r e(rj/G) with c_r = Σ_{n ≡ r (mod G)} a_n.
        let mut buf = vec![Complex64::new(0.0, 0.0); grid];
        for &(n, a) in &self.terms {
            buf[(n % grid as u64) as usize] += a;
        }
        let fft = FftPlanner::<f64>::new().plan_fft_inverse(grid);
        fft.process(&mut buf);
        let (j, grid_max) =
            buf.iter()
                .map(|c| c.norm())
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
                );
        Ok(CertifiedMax {
            value: grid_max + slack,
            grid_max,
            slack,
            argmax: j as f64 / grid as f64,
            grid,
            terms: self.terms.len(),
        })
    }
}

/// Result of the certified phase maximisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedMax {
    /// Upper bound on the true maximum: `grid_max + slack`.
    pub value: f64,
    pub grid_max: f64,
    pub slack: f64,
    pub argmax: f64,
    pub grid: usize,
    pub terms: usize,
}

/// Certified upper bound for `S_{y,z}(χ_d) = max_α |Σ_{n <= z, n ∉ S(y)} χ_d(n) e(nα)/n|`.
pub fn s_yz_max(
    d: FundamentalDiscriminant,
    y: f64,
    z: f64,
    grid: usize,
    max_slack: f64,
    lpf: &SmoothnessSieve,
) -> Result<CertifiedMax> {
    if z < y {
        return invalid(format!("need z >= y, got z = {z}, y = {y}"));
    }
    NonFriableSum::new(d, y, z, lpf)?.certified_max(grid, max_slack)
}

/// Offsets and truncation used to decide membership of the structured set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipParams {
    /// `C` in `y = e^{τ + C}` for odd characters.
    pub offset_odd: f64,
    /// `c` in `y = e^{√3 τ + c}` for even characters.
    pub offset_even: f64,
    /// Length of the non-friable sum.
    pub z: f64,
    /// Minimum grid size; raised as needed to reach `max_slack`.
    pub grid: usize,
    pub max_slack: f64,
}

impl MembershipParams {
    /// Friability bound for a character of the given parity.
    pub fn friability_bound(&self, tau: f64, parity: Parity) -> f64 {
        match parity {
            Parity::Odd => (tau + self.offset_odd).exp(),
            Parity::Even => (3f64.sqrt() * tau + self.offset_even).exp(),
        }
    }
}

/// Outcome of the membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub y: f64,
    /// Present only when `m(χ_d) > τ`, i.e. when the sum had to be bounded.
    pub bound: Option<CertifiedMax>,
}

/// Membership given a precomputed `m(χ_d)`, with `y` chosen by parity.
pub fn membership_with(
    d: FundamentalDiscriminant,
    m: f64,
    tau: f64,
    params: &MembershipParams,
    lpf: &SmoothnessSieve,
) -> Result<Membership> {
    membership_at(
        d,
        m,
        tau,
        params.friability_bound(tau, d.parity()),
        params,
        lpf,
    )
}

/// Membership given `m(χ_d)` and an explicit friability bound `y`.
pub fn membership_at(
    d: FundamentalDiscriminant,
    m: f64,
    tau: f64,
    y: f64,
    params: &MembershipParams,
    lpf: &SmoothnessSieve,
) -> Result<Membership> {
    if !(tau >= 1.0) {
        return invalid(format!("τ must be at least 1, got {tau}"));
    }
    if m <= tau {
        return Ok(Membership {
            member: false,
            y,
            bound: None,
        });
    }
    let bound = if params.z <= y {
        CertifiedMax {
            value: 0.0,
            grid_max: 0.0,
            slack: 0.0,
            argmax: 0.0,
            grid: 0,
            terms: 0,
        }
    } else {
        let sum = NonFriableSum::new(d, y, params.z, lpf)?;
        let grid = sum.grid_for(params.max_slack, params.grid);
        sum.certified_max(grid, params.max_slack)?
    };
    Ok(Membership {
        member: bound.value <= 1.0,
        y,
        bound: Some(bound),
    })
}

/// `d ∈ C_x(τ)`: certified `S_{y,z}(χ_d) <= 1` and `m(χ_d) > τ`.
pub fn c_x_membership(
    d: FundamentalDiscriminant,
    tau: f64,
    params: &MembershipParams,
    lpf: &SmoothnessSieve,
) -> Result<bool> {
    Ok(membership_with(d, normalized_m(d), tau, params, lpf)?.member)
}
