//! The Dickman–de Bruijn function `ρ`, its normalized integral
//! `P(u) = e^{-γ} ∫_0^u ρ`, and the related constants and friable sums.
//!
//! `ρ` solves `t ρ'(t) = -ρ(t - 1)` with `ρ = 1` on `[0, 1]`. Since the right
//! hand side does not involve `ρ(t)` itself, one RK4 step reduces to Simpson's
//! rule over `[t, t + h]`; the delayed value at the half step comes from a
//! cubic Lagrange interpolant whose stencil never crosses an integer, where
//! `ρ` loses smoothness.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::arith::{PrimeSieve, SmoothnessSieve};
use crate::consts::EXP_NEG_GAMMA;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_U_MAX: f64 = 10.0;
pub const DEFAULT_H: f64 = 1e-4;
/// Coarsest step accepted by [`build_dickman`].
pub const MAX_H: f64 = 1e-3;

const MAGIC: &[u8; 4] = b"DCKM";
const FORMAT_VERSION: u32 = 1;

/// `ρ` and `P` tabulated on `{0, h, 2h, ..., u_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DickmanTable {
    u_max: f64,
    steps_per_unit: usize,
    rho: Vec<f64>,
    p: Vec<f64>,
}

/// A table lookup, flagged when the argument was clamped to the table end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub value: f64,
    pub clamped: bool,
}

fn steps_per_unit(h: f64) -> Result<usize> {
    if !(h > 0.0) {
        return invalid(format!("step must be positive, got {h}"));
    }
    let k = (1.0 / h).round();
    if ((1.0 / h) - k).abs() > 1e-6 * k || k < 4.0 {
        return invalid(format!("1/h must be an integer of at least 4, got h = {h}"));
    }
    Ok(k as usize)
}

/// Solves for `ρ` and `∫_0^t ρ` on a grid with `k` steps per unit.
///
/// This is the raw stepper behind [`build_dickman`]; it accepts coarse grids
/// so the convergence order can be measured.
pub fn solve_grid(u_max: f64, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if k < 4 {
        return invalid(format!("need at least 4 steps per unit, got {k}"));
    }
    if !(u_max >= 1.0) {
        return invalid(format!("u_max must be at least 1, got {u_max}"));
    }
    let n = (u_max * k as f64).round() as usize;
    let h = 1.0 / k as f64;
    let mut rho = vec![1.0; n + 1];
    for i in k..n {
        let t = i as f64 * h;
        let j = i - k;
        let mid = interp_mid(&rho, k, j);
        let f0 = rho[j] / t;
        let fm = mid / (t + 0.5 * h);
        let f1 = rho[j + 1] / (t + h);
        rho[i + 1] = rho[i] - h / 6.0 * (f0 + 4.0 * fm + f1);
    }
    let mut integral = vec![0.0; n + 1];
    for i in 0..n {
        let mid = interp_mid(&rho, k, i);
        integral[i + 1] = integral[i] + h / 6.0 * (rho[i] + 4.0 * mid + rho[i + 1]);
    }
    Ok((rho, integral))
}

/// Cubic Lagrange weights for nodes `0, 1, 2, 3` at position `x`.
fn lagrange4(x: f64) -> [f64; 4] {
    [
        -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
        x * (x - 2.0) * (x - 3.0) / 2.0,
        -x * (x - 1.0) * (x - 3.0) / 2.0,
        x * (x - 1.0) * (x - 2.0) / 6.0,
    ]
}

/// Stencil start for interpolating inside grid cell `[j, j+1]`.
fn stencil(k: usize, j: usize, len: usize) -> usize {
    let lo = (j / k) * k;
    let hi = (lo + k).min(len - 1) - 3;
    j.saturating_sub(1).clamp(lo, hi)
}

/// `ρ` at index `j + 1/2`.
fn interp_mid(rho: &[f64], k: usize, j: usize) -> f64 {
    if j < k {
        return 1.0;
    }
    let s = stencil(k, j, rho.len());
    let w = lagrange4((j - s) as f64 + 0.5);
    w[0] * rho[s] + w[1] * rho[s + 1] + w[2] * rho[s + 2] + w[3] * rho[s + 3]
}

/// Builds the table on `[0, u_max]` with step `h`.
pub fn build_dickman(u_max: f64, h: f64) -> Result<DickmanTable> {
    if !(u_max >= 2.0) {
        return invalid(format!("u_max must be at least 2, got {u_max}"));
    }
    if h > MAX_H {
        return Err(Error::Accuracy(format!("step {h} is coarser than {MAX_H}")));
    }
    let k = steps_per_unit(h)?;
    let (rho, integral) = solve_grid(u_max, k)?;
    let p = integral.iter().map(|v| v * EXP_NEG_GAMMA).collect();
    Ok(DickmanTable {
        u_max: (rho.len() - 1) as f64 / k as f64,
        steps_per_unit: k,
        rho,
        p,
    })
}

impl Default for DickmanTable {
    fn default() -> Self {
        build_dickman(DEFAULT_U_MAX, DEFAULT_H).expect("default parameters are valid")
    }
}

impl DickmanTable {
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn h(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    pub fn rho_grid(&self) -> &[f64] {
        &self.rho
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.p
    }

    fn cell(&self, t: f64) -> (usize, f64) {
        let x = t * self.steps_per_unit as f64;
        let j = (x.floor() as usize).min(self.rho.len() - 2);
        (j, x - j as f64)
    }

    /// `ρ(t)`; clamps to `u_max`.
    pub fn rho(&self, t: f64) -> Lookup {
        if t <= 1.0 {
            return Lookup {
                value: if t >= 0.0 { 1.0 } else { 0.0 },
                clamped: false,
            };
        }
        if t >= self.u_max {
            return Lookup {
                value: *self.rho.last().unwrap(),
                clamped: t > self.u_max,
            };
        }
        let (j, frac) = self.cell(t);
        let s = stencil(self.steps_per_unit, j, self.rho.len());
        let w = lagrange4((j - s) as f64 + frac);
        let r = &self.rho;
        Lookup {
            value: w[0] * r[s] + w[1] * r[s + 1] + w[2] * r[s + 2] + w[3] * r[s + 3],
            clamped: false,
        }
    }

    /// `P(u) = e^{-γ} ∫_0^u ρ`; clamps to `P(u_max)` beyond the table.
    pub fn p_of_u(&self, u: f64) -> Lookup {
        if u <= 0.0 {
            return Lookup {
                value: 0.0,
                clamped: false,
            };
        }
        if u >= self.u_max {
            return Lookup {
                value: *self.p.last().unwrap(),
                clamped: u > self.u_max,
            };
        }
        let (j, frac) = self.cell(u);
        let t0 = j as f64 * self.h();
        let len = frac * self.h();
        let tail =
            len / 6.0 * (self.rho[j] + 4.0 * self.rho(t0 + 0.5 * len).value + self.rho(u).value);
        Lookup {
            value: self.p[j] + EXP_NEG_GAMMA * tail,
            clamped: false,
        }
    }

    /// Writes the versioned binary form: `DCKM`, version, `u_max`, `h`, then
    /// the `ρ` grid and the `P` grid as little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.u_max.to_le_bytes())?;
        w.write_all(&self.h().to_le_bytes())?;
        for v in self.rho.iter().chain(&self.p) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a Dickman table (bad magic)".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported Dickman table version {version}"
            )));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let u_max = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        let k = steps_per_unit(h).map_err(|e| Error::Format(e.to_string()))?;
        let n = (u_max * k as f64).round() as usize + 1;
        let mut read_grid = || -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; n * 8];
            r.read_exact(&mut bytes)?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let rho = read_grid()?;
        let p = read_grid()?;
        Ok(DickmanTable {
            u_max,
            steps_per_unit: k,
            rho,
            p,
        })
    }
}

/// Environment variable naming the directory for cached tables.
pub const CACHE_ENV: &str = "CHARSUM_CACHE_DIR";

/// [`build_dickman`], reusing a table stored in `dir` when one matches.
pub fn build_cached(u_max: f64, h: f64, dir: Option<&Path>) -> Result<DickmanTable> {
    let Some(dir) = dir else {
        return build_dickman(u_max, h);
    };
    let k = steps_per_unit(h)?;
    let path = dir.join(format!("dickman-u{u_max}-k{k}.bin"));
    if let Ok(f) = File::open(&path) {
        if let Ok(t) = DickmanTable::read_from(BufReader::new(f)) {
            if t.steps_per_unit == k && t.u_max == (u_max * k as f64).round() / k as f64 {
                return Ok(t);
            }
        }
    }
    let table = build_dickman(u_max, h)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp)?);
    table.write_to(&mut w)?;
    w.flush()?;
    drop(w);
    std::fs::rename(&tmp, &path)?;
    Ok(table)
}

/// Adaptive Simpson quadrature.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// The constant `B_0 = ∫_0^1 tanh(y)/y dy + ∫_1^∞ (tanh(y) - 1)/y dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B0 {
    pub value: f64,
    /// Where the tail integral was cut.
    pub cutoff: f64,
    /// Bound on the discarded tail `∫_T^∞ 2e^{-2y}/y dy <= e^{-2T}/T`.
    pub remainder_bound: f64,
}

pub fn b0_constant(tolerance: f64) -> Result<B0> {
    if !(tolerance >= 1e-8) {
        return invalid(format!("tolerance must be at least 1e-8, got {tolerance}"));
    }
    // tanh(y)/y -> 1 as y -> 0
    let head = |y: f64| if y == 0.0 { 1.0 } else { y.tanh() / y };
    // tanh(y) - 1 = -2 / (e^{2y} + 1), without cancellation
    let tail = |y: f64| -2.0 / (((2.0 * y).exp() + 1.0) * y);
    // |tanh(y) - 1| <= 2e^{-2y} < tolerance / 100 beyond the cutoff
    let cutoff = (200.0 / tolerance).ln() / 2.0;
    let cutoff = cutoff.max(1.0);
    let q = 1e-3 * tolerance;
    let value = adaptive_simpson(&head, 0.0, 1.0, q) + adaptive_simpson(&tail, 1.0, cutoff, q);
    Ok(B0 {
        value,
        cutoff,
        remainder_bound: (-2.0 * cutoff).exp() / cutoff,
    })
}

/// `η = e^{-γ} log 2`.
pub fn eta_constant() -> f64 {
    EXP_NEG_GAMMA * std::f64::consts::LN_2
}

/// `Π_{p <= y} (1 - 1/p)^{-1}`.
pub fn mertens_product(y: f64, sieve: &PrimeSieve) -> Result<f64> {
    if !(y >= 2.0) {
        return invalid(format!("y must be at least 2, got {y}"));
    }
    let bound = y.floor() as u64;
    sieve.require(bound)?;
    Ok(sieve
        .primes_up_to(bound)
        .iter()
        .map(|&p| {
            let p = p as f64;
            p / (p - 1.0)
        })
        .product())
}

/// `Σ_{n <= y^u, P+(n) <= y} 1/n`, summed with compensation.
pub fn friable_harmonic(y: f64, u: f64, lpf: &SmoothnessSieve) -> Result<f64> {
    if !(y >= 2.0) {
        return invalid(format!("y must be at least 2, got {y}"));
    }
    if !(u > 0.0) {
        return invalid(format!("u must be positive, got {u}"));
    }
    let top = (u * y.ln()).exp();
    if top < 2.0 {
        return Ok(1.0);
    }
    let limit = top.floor() as u64;
    lpf.require(limit)?;
    let ybound = y.floor() as u32;
    let table = &lpf.lpf_table()[..=limit as usize];
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (n, &p) in table.iter().enumerate().skip(1) {
        if p <= ybound {
            let v = 1.0 / n as f64;
            let t = sum + v;
            comp += if sum.abs() >= v {
                (sum - t) + v
            } else {
                (v - t) + sum
            };
            sum = t;
        }
    }
    Ok(sum + comp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{sieve_primes, smoothness_sieve};
    use crate::consts::EXP_GAMMA;

    #[test]
    fn rho_examples() {
        let t = build_dickman(5.0, 1e-3).unwrap();
        assert_eq!(t.rho(0.5).value, 1.0);
        assert!((t.rho(2.0).value - (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!((t.rho(3.0).value - 0.048_608_388_29).abs() < 1e-9);
    }

    #[test]
    fn p_examples() {
        let t = DickmanTable::default();
        assert_eq!(t.p_of_u(0.0).value, 0.0);
        assert!((t.p_of_u(1.0).value - EXP_NEG_GAMMA).abs() < 1e-12);
        assert!(1.0 - t.p_of_u(4.0).value < 0.01);
        let far = t.p_of_u(12.0);
        assert!(far.clamped && (far.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        // ρ(4) from the dilogarithm form on [2, 3] integrated once more
        let r4 = 0.004_910_925_647_760_832;
        let err = |k: usize| (solve_grid(4.0, k).unwrap().0[4 * k] - r4).abs();
        assert!(err(40) / err(80) >= 8.0);
        assert!(err(1000) < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(build_dickman(10.0, 1e-2), Err(Error::Accuracy(_))));
        assert!(build_dickman(1.0, 1e-4).is_err());
        assert!(build_dickman(10.0, 3.3e-4).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let t = build_dickman(3.0, 1e-3).unwrap();
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"DCKM");
        assert_eq!(DickmanTable::read_from(bytes.as_slice()).unwrap(), t);
        bytes[0] = b'X';
        assert!(matches!(
            DickmanTable::read_from(bytes.as_slice()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn cache_reuses_tables() {
        let dir = tempfile::tempdir().unwrap();
        let a = build_cached(3.0, 1e-3, Some(dir.path())).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let b = build_cached(3.0, 1e-3, Some(dir.path())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constants() {
        let b0 = b0_constant(1e-8).unwrap();
        assert!((b0.value - 0.8187).abs() < 5e-4, "{}", b0.value);
        let eta = eta_constant();
        assert!((eta - 0.389_174_3).abs() < 1e-6);
        assert!((eta / std::f64::consts::LN_2 - EXP_NEG_GAMMA).abs() < 1e-15);
        assert!(eta < b0.value);
        // |tanh y - 1| <= 2e^{-2y}: the tail beyond 20 is below e^{-40}/20
        assert!((-40f64).exp() / 20.0 < 1e-17);
        assert!(b0_constant(1e-9).is_err());
    }

    #[test]
    fn mertens_examples() {
        let s = sieve_primes(1_000_000).unwrap();
        assert_eq!(mertens_product(2.0, &s).unwrap(), 2.0);
        assert!((mertens_product(10.0, &s).unwrap() - 4.375).abs() < 1e-12);
        let big = mertens_product(1e6, &s).unwrap();
        assert!((big - EXP_GAMMA * 1e6f64.ln()).abs() < 0.5);
    }

    #[test]
    fn friable_examples() {
        let lpf = smoothness_sieve(100_000).unwrap();
        assert_eq!(friable_harmonic(3.0, 0.5, &lpf).unwrap(), 1.0);
        let h10: f64 = (1..=10).map(|n| 1.0 / n as f64).sum();
        assert!((friable_harmonic(10.0, 1.0, &lpf).unwrap() - h10).abs() < 1e-12);
        assert!((h10 - 2.928_968).abs() < 1e-6);
        assert!(friable_harmonic(10.0, 6.0, &lpf).is_err());
    }
}
