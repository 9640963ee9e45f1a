//! Numerical constants, fixed to 20 significant digits.

/// Euler–Mascheroni constant, `lim (H_n - ln n)`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^γ`, the Mertens constant in `prod_{p<=y} (1 - 1/p)^{-1} ~ e^γ log y`.
pub const EXP_GAMMA: f64 = 1.781_072_417_990_198;

/// `e^{-γ}`.
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_1;
