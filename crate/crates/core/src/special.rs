//! Special functions: complex log-gamma, the three Dirichlet integrals and the
//! Cauchy determinant.
//!
//! Gamma products are always assembled in log space and exponentiated once by
//! the caller.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..=8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT_TO: f64 = 15.0;

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_2PI_HALF + series
}

fn pole_check(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(z.re as i64));
    }
    Ok(())
}

/// Principal branch of `log Γ(z)`: analytic off the non-positive real axis and
/// real for real positive `z`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    pole_check(z)?;
    if z.re >= SHIFT_TO {
        return Ok(stirling(z));
    }
    let shift = (SHIFT_TO - z.re).ceil() as usize;
    let mut correction = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        correction += (z + k as f64).ln();
    }
    Ok(stirling(z + shift as f64) - correction)
}

/// `log |Γ(x)|` for real `x`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.round() {
        return Err(Error::Pole(x as i64));
    }
    if x >= SHIFT_TO {
        return Ok(stirling(Complex64::new(x, 0.0)).re);
    }
    let shift = (SHIFT_TO - x).ceil() as usize;
    let mut correction = 0.0;
    for k in 0..shift {
        correction += (x + k as f64).abs().ln();
    }
    Ok(stirling(Complex64::new(x + shift as f64, 0.0)).re - correction)
}

pub(crate) fn lg(z: Complex64) -> Result<Complex64> {
    log_gamma(z)
}

pub(crate) fn lgr(x: f64) -> Result<Complex64> {
    log_gamma(Complex64::new(x, 0.0))
}

/// Log of the Euler beta function.
pub fn log_beta(a: Complex64, b: Complex64) -> Result<Complex64> {
    Ok(lg(a)? + lg(b)? - lg(a + b)?)
}

fn require_positive(xs: &[Complex64], what: &str) -> Result<()> {
    for (j, x) in xs.iter().enumerate() {
        if !(x.re > 0.0) {
            return Err(Error::Divergent(format!(
                "Re {what}_{} > 0 fails (got {})",
                j + 1,
                x.re
            )));
        }
    }
    Ok(())
}

/// Log of `∫_{simplex} Π t_j^{x_j-1} (1-Σt)^{x_{n+1}-1} dt = ΠΓ(x_j) / Γ(Σx_j)`.
pub fn dirichlet_simplex(x: &[Complex64]) -> Result<Complex64> {
    if x.len() < 2 {
        return Err(Error::Shape(
            "simplex integral needs at least two exponents".into(),
        ));
    }
    require_positive(x, "x")?;
    let total: Complex64 = x.iter().sum();
    let mut acc = -lg(total)?;
    for &xj in x {
        acc += lg(xj)?;
    }
    Ok(acc)
}

/// Log of `∫_{t>0} Π t_j^{x_j-1} (1+Σt)^{-y} dt = Γ(y-Σx) ΠΓ(x_j) / Γ(y)`.
pub fn dirichlet_halfspace(x: &[Complex64], y: Complex64) -> Result<Complex64> {
    require_positive(x, "x")?;
    let total: Complex64 = x.iter().sum();
    if !(y.re > total.re) {
        return Err(Error::Divergent(format!(
            "Re y > Σ Re x_j fails ({} <= {})",
            y.re, total.re
        )));
    }
    let mut acc = lg(y - total)? - lg(y)?;
    for &xj in x {
        acc += lg(xj)?;
    }
    Ok(acc)
}

/// Log of
/// `∫_{t>0, s∈R} Π t_j^{x_j-1} (1+is+Σt)^{-y} (1-is+Σt)^{-z} ds dt
///   = 2^{2-y-z} π Γ(y+z-1-Σx) ΠΓ(x_j) / (Γ(y)Γ(z))`.
/// `x` has `n - 1` entries (possibly none).
pub fn dirichlet_cayley(x: &[Complex64], y: Complex64, z: Complex64) -> Result<Complex64> {
    require_positive(x, "x")?;
    let total: Complex64 = x.iter().sum();
    let rest = y + z - 1.0 - total;
    if !(rest.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re(y+z-1-Σx) > 0 fails (got {})",
            rest.re
        )));
    }
    let mut acc = (2.0 - y - z) * std::f64::consts::LN_2 + std::f64::consts::PI.ln() + lg(rest)?
        - lg(y)?
        - lg(z)?;
    for &xj in x {
        acc += lg(xj)?;
    }
    Ok(acc)
}

/// Product formula
/// `Π_{p<q}(μ_q-μ_p) Π_{α<β}(λ_β-λ_α) / Π_{p,α}(μ_p-λ_α)`.
///
/// Equal in absolute value to `det[1/(μ_p-λ_l)]`; the sign differs from the
/// determinant whenever `n(n-1)/2` is odd.
pub fn cauchy_determinant(mu: &[f64], lambda: &[f64]) -> Result<f64> {
    if mu.len() != lambda.len() || mu.is_empty() {
        return Err(Error::Shape(
            "cauchy determinant needs two rows of equal positive length".into(),
        ));
    }
    let n = mu.len();
    let mut log_abs = 0.0;
    let mut negative = false;
    let mut push = |v: f64, sign: f64| {
        if v < 0.0 {
            negative = !negative;
        }
        log_abs += sign * v.abs().ln();
    };
    for p in 0..n {
        for q in p + 1..n {
            push(mu[q] - mu[p], 1.0);
            push(lambda[q] - lambda[p], 1.0);
        }
    }
    for &m in mu {
        for &l in lambda {
            if m == l {
                return Err(Error::Singular(format!("μ = λ = {m}")));
            }
            push(m - l, -1.0);
        }
    }
    if log_abs.is_infinite() && log_abs < 0.0 {
        return Ok(0.0);
    }
    let v = log_abs.exp();
    Ok(if negative { -v } else { v })
}
