//! Integrands over Rayleigh triangles and their Gamma-product values.
//!
//! Every family shares the same skeleton: a per-point weight on each row,
//! interpolation factors `|λ_{jα} - λ_{(j+1)p}|^{θ_{jα}-1}` between adjacent
//! rows, inverse pair factors `(λ_{jβ} - λ_{jα})^{θ_{jα}+θ_{jβ}-2}` on inner
//! rows and a plain Vandermonde on the top row. Only the per-point weights and
//! the closed forms differ.

mod params;
mod presets;
mod single;

pub use params::{real_vec, uniform_theta, Family, UltraBetaParams};
pub use presets::{
    matrix_preset, matrix_preset_theta, preset_matrix_rhs, preset_normalization, GroundField,
    PresetArgs, PRESETS,
};
pub use single::{
    log_single_layer_closed_form, log_single_layer_integrand, SingleLayerKind, SingleLayerParams,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::patterns::{RayleighTrapezoid, RayleighTriangle, ValidationVerdict};
use crate::special::{lg, lgr};

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// `e · log(base)` with `e = 0` contributing nothing even when `base = 0`.
pub(crate) fn xpow(e: Complex64, log_base: f64) -> Complex64 {
    if e == Complex64::new(0.0, 0.0) {
        return e;
    }
    if log_base.is_infinite() {
        let inf = if (e.re > 0.0) == (log_base > 0.0) {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        return Complex64::new(inf, 0.0);
    }
    e * log_base
}

/// Log of `(1 + i x)` on the principal branch.
pub(crate) fn log_one_plus_ix(x: f64) -> Complex64 {
    Complex64::new(0.5 * x.mul_add(x, 1.0).ln(), x.atan())
}

/// Log of the interpolating weight `𝔯_θ` on a triangle.
pub fn log_r_theta(tri: &RayleighTriangle, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("θ must be positive, got {theta}")));
    }
    check_shape(tri.validate_with_tol(&crate::patterns::DomainWindow::real_line(), 0.0))?;
    let rows = tri.rows();
    let n = rows.len();
    let e = Complex64::new(theta - 1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n - 1 {
        for &x in &rows[j] {
            for &y in &rows[j + 1] {
                acc += xpow(e, (x - y).abs().ln());
            }
        }
        for b in 1..rows[j].len() {
            for a in 0..b {
                acc -= xpow(2.0 * e, (rows[j][b] - rows[j][a]).ln());
            }
        }
    }
    let top = &rows[n - 1];
    for q in 1..n {
        for p in 0..q {
            acc += (top[q] - top[p]).ln();
        }
    }
    finite_or_singular(acc.re, "tie in a factor with nonzero exponent")
}

fn finite_or_singular(x: f64, what: &str) -> Result<f64> {
    if x.is_nan() {
        Err(Error::Singular(what.into()))
    } else if x == f64::INFINITY {
        Err(Error::Singular(format!("{what}: density is infinite")))
    } else {
        Ok(x)
    }
}

fn check_shape(v: ValidationVerdict) -> Result<()> {
    match v {
        ValidationVerdict::Ok | ValidationVerdict::Tie { .. } => Ok(()),
        ValidationVerdict::NotIncreasing { j, k } => {
            Err(Error::Domain(format!("row {j} not increasing at {k}")))
        }
        ValidationVerdict::InterlacingViolation { j, k } => Err(Error::Domain(format!(
            "entry ({j},{k}) violates interlacing"
        ))),
        ValidationVerdict::OutOfWindow { j, k } => {
            Err(Error::Domain(format!("entry ({j},{k}) outside the window")))
        }
    }
}

/// `log C_n(θ)`, the constant turning Lebesgue measure on Hermitian matrices into
/// `C_n 𝔯_θ dℒ`: `C_n(θ) = π^{θn(n-1)/2} / Γ(θ)^{n(n-1)/2}`.
pub fn normalization_constant(n: usize, theta: f64) -> Result<f64> {
    let pairs = (n * n.saturating_sub(1)) as f64 / 2.0;
    if pairs == 0.0 {
        return Ok(0.0);
    }
    Ok(theta * pairs * LN_PI - pairs * lgr(theta)?.re)
}

/// Rectangular analogue for `n × m` matrices, `n ≤ m`:
/// `π^{mnθ} / (Γ(θ)^{n(n-1)/2} Π_j Γ((m-j+1)θ))`.
pub fn normalization_constant_rect(n: usize, m: usize, theta: f64) -> Result<f64> {
    if n > m {
        return Err(Error::Incompatible(format!(
            "need n <= m, got n = {n}, m = {m}"
        )));
    }
    let pairs = (n * n.saturating_sub(1)) as f64 / 2.0;
    let mut acc = (m * n) as f64 * theta * LN_PI;
    if pairs > 0.0 {
        acc -= pairs * lgr(theta)?.re;
    }
    for j in 1..=n {
        acc -= lgr((m - j + 1) as f64 * theta)?.re;
    }
    Ok(acc)
}

/// Log of the integrand on a triangle; the imaginary part is the phase.
/// For the trapezoid family only rows `m..=n` enter.
pub fn log_ultra_integrand(params: &UltraBetaParams, tri: &RayleighTriangle) -> Result<Complex64> {
    if tri.size() != params.n {
        return Err(Error::Shape(format!(
            "triangle of size {} for n = {}",
            tri.size(),
            params.n
        )));
    }
    check_shape(tri.validate_with_tol(&params.domain(), 0.0))?;
    let base = params.base_row();
    log_rows(params, base, &tri.rows()[base - 1..])
}

/// Log of the trapezoid integrand.
pub fn log_trapezoid_integrand(
    params: &UltraBetaParams,
    trap: &RayleighTrapezoid,
) -> Result<Complex64> {
    if params.family != Family::Trapezoid {
        return Err(Error::Incompatible(
            "trapezoid input needs the Trapezoid family".into(),
        ));
    }
    if trap.base_size() != params.m || trap.top_size() != params.n {
        return Err(Error::Shape(format!(
            "trapezoid rows {}..={} for m = {}, n = {}",
            trap.base_size(),
            trap.top_size(),
            params.m,
            params.n
        )));
    }
    check_shape(trap.validate(&params.domain()))?;
    log_rows(params, params.m, trap.rows())
}

/// Sum of all factors over rows `base..=n` (`rows[0]` is row `base`).
fn log_rows(params: &UltraBetaParams, base: usize, rows: &[Vec<f64>]) -> Result<Complex64> {
    let n = params.n;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, row) in rows.iter().enumerate() {
        let j = base + i;
        for (a, &x) in row.iter().enumerate() {
            acc += params.log_point_weight(j, a + 1, x);
        }
        if j < n {
            let next = &rows[i + 1];
            for (a, &x) in row.iter().enumerate() {
                let e = params.theta_at(j, a + 1) - 1.0;
                for &y in next {
                    acc += xpow(e, (x - y).abs().ln());
                }
            }
        }
        for b in 1..row.len() {
            for a in 0..b {
                acc += xpow(
                    params.pair_exponent(j, a + 1, b + 1),
                    (row[b] - row[a]).ln(),
                );
            }
        }
    }
    if acc.re.is_nan() {
        return Err(Error::Singular(
            "tie in a factor with nonzero exponent".into(),
        ));
    }
    Ok(acc)
}

/// Log of the Gamma-product value of the integral over the family's domain.
pub fn log_closed_form(params: &UltraBetaParams) -> Result<Complex64> {
    params.check_convergence()?;
    let n = params.n;
    let mut acc = Complex64::new(0.0, 0.0);
    let first_theta_row = if params.family == Family::Trapezoid {
        params.m
    } else {
        1
    };
    for j in first_theta_row..n {
        for a in 1..=j {
            acc += lg(params.theta_at(j, a))?;
        }
    }
    let s = |j: usize| params.theta_row_sum(j.wrapping_sub(1));
    let (sig, tau) = (&params.sigma, &params.tau);
    match params.family {
        Family::BetaPrime => {
            for j in 1..=n {
                acc += lg(sig[j - 1])? + lg(tau[j - 1] - sig[j - 1] - s(j))? - lg(tau[j - 1])?;
            }
        }
        Family::Trapezoid => {
            let m = params.m;
            let k = params.kappa;
            let (sm, tm) = (sig[m - 1], tau[m - 1]);
            for j in 1..m {
                let jf = j as f64;
                acc += lg((jf + 1.0) * k)?
                    + lg(sm + jf * k)?
                    + lg(tm - sm - (m as f64 + jf - 1.0) * k)?
                    - lg(k)?
                    - lg(tm - jf * k)?;
            }
            for j in m..=n {
                acc += lg(sig[j - 1])? + lg(tau[j - 1] - sig[j - 1] - s(j))? - lg(tau[j - 1])?;
            }
        }
        Family::Cayley => {
            let total: Complex64 = sig.iter().chain(tau.iter()).sum();
            acc += n as f64 * LN_PI + (2.0 * n as f64 - total) * std::f64::consts::LN_2;
            for j in 1..=n {
                acc +=
                    lg(sig[j - 1] + tau[j - 1] - 1.0 - s(j))? - lg(sig[j - 1])? - lg(tau[j - 1])?;
            }
        }
        Family::GammaChain => {
            for j in 1..=n {
                acc += lg(sig[j - 1])? - (sig[j - 1] + s(j)) * params.psi[j - 1].ln();
            }
        }
        Family::GaussChain => {
            acc += 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            for j in 1..=n {
                acc -= (0.5 + s(j)) * params.psi[j - 1].ln();
            }
        }
        Family::IntervalBeta => {
            let (a, b) = params.window;
            let mut power = Complex64::new(0.0, 0.0);
            for j in 1..=n {
                power += sig[j - 1] + tau[j - 1] - 1.0;
                acc += lg(sig[j - 1])? + lg(tau[j - 1])? - lg(sig[j - 1] + tau[j - 1] + s(j))?;
            }
            acc += power * (b - a).ln();
        }
    }
    Ok(acc)
}

/// Log of the Selberg integral
/// `∫_{0<μ_1<…<μ_n} Π μ^{σ-1}(1+μ)^{-τ} Π|μ_q-μ_p|^{2θ} dμ`
/// `= Π_j Γ(σ+(j-1)θ) Γ(τ-σ-(n+j-2)θ) Γ(jθ) / (Γ(τ-(j-1)θ) Γ(θ))`.
pub fn selberg_rhs(
    n: usize,
    sigma: Complex64,
    tau: Complex64,
    theta: Complex64,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Shape("n must be at least 1".into()));
    }
    if !(sigma.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re σ > 0 fails (got {})",
            sigma.re
        )));
    }
    if !(theta.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re θ > 0 fails (got {})",
            theta.re
        )));
    }
    let margin = tau - sigma - 2.0 * (n as f64 - 1.0) * theta;
    if !(margin.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re τ > Re σ + 2(n-1)Re θ fails (margin {})",
            margin.re
        )));
    }
    let nf = n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 1..=n {
        let jf = j as f64;
        acc += lg(sigma + (jf - 1.0) * theta)?
            + lg(tau - sigma - (nf + jf - 2.0) * theta)?
            + lg(jf * theta)?
            - lg(tau - (jf - 1.0) * theta)?
            - lg(theta)?;
    }
    Ok(acc)
}

/// Log of the Selberg integrand at an increasing point of `(0, ∞)^n`.
pub fn log_selberg_integrand(mu: &[f64], sigma: f64, tau: f64, theta: f64) -> Result<f64> {
    if mu.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Domain("Selberg points must be nonnegative".into()));
    }
    let mut acc = 0.0;
    for (q, &x) in mu.iter().enumerate() {
        acc += xpow(Complex64::new(sigma - 1.0, 0.0), x.ln()).re - tau * x.ln_1p();
        for &y in &mu[..q] {
            acc += 2.0 * theta * (x - y).abs().ln();
        }
    }
    finite_or_singular(acc, "tie in Selberg integrand")
}
