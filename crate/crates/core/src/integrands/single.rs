//! One-row integrals: integrate a row `μ` of `n` points interlacing a fixed row
//! `λ` of `n - 1` points, or, for [`SingleLayerKind::FixedOuter`], a row of `k`
//! points inside a fixed row of `k + 1` points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{log_one_plus_ix, xpow};
use crate::error::{Error, Result};
use crate::special::lg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingleLayerKind {
    BetaPrime,
    Cayley,
    Gamma,
    Gauss,
    Interval,
    FixedOuter,
}

impl SingleLayerKind {
    pub const ALL: [SingleLayerKind; 6] = [
        SingleLayerKind::BetaPrime,
        SingleLayerKind::Cayley,
        SingleLayerKind::Gamma,
        SingleLayerKind::Gauss,
        SingleLayerKind::Interval,
        SingleLayerKind::FixedOuter,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleLayerParams {
    pub kind: SingleLayerKind,
    pub sigma: Complex64,
    pub tau: Complex64,
    pub psi: Complex64,
    /// One exponent per point of the fixed row.
    pub theta: Vec<Complex64>,
    pub window: (f64, f64),
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl SingleLayerParams {
    fn base(kind: SingleLayerKind, theta: Vec<Complex64>) -> Self {
        Self {
            kind,
            sigma: c(0.0),
            tau: c(0.0),
            psi: c(0.0),
            theta,
            window: (0.0, f64::INFINITY),
        }
    }

    pub fn beta_prime(sigma: Complex64, tau: Complex64, theta: Vec<Complex64>) -> Self {
        Self {
            sigma,
            tau,
            ..Self::base(SingleLayerKind::BetaPrime, theta)
        }
    }

    pub fn cayley(sigma: Complex64, tau: Complex64, theta: Vec<Complex64>) -> Self {
        Self {
            sigma,
            tau,
            window: (f64::NEG_INFINITY, f64::INFINITY),
            ..Self::base(SingleLayerKind::Cayley, theta)
        }
    }

    pub fn gamma(sigma: Complex64, psi: Complex64, theta: Vec<Complex64>) -> Self {
        Self {
            sigma,
            psi,
            ..Self::base(SingleLayerKind::Gamma, theta)
        }
    }

    pub fn gauss(psi: Complex64, theta: Vec<Complex64>) -> Self {
        Self {
            psi,
            window: (f64::NEG_INFINITY, f64::INFINITY),
            ..Self::base(SingleLayerKind::Gauss, theta)
        }
    }

    pub fn interval(
        window: (f64, f64),
        sigma: Complex64,
        tau: Complex64,
        theta: Vec<Complex64>,
    ) -> Self {
        Self {
            sigma,
            tau,
            window,
            ..Self::base(SingleLayerKind::Interval, theta)
        }
    }

    /// `θ_p` for each point of the fixed outer row.
    pub fn fixed_outer(theta: Vec<Complex64>) -> Self {
        Self {
            window: (f64::NEG_INFINITY, f64::INFINITY),
            ..Self::base(SingleLayerKind::FixedOuter, theta)
        }
    }

    /// Number of integration variables.
    pub fn var_len(&self) -> usize {
        match self.kind {
            SingleLayerKind::FixedOuter => self.theta.len().saturating_sub(1),
            _ => self.theta.len() + 1,
        }
    }

    pub fn check_convergence(&self) -> Result<()> {
        for (a, t) in self.theta.iter().enumerate() {
            if !(t.re > 0.0) {
                return Err(Error::Divergent(format!(
                    "Re θ_{} > 0 fails (got {})",
                    a + 1,
                    t.re
                )));
            }
        }
        let s: Complex64 = self.theta.iter().sum();
        let pos = |z: Complex64, what: &str| {
            if z.re > 0.0 {
                Ok(())
            } else {
                Err(Error::Divergent(format!("{what} fails (margin {})", z.re)))
            }
        };
        match self.kind {
            SingleLayerKind::BetaPrime => {
                pos(self.sigma, "Re σ > 0")?;
                pos(self.tau - self.sigma - s, "Re τ > Re σ + Σ Re θ")
            }
            SingleLayerKind::Cayley => {
                pos(self.sigma + self.tau - 1.0 - s, "Re(σ + τ) > 1 + Σ Re θ")
            }
            SingleLayerKind::Gamma => {
                pos(self.sigma, "Re σ > 0")?;
                pos(self.psi, "Re ψ > 0")
            }
            SingleLayerKind::Gauss => pos(self.psi, "Re ψ > 0"),
            SingleLayerKind::Interval => {
                if !(self.window.0 < self.window.1)
                    || !self.window.0.is_finite()
                    || !self.window.1.is_finite()
                {
                    return Err(Error::Domain("interval needs finite a < b".into()));
                }
                pos(self.sigma, "Re σ > 0")?;
                pos(self.tau, "Re τ > 0")
            }
            SingleLayerKind::FixedOuter => {
                if self.theta.is_empty() {
                    Err(Error::Shape("fixed outer row is empty".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Log of the weight on one integration variable.
    pub(crate) fn log_var_weight(&self, x: f64) -> Complex64 {
        self.log_var_weight_at(x, x - self.window.0, self.window.1 - x)
    }

    /// As [`Self::log_var_weight`] with caller-supplied distances to the window ends.
    pub(crate) fn log_var_weight_at(&self, x: f64, x_lo: f64, x_hi: f64) -> Complex64 {
        let one = c(1.0);
        match self.kind {
            SingleLayerKind::BetaPrime => xpow(self.sigma - one, x_lo.ln()) - self.tau * x.ln_1p(),
            SingleLayerKind::Cayley => {
                let lp = log_one_plus_ix(x);
                -self.sigma * lp - self.tau * lp.conj()
            }
            SingleLayerKind::Gamma => xpow(self.sigma - one, x_lo.ln()) - self.psi * x,
            SingleLayerKind::Gauss => -0.5 * self.psi * x * x,
            SingleLayerKind::Interval => {
                xpow(self.sigma - one, x_lo.ln()) + xpow(self.tau - one, x_hi.ln())
            }
            SingleLayerKind::FixedOuter => c(0.0),
        }
    }
}

fn check_increasing(x: &[f64], what: &str) -> Result<()> {
    for w in x.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(format!("{what} must be strictly increasing")));
        }
    }
    Ok(())
}

/// `Σ_{α<β} (θ_α + θ_β - 1) log(x_β - x_α)`.
fn log_w(x: &[f64], theta: &[Complex64]) -> Complex64 {
    let mut acc = c(0.0);
    for b in 1..x.len() {
        for a in 0..b {
            acc += xpow(theta[a] + theta[b] - 1.0, (x[b] - x[a]).ln());
        }
    }
    acc
}

/// Log of the integrand at the variables `var` given the fixed row `fixed`.
pub fn log_single_layer_integrand(
    params: &SingleLayerParams,
    fixed: &[f64],
    var: &[f64],
) -> Result<Complex64> {
    if fixed.len() != params.theta.len() || var.len() != params.var_len() {
        return Err(Error::Shape(format!(
            "{} fixed and {} free points for {} exponents",
            fixed.len(),
            var.len(),
            params.theta.len()
        )));
    }
    let (outer, inner) = if params.kind == SingleLayerKind::FixedOuter {
        (fixed, var)
    } else {
        (var, fixed)
    };
    for k in 0..inner.len() {
        if !(outer[k] <= inner[k] && inner[k] <= outer[k + 1]) {
            return Err(Error::Domain(format!(
                "rows do not interlace at position {}",
                k + 1
            )));
        }
    }
    let (lo, hi) = params.window;
    if var.iter().any(|&x| x < lo || x > hi) {
        return Err(Error::Domain("point outside the window".into()));
    }
    let mut acc = c(0.0);
    for &x in var {
        acc += params.log_var_weight(x);
    }
    for (a, &y) in fixed.iter().enumerate() {
        for &x in var {
            acc += xpow(params.theta[a] - 1.0, (x - y).abs().ln());
        }
    }
    for q in 1..var.len() {
        for p in 0..q {
            acc += (var[q] - var[p]).ln();
        }
    }
    if acc.re.is_nan() {
        return Err(Error::Singular(
            "tie in a factor with nonzero exponent".into(),
        ));
    }
    Ok(acc)
}

/// Log of the value of the one-row integral as a function of the fixed row.
pub fn log_single_layer_closed_form(
    params: &SingleLayerParams,
    fixed: &[f64],
) -> Result<Complex64> {
    params.check_convergence()?;
    if fixed.len() != params.theta.len() {
        return Err(Error::Shape(format!(
            "{} fixed points for {} exponents",
            fixed.len(),
            params.theta.len()
        )));
    }
    check_increasing(fixed, "fixed row")?;
    let (lo, hi) = params.window;
    if fixed.iter().any(|&x| !(x > lo && x < hi)) {
        return Err(Error::Domain(
            "fixed row must lie inside the open window".into(),
        ));
    }
    let th = &params.theta;
    let s: Complex64 = th.iter().sum();
    let mut acc = log_w(fixed, th);
    for &t in th {
        acc += lg(t)?;
    }
    let (sig, tau, psi) = (params.sigma, params.tau, params.psi);
    match params.kind {
        SingleLayerKind::BetaPrime => {
            acc += lg(sig)? + lg(tau - sig - s)? - lg(tau)?;
            for (&l, &t) in fixed.iter().zip(th) {
                acc += (sig - 1.0 + t) * l.ln() - (tau - t) * l.ln_1p();
            }
        }
        SingleLayerKind::Cayley => {
            acc += std::f64::consts::PI.ln()
                + (2.0 - sig - tau) * std::f64::consts::LN_2
                + lg(sig + tau - s - 1.0)?
                - lg(sig)?
                - lg(tau)?;
            for (&l, &t) in fixed.iter().zip(th) {
                let lp = log_one_plus_ix(l);
                acc += (t - sig) * lp + (t - tau) * lp.conj();
            }
        }
        SingleLayerKind::Gamma => {
            acc += lg(sig)? - (sig + s) * psi.ln();
            for (&l, &t) in fixed.iter().zip(th) {
                acc += (sig + t - 1.0) * l.ln() - psi * l;
            }
        }
        SingleLayerKind::Gauss => {
            acc += 0.5 * (2.0 * std::f64::consts::PI).ln() - (0.5 + s) * psi.ln();
            acc -= 0.5 * psi * fixed.iter().map(|l| l * l).sum::<f64>();
        }
        SingleLayerKind::Interval => {
            let (a, b) = params.window;
            acc += (sig + tau - 1.0) * (b - a).ln() + lg(sig)? + lg(tau)? - lg(sig + tau + s)?;
            for (&l, &t) in fixed.iter().zip(th) {
                acc += (sig + t - 1.0) * (l - a).ln() + (tau + t - 1.0) * (b - l).ln();
            }
        }
        SingleLayerKind::FixedOuter => {
            acc -= lg(s)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        let p = SingleLayerParams::beta_prime(c(1.0), c(2.0), vec![]);
        assert!(log_single_layer_closed_form(&p, &[]).unwrap().norm() < 1e-14);
        let p = SingleLayerParams::beta_prime(c(1.0), c(4.0), vec![c(1.0)]);
        assert_relative_eq!(
            log_single_layer_closed_form(&p, &[1.0]).unwrap().re.exp(),
            1.0 / 48.0,
            max_relative = 1e-13
        );
        let p = SingleLayerParams::cayley(c(1.0), c(1.0), vec![]);
        assert_relative_eq!(
            log_single_layer_closed_form(&p, &[]).unwrap().re.exp(),
            std::f64::consts::PI,
            max_relative = 1e-14
        );
        let p = SingleLayerParams::fixed_outer(vec![c(1.0), c(1.0)]);
        assert!(
            log_single_layer_closed_form(&p, &[0.0, 1.0])
                .unwrap()
                .norm()
                < 1e-14
        );
    }

    #[test]
    fn one_variable_kinds_match_elementary_integrals() {
        let lgr = |x: f64| crate::special::ln_gamma(x).unwrap();
        // ∫ x^{σ-1} e^{-ψx} = Γ(σ) ψ^{-σ}
        let p = SingleLayerParams::gamma(c(2.5), c(1.7), vec![]);
        assert_relative_eq!(
            log_single_layer_closed_form(&p, &[]).unwrap().re,
            lgr(2.5) - 2.5 * 1.7f64.ln(),
            max_relative = 1e-14
        );
        let p = SingleLayerParams::gauss(c(3.0), vec![]);
        assert_relative_eq!(
            log_single_layer_closed_form(&p, &[]).unwrap().re,
            0.5 * (2.0 * std::f64::consts::PI / 3.0).ln(),
            max_relative = 1e-14
        );
        let p = SingleLayerParams::interval((1.0, 3.0), c(2.0), c(0.5), vec![]);
        let want = 1.5 * 2f64.ln() + lgr(2.0) + lgr(0.5) - lgr(2.5);
        assert_relative_eq!(
            log_single_layer_closed_form(&p, &[]).unwrap().re,
            want,
            max_relative = 1e-14
        );
    }

    #[test]
    fn integrand_checks_interlacing() {
        let p = SingleLayerParams::beta_prime(c(1.0), c(4.0), vec![c(1.0)]);
        assert!(log_single_layer_integrand(&p, &[1.0], &[0.5, 2.0]).is_ok());
        assert!(log_single_layer_integrand(&p, &[1.0], &[1.5, 2.0]).is_err());
        assert!(log_single_layer_integrand(&p, &[1.0], &[-0.5, 2.0]).is_err());
        let p = SingleLayerParams::beta_prime(c(1.0), c(1.5), vec![c(1.0)]);
        assert!(matches!(
            log_single_layer_closed_form(&p, &[1.0]),
            Err(Error::Divergent(_))
        ));
    }
}
