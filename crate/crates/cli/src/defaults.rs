//! Parameter sets used when no `--params` file is given.

use ultrabeta::integrands::{real_vec, uniform_theta, Family, UltraBetaParams};
use ultrabeta::{Complex64, Result};

fn constant(n: usize, x: f64) -> Vec<Complex64> {
    vec![Complex64::new(x, 0.0); n]
}

/// A convergent parameter set of depth `n` for `family` with `θ ≡ theta`.
pub fn default_params(family: Family, n: usize, theta: f64) -> Result<UltraBetaParams> {
    let th = uniform_theta(n, theta);
    match family {
        Family::BetaPrime => {
            let tau: Vec<f64> = (1..=n).map(|j| 3.0 + theta * j as f64).collect();
            UltraBetaParams::beta_prime(constant(n, 1.5), real_vec(&tau), th)
        }
        Family::Cayley => {
            let sigma: Vec<Complex64> = (1..=n)
                .map(|j| Complex64::new(1.5 + theta * j as f64, 0.3))
                .collect();
            let tau = sigma.iter().map(|s| s.conj()).collect();
            UltraBetaParams::cayley(sigma, tau, th)
        }
        Family::GammaChain => UltraBetaParams::gamma_chain(constant(n, 1.5), constant(n, 1.0), th),
        Family::GaussChain => UltraBetaParams::gauss_chain(constant(n, 1.0), th),
        Family::IntervalBeta => {
            UltraBetaParams::interval_beta((0.0, 1.0), constant(n, 1.5), constant(n, 1.5), th)
        }
        Family::Trapezoid => {
            let m = n.saturating_sub(1).max(1);
            let rows = n - m + 1;
            let tau: Vec<f64> = (m..=n).map(|j| 3.0 + theta * (n + j) as f64).collect();
            let th = (m..n).map(|j| constant(j, theta)).collect();
            UltraBetaParams::trapezoid(
                n,
                m,
                Complex64::new(theta, 0.0),
                constant(rows, 1.5),
                real_vec(&tau),
                th,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_converge() {
        for family in Family::ALL {
            for n in 1..=6 {
                for theta in [0.5, 1.0, 2.0] {
                    let p = default_params(family, n, theta).unwrap();
                    p.check_convergence()
                        .unwrap_or_else(|e| panic!("{family} n={n} θ={theta}: {e}"));
                }
            }
        }
    }
}
