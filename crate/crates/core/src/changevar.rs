//! Residue coordinates for a pair of interlacing rows.
//!
//! For `μ_1 < λ_1 < μ_2 < … < λ_{n-1} < μ_n` the rational function
//! `Π(x-μ_p) / Π(x-λ_α)` has the partial-fraction form
//! `x - η - Σ ξ_α / (x - λ_α)` with every `ξ_α > 0`. The forward map reads off
//! `(ξ, η)`; the inverse recovers `μ` as the spectrum of the arrowhead matrix
//! with diagonal `(λ_1, …, λ_{n-1}, η)` and border `√ξ_α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gap below which an interlacing pair is reported as near-degenerate.
pub const CONDITIONING_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AndersonCoords {
    pub xi: Vec<f64>,
    pub eta: f64,
    /// Set when two interlacing entries are closer than [`CONDITIONING_GAP`].
    #[serde(default)]
    pub near_degenerate: bool,
}

impl AndersonCoords {
    pub fn new(xi: Vec<f64>, eta: f64) -> Self {
        Self {
            xi,
            eta,
            near_degenerate: false,
        }
    }

    /// Whether `η > Σ ξ_α / λ_α`, equivalent to `μ_1 > 0` when `λ_1 > 0`.
    pub fn positive_constraint_holds(&self, lambda: &[f64]) -> bool {
        let s: f64 = self.xi.iter().zip(lambda).map(|(x, l)| x / l).sum();
        self.eta > s
    }
}

/// Coordinates from the Wishart-type reduction: `ξ'_α = ξ_α / λ_α`, `η' = Πμ/Πλ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WishartCoords {
    pub xi: Vec<f64>,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexCoords {
    pub zeta: Vec<f64>,
}

/// Checks the strict chain `outer_1 < inner_1 < outer_2 < … < outer_last`
/// where `outer` has one more entry than `inner`. Returns whether some gap is
/// below [`CONDITIONING_GAP`].
pub(crate) fn check_interlacing(outer: &[f64], inner: &[f64]) -> Result<bool> {
    if outer.len() != inner.len() + 1 {
        return Err(Error::Shape(format!(
            "interlacing rows need lengths k+1 and k, got {} and {}",
            outer.len(),
            inner.len()
        )));
    }
    let mut chain = Vec::with_capacity(outer.len() + inner.len());
    for (k, &o) in outer.iter().enumerate() {
        chain.push(o);
        if k < inner.len() {
            chain.push(inner[k]);
        }
    }
    if chain.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite entry".into()));
    }
    let mut degenerate = false;
    for w in chain.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(format!(
                "interlacing fails at {} >= {}",
                w[0], w[1]
            )));
        }
        if w[1] - w[0] < CONDITIONING_GAP * 1f64.max(w[0].abs()).max(w[1].abs()) {
            degenerate = true;
        }
    }
    Ok(degenerate)
}

/// `Π_{p<q} (x_q - x_p)` as a log; the input must be increasing.
pub(crate) fn log_vandermonde(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for q in 1..x.len() {
        for p in 0..q {
            acc += (x[q] - x[p]).ln();
        }
    }
    acc
}

/// Signed product `Π factors` accumulated as (log|·|, negative?).
fn signed_log_product(factors: impl Iterator<Item = f64>) -> (f64, bool) {
    let mut log_abs = 0.0;
    let mut neg = false;
    for f in factors {
        if f < 0.0 {
            neg = !neg;
        }
        log_abs += f.abs().ln();
    }
    (log_abs, neg)
}

/// `μ ↦ (ξ, η)`.
pub fn anderson_forward(mu: &[f64], lambda: &[f64]) -> Result<AndersonCoords> {
    let degenerate = check_interlacing(mu, lambda)?;
    let xi = (0..lambda.len())
        .map(|a| {
            let la = lambda[a];
            let (num, num_neg) = signed_log_product(mu.iter().map(|m| m - la));
            let (den, den_neg) = signed_log_product(
                lambda
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .map(|(_, lb)| lb - la),
            );
            // ξ = -num/den
            let v = (num - den).exp();
            if num_neg ^ den_neg {
                v
            } else {
                -v
            }
        })
        .collect();
    let eta = mu.iter().sum::<f64>() - lambda.iter().sum::<f64>();
    Ok(AndersonCoords {
        xi,
        eta,
        near_degenerate: degenerate,
    })
}

/// `(ξ, η) ↦ μ`: the `n` roots of `x - η - Σ ξ_α/(x-λ_α)`, i.e. the eigenvalues of
/// the arrowhead matrix `[[diag λ, √ξ], [√ξᵀ, η]]`. Zero `ξ_α` deflates to a
/// root pinned at `λ_α`.
pub fn anderson_inverse(coords: &AndersonCoords, lambda: &[f64]) -> Result<Vec<f64>> {
    if coords.xi.len() != lambda.len() {
        return Err(Error::Shape(format!(
            "{} ξ values for {} λ values",
            coords.xi.len(),
            lambda.len()
        )));
    }
    for (a, &x) in coords.xi.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("ξ_{} = {x} is not positive", a + 1)));
        }
    }
    for w in lambda.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain("λ must be strictly increasing".into()));
        }
    }
    Ok(arrowhead_eigenvalues(lambda, &coords.xi, coords.eta))
}

/// Eigenvalues, ascending, of the symmetric arrowhead matrix with diagonal
/// `(diag, corner)` and border `√weights`. `diag` must be strictly increasing
/// and `weights` nonnegative.
pub fn arrowhead_eigenvalues(diag: &[f64], weights: &[f64], corner: f64) -> Vec<f64> {
    let mut roots = Vec::with_capacity(diag.len() + 1);
    let mut poles = Vec::with_capacity(diag.len());
    let mut resid = Vec::with_capacity(diag.len());
    for (&d, &w) in diag.iter().zip(weights) {
        if w == 0.0 {
            roots.push(d);
        } else {
            poles.push(d);
            resid.push(w);
        }
    }
    let secular = |x: f64| -> (f64, f64) {
        let mut f = x - corner;
        let mut df = 1.0;
        for (&p, &r) in poles.iter().zip(&resid) {
            let inv = 1.0 / (x - p);
            f -= r * inv;
            df += r * inv * inv;
        }
        (f, df)
    };
    if poles.is_empty() {
        roots.push(corner);
    } else {
        let k = poles.len();
        let spread = 1.0
            + (poles[k - 1] - poles[0]).abs()
            + (corner - poles[0]).abs()
            + resid.iter().sum::<f64>().sqrt();
        // below the first pole
        let mut step = spread;
        let mut lo = poles[0] - step;
        while secular(lo).0 >= 0.0 {
            step *= 2.0;
            lo = poles[0] - step;
        }
        roots.push(bracketed_root(&secular, lo, poles[0]));
        for w in poles.windows(2) {
            roots.push(bracketed_root(&secular, w[0], w[1]));
        }
        let mut step = spread;
        let mut hi = poles[k - 1] + step;
        while secular(hi).0 <= 0.0 {
            step *= 2.0;
            hi = poles[k - 1] + step;
        }
        roots.push(bracketed_root(&secular, poles[k - 1], hi));
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Root of an increasing function on the open interval `(lo, hi)`, safeguarded Newton.
fn bracketed_root(f: &impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let newton = x - fx / dfx;
        x = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            mid
        };
        if (hi - lo) <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    // interior point guaranteed
    if x <= lo || x >= hi {
        0.5 * (lo + hi)
    } else {
        x
    }
}

/// `Π_{p<q}(μ_q-μ_p) / Π_{α<β}(λ_β-λ_α)`, the volume factor of the forward map.
pub fn anderson_jacobian(mu: &[f64], lambda: &[f64]) -> Result<f64> {
    check_interlacing(mu, lambda)?;
    Ok((log_vandermonde(mu) - log_vandermonde(lambda)).exp())
}

/// Both sides of `Π(μ_p+a) = Π(λ_α+a)·{a + η - Σ ξ_α/(λ_α+a)}`.
pub fn linear_factor_identity(
    mu: &[f64],
    lambda: &[f64],
    coords: &AndersonCoords,
    a: f64,
) -> Result<(f64, f64)> {
    if lambda.iter().any(|&l| l + a == 0.0) {
        return Err(Error::Singular(format!("a = -λ_α = {a}")));
    }
    let lhs = mu.iter().map(|m| m + a).product();
    let brace = a + coords.eta
        - coords
            .xi
            .iter()
            .zip(lambda)
            .map(|(x, l)| x / (l + a))
            .sum::<f64>();
    let rhs = lambda.iter().map(|l| l + a).product::<f64>() * brace;
    Ok((lhs, rhs))
}

/// Both sides of `Σμ² = Σλ² + 2Σξ + η²`.
pub fn sum_of_squares_identity(mu: &[f64], lambda: &[f64], coords: &AndersonCoords) -> (f64, f64) {
    let lhs = mu.iter().map(|m| m * m).sum();
    let rhs = lambda.iter().map(|l| l * l).sum::<f64>()
        + 2.0 * coords.xi.iter().sum::<f64>()
        + coords.eta * coords.eta;
    (lhs, rhs)
}

/// Coordinates of the rank-one update `diag(λ) + x x*`-type reduction:
/// `ξ'_α = ξ_α/λ_α` and `η' = Πμ_p / Πλ_β`.
pub fn wishart_coords(mu: &[f64], lambda: &[f64]) -> Result<WishartCoords> {
    if lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Domain("λ must be positive".into()));
    }
    if mu.first().is_some_and(|&m| m < 0.0) {
        return Err(Error::Domain("μ must be nonnegative".into()));
    }
    let base = anderson_forward(mu, lambda)?;
    let xi = base.xi.iter().zip(lambda).map(|(x, l)| x / l).collect();
    let eta = mu.iter().product::<f64>() / lambda.iter().product::<f64>();
    Ok(WishartCoords { xi, eta })
}

/// `λ ↦ ζ` with `ζ_p = Π_α(λ_α-μ_p) / Π_{q≠p}(μ_q-μ_p)`; `λ` has `n`, `μ` has `n+1` entries.
pub fn simplex_forward(lambda: &[f64], mu: &[f64]) -> Result<SimplexCoords> {
    check_interlacing(mu, lambda)?;
    let zeta = (0..mu.len())
        .map(|p| {
            let mp = mu[p];
            let (num, nn) = signed_log_product(lambda.iter().map(|l| l - mp));
            let (den, dn) = signed_log_product(
                mu.iter()
                    .enumerate()
                    .filter(|(q, _)| *q != p)
                    .map(|(_, mq)| mq - mp),
            );
            let v = (num - den).exp();
            if nn ^ dn {
                -v
            } else {
                v
            }
        })
        .collect();
    Ok(SimplexCoords { zeta })
}

/// `|Π_{α<β}(λ_β-λ_α) / Π_{p<q}(μ_q-μ_p)|`, Jacobian of `λ ↦ (ζ_1, …, ζ_n)`.
pub fn simplex_jacobian(lambda: &[f64], mu: &[f64]) -> Result<f64> {
    check_interlacing(mu, lambda)?;
    Ok((log_vandermonde(lambda) - log_vandermonde(mu)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const S2: f64 = std::f64::consts::SQRT_2;

    /// Random strictly interlacing pair (μ of n, λ of n-1).
    pub(crate) fn random_pair(
        rng: &mut ChaCha8Rng,
        n: usize,
        lo: f64,
        hi: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        loop {
            let mut pts: Vec<f64> = (0..2 * n - 1).map(|_| rng.random_range(lo..hi)).collect();
            pts.sort_by(f64::total_cmp);
            if pts
                .windows(2)
                .all(|w| w[1] - w[0] > 1e-3 * (hi - lo) / n as f64)
            {
                let mu = pts.iter().step_by(2).copied().collect();
                let la = pts.iter().skip(1).step_by(2).copied().collect();
                return (mu, la);
            }
        }
    }

    #[test]
    fn forward_examples() {
        let c = anderson_forward(&[-1.0, 1.0], &[0.0]).unwrap();
        assert_relative_eq!(c.xi[0], 1.0);
        assert_eq!(c.eta, 0.0);
        let c = anderson_forward(&[2.0 - S2, 2.0 + S2], &[1.0]).unwrap();
        assert_relative_eq!(c.xi[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.eta, 3.0, max_relative = 1e-14);
        assert!(matches!(
            anderson_forward(&[0.0, 0.5], &[1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inverse_examples() {
        let mu = anderson_inverse(&AndersonCoords::new(vec![1.0], 0.0), &[0.0]).unwrap();
        assert_relative_eq!(mu[0], -1.0, max_relative = 1e-15);
        assert_relative_eq!(mu[1], 1.0, max_relative = 1e-15);
        let mu = anderson_inverse(&AndersonCoords::new(vec![1.0], 3.0), &[1.0]).unwrap();
        assert_relative_eq!(mu[0], 2.0 - S2, max_relative = 1e-14);
        assert_relative_eq!(mu[1], 2.0 + S2, max_relative = 1e-14);
        assert!(anderson_inverse(&AndersonCoords::new(vec![-1.0], 0.0), &[0.0]).is_err());
    }

    #[test]
    fn deflation_pins_root() {
        let mu = anderson_inverse(&AndersonCoords::new(vec![0.0, 1.0], 0.5), &[0.0, 2.0]).unwrap();
        assert_eq!(mu.len(), 3);
        assert_eq!(mu[1], 0.0);
        assert!(mu[0] < 0.0 && mu[2] > 2.0);
    }

    #[test]
    fn arrowhead_matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(2..7);
            let (_, la) = random_pair(&mut rng, n, -5.0, 5.0);
            let xi: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.01..3.0)).collect();
            let eta = rng.random_range(-3.0..3.0);
            let mut m = DMatrix::zeros(n, n);
            for a in 0..n - 1 {
                m[(a, a)] = la[a];
                m[(a, n - 1)] = xi[a].sqrt();
                m[(n - 1, a)] = xi[a].sqrt();
            }
            m[(n - 1, n - 1)] = eta;
            let mut dense: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            dense.sort_by(f64::total_cmp);
            let ours = arrowhead_eigenvalues(&la, &xi, eta);
            for (a, b) in ours.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10, "{ours:?} vs {dense:?}");
            }
        }
    }

    #[test]
    fn jacobian_examples() {
        assert_relative_eq!(anderson_jacobian(&[-1.0, 1.0], &[0.0]).unwrap(), 2.0);
        assert_relative_eq!(
            anderson_jacobian(&[0.0, 1.0, 3.0], &[0.5, 2.0]).unwrap(),
            4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn identity_examples() {
        let c = AndersonCoords::new(vec![1.0], 0.0);
        assert_eq!(
            linear_factor_identity(&[-1.0, 1.0], &[0.0], &c, 2.0).unwrap(),
            (3.0, 3.0)
        );
        assert_eq!(
            linear_factor_identity(&[-1.0, 1.0], &[0.0], &c, 1.0).unwrap(),
            (0.0, 0.0)
        );
        assert!(linear_factor_identity(&[-1.0, 1.0], &[0.0], &c, 0.0).is_err());
        assert_eq!(
            sum_of_squares_identity(&[-1.0, 1.0], &[0.0], &c),
            (2.0, 2.0)
        );
        let mu = [2.0 - S2, 2.0 + S2];
        let c = anderson_forward(&mu, &[1.0]).unwrap();
        let (l, r) = sum_of_squares_identity(&mu, &[1.0], &c);
        assert_relative_eq!(l, 12.0, max_relative = 1e-14);
        assert_relative_eq!(r, 12.0, max_relative = 1e-14);
    }

    #[test]
    fn wishart_examples() {
        let w = wishart_coords(&[2.0 - S2, 2.0 + S2], &[1.0]).unwrap();
        assert_relative_eq!(w.xi[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(w.eta, 2.0, max_relative = 1e-14);
        let w = wishart_coords(&[0.0, 3.0], &[1.0]).unwrap();
        assert_eq!(w.eta, 0.0);
    }

    #[test]
    fn simplex_examples() {
        let z = simplex_forward(&[1.0], &[0.0, 2.0]).unwrap();
        assert_relative_eq!(z.zeta[0], 0.5);
        assert_relative_eq!(z.zeta[1], 0.5);
        let z = simplex_forward(&[1.0, 3.0], &[0.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(z.zeta[0], 3.0 / 8.0, max_relative = 1e-14);
        assert_relative_eq!(z.zeta[1], 0.25, max_relative = 1e-14);
        assert_relative_eq!(z.zeta[2], 3.0 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn positivity_constraint_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [false, false];
        for _ in 0..2000 {
            let n = rng.random_range(2..6);
            // λ positive, μ_1 of either sign
            let (mut mu, la) = random_pair(&mut rng, n, 0.0, 10.0);
            mu[0] = la[0] - rng.random_range(0.01..3.0) * la[0].max(0.1) * 2.0;
            let c = anderson_forward(&mu, &la).unwrap();
            assert_eq!(mu[0] > 0.0, c.positive_constraint_holds(&la));
            seen[(mu[0] > 0.0) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    /// Central-difference Jacobian matrix of the forward map.
    fn fd_jacobian(mu: &[f64], la: &[f64]) -> f64 {
        let n = mu.len();
        let h = 1e-6 * mu.iter().chain(la).fold(1f64, |m, x| m.max(x.abs()));
        let mut jac = DMatrix::zeros(n, n);
        for p in 0..n {
            let mut up = mu.to_vec();
            let mut dn = mu.to_vec();
            up[p] += h;
            dn[p] -= h;
            let cu = anderson_forward(&up, la).unwrap();
            let cd = anderson_forward(&dn, la).unwrap();
            for a in 0..n - 1 {
                jac[(a, p)] = (cu.xi[a] - cd.xi[a]) / (2.0 * h);
            }
            jac[(n - 1, p)] = (cu.eta - cd.eta) / (2.0 * h);
        }
        jac.determinant().abs()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(2..6);
            let (mu, la) = random_pair(&mut rng, n, -4.0, 4.0);
            let exact = anderson_jacobian(&mu, &la).unwrap();
            let fd = fd_jacobian(&mu, &la);
            assert!((fd - exact).abs() < 1e-6 * exact, "{fd} vs {exact}");
        }
    }
}
