use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{log_one_plus_ix, xpow};
use crate::error::{Error, Result};
use crate::patterns::DomainWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(alias = "beta-prime", alias = "betaprime")]
    BetaPrime,
    #[serde(alias = "cayley")]
    Cayley,
    #[serde(alias = "trapezoid")]
    Trapezoid,
    #[serde(alias = "gamma-chain", alias = "gamma")]
    GammaChain,
    #[serde(alias = "gauss-chain", alias = "gauss")]
    GaussChain,
    #[serde(alias = "interval-beta", alias = "interval")]
    IntervalBeta,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::BetaPrime,
        Family::Cayley,
        Family::Trapezoid,
        Family::GammaChain,
        Family::GaussChain,
        Family::IntervalBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BetaPrime => "BetaPrime",
            Family::Cayley => "Cayley",
            Family::Trapezoid => "Trapezoid",
            Family::GammaChain => "GammaChain",
            Family::GaussChain => "GaussChain",
            Family::IntervalBeta => "IntervalBeta",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "betaprime" => Family::BetaPrime,
            "cayley" => Family::Cayley,
            "trapezoid" => Family::Trapezoid,
            "gammachain" | "gamma" => Family::GammaChain,
            "gausschain" | "gauss" => Family::GaussChain,
            "intervalbeta" | "interval" => Family::IntervalBeta,
            _ => return Err(Error::Parse(format!("unknown family `{s}`"))),
        })
    }
}

/// Parameters of one ultra-beta integral. All indices in the accessors are 1-based.
///
/// `theta[j-1]` holds `θ_{j1}, …, θ_{jj}` for `j = 1..n-1`. For the trapezoid
/// family rows below `m` are filled with the extension `θ = κ`,
/// `σ_j = σ_{j+1} + κ`, `τ_j = τ_{j+1} - κ`, under which the full triangle
/// integrand is the beta-prime one.
#[derive(Debug, Clone, PartialEq)]
pub struct UltraBetaParams {
    pub family: Family,
    pub n: usize,
    pub sigma: Vec<Complex64>,
    pub tau: Vec<Complex64>,
    pub theta: Vec<Vec<Complex64>>,
    pub psi: Vec<Complex64>,
    pub window: (f64, f64),
    pub m: usize,
    pub kappa: Complex64,
}

pub fn real_vec(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// `θ_{jα} = θ` for `1 ≤ α ≤ j ≤ n-1`.
pub fn uniform_theta(n: usize, theta: f64) -> Vec<Vec<Complex64>> {
    (1..n)
        .map(|j| vec![Complex64::new(theta, 0.0); j])
        .collect()
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_theta_shape(theta: &[Vec<Complex64>], first: usize, n: usize) -> Result<()> {
    if theta.len() != n.saturating_sub(first) {
        return Err(Error::Shape(format!(
            "expected θ rows {first}..{n}, got {} rows",
            theta.len()
        )));
    }
    for (i, row) in theta.iter().enumerate() {
        if row.len() != first + i {
            return Err(Error::Shape(format!(
                "θ row {} has {} entries",
                first + i,
                row.len()
            )));
        }
    }
    Ok(())
}

fn check_len(v: &[Complex64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Shape(format!(
            "{what} has {} entries, expected {n}",
            v.len()
        )));
    }
    Ok(())
}

impl UltraBetaParams {
    fn blank(family: Family, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("n must be at least 1".into()));
        }
        Ok(Self {
            family,
            n,
            sigma: Vec::new(),
            tau: Vec::new(),
            theta: Vec::new(),
            psi: Vec::new(),
            window: (0.0, f64::INFINITY),
            m: 1,
            kappa: zero(),
        })
    }

    pub fn beta_prime(
        sigma: Vec<Complex64>,
        tau: Vec<Complex64>,
        theta: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let n = sigma.len();
        let mut p = Self::blank(Family::BetaPrime, n)?;
        check_len(&tau, n, "τ")?;
        check_theta_shape(&theta, 1, n)?;
        p.sigma = sigma;
        p.tau = tau;
        p.theta = theta;
        Ok(p)
    }

    pub fn cayley(
        sigma: Vec<Complex64>,
        tau: Vec<Complex64>,
        theta: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let mut p = Self::beta_prime(sigma, tau, theta)?;
        p.family = Family::Cayley;
        p.window = (f64::NEG_INFINITY, f64::INFINITY);
        Ok(p)
    }

    /// Trapezoid with base row `m` and top row `n`. `sigma`, `tau` list rows
    /// `m..=n`; `theta` lists rows `m..n`.
    pub fn trapezoid(
        n: usize,
        m: usize,
        kappa: Complex64,
        sigma: Vec<Complex64>,
        tau: Vec<Complex64>,
        theta: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Shape(format!(
                "base row m = {m} must lie in 1..={n}"
            )));
        }
        let rows = n - m + 1;
        check_len(&sigma, rows, "σ")?;
        check_len(&tau, rows, "τ")?;
        check_theta_shape(&theta, m, n)?;
        let mut p = Self::blank(Family::Trapezoid, n)?;
        p.m = m;
        p.kappa = kappa;
        let mut full_s = vec![zero(); n];
        let mut full_t = vec![zero(); n];
        full_s[m - 1..].copy_from_slice(&sigma);
        full_t[m - 1..].copy_from_slice(&tau);
        for j in (1..m).rev() {
            full_s[j - 1] = full_s[j] + kappa;
            full_t[j - 1] = full_t[j] - kappa;
        }
        let mut full_theta: Vec<Vec<Complex64>> = (1..m).map(|j| vec![kappa; j]).collect();
        full_theta.extend(theta);
        p.sigma = full_s;
        p.tau = full_t;
        p.theta = full_theta;
        Ok(p)
    }

    pub fn gamma_chain(
        sigma: Vec<Complex64>,
        psi: Vec<Complex64>,
        theta: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let n = sigma.len();
        let mut p = Self::blank(Family::GammaChain, n)?;
        check_len(&psi, n, "ψ")?;
        check_theta_shape(&theta, 1, n)?;
        p.sigma = sigma;
        p.psi = psi;
        p.theta = theta;
        Ok(p)
    }

    pub fn gauss_chain(psi: Vec<Complex64>, theta: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = psi.len();
        let mut p = Self::blank(Family::GaussChain, n)?;
        check_theta_shape(&theta, 1, n)?;
        p.psi = psi;
        p.theta = theta;
        p.window = (f64::NEG_INFINITY, f64::INFINITY);
        Ok(p)
    }

    pub fn interval_beta(
        window: (f64, f64),
        sigma: Vec<Complex64>,
        tau: Vec<Complex64>,
        theta: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        DomainWindow::new(window.0, window.1)?;
        if !window.0.is_finite() || !window.1.is_finite() {
            return Err(Error::Domain("interval window must be finite".into()));
        }
        let mut p = Self::beta_prime(sigma, tau, theta)?;
        p.family = Family::IntervalBeta;
        p.window = window;
        Ok(p)
    }

    /// The full-triangle beta-prime parameters whose lower rows integrate out to
    /// the trapezoid.
    pub fn extended_beta_prime(&self) -> Result<Self> {
        if self.family != Family::Trapezoid {
            return Err(Error::Incompatible("only trapezoids extend".into()));
        }
        let mut p = self.clone();
        p.family = Family::BetaPrime;
        p.m = 1;
        p.kappa = zero();
        Ok(p)
    }

    /// First row that carries integration variables.
    pub fn base_row(&self) -> usize {
        if self.family == Family::Trapezoid {
            self.m
        } else {
            1
        }
    }

    pub fn domain(&self) -> DomainWindow {
        DomainWindow {
            lower: self.window.0,
            upper: self.window.1,
        }
    }

    pub fn theta_at(&self, j: usize, a: usize) -> Complex64 {
        self.theta[j - 1][a - 1]
    }

    /// `Σ_α θ_{jα}`; zero for `j = 0`.
    pub fn theta_row_sum(&self, j: usize) -> Complex64 {
        if j == 0 || j >= self.n {
            return zero();
        }
        self.theta[j - 1].iter().sum()
    }

    /// Whether every parameter is real.
    pub fn is_real(&self) -> bool {
        let all = self
            .sigma
            .iter()
            .chain(&self.tau)
            .chain(&self.psi)
            .chain(self.theta.iter().flatten())
            .chain(std::iter::once(&self.kappa));
        all.into_iter().all(|z| z.im == 0.0)
    }

    /// Log of the per-point row weight of entry `(j, a)` at `x`.
    pub fn log_point_weight(&self, j: usize, a: usize, x: f64) -> Complex64 {
        self.log_point_weight_at(j, a, x, x - self.window.0, self.window.1 - x)
    }

    /// As [`Self::log_point_weight`] with the distances to the window ends
    /// supplied by the caller, which may know them more precisely than `x` does.
    pub(crate) fn log_point_weight_at(
        &self,
        j: usize,
        a: usize,
        x: f64,
        x_lo: f64,
        x_hi: f64,
    ) -> Complex64 {
        let n = self.n;
        let top = j == n;
        let th = if top { zero() } else { self.theta_at(j, a) };
        let one = Complex64::new(1.0, 0.0);
        let (ds, dt) = if top {
            match self.family {
                Family::GaussChain => (zero(), zero()),
                Family::GammaChain => (self.sigma[n - 1] - 1.0, zero()),
                _ => (self.sigma[n - 1] - one, self.tau[n - 1] - one),
            }
        } else {
            match self.family {
                Family::GaussChain => (zero(), zero()),
                Family::GammaChain => (self.sigma[j - 1] - self.sigma[j] - th, zero()),
                _ => (
                    self.sigma[j - 1] - self.sigma[j] - th,
                    self.tau[j - 1] - self.tau[j],
                ),
            }
        };
        match self.family {
            Family::BetaPrime | Family::Trapezoid => {
                // top: λ^{σ-1}(1+λ)^{-τ}; inner: λ^{Δσ-θ}(1+λ)^{-(Δτ+θ)}
                let e_one = if top { -(dt + one) } else { -(dt + th) };
                xpow(ds, x_lo.ln()) + e_one * x.ln_1p()
            }
            Family::Cayley => {
                let lp = log_one_plus_ix(x);
                let lm = lp.conj();
                if top {
                    -self.sigma[n - 1] * lp - self.tau[n - 1] * lm
                } else {
                    (-(self.sigma[j - 1] - self.sigma[j]) - th) * lp + (-dt - th) * lm
                }
            }
            Family::GammaChain => {
                let rate = if top {
                    self.psi[n - 1]
                } else {
                    self.psi[j - 1] - self.psi[j]
                };
                xpow(ds, x_lo.ln()) - rate * x
            }
            Family::GaussChain => {
                let rate = if top {
                    self.psi[n - 1]
                } else {
                    self.psi[j - 1] - self.psi[j]
                };
                -0.5 * rate * x * x
            }
            Family::IntervalBeta => {
                let e_hi = if top { dt } else { dt - th };
                xpow(ds, x_lo.ln()) + xpow(e_hi, x_hi.ln())
            }
        }
    }

    /// Exponent of `(λ_{jb} - λ_{ja})`, `a < b`, in the integrand.
    pub fn pair_exponent(&self, j: usize, a: usize, b: usize) -> Complex64 {
        let mut e = if j == self.n {
            Complex64::new(1.0, 0.0)
        } else {
            -(self.theta_at(j, a) + self.theta_at(j, b) - 2.0)
        };
        if self.family == Family::Trapezoid && j == self.m {
            e += 2.0 * self.kappa - 1.0;
        }
        e
    }

    /// Conditions under which the integral converges absolutely.
    pub fn check_convergence(&self) -> Result<()> {
        let n = self.n;
        let first = self.base_row();
        for j in first..n {
            for a in 1..=j {
                let t = self.theta_at(j, a);
                if !(t.re > 0.0) {
                    return Err(Error::Divergent(format!(
                        "Re θ_{{{j}{a}}} > 0 fails (got {})",
                        t.re
                    )));
                }
            }
        }
        let pos = |z: Complex64, what: String| -> Result<()> {
            if z.re > 0.0 {
                Ok(())
            } else {
                Err(Error::Divergent(format!("{what} fails (margin {})", z.re)))
            }
        };
        match self.family {
            Family::BetaPrime | Family::Trapezoid => {
                if self.family == Family::Trapezoid {
                    pos(self.kappa, "Re κ > 0".into())?;
                }
                // the trapezoid is checked through its beta-prime extension
                for j in 1..=n {
                    let s = self.theta_row_sum(j - 1);
                    pos(self.sigma[j - 1], format!("Re σ_{j} > 0"))?;
                    pos(
                        self.tau[j - 1] - self.sigma[j - 1] - s,
                        format!("Re τ_{j} > Re σ_{j} + Σ_α Re θ_{{{}α}}", j - 1),
                    )?;
                }
            }
            Family::Cayley => {
                for j in 1..=n {
                    let s = self.theta_row_sum(j - 1);
                    pos(
                        self.sigma[j - 1] + self.tau[j - 1] - 1.0 - s,
                        format!("Re(σ_{j} + τ_{j}) > 1 + Σ_α Re θ_{{{}α}}", j - 1),
                    )?;
                }
            }
            Family::GammaChain => {
                for j in 1..=n {
                    pos(self.sigma[j - 1], format!("Re σ_{j} > 0"))?;
                    pos(self.psi[j - 1], format!("Re ψ_{j} > 0"))?;
                }
            }
            Family::GaussChain => {
                for j in 1..=n {
                    pos(self.psi[j - 1], format!("Re ψ_{j} > 0"))?;
                }
            }
            Family::IntervalBeta => {
                for j in 1..=n {
                    pos(self.sigma[j - 1], format!("Re σ_{j} > 0"))?;
                    pos(self.tau[j - 1], format!("Re τ_{j} > 0"))?;
                }
            }
        }
        Ok(())
    }

    /// Parameters of the first `k` rows, the law of the projected triangle.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if self.family == Family::Trapezoid {
            return Err(Error::Incompatible("trapezoids do not truncate".into()));
        }
        if k == 0 || k > self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                size: self.n,
            });
        }
        let mut p = self.clone();
        p.n = k;
        p.sigma.truncate(k);
        p.tau.truncate(k);
        p.psi.truncate(k);
        p.theta.truncate(k - 1);
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ParamsFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.into_params()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ParamsFile::from_params(self)).expect("parameter file serializes")
    }
}

/// A number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum CValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<CValue> for Complex64 {
    fn from(v: CValue) -> Self {
        match v {
            CValue::Real(x) => Complex64::new(x, 0.0),
            CValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for CValue {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            CValue::Real(z.re)
        } else {
            CValue::Pair([z.re, z.im])
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    family: Family,
    n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sigma: Vec<CValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tau: Vec<CValue>,
    #[serde(default)]
    theta: Vec<Vec<CValue>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    psi: Vec<CValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<CValue>,
}

fn cv(xs: Vec<CValue>) -> Vec<Complex64> {
    xs.into_iter().map(Complex64::from).collect()
}

fn cv2(xs: Vec<Vec<CValue>>) -> Vec<Vec<Complex64>> {
    xs.into_iter().map(cv).collect()
}

impl ParamsFile {
    fn into_params(self) -> Result<UltraBetaParams> {
        let n = self.n;
        let p = match self.family {
            Family::BetaPrime => {
                UltraBetaParams::beta_prime(cv(self.sigma), cv(self.tau), cv2(self.theta))?
            }
            Family::Cayley => {
                UltraBetaParams::cayley(cv(self.sigma), cv(self.tau), cv2(self.theta))?
            }
            Family::Trapezoid => {
                let m = self
                    .m
                    .ok_or_else(|| Error::Parse("trapezoid needs `m`".into()))?;
                let k = self
                    .kappa
                    .ok_or_else(|| Error::Parse("trapezoid needs `kappa`".into()))?;
                UltraBetaParams::trapezoid(
                    n,
                    m,
                    k.into(),
                    cv(self.sigma),
                    cv(self.tau),
                    cv2(self.theta),
                )?
            }
            Family::GammaChain => {
                UltraBetaParams::gamma_chain(cv(self.sigma), cv(self.psi), cv2(self.theta))?
            }
            Family::GaussChain => UltraBetaParams::gauss_chain(cv(self.psi), cv2(self.theta))?,
            Family::IntervalBeta => {
                let [a, b] = self
                    .window
                    .ok_or_else(|| Error::Parse("interval family needs `window`".into()))?;
                UltraBetaParams::interval_beta(
                    (a, b),
                    cv(self.sigma),
                    cv(self.tau),
                    cv2(self.theta),
                )?
            }
        };
        if p.n != n {
            return Err(Error::Shape(format!(
                "`n` = {n} but parameters describe n = {}",
                p.n
            )));
        }
        Ok(p)
    }

    fn from_params(p: &UltraBetaParams) -> Self {
        let to = |v: &[Complex64]| v.iter().map(|&z| CValue::from(z)).collect::<Vec<_>>();
        let first = p.base_row();
        let theta = p.theta[first - 1..].iter().map(|r| to(r)).collect();
        let (sigma, tau) = match p.family {
            Family::GaussChain => (Vec::new(), Vec::new()),
            Family::GammaChain => (to(&p.sigma), Vec::new()),
            _ => (to(&p.sigma[first - 1..]), to(&p.tau[first - 1..])),
        };
        let trap = p.family == Family::Trapezoid;
        Self {
            family: p.family,
            n: p.n,
            sigma,
            tau,
            theta,
            psi: to(&p.psi),
            window: (p.family == Family::IntervalBeta).then_some([p.window.0, p.window.1]),
            m: trap.then_some(p.m),
            kappa: trap.then_some(p.kappa.into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_all_families() {
        let th = uniform_theta(3, 0.5);
        let s = vec![
            Complex64::new(1.5, 0.3),
            Complex64::new(2.0, -0.1),
            Complex64::new(3.0, 0.0),
        ];
        let t: Vec<Complex64> = s.iter().map(|z| z.conj() + 4.0).collect();
        let all = vec![
            UltraBetaParams::beta_prime(s.clone(), t.clone(), th.clone()).unwrap(),
            UltraBetaParams::cayley(s.clone(), t.clone(), th.clone()).unwrap(),
            UltraBetaParams::trapezoid(
                3,
                2,
                Complex64::new(0.7, 0.0),
                s[1..].to_vec(),
                t[1..].to_vec(),
                th[1..].to_vec(),
            )
            .unwrap(),
            UltraBetaParams::gamma_chain(s.clone(), real_vec(&[1.0, 2.0, 3.0]), th.clone())
                .unwrap(),
            UltraBetaParams::gauss_chain(real_vec(&[1.0, 2.0, 3.0]), th.clone()).unwrap(),
            UltraBetaParams::interval_beta((-1.0, 2.0), s.clone(), t.clone(), th.clone()).unwrap(),
        ];
        for p in all {
            let back = UltraBetaParams::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p, "{}", p.family);
        }
    }

    #[test]
    fn json_accepts_plain_numbers_and_pairs() {
        let p = UltraBetaParams::from_json(
            r#"{"family":"BetaPrime","n":2,"sigma":[1,[1,0.5]],"tau":[4,4],"theta":[[1]]}"#,
        )
        .unwrap();
        assert_eq!(p.sigma[1], Complex64::new(1.0, 0.5));
        assert!(UltraBetaParams::from_json(r#"{"family":"Nope","n":1}"#).is_err());
        assert!(UltraBetaParams::from_json(
            r#"{"family":"BetaPrime","n":3,"sigma":[1],"tau":[2],"theta":[]}"#
        )
        .is_err());
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("gauss-chain".parse::<Family>().unwrap(), Family::GaussChain);
    }

    #[test]
    fn divergence_names_inequality() {
        let p = UltraBetaParams::beta_prime(
            real_vec(&[1.0, 1.0]),
            real_vec(&[4.0, 1.5]),
            uniform_theta(2, 1.0),
        )
        .unwrap();
        match p.check_convergence() {
            Err(Error::Divergent(msg)) => assert!(msg.contains("τ_2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
