//! Exact sequential samplers of Rayleigh triangles.
//!
//! The conditional law of row `j+1` given rows `1..=j` depends only on row
//! `j`. In Anderson coordinates it factorizes into independent gamma-type
//! variables, so a new row is drawn by sampling `(u, v)`, mapping to `(ξ, η)`
//! and solving the secular equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changevar::{anderson_inverse, AndersonCoords};
use crate::error::{Error, Result};
use crate::integrands::{
    log_closed_form, log_single_layer_closed_form, log_single_layer_integrand,
    log_trapezoid_integrand, Family, SingleLayerParams, UltraBetaParams,
};
use crate::patterns::{RayleighTrapezoid, RayleighTriangle};

/// Rejection attempts allowed per Pearson IV draw.
pub const RETRY_CAP: usize = 10_000;

/// The `(u, v_α)` variables in which a conditional row law factorizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCoords {
    pub u: f64,
    pub v: Vec<f64>,
}

/// Density `∝ (1+t²)^{-a} exp(2b·atan t)` on the real line, `a > 1/2`, by
/// rejection from a Student-t with the same power tail.
#[derive(Debug, Clone)]
pub struct PearsonIv {
    a: f64,
    b: f64,
    loc: f64,
    scale: f64,
    student: StudentT<f64>,
    log_bound: f64,
}

impl PearsonIv {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.5) || !b.is_finite() {
            return Err(Error::Divergent(format!(
                "Pearson IV needs a > 1/2 (got a = {a})"
            )));
        }
        let df = 2.0 * a - 1.0;
        let student = StudentT::new(df).map_err(|e| Error::Domain(e.to_string()))?;
        let mode = b / a;
        let width = ((1.0 + mode * mode) / (2.0 * a)).sqrt();
        // the expected number of proposals is ∝ scale·e^{bound}; pick the best
        // location and scale from a small grid
        let mut best: Option<(f64, Self)> = None;
        for shift in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            for k in -8..=8 {
                let scale = width * (0.25 * k as f64).exp();
                let mut p = Self {
                    a,
                    b,
                    loc: mode + shift * width,
                    scale,
                    student,
                    log_bound: 0.0,
                };
                p.log_bound = p.sup_log_ratio();
                let cost = p.log_bound + scale.ln();
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, p));
                }
            }
        }
        Ok(best.expect("grid is nonempty").1)
    }

    fn log_target(&self, t: f64) -> f64 {
        -self.a * t.mul_add(t, 1.0).ln() + 2.0 * self.b * t.atan()
    }

    fn log_ratio(&self, t: f64) -> f64 {
        let df = 2.0 * self.a - 1.0;
        let z = (t - self.loc) / self.scale;
        self.log_target(t) + 0.5 * (df + 1.0) * (z * z / df).ln_1p()
    }

    /// Supremum of the target/envelope log ratio: a grid over the whole line
    /// in `atan` coordinates, golden-section refinement, and the two limits.
    fn sup_log_ratio(&self) -> f64 {
        let df = 2.0 * self.a - 1.0;
        let tail = -2.0 * self.a * self.scale.ln() - self.a * df.ln();
        let mut best =
            (tail + self.b * std::f64::consts::PI).max(tail - self.b * std::f64::consts::PI);
        let k = 4000;
        let at = |phi: f64| self.loc + self.scale * phi.tan();
        let step = std::f64::consts::PI / k as f64;
        let mut arg = 0.0;
        let mut grid_best = f64::NEG_INFINITY;
        for i in 0..k {
            let phi = -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * step;
            let r = self.log_ratio(at(phi));
            if r > grid_best {
                grid_best = r;
                arg = phi;
            }
        }
        let (mut lo, mut hi) = (arg - step, arg + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if self.log_ratio(at(x1)) > self.log_ratio(at(x2)) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        best = best.max(grid_best).max(self.log_ratio(at(0.5 * (lo + hi))));
        best + 1e-6
    }

    /// One draw and the number of proposals it took.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, usize)> {
        for tries in 1..=RETRY_CAP {
            let t = self.loc + self.scale * self.student.sample(rng);
            let u: f64 = rng.random();
            if u.ln() < self.log_ratio(t) - self.log_bound {
                return Ok((t, tries));
            }
        }
        Err(Error::RetryCap(RETRY_CAP))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.sample_counted(rng).map(|(t, _)| t)
    }
}

/// Law of one new row given the previous one.
#[derive(Debug, Clone)]
enum RowLaw {
    BetaPrime { sigma: f64, tau: f64 },
    Cayley { a: f64, pearson: PearsonIv },
    Gamma { sigma: f64, psi: f64 },
    Gauss { psi: f64 },
    Interval { sigma: f64, tau: f64 },
}

fn gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    let g =
        Gamma::new(shape, 1.0).map_err(|e| Error::Domain(format!("gamma shape {shape}: {e}")))?;
    Ok(g.sample(rng))
}

/// A validated chain: exact sampler and density for one parameter set.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    params: UltraBetaParams,
    /// Beta-prime chain the trapezoid is cut from.
    chain: UltraBetaParams,
    theta: Vec<Vec<f64>>,
    laws: Vec<RowLaw>,
}

impl ChainSpec {
    pub fn new(params: UltraBetaParams) -> Result<Self> {
        params.check_convergence()?;
        let chain = if params.family == Family::Trapezoid {
            params.extended_beta_prime()?
        } else {
            params.clone()
        };
        let n = chain.n;
        let real = |z: num_complex::Complex64, what: &str| {
            if z.im == 0.0 {
                Ok(z.re)
            } else {
                Err(Error::Incompatible(format!(
                    "{what} must be real for sampling"
                )))
            }
        };
        let theta = (1..n)
            .map(|j| {
                (1..=j)
                    .map(|a| real(chain.theta_at(j, a), "θ"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut laws = Vec::with_capacity(n);
        for j in 0..n {
            let law = match chain.family {
                Family::BetaPrime | Family::Trapezoid => RowLaw::BetaPrime {
                    sigma: real(chain.sigma[j], "σ")?,
                    tau: real(chain.tau[j], "τ")?,
                },
                Family::Cayley => {
                    let (s, t) = (chain.sigma[j], chain.tau[j]);
                    if (s.conj() - t).norm() > 1e-12 * (1.0 + s.norm()) {
                        return Err(Error::Incompatible(
                            "Cayley sampling needs τ_j = conj σ_j".into(),
                        ));
                    }
                    RowLaw::Cayley {
                        a: s.re,
                        pearson: PearsonIv::new(s.re, s.im)?,
                    }
                }
                Family::GammaChain => RowLaw::Gamma {
                    sigma: real(chain.sigma[j], "σ")?,
                    psi: real(chain.psi[j], "ψ")?,
                },
                Family::GaussChain => RowLaw::Gauss {
                    psi: real(chain.psi[j], "ψ")?,
                },
                Family::IntervalBeta => RowLaw::Interval {
                    sigma: real(chain.sigma[j], "σ")?,
                    tau: real(chain.tau[j], "τ")?,
                },
            };
            laws.push(law);
        }
        Ok(Self {
            params,
            chain,
            theta,
            laws,
        })
    }

    pub fn params(&self) -> &UltraBetaParams {
        &self.params
    }

    pub fn depth(&self) -> usize {
        self.chain.n
    }

    /// `λ_{11}` from the one-point marginal.
    pub fn sample_first_row<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.extend_row(&[], rng)?[0])
    }

    /// Draws the `(u, v)` variables of the row following `row`.
    pub fn sample_dirichlet<R: Rng + ?Sized>(
        &self,
        row: &[f64],
        rng: &mut R,
    ) -> Result<DirichletCoords> {
        let j = row.len();
        if j >= self.depth() {
            return Err(Error::IndexOutOfRange {
                index: j + 1,
                size: self.depth(),
            });
        }
        let th: &[f64] = if j == 0 { &[] } else { &self.theta[j - 1] };
        let s: f64 = th.iter().sum();
        let coords = match &self.laws[j] {
            RowLaw::BetaPrime { sigma, tau } => {
                let g0 = gamma(tau - sigma - s, rng)?;
                let u = gamma(*sigma, rng)? / g0;
                let v = th
                    .iter()
                    .map(|&t| gamma(t, rng).map(|g| g / g0))
                    .collect::<Result<_>>()?;
                DirichletCoords { u, v }
            }
            RowLaw::Cayley { a, pearson } => {
                let g0 = gamma(2.0 * a - 1.0 - s, rng)?;
                let v: Vec<f64> = th
                    .iter()
                    .map(|&t| gamma(t, rng).map(|g| g / g0))
                    .collect::<Result<_>>()?;
                let t = pearson.sample(rng)?;
                DirichletCoords {
                    u: (1.0 + v.iter().sum::<f64>()) * t,
                    v,
                }
            }
            RowLaw::Gamma { sigma, psi } => {
                let u = gamma(*sigma, rng)? / psi;
                let v = th
                    .iter()
                    .map(|&t| gamma(t, rng).map(|g| g / psi))
                    .collect::<Result<_>>()?;
                DirichletCoords { u, v }
            }
            RowLaw::Gauss { psi } => {
                let z: f64 = StandardNormal.sample(rng);
                let v = th
                    .iter()
                    .map(|&t| gamma(t, rng).map(|g| g / psi))
                    .collect::<Result<_>>()?;
                DirichletCoords {
                    u: z / psi.sqrt(),
                    v,
                }
            }
            RowLaw::Interval { sigma, tau } => {
                let gu = gamma(*sigma, rng)?;
                let gv: Vec<f64> = th.iter().map(|&t| gamma(t, rng)).collect::<Result<_>>()?;
                let total = gu + gv.iter().sum::<f64>() + gamma(*tau, rng)?;
                DirichletCoords {
                    u: gu / total,
                    v: gv.into_iter().map(|g| g / total).collect(),
                }
            }
        };
        Ok(coords)
    }

    /// Anderson coordinates of the new row from its `(u, v)` variables.
    pub fn to_anderson(&self, row: &[f64], d: &DirichletCoords) -> AndersonCoords {
        let (lo, hi) = self.chain.window;
        let (xi, eta) = match self.laws[row.len()] {
            RowLaw::BetaPrime { .. } => {
                let xi = row
                    .iter()
                    .zip(&d.v)
                    .map(|(&l, &v)| v * l * (1.0 + l))
                    .collect();
                (
                    xi,
                    d.u + row
                        .iter()
                        .zip(&d.v)
                        .map(|(&l, &v)| v * (1.0 + l))
                        .sum::<f64>(),
                )
            }
            RowLaw::Cayley { .. } => {
                let xi = row
                    .iter()
                    .zip(&d.v)
                    .map(|(&l, &v)| v * l.mul_add(l, 1.0))
                    .collect();
                (
                    xi,
                    d.u + row.iter().zip(&d.v).map(|(&l, &v)| v * l).sum::<f64>(),
                )
            }
            RowLaw::Gamma { .. } => {
                let xi = row.iter().zip(&d.v).map(|(&l, &v)| v * l).collect();
                (xi, d.u + d.v.iter().sum::<f64>())
            }
            RowLaw::Gauss { .. } => (d.v.clone(), d.u),
            RowLaw::Interval { .. } => {
                // computed on the unit interval, scaled back by the caller
                let w = hi - lo;
                let xi = row
                    .iter()
                    .zip(&d.v)
                    .map(|(&l, &v)| {
                        let y = (l - lo) / w;
                        v * y * (1.0 - y)
                    })
                    .collect();
                (
                    xi,
                    d.u + row
                        .iter()
                        .zip(&d.v)
                        .map(|(&l, &v)| v * (1.0 - (l - lo) / w))
                        .sum::<f64>(),
                )
            }
        };
        AndersonCoords::new(xi, eta)
    }

    /// Draws row `j+1` given row `j`. An empty `row` gives the first row.
    pub fn extend_row<R: Rng + ?Sized>(&self, row: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let d = self.sample_dirichlet(row, rng)?;
        let coords = self.to_anderson(row, &d);
        let (lo, hi) = self.chain.window;
        let mut next = if let RowLaw::Interval { .. } = self.laws[row.len()] {
            let w = hi - lo;
            let unit: Vec<f64> = row.iter().map(|&l| (l - lo) / w).collect();
            anderson_inverse(&coords, &unit)?
                .into_iter()
                .map(|y| lo + w * y.clamp(0.0, 1.0))
                .collect()
        } else {
            anderson_inverse(&coords, row)?
        };
        for x in next.iter_mut() {
            *x = x.clamp(lo, hi);
        }
        Ok(next)
    }

    /// All `n` rows of the chain.
    pub fn sample_rows<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.depth());
        for _ in 0..self.depth() {
            let next = self.extend_row(rows.last().map_or(&[][..], |r| &r[..]), rng)?;
            rows.push(next);
        }
        Ok(rows)
    }

    pub fn sample_triangle<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RayleighTriangle> {
        RayleighTriangle::new(self.sample_rows(rng)?)
    }

    /// Rows `m..=n` of the extended chain, for trapezoid parameters.
    pub fn sample_trapezoid<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RayleighTrapezoid> {
        if self.params.family != Family::Trapezoid {
            return Err(Error::Incompatible(
                "trapezoid samples need the Trapezoid family".into(),
            ));
        }
        let m = self.params.m;
        let rows = self.sample_rows(rng)?;
        RayleighTrapezoid::new(m, rows[m - 1..].to_vec())
    }

    /// Log density of the chain at a triangle.
    pub fn log_density(&self, tri: &RayleighTriangle) -> Result<f64> {
        log_chain_density(&self.chain, tri)
    }
}

fn layer_params(p: &UltraBetaParams, j: usize) -> SingleLayerParams {
    let theta: Vec<_> = (1..j).map(|a| p.theta_at(j - 1, a)).collect();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let s = p.sigma.get(j - 1).copied().unwrap_or(zero);
    let t = p.tau.get(j - 1).copied().unwrap_or(zero);
    match p.family {
        Family::BetaPrime | Family::Trapezoid => SingleLayerParams::beta_prime(s, t, theta),
        Family::Cayley => SingleLayerParams::cayley(s, t, theta),
        Family::GammaChain => SingleLayerParams::gamma(s, p.psi[j - 1], theta),
        Family::GaussChain => SingleLayerParams::gauss(p.psi[j - 1], theta),
        Family::IntervalBeta => SingleLayerParams::interval(p.window, s, t, theta),
    }
}

/// Log of the normalized chain density at `tri`, the product of the
/// one-point marginal and the conditional row laws. For the Trapezoid family
/// this is the density of the full beta-prime chain it extends to.
pub fn log_chain_density(params: &UltraBetaParams, tri: &RayleighTriangle) -> Result<f64> {
    if params.family == Family::Trapezoid {
        return log_chain_density(&params.extended_beta_prime()?, tri);
    }
    if tri.size() != params.n {
        return Err(Error::Shape(format!(
            "triangle of size {} for n = {}",
            tri.size(),
            params.n
        )));
    }
    let rows = tri.rows();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for j in 1..=params.n {
        let layer = layer_params(params, j);
        let fixed: &[f64] = if j == 1 { &[] } else { &rows[j - 2] };
        acc += log_single_layer_integrand(&layer, fixed, &rows[j - 1])?
            - log_single_layer_closed_form(&layer, fixed)?;
    }
    Ok(acc.re)
}

/// Log density of the trapezoid marginal of the chain.
pub fn log_trapezoid_density(params: &UltraBetaParams, trap: &RayleighTrapezoid) -> Result<f64> {
    Ok((log_trapezoid_integrand(params, trap)? - log_closed_form(params)?).re)
}

/// Stream `i` of `seed`, used for triangle `i` of a batch.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_triangle(spec: &ChainSpec, seed: u64) -> Result<RayleighTriangle> {
    spec.sample_triangle(&mut stream_rng(seed, 0))
}

/// `count` triangles; triangle `i` uses stream `i`, so the output does not
/// depend on the thread count.
pub fn sample_many(spec: &ChainSpec, count: usize, seed: u64) -> Result<Vec<RayleighTriangle>> {
    (0..count)
        .into_par_iter()
        .map(|i| spec.sample_triangle(&mut stream_rng(seed, i as u64)))
        .collect()
}

/// One triangle per line as JSON rows.
pub fn to_ndjson(tris: &[RayleighTriangle]) -> String {
    let mut out = String::new();
    for t in tris {
        out.push_str(&t.to_json());
        out.push('\n');
    }
    out
}
