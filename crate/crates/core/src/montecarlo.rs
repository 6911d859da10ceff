//! Estimates with error bars, importance sampling and two-sample tests.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrands::{
    log_selberg_integrand, log_trapezoid_integrand, log_ultra_integrand, Family, UltraBetaParams,
};
use crate::patterns::{RayleighTrapezoid, RayleighTriangle};
use crate::sampler::{log_trapezoid_density, stream_rng, ChainSpec};
use crate::special::ln_gamma;

/// A numerical estimate with its error bar. `se` is the standard error for
/// Monte Carlo and the refinement difference for quadrature; it is `None` when
/// it cannot be computed (a single sample).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub se: Option<f64>,
    pub n: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub diag: BTreeMap<String, serde_json::Value>,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// `|value - truth| / |truth|`.
    pub fn rel_error(&self, truth: f64) -> f64 {
        (self.value - truth).abs() / truth.abs()
    }
}

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 100;

/// A distribution that can be sampled and whose log density is known.
pub trait Proposal: Sync {
    type Point: Send;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Self::Point>;
    fn log_density(&self, x: &Self::Point) -> Result<f64>;
}

impl Proposal for ChainSpec {
    type Point = RayleighTriangle;

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<RayleighTriangle> {
        self.sample_triangle(rng)
    }

    fn log_density(&self, x: &RayleighTriangle) -> Result<f64> {
        ChainSpec::log_density(self, x)
    }
}

/// Trapezoid marginal of a chain.
pub struct TrapezoidProposal(pub ChainSpec);

impl Proposal for TrapezoidProposal {
    type Point = RayleighTrapezoid;

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<RayleighTrapezoid> {
        self.0.sample_trapezoid(rng)
    }

    fn log_density(&self, x: &RayleighTrapezoid) -> Result<f64> {
        log_trapezoid_density(self.0.params(), x)
    }
}

/// `n` independent beta-prime(a, b) points, sorted: density `n! Π p(x_i)` on
/// the ordered cone.
#[derive(Debug, Clone)]
pub struct SortedBetaPrime {
    n: usize,
    a: f64,
    b: f64,
    log_norm: f64,
}

impl SortedBetaPrime {
    pub fn new(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Domain("beta-prime shapes must be positive".into()));
        }
        let log_norm =
            ln_gamma(n as f64 + 1.0)? + n as f64 * (ln_gamma(a + b)? - ln_gamma(a)? - ln_gamma(b)?);
        Ok(Self { n, a, b, log_norm })
    }
}

impl Proposal for SortedBetaPrime {
    type Point = Vec<f64>;

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let ga = Gamma::new(self.a, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let gb = Gamma::new(self.b, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let mut x: Vec<f64> = (0..self.n)
            .map(|_| ga.sample(rng) / gb.sample(rng))
            .collect();
        x.sort_by(f64::total_cmp);
        Ok(x)
    }

    fn log_density(&self, x: &Vec<f64>) -> Result<f64> {
        let each: f64 = x
            .iter()
            .map(|&v| (self.a - 1.0) * v.ln() - (self.a + self.b) * v.ln_1p())
            .sum();
        Ok(self.log_norm + each)
    }
}

#[derive(Default)]
struct Batch {
    n: u64,
    sum: f64,
    sum_sq: f64,
    sum_im: f64,
}

/// Importance-sampling estimate of `∫ exp(log_target)`. Samples are split into
/// [`BATCHES`] batches, batch `b` drawing from stream `b` of `seed`, and
/// reduced in batch order.
pub fn importance_estimate<P, F>(
    proposal: &P,
    log_target: F,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport>
where
    P: Proposal,
    F: Fn(&P::Point) -> Result<Complex64> + Sync,
{
    if n_samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let start = Instant::now();
    let batches = BATCHES.min(n_samples);
    let parts: Vec<Batch> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let size = n_samples / batches + usize::from(b < n_samples % batches);
            let mut rng = stream_rng(seed, b as u64);
            let mut acc = Batch::default();
            for _ in 0..size {
                let x = proposal.draw(&mut rng)?;
                let lq = proposal.log_density(&x)?;
                let lf = match log_target(&x) {
                    Ok(v) => v,
                    Err(Error::Domain(_)) => Complex64::new(f64::NEG_INFINITY, 0.0),
                    Err(e) => return Err(e),
                };
                let w = if lf.re == f64::NEG_INFINITY {
                    Complex64::new(0.0, 0.0)
                } else {
                    (lf - lq).exp()
                };
                if !w.re.is_finite() || !w.im.is_finite() {
                    return Err(Error::ProposalSupport(format!(
                        "weight {w} at log proposal density {lq}"
                    )));
                }
                acc.n += 1;
                acc.sum += w.re;
                acc.sum_sq += w.re * w.re;
                acc.sum_im += w.im;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let n = n_samples as f64;
    let total: f64 = parts.iter().map(|b| b.sum).sum();
    let total_sq: f64 = parts.iter().map(|b| b.sum_sq).sum();
    let value = total / n;
    let mut report = EstimateReport {
        value,
        se: None,
        n: n_samples as u64,
        seed: Some(seed),
        diag: BTreeMap::new(),
    };
    if n_samples > 1 {
        let var = ((total_sq - n * value * value) / (n - 1.0)).max(0.0);
        report.diag.insert("se_iid".into(), (var / n).sqrt().into());
        // batch means, weighted by batch size
        let bm = parts
            .iter()
            .map(|b| (b.sum / b.n as f64 - value).powi(2) * b.n as f64)
            .sum::<f64>();
        let se = if batches > 1 {
            (bm / (batches as f64 - 1.0) / n).sqrt()
        } else {
            (var / n).sqrt()
        };
        report.se = Some(se);
    } else {
        report.diag.insert(
            "flag".into(),
            "single sample: standard error undefined".into(),
        );
    }
    let ess = if total_sq > 0.0 {
        total * total / total_sq
    } else {
        0.0
    };
    report.diag.insert("ess".into(), ess.into());
    report.diag.insert(
        "imag".into(),
        (parts.iter().map(|b| b.sum_im).sum::<f64>() / n).into(),
    );
    report.diag.insert("batches".into(), batches.into());
    report
        .diag
        .insert("wall_time".into(), start.elapsed().as_secs_f64().into());
    Ok(report)
}

/// Proposal for [`mc_integrate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ProposalSpec {
    /// The exact chain sampler for the target parameters themselves.
    #[default]
    Exact,
    /// The exact chain sampler for other parameters of the same family.
    Chain(UltraBetaParams),
}

fn check_sampleable(p: &UltraBetaParams) -> Result<()> {
    let real = p.is_real();
    let conj = p.family == Family::Cayley
        && p.sigma
            .iter()
            .zip(&p.tau)
            .all(|(s, t)| (s.conj() - t).norm() <= 1e-12 * (1.0 + s.norm()))
        && p.theta.iter().flatten().all(|t| t.im == 0.0);
    if real || conj {
        Ok(())
    } else {
        Err(Error::Incompatible(
            "Monte Carlo needs real parameters or Cayley with τ = conj σ".into(),
        ))
    }
}

/// Importance-sampling estimate of the ultra-beta integral.
pub fn mc_integrate(
    params: &UltraBetaParams,
    proposal: &ProposalSpec,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    params.check_convergence()?;
    check_sampleable(params)?;
    let q = match proposal {
        ProposalSpec::Exact => params.clone(),
        ProposalSpec::Chain(q) => {
            if q.family != params.family || q.n != params.n || q.m != params.m {
                return Err(Error::Incompatible(
                    "proposal chain must match family and shape".into(),
                ));
            }
            if q.window != params.window {
                return Err(Error::ProposalSupport(
                    "proposal window differs from the target window".into(),
                ));
            }
            q.clone()
        }
    };
    let chain = ChainSpec::new(q)?;
    let mut report = if params.family == Family::Trapezoid {
        importance_estimate(
            &TrapezoidProposal(chain),
            |t| log_trapezoid_integrand(params, t),
            n_samples,
            seed,
        )?
    } else {
        importance_estimate(&chain, |t| log_ultra_integrand(params, t), n_samples, seed)?
    };
    report
        .diag
        .insert("family".into(), params.family.name().into());
    Ok(report)
}

/// Monte Carlo value of the Selberg integral over the ordered cone with a
/// sorted beta-prime proposal.
pub fn mc_selberg(
    n: usize,
    sigma: f64,
    tau: f64,
    theta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let margin = tau - sigma - 2.0 * (n as f64 - 1.0) * theta;
    if !(sigma > 0.0 && theta > 0.0 && margin > 0.0) {
        return Err(Error::Divergent(
            "Selberg needs σ, θ > 0 and τ > σ + 2(n-1)θ".into(),
        ));
    }
    let q = SortedBetaPrime::new(n, sigma, margin)?;
    importance_estimate(
        &q,
        |x| log_selberg_integrand(x, sigma, tau, theta).map(|v| Complex64::new(v, 0.0)),
        n_samples,
        seed,
    )
}

/// Thresholds for [`two_sample_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleConfig {
    pub moments: usize,
    pub z_threshold: f64,
    pub p_threshold: f64,
}

impl Default for TwoSampleConfig {
    fn default() -> Self {
        Self {
            moments: 4,
            z_threshold: 4.0,
            p_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleVerdict {
    /// z-scores of the differences of moments `1..=k`.
    pub z_scores: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub pass: bool,
    /// Set when either sample has fewer than 30 points.
    pub underpowered: bool,
}

/// Kolmogorov distribution tail `P(K > λ)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    (d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d))
}

fn moment_z(a: &[f64], b: &[f64], k: i32) -> f64 {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().map(|v| v.powi(k)).sum::<f64>() / n;
        let var = if x.len() > 1 {
            x.iter().map(|v| (v.powi(k) - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (m, var / n)
    };
    let (ma, va) = stats(a);
    let (mb, vb) = stats(b);
    let diff = ma - mb;
    if diff == 0.0 {
        0.0
    } else if va + vb == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / (va + vb).sqrt()
    }
}

/// Moment z-scores and KS test for two independent scalar samples.
pub fn two_sample_compare(
    a: &[f64],
    b: &[f64],
    config: &TwoSampleConfig,
) -> Result<TwoSampleVerdict> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("both samples must be nonempty".into()));
    }
    let z_scores: Vec<f64> = (1..=config.moments as i32)
        .map(|k| moment_z(a, b, k))
        .collect();
    let (ks_statistic, ks_p_value) = ks_two_sample(a, b);
    let pass =
        z_scores.iter().all(|z| z.abs() < config.z_threshold) && ks_p_value > config.p_threshold;
    Ok(TwoSampleVerdict {
        z_scores,
        ks_statistic,
        ks_p_value,
        pass,
        underpowered: a.len() < 30 || b.len() < 30,
    })
}

/// Monotone map applied to every entry before comparing, chosen so that all
/// compared moments exist for the family.
pub fn marginal_transform(family: Family) -> fn(f64) -> f64 {
    match family {
        Family::BetaPrime | Family::Trapezoid => |x| x / (1.0 + x),
        Family::Cayley => f64::atan,
        _ => |x| x,
    }
}

/// One verdict per entry `λ_{jα}` of triangles of equal size, in row order.
pub fn compare_marginals(
    a: &[RayleighTriangle],
    b: &[RayleighTriangle],
    transform: fn(f64) -> f64,
    config: &TwoSampleConfig,
) -> Result<Vec<((usize, usize), TwoSampleVerdict)>> {
    let n = a
        .first()
        .ok_or_else(|| Error::Domain("empty sample".into()))?
        .size();
    if a.iter().chain(b).any(|t| t.size() != n) {
        return Err(Error::Shape("triangles of different sizes".into()));
    }
    let mut out = Vec::new();
    for j in 1..=n {
        for k in 1..=j {
            let xa: Vec<f64> = a.iter().map(|t| transform(t.entry(j, k))).collect();
            let xb: Vec<f64> = b.iter().map(|t| transform(t.entry(j, k))).collect();
            out.push(((j, k), two_sample_compare(&xa, &xb, config)?));
        }
    }
    Ok(out)
}

/// Draws `count` points from a proposal with streams `0..count`.
pub fn draw_many<P: Proposal>(p: &P, count: usize, seed: u64) -> Result<Vec<P::Point>> {
    (0..count)
        .into_par_iter()
        .map(|i| p.draw(&mut stream_rng(seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{log_closed_form, real_vec, selberg_rhs, uniform_theta};
    use crate::sampler::sample_many;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn within(r: &EstimateReport, truth: f64) -> bool {
        (r.value - truth).abs() <= 3.0 * r.se.unwrap() + 1e-12 * truth.abs()
    }

    #[test]
    fn exact_chain_examples() {
        let p = UltraBetaParams::beta_prime(vec![c(1.0)], vec![c(3.0)], vec![]).unwrap();
        let r = mc_integrate(&p, &ProposalSpec::Exact, 100_000, 1).unwrap();
        assert!(within(&r, 0.5), "{r:?}");
        let p = UltraBetaParams::gauss_chain(real_vec(&[1.0; 3]), uniform_theta(3, 1.0)).unwrap();
        let r = mc_integrate(&p, &ProposalSpec::Exact, 20_000, 2).unwrap();
        assert!(within(&r, (2.0 * std::f64::consts::PI).powf(1.5)), "{r:?}");
    }

    #[test]
    fn single_sample_has_no_se() {
        let p = UltraBetaParams::gauss_chain(vec![c(1.0)], vec![]).unwrap();
        let r = mc_integrate(&p, &ProposalSpec::Exact, 1, 3).unwrap();
        assert!(r.se.is_none());
        assert!(r.diag.contains_key("flag"));
        assert_relative_eq!(
            r.value,
            (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-12
        );
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for k in ["value", "se", "n", "seed", "diag"] {
            assert!(json.get(k).is_some());
        }
    }

    #[test]
    fn perturbed_proposals() {
        let target = UltraBetaParams::beta_prime(
            real_vec(&[1.5, 1.2]),
            real_vec(&[6.0, 5.0]),
            uniform_theta(2, 0.8),
        )
        .unwrap();
        let q = UltraBetaParams::beta_prime(
            real_vec(&[1.3, 1.0]),
            real_vec(&[5.0, 4.0]),
            uniform_theta(2, 0.8),
        )
        .unwrap();
        let r = mc_integrate(&target, &ProposalSpec::Chain(q), 200_000, 4).unwrap();
        let truth = log_closed_form(&target).unwrap().re.exp();
        assert!(within(&r, truth), "{r:?} vs {truth}");
        assert!(r.se.unwrap() / truth < 0.02);
    }

    #[test]
    fn window_mismatch_is_a_support_error() {
        let t =
            UltraBetaParams::interval_beta((0.0, 2.0), vec![c(1.0)], vec![c(1.0)], vec![]).unwrap();
        let q =
            UltraBetaParams::interval_beta((0.0, 1.0), vec![c(1.0)], vec![c(1.0)], vec![]).unwrap();
        assert!(matches!(
            mc_integrate(&t, &ProposalSpec::Chain(q), 100, 0),
            Err(Error::ProposalSupport(_))
        ));
    }

    #[test]
    fn selberg_by_sorted_beta_prime() {
        let r = mc_selberg(2, 1.5, 6.0, 1.0, 200_000, 5).unwrap();
        let truth = selberg_rhs(2, c(1.5), c(6.0), c(1.0)).unwrap().re.exp();
        assert!(within(&r, truth), "{r:?} vs {truth}");
    }

    #[test]
    fn deterministic_for_one_thread() {
        let p = UltraBetaParams::beta_prime(
            real_vec(&[1.5, 1.2]),
            real_vec(&[6.0, 5.0]),
            uniform_theta(2, 0.8),
        )
        .unwrap();
        let q = UltraBetaParams::beta_prime(
            real_vec(&[1.4, 1.2]),
            real_vec(&[5.5, 5.0]),
            uniform_theta(2, 0.8),
        )
        .unwrap();
        let spec = ProposalSpec::Chain(q);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let a = pool.install(|| mc_integrate(&p, &spec, 5000, 9).unwrap().value);
        let b = pool.install(|| mc_integrate(&p, &spec, 5000, 9).unwrap().value);
        let c = mc_integrate(&p, &spec, 5000, 9).unwrap().value;
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn two_sample_examples() {
        let cfg = TwoSampleConfig::default();
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i as f64 + 0.5) / 1000.0 * 6.0 - 3.0).sin())
            .collect();
        let v = two_sample_compare(&xs, &xs, &cfg).unwrap();
        assert!(v.z_scores.iter().all(|&z| z == 0.0));
        assert_eq!(v.ks_statistic, 0.0);
        assert!(v.pass);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
        let v = two_sample_compare(&xs, &shifted, &cfg).unwrap();
        assert!(v.z_scores[0].abs() > 100.0 && !v.pass);
        assert!(
            two_sample_compare(&xs[..10], &xs[..10], &cfg)
                .unwrap()
                .underpowered
        );
        assert!(two_sample_compare(&[], &xs, &cfg).is_err());
    }

    #[test]
    fn independent_gauss_chain_draws_agree() {
        let p = UltraBetaParams::gauss_chain(real_vec(&[1.0, 1.0]), uniform_theta(2, 1.0)).unwrap();
        let spec = ChainSpec::new(p).unwrap();
        let a = sample_many(&spec, 10_000, 1).unwrap();
        let b = sample_many(&spec, 10_000, 2).unwrap();
        let cfg = TwoSampleConfig::default();
        for (_, v) in
            compare_marginals(&a, &b, marginal_transform(Family::GaussChain), &cfg).unwrap()
        {
            assert!(v.pass, "{v:?}");
        }
    }

    #[test]
    fn kolmogorov_values() {
        assert_relative_eq!(
            kolmogorov_tail(1.0),
            0.26999967167735456,
            max_relative = 1e-10
        );
        assert_relative_eq!(kolmogorov_tail(1.36), 0.0494, epsilon = 1e-3);
        assert_eq!(kolmogorov_tail(0.0), 1.0);
    }
}
