//! Nested double-exponential quadrature over interlacing domains.
//!
//! Each integration variable ranges over an interval whose ends are either
//! entries of an already fixed row or the ends of the window. Finite intervals
//! use the tanh-sinh rule, half-lines exp-sinh and the real line sinh-sinh.
//! These rules cluster nodes double-exponentially at the ends, so algebraic
//! end singularities such as `|μ - λ|^{θ-1}` need no special weights as long
//! as distances to the ends are taken from the rule itself rather than by
//! subtracting nearly equal numbers. Every node therefore carries its exact
//! distances to both ends.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrands::{xpow, Family, SingleLayerKind, SingleLayerParams, UltraBetaParams};
use crate::montecarlo::EstimateReport;

const T_FINITE: f64 = 4.5;
const T_INFINITE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Stop once the estimated relative error falls below this.
    pub rel_tol: f64,
    /// Step `h = 2^{-level}` of the first level tried.
    pub min_level: u32,
    pub max_level: u32,
    /// Refuse levels whose tensor grid exceeds this many nodes.
    pub max_nodes: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            min_level: 2,
            max_level: 7,
            max_nodes: 4e8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.min_level > self.max_level {
            return Err(Error::Domain(
                "quadrature needs rel_tol > 0 and min_level <= max_level".into(),
            ));
        }
        Ok(())
    }
}

/// A node: position, distances to both ends of its interval, and distances
/// to both ends of the integration window. Distances are accumulated from
/// exact offsets, so they stay accurate where `x` itself rounds onto an end.
#[derive(Debug, Clone, Copy)]
struct Pt {
    x: f64,
    dl: f64,
    dr: f64,
    wl: f64,
    wh: f64,
}

impl Pt {
    fn end(&self) -> End {
        End {
            x: self.x,
            wl: self.wl,
            wh: self.wh,
        }
    }
}

/// An interval endpoint with its distances to the window ends.
#[derive(Debug, Clone, Copy)]
struct End {
    x: f64,
    wl: f64,
    wh: f64,
}

impl End {
    fn window_lo(lo: f64, hi: f64) -> Self {
        Self {
            x: lo,
            wl: 0.0,
            wh: hi - lo,
        }
    }

    fn window_hi(lo: f64, hi: f64) -> Self {
        Self {
            x: hi,
            wl: hi - lo,
            wh: 0.0,
        }
    }

    fn fixed(x: f64, lo: f64, hi: f64) -> Self {
        Self {
            x,
            wl: x - lo,
            wh: hi - x,
        }
    }
}

/// `r - l` computed from whichever window end is nearer.
fn span(l: End, r: End) -> f64 {
    let finite = |a: f64, b: f64| a.is_finite() && b.is_finite();
    if finite(l.wl, r.wl) && (r.wl <= l.wh || !finite(l.wh, r.wh)) {
        r.wl - l.wl
    } else if finite(l.wh, r.wh) {
        l.wh - r.wh
    } else {
        r.x - l.x
    }
}

/// Abscissae of one level in the transformed variable, with weights.
struct Tables {
    /// `(1/(1+e^{-2s}), 1/(1+e^{2s}), weight)` for tanh-sinh on a unit interval.
    finite: Vec<(f64, f64, f64)>,
    /// `(e^s, weight)` for exp-sinh.
    half: Vec<(f64, f64)>,
    /// `(sinh s, weight)` for sinh-sinh.
    full: Vec<(f64, f64)>,
}

impl Tables {
    fn new(level: u32) -> Self {
        let h = (-(level as f64)).exp2();
        let range = |t_max: f64| {
            let k = (t_max / h).ceil() as i64;
            (-k..=k).map(move |i| i as f64 * h)
        };
        let finite = range(T_FINITE)
            .map(|t| {
                let s = FRAC_PI_2 * t.sinh();
                let ds = FRAC_PI_2 * t.cosh();
                let (fl, fr) = if s >= 0.0 {
                    let e = (-2.0 * s).exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                } else {
                    let e = (2.0 * s).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                };
                (fl, fr, h * 2.0 * fl * fr * ds)
            })
            .filter(|&(fl, fr, w)| fl > 0.0 && fr > 0.0 && w > 0.0)
            .collect();
        let half = range(T_INFINITE)
            .map(|t| {
                let e = (FRAC_PI_2 * t.sinh()).exp();
                (e, h * e * FRAC_PI_2 * t.cosh())
            })
            .filter(|&(e, w)| e > 0.0 && w.is_finite() && w > 0.0)
            .collect();
        let full = range(T_INFINITE)
            .map(|t| {
                let s = FRAC_PI_2 * t.sinh();
                (s.sinh(), h * s.cosh() * FRAC_PI_2 * t.cosh())
            })
            .filter(|&(_, w)| w.is_finite())
            .collect();
        Self { finite, half, full }
    }

    fn max_len(&self) -> usize {
        self.finite.len().max(self.half.len()).max(self.full.len())
    }

    /// Calls `f(node, weight)` for each node of the rule on `(l, r)`.
    /// Half-line rules pointing toward `center` stretch to reach it.
    fn for_each(
        &self,
        l: End,
        r: End,
        scale: f64,
        center: Option<f64>,
        mut f: impl FnMut(Pt, f64),
    ) {
        let inf = f64::INFINITY;
        let reach = |gap: f64| if gap > 0.0 { scale.hypot(gap) } else { scale };
        match (l.x.is_finite(), r.x.is_finite()) {
            (true, true) => {
                let len = span(l, r);
                if !(len > 0.0) {
                    return;
                }
                for &(fl, fr, w) in &self.finite {
                    let (dl, dr) = (len * fl, len * fr);
                    let x = if fl <= 0.5 { l.x + dl } else { r.x - dr };
                    f(
                        Pt {
                            x,
                            dl,
                            dr,
                            wl: l.wl + dl,
                            wh: r.wh + dr,
                        },
                        len * w,
                    );
                }
            }
            (true, false) => {
                let scale = center.map_or(scale, |c| reach(c - l.x));
                for &(e, w) in &self.half {
                    let dl = scale * e;
                    f(
                        Pt {
                            x: l.x + dl,
                            dl,
                            dr: inf,
                            wl: l.wl + dl,
                            wh: inf,
                        },
                        scale * w,
                    );
                }
            }
            (false, true) => {
                let scale = center.map_or(scale, |c| reach(r.x - c));
                for &(e, w) in &self.half {
                    let dr = scale * e;
                    f(
                        Pt {
                            x: r.x - dr,
                            dl: inf,
                            dr,
                            wl: inf,
                            wh: r.wh + dr,
                        },
                        scale * w,
                    );
                }
            }
            (false, false) => {
                for &(sh, w) in &self.full {
                    f(
                        Pt {
                            x: scale * sh,
                            dl: inf,
                            dr: inf,
                            wl: inf,
                            wh: inf,
                        },
                        scale * w,
                    );
                }
            }
        }
    }
}

/// An iterated integral: variable `k` ranges over an interval fixed by the
/// earlier variables and contributes a log factor given them.
trait Nested: Sync {
    fn dims(&self) -> usize;
    fn interval(&self, k: usize, pts: &[Pt]) -> (End, End);
    fn log_increment(&self, k: usize, p: &Pt, pts: &[Pt]) -> Complex64;
    /// Length scale for unbounded intervals.
    fn scale(&self) -> f64 {
        1.0
    }
    /// Centre of a symmetric weight, if any.
    fn center(&self) -> Option<f64> {
        None
    }
}

fn recurse(prob: &dyn Nested, tables: &Tables, k: usize, pts: &mut Vec<Pt>) -> Complex64 {
    if k == prob.dims() {
        return Complex64::new(1.0, 0.0);
    }
    let (lo, hi) = prob.interval(k, pts);
    let mut acc = Complex64::new(0.0, 0.0);
    tables.for_each(lo, hi, prob.scale(), prob.center(), |p, w| {
        let li = prob.log_increment(k, &p, pts);
        if li.re == f64::NEG_INFINITY || li.re.is_nan() {
            return;
        }
        let f = w * li.exp();
        if f == Complex64::new(0.0, 0.0) || !f.re.is_finite() {
            return;
        }
        pts.push(p);
        acc += f * recurse(prob, tables, k + 1, pts);
        pts.pop();
    });
    acc
}

fn integrate_level(prob: &dyn Nested, tables: &Tables) -> Complex64 {
    let (lo, hi) = prob.interval(0, &[]);
    let mut outer = Vec::new();
    tables.for_each(lo, hi, prob.scale(), prob.center(), |p, w| {
        outer.push((p, w))
    });
    let parts: Vec<Complex64> = outer
        .par_iter()
        .map(|&(p, w)| {
            let li = prob.log_increment(0, &p, &[]);
            if li.re == f64::NEG_INFINITY || li.re.is_nan() {
                return Complex64::new(0.0, 0.0);
            }
            let f = w * li.exp();
            if !f.re.is_finite() || f == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let mut pts = vec![p];
            f * recurse(prob, tables, 1, &mut pts)
        })
        .collect();
    // fixed summation order keeps results independent of the thread count
    parts.iter().sum()
}

fn run(prob: &dyn Nested, spec: &QuadratureSpec) -> Result<EstimateReport> {
    spec.check()?;
    let start = Instant::now();
    let mut hist: Vec<Complex64> = Vec::new();
    let mut best = (f64::NAN, f64::INFINITY);
    let mut nodes_used = 0f64;
    for level in spec.min_level..=spec.max_level {
        let tables = Tables::new(level);
        let grid = (tables.max_len() as f64).powi(prob.dims() as i32);
        if grid > spec.max_nodes && !hist.is_empty() {
            break;
        }
        let v = integrate_level(prob, &tables);
        nodes_used += grid;
        if hist.is_empty() {
            best = (v.re, f64::INFINITY);
        }
        if let Some(&p) = hist.last() {
            let err = level_error(v, p, hist.iter().rev().nth(1).copied());
            best = (v.re, err);
            if err <= spec.rel_tol * v.norm() {
                let mut report = EstimateReport {
                    value: v.re,
                    se: Some(err),
                    n: nodes_used as u64,
                    seed: None,
                    diag: Default::default(),
                };
                report
                    .diag
                    .insert("method".into(), "double-exponential".into());
                report.diag.insert("level".into(), level.into());
                report.diag.insert("imag".into(), v.im.into());
                report
                    .diag
                    .insert("wall_time".into(), start.elapsed().as_secs_f64().into());
                return Ok(report);
            }
        }
        hist.push(v);
    }
    Err(Error::AccuracyNotReached {
        best: best.0,
        error: best.1,
    })
}

/// Error of `v` from the two preceding levels, assuming the error squares
/// with each halving of the step once convergence sets in.
fn level_error(v: Complex64, p1: Complex64, p2: Option<Complex64>) -> f64 {
    let d1 = (v - p1).norm();
    let (Some(p2), true) = (p2, v.norm() > 0.0) else {
        return d1;
    };
    let (r1, r2) = (d1 / v.norm(), (v - p2).norm() / v.norm());
    if r1 == 0.0 || !(r1 < r2 && r2 < 1.0) {
        return d1;
    }
    let power = (r1.ln() / r2.ln()).min(2.0);
    r1.powf(power) * v.norm()
}

/// `(e, dist)` with `e = 0` skipped, as a log factor.
fn lp(e: Complex64, dist: f64) -> Complex64 {
    xpow(e, dist.ln())
}

struct SingleLayer<'a> {
    params: &'a SingleLayerParams,
    fixed: &'a [f64],
    scale: f64,
}

impl Nested for SingleLayer<'_> {
    fn dims(&self) -> usize {
        self.params.var_len()
    }

    fn interval(&self, k: usize, _pts: &[Pt]) -> (End, End) {
        let f = self.fixed;
        let (lo, hi) = self.params.window;
        if self.params.kind == SingleLayerKind::FixedOuter {
            return (End::fixed(f[k], lo, hi), End::fixed(f[k + 1], lo, hi));
        }
        let left = if k == 0 {
            End::window_lo(lo, hi)
        } else {
            End::fixed(f[k - 1], lo, hi)
        };
        let right = if k == f.len() {
            End::window_hi(lo, hi)
        } else {
            End::fixed(f[k], lo, hi)
        };
        (left, right)
    }

    fn log_increment(&self, k: usize, p: &Pt, pts: &[Pt]) -> Complex64 {
        let mut acc = self.params.log_var_weight_at(p.x, p.wl, p.wh);
        // fixed points adjacent to variable k: indices k-1, k (var bigger) or k, k+1
        let (left, right) = if self.params.kind == SingleLayerKind::FixedOuter {
            (k, k + 1)
        } else {
            (k.wrapping_sub(1), k)
        };
        for (a, &y) in self.fixed.iter().enumerate() {
            let d = if a == left {
                p.dl
            } else if a == right {
                p.dr
            } else {
                (p.x - y).abs()
            };
            acc += lp(self.params.theta[a] - 1.0, d);
        }
        for (b, q) in pts.iter().enumerate() {
            let d = if b + 1 == k {
                q.dr + p.dl
            } else {
                span(q.end(), p.end())
            };
            acc += d.ln();
        }
        acc
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn center(&self) -> Option<f64> {
        matches!(
            self.params.kind,
            SingleLayerKind::Cayley | SingleLayerKind::Gauss
        )
        .then_some(0.0)
    }
}

fn scale_for(psi: Complex64, kind_gauss: bool) -> f64 {
    if psi.re > 0.0 {
        if kind_gauss {
            1.0 / psi.re.sqrt()
        } else {
            1.0 / psi.re
        }
    } else {
        1.0
    }
}

/// Numerical value of the one-row integral over the free row given `fixed`.
pub fn integrate_single_layer(
    params: &SingleLayerParams,
    fixed: &[f64],
    spec: &QuadratureSpec,
) -> Result<EstimateReport> {
    params.check_convergence()?;
    if fixed.len() != params.theta.len() {
        return Err(Error::Shape(format!(
            "{} fixed points for {} exponents",
            fixed.len(),
            params.theta.len()
        )));
    }
    if params.var_len() > 4 {
        return Err(Error::DimensionTooLarge(format!(
            "{} free points",
            params.var_len()
        )));
    }
    for w in fixed.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Domain(
                "fixed row must be strictly increasing".into(),
            ));
        }
    }
    let (lo, hi) = params.window;
    if params.kind != SingleLayerKind::FixedOuter && fixed.iter().any(|&x| !(x > lo && x < hi)) {
        return Err(Error::Domain(
            "fixed row must lie inside the open window".into(),
        ));
    }
    let scale = match params.kind {
        SingleLayerKind::Gauss => scale_for(params.psi, true),
        SingleLayerKind::Gamma => scale_for(params.psi, false),
        _ => 1.0,
    };
    if params.var_len() == 0 {
        return Ok(EstimateReport {
            value: 1.0,
            se: Some(0.0),
            n: 0,
            seed: None,
            diag: Default::default(),
        });
    }
    run(
        &SingleLayer {
            params,
            fixed,
            scale,
        },
        spec,
    )
}

struct Ultra<'a> {
    params: &'a UltraBetaParams,
    /// `(row, position)` of each variable, 1-based.
    vars: Vec<(usize, usize)>,
    base: usize,
    scale: f64,
}

impl Ultra<'_> {
    fn index(&self, j: usize, a: usize) -> usize {
        // rows base..j-1 precede row j
        let before: usize = (self.base..j).sum();
        before + a - 1
    }

    fn ordered_base(&self, j: usize) -> bool {
        j == self.base && self.base > 1
    }
}

impl Nested for Ultra<'_> {
    fn dims(&self) -> usize {
        self.vars.len()
    }

    fn interval(&self, k: usize, pts: &[Pt]) -> (End, End) {
        let (lo, hi) = self.params.window;
        let (wlo, whi) = (End::window_lo(lo, hi), End::window_hi(lo, hi));
        let (j, a) = self.vars[k];
        if j == self.base {
            return if a == 1 {
                (wlo, whi)
            } else {
                (pts[self.index(j, a - 1)].end(), whi)
            };
        }
        let left = if a == 1 {
            wlo
        } else {
            pts[self.index(j - 1, a - 1)].end()
        };
        let right = if a == j {
            whi
        } else {
            pts[self.index(j - 1, a)].end()
        };
        (left, right)
    }

    fn log_increment(&self, k: usize, p: &Pt, pts: &[Pt]) -> Complex64 {
        let (j, a) = self.vars[k];
        let mut acc = self.params.log_point_weight_at(j, a, p.x, p.wl, p.wh);
        if j > self.base {
            for b in 1..j {
                let d = if b + 1 == a {
                    p.dl
                } else if b == a {
                    p.dr
                } else {
                    let q = pts[self.index(j - 1, b)].end();
                    if q.x < p.x {
                        span(q, p.end())
                    } else {
                        span(p.end(), q)
                    }
                };
                acc += lp(self.params.theta_at(j - 1, b) - 1.0, d);
            }
        }
        for b in 1..a {
            let q = &pts[self.index(j, b)];
            let d = if b + 1 == a {
                if self.ordered_base(j) {
                    p.dl
                } else {
                    q.dr + p.dl
                }
            } else {
                span(q.end(), p.end())
            };
            acc += lp(self.params.pair_exponent(j, b, a), d);
        }
        acc
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn center(&self) -> Option<f64> {
        matches!(self.params.family, Family::Cayley | Family::GaussChain).then_some(0.0)
    }
}

/// Numerical value of the ultra-beta integral for `n ≤ 3`, rows integrated in
/// order with the top row innermost.
pub fn integrate_ultra(params: &UltraBetaParams, spec: &QuadratureSpec) -> Result<EstimateReport> {
    if params.n > 3 {
        return Err(Error::DimensionTooLarge(format!(
            "n = {} exceeds 3",
            params.n
        )));
    }
    params.check_convergence()?;
    let base = params.base_row();
    let vars: Vec<(usize, usize)> = (base..=params.n)
        .flat_map(|j| (1..=j).map(move |a| (j, a)))
        .collect();
    let scale = match params.family {
        Family::GaussChain => scale_for(params.psi[params.n - 1], true),
        Family::GammaChain => scale_for(params.psi[params.n - 1], false),
        _ => 1.0,
    };
    run(
        &Ultra {
            params,
            vars,
            base,
            scale,
        },
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::{
        log_closed_form, log_single_layer_closed_form, real_vec, uniform_theta,
    };
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_layer_examples() {
        let spec = QuadratureSpec::with_tol(1e-12);
        let r = integrate_single_layer(
            &SingleLayerParams::beta_prime(c(1.0), c(2.0), vec![]),
            &[],
            &spec,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        let r = integrate_single_layer(
            &SingleLayerParams::beta_prime(c(1.0), c(4.0), vec![c(1.0)]),
            &[1.0],
            &spec,
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0 / 48.0, max_relative = 1e-8);
        let r = integrate_single_layer(
            &SingleLayerParams::fixed_outer(vec![c(1.0), c(1.0)]),
            &[0.0, 1.0],
            &spec,
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn singular_exponents_converge() {
        let spec = QuadratureSpec::with_tol(1e-10);
        let th = vec![c(0.3), c(0.5)];
        let p = SingleLayerParams::beta_prime(c(0.6), c(3.5), th);
        let fixed = [0.4, 1.7];
        let r = integrate_single_layer(&p, &fixed, &spec).unwrap();
        let want = log_single_layer_closed_form(&p, &fixed).unwrap().re.exp();
        assert_relative_eq!(r.value, want, max_relative = 1e-8);
    }

    #[test]
    fn cayley_with_unequal_real_parameters() {
        let p = SingleLayerParams::cayley(c(1.2), c(2.1), vec![c(0.8)]);
        let r = integrate_single_layer(&p, &[0.3], &QuadratureSpec::with_tol(1e-10)).unwrap();
        let want = log_single_layer_closed_form(&p, &[0.3]).unwrap().exp();
        let im = r.diag["imag"].as_f64().unwrap();
        assert!((Complex64::new(r.value, im) - want).norm() < 1e-8 * want.norm());
    }

    #[test]
    fn ultra_examples() {
        let spec = QuadratureSpec::with_tol(1e-10);
        let p = UltraBetaParams::beta_prime(vec![c(1.0)], vec![c(2.0)], vec![]).unwrap();
        assert_relative_eq!(
            integrate_ultra(&p, &spec).unwrap().value,
            1.0,
            max_relative = 1e-10
        );
        let p = UltraBetaParams::beta_prime(
            real_vec(&[1.0, 1.0]),
            real_vec(&[4.0, 4.0]),
            uniform_theta(2, 1.0),
        )
        .unwrap();
        assert_relative_eq!(
            integrate_ultra(&p, &spec).unwrap().value,
            1.0 / 18.0,
            max_relative = 1e-7
        );
        let p = UltraBetaParams::interval_beta(
            (0.0, 1.0),
            real_vec(&[1.0, 1.0]),
            real_vec(&[1.0, 1.0]),
            uniform_theta(2, 1.0),
        )
        .unwrap();
        assert_relative_eq!(
            integrate_ultra(&p, &spec).unwrap().value,
            0.5,
            max_relative = 1e-9
        );
        let p = UltraBetaParams::gauss_chain(real_vec(&[1.0; 4]), uniform_theta(4, 1.0)).unwrap();
        assert!(matches!(
            integrate_ultra(&p, &spec),
            Err(Error::DimensionTooLarge(_))
        ));
    }

    #[test]
    fn selberg_region_by_quadrature() {
        let p =
            UltraBetaParams::trapezoid(2, 2, c(1.0), vec![c(1.0)], vec![c(4.0)], vec![]).unwrap();
        let r = integrate_ultra(&p, &QuadratureSpec::with_tol(1e-10)).unwrap();
        assert_relative_eq!(r.value, 1.0 / 12.0, max_relative = 1e-7);
    }

    #[test]
    fn two_rows_interval_off_unit() {
        let p = UltraBetaParams::interval_beta(
            (-1.0, 2.0),
            real_vec(&[1.5, 1.2]),
            real_vec(&[1.1, 2.0]),
            uniform_theta(2, 0.7),
        )
        .unwrap();
        let r = integrate_ultra(&p, &QuadratureSpec::with_tol(1e-9)).unwrap();
        let want = log_closed_form(&p).unwrap().re.exp();
        assert_relative_eq!(r.value, want, max_relative = 1e-7);
    }

    #[test]
    fn singular_mass_at_a_nonzero_window_end() {
        // outer nodes round onto the window end; inner panels must keep their width
        let p = UltraBetaParams::interval_beta(
            (-1.386, -0.362),
            real_vec(&[0.31, 2.57]),
            real_vec(&[0.57, 0.62]),
            uniform_theta(2, 1.0),
        )
        .unwrap();
        let r = integrate_ultra(&p, &QuadratureSpec::with_tol(1e-10)).unwrap();
        let want = log_closed_form(&p).unwrap().re.exp();
        assert_relative_eq!(r.value, want, max_relative = 1e-9);
    }

    #[test]
    fn interval_single_layer_off_unit() {
        let p = SingleLayerParams::interval((-1.0, 2.0), c(1.3), c(0.8), vec![c(0.7), c(1.2)]);
        let r = integrate_single_layer(&p, &[0.1, 0.9], &QuadratureSpec::with_tol(1e-10)).unwrap();
        let want = log_single_layer_closed_form(&p, &[0.1, 0.9])
            .unwrap()
            .re
            .exp();
        assert_relative_eq!(r.value, want, max_relative = 1e-8);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let p = SingleLayerParams::gamma(c(1.3), c(0.9), vec![c(0.7), c(1.4)]);
        let spec = QuadratureSpec::with_tol(1e-9);
        let a = integrate_single_layer(&p, &[0.5, 2.0], &spec)
            .unwrap()
            .value;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| {
            integrate_single_layer(&p, &[0.5, 2.0], &spec)
                .unwrap()
                .value
        });
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
