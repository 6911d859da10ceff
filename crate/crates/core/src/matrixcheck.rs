//! Random-matrix ground truth for the chain samplers: Gaussian Hermitian and
//! rectangular matrices over ℝ, ℂ and ℍ, their corner and row-block spectra.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrands::{matrix_preset, GroundField, PresetArgs};
use crate::montecarlo::{compare_marginals, TwoSampleConfig, TwoSampleVerdict};
use crate::patterns::{RayleighTriangle, ValidationVerdict};
use crate::sampler::{sample_many, stream_rng, ChainSpec};

/// `u + iv + jw + kz`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(u: f64, v: f64, w: f64, z: f64) -> Self {
        Self { u, v, w, z }
    }

    pub const fn real(u: f64) -> Self {
        Self::new(u, 0.0, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Self::new(self.u, -self.v, -self.w, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `(a, b)` with `q = a + b·j`, `a, b ∈ ℂ`.
    pub fn complex_pair(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.u, self.v),
            Complex64::new(self.w, self.z),
        )
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.u + o.u, self.v + o.v, self.w + o.w, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.u - o.u, self.v - o.v, self.w - o.w, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.u, -self.v, -self.w, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b, c, d) = (self.u, self.v, self.w, self.z);
        let (e, f, g, h) = (o.u, o.v, o.w, o.z);
        Self::new(
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        )
    }
}

/// Draws an element of the field whose `2θ` real components are `N(0, var)`.
fn gaussian_entry<R: Rng + ?Sized>(field: GroundField, var: f64, rng: &mut R) -> Quaternion {
    let s = var.sqrt();
    let mut g = || -> f64 {
        let x: f64 = StandardNormal.sample(rng);
        s * x
    };
    match field {
        GroundField::R => Quaternion::real(g()),
        GroundField::C => Quaternion::new(g(), g(), 0.0, 0.0),
        GroundField::H => Quaternion::new(g(), g(), g(), g()),
    }
}

/// Complex `2×2` block image of a quaternion; the identity on ℂ.
fn embed(
    field: GroundField,
    rows: usize,
    cols: usize,
    entry: impl Fn(usize, usize) -> Quaternion,
) -> DMatrix<Complex64> {
    match field {
        GroundField::H => DMatrix::from_fn(2 * rows, 2 * cols, |r, c| {
            let (a, b) = entry(r / 2, c / 2).complex_pair();
            match (r % 2, c % 2) {
                (0, 0) => a,
                (0, 1) => b,
                (1, 0) => -b.conj(),
                _ => a.conj(),
            }
        }),
        _ => DMatrix::from_fn(rows, cols, |r, c| {
            let q = entry(r, c);
            Complex64::new(q.u, q.v)
        }),
    }
}

/// Ascending eigenvalues of a Hermitian complex matrix; for the quaternion
/// embedding each doubled eigenvalue is returned once.
fn hermitian_eigenvalues(m: DMatrix<Complex64>, field: GroundField) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    ev.sort_by(f64::total_cmp);
    if field != GroundField::H {
        return Ok(ev);
    }
    let scale = ev.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    ev.chunks(2)
        .map(|p| {
            if (p[1] - p[0]).abs() <= 1e-8 * scale {
                Ok(0.5 * (p[0] + p[1]))
            } else {
                Err(Error::Eigen(format!(
                    "quaternion eigenvalues {} and {} do not pair",
                    p[0], p[1]
                )))
            }
        })
        .collect()
}

fn real_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Hermitian `n×n` matrix over ℝ, ℂ or ℍ, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix {
    field: GroundField,
    n: usize,
    entries: Vec<Quaternion>,
}

impl HermitianMatrix {
    /// Checks Hermitian symmetry and that every entry lies in the field.
    pub fn new(field: GroundField, n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for order {n}",
                entries.len()
            )));
        }
        let tol = 1e-12;
        for k in 0..n {
            for l in 0..n {
                let q = entries[k * n + l];
                let outside = match field {
                    GroundField::R => q.v != 0.0 || q.w != 0.0 || q.z != 0.0,
                    GroundField::C => q.w != 0.0 || q.z != 0.0,
                    GroundField::H => false,
                };
                if outside {
                    return Err(Error::Domain(format!(
                        "entry ({k},{l}) is not in the field"
                    )));
                }
                let d = (q - entries[l * n + k].conj()).norm();
                if d > tol * (1.0 + q.norm()) {
                    return Err(Error::Domain(format!(
                        "entry ({k},{l}) breaks Hermitian symmetry"
                    )));
                }
            }
        }
        Ok(Self { field, n, entries })
    }

    pub fn diagonal(field: GroundField, d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![Quaternion::default(); n * n];
        for (k, &x) in d.iter().enumerate() {
            entries[k * n + k] = Quaternion::real(x);
        }
        Self { field, n, entries }
    }

    pub fn field(&self) -> GroundField {
        self.field
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize) -> Quaternion {
        self.entries[k * self.n + l]
    }

    /// `tr T² = Σ |t_{kl}|²`.
    pub fn trace_square(&self) -> f64 {
        self.entries.iter().map(|q| q.norm_sqr()).sum()
    }

    /// Ascending eigenvalues of the upper-left `j×j` block.
    pub fn corner_eigenvalues(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.n,
            });
        }
        if self.field == GroundField::R {
            return real_eigenvalues(DMatrix::from_fn(j, j, |r, c| self.get(r, c).u));
        }
        hermitian_eigenvalues(embed(self.field, j, j, |r, c| self.get(r, c)), self.field)
    }
}

/// `n×m` matrix over ℝ, ℂ or ℍ with `n ≤ m`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectMatrix {
    field: GroundField,
    n: usize,
    m: usize,
    entries: Vec<Quaternion>,
}

impl RectMatrix {
    pub fn new(field: GroundField, n: usize, m: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if n == 0 || n > m {
            return Err(Error::Shape(format!("need 1 <= n <= m, got {n}×{m}")));
        }
        if entries.len() != n * m {
            return Err(Error::Shape(format!(
                "{} entries for a {n}×{m} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            field,
            n,
            m,
            entries,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn get(&self, k: usize, l: usize) -> Quaternion {
        self.entries[k * self.m + l]
    }

    /// Ascending eigenvalues of `{T}_j {T}_j^*`, `{T}_j` the first `j` rows.
    pub fn rowblock_eigenvalues(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.n,
            });
        }
        if self.field == GroundField::R {
            let b = DMatrix::from_fn(j, self.m, |r, c| self.get(r, c).u);
            return real_eigenvalues(&b * b.transpose());
        }
        let b = embed(self.field, j, self.m, |r, c| self.get(r, c));
        hermitian_eigenvalues(&b * b.adjoint(), self.field)
    }
}

/// Density `∝ exp(-ψ tr T²/2)`: diagonal `N(0, 1/ψ)`, every real component of
/// an off-diagonal entry `N(0, 1/(2ψ))`.
pub fn gaussian_hermitian<R: Rng + ?Sized>(
    field: GroundField,
    n: usize,
    psi: f64,
    rng: &mut R,
) -> Result<HermitianMatrix> {
    if !(psi > 0.0) {
        return Err(Error::Domain("ψ must be positive".into()));
    }
    let mut entries = vec![Quaternion::default(); n * n];
    for k in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        entries[k * n + k] = Quaternion::real(d / psi.sqrt());
        for l in k + 1..n {
            let q = gaussian_entry(field, 0.5 / psi, rng);
            entries[k * n + l] = q;
            entries[l * n + k] = q.conj();
        }
    }
    Ok(HermitianMatrix { field, n, entries })
}

/// Spectra of the nested upper-left corners, one row per corner.
pub fn corner_spectra(t: &HermitianMatrix) -> Result<RayleighTriangle> {
    let rows = (1..=t.order())
        .map(|j| t.corner_eigenvalues(j))
        .collect::<Result<Vec<_>>>()?;
    RayleighTriangle::new(rows)
}

/// Density `∝ exp(-ψ tr T T^*)`: every real component `N(0, 1/(2ψ))`.
pub fn gaussian_rect<R: Rng + ?Sized>(
    field: GroundField,
    n: usize,
    m: usize,
    psi: f64,
    rng: &mut R,
) -> Result<RectMatrix> {
    if !(psi > 0.0) {
        return Err(Error::Domain("ψ must be positive".into()));
    }
    let entries = (0..n * m)
        .map(|_| gaussian_entry(field, 0.5 / psi, rng))
        .collect();
    RectMatrix::new(field, n, m, entries)
}

/// Spectra of `{T}_j {T}_j^*` for `j = 1..=n`.
pub fn rowblock_spectra(t: &RectMatrix) -> Result<RayleighTriangle> {
    let rows = (1..=t.n)
        .map(|j| t.rowblock_eigenvalues(j))
        .collect::<Result<Vec<_>>>()?;
    RayleighTriangle::new(rows)
}

/// Matrix spectra against the chain sampler, marginal by marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornersReport {
    pub marginals: Vec<((usize, usize), TwoSampleVerdict)>,
    /// Fraction of matrix triangles that interlace.
    pub interlacing_rate: f64,
    /// Whether every matrix triangle is nonnegative (rectangular case only).
    pub nonnegative: bool,
    pub pass: bool,
}

/// Spectra triangles of `count` Gaussian matrices: corners of `n×n`
/// Hermitian ones when `m` is `None`, row blocks of `n×m` ones otherwise.
/// Matrix `i` uses stream `i` of `seed`.
pub fn matrix_triangles(
    field: GroundField,
    n: usize,
    m: Option<usize>,
    psi: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<RayleighTriangle>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            match m {
                Some(m) => rowblock_spectra(&gaussian_rect(field, n, m, psi, &mut rng)?),
                None => corner_spectra(&gaussian_hermitian(field, n, psi, &mut rng)?),
            }
        })
        .collect()
}

/// The chain whose law the matrix triangles of [`matrix_triangles`] follow:
/// preset `hermite-corners`, or `laguerre-corners` when `m` is given.
pub fn matching_chain(
    field: GroundField,
    n: usize,
    m: Option<usize>,
    psi: f64,
) -> Result<ChainSpec> {
    let args = PresetArgs {
        psi: vec![Complex64::new(psi, 0.0)],
        ..Default::default()
    };
    let preset = if m.is_some() {
        "laguerre-corners"
    } else {
        "hermite-corners"
    };
    ChainSpec::new(matrix_preset(preset, n, m, field, &args)?)
}

/// `count` matrix triangles against `count` chain triangles drawn with seed
/// `seed + 1`, marginal by marginal.
pub fn corners_vs_chain(
    field: GroundField,
    n: usize,
    m: Option<usize>,
    psi: f64,
    count: usize,
    seed: u64,
) -> Result<CornersReport> {
    let spec = matching_chain(field, n, m, psi)?;
    let matrices = matrix_triangles(field, n, m, psi, count, seed)?;
    let window = spec.params().domain();
    let interlaced = matrices
        .iter()
        .filter(|t| t.validate_with_tol(&window, 0.0) == ValidationVerdict::Ok)
        .count();
    let nonnegative = m.is_none()
        || matrices
            .iter()
            .all(|t| t.rows().iter().flatten().all(|&x| x >= 0.0));
    let chain = sample_many(&spec, count, seed.wrapping_add(1))?;
    let marginals = compare_marginals(&matrices, &chain, |x| x, &TwoSampleConfig::default())?;
    let interlacing_rate = interlaced as f64 / count.max(1) as f64;
    let pass = marginals.iter().all(|(_, v)| v.pass) && interlaced == count && nonnegative;
    Ok(CornersReport {
        marginals,
        interlacing_rate,
        nonnegative,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FIELDS: [GroundField; 3] = [GroundField::R, GroundField::C, GroundField::H];

    fn q() -> impl Strategy<Value = Quaternion> {
        (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
    }

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).norm() <= 1e-12 * (1.0 + a.norm() + b.norm())
    }

    proptest! {
        #[test]
        fn quaternion_algebra(p in q(), r in q(), s in q()) {
            prop_assert!(close((p * r) * s, p * (r * s)));
            prop_assert!(((p * r).norm() - p.norm() * r.norm()).abs() <= 1e-12 * (1.0 + p.norm() * r.norm()));
            prop_assert!(close((p * r).conj(), r.conj() * p.conj()));
        }
    }

    #[test]
    fn units() {
        let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
        let k = Quaternion::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * i, Quaternion::real(-1.0));
        assert_eq!(j * i, -k);
    }

    #[test]
    fn diagonal_corners() {
        let t = HermitianMatrix::diagonal(GroundField::C, &[1.0, 2.0, 3.0]);
        let tri = corner_spectra(&t).unwrap();
        assert_eq!(
            tri.rows(),
            &[vec![1.0], vec![1.0, 2.0], vec![1.0, 2.0, 3.0]]
        );
    }

    /// Eigenvalues of a real symmetric 3×3 matrix from its characteristic cubic.
    fn cubic_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
        let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let qm = a.trace() / 3.0;
        let p2 = (0..3).map(|i| (a[(i, i)] - qm).powi(2)).sum::<f64>() + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = (a - DMatrix::identity(3, 3) * qm) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = qm + 2.0 * p * phi.cos();
        let e3 = qm + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let mut v = vec![e1, 3.0 * qm - e1 - e3, e3];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..200 {
            let t = gaussian_hermitian(GroundField::R, 3, 1.0, &mut rng).unwrap();
            let a = DMatrix::from_fn(3, 3, |r, c| t.get(r, c).u);
            let want = cubic_eigenvalues(&a);
            let got = t.corner_eigenvalues(3).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "{got:?} {want:?}");
            }
            // 2×2 corner by the quadratic formula
            let (p, s, r) = (a[(0, 0)], a[(1, 1)], a[(0, 1)]);
            let d = ((p - s).powi(2) + 4.0 * r * r).sqrt();
            let got = t.corner_eigenvalues(2).unwrap();
            assert_relative_eq!(got[0], 0.5 * (p + s - d), epsilon = 1e-12);
            assert_relative_eq!(got[1], 0.5 * (p + s + d), epsilon = 1e-12);
        }
    }

    #[test]
    fn quaternion_spectra_pair_and_match_complex_case() {
        // a quaternion matrix with entries in ℂ has the complex spectrum
        let mut rng = stream_rng(2, 0);
        let t = gaussian_hermitian(GroundField::C, 3, 1.0, &mut rng).unwrap();
        let h = HermitianMatrix {
            field: GroundField::H,
            ..t.clone()
        };
        let a = t.corner_eigenvalues(3).unwrap();
        let b = h.corner_eigenvalues(3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-10);
        }
        for _ in 0..100 {
            let t = gaussian_hermitian(GroundField::H, 4, 1.0, &mut rng).unwrap();
            assert_eq!(t.corner_eigenvalues(4).unwrap().len(), 4);
        }
    }

    #[test]
    fn corners_always_interlace() {
        let mut rng = stream_rng(3, 0);
        for field in FIELDS {
            for i in 0..3000 {
                let n = 1 + i % 5;
                let t = gaussian_hermitian(field, n, 0.7, &mut rng).unwrap();
                let tri = corner_spectra(&t).unwrap();
                assert_eq!(
                    tri.validate_with_tol(&crate::patterns::DomainWindow::real_line(), 0.0),
                    ValidationVerdict::Ok
                );
            }
        }
    }

    #[test]
    fn trace_square_mean() {
        for field in FIELDS {
            let (n, psi, count) = (3, 2.0, 10_000);
            let mut rng = stream_rng(4, 0);
            let xs: Vec<f64> = (0..count)
                .map(|_| {
                    gaussian_hermitian(field, n, psi, &mut rng)
                        .unwrap()
                        .trace_square()
                })
                .collect();
            let mean = xs.iter().sum::<f64>() / count as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            let theta = field.theta();
            let want = (n as f64 + (n * (n - 1)) as f64 * theta) / psi;
            assert!(
                (mean - want).abs() < 3.0 * (var / count as f64).sqrt(),
                "{field:?}: {mean} vs {want}"
            );
        }
    }

    #[test]
    fn rowblock_first_row_mean_and_sign() {
        let (m, psi, count) = (4, 1.5, 10_000);
        for field in FIELDS {
            let mut rng = stream_rng(5, 0);
            let tris: Vec<RayleighTriangle> = (0..count)
                .map(|_| {
                    rowblock_spectra(&gaussian_rect(field, 2, m, psi, &mut rng).unwrap()).unwrap()
                })
                .collect();
            assert!(tris
                .iter()
                .all(|t| t.rows().iter().flatten().all(|&x| x >= 0.0)));
            let xs: Vec<f64> = tris.iter().map(|t| t.entry(1, 1)).collect();
            let mean = xs.iter().sum::<f64>() / count as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            let want = m as f64 * field.theta() / psi;
            assert!(
                (mean - want).abs() < 3.0 * (var / count as f64).sqrt(),
                "{field:?}: {mean} vs {want}"
            );
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(RectMatrix::new(GroundField::C, 3, 2, vec![Quaternion::default(); 6]).is_err());
        let mut e = vec![Quaternion::default(); 4];
        e[1] = Quaternion::real(1.0);
        assert!(HermitianMatrix::new(GroundField::R, 2, e).is_err());
    }

    #[test]
    fn gue_two_by_two_corner() {
        let r = corners_vs_chain(GroundField::C, 2, None, 1.0, 20_000, 6).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.interlacing_rate, 1.0);
    }
}
