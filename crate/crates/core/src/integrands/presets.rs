//! Matrix integrals over Hermitian, positive definite and rectangular matrices
//! realised as ultra-beta parameter sets. The eigenvalue map carries Lebesgue
//! measure on matrices to `C_n(θ) 𝔯_θ dℒ` (Hermitian) or `Ĉ_{nm}(θ) ψ 𝔯_θ dℒ`
//! (row blocks of `n × m` matrices), so each matrix integral equals the
//! normalisation constant times the corresponding ultra-beta integral.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::{uniform_theta, UltraBetaParams};
use super::{normalization_constant, normalization_constant_rect, LN_PI};
use crate::error::{Error, Result};
use crate::special::lg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundField {
    R,
    C,
    H,
}

impl GroundField {
    pub fn theta(self) -> f64 {
        match self {
            GroundField::R => 0.5,
            GroundField::C => 1.0,
            GroundField::H => 2.0,
        }
    }
}

impl FromStr for GroundField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R" | "REAL" => Ok(GroundField::R),
            "C" | "COMPLEX" => Ok(GroundField::C),
            "H" | "QUATERNION" => Ok(GroundField::H),
            _ => Err(Error::Parse(format!("unknown field `{s}`"))),
        }
    }
}

pub const PRESETS: [&str; 10] = [
    "gindikin-pos",
    "hua-hermitian",
    "hua-rect",
    "ball-rect",
    "gindikin-interval",
    "wishart-gamma",
    "rect-gamma",
    "mehta-gauss",
    "laguerre-corners",
    "hermite-corners",
];

/// Free parameters of a preset. A single entry is broadcast to every row; the
/// scalar presets (`hua-hermitian`, `hua-rect`, the two corner presets) read
/// only the first entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetArgs {
    #[serde(default)]
    pub sigma: Vec<Complex64>,
    #[serde(default)]
    pub tau: Vec<Complex64>,
    #[serde(default)]
    pub psi: Vec<Complex64>,
}

fn is_rect(name: &str) -> bool {
    matches!(
        name,
        "hua-rect" | "ball-rect" | "rect-gamma" | "laguerre-corners"
    )
}

fn known(name: &str) -> Result<()> {
    if PRESETS.contains(&name) {
        Ok(())
    } else {
        Err(Error::UnknownPreset(name.to_string()))
    }
}

fn rect_m(name: &str, n: usize, m: Option<usize>) -> Result<usize> {
    if !is_rect(name) {
        return Ok(n);
    }
    match m {
        Some(m) if m >= n => Ok(m),
        Some(m) => Err(Error::Incompatible(format!(
            "{name} needs m >= n, got n = {n}, m = {m}"
        ))),
        None => Err(Error::Incompatible(format!(
            "{name} needs the column count m"
        ))),
    }
}

fn broadcast(v: &[Complex64], n: usize, what: &str) -> Result<Vec<Complex64>> {
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        k if k == n => Ok(v.to_vec()),
        k => Err(Error::Shape(format!(
            "{what} has {k} entries, expected 1 or {n}"
        ))),
    }
}

fn scalar(v: &[Complex64], what: &str) -> Result<Complex64> {
    v.first()
        .copied()
        .ok_or_else(|| Error::Shape(format!("missing {what}")))
}

/// Rows of σ_j, τ_j, ψ_j after applying the preset's substitutions.
struct Schedules {
    sigma: Vec<Complex64>,
    tau: Vec<Complex64>,
    psi: Vec<Complex64>,
}

fn schedules(name: &str, n: usize, m: usize, theta: f64, args: &PresetArgs) -> Result<Schedules> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let rows = |f: &dyn Fn(usize) -> Complex64| (1..=n).map(f).collect::<Vec<_>>();
    let mut s = Schedules {
        sigma: Vec::new(),
        tau: Vec::new(),
        psi: Vec::new(),
    };
    match name {
        "gindikin-pos" | "ball-rect" | "gindikin-interval" => {
            s.sigma = broadcast(&args.sigma, n, "σ")?;
            s.tau = broadcast(&args.tau, n, "τ")?;
        }
        "hua-hermitian" => {
            let sig = scalar(&args.sigma, "σ")?;
            s.sigma = rows(&|j| sig - (n - j) as f64 * theta);
            s.tau = s.sigma.clone();
        }
        "hua-rect" => {
            let tau = scalar(&args.tau, "τ")?;
            s.sigma = rows(&|j| c((m - j + 1) as f64 * theta));
            s.tau = rows(&|j| tau - (n - j) as f64 * theta);
        }
        "wishart-gamma" | "rect-gamma" => {
            s.sigma = broadcast(&args.sigma, n, "σ")?;
            s.psi = broadcast(&args.psi, n, "ψ")?;
        }
        "mehta-gauss" => s.psi = broadcast(&args.psi, n, "ψ")?,
        "laguerre-corners" => {
            let psi = scalar(&args.psi, "ψ")?;
            s.sigma = rows(&|j| c((m - j + 1) as f64 * theta));
            s.psi = vec![psi; n];
        }
        "hermite-corners" => s.psi = vec![scalar(&args.psi, "ψ")?; n],
        _ => return Err(Error::UnknownPreset(name.to_string())),
    }
    Ok(s)
}

/// The ultra-beta parameters realising a matrix integral over `field`.
pub fn matrix_preset(
    name: &str,
    n: usize,
    m: Option<usize>,
    field: GroundField,
    args: &PresetArgs,
) -> Result<UltraBetaParams> {
    matrix_preset_theta(name, n, m, field.theta(), args)
}

/// As [`matrix_preset`] with an arbitrary `θ > 0` in place of a ground field.
pub fn matrix_preset_theta(
    name: &str,
    n: usize,
    m: Option<usize>,
    theta: f64,
    args: &PresetArgs,
) -> Result<UltraBetaParams> {
    known(name)?;
    if n == 0 {
        return Err(Error::Shape("n must be at least 1".into()));
    }
    let m = rect_m(name, n, m)?;
    let s = schedules(name, n, m, theta, args)?;
    let th = uniform_theta(n, theta);
    match name {
        "gindikin-pos" | "hua-rect" => UltraBetaParams::beta_prime(s.sigma, s.tau, th),
        "hua-hermitian" => UltraBetaParams::cayley(s.sigma, s.tau, th),
        "ball-rect" | "gindikin-interval" => {
            UltraBetaParams::interval_beta((0.0, 1.0), s.sigma, s.tau, th)
        }
        "wishart-gamma" | "rect-gamma" | "laguerre-corners" => {
            UltraBetaParams::gamma_chain(s.sigma, s.psi, th)
        }
        _ => UltraBetaParams::gauss_chain(s.psi, th),
    }
}

/// Log of the constant relating the matrix integral to the ultra-beta integral.
pub fn preset_normalization(name: &str, n: usize, m: Option<usize>, theta: f64) -> Result<f64> {
    known(name)?;
    if is_rect(name) {
        normalization_constant_rect(n, rect_m(name, n, m)?, theta)
    } else {
        normalization_constant(n, theta)
    }
}

/// Log of the matrix integral itself, from the matrix-side Gamma products.
pub fn preset_matrix_rhs(
    name: &str,
    n: usize,
    m: Option<usize>,
    theta: f64,
    args: &PresetArgs,
) -> Result<Complex64> {
    known(name)?;
    let m = rect_m(name, n, m)?;
    let s = schedules(name, n, m, theta, args)?;
    let nf = n as f64;
    let herm_pi = theta * nf * (nf - 1.0) / 2.0 * LN_PI;
    let rect_pi = (m * n) as f64 * theta * LN_PI;
    let th = |j: usize| (j as f64 - 1.0) * theta;
    let cols = |j: usize| lg(Complex64::new((m - j + 1) as f64 * theta, 0.0));
    let mut acc = Complex64::new(0.0, 0.0);
    match name {
        "gindikin-pos" | "hua-rect" => {
            acc += if name == "hua-rect" { rect_pi } else { herm_pi };
            for j in 1..=n {
                let (sg, ta) = (s.sigma[j - 1], s.tau[j - 1]);
                acc += lg(sg)? + lg(ta - sg - th(j))? - lg(ta)?;
                if name == "hua-rect" {
                    acc -= cols(j)?;
                }
            }
        }
        "hua-hermitian" => {
            let total: Complex64 = s.sigma.iter().sum();
            acc += herm_pi + nf * LN_PI + (2.0 * nf - 2.0 * total) * std::f64::consts::LN_2;
            for j in 1..=n {
                let sg = s.sigma[j - 1];
                acc += lg(2.0 * sg - 1.0 - th(j))? - 2.0 * lg(sg)?;
            }
        }
        "ball-rect" | "gindikin-interval" => {
            acc += if name == "ball-rect" {
                rect_pi
            } else {
                herm_pi
            };
            for j in 1..=n {
                let (sg, ta) = (s.sigma[j - 1], s.tau[j - 1]);
                acc += lg(sg)? + lg(ta)? - lg(sg + ta + th(j))?;
                if name == "ball-rect" {
                    acc -= cols(j)?;
                }
            }
        }
        "wishart-gamma" | "rect-gamma" => {
            acc += if name == "rect-gamma" {
                rect_pi
            } else {
                herm_pi
            };
            for j in 1..=n {
                let sg = s.sigma[j - 1];
                acc += lg(sg)? - (sg + th(j)) * s.psi[j - 1].ln();
                if name == "rect-gamma" {
                    acc -= cols(j)?;
                }
            }
        }
        "laguerre-corners" => {
            acc += rect_pi - (m * n) as f64 * theta * s.psi[0].ln();
        }
        _ => {
            acc += 0.5 * nf * (2.0 * std::f64::consts::PI).ln() + herm_pi;
            for j in 1..=n {
                acc -= (0.5 + th(j)) * s.psi[j - 1].ln();
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::super::log_closed_form;
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn args_for(name: &str, n: usize) -> PresetArgs {
        let sig: Vec<Complex64> = (1..=n).map(|j| c(1.3 + 0.4 * j as f64)).collect();
        let tau: Vec<Complex64> = (1..=n).map(|j| c(9.0 + 0.7 * j as f64)).collect();
        let psi: Vec<Complex64> = (1..=n).map(|j| c(0.6 + 0.3 * j as f64)).collect();
        match name {
            "hua-hermitian" => PresetArgs {
                sigma: vec![c(12.5)],
                ..Default::default()
            },
            "hua-rect" => PresetArgs {
                tau: vec![c(30.0)],
                ..Default::default()
            },
            "laguerre-corners" | "hermite-corners" => PresetArgs {
                psi: vec![c(1.4)],
                ..Default::default()
            },
            _ => PresetArgs {
                sigma: sig,
                tau,
                psi,
            },
        }
    }

    #[test]
    fn presets_match_matrix_side_products() {
        for name in PRESETS {
            for n in 1..=4 {
                for &theta in &[0.5, 1.0, 2.0, 0.8] {
                    let m = Some(n + 2);
                    let args = args_for(name, n);
                    let p = matrix_preset_theta(name, n, m, theta, &args).unwrap();
                    let lhs = log_closed_form(&p).unwrap()
                        + preset_normalization(name, n, m, theta).unwrap();
                    let rhs = preset_matrix_rhs(name, n, m, theta, &args).unwrap();
                    assert!(
                        (lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0),
                        "{name} n={n} θ={theta}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_by_one_matrices_are_elementary() {
        let lgr = |x: f64| crate::special::ln_gamma(x).unwrap();
        // ∫_ℝ (1+x²)^{-σ} dx = √π Γ(σ-½)/Γ(σ)
        let s = 2.3;
        let v = preset_matrix_rhs(
            "hua-hermitian",
            1,
            None,
            1.0,
            &PresetArgs {
                sigma: vec![c(s)],
                ..Default::default()
            },
        )
        .unwrap();
        assert_relative_eq!(
            v.re,
            0.5 * LN_PI + lgr(s - 0.5) - lgr(s),
            max_relative = 1e-13
        );
        // ∫_{𝕂^m} (1+|x|²)^{-τ} dx = π^{mθ} Γ(τ-mθ)/Γ(τ)
        for &theta in &[0.5, 1.0, 2.0] {
            let (m, t) = (3usize, 9.0);
            let v = preset_matrix_rhs(
                "hua-rect",
                1,
                Some(m),
                theta,
                &PresetArgs {
                    tau: vec![c(t)],
                    ..Default::default()
                },
            )
            .unwrap();
            let k = m as f64 * theta;
            assert_relative_eq!(v.re, k * LN_PI + lgr(t - k) - lgr(t), max_relative = 1e-13);
        }
    }

    #[test]
    fn gaussian_presets_match_coordinate_integrals() {
        // Hermitian: diagonal entries give (2π/ψ_l)^{1/2}, each off-diagonal entry of
        // column l gives (π/ψ_l)^θ, since the exponent weights column l by ψ_l.
        for &theta in &[0.5, 1.0, 2.0] {
            let psi = [0.7, 1.3, 2.1];
            let args = PresetArgs {
                psi: psi.iter().map(|&x| c(x)).collect(),
                ..Default::default()
            };
            let mut want = 0.0;
            for (l, &p) in psi.iter().enumerate() {
                want += 0.5 * (2.0 * std::f64::consts::PI / p).ln()
                    + l as f64 * theta * (std::f64::consts::PI / p).ln();
            }
            let got = preset_matrix_rhs("mehta-gauss", 3, None, theta, &args).unwrap();
            assert_relative_eq!(got.re, want, max_relative = 1e-13);
            // rectangular: 2θnm real components, each ∫ e^{-ψx²} = (π/ψ)^{1/2}
            let args = PresetArgs {
                psi: vec![c(1.7)],
                ..Default::default()
            };
            let got = preset_matrix_rhs("laguerre-corners", 2, Some(4), theta, &args).unwrap();
            assert_relative_eq!(
                got.re,
                8.0 * theta * (std::f64::consts::PI / 1.7).ln(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn preset_shapes() {
        let p = matrix_preset(
            "hua-hermitian",
            1,
            None,
            GroundField::C,
            &PresetArgs {
                sigma: vec![c(2.0)],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.sigma, vec![c(2.0)]);
        assert_eq!(p.tau, vec![c(2.0)]);
        let p = matrix_preset(
            "hermite-corners",
            3,
            None,
            GroundField::R,
            &PresetArgs {
                psi: vec![c(1.0)],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.psi, vec![c(1.0); 3]);
        assert_eq!(p.theta_at(2, 2), c(0.5));
        let p = matrix_preset(
            "laguerre-corners",
            2,
            Some(4),
            GroundField::C,
            &PresetArgs {
                psi: vec![c(1.0)],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.sigma, vec![c(4.0), c(3.0)]);
        assert!(matches!(
            matrix_preset("nope", 2, None, GroundField::C, &PresetArgs::default()),
            Err(Error::UnknownPreset(_))
        ));
        assert!(matches!(
            matrix_preset(
                "hua-rect",
                3,
                Some(2),
                GroundField::C,
                &args_for("hua-rect", 3)
            ),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn gindikin_pos_is_beta_prime_with_uniform_theta() {
        let args = args_for("gindikin-pos", 2);
        let p = matrix_preset("gindikin-pos", 2, None, GroundField::C, &args).unwrap();
        let q = UltraBetaParams::beta_prime(
            args.sigma.clone(),
            args.tau.clone(),
            uniform_theta(2, 1.0),
        )
        .unwrap();
        assert_eq!(log_closed_form(&p).unwrap(), log_closed_form(&q).unwrap());
    }
}
