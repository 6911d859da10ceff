use std::collections::BTreeMap;
use std::fs;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use ultrabeta::integrands::{log_closed_form, selberg_rhs, Family, UltraBetaParams};
use ultrabeta::matrixcheck::{corners_vs_chain, matching_chain, matrix_triangles};
use ultrabeta::montecarlo::{
    compare_marginals, marginal_transform, mc_integrate, mc_selberg, ProposalSpec, TwoSampleConfig,
    TwoSampleVerdict,
};
use ultrabeta::patterns::{RayleighTriangle, ValidationVerdict};
use ultrabeta::quadrature::{integrate_ultra, QuadratureSpec};
use ultrabeta::sampler::{sample_many, to_ndjson, ChainSpec};
use ultrabeta::Complex64;

use crate::defaults::default_params;
use crate::{ChainArgs, Cli, Command, CornersArgs, SampleArgs, VerifyArgs};

/// Result of a command before it is wrapped in the report envelope.
pub struct Outcome {
    pub pass: bool,
    pub details: Value,
    /// The primary output went to stdout, so the report goes to stderr.
    pub report_to_stderr: bool,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Verify(a) => verify(cli, a),
        Command::Sample(a) => sample(cli, a),
        Command::Projectivity(a) => projectivity(cli, a),
        Command::Corners(a) => corners(cli, a),
    }
}

pub fn emit_report(cli: &Cli, report: &Value, to_stderr: bool) -> Result<()> {
    let text = report.to_string();
    if to_stderr {
        eprintln!("{text}");
        return Ok(());
    }
    match &cli.out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn resolve_params(args: &ChainArgs, default_n: usize) -> Result<UltraBetaParams> {
    if let Some(path) = &args.params {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let p = UltraBetaParams::from_json(&text)?;
        if args.family.is_some_and(|f| f != p.family) {
            bail!("--family disagrees with the parameter file ({})", p.family);
        }
        if args.n.is_some_and(|n| n != p.n) {
            bail!("--n disagrees with the parameter file (n = {})", p.n);
        }
        return Ok(p);
    }
    let family = args.family.unwrap_or(Family::BetaPrime);
    let n = args.n.unwrap_or(default_n);
    if !(args.theta > 0.0) {
        bail!("--theta must be positive");
    }
    Ok(default_params(family, n, args.theta)?)
}

fn complex_json(z: Complex64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn parse_selberg(items: &[String]) -> Result<(usize, f64, f64, f64)> {
    let mut kv = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("expected KEY=VALUE, got `{item}`"))?;
        let v: f64 = v
            .trim()
            .parse()
            .with_context(|| format!("value of `{k}`"))?;
        kv.insert(k.trim().to_ascii_lowercase(), v);
    }
    let get = |k: &str| {
        kv.get(k)
            .copied()
            .ok_or_else(|| anyhow!("--selberg needs `{k}`"))
    };
    let n = get("n")?;
    if n < 1.0 || n.fract() != 0.0 {
        bail!("n must be a positive integer");
    }
    Ok((n as usize, get("theta")?, get("sigma")?, get("tau")?))
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    if let Some(items) = &a.selberg {
        return verify_selberg(cli, a, items);
    }
    let p = resolve_params(&a.chain, 2)?;
    p.check_convergence()?;
    let cf = log_closed_form(&p)?.exp();
    let vars: usize = (p.base_row()..=p.n).sum();
    let (method, estimate, se, report, pass) = if vars <= 3 {
        let r = integrate_ultra(&p, &QuadratureSpec::with_tol(a.tol / 10.0))?;
        let im = r.diag.get("imag").and_then(Value::as_f64).unwrap_or(0.0);
        let est = Complex64::new(r.value, im);
        let rel = (est - cf).norm() / cf.norm();
        (
            "quadrature",
            est,
            r.se,
            serde_json::to_value(&r)?,
            rel <= a.tol,
        )
    } else {
        let r = mc_integrate(&p, &ProposalSpec::Exact, a.samples, cli.seed)?;
        let se = r.se.unwrap_or(f64::INFINITY);
        let ok = (r.value - cf.re).abs() <= 3.0 * se + a.tol * cf.norm();
        (
            "monte-carlo",
            Complex64::new(r.value, 0.0),
            r.se,
            serde_json::to_value(&r)?,
            ok,
        )
    };
    let details = json!({
        "family": p.family.name(),
        "n": p.n,
        "method": method,
        "estimate": complex_json(estimate),
        "se": se,
        "closed_form": complex_json(cf),
        "rel_error": (estimate - cf).norm() / cf.norm(),
        "tol": a.tol,
        "report": report,
    });
    Ok(Outcome {
        pass,
        details,
        report_to_stderr: false,
    })
}

fn verify_selberg(cli: &Cli, a: &VerifyArgs, items: &[String]) -> Result<Outcome> {
    let (n, theta, sigma, tau) = parse_selberg(items)?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let rhs = selberg_rhs(n, c(sigma), c(tau), c(theta))?.exp().re;
    let (method, r, pass) = if n <= 2 {
        let p =
            UltraBetaParams::trapezoid(n, n, c(theta), vec![c(sigma)], vec![c(tau)], Vec::new())?;
        let r = integrate_ultra(&p, &QuadratureSpec::with_tol(a.tol / 10.0))?;
        let ok = r.rel_error(rhs) <= a.tol;
        ("quadrature", r, ok)
    } else {
        let r = mc_selberg(n, sigma, tau, theta, a.samples, cli.seed)?;
        let ok = (r.value - rhs).abs() <= 3.0 * r.se.unwrap_or(f64::INFINITY);
        ("monte-carlo", r, ok)
    };
    let details = json!({
        "selberg": { "n": n, "theta": theta, "sigma": sigma, "tau": tau },
        "method": method,
        "estimate": r.value,
        "se": r.se,
        "closed_form": rhs,
        "rel_error": r.rel_error(rhs),
        "tol": a.tol,
    });
    Ok(Outcome {
        pass,
        details,
        report_to_stderr: false,
    })
}

/// `source,row,index,bin_left,bin_right,count` rows, 40 equal bins per marginal.
fn histogram_csv(sets: &[(&str, &[RayleighTriangle])]) -> String {
    const BINS: usize = 40;
    let mut out = String::from("source,row,index,bin_left,bin_right,count\n");
    for (label, tris) in sets {
        let Some(first) = tris.first() else { continue };
        for j in 1..=first.size() {
            for k in 1..=j {
                let xs: Vec<f64> = tris
                    .iter()
                    .map(|t| t.entry(j, k))
                    .filter(|x| x.is_finite())
                    .collect();
                let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(lo.is_finite() && hi.is_finite()) {
                    continue;
                }
                let width = if hi > lo {
                    (hi - lo) / BINS as f64
                } else {
                    1.0
                };
                let mut counts = [0usize; BINS];
                for x in &xs {
                    let b = (((x - lo) / width) as usize).min(BINS - 1);
                    counts[b] += 1;
                }
                for (b, count) in counts.iter().enumerate() {
                    let left = lo + b as f64 * width;
                    out.push_str(&format!(
                        "{label},{j},{k},{left},{},{count}\n",
                        left + width
                    ));
                }
            }
        }
    }
    out
}

fn write_csv(cli: &Cli, sets: &[(&str, &[RayleighTriangle])]) -> Result<()> {
    if let Some(path) = &cli.emit_csv {
        fs::write(path, histogram_csv(sets))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<Outcome> {
    let p = resolve_params(&a.chain, 3)?;
    if p.family == Family::Trapezoid {
        bail!("sample draws full triangles; use a triangle family");
    }
    let window = p.domain();
    let spec = ChainSpec::new(p)?;
    let tris = sample_many(&spec, a.samples, cli.seed)?;
    let valid = tris
        .iter()
        .filter(|t| t.validate_with_tol(&window, 0.0) == ValidationVerdict::Ok)
        .count();
    let text = to_ndjson(&tris);
    let to_stdout = cli.out.is_none();
    match &cli.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    write_csv(cli, &[("chain", &tris)])?;
    let details = json!({
        "family": spec.params().family.name(),
        "n": spec.depth(),
        "count": tris.len(),
        "seed": cli.seed,
        "valid": valid,
    });
    Ok(Outcome {
        pass: valid == tris.len(),
        details,
        report_to_stderr: to_stdout,
    })
}

fn verdict_json(marginals: &[((usize, usize), TwoSampleVerdict)]) -> Value {
    Value::Array(
        marginals
            .iter()
            .map(|((j, k), v)| {
                json!({
                    "row": j,
                    "index": k,
                    "z": v.z_scores,
                    "ks": v.ks_statistic,
                    "p": v.ks_p_value,
                    "pass": v.pass,
                    "underpowered": v.underpowered,
                })
            })
            .collect(),
    )
}

fn projectivity(cli: &Cli, a: &SampleArgs) -> Result<Outcome> {
    let deep = match &a.chain.params {
        Some(_) => resolve_params(&a.chain, 3)?,
        None => {
            let n = a.chain.n.unwrap_or(2);
            let family = a.chain.family.unwrap_or(Family::BetaPrime);
            default_params(family, n + 1, a.chain.theta)?
        }
    };
    if deep.family == Family::Trapezoid {
        bail!("projectivity needs a triangle family");
    }
    if deep.n < 2 {
        bail!("projectivity needs depth at least 2");
    }
    let shallow = deep.truncated(deep.n - 1)?;
    let projected: Vec<RayleighTriangle> =
        sample_many(&ChainSpec::new(deep.clone())?, a.samples, cli.seed)?
            .iter()
            .map(RayleighTriangle::project)
            .collect::<ultrabeta::Result<_>>()?;
    let direct = sample_many(
        &ChainSpec::new(shallow)?,
        a.samples,
        cli.seed.wrapping_add(1),
    )?;
    let marginals = compare_marginals(
        &projected,
        &direct,
        marginal_transform(deep.family),
        &TwoSampleConfig::default(),
    )?;
    write_csv(cli, &[("projected", &projected), ("direct", &direct)])?;
    let pass = marginals.iter().all(|(_, v)| v.pass);
    let details = json!({
        "family": deep.family.name(),
        "n": deep.n - 1,
        "samples": a.samples,
        "seed": cli.seed,
        "marginals": verdict_json(&marginals),
    });
    Ok(Outcome {
        pass,
        details,
        report_to_stderr: false,
    })
}

fn corners(cli: &Cli, a: &CornersArgs) -> Result<Outcome> {
    let r = corners_vs_chain(a.field, a.n, a.m, a.psi, a.samples, cli.seed)?;
    if cli.emit_csv.is_some() {
        let matrices = matrix_triangles(a.field, a.n, a.m, a.psi, a.samples, cli.seed)?;
        let chain = sample_many(
            &matching_chain(a.field, a.n, a.m, a.psi)?,
            a.samples,
            cli.seed.wrapping_add(1),
        )?;
        write_csv(cli, &[("matrix", &matrices), ("chain", &chain)])?;
    }
    let details = json!({
        "field": format!("{:?}", a.field),
        "n": a.n,
        "m": a.m,
        "psi": a.psi,
        "samples": a.samples,
        "seed": cli.seed,
        "interlacing_rate": r.interlacing_rate,
        "nonnegative": r.nonnegative,
        "marginals": verdict_json(&r.marginals),
    });
    Ok(Outcome {
        pass: r.pass,
        details,
        report_to_stderr: false,
    })
}
