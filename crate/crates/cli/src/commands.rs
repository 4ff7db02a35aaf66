//! One function per subcommand. Each returns the report and whether the
//! checks it ran passed (always true for plain evaluations).

use crate::error::{CliError, Result};
use crate::output::Report;
use crate::{AnnihilationCase, Command, CycleKind, McCommand, PointArgs, VerifyCommand};
use num_complex::Complex64;
use serde_json::{json, Value};
use sle_core::euler::{
    collapse_limit_check, euler_solution, lemma_check, psi_nonintersection, Configuration, CycleSpec, FrozenEulerSolution,
};
use sle_core::fomin::{fomin_density, fomin_determinant, is_nested};
use sle_core::hexagon::{event_probabilities, g_plus_minus, SymmetricHexConfig};
use sle_core::holonomy::{kappa_inf_basis, verify_annihilation_default, AnnihilationReport, DEFAULT_STEPS};
use sle_core::pairings::{catalan, enumerate_noncrossing_pairings, pairing_to_partition, NonCrossingPairing};
use sle_core::specialfn::chordal_crossing;
use sle_core::ust::{default_step, psi_ust, verify_drift_identity, verify_omega_recursion, FrozenPeriods, PeriodBasis, PERIOD_TOL};
use sle_lattice::{
    estimate_event_probabilities, fomin_discrete, fomin_event_estimate, fomin_sites, DomainSpec, LatticeDomain,
};
use std::path::Path;

type Outcome = Result<(Report, bool)>;

/// Largest n for which `pairings` lists the pairings themselves.
pub const MAX_LISTED_PAIRS: u64 = 10;

pub fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Crossing { r, kappa } => Ok((Report::new(json!({ "psi": chordal_crossing(*r, *kappa)? })), true)),
        Command::Hexagon { theta } => hexagon(*theta),
        Command::Fomin { x, y } => fomin(x, y),
        Command::Ust { x, h } => ust(x, *h),
        Command::Euler { kappa, x, pairing, cycle, tol } => euler(*kappa, x, pairing, *cycle, *tol),
        Command::Verify { check } => verify(check),
        Command::Mc { sim } => mc(sim),
        Command::Pairings { n, count } => pairings(*n, *count),
    }
}

fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn pairing_text(p: &NonCrossingPairing) -> String {
    p.pairs().iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
}

/// The given pairs, or 1-2, 3-4, … when none are given.
fn pairing_or_default(pairs: &[(usize, usize)], n: usize) -> Result<NonCrossingPairing> {
    let p = if pairs.is_empty() {
        NonCrossingPairing::from_pairs(&(0..n).map(|i| (2 * i + 1, 2 * i + 2)).collect::<Vec<_>>())?
    } else {
        NonCrossingPairing::from_pairs(pairs)?
    };
    if p.n() != n {
        return Err(CliError::invalid(format!("pairing has {} pairs but there are {} points", p.n(), 2 * n)));
    }
    Ok(p)
}

/// Default configuration of 2n points.
pub fn default_points(n: usize) -> Vec<f64> {
    match n {
        1 => vec![0.0, 1.0],
        2 => vec![0.0, 0.9, 2.0, 3.3],
        3 => vec![0.0, 1.0, 2.2, 3.0, 4.1, 5.0],
        _ => (0..2 * n).map(|k| k as f64 + 0.2 * (k % 3) as f64).collect(),
    }
}

fn points(p: &PointArgs) -> Result<Vec<f64>> {
    match (p.x.is_empty(), p.n) {
        (true, Some(0)) => Err(CliError::invalid("--n must be positive")),
        (true, Some(n)) => Ok(default_points(n)),
        (true, None) => Err(CliError::invalid("give either --x or --n")),
        (false, Some(n)) if p.x.len() != 2 * n => {
            Err(CliError::invalid(format!("--n {n} needs {} points, --x has {}", 2 * n, p.x.len())))
        }
        (false, _) => Ok(p.x.clone()),
    }
}

fn eight_over_kappa_is_integer(kappa: f64) -> bool {
    let r = 8.0 / kappa;
    r.round() >= 1.0 && (r - r.round()).abs() < 1e-12
}

fn hexagon(theta: f64) -> Outcome {
    let cfg = SymmetricHexConfig::from_degrees(theta)?;
    let (gp, gm) = g_plus_minus(cfg.w)?;
    let events: Vec<Value> = event_probabilities(&cfg)?
        .iter()
        .map(|e| json!({ "blocks": e.partition.blocks(), "probability": e.probability }))
        .collect();
    let v = json!({
        "theta_deg": theta,
        "w": cfg.w,
        "half": cfg.half,
        "g_plus": gp,
        "g_minus": gm,
        "events": events,
    });
    Ok((Report::with_table(v, "events"), true))
}

fn fomin(x: &[f64], y: &[f64]) -> Outcome {
    let det = fomin_determinant(x, y)?;
    let density = if is_nested(x, y) { Some(fomin_density(x, y)?) } else { None };
    Ok((Report::new(json!({ "x": x, "y": y, "determinant": det, "nested": density.is_some(), "density": density })), true))
}

fn ust(x: &[f64], h: Option<f64>) -> Outcome {
    let psi = psi_ust(x)?;
    let h = h.unwrap_or_else(|| default_step(x));
    let rec = verify_omega_recursion(x, h)?;
    let drift = if x.len() >= 6 { Some(verify_drift_identity(x, h)?) } else { None };
    let ok = rec.pass && drift.as_ref().map_or(true, |d| d.pass);
    let drift_json = drift.map(|d| {
        json!({
            "lhs": d.lhs.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
            "residual": d.residual,
            "companion_residual": d.companion_residual,
            "pass": d.pass,
        })
    });
    let v = json!({
        "x": x,
        "psi": psi.psi,
        "det_monomial": complex(psi.det_monomial),
        "det_shifted": complex(psi.det_shifted),
        "h": h,
        "recursion": { "residuals": rec.residuals, "max_residual": rec.max_residual, "pass": rec.pass },
        "drift": drift_json,
    });
    Ok((Report::new(v), ok))
}

fn euler(kappa: f64, x: &[f64], pairs: &[(usize, usize)], cycle: CycleKind, tol: f64) -> Outcome {
    let cfg = Configuration::new(x.to_vec(), kappa)?;
    let (integral, pairing, psi) = match cycle {
        CycleKind::Nested => {
            if !pairs.is_empty() {
                return Err(CliError::invalid("--pairing does not apply to the nested cycle"));
            }
            (euler_solution(&cfg, &CycleSpec::Nested, tol)?, None, None)
        }
        CycleKind::Pairing => {
            let p = pairing_or_default(pairs, cfg.n())?;
            if kappa < 8.0 / 3.0 && !eight_over_kappa_is_integer(kappa) {
                let r = psi_nonintersection(&cfg, &p, tol)?;
                (r.integral, Some(pairing_text(&p)), Some(r.psi))
            } else {
                (euler_solution(&cfg, &CycleSpec::pairing_product(p.clone()), tol)?, Some(pairing_text(&p)), None)
            }
        }
    };
    let v = json!({
        "kappa": kappa,
        "x": x,
        "cycle": match cycle { CycleKind::Pairing => "pairing", CycleKind::Nested => "nested" },
        "pairing": pairing,
        "integral": complex(integral),
        "modulus": integral.norm(),
        "psi": psi,
    });
    Ok((Report::new(v), true))
}

fn verify(check: &VerifyCommand) -> Outcome {
    match check {
        VerifyCommand::Annihilation { case, points: pa, kappa, pairing, tol } => {
            let x = points(pa)?;
            annihilation(*case, &x, *kappa, pairing, *tol)
        }
        VerifyCommand::Lemma { points: pa, kappa, u } => lemma(&points(pa)?, *kappa, u),
        VerifyCommand::Collapse { points: pa, kappa, pairing, k, tol } => {
            let cfg = Configuration::new(points(pa)?, *kappa)?;
            let p = pairing_or_default(pairing, cfg.n())?;
            let r = collapse_limit_check(&cfg, &p, *k, *tol)?;
            let v = json!({
                "kappa": kappa,
                "x": cfg.x,
                "pairing": pairing_text(&p),
                "k": k,
                "eps": r.eps,
                "scaled": r.scaled,
                "limit": r.limit,
                "expected": r.expected,
                "rel_error": r.rel_error,
                "pass": r.pass,
            });
            Ok((Report::new(v), r.pass))
        }
        VerifyCommand::KappaInf { n } => {
            let dim = kappa_inf_basis(*n)?.dimension() as u64;
            let c = catalan(*n as u64)?;
            Ok((Report::new(json!({ "n": n, "dimension": dim, "catalan": c, "pass": dim == c })), dim == c))
        }
    }
}

fn fixed_kappa(given: Option<f64>, fixed: f64, case: &str) -> Result<f64> {
    match given {
        Some(k) if k != fixed => Err(CliError::invalid(format!("the {case} case is a solution only at κ = {fixed}"))),
        _ => Ok(fixed),
    }
}

fn annihilation(case: AnnihilationCase, x: &[f64], kappa: Option<f64>, pairs: &[(usize, usize)], tol: f64) -> Outcome {
    let n = x.len() / 2;
    if !pairs.is_empty() && case != AnnihilationCase::Euler {
        return Err(CliError::invalid("--pairing applies only to the euler case"));
    }
    let (name, kappa, rep): (&str, f64, AnnihilationReport) = match case {
        AnnihilationCase::Euler => {
            let kappa = kappa.unwrap_or(3.0);
            let cfg = Configuration::new(x.to_vec(), kappa)?;
            let p = pairing_or_default(pairs, cfg.n())?;
            let f = FrozenEulerSolution::new(&cfg, &CycleSpec::pairing_product(p), tol)?;
            ("euler", kappa, verify_annihilation_default(&|y: &[f64]| f.eval(y), x, kappa)?)
        }
        AnnihilationCase::Kappa2Det => {
            let kappa = fixed_kappa(kappa, 2.0, "kappa2-det")?;
            // Columns x_{2n}, …, x_{n+1}: the nested ordering.
            let f = |y: &[f64]| {
                let m = y.len() / 2;
                let outer: Vec<f64> = y[m..].iter().rev().copied().collect();
                fomin_determinant(&y[..m], &outer).map(|d| Complex64::new(d, 0.0))
            };
            ("kappa2-det", kappa, verify_annihilation_default(&f, x, kappa)?)
        }
        AnnihilationCase::Ust => {
            let kappa = fixed_kappa(kappa, 8.0, "ust")?;
            let frozen = FrozenPeriods::new(x, PeriodBasis::Shifted, PERIOD_TOL.max(tol))?;
            ("ust", kappa, verify_annihilation_default(&|y: &[f64]| frozen.psi_complex(y), x, kappa)?)
        }
    };
    let ops: Vec<Value> = rep
        .operators
        .iter()
        .map(|o| {
            json!({
                "operator": o.operator,
                "order": o.order,
                "noise_floor": o.noise_floor,
                "pass": o.pass,
                "residuals": o.residuals,
            })
        })
        .collect();
    let v = json!({
        "case": name,
        "n": n,
        "kappa": kappa,
        "x": x,
        "steps": rep.steps,
        "pass": rep.pass,
        "order": rep.order,
        "operators": ops,
    });
    Ok((Report::with_table(v, "operators"), rep.pass))
}

/// Default integration points: above the gaps between consecutive pairs.
pub fn default_u(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() / 2;
    (0..n.saturating_sub(1)).map(|i| Complex64::new(0.5 * (x[2 * i + 1] + x[2 * i + 2]), 0.5)).collect()
}

fn lemma(x: &[f64], kappa: f64, u: &[(f64, f64)]) -> Outcome {
    let cfg = Configuration::new(x.to_vec(), kappa)?;
    let u: Vec<Complex64> = if u.is_empty() { default_u(x) } else { u.iter().map(|&(a, b)| Complex64::new(a, b)).collect() };
    if u.len() + 1 != cfg.n() {
        return Err(CliError::invalid(format!("need {} integration points, got {}", cfg.n() - 1, u.len())));
    }
    let steps: Vec<f64> = DEFAULT_STEPS.iter().map(|s| s * cfg.min_gap()).collect();
    let reports = (1..=x.len()).map(|k| lemma_check(&cfg, &u, k, &steps)).collect::<std::result::Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let checks: Vec<Value> =
        reports.iter().map(|r| json!({ "k": r.k, "order": r.order, "pass": r.pass, "residuals": r.residuals })).collect();
    let v = json!({
        "kappa": kappa,
        "x": x,
        "u": u.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "steps": steps,
        "pass": pass,
        "checks": checks,
    });
    Ok((Report::with_table(v, "checks"), pass))
}

fn pairings(n: u64, count: bool) -> Outcome {
    let c = catalan(n)?;
    if count {
        return Ok((Report::new(json!({ "catalan": c })), true));
    }
    if n > MAX_LISTED_PAIRS {
        return Err(CliError::invalid(format!("listing is limited to n ≤ {MAX_LISTED_PAIRS}; use --count")));
    }
    let rows = enumerate_noncrossing_pairings(n as usize)
        .iter()
        .map(|p| Ok(json!({ "pairs": pairing_text(p), "blue_partition": pairing_to_partition(p)?.blocks() })))
        .collect::<Result<Vec<_>>>()?;
    Ok((Report::with_table(json!({ "n": n, "catalan": c, "pairings": rows }), "pairings"), true))
}

/// Reads a domain file, or parses a preset hexagon:MESH, lozenge:MESH or square:SIZE.
pub fn load_domain(arg: &str) -> Result<DomainSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{arg}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{arg}: {e}")));
    }
    let bad = || CliError::invalid(format!("{arg:?} is neither a domain file nor a preset (hexagon:MESH, lozenge:MESH, square:SIZE)"));
    let (kind, param) = arg.split_once(':').ok_or_else(bad)?;
    match kind {
        "hexagon" | "lozenge" => {
            let mesh: f64 = param.parse().map_err(|_| bad())?;
            Ok(if kind == "hexagon" { DomainSpec::regular_hexagon(mesh) } else { DomainSpec::lozenge(mesh) })
        }
        "square" => Ok(DomainSpec::Square { size: param.parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

fn build(spec: &DomainSpec) -> Result<(LatticeDomain, Value)> {
    let dom = spec.build()?;
    let v = serde_json::to_value(spec).map_err(|e| CliError::invalid(e.to_string()))?;
    Ok((dom, v))
}

fn mc(sim: &McCommand) -> Outcome {
    match sim {
        McCommand::Percolation { domain, n_samples, seed } => {
            let (dom, spec) = build(&load_domain(domain)?)?;
            let est = estimate_event_probabilities(&dom, *n_samples, *seed)?;
            let events: Vec<Value> = est
                .events
                .iter()
                .map(|e| json!({ "blocks": e.partition.blocks(), "count": e.count, "frequency": e.frequency, "stderr": e.stderr }))
                .collect();
            let v = json!({ "domain": spec, "sites": dom.n_sites(), "n_samples": n_samples, "seed": seed, "events": events });
            Ok((Report::with_table(v, "events"), true))
        }
        McCommand::Fomin { domain, x, y, n_samples, seed } => {
            let (dom, spec) = build(&load_domain(domain)?)?;
            let (xs, ys) = fomin_sites(&dom, x, y)?;
            let exact = fomin_discrete(&dom, &xs, &ys)?;
            let est = fomin_event_estimate(&dom, &xs, &ys, *n_samples, *seed)?;
            let z = if est.stderr > 0.0 { Some((est.frequency - exact.determinant) / est.stderr) } else { None };
            let v = json!({
                "domain": spec,
                "sites": dom.n_sites(),
                "x_sites": xs.iter().map(|&b| dom.boundary[b].coord).collect::<Vec<_>>(),
                "y_sites": ys.iter().map(|&v| dom.coords[v]).collect::<Vec<_>>(),
                "n_samples": n_samples,
                "seed": seed,
                "count": est.count,
                "frequency": est.frequency,
                "stderr": est.stderr,
                "determinant": exact.determinant,
                "normalized": exact.normalized,
                "z": z,
            });
            Ok((Report::new(v), true))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        for n in 1..6 {
            let x = default_points(n);
            assert_eq!(x.len(), 2 * n);
            assert!(x.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(default_u(&x).len(), n - 1);
        }
        assert!(eight_over_kappa_is_integer(2.0) && eight_over_kappa_is_integer(8.0 / 3.0));
        assert!(!eight_over_kappa_is_integer(2.5) && !eight_over_kappa_is_integer(9.0));
    }

    #[test]
    fn presets() {
        assert_eq!(load_domain("lozenge:0.1").unwrap(), DomainSpec::lozenge(0.1));
        assert_eq!(load_domain("square:12").unwrap(), DomainSpec::Square { size: 12 });
        assert!(load_domain("circle:3").is_err());
        assert!(load_domain("hexagon:x").is_err());
    }
}
