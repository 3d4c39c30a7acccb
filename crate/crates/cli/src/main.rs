//! Reproducible experiment driver: sample ensembles, tabulate limit laws,
//! run the master-system solver, and compare spectra against laws.
//!
//! Exit codes: 0 success/pass, 2 configuration error, 3 numeric or
//! convergence error, 4 statistical fail.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use config::{
    CompareConfig, LawConfig, SimulateConfig, SolveConfig, UniversalityConfig,
};
use output::{config_hash, fmt, write_csv, write_json};

use rmtlab::ensembles::{assemble, sample_tuple};
use rmtlab::freeprob::{symmetric_s, MomentSeries};
use rmtlab::gof::{
    angular_uniformity_ks, ks_distance, universality_test, CdfTarget, GoFReport, KOLMOGOROV_Q99,
};
use rmtlab::solver::{density_from_psi, solve_psi_kappa, RadialGrid, SvTransform};
use rmtlab::spectra::{
    condition_diagnostics, eigenvalues, singular_values, ComplexSpectrum, EmpiricalMeasure,
};
use rmtlab::Error;

#[derive(Parser)]
#[command(name = "rmtlab", version, about = "Spectral-limit laboratory for random matrix ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the trial count from the configuration.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample matrix ensembles and write per-trial spectra.
    Simulate(Common),
    /// Tabulate a limit law's density and CDF on a grid.
    Law(Common),
    /// Run the radial master-system solver for an eigenvalue law.
    Solve(Common),
    /// Compare spectra files against a law or each other.
    Compare(Common),
    /// Paired two-law universality runs.
    Universality(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&Common) -> Result<bool, Error>) = match &cli.command {
        Command::Simulate(c) => (c, cmd_simulate),
        Command::Law(c) => (c, cmd_law),
        Command::Solve(c) => (c, cmd_solve),
        Command::Compare(c) => (c, cmd_compare),
        Command::Universality(c) => (c, cmd_universality),
    };
    if let Some(threads) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NonConvergence { .. }
                | Error::Branch(_)
                | Error::OscillatingLimit { .. }
                | Error::ZeroPivot { .. }
                | Error::Singular { .. }
                | Error::LogSingular => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned + serde::Serialize>(
    path: &Path,
) -> Result<(T, String), Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: T = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
    let canonical = serde_json::to_string(&parsed)
        .map_err(|e| Error::Config(format!("cannot canonicalize configuration: {e}")))?;
    let hash = config_hash(&canonical);
    Ok((parsed, hash))
}

fn cmd_simulate(common: &Common) -> Result<bool, Error> {
    let (mut cfg, _) = load_config::<SimulateConfig>(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    let canonical = serde_json::to_string(&cfg).unwrap();
    let hash = config_hash(&canonical);

    let spec = cfg.ensemble.function_spec()?;
    let law = cfg.ensemble.entry_law()?;
    match cfg.mode.as_str() {
        "singular" | "eigen" => {}
        other => return Err(Error::Config(format!("unknown mode '{other}'"))),
    }
    if cfg.trials == 0 {
        eprintln!("warning: trials = 0, writing empty summary");
        let summary = serde_json::json!({
            "trials": 0, "failures": 0, "mode": cfg.mode,
        });
        write_json(&common.out.join("summary.json"), &hash, &summary)?;
        return Ok(true);
    }

    struct TrialOut {
        rows: Vec<String>,
        smallest: f64,
        largest: f64,
        count: usize,
        diag: Option<(f64, f64, f64, bool)>,
        failed: Option<String>,
    }

    let results: Vec<TrialOut> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = cfg.seed.wrapping_add(t);
            let run = || -> Result<TrialOut, Error> {
                let tuple = sample_tuple(&spec, law, seed)?;
                let f = assemble(&spec, &tuple)?;
                let (rows, smallest, largest, count) = if cfg.mode == "singular" {
                    let s = singular_values(&f)?;
                    (
                        s.values().iter().map(|v| fmt(*v)).collect::<Vec<_>>(),
                        s.smallest(),
                        s.largest(),
                        s.dim(),
                    )
                } else {
                    let ev = eigenvalues(&f)?;
                    let mags: Vec<f64> = ev.moduli();
                    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = mags.iter().cloned().fold(0.0f64, f64::max);
                    (
                        ev.values()
                            .iter()
                            .map(|z| format!("{},{}", fmt(z.re), fmt(z.im)))
                            .collect(),
                        lo,
                        hi,
                        ev.values().len(),
                    )
                };
                let diag = match &cfg.diagnostics {
                    Some(d) => {
                        let alpha = Complex64::new(d.alpha[0], d.alpha[1]);
                        let out = condition_diagnostics(&f, alpha, d.p, d.gamma, d.delta)?;
                        Some((out.c0, out.c1_smallest, out.c2_tail, out.c2_window_empty))
                    }
                    None => None,
                };
                Ok(TrialOut {
                    rows,
                    smallest,
                    largest,
                    count,
                    diag,
                    failed: None,
                })
            };
            run().unwrap_or_else(|e| TrialOut {
                rows: Vec::new(),
                smallest: f64::NAN,
                largest: f64::NAN,
                count: 0,
                diag: None,
                failed: Some(e.to_string()),
            })
        })
        .collect();

    let header = if cfg.mode == "singular" { "s" } else { "re,im" };
    let mut failures = Vec::new();
    for (t, r) in results.iter().enumerate() {
        if let Some(msg) = &r.failed {
            failures.push(serde_json::json!({ "trial": t, "error": msg }));
            continue;
        }
        let path = common.out.join(format!("trial_{t:04}.csv"));
        write_csv(&path, &hash, header, &r.rows)?;
    }
    let ok: Vec<&TrialOut> = results.iter().filter(|r| r.failed.is_none()).collect();
    let min_sv = ok.iter().map(|r| r.smallest).fold(f64::INFINITY, f64::min);
    let max_sv = ok.iter().map(|r| r.largest).fold(0.0f64, f64::max);
    let diag_summary = if ok.iter().any(|r| r.diag.is_some()) {
        let picked: Vec<&(f64, f64, f64, bool)> = ok.iter().filter_map(|r| r.diag.as_ref()).collect();
        let mean =
            |sel: &dyn Fn(&(f64, f64, f64, bool)) -> f64| -> f64 {
                picked.iter().map(|d| sel(d)).sum::<f64>() / picked.len() as f64
            };
        serde_json::json!({
            "c0_mean": mean(&|d| d.0),
            "c1_smallest_mean": mean(&|d| d.1),
            "c2_tail_mean": mean(&|d| d.2),
            "c2_window_empty": picked.iter().any(|d| d.3),
        })
    } else {
        serde_json::Value::Null
    };
    let summary = serde_json::json!({
        "mode": cfg.mode,
        "trials": cfg.trials,
        "values_per_trial": ok.first().map_or(0, |r| r.count),
        "min_singular_value": if min_sv.is_finite() { min_sv } else { 0.0 },
        "max_singular_value": max_sv,
        "failures": failures.len(),
        "failed_trials": failures,
        "diagnostics": diag_summary,
    });
    write_json(&common.out.join("summary.json"), &hash, &summary)?;
    Ok(true)
}

fn cmd_law(common: &Common) -> Result<bool, Error> {
    let (cfg, hash) = load_config::<LawConfig>(&common.config)?;
    let law = cfg.law.build()?;
    let g = &cfg.grid;
    if g.step <= 0.0 || g.max <= g.min {
        return Err(Error::Config("law grid needs min < max and step > 0".into()));
    }
    let count = ((g.max - g.min) / g.step).round() as usize + 1;
    let header = if law.is_radial() {
        "r,f,radial_cdf"
    } else {
        "x,density,cdf"
    };
    let rows: Vec<String> = (0..count)
        .map(|i| {
            let x = g.min + g.step * i as f64;
            format!("{},{},{}", fmt(x), fmt(law.density(x)), fmt(law.cdf(x)))
        })
        .collect();
    write_csv(&common.out.join("law.csv"), &hash, header, &rows)?;
    Ok(true)
}

fn cmd_solve(common: &Common) -> Result<bool, Error> {
    let (cfg, hash) = load_config::<SolveConfig>(&common.config)?;
    let sv: SvTransform = match (&cfg.law, &cfg.moments) {
        (Some(id), None) => id.build()?.sv_transform()?,
        (None, Some(m)) => {
            let ms = MomentSeries::new(m.clone())?;
            SvTransform::from_series("config-moments", &symmetric_s(&ms)?)?
        }
        _ => {
            return Err(Error::Config(
                "solve needs exactly one of `law` or `moments`".into(),
            ))
        }
    };
    let grid = RadialGrid {
        r0: cfg.radial.r0,
        r_max: cfg.radial.r_max,
        step: cfg.radial.step,
    };
    let field = solve_psi_kappa(&sv, &grid)?;
    let dens = density_from_psi(&field)?;
    let rows: Vec<String> = (0..field.r.len())
        .map(|i| {
            let residual = (field.psi[i] * (1.0 - field.psi[i])
                - field.r[i] * field.r[i] * field.kappa[i] * field.kappa[i])
                .abs();
            format!(
                "{},{},{},{},{}",
                fmt(field.r[i]),
                fmt(field.psi[i]),
                fmt(field.kappa[i]),
                fmt(dens.f[i]),
                fmt(residual)
            )
        })
        .collect();
    write_csv(
        &common.out.join("solve.csv"),
        &hash,
        "r,psi,kappa,f,residual",
        &rows,
    )?;
    let sidecar = serde_json::json!({
        "transitions": field.transitions,
        "multiplicity_radii": field.multiplicity,
        "resolution_warnings": dens.resolution_warnings,
        "mass": dens.mass(),
    });
    write_json(&common.out.join("transitions.json"), &hash, &sidecar)?;
    Ok(true)
}

/// Values from a spectra CSV written by `simulate` (comments and the
/// header row are skipped).
fn read_spectra(path: &str) -> Result<Vec<Vec<f64>>, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(v) => rows.push(v),
            Err(_) => continue, // header row
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("no numeric rows in {path}")));
    }
    Ok(rows)
}

fn spectra_to_measure(rows: &[Vec<f64>], convention: &str) -> Result<EmpiricalMeasure, Error> {
    let values: Vec<f64> = match convention {
        "squared" => rows
            .iter()
            .map(|r| {
                if r.len() == 1 {
                    Ok(r[0] * r[0])
                } else {
                    Err(Error::Config(
                        "squared convention expects singular-value rows".into(),
                    ))
                }
            })
            .collect::<Result<_, _>>()?,
        "raw" => rows
            .iter()
            .map(|r| {
                if r.len() == 1 {
                    Ok(r[0])
                } else {
                    Err(Error::Config("raw convention expects singular-value rows".into()))
                }
            })
            .collect::<Result<_, _>>()?,
        "radial" => rows
            .iter()
            .map(|r| {
                if r.len() == 2 {
                    Ok((r[0] * r[0] + r[1] * r[1]).sqrt())
                } else {
                    Err(Error::Config("radial convention expects re,im rows".into()))
                }
            })
            .collect::<Result<_, _>>()?,
        other => {
            return Err(Error::Config(format!(
                "unknown convention '{other}' (expected squared, raw, radial, angular)"
            )))
        }
    };
    EmpiricalMeasure::new(values)
}

fn cmd_compare(common: &Common) -> Result<bool, Error> {
    let (cfg, hash) = load_config::<CompareConfig>(&common.config)?;
    let report: GoFReport = match (cfg.spectra.len(), &cfg.law) {
        (1, Some(law_id)) => {
            let law = law_id.build()?;
            let rows = read_spectra(&cfg.spectra[0])?;
            if law.is_radial() != matches!(cfg.convention.as_str(), "radial" | "angular") {
                return Err(Error::Config(format!(
                    "law {} does not match convention '{}'",
                    law.name(),
                    cfg.convention
                )));
            }
            // Catalog 1-D laws live on the squared-singular-value axis.
            if !law.is_radial() && cfg.convention != "squared" {
                return Err(Error::Config(format!(
                    "law {} uses the squared singular-value convention, not '{}'",
                    law.name(),
                    cfg.convention
                )));
            }
            let (value, n, statistic) = match cfg.convention.as_str() {
                "angular" => {
                    let values: Vec<Complex64> = rows
                        .iter()
                        .map(|r| Complex64::new(r[0], *r.get(1).unwrap_or(&0.0)))
                        .collect();
                    let spec = ComplexSpectrum::from_values(values);
                    (angular_uniformity_ks(&spec)?, rows.len(), "angular-ks")
                }
                "radial" => {
                    let emp = spectra_to_measure(&rows, "radial")?;
                    let n = emp.len();
                    (ks_distance(&emp, &CdfTarget::Law(&law)), n, "radial-ks")
                }
                _ => {
                    let emp = spectra_to_measure(&rows, &cfg.convention)?;
                    let n = emp.len();
                    (ks_distance(&emp, &CdfTarget::Law(&law)), n, "ks")
                }
            };
            let threshold = cfg
                .threshold
                .unwrap_or_else(|| cfg.quantile.unwrap_or(KOLMOGOROV_Q99) / (n as f64).sqrt());
            GoFReport {
                statistic: statistic.into(),
                value,
                threshold,
                pass: value <= threshold,
                n,
                n2: None,
                law: law.name(),
                convention: cfg.convention.clone(),
                seed: cfg.seed,
            }
        }
        (2, _) => {
            let a = spectra_to_measure(&read_spectra(&cfg.spectra[0])?, &cfg.convention)?;
            let b = spectra_to_measure(&read_spectra(&cfg.spectra[1])?, &cfg.convention)?;
            universality_test(
                &a,
                &b,
                cfg.quantile.unwrap_or(KOLMOGOROV_Q99),
                "two-sample",
                cfg.seed,
            )
        }
        _ => {
            return Err(Error::Config(
                "compare needs one spectra file plus a law, or two spectra files".into(),
            ))
        }
    };
    let pass = report.pass;
    write_json(
        &common.out.join("compare.json"),
        &hash,
        &serde_json::to_value(&report).unwrap(),
    )?;
    println!(
        "{}: value {:.5} vs threshold {:.5} -> {}",
        report.statistic,
        report.value,
        report.threshold,
        if pass { "pass" } else { "fail" }
    );
    Ok(pass)
}

fn cmd_universality(common: &Common) -> Result<bool, Error> {
    let (mut cfg, _) = load_config::<UniversalityConfig>(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    let canonical = serde_json::to_string(&cfg).unwrap();
    let hash = config_hash(&canonical);

    let spec = cfg.ensemble.function_spec()?;
    let law_a = cfg.ensemble.entry_law()?;
    let mut cfg_b = cfg.ensemble.clone();
    cfg_b.entry_law = cfg.entry_law_b.clone();
    cfg_b.two_point_p = cfg.two_point_p_b;
    let law_b = cfg_b.entry_law()?;
    if cfg.trials == 0 {
        return Err(Error::Config("universality needs trials >= 1".into()));
    }

    let quantile = cfg.quantile.unwrap_or(KOLMOGOROV_Q99);
    let reports: Vec<GoFReport> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<GoFReport, Error> {
            let sample = |law, seed| -> Result<EmpiricalMeasure, Error> {
                let tuple = sample_tuple(&spec, law, seed)?;
                let f = assemble(&spec, &tuple)?;
                let s = singular_values(&f)?;
                Ok(EmpiricalMeasure::from_squared_singular(&s))
            };
            let a = sample(law_a, cfg.seed.wrapping_add(2 * t))?;
            let b = sample(law_b, cfg.seed.wrapping_add(2 * t + 1))?;
            Ok(universality_test(
                &a,
                &b,
                quantile,
                &format!("{} vs {}", cfg.ensemble.entry_law, cfg.entry_law_b),
                Some(cfg.seed.wrapping_add(2 * t)),
            ))
        })
        .collect::<Result<_, _>>()?;

    let passes = reports.iter().filter(|r| r.pass).count();
    let need = (cfg.pass_fraction.unwrap_or(0.95) * cfg.trials as f64).ceil() as usize;
    let overall = passes >= need;
    let body = serde_json::json!({
        "pairs": cfg.trials,
        "passes": passes,
        "required": need,
        "pass": overall,
        "quantile": quantile,
        "reports": reports,
    });
    write_json(&common.out.join("universality.json"), &hash, &body)?;
    println!("universality: {passes}/{} paired runs passed -> {}", cfg.trials, if overall { "pass" } else { "fail" });
    Ok(overall)
}
