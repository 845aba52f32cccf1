//! `tscale`: command-line front end for the scaling-function library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use teich_scaling::bowen_series::{conjugated_system_with_codes, MarkovSystem};
use teich_scaling::fuchsian::{conjugate_rep, twist_deform, Label, LabelKind, Marking};
use teich_scaling::mobius::{Complex, DiskMobius};
use teich_scaling::precision::Precision;
use teich_scaling::qs::{sd_experiment, zeta, zeta_closed_form, zeta_closed_form_printed, Sampling};
use teich_scaling::scaling::{
    d_max_estimate, distortion_constants, scaling_estimate, scaling_table, ScalingSample,
};
use teich_scaling::store::{fmt17, load_or_build, scaling_csv, CacheFile, OutputFormat, RunConfig, TwistSpec};
use teich_scaling::symbolic::DualWord;
use teich_scaling::thermo::{
    gibbs, potential_from_scaling, pressure, pressure_metric, variance, Potential, VarianceMethod, WordTable,
    PATH_STEP, VARIANCE_STEP,
};
use teich_scaling::Error;

#[derive(Parser, Debug)]
#[command(name = "tscale", version, about = "Scaling functions, maximum metric and pressure metric for genus-g surfaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, default_value_t = 2)]
    genus: usize,
    /// Word depth; its meaning depends on the command.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// `double` or `extended:<bits>`.
    #[arg(long, global = true, default_value = "double")]
    precision: String,
    /// Tolerance of the Markov check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Partition cache; built and written when missing or stale.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `json` or `csv`.
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the standard group and its Markov partition, and write the cache.
    BuildGroup,
    /// Print the partition points, branches and transition blocks.
    ShowPartition,
    /// Scaling values with certified bounds, for given dual words or all of them.
    Scaling {
        /// Comma-separated dual words, symbols joined by dots (e.g. `3.17.40`).
        #[arg(long, value_delimiter = ',')]
        words: Vec<String>,
    },
    /// Bounds on the maximum metric between the standard surface and a deformation.
    Compare {
        #[command(flatten)]
        deform: Deform,
    },
    /// Maximum-metric bounds along a twist path.
    TwistPath {
        #[arg(long, default_value = "a1")]
        curve: String,
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        ts: Vec<f64>,
    },
    /// Pressure of log S, with a variance cross-check on a random potential.
    Pressure,
    /// Pressure metric of the twist tangent at t = 0.
    Pmetric {
        #[arg(long, default_value = "a1")]
        curve: String,
        #[arg(long, default_value_t = PATH_STEP)]
        delta: f64,
    },
    /// ζ(M) on a grid, with the dyadic sampling harness.
    Qsbounds {
        #[arg(long, value_delimiter = ',', default_value = "1,1.25,1.5,2,3,4")]
        m_grid: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        sample_depth: u32,
    },
}

#[derive(Args, Debug)]
struct Deform {
    /// Twist as `<curve>:<t>`, e.g. `a1:0.4`.
    #[arg(long)]
    twist: Option<String>,
    /// Conjugate by the disk automorphism moving `x,y` to the origin.
    #[arg(long, allow_hyphen_values = true)]
    conjugate: Option<String>,
}

fn config(g: &Global, depth: usize) -> Result<RunConfig, Error> {
    let precision: Precision = g.precision.parse()?;
    let format: OutputFormat = g.format.parse()?;
    let mut c = RunConfig {
        genus: g.genus,
        precision,
        depth: g.depth.unwrap_or(depth),
        cache: g.cache.clone(),
        out: g.out.clone(),
        format,
        seed: g.seed,
        ..RunConfig::default()
    };
    if let Some(t) = g.tol {
        c.tol = t;
    }
    c.validate()?;
    Ok(c)
}

fn twist_handle(curve: &str, genus: usize) -> Result<usize, Error> {
    let l = Label::parse(curve, genus)?;
    if l.kind != LabelKind::A {
        return Err(Error::InvalidConfig(format!("twists are supported about a-curves only, got `{curve}`")));
    }
    Ok(l.handle)
}

fn deformed(cache: &CacheFile, marking: &Marking) -> Result<MarkovSystem, Error> {
    conjugated_system_with_codes(&cache.system, marking, &cache.codes)
}

fn twisted(cache: &CacheFile, curve: &str, t: f64) -> Result<MarkovSystem, Error> {
    let h = twist_handle(curve, cache.system.genus)?;
    let (_, m) = twist_deform(&cache.system.rep, h, t)?;
    deformed(cache, &m)
}

fn emit(cfg: &RunConfig, text: String) -> Result<(), Error> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize")
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    match cli.command {
        Command::BuildGroup => {
            let cfg = config(g, 1)?;
            let c = CacheFile::build(cfg.genus, &cfg.build_options())?;
            let summary = json!({
                "genus": c.system.genus,
                "sides": c.system.rep.sides(),
                "relation_residual": c.system.rep.relation_residual,
                "partition_points": c.system.len(),
                "lambda0": c.system.lambda0,
                "n_mix": c.system.n_mix,
                "markov_residual": c.system.markov_residual,
                "content_hash": c.content_hash,
            });
            match &cfg.out {
                Some(p) => {
                    c.write(p)?;
                    println!("{}", pretty(&summary));
                }
                None => emit(&cfg, c.to_json()?)?,
            }
        }
        Command::ShowPartition => {
            let cfg = config(g, 1)?;
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let s = &c.system;
            let rows: Vec<Value> = (0..s.len())
                .map(|j| {
                    json!({
                        "index": j,
                        "start": s.points[j].angle(),
                        "branch": Label::from_side(s.branch[j]).to_string(),
                        "image": [s.image[j].0, s.image[j].1],
                        "alternatives": s.alternatives[j].iter().map(|&a| Label::from_side(a).to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit(
                &cfg,
                pretty(&json!({
                    "genus": s.genus,
                    "lambda0": s.lambda0,
                    "n_mix": s.n_mix,
                    "intervals": rows,
                })),
            )?;
        }
        Command::Scaling { words } => {
            let cfg = config(g, 2)?;
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let k = distortion_constants(&c.system)?;
            let rows: Vec<ScalingSample> = if words.is_empty() {
                scaling_table(&c.system, &k, cfg.depth)
            } else {
                words
                    .iter()
                    .map(|w| {
                        let d = DualWord::parse(w)?;
                        scaling_estimate(&c.system, &k, &d, cfg.depth, cfg.precision)
                    })
                    .collect::<Result<_, _>>()?
            };
            let text = match cfg.format {
                OutputFormat::Csv => scaling_csv(&rows),
                OutputFormat::Json => pretty(&json!(rows
                    .iter()
                    .map(|r| json!({
                        "dual_word": r.dual_word.display(),
                        "value": r.value,
                        "error_bound": r.error_bound,
                    }))
                    .collect::<Vec<_>>())),
            };
            emit(&cfg, text)?;
        }
        Command::Compare { deform } => {
            let cfg = config(g, 4)?;
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let y = match (&deform.twist, &deform.conjugate) {
                (Some(t), None) => {
                    let (curve, val) = t
                        .split_once(':')
                        .ok_or_else(|| Error::InvalidConfig(format!("expected <curve>:<t>, got `{t}`")))?;
                    let t: f64 = val.parse().map_err(|_| Error::InvalidConfig(format!("bad twist `{val}`")))?;
                    twisted(&c, curve, t)?
                }
                (None, Some(p)) => {
                    let xy: Vec<f64> = p
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| Error::InvalidConfig(format!("bad point `{p}`")))?;
                    if xy.len() != 2 || xy[0].hypot(xy[1]) >= 1.0 {
                        return Err(Error::InvalidConfig(format!("point `{p}` is not inside the unit disk")));
                    }
                    let m = DiskMobius::moving_to_origin(Complex::new(xy[0], xy[1]));
                    let (_, mk) = conjugate_rep(&c.system.rep, &m);
                    deformed(&c, &mk)?
                }
                _ => return Err(Error::InvalidConfig("give exactly one of --twist or --conjugate".into())),
            };
            let kx = distortion_constants(&c.system)?;
            let ky = distortion_constants(&y)?;
            let d = d_max_estimate(&c.system, &y, &kx, &ky, cfg.depth, cfg.seed)?;
            emit(
                &cfg,
                pretty(&json!({
                    "depth": d.depth,
                    "lower": d.lower,
                    "upper": d.upper,
                    "argmax": d.argmax.display(),
                    "raw_max": d.raw_max,
                    "words": d.words as f64,
                    "sampled": d.sampled,
                })),
            )?;
        }
        Command::TwistPath { curve, ts } => {
            let mut cfg = config(g, 5)?;
            cfg.twist = Some(TwistSpec { curve: curve.clone(), ts: ts.clone() });
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let kx = distortion_constants(&c.system)?;
            let mut rows = Vec::new();
            for &t in &ts {
                let y = twisted(&c, &curve, t)?;
                let ky = distortion_constants(&y)?;
                let d = d_max_estimate(&c.system, &y, &kx, &ky, cfg.depth, cfg.seed)?;
                rows.push(json!({
                    "t": t,
                    "depth": d.depth,
                    "lower": d.lower,
                    "upper": d.upper,
                    "argmax": d.argmax.display(),
                    "sampled": d.sampled,
                }));
            }
            emit(&cfg, pretty(&json!({ "curve": curve, "path": rows })))?;
        }
        Command::Pressure => {
            let cfg = config(g, 4)?;
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let table = WordTable::of_system(&c.system, cfg.depth.max(2))?;
            let phi = potential_from_scaling(&c.system, &table)?;
            let p = pressure(&table, &phi)?;
            let psi = Potential::random(&table, cfg.seed);
            let va = variance(&table, &phi, &psi, VarianceMethod::SecondDifference { h: VARIANCE_STEP })?;
            let vb = variance(
                &table,
                &phi,
                &psi,
                VarianceMethod::Birkhoff {
                    segments: 100_000,
                    length: 64,
                    seed: cfg.seed,
                },
            )?;
            emit(
                &cfg,
                pretty(&json!({
                    "depth": table.len,
                    "pressure": p.pressure,
                    "residual": p.residual,
                    "variance_a": va,
                    "variance_b": vb,
                    "pmetric": null,
                    "diagnostics": { "h": VARIANCE_STEP, "delta": null, "mean_residual": null, "iterations": p.iterations },
                })),
            )?;
        }
        Command::Pmetric { curve, delta } => {
            let cfg = config(g, 4)?;
            if !(delta > 0.0) {
                return Err(Error::InvalidConfig("delta must be positive".into()));
            }
            let c = load_or_build(cfg.cache.as_deref(), cfg.genus, &cfg.build_options())?;
            let table = WordTable::of_system(&c.system, cfg.depth.max(2))?;
            let plus = twisted(&c, &curve, delta)?;
            let minus = twisted(&c, &curve, -delta)?;
            let pm = pressure_metric(&table, &c.system, &minus, &plus, delta)?;
            let phi = potential_from_scaling(&c.system, &table)?;
            let lp = potential_from_scaling(&plus, &table)?;
            let lm = potential_from_scaling(&minus, &table)?;
            let psi = lp.add_scaled(&lm, -1.0)?;
            let psi = Potential {
                len: psi.len,
                values: psi.values.iter().map(|v| v / (2.0 * delta)).collect(),
            };
            let vb = variance(
                &table,
                &phi,
                &psi,
                VarianceMethod::Birkhoff {
                    segments: 100_000,
                    length: 64,
                    seed: cfg.seed,
                },
            )?;
            let gb = gibbs(&table, &phi)?;
            emit(
                &cfg,
                pretty(&json!({
                    "depth": table.len,
                    "pressure": pm.pressure,
                    "residual": gb.residual,
                    "variance_a": pm.variance,
                    "variance_b": vb,
                    "pmetric": pm.value,
                    "diagnostics": {
                        "h": VARIANCE_STEP,
                        "delta": delta,
                        "mean_residual": pm.mean_residual,
                        "psi_norm": pm.psi_norm,
                        "denominator": pm.denominator,
                    },
                })),
            )?;
        }
        Command::Qsbounds { m_grid, samples, sample_depth } => {
            let cfg = config(g, 1)?;
            let mut rows = Vec::new();
            for &m in &m_grid {
                let z = zeta(m)?;
                let cf = zeta_closed_form(m)?;
                let printed = zeta_closed_form_printed(m)?;
                let rep = sd_experiment(m, sample_depth, samples, cfg.seed, Sampling::Uniform)?;
                rows.push((m, z, cf, printed, rep));
            }
            let text = match cfg.format {
                OutputFormat::Csv => {
                    let mut s = String::from("M,zeta,closed_form,printed_form,flagged,samples,violations,max_deviation\n");
                    for (m, z, cf, p, r) in &rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            fmt17(*m),
                            fmt17(*z),
                            fmt17(*cf),
                            fmt17(*p),
                            (p - z).abs() > 1e-12,
                            r.samples,
                            r.violations,
                            fmt17(r.max_deviation)
                        ));
                    }
                    s
                }
                OutputFormat::Json => pretty(&json!(rows
                    .iter()
                    .map(|(m, z, cf, p, r)| json!({
                        "M": m,
                        "zeta": z,
                        "closed_form": cf,
                        "printed_form": p,
                        "printed_form_flagged": (p - z).abs() > 1e-12,
                        "samples": r.samples,
                        "violations": r.violations,
                        "max_deviation": r.max_deviation,
                    }))
                    .collect::<Vec<_>>())),
            };
            emit(&cfg, text)?;
        }
    }
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    if e.is_certificate_failure() {
        "certificate_failure"
    } else {
        "input_error"
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let v = json!({ "error": { "kind": "input_error", "message": e.to_string().trim() } });
            eprintln!("{v}");
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let v = json!({ "error": { "kind": error_kind(&e), "variant": format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or(""), "message": e.to_string() } });
            eprintln!("{v}");
            ExitCode::from(if e.is_certificate_failure() { 2 } else { 3 })
        }
    }
}
