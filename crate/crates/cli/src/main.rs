use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ipc_core::criteria::{overlap_ratio, Criteria, CriterionVerdict, OverlapRatio};
use ipc_core::randomized::{write_records, Shots};
use ipc_core::scans::{self, to_csv, RmConfig};
use ipc_core::states::StateSpec;
use ipc_core::variational::{s_hat, OptConfig, OptResult};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "ipc", version, about = "Schmidt-number certification from state overlaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Overlap ratio of two states, with optional local-unitary optimization.
    Certify(CertifyArgs),
    /// Ratio grid for isotropic states.
    ///
    /// CSV columns: x, y, s, max_r_detected. `s` is S(rho_Iso(x), rho_Iso(y));
    /// `max_r_detected` is the largest r with s > r, 0 if none.
    Fig1(Fig1Args),
    /// Detection boundaries for rho(x) = x |Psi><Psi| + (1-x) I_{(d-1)^2} / (d-1)^2,
    /// the maximally entangled state mixed with the normalized identity on
    /// levels 0..d-2 of each side.
    ///
    /// Writes fig3a.csv with columns d, r, x_lower, y_at_lower, x_upper:
    /// x_lower is the smallest x whose best Theta(y) verifier gives S > r,
    /// y_at_lower the maximizing y there, x_upper the x where the largest
    /// eigenvalue reaches r/d. Writes fig3b.csv with columns d, ipc, p3_ppt,
    /// fbc, purity: the x above which each criterion detects entanglement.
    Fig3(Fig3Args),
    /// Fidelity-witness boundary against the spectrum bound.
    ///
    /// CSV columns: d, r, x_witness, x_spectrum. x_witness solves
    /// F(rho(x), Psi) = r/d; x_spectrum solves lambda_max(rho(x)) = r/d.
    Rfbc(RfbcArgs),
    /// Simulated randomized-measurement estimate of the overlap ratio.
    Rm(RmArgs),
    /// Recompute the worked examples and compare against expected values.
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// JSON file `{"rho": <state>, "sigma": <state>, "optimize": <options>}`;
    /// `sigma` and `optimize` are optional.
    #[arg(long)]
    config: PathBuf,
    /// Maximize the ratio over local unitaries on rho.
    #[arg(long)]
    optimize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig1Args {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig3Args {
    #[arg(long, default_value_t = 3)]
    d_min: usize,
    #[arg(long, default_value_t = 10)]
    d_max: usize,
    #[arg(long, default_value_t = 3)]
    r_max: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RfbcArgs {
    #[arg(long, default_value_t = 3)]
    d_min: usize,
    #[arg(long, default_value_t = 10)]
    d_max: usize,
    #[arg(long, default_value_t = 3)]
    r_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RmArgs {
    /// JSON file `{"rho": <state>, "sigma": <state>, "protocol": {...}}`.
    #[arg(long)]
    config: PathBuf,
    /// Override the number of measurement settings.
    #[arg(long)]
    settings: Option<usize>,
    /// Override the shots per setting.
    #[arg(long, conflicts_with = "exact")]
    shots: Option<u64>,
    /// Use exact outcome probabilities instead of sampled shots.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; records go to the same path with extension
    /// `.records.jsonl` unless `--records` is given.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct ExamplesArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertifyConfig {
    rho: StateSpec,
    sigma: Option<StateSpec>,
    #[serde(default)]
    optimize: OptConfig,
}

#[derive(Serialize)]
struct CertifyReport {
    /// Set when the verifier was extracted from the reduction test.
    extracted_for_r: Option<usize>,
    ratio: OverlapRatio,
    verdict: CriterionVerdict,
    optimized: Option<OptResult>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn certify(args: &CertifyArgs) -> Result<()> {
    let cfg: CertifyConfig = read_json(&args.config)?;
    let rho = cfg.rho.build()?.density();
    let crit = Criteria::default();
    let (sigma, extracted_for_r) = match &cfg.sigma {
        Some(spec) => (spec.build()?.density(), None),
        None => {
            let d_min = rho.dims().iter().copied().min().unwrap_or(1);
            let mut found = None;
            for r in 1..d_min {
                match crit.extract_ipc_witness(&rho, r)? {
                    Some(w) => found = Some((w, r)),
                    None => break,
                }
            }
            match found {
                Some((w, r)) => (w, Some(r)),
                None => bail!("no reduction violation found, so no verifier can be extracted"),
            }
        }
    };
    let report = CertifyReport {
        extracted_for_r,
        ratio: overlap_ratio(&rho, &sigma)?,
        verdict: crit.ipc_bound(&rho, &sigma)?,
        optimized: if args.optimize { Some(s_hat(&rho, &sigma, &cfg.optimize)?) } else { None },
    };
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn fig1(args: &Fig1Args) -> Result<()> {
    let rows = scans::fig1(args.d, args.grid)?;
    let data: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.x, r.y, r.s, r.max_r_detected as f64]).collect();
    let csv = to_csv(
        &format!("fig1 d={} grid={}", args.d, args.grid),
        &["x", "y", "s", "max_r_detected"],
        &data,
    );
    write_output(args.out.as_deref(), &csv)
}

fn fig3(args: &Fig3Args) -> Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let a = scans::fig3a(args.d_min, args.d_max, args.r_max)?;
    let b = scans::fig3b(args.d_min, args.d_max)?;
    let comment = format!("d_min={} d_max={} r_max={}", args.d_min, args.d_max, args.r_max);
    let csv_a = to_csv(
        &format!("fig3a {comment}"),
        &["d", "r", "x_lower", "y_at_lower", "x_upper"],
        &a.iter()
            .map(|r| vec![r.d as f64, r.r as f64, r.x_lower, r.y_at_lower, r.x_upper])
            .collect::<Vec<_>>(),
    );
    let csv_b = to_csv(
        &format!("fig3b {comment}"),
        &["d", "ipc", "p3_ppt", "fbc", "purity"],
        &b.iter()
            .map(|r| vec![r.d as f64, r.ipc, r.p3_ppt, r.fbc, r.purity])
            .collect::<Vec<_>>(),
    );
    write_output(Some(&args.out.join("fig3a.csv")), &csv_a)?;
    write_output(Some(&args.out.join("fig3b.csv")), &csv_b)
}

fn rfbc(args: &RfbcArgs) -> Result<()> {
    let rows = scans::rfbc_tightness(args.d_min, args.d_max, args.r_max)?;
    let csv = to_csv(
        &format!("rfbc d_min={} d_max={} r_max={}", args.d_min, args.d_max, args.r_max),
        &["d", "r", "x_witness", "x_spectrum"],
        &rows
            .iter()
            .map(|r| vec![r.d as f64, r.r as f64, r.x_witness, r.x_spectrum])
            .collect::<Vec<_>>(),
    );
    write_output(args.out.as_deref(), &csv)
}

fn rm(args: &RmArgs) -> Result<()> {
    let mut cfg: RmConfig = read_json(&args.config)?;
    if let Some(n) = args.settings {
        cfg.protocol.n_unitaries = n;
    }
    if let Some(s) = args.shots {
        cfg.protocol.shots_per_setting = Shots::Finite(s);
    }
    if args.exact {
        cfg.protocol.shots_per_setting = Shots::Exact;
    }
    if let Some(seed) = args.seed {
        cfg.protocol.seed = seed;
    }
    let (report, records) = scans::rm_experiment(&cfg)?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let records_path = args
        .records
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("records.jsonl")));
    if let Some(path) = records_path {
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_records(&mut w, &records, cfg.protocol.local_dim)?;
        w.flush()?;
    }
    Ok(())
}

fn examples(args: &ExamplesArgs) -> Result<bool> {
    let report = scans::examples_report()?;
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    for c in report.failures() {
        eprintln!(
            "FAIL {}: {} expected {} got {} (tol {})",
            c.block, c.name, c.expected, c.actual, c.tol
        );
    }
    for n in report.notes.iter().filter(|n| !n.agrees) {
        eprintln!("note {}: {} = {} differs from {}", n.block, n.name, n.value, n.reference);
    }
    Ok(report.passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Certify(a) => certify(&a)?,
        Command::Fig1(a) => fig1(&a)?,
        Command::Fig3(a) => fig3(&a)?,
        Command::Rfbc(a) => rfbc(&a)?,
        Command::Rm(a) => rm(&a)?,
        Command::Examples(a) => return examples(&a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
