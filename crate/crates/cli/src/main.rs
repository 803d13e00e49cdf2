//! `biot3f`: convergence studies, inf-sup estimates and VTK dumps.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use biot3f_core::manufactured::{get_case, CaseName};
use biot3f_core::solver::{run_observed, ElementPair, RunOptions, TauRule};
use biot3f_core::verify::{
    check_gates, default_gates, estimate_infsup, format_sci, run_study_observed, write_outputs, InfSupPair, StudyConfig,
    SweepKind,
};
use biot3f_core::vtk;

/// Minimum `min β / max β` for a pair to count as stable.
const INFSUP_STABLE_RATIO: f64 = 0.2;
/// Minimum `β(coarse) / β(fine)` for the unstable control pair.
const INFSUP_CONTROL_DECAY: f64 = 2.0;

#[derive(Parser)]
#[command(name = "biot3f", version, about = "Three-field Biot consolidation: convergence studies and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement study and write CSV and Markdown tables.
    Study(StudyArgs),
    /// Estimate the discrete inf-sup constant on coarse meshes.
    Infsup(InfsupArgs),
    /// Run one case and write VTK snapshots.
    Dump(DumpArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// key = value file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<CaseName>,
    /// p2-p0-p1 or p2-p1-p1
    #[arg(long)]
    elements: Option<ElementPair>,
    /// space (halve h) or time (halve tau at fixed h)
    #[arg(long)]
    sweep: Option<SweepKind>,
    /// Coarsest cells per side, or the fixed mesh of a time sweep.
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    /// h2, h or fixed:<value>
    #[arg(long)]
    tau_rule: Option<TauRule>,
    /// Largest step of a time sweep.
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when a finest-level order misses its reference interval.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct InfsupArgs {
    /// Comma-separated pairs: p2-p0-p1, p2-p1-p1, p1-p1
    #[arg(long, value_delimiter = ',', default_value = "p2-p0-p1,p2-p1-p1")]
    elements: Vec<InfSupPair>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    n: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when a stable pair decays or the P1/P1 control does not.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long, default_value = "ex1")]
    case: CaseName,
    #[arg(long, default_value = "p2-p0-p1")]
    elements: ElementPair,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value = "h")]
    tau_rule: TauRule,
    /// Write every k-th step (the initial and final states are always written).
    #[arg(long, default_value_t = 1)]
    vtk_every: usize,
    #[arg(long, default_value = "vtk")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Study(a) => study(a),
        Command::Infsup(a) => infsup(a),
        Command::Dump(a) => dump(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn study_config(a: &StudyArgs) -> Result<StudyConfig> {
    let mut cfg = match &a.config {
        Some(path) => StudyConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
        None => StudyConfig::default(),
    };
    if let Some(v) = a.case {
        cfg.case = v;
    }
    if let Some(v) = a.elements {
        cfg.pair = v;
    }
    if let Some(v) = a.sweep {
        cfg.sweep = v;
    }
    if let Some(v) = a.n0 {
        cfg.n0 = v;
    }
    if let Some(v) = a.levels {
        cfg.levels = v;
    }
    if let Some(v) = a.tau_rule {
        cfg.tau_rule = v;
    }
    if let Some(v) = a.tau0 {
        cfg.tau0 = v;
    }
    cfg.mu = a.mu.or(cfg.mu);
    cfg.lambda = a.lambda.or(cfg.lambda);
    cfg.kappa = a.kappa.or(cfg.kappa);
    if let Some(v) = &a.out {
        cfg.out = Some(v.clone());
    }
    Ok(cfg)
}

fn study(a: StudyArgs) -> Result<bool> {
    let cfg = study_config(&a)?;
    let report = run_study_observed::<f64>(&cfg, &mut |row| {
        eprintln!(
            "  n={:<4} tau={} steps={:<5} energy_u={}",
            row.n,
            format_sci(row.tau),
            row.steps,
            format_sci(row.errors.interpolant.energy_u)
        );
    })?;
    print!("{}", report.to_markdown());
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    for path in write_outputs(&report, &cfg, &dir)? {
        eprintln!("wrote {}", path.display());
    }
    if !a.check {
        return Ok(true);
    }
    let gates = default_gates(cfg.case, cfg.pair, cfg.sweep);
    if gates.is_empty() {
        bail!("no reference orders for {} with {} ({} sweep)", cfg.case, cfg.pair, cfg.sweep);
    }
    let mut ok = true;
    for g in check_gates(&report, &gates) {
        let observed = g.observed.map_or("undefined".to_string(), |o| format!("{o:.4}"));
        println!(
            "{} {}: order {} in [{:.4}, {:.4}]",
            if g.passed { "PASS" } else { "FAIL" },
            g.gate.norm,
            observed,
            g.gate.lo,
            g.gate.hi
        );
        ok &= g.passed;
    }
    Ok(ok)
}

fn infsup(a: InfsupArgs) -> Result<bool> {
    let mut ok = true;
    for pair in a.elements {
        let report = estimate_infsup::<f64>(pair, &a.n)?;
        print!("{}", report.to_markdown());
        if let Some(dir) = &a.out {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("infsup_{pair}.csv"));
            fs::write(&path, report.to_csv())?;
            eprintln!("wrote {}", path.display());
        }
        if a.check {
            let passed = match pair {
                InfSupPair::P1P1 => report.decay() >= INFSUP_CONTROL_DECAY,
                _ => report.min_over_max() >= INFSUP_STABLE_RATIO,
            };
            println!("{} {pair}\n", if passed { "PASS" } else { "FAIL" });
            ok &= passed;
        }
    }
    Ok(ok)
}

fn dump(a: DumpArgs) -> Result<bool> {
    if a.vtk_every == 0 {
        bail!("--vtk-every must be positive");
    }
    let case = get_case::<f64>(a.case, None)?;
    fs::create_dir_all(&a.out)?;
    let stem = format!("{}_{}_n{}", a.case, a.elements, a.n);
    let write = |path: &Path, f: &dyn Fn(&mut BufWriter<fs::File>) -> biot3f_core::Result<()>| -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
        f(&mut w)?;
        Ok(())
    };
    let mut written = 0usize;
    let mut last_step = 0usize;
    let out = run_observed(&case, a.elements, a.n, a.tau_rule, RunOptions::default(), &mut |k, state, disc| {
        if k == 0 {
            write(&a.out.join(format!("{stem}_mesh.vtk")), &|w| vtk::write_mesh(&disc.mesh, w))
                .map_err(|e| biot3f_core::Error::Io(e.to_string()))?;
        }
        last_step = k;
        if k % a.vtk_every == 0 {
            write(&a.out.join(format!("{stem}_{k:05}.vtk")), &|w| vtk::write_state(disc, state, w))
                .map_err(|e| biot3f_core::Error::Io(e.to_string()))?;
            written += 1;
        }
        Ok(())
    })?;
    if !last_step.is_multiple_of(a.vtk_every) {
        let path = a.out.join(format!("{stem}_{last_step:05}.vtk"));
        write(&path, &|w| vtk::write_state(&out.disc, &out.final_state, w))?;
        written += 1;
    }
    eprintln!("wrote {written} snapshots of {} steps to {}", out.grid.steps, a.out.display());
    Ok(true)
}
