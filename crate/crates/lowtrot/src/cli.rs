//! Command-line front door: model building, single measurements, sweeps,
//! planner evaluation, comparison tables, and debug dumps.
//!
//! Exit codes follow a shell-friendly convention: `0` means every bound
//! check in the run was satisfied, `1` is a usage or runtime error, and `2`
//! signals at least one bound violation, so `lowtrot sweep --acceptance`
//! doubles as a certification command.
//!
//! Step flags (`--s`, fit grids) are dimensionless, in units of 1/J, like
//! sweep configs; records echo every threshold as an absolute energy.
//! Energy expressions accept `E0+1.5J` (above the ground energy), `+6J`
//! (above the previous threshold in a `lo → hi → Δ'` chain), `norm-0.5J`,
//! `full`, or a bare absolute number. The `LOWTROT_NMAX` environment
//! variable raises the default N ≤ 12 dense-assembly cap.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{
    grouped_trotter_number, prior_trotter_number, trotter_number, BoundInputs,
    EffectiveLeakageKind,
};
use crate::formulas::suzuki_schedule;
use crate::hamiltonian::{model_gallery, HamiltonianSpec, TermTable};
use crate::lab::fit::{log_grid, order_fit};
use crate::lab::plan::plan_compare;
use crate::lab::sweep::{acceptance_config, render_csv, run_sweep, SweepConfig, SweepSummary};
use crate::lab::{
    corollary_check, measure_effective_leakage, measure_formula_error, measure_leakage,
    measure_moment_leakage, EnergyExpr, ExperimentRecord, Restriction, Workbench,
};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lowtrot",
    version,
    about = "Low-energy Trotter bounds: measurements, sweeps, and planning",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a gallery model and write its term table as JSON.
    Model(ModelCmd),
    /// Measure layer leakage (or a moment / effective-layer variant).
    Leakage(LeakageCmd),
    /// Measure the product-formula error against the analytic bound.
    #[command(name = "error")]
    FormulaError(ErrorCmd),
    /// Check the corollary chain of inequalities on the Λ ladder.
    Corollary(CorollaryCmd),
    /// Fit the convergence order over a log-spaced step grid.
    Fit(FitCmd),
    /// Evaluate the Trotter-number planner.
    Plan(PlanCmd),
    /// Run a sweep from a config file or the built-in acceptance preset.
    Sweep(SweepCmd),
    /// Dump matrices, spectra, schedules, or term tables.
    Dump(DumpCmd),
}

/// Where the Hamiltonian comes from: a gallery name or a term-table file.
#[derive(Args)]
struct ModelOpt {
    /// Gallery model (heisenberg_chain | tfim_chain | xy_chain | random_klocal).
    #[arg(long, conflicts_with = "spec")]
    model: Option<String>,
    /// Term-table JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of sites for gallery models.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Seed for random gallery models.
    #[arg(long)]
    seed: Option<u64>,
    /// Coupling override, repeatable: --coupling j=0.5
    #[arg(long = "coupling", value_name = "KEY=VAL", value_parser = parse_coupling)]
    coupling: Vec<(String, f64)>,
}

impl ModelOpt {
    fn build(&self) -> Result<HamiltonianSpec> {
        let mut spec = match (&self.model, &self.spec) {
            (Some(name), None) => {
                let mut couplings: BTreeMap<String, f64> = self.coupling.iter().cloned().collect();
                if let Some(seed) = self.seed {
                    couplings.insert("seed".into(), seed as f64);
                }
                model_gallery(name, self.n, &couplings)?
            }
            (None, Some(path)) => TermTable::load(path)?.to_spec()?,
            (None, None) => {
                return Err(Error::InvalidInput(
                    "one of --model or --spec is required".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        if let Some(cap) = nmax_from_env()? {
            spec.n_max = cap;
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct OutOpt {
    /// Directory for machine-readable record artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format (with --out).
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Also render log-log SVG plots (sweeps only).
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
struct LeakageCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// Layer index (taken modulo the model's layer count).
    #[arg(long, default_value_t = 0)]
    layer: usize,
    /// Step size in units of 1/J.
    #[arg(long, default_value_t = 0.2)]
    s: f64,
    /// Low threshold Λ.
    #[arg(long, default_value = "E0+1J")]
    lo: String,
    /// High threshold Λ' (relative forms chain off Λ).
    #[arg(long, default_value = "+6J")]
    hi: String,
    /// Measure the n-th moment ‖Π_{>Λ'} H_l^n Π_{≤Λ}‖ instead.
    #[arg(long)]
    moment: Option<u32>,
    /// Effective cutoff Δ' — switches to the effective-layer comparison.
    #[arg(long = "delta-prime")]
    delta_prime: Option<String>,
    /// Which effective-layer norm (with --delta-prime).
    #[arg(long, value_enum, default_value_t = KindOpt::Sandwiched)]
    kind: KindOpt,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindOpt {
    Sandwiched,
    Projected,
}

impl From<KindOpt> for EffectiveLeakageKind {
    fn from(k: KindOpt) -> Self {
        match k {
            KindOpt::Sandwiched => EffectiveLeakageKind::Sandwiched,
            KindOpt::Projected => EffectiveLeakageKind::Projected,
        }
    }
}

#[derive(Args)]
struct ErrorCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// Product-formula order.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Step size in units of 1/J.
    #[arg(long, default_value_t = 0.05)]
    s: f64,
    /// Low-energy cutoff Δ ("full" for the whole space).
    #[arg(long, default_value = "E0+0.5J")]
    delta: String,
    /// Measure the unrestricted operator norm.
    #[arg(long)]
    full: bool,
    /// Error-bound prefactor γ̃.
    #[arg(long = "gamma-tilde", default_value_t = 1.0)]
    gamma_tilde: f64,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct CorollaryCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// Product-formula order.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Step size in units of 1/J.
    #[arg(long, default_value_t = 0.05)]
    s: f64,
    /// Base cutoff Δ for the ladder.
    #[arg(long, default_value = "E0+0.5J")]
    delta: String,
    /// Per-rung leakage budget δ.
    #[arg(long = "delta-leak", default_value_t = 0.1)]
    delta_leak: f64,
    /// Which inequality (1–4); all four when omitted.
    #[arg(long)]
    which: Option<u8>,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct FitCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// Product-formula order.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Smallest step of the grid, units of 1/J.
    #[arg(long = "s-lo", default_value_t = 0.003)]
    s_lo: f64,
    /// Largest step of the grid, units of 1/J.
    #[arg(long = "s-hi", default_value_t = 0.03)]
    s_hi: f64,
    /// Number of log-spaced grid points.
    #[arg(long, default_value_t = 8)]
    points: usize,
    /// Restriction cutoff ("full" fits the full-space order p+1).
    #[arg(long, default_value = "full")]
    delta: String,
    /// Error-bound prefactor γ̃.
    #[arg(long = "gamma-tilde", default_value_t = 1.0)]
    gamma_tilde: f64,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct PlanCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// Evolution time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Target error ε.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Product-formula order.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Low-energy gap Δ above the (shifted) ground energy.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Error-bound prefactor γ̃.
    #[arg(long = "gamma-tilde", default_value_t = 1.0)]
    gamma_tilde: f64,
    /// Also evaluate the grouped (constant-1) mode.
    #[arg(long)]
    grouped: bool,
    /// Add the prior bound and a scaling-exponent table.
    #[arg(long)]
    compare: bool,
}

#[derive(Args)]
struct SweepCmd {
    /// Sweep config JSON file.
    #[arg(long, conflicts_with = "acceptance")]
    config: Option<PathBuf>,
    /// Run the built-in randomized acceptance preset.
    #[arg(long)]
    acceptance: bool,
    /// Master seed for the acceptance preset.
    #[arg(long = "master-seed", default_value_t = 7)]
    master_seed: u64,
    /// Override the config's γ̃.
    #[arg(long = "gamma-tilde")]
    gamma_tilde: Option<f64>,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args)]
struct DumpCmd {
    #[command(flatten)]
    model: ModelOpt,
    /// What to dump.
    #[arg(long, value_enum, default_value_t = What::Terms)]
    what: What,
    /// Layer index for --what matrix (full Hamiltonian when omitted).
    #[arg(long)]
    layer: Option<usize>,
    /// Formula order for --what schedule.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Output file (matrix dumps require one; text dumps default to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Matrix,
    Spectrum,
    Schedule,
    Terms,
}

#[derive(Args)]
struct ModelCmd {
    /// Gallery model name.
    #[arg(long)]
    name: String,
    /// Number of sites.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Seed for random models.
    #[arg(long)]
    seed: Option<u64>,
    /// Coupling override, repeatable: --coupling j=0.5
    #[arg(long = "coupling", value_name = "KEY=VAL", value_parser = parse_coupling)]
    coupling: Vec<(String, f64)>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse the arguments and dispatch; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(0) => 0,
        Ok(_) => 2,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

/// Returns the number of violated bound checks.
fn dispatch(cmd: Command) -> Result<usize> {
    match cmd {
        Command::Model(c) => cmd_model(c),
        Command::Leakage(c) => cmd_leakage(c),
        Command::FormulaError(c) => cmd_error(c),
        Command::Corollary(c) => cmd_corollary(c),
        Command::Fit(c) => cmd_fit(c),
        Command::Plan(c) => cmd_plan(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Dump(c) => cmd_dump(c),
    }
}

fn nmax_from_env() -> Result<Option<usize>> {
    match std::env::var("LOWTROT_NMAX") {
        Ok(raw) => raw.trim().parse::<usize>().map(Some).map_err(|_| {
            Error::InvalidInput(format!("LOWTROT_NMAX must be a non-negative integer, got {raw:?}"))
        }),
        Err(_) => Ok(None),
    }
}

fn parse_coupling(raw: &str) -> std::result::Result<(String, f64), String> {
    let (key, val) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VAL, got {raw:?}"))?;
    let v: f64 = val
        .trim()
        .parse()
        .map_err(|_| format!("coupling value {val:?} is not a number"))?;
    Ok((key.trim().to_string(), v))
}

fn parse_expr(raw: &str) -> Result<EnergyExpr> {
    raw.parse()
}

fn print_records(records: &[ExperimentRecord]) {
    println!(
        "{:<14} {:<17} {:>2} {:>10} {:>13} {:>13} {:>5} {:>13}",
        "kind", "model", "N", "s", "measured", "bound", "ok", "margin"
    );
    for r in records {
        println!(
            "{:<14} {:<17} {:>2} {:>10} {:>13.6e} {:>13.6e} {:>5} {:>13.6e}",
            r.kind.as_str(),
            r.model,
            r.n_sites,
            r.s.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.measured,
            r.bound,
            r.satisfied,
            r.margin
        );
        if let Some(note) = &r.note {
            println!("  note: {note}");
        }
    }
}

fn write_artifacts(name: &str, records: &[ExperimentRecord], out: &OutOpt) -> Result<()> {
    let Some(dir) = &out.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    if matches!(out.format, Format::Csv | Format::Both) {
        std::fs::write(dir.join(format!("{name}.csv")), render_csv(records))?;
    }
    if matches!(out.format, Format::Json | Format::Both) {
        let normalized: Vec<_> = records.iter().map(|r| r.normalized()).collect();
        std::fs::write(
            dir.join(format!("{name}.json")),
            serde_json::to_string_pretty(&normalized)? + "\n",
        )?;
    }
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn violations(records: &[ExperimentRecord]) -> usize {
    records.iter().filter(|r| !r.satisfied).count()
}

fn cmd_model(c: ModelCmd) -> Result<usize> {
    let mut couplings: BTreeMap<String, f64> = c.coupling.iter().cloned().collect();
    if let Some(seed) = c.seed {
        couplings.insert("seed".into(), seed as f64);
    }
    let spec = model_gallery(&c.name, c.n, &couplings)?;
    let json = TermTable::from_spec(&spec).to_json()? + "\n";
    match &c.out {
        Some(path) => {
            std::fs::write(path, json)?;
            println!(
                "wrote {} (N = {}, {} terms, {} layers)",
                path.display(),
                spec.n_sites,
                spec.terms.len(),
                spec.layers.len()
            );
        }
        None => print!("{json}"),
    }
    Ok(0)
}

fn cmd_leakage(c: LeakageCmd) -> Result<usize> {
    let bench = Workbench::new(c.model.build()?)?;
    let j = bench.spec().params.j;
    let layer = c.layer % bench.layers().len();
    let lo = bench.resolve(&parse_expr(&c.lo)?, None)?;
    let hi = bench.resolve(&parse_expr(&c.hi)?, Some(lo))?;
    let record = match (&c.moment, &c.delta_prime) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput(
                "--moment and --delta-prime are mutually exclusive".into(),
            ))
        }
        (Some(n), None) => measure_moment_leakage(&bench, layer, *n, lo, hi)?,
        (None, Some(dp)) => {
            let dp = bench.resolve(&parse_expr(dp)?, Some(hi))?;
            measure_effective_leakage(&bench, layer, c.s / j, lo, hi, dp, c.kind.into())?
        }
        (None, None) => measure_leakage(&bench, layer, c.s / j, lo, hi)?,
    };
    let records = vec![record];
    print_records(&records);
    write_artifacts("leakage", &records, &c.out)?;
    Ok(violations(&records))
}

fn cmd_error(c: ErrorCmd) -> Result<usize> {
    let bench = Workbench::new(c.model.build()?)?;
    let j = bench.spec().params.j;
    let sched = suzuki_schedule(c.p, bench.spec().params.l)?;
    let delta = bench.resolve(&parse_expr(&c.delta)?, None)?;
    let restriction = if c.full {
        Restriction::Full
    } else {
        Restriction::LowEnergy
    };
    let records = vec![measure_formula_error(
        &bench,
        &sched,
        c.s / j,
        delta,
        restriction,
        c.gamma_tilde,
    )?];
    print_records(&records);
    write_artifacts("error", &records, &c.out)?;
    Ok(violations(&records))
}

fn cmd_corollary(c: CorollaryCmd) -> Result<usize> {
    let bench = Workbench::new(c.model.build()?)?;
    let j = bench.spec().params.j;
    let sched = suzuki_schedule(c.p, bench.spec().params.l)?;
    let delta = bench.resolve(&parse_expr(&c.delta)?, None)?;
    let which: Vec<u8> = match c.which {
        Some(w) => vec![w],
        None => vec![1, 2, 3, 4],
    };
    let mut records = Vec::new();
    for w in which {
        records.push(corollary_check(
            &bench,
            &sched,
            c.s / j,
            delta,
            c.delta_leak,
            w,
        )?);
    }
    print_records(&records);
    write_artifacts("corollary", &records, &c.out)?;
    Ok(violations(&records))
}

fn cmd_fit(c: FitCmd) -> Result<usize> {
    let bench = Workbench::new(c.model.build()?)?;
    let j = bench.spec().params.j;
    let sched = suzuki_schedule(c.p, bench.spec().params.l)?;
    let delta = bench.resolve(&parse_expr(&c.delta)?, None)?;
    let grid: Vec<f64> = log_grid(c.s_lo, c.s_hi, c.points)?
        .into_iter()
        .map(|s| s / j)
        .collect();
    let (fit, records) = order_fit(&bench, &sched, &grid, delta, c.gamma_tilde)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    print_records(&records);
    write_artifacts("fit", &records, &c.out)?;
    Ok(violations(&records))
}

fn cmd_plan(c: PlanCmd) -> Result<usize> {
    let spec = c.model.build()?;
    let sched = suzuki_schedule(c.p, spec.params.l)?;
    let params = spec.params.with_schedule(sched.q(), sched.kappa());
    let inputs = BoundInputs {
        t: c.t,
        eps: c.eps,
        delta: c.delta,
        gamma_tilde: c.gamma_tilde,
        ..BoundInputs::new(params, c.p)
    };
    let mut plan = trotter_number(&inputs)?;
    let prior = prior_trotter_number(&spec, c.t, c.eps, c.p)?;
    plan.r_prior = Some(prior.r_tilde);
    plan.norms = Some(prior.norms);
    let ok = plan.certificate.ok;
    if !c.grouped && !c.compare {
        println!("{}", serde_json::to_string_pretty(&plan)?);
        return Ok(usize::from(!ok));
    }
    let mut doc = serde_json::json!({ "plan": plan });
    if c.grouped {
        doc["grouped"] = serde_json::to_value(grouped_trotter_number(&inputs)?)?;
    }
    if c.compare {
        let t_grid = log_grid(c.t / 10.0, c.t * 10.0, 5)?;
        let eps_grid = [c.eps, c.eps / 10.0];
        let table = plan_compare(&spec, &t_grid, &eps_grid, c.delta, &[c.p], c.gamma_tilde)?;
        doc["table"] = serde_json::to_value(&table)?;
    }
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(usize::from(!ok))
}

fn cmd_sweep(c: SweepCmd) -> Result<usize> {
    let mut cfg: SweepConfig = if c.acceptance {
        acceptance_config(c.master_seed)
    } else if let Some(path) = &c.config {
        serde_json::from_str(&std::fs::read_to_string(path)?)?
    } else {
        return Err(Error::InvalidInput(
            "provide --config FILE or --acceptance".into(),
        ));
    };
    if let Some(g) = c.gamma_tilde {
        cfg.gamma_tilde = g;
    }
    if let Some(dir) = &c.out.out {
        cfg.out_dir = Some(dir.clone());
    }
    cfg.write_csv = matches!(c.out.format, Format::Csv | Format::Both);
    cfg.write_json = matches!(c.out.format, Format::Json | Format::Both);
    if c.out.svg {
        cfg.write_svg = true;
    }
    if let Some(cap) = nmax_from_env()? {
        cfg.n_max = Some(cap);
    }
    let (_, summary) = run_sweep(&cfg)?;
    print_summary(&cfg, &summary);
    Ok(summary.violations)
}

fn print_summary(cfg: &SweepConfig, summary: &SweepSummary) {
    println!(
        "sweep '{}': {} records, {} violations ({} constant-free)",
        cfg.name, summary.total, summary.violations, summary.constant_free_violations
    );
    for (kind, (count, bad)) in &summary.by_kind {
        println!("  {kind:<16} {count:>5} records, {bad} violations");
    }
    if let Some(dir) = &cfg.out_dir {
        println!("artifacts: {}", dir.display());
    }
}

fn cmd_dump(c: DumpCmd) -> Result<usize> {
    let spec = c.model.build()?;
    match c.what {
        What::Matrix => {
            let Some(path) = &c.out else {
                return Err(Error::InvalidInput(
                    "--what matrix writes binary data; provide --out FILE".into(),
                ));
            };
            let bench = Workbench::new(spec)?;
            let op = match c.layer {
                Some(l) => bench.layer(l % bench.layers().len())?,
                None => bench.full(),
            };
            let m = op.matrix();
            let dim = m.nrows();
            // Binary layout: u64 little-endian dimension header, then the
            // row-major entries as interleaved (re, im) little-endian f64.
            let mut bytes = Vec::with_capacity(8 + dim * dim * 16);
            bytes.extend_from_slice(&(dim as u64).to_le_bytes());
            for row in m.rows() {
                for v in row {
                    bytes.extend_from_slice(&v.re.to_le_bytes());
                    bytes.extend_from_slice(&v.im.to_le_bytes());
                }
            }
            let mut f = std::fs::File::create(path)?;
            f.write_all(&bytes)?;
            println!("wrote {}×{dim} matrix to {} ({} bytes)", dim, path.display(), bytes.len());
        }
        What::Spectrum => {
            let bench = Workbench::new(spec)?;
            let eigs = bench.full().eigensystem()?;
            let vals: Vec<f64> = eigs.values().to_vec();
            emit_text(&c.out, &(serde_json::to_string_pretty(&vals)? + "\n"))?;
        }
        What::Schedule => {
            let sched = suzuki_schedule(c.p, spec.params.l)?;
            emit_text(&c.out, &(sched.to_json()? + "\n"))?;
        }
        What::Terms => {
            let json = TermTable::from_spec(&spec).to_json()? + "\n";
            emit_text(&c.out, &json)?;
        }
    }
    Ok(0)
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn coupling_parser() {
        assert_eq!(parse_coupling("j=0.5").unwrap(), ("j".into(), 0.5));
        assert_eq!(parse_coupling(" hx = 2 ").unwrap(), ("hx".into(), 2.0));
        assert!(parse_coupling("j").is_err());
        assert!(parse_coupling("j=abc").is_err());
    }

    #[test]
    fn model_opt_requires_a_source() {
        let opt = ModelOpt {
            model: None,
            spec: None,
            n: 4,
            seed: None,
            coupling: vec![],
        };
        assert!(opt.build().is_err());
    }
}
