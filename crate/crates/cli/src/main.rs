mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use algotherm::complexity::{
    algorithmic_probability, compression_profile, program_size_complexity, DEFAULT_BUDGET, DEFAULT_L_MAX,
};
use algotherm::ensemble::{build_theta, channel_simulate, micro_canonical_deviation, Spectrum};
use algotherm::enumerate::{
    dovetail, kraft_partial_sums, verify_records_prefix_free, Enumerator, HaltRecord, Schedule, DEFAULT_FUEL_CAP,
    DEFAULT_MAX_PROGRAMS,
};
use algotherm::machine::{builtin_names, MachineSpec};
use algotherm::numeric::render::exact_decimal;
use algotherm::numeric::{format_rational, parse_rational, DEFAULT_PRECISION};
use algotherm::thermo::{
    divergence_probe, interval_json, shannon_partial, solve_temperature, sweep, sweep_csv, Source, SweepConfig,
    Weight, Weighting,
};
use algotherm::{Bits, Error, ErrorKind, Machine, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use report::{emit, json_report, Header};

/// Thermodynamic quantities of prefix-free machines, with certified
/// interval bounds.
#[derive(Parser, Debug)]
#[command(name = "algotherm", version)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "ALGOTHERM_PRECISION", default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List built-in machines, or print one spec as JSON.
    Machines(MachinesArgs),
    /// Dovetail a machine's halting programs.
    Enumerate(EnumerateArgs),
    /// Z, F, E, S, C over a temperature grid, as CSV.
    Sweep(SweepArgs),
    /// Find T with Z(T) equal to a target.
    SolveTemp(SolveArgs),
    /// Partial sums of f(|p|) 2^(-|p|/T).
    ProbeDivergence(ProbeArgs),
    /// Program-size complexity and algorithmic probability of a string.
    Complexity(ComplexityArgs),
    /// Microcanonical ensemble at (L, N) and the fair-coin channel.
    Ensemble(EnsembleArgs),
    /// Partial Shannon entropy of the output distribution.
    EntropyPartial(EntropyArgs),
}

#[derive(Args, Debug, Serialize)]
struct MachineArg {
    /// Spec JSON file, or a built-in name (`dyadic2`, `@harmonic`, ...).
    #[arg(long)]
    machine: String,
}

#[derive(Args, Debug, Serialize)]
struct MachinesArgs {
    /// Print this built-in's spec.
    #[arg(long)]
    show: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct ScheduleArgs {
    /// Cap on the per-round step budget B(r) = min(2^r, cap).
    #[arg(long, default_value_t = DEFAULT_FUEL_CAP)]
    fuel_cap: u64,
    /// Most programs one round may run.
    #[arg(long, default_value_t = DEFAULT_MAX_PROGRAMS)]
    max_programs: u64,
}

impl ScheduleArgs {
    fn schedule(&self) -> Schedule {
        Schedule { cap: self.fuel_cap, max_programs: self.max_programs }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[arg(long)]
    rounds: u64,
    /// Resumable record file; reused if it exists.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    machine: MachineArg,
    /// `a,b,c` or `start:stop:step` (inclusive), exact decimals or fractions.
    #[arg(long)]
    t_grid: String,
    /// Spectrum length cutoff for table machines.
    #[arg(long)]
    cutoff: Option<u64>,
    /// Dovetail rounds for step machines.
    #[arg(long)]
    rounds: Option<u64>,
    /// Extra moment orders Q for W(Q, T), comma separated.
    #[arg(long)]
    q: Option<String>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[arg(long)]
    target: String,
}

#[derive(Args, Debug, Serialize)]
struct ProbeArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[arg(long)]
    t: String,
    /// `1`, `l`, `l2` or `l^Q`.
    #[arg(long, default_value = "1")]
    weight: String,
    /// Length cutoff (table machines) or rounds (step machines).
    #[arg(long)]
    depth: u64,
    /// Report the first cutoff whose sum passes this value.
    #[arg(long)]
    threshold: Option<String>,
    /// Report the first cutoff whose normalized sum passes this value.
    #[arg(long)]
    normalized_threshold: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct ComplexityArgs {
    #[command(flatten)]
    machine: MachineArg,
    /// Target string in sentinel hex (`1 ++ bits` as a hex integer).
    #[arg(long, conflicts_with = "target")]
    target_hex: Option<String>,
    /// Target as a binary string.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = DEFAULT_L_MAX)]
    lmax: u64,
    #[arg(long, default_value_t = 10_000)]
    fuel: u64,
    /// Most programs the search may run.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Prefix lengths for a compression profile of the target.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct EnsembleArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[arg(long = "N")]
    n: u64,
    #[arg(long = "L")]
    l: u64,
    #[arg(long = "deltaL", default_value_t = 0)]
    delta_l: u64,
    /// Channel samples (`1e6` accepted); 0 skips the simulation.
    #[arg(long, default_value = "0")]
    mc_samples: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum WeightingArg {
    Probability,
    Complexity,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    #[command(flatten)]
    machine: MachineArg,
    #[arg(long, value_enum, default_value = "probability")]
    weighting: WeightingArg,
    #[arg(long)]
    cutoff: u64,
    #[arg(long, default_value_t = 10_000)]
    fuel: u64,
}

fn load_machine(r: &str) -> Result<Machine> {
    if let Some(name) = r.strip_prefix('@') {
        return Machine::builtin(name);
    }
    let path = Path::new(r);
    if !path.exists() {
        // `dyadic2` or a missing `dyadic2.json` both name the built-in.
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(r);
        if let Some(name) = builtin_names().iter().find(|n| **n == r || **n == stem) {
            return Machine::builtin(name);
        }
    }
    if !path.exists() {
        return Err(Error::InvalidArgument(format!("machine spec {r} not found")));
    }
    Machine::from_spec(MachineSpec::load(path)?)
}

fn rational(s: &str) -> Result<BigRational> {
    parse_rational(s.trim())
}

fn rational_list(s: &str) -> Result<Vec<BigRational>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(rational).collect()
}

/// `a,b,c` or inclusive `start:stop:step`.
fn grid(s: &str) -> Result<Vec<BigRational>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => rational_list(s),
        3 => {
            let (a, b, h) = (rational(parts[0])?, rational(parts[1])?, rational(parts[2])?);
            if !h.is_positive() {
                return Err(Error::InvalidArgument("grid step must be positive".into()));
            }
            let mut out = Vec::new();
            let mut t = a;
            while t <= b {
                out.push(t.clone());
                t += &h;
                if out.len() > 100_000 {
                    return Err(Error::ResourceLimit("temperature grid longer than 100000".into()));
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!("bad grid {s}"))),
    }
}

fn args_json<T: Serialize>(a: &T) -> Value {
    serde_json::to_value(a).expect("arguments serialize")
}

fn record_csv(r: &HaltRecord) -> String {
    format!("{},{},{},{},{}\n", r.round, r.program.len(), r.program, r.steps, r.output.to_sentinel_hex())
}

fn cmd_machines(a: &MachinesArgs) -> Result<String> {
    let header = Header::new("machines", args_json(a));
    match &a.show {
        Some(name) => {
            let m = Machine::builtin(name)?;
            let mut s = m.spec().to_json();
            s.push('\n');
            Ok(s)
        }
        None => {
            let list: Result<Vec<Value>> = builtin_names()
                .iter()
                .map(|n| {
                    let m = Machine::builtin(n)?;
                    let kind = if m.as_table().is_some() { "table" } else { "step" };
                    Ok(json!({ "name": n, "hash": m.id(), "kind": kind, "finite": m.max_length().is_some() }))
                })
                .collect();
            Ok(json_report(&header, json!({ "machines": list? })))
        }
    }
}

fn cmd_enumerate(a: &EnumerateArgs) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let s = a.schedule.schedule();
    let recs = match &a.checkpoint {
        Some(p) => Enumerator::run_with_checkpoint(&m, s, a.rounds, p)?.into_records(),
        None => dovetail(&m, a.rounds, s)?,
    };
    if let Err((x, y)) = verify_records_prefix_free(&recs) {
        return Err(Error::InvalidMachine(format!("{x} is a prefix of {y}")));
    }
    let kraft = kraft_partial_sums(&recs).last().cloned().unwrap_or_else(algotherm::Dyadic::zero);
    let header = Header::new("enumerate", args_json(a)).machine(&m).schedule(s.describe());
    Ok(match a.format {
        Format::Csv => {
            let mut out = header.csv_lines();
            out.push_str(&format!("# halted={} kraft={}\n", recs.len(), exact_decimal(&kraft)));
            out.push_str("round,length,bits,steps,output_hex\n");
            for r in &recs {
                out.push_str(&record_csv(r));
            }
            out
        }
        Format::Json => json_report(
            &header,
            json!({ "halted": recs.len(), "kraft": exact_decimal(&kraft), "records": recs }),
        ),
    })
}

fn cmd_sweep(a: &SweepArgs, prec: u32) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let cfg = SweepConfig {
        grid: grid(&a.t_grid)?,
        qs: a.q.as_deref().map(rational_list).transpose()?.unwrap_or_default(),
        prec,
    };
    let s = a.schedule.schedule();
    let mut header = Header::new("sweep", args_json(a)).machine(&m).precision(prec);
    let recs;
    let source = match m.as_table() {
        Some(tm) => {
            let cutoff = a.cutoff.or(tm.max_length()).unwrap_or(64);
            Source::Spectrum { cutoff }
        }
        None => {
            let rounds = a
                .rounds
                .ok_or_else(|| Error::InvalidArgument("step machines need --rounds".into()))?;
            recs = dovetail(&m, rounds, s)?;
            header = header.schedule(s.describe());
            Source::Records(&recs)
        }
    };
    let rows = sweep(&m, source, &cfg)?;
    Ok(match a.format {
        Format::Csv => {
            let mut out = header.csv_lines();
            for r in &rows {
                if let Err(e) = &r.result {
                    out.push_str(&format!("# T={} error={}\n", format_rational(&r.t), e));
                }
            }
            out.push_str(&sweep_csv(&rows));
            out
        }
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| match &r.result {
                    Ok(row) => row.to_json(),
                    Err(e) => json!({ "T": format_rational(&r.t), "error": e.to_string() }),
                })
                .collect();
            json_report(&header, json!({ "rows": body }))
        }
    })
}

fn cmd_solve(a: &SolveArgs, prec: u32) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let q = rational(&a.target)?;
    let s = solve_temperature(&m, &q, prec)?;
    let header = Header::new("solve-temp", args_json(a)).machine(&m).precision(prec);
    Ok(json_report(
        &header,
        json!({
            "target": format_rational(&q),
            "T": interval_json(&s.t),
            "Z": interval_json(&s.z),
            "iterations": s.iterations,
        }),
    ))
}

fn cmd_probe(a: &ProbeArgs, prec: u32) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let t = rational(&a.t)?;
    let p = divergence_probe(&m, &t, Weight::parse(&a.weight)?, a.depth, prec)?;
    let mut body = p.to_json();
    if let Some(th) = &a.threshold {
        body["first_exceeding"] = json!(p.first_exceeding(&rational(th)?));
    }
    if let Some(th) = &a.normalized_threshold {
        body["first_normalized_exceeding"] = json!(p.first_normalized_exceeding(&rational(th)?));
    }
    let mut header = Header::new("probe-divergence", args_json(a)).machine(&m).precision(prec);
    if m.as_table().is_none() {
        header = header.schedule(Schedule::default().describe());
    }
    Ok(json_report(&header, body))
}

fn cmd_complexity(a: &ComplexityArgs) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let s: Bits = match (&a.target_hex, &a.target) {
        (Some(h), None) => Bits::from_sentinel_hex(h)?,
        (None, Some(b)) => b.parse()?,
        _ => return Err(Error::InvalidArgument("give exactly one of --target-hex and --target".into())),
    };
    let r = program_size_complexity(&m, &s, a.lmax, a.fuel, a.budget)?;
    let p = algorithmic_probability(&m, &s, a.lmax, a.fuel, a.budget)?;
    let mut body = json!({
        "target": s,
        "target_hex": s.to_sentinel_hex(),
        "verdict": r.verdict,
        "probability": p,
    });
    if let Some(g) = &a.profile {
        let grid: Vec<usize> = g
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad prefix length {x}"))))
            .collect::<Result<_>>()?;
        body["profile"] = serde_json::to_value(compression_profile(&m, &s, &grid, a.lmax, a.fuel, a.budget)?)?;
    }
    let header = Header::new("complexity", args_json(a)).machine(&m);
    Ok(json_report(&header, body))
}

fn samples(s: &str) -> Result<u64> {
    let bad = || Error::InvalidArgument(format!("bad sample count {s}"));
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| bad())?;
    if f < 0.0 || f.fract() != 0.0 || f > 1e15 {
        return Err(bad());
    }
    Ok(f as u64)
}

fn cmd_ensemble(a: &EnsembleArgs, prec: u32) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let sp = Spectrum::from_machine(&m)?;
    let n_samples = samples(&a.mc_samples)?;
    let table = build_theta(&sp, a.n, a.l + 1, a.delta_l)?;
    let dev = micro_canonical_deviation(&table, a.l, a.n, prec)?;
    let mut body = json!({
        "theta_digest": table.digest(),
        "theta_rectangle": { "N_max": table.n_max(), "L_max": table.l_cap(), "delta_L": table.delta_l() },
        "ensemble": dev.to_json(),
    });
    let mut header = Header::new("ensemble", args_json(a)).machine(&m).precision(prec);
    if n_samples > 0 {
        let ch = channel_simulate(&m, a.n, a.l, a.delta_l, n_samples, a.seed)?;
        body["acceptance"] = json!(ch.acceptance());
        body["channel"] = ch.to_json();
        header = header.seed(a.seed);
    }
    Ok(json_report(&header, body))
}

fn cmd_entropy(a: &EntropyArgs, prec: u32) -> Result<String> {
    let m = load_machine(&a.machine.machine)?;
    let w = match a.weighting {
        WeightingArg::Probability => Weighting::Probability,
        WeightingArg::Complexity => Weighting::Complexity,
    };
    let r = shannon_partial(&m, w, a.cutoff, a.fuel, prec)?;
    let header = Header::new("entropy-partial", args_json(a)).machine(&m).precision(prec);
    Ok(json_report(
        &header,
        json!({
            "weighting": w,
            "cutoff": r.cutoff,
            "outputs": r.outputs.to_string(),
            "value": interval_json(&r.value),
        }),
    ))
}

fn run(cli: &Cli) -> Result<String> {
    if cli.precision < 8 {
        return Err(Error::InvalidArgument(format!("precision must be at least 8 bits, got {}", cli.precision)));
    }
    let p = cli.precision;
    match &cli.command {
        Command::Machines(a) => cmd_machines(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Sweep(a) => cmd_sweep(a, p),
        Command::SolveTemp(a) => cmd_solve(a, p),
        Command::ProbeDivergence(a) => cmd_probe(a, p),
        Command::Complexity(a) => cmd_complexity(a),
        Command::Ensemble(a) => cmd_ensemble(a, p),
        Command::EntropyPartial(a) => cmd_entropy(a, p),
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config | ErrorKind::Io => 2,
        ErrorKind::Resource => 3,
        ErrorKind::NumericDomain => 4,
        ErrorKind::Unsolvable => 5,
    }
}

fn fail(kind: &str, msg: &str, code: u8) -> ExitCode {
    let line = json!({ "error": { "kind": kind, "message": msg.replace('\n', " ") } });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail("config", first, 2);
        }
    };
    let result = run(&cli).and_then(|text| emit(cli.output.as_deref(), &text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Io => "io",
                ErrorKind::Resource => "resource",
                ErrorKind::NumericDomain => "numeric-domain",
                ErrorKind::Unsolvable => "unsolvable",
            };
            fail(kind, &e.to_string(), exit_code(e.kind()))
        }
    }
}
