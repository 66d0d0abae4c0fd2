//! `hardrods`: command-line access to the parking-model computations.

mod svg;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardrods::ensembles::{self, ChainSource, ParkingProbability};
use hardrods::grid::fmt17;
use hardrods::{eos, paircorr, rational, spectral, Exec, Rational};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug, Serialize)]
#[command(name = "hardrods", version, about = "Equilibrium statistics of hard rods in parking configurations")]
struct Cli {
    /// Worker threads for parallel loops (0 = rayon default).
    #[arg(long, global = true, env = "HARDRODS_THREADS", default_value_t = 0)]
    threads: usize,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Matched pressure, density and thermodynamic potentials.
    Eos(StateArgs),
    /// Pair distribution g(x) (or h(x) with --h) on a grid.
    G(GridArgs),
    /// Correlation length and pseudo-period from the dominant pole.
    Xi(StateArgs),
    /// Poles of the Laplace transform for branches 1..n.
    Poles(PoleArgs),
    /// Monte Carlo spacing chains or empirical pair distribution.
    Sample(SampleArgs),
    /// Exact and Monte Carlo parking probability of uniform points.
    Parkprob(ParkArgs),
    /// SVG overlay of g(x) for several pressures.
    Figure1(FigureArgs),
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
#[group(required = true, multiple = false)]
struct State {
    /// Reduced pressure p.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Density rho in (1/2, 1).
    #[arg(long)]
    rho: Option<f64>,
}

impl State {
    fn resolve(&self) -> hardrods::Result<(f64, f64)> {
        match (self.p, self.rho) {
            (Some(p), None) => {
                if !p.is_finite() {
                    return Err(hardrods::Error::NonFinite(p));
                }
                Ok((p, eos::density_from_pressure(p)))
            }
            (None, Some(rho)) => Ok((eos::pressure_from_density(rho)?, rho)),
            _ => Err(hardrods::Error::Invalid("give exactly one of --p and --rho".into())),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct StateArgs {
    #[command(flatten)]
    state: State,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    #[command(flatten)]
    state: State,
    #[arg(long, default_value_t = 10.0)]
    xmax: f64,
    /// Grid step, decimal or `a/b`.
    #[arg(long, default_value = "1/100")]
    step: String,
    /// Emit h(x) = g(x) - 1 instead of g(x).
    #[arg(long)]
    h: bool,
}

#[derive(Args, Debug, Serialize)]
struct PoleArgs {
    #[command(flatten)]
    state: State,
    #[arg(long, default_value_t = 4)]
    branches: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SampleKind {
    /// One spacing chain.
    Chain,
    /// Empirical g(x) with standard errors.
    Histogram,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    /// Pressure (isobaric) or density; with --canonical, --rho sets l = n/rho.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Sample the canonical ensemble of n gaps with total l.
    #[arg(long)]
    canonical: bool,
    /// Chain length (canonical ring size).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Canonical total length.
    #[arg(long)]
    l: Option<f64>,
    #[arg(long, value_enum, default_value_t = SampleKind::Chain)]
    kind: SampleKind,
    /// Independent samples (isobaric origins or canonical chains).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = ensembles::DEFAULT_BURN_IN)]
    sweeps: usize,
    #[arg(long, default_value_t = 10)]
    mmax: usize,
    #[arg(long, default_value_t = 10.0)]
    xmax: f64,
    /// Histogram bin width, decimal or `a/b`.
    #[arg(long, default_value = "1/20")]
    bin: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Args, Debug, Serialize)]
struct ParkArgs {
    #[arg(long)]
    n: usize,
    /// Circumference, decimal or `a/b`.
    #[arg(long)]
    l: String,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct FigureArgs {
    /// Comma-separated pressures.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-10,-2,0,2,10")]
    pressures: Vec<f64>,
    #[arg(long, default_value_t = 8.0)]
    xmax: f64,
    #[arg(long, default_value = "1/100")]
    step: String,
    /// Clip the vertical axis (default: largest value).
    #[arg(long)]
    ymax: Option<f64>,
}

type CliResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn provenance(cli: &Cli, seed: Option<u64>) -> Value {
    let name = serde_json::to_value(&cli.command).ok().and_then(|v| v.as_object().and_then(|o| o.keys().next().cloned()));
    json!({
        "command": name,
        "config": cli,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn json_doc(cli: &Cli, seed: Option<u64>, body: Value) -> String {
    let mut doc = json!({ "provenance": provenance(cli, seed) });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn no_svg(cli: &Cli) -> CliResult<()> {
    if cli.format == Format::Svg {
        return Err("svg output is only available for figure1".into());
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<String> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match &cli.command {
        Command::Eos(a) => {
            no_svg(cli)?;
            let t = match (a.state.p, a.state.rho) {
                (Some(p), None) => eos::ThermoState::from_pressure(p),
                (None, Some(rho)) => eos::ThermoState::from_density(rho),
                _ => return Err("give exactly one of --p and --rho".into()),
            }
            .map_err(err)?;
            let (p, rho, gibbs, free) = (t.p, t.rho, t.gibbs_per_particle, t.free_energy_per_particle);
            Ok(match cli.format {
                Format::Json => json_doc(cli, None, json!({ "p": p, "rho": rho, "gibbs": gibbs, "free_energy": free })),
                _ => csv_table(&["p", "rho", "gibbs", "free_energy"], &[vec![fmt17(p), fmt17(rho), fmt17(gibbs), fmt17(free)]]),
            })
        }
        Command::G(a) => {
            no_svg(cli)?;
            let (p, _) = a.state.resolve().map_err(err)?;
            let step = rational::parse(&a.step).map_err(err)?;
            let zero = Rational::from_integer(0);
            let grid = if a.h {
                paircorr::h_grid_from(p, zero, a.xmax, step, exec)
            } else {
                paircorr::g_grid_from(p, zero, a.xmax, step, exec)
            }
            .map_err(err)?;
            let label = if a.h { "h" } else { "g" };
            Ok(match cli.format {
                Format::Json => {
                    let xs: Vec<f64> = grid.iter().map(|(x, _)| x).collect();
                    json_doc(cli, None, json!({ "p": p, "x": xs, label: grid.values() }))
                }
                _ => grid.to_csv(label),
            })
        }
        Command::Xi(a) => {
            no_svg(cli)?;
            let (p, _) = a.state.resolve().map_err(err)?;
            let s = spectral::correlation_summary(p).map_err(err)?;
            let l = s.dominant.lambda;
            Ok(match cli.format {
                Format::Json => json_doc(
                    cli,
                    None,
                    json!({
                        "p": p, "xi": s.xi, "period": s.period,
                        "dominant": { "n": s.dominant.index_n, "re": l.re, "im": l.im, "residual": s.dominant.residual },
                        "branch_order_ok": s.ordered,
                    }),
                ),
                _ => csv_table(
                    &["p", "xi", "period", "re", "im", "n", "branch_order_ok"],
                    &[vec![fmt17(p), fmt17(s.xi), fmt17(s.period), fmt17(l.re), fmt17(l.im), s.dominant.index_n.to_string(), s.ordered.to_string()]],
                ),
            })
        }
        Command::Poles(a) => {
            no_svg(cli)?;
            let (p, _) = a.state.resolve().map_err(err)?;
            if a.branches < 1 {
                return Err(format!("--branches must be at least 1, got {}", a.branches));
            }
            let poles = (1..=a.branches).map(|n| spectral::find_pole(p, n)).collect::<Result<Vec<_>, _>>().map_err(err)?;
            Ok(match cli.format {
                Format::Json => {
                    let list: Vec<Value> = poles
                        .iter()
                        .map(|q| json!({ "n": q.index_n, "re": q.lambda.re, "im": q.lambda.im, "residual": q.residual, "newton_iters": q.newton_iters }))
                        .collect();
                    json_doc(cli, None, json!({ "p": p, "poles": list }))
                }
                _ => {
                    let rows: Vec<Vec<String>> = poles
                        .iter()
                        .map(|q| vec![q.index_n.to_string(), fmt17(q.lambda.re), fmt17(q.lambda.im), fmt17(q.residual), q.newton_iters.to_string()])
                        .collect();
                    csv_table(&["n", "re", "im", "residual", "newton_iters"], &rows)
                }
            })
        }
        Command::Sample(a) => {
            no_svg(cli)?;
            sample(cli, a, exec)
        }
        Command::Parkprob(a) => {
            no_svg(cli)?;
            let l = rational::parse(&a.l).map_err(err)?;
            let pp = ParkingProbability::compute(a.n, l, a.trials, a.seed, exec).map_err(err)?;
            let log10 = if pp.exact_ext.is_zero() { f64::NEG_INFINITY } else { pp.exact_ext.log10() };
            Ok(match cli.format {
                Format::Json => json_doc(
                    cli,
                    Some(a.seed),
                    json!({
                        "n": pp.n, "l": pp.l, "exact": pp.exact, "exact_log10": if log10.is_finite() { json!(log10) } else { Value::Null },
                        "mc": pp.mc_estimate, "stderr": pp.mc_stderr, "sigma_distance": pp.sigma_distance(), "trials": pp.trials,
                    }),
                ),
                _ => csv_table(
                    &["n", "l", "exact", "exact_log10", "mc", "stderr", "sigma_distance", "trials"],
                    &[vec![
                        pp.n.to_string(),
                        fmt17(pp.l),
                        fmt17(pp.exact),
                        if log10.is_finite() { fmt17(log10) } else { "-inf".into() },
                        fmt17(pp.mc_estimate),
                        fmt17(pp.mc_stderr),
                        fmt17(pp.sigma_distance()),
                        pp.trials.to_string(),
                    ]],
                ),
            })
        }
        Command::Figure1(a) => {
            if a.pressures.is_empty() {
                return Err("--pressures must list at least one value".into());
            }
            let step = rational::parse(&a.step).map_err(err)?;
            let curves = a
                .pressures
                .iter()
                .map(|&p| paircorr::g_grid_with(p, a.xmax, step, exec).map(|g| (p, g)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            Ok(match cli.format {
                Format::Svg => svg::overlay(&curves, a.ymax),
                Format::Json => {
                    let list: Vec<Value> = curves
                        .iter()
                        .map(|(p, g)| json!({ "p": p, "x": g.iter().map(|(x, _)| x).collect::<Vec<_>>(), "g": g.values() }))
                        .collect();
                    json_doc(cli, None, json!({ "curves": list }))
                }
                Format::Csv => {
                    let mut out = String::from("p,x,g\n");
                    for (p, g) in &curves {
                        for (x, v) in g.iter() {
                            writeln!(out, "{},{},{}", fmt17(*p), fmt17(x), fmt17(v)).unwrap();
                        }
                    }
                    out
                }
            })
        }
    }
}

fn sample(cli: &Cli, a: &SampleArgs, exec: Exec) -> CliResult<String> {
    let source = if a.canonical {
        if a.p.is_some() {
            return Err("--canonical takes --l or --rho, not --p".into());
        }
        let l = match (a.l, a.rho) {
            (Some(l), None) => l,
            (None, Some(rho)) => a.n as f64 / rho,
            _ => return Err("--canonical needs exactly one of --l and --rho".into()),
        };
        ChainSource::Canonical { n: a.n, l, burn_in: a.sweeps }
    } else {
        if a.l.is_some() {
            return Err("--l only applies with --canonical".into());
        }
        let (p, _) = State { p: a.p, rho: a.rho }.resolve().map_err(err)?;
        ChainSource::Isobaric { p }
    };
    match a.kind {
        SampleKind::Chain => {
            let chain = match source {
                ChainSource::Isobaric { p } => ensembles::sample_isobaric(p, a.n, a.seed, a.stream),
                ChainSource::Canonical { n, l, burn_in } => ensembles::sample_canonical(n, l, burn_in, a.seed, a.stream),
            }
            .map_err(err)?;
            Ok(match cli.format {
                Format::Json => json_doc(cli, Some(a.seed), json!({ "stream_id": a.stream, "spacings": chain.spacings })),
                _ => {
                    let rows: Vec<Vec<String>> =
                        chain.spacings.iter().enumerate().map(|(i, s)| vec![i.to_string(), fmt17(*s)]).collect();
                    csv_table(&["i", "s"], &rows)
                }
            })
        }
        SampleKind::Histogram => {
            let bin = rational::parse(&a.bin).map_err(err)?;
            let e = ensembles::empirical_g(source, a.mmax, a.xmax, bin, a.samples, a.seed, exec).map_err(err)?;
            Ok(match cli.format {
                Format::Json => {
                    let xs: Vec<f64> = e.g.iter().map(|(x, _)| x).collect();
                    json_doc(cli, Some(a.seed), json!({ "origins": e.origins, "x": xs, "g": e.g.values(), "stderr": e.stderr }))
                }
                _ => {
                    let rows: Vec<Vec<String>> =
                        e.g.iter().zip(&e.stderr).map(|((x, v), s)| vec![fmt17(x), fmt17(v), fmt17(*s)]).collect();
                    csv_table(&["x", "g", "stderr"], &rows)
                }
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("hardrods: {e}");
            return ExitCode::FAILURE;
        }
    }
    let text = match run(&cli) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("hardrods: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(err),
    };
    if let Err(e) = written {
        eprintln!("hardrods: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
