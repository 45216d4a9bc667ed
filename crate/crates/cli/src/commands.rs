//! Command-line arguments and the commands behind them.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use wavemera::bounds::{run_trials, TrialConfig};
use wavemera::dwt::{factor_circuit, orthogonality_residual, FilterFamily};
use wavemera::fermion1d::{
    entanglement_entropy, exact_two_point, mode_energy, restricted_symbol, FilledModeSet,
    SymbolSource, EXACT_ENERGY_DENSITY,
};
use wavemera::fermion2d::{energy_density_2d, restricted_symbol_2d, EXACT_ENERGY_DENSITY_2D};
use wavemera::filters::store::FilterStore;
use wavemera::filters::{
    equal_magnitude_residual, moment_residual, orthonormality_residual, DESIGN_GRID,
};
use wavemera::spectral::{
    default_kgrid, fermi_support, phase_difference, renormalized_dispersion, ModeKind,
};
use wavemera::{FilterPair, ModeSeq};

use crate::emit::{Cell, Format, Provenance, Report};

#[derive(Debug, Parser)]
#[command(
    name = "wavemera",
    version,
    about = "Wavelet entanglement renormalization for free-fermion hopping models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Redesign filter pairs instead of reading them from the store.
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct PairArgs {
    /// Number of vanishing moments.
    #[arg(long = "K", default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=10))]
    pub k: u32,
    /// Order of the flat delay.
    #[arg(long = "L", default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=12))]
    pub l: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Scaling,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    Phase,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SupportMode {
    Filled,
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Exact,
    Mera,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SublatticeArg {
    Even,
    Odd,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design one filter pair and print its taps.
    Design {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Half-shift error for every (K, L) up to the given orders.
    EpsilonSweep {
        #[arg(long = "Kmax", default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=10))]
        k_max: u32,
        #[arg(long = "Lmax", default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=12))]
        l_max: u32,
    },
    /// Renormalized dispersions for levels 1 to `layers`.
    Dispersion {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=10))]
        layers: u32,
        #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(16..=8192))]
        grid: u32,
        #[arg(long, value_enum, default_value_t = Branch::Scaling)]
        branch: Branch,
        /// Multiply level-l values by 2^l.
        #[arg(long)]
        rescaled: bool,
    },
    /// Relative phase of the two wavelet families for levels 1 to `layers`.
    Phase {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=12))]
        layers: u32,
        #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(16..=8192))]
        grid: u32,
        #[arg(long, value_enum, default_value_t = Curve::Phase)]
        curve: Curve,
    },
    /// Momentum support of filled or empty modes for levels 1 to `layers`.
    Support {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=12))]
        layers: u32,
        #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u32).range(16..=8192))]
        grid: u32,
        #[arg(long, value_enum, default_value_t = SupportMode::Filled)]
        mode: SupportMode,
    },
    /// Energy density of the one-dimensional circuit state.
    Energy1d {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=20))]
        layers: u32,
    },
    /// Energy density of the two-dimensional circuit state with equal depths.
    Energy2d {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=16))]
        layers: u32,
    },
    /// Two-point function on the sites `0..range`.
    Twopoint {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u32).range(1..=20))]
        layers: u32,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..=256))]
        range: u32,
    },
    /// Entanglement entropy of intervals.
    Entropy1d {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u32).range(1..=20))]
        layers: u32,
        #[arg(long, value_enum, default_value_t = Source::Exact)]
        source: Source,
        /// Interval lengths.
        #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 32, 64],
              value_parser = clap::value_parser!(u32).range(1..=256))]
        sizes: Vec<u32>,
    },
    /// Entanglement entropy of square boxes of the two-dimensional state.
    Entropy2d {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=12))]
        layers: u32,
        /// Box sides.
        #[arg(long = "box", value_delimiter = ',', default_values_t = [8u32, 16, 32],
              value_parser = clap::value_parser!(u32).range(1..))]
        boxes: Vec<u32>,
    },
    /// Randomized check of the correlation-function error bound.
    Bound {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=20))]
        layers: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..=10000))]
        trials: u32,
    },
    /// Gate layers of the circuit acting on one sublattice.
    Circuit {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = SublatticeArg::Even)]
        sublattice: SublatticeArg,
    },
}

/// Failure of a command, classified by exit status.
#[derive(Debug)]
pub enum Failure {
    Library(wavemera::Error),
    Io(std::io::Error),
}

impl From<wavemera::Error> for Failure {
    fn from(e: wavemera::Error) -> Self {
        Failure::Library(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Library(e.into())
    }
}

/// A finished command: its report, and whether a verification failed.
pub struct Outcome {
    pub provenance: Provenance,
    pub report: Report,
    pub verified: bool,
}

struct Context {
    store: FilterStore,
    refresh: bool,
}

impl Context {
    fn pair(&self, args: PairArgs) -> Result<FilterPair, Failure> {
        Ok(self
            .store
            .get_or_design(args.k as usize, args.l as usize, self.refresh)?)
    }
}

fn pair_params(args: PairArgs) -> Vec<(&'static str, String)> {
    vec![("K", args.k.to_string()), ("L", args.l.to_string())]
}

fn list(values: &[u32]) -> String {
    values
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn outcome(
    command: &'static str,
    parameters: Vec<(&'static str, String)>,
    report: Report,
) -> Outcome {
    Outcome {
        provenance: Provenance {
            command,
            parameters,
        },
        report,
        verified: true,
    }
}

fn filter_json(f: &ModeSeq) -> Value {
    json!({ "offset": f.offset(), "values": f.real_values() })
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let ctx = Context {
        store: FilterStore::from_env(),
        refresh: cli.no_cache,
    };
    match &cli.command {
        Command::Design { pair: args } => design(&ctx, *args),
        Command::EpsilonSweep { k_max, l_max } => epsilon_sweep(&ctx, *k_max, *l_max),
        Command::Dispersion {
            pair,
            layers,
            grid,
            branch,
            rescaled,
        } => dispersion(&ctx, *pair, *layers, *grid, *branch, *rescaled),
        Command::Phase {
            pair,
            layers,
            grid,
            curve,
        } => phase(&ctx, *pair, *layers, *grid, *curve),
        Command::Support {
            pair,
            layers,
            grid,
            mode,
        } => support(&ctx, *pair, *layers, *grid, *mode),
        Command::Energy1d { pair, layers } => energy1d(&ctx, *pair, *layers),
        Command::Energy2d { pair, layers } => energy2d(&ctx, *pair, *layers),
        Command::Twopoint {
            pair,
            layers,
            range,
        } => twopoint(&ctx, *pair, *layers, *range),
        Command::Entropy1d {
            pair,
            layers,
            source,
            sizes,
        } => entropy1d(&ctx, *pair, *layers, *source, sizes),
        Command::Entropy2d {
            pair,
            layers,
            boxes,
        } => entropy2d(&ctx, *pair, *layers, boxes),
        Command::Bound {
            pair,
            layers,
            seed,
            trials,
        } => bound(&ctx, *pair, *layers, *seed, *trials),
        Command::Circuit { pair, sublattice } => circuit(&ctx, *pair, *sublattice),
    }
}

fn design(ctx: &Context, args: PairArgs) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let mut report = Report::table(&["n", "h_s", "g_s", "h_w", "g_w"]);
    let filters = [&pair.h_s, &pair.g_s, &pair.h_w, &pair.g_w];
    let lo = filters.iter().map(|f| f.offset()).min().unwrap_or(0);
    let hi = filters.iter().map(|f| f.last()).max().unwrap_or(-1);
    for n in lo..=hi {
        let mut row = vec![Cell::from(n)];
        row.extend(filters.iter().map(|f| Cell::from(f.get(n).re)));
        report.push(row);
    }
    report.set("K", pair.k);
    report.set("L", pair.l);
    report.set("M", pair.m);
    report.set("epsilon", pair.epsilon);
    report.set("B", pair.b);
    report.set(
        "orthonormality_residual",
        orthonormality_residual(&pair.h_s).max(orthonormality_residual(&pair.g_s)),
    );
    report.set(
        "moment_residual",
        moment_residual(&pair.h_w, pair.k).max(moment_residual(&pair.g_w, pair.k)),
    );
    report.set(
        "equal_magnitude_residual",
        equal_magnitude_residual(&pair, DESIGN_GRID),
    );
    for (name, f) in ["h_s", "g_s", "h_w", "g_w"].into_iter().zip(filters) {
        report.set(name, filter_json(f));
    }
    Ok(outcome("design", pair_params(args), report))
}

fn epsilon_sweep(ctx: &Context, k_max: u32, l_max: u32) -> Result<Outcome, Failure> {
    let mut report = Report::table(&["K", "L", "epsilon"]);
    for k in 1..=k_max {
        for l in 1..=l_max {
            let pair = ctx.pair(PairArgs { k, l })?;
            report.push(vec![
                Cell::from(k as usize),
                Cell::from(l as usize),
                Cell::from(pair.epsilon),
            ]);
        }
    }
    let params = vec![("Kmax", k_max.to_string()), ("Lmax", l_max.to_string())];
    Ok(outcome("epsilon-sweep", params, report))
}

fn dispersion(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    grid: u32,
    branch: Branch,
    rescaled: bool,
) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let kgrid = default_kgrid(grid as usize);
    let mut report = Report::table(&["k", "value", "level"]);
    let mut residuals = Vec::new();
    for level in 1..=layers as usize {
        let d = renormalized_dispersion(&pair, level, &kgrid);
        let (curve, residual) = match branch {
            Branch::Scaling => (&d.e_curve, d.scaling_phase_residual()),
            Branch::Wavelet => (&d.eps_curve, d.wavelet_interaction_residual()),
        };
        let factor = if rescaled {
            f64::powi(2.0, level as i32)
        } else {
            1.0
        };
        for (k, v) in curve.kgrid.iter().zip(&curve.values) {
            report.push(vec![
                Cell::from(*k),
                Cell::from(v.re * factor),
                Cell::from(level),
            ]);
        }
        residuals.push(residual);
    }
    report.set("structure_residual", residuals);
    let mut params = pair_params(args);
    params.extend([
        ("layers", layers.to_string()),
        ("grid", grid.to_string()),
        ("branch", format!("{branch:?}").to_lowercase()),
        ("rescaled", rescaled.to_string()),
    ]);
    Ok(outcome("dispersion", params, report))
}

fn phase(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    grid: u32,
    curve: Curve,
) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let kgrid = default_kgrid(grid as usize);
    let mut report = Report::table(&["k", "value", "level"]);
    let mut flagged = 0usize;
    let mut deviations = Vec::new();
    for level in 1..=layers as usize {
        let diff = phase_difference(&pair, level, &kgrid);
        let samples = match curve {
            Curve::Phase => &diff.phase,
            Curve::Target => &diff.target,
        };
        for (i, (k, v)) in samples.kgrid.iter().zip(&samples.values).enumerate() {
            if diff.flagged[i] {
                flagged += 1;
                continue;
            }
            report.push(vec![Cell::from(*k), Cell::from(v.re), Cell::from(level)]);
        }
        deviations.push(diff.max_deviation(0.1));
    }
    if flagged > 0 {
        info!("skipped {flagged} samples where the transform vanishes");
    }
    report.set("flagged", flagged);
    report.set("max_deviation", deviations);
    let mut params = pair_params(args);
    params.extend([
        ("layers", layers.to_string()),
        ("grid", grid.to_string()),
        ("curve", format!("{curve:?}").to_lowercase()),
    ]);
    Ok(outcome("phase", params, report))
}

fn support(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    grid: u32,
    mode: SupportMode,
) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let kgrid = default_kgrid(grid as usize);
    let kind = match mode {
        SupportMode::Filled => ModeKind::Filled,
        SupportMode::Empty => ModeKind::Empty,
    };
    let mut report = Report::table(&["k", "value", "level"]);
    let mut lobes = Vec::new();
    for level in 1..=layers as usize {
        let s = fermi_support(&pair, level, &kgrid, kind);
        let mut samples: Vec<(f64, f64)> = s
            .inside
            .kgrid
            .iter()
            .zip(&s.inside.values)
            .chain(s.outside.kgrid.iter().zip(&s.outside.values))
            .map(|(k, v)| (*k, v.re))
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (k, v) in samples {
            report.push(vec![Cell::from(k), Cell::from(v), Cell::from(level)]);
        }
        lobes.push(json!({ "level": level, "side_lobe": s.side_lobe, "peak": s.peak }));
    }
    report.set("side_lobes", lobes);
    let mut params = pair_params(args);
    params.extend([
        ("layers", layers.to_string()),
        ("grid", grid.to_string()),
        ("mode", format!("{mode:?}").to_lowercase()),
    ]);
    Ok(outcome("support", params, report))
}

fn rel_error(value: f64, exact: f64) -> f64 {
    ((value - exact) / exact).abs()
}

fn energy1d(ctx: &Context, args: PairArgs, layers: u32) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let modes = FilledModeSet::new(&pair, layers as usize);
    let mut report = Report::table(&["K", "L", "depth", "value", "rel_error"]);
    let mut value = 0.0;
    for (i, phi) in modes.modes.iter().enumerate() {
        value += mode_energy(phi) / FilledModeSet::stride(i + 1) as f64;
        report.push(vec![
            Cell::from(pair.k),
            Cell::from(pair.l),
            Cell::from(i + 1),
            Cell::from(value),
            Cell::from(rel_error(value, EXACT_ENERGY_DENSITY)),
        ]);
    }
    report.set("value", value);
    report.set("exact", EXACT_ENERGY_DENSITY);
    report.set("rel_error", rel_error(value, EXACT_ENERGY_DENSITY));
    let mut params = pair_params(args);
    params.push(("layers", layers.to_string()));
    Ok(outcome("energy1d", params, report))
}

fn energy2d(ctx: &Context, args: PairArgs, layers: u32) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let mut report = Report::table(&["K", "L", "depth", "value", "rel_error"]);
    let mut value = 0.0;
    for depth in 1..=layers as usize {
        value = energy_density_2d(&pair, depth, depth);
        report.push(vec![
            Cell::from(pair.k),
            Cell::from(pair.l),
            Cell::from(depth),
            Cell::from(value),
            Cell::from(rel_error(value, EXACT_ENERGY_DENSITY_2D)),
        ]);
    }
    report.set("value", value);
    report.set("exact", EXACT_ENERGY_DENSITY_2D);
    report.set("rel_error", rel_error(value, EXACT_ENERGY_DENSITY_2D));
    let mut params = pair_params(args);
    params.push(("layers", layers.to_string()));
    Ok(outcome("energy2d", params, report))
}

fn twopoint(ctx: &Context, args: PairArgs, layers: u32, range: u32) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let modes = FilledModeSet::new(&pair, layers as usize);
    let mut report = Report::table(&["x", "y", "re", "im"]);
    let mut max_error = 0.0f64;
    for x in 0..range as i64 {
        for y in 0..range as i64 {
            let c = modes.two_point(x, y);
            max_error = max_error.max((c - exact_two_point(y - x)).norm());
            report.push(vec![
                Cell::from(x),
                Cell::from(y),
                Cell::from(c.re),
                Cell::from(c.im),
            ]);
        }
    }
    report.set("max_abs_error", max_error);
    let mut params = pair_params(args);
    params.extend([("layers", layers.to_string()), ("range", range.to_string())]);
    Ok(outcome("twopoint", params, report))
}

fn entropy1d(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    source: Source,
    sizes: &[u32],
) -> Result<Outcome, Failure> {
    let pair = match source {
        Source::Mera => Some(ctx.pair(args)?),
        Source::Exact => None,
    };
    let symbols = match &pair {
        Some(pair) => SymbolSource::Mera {
            pair,
            layers: layers as usize,
        },
        None => SymbolSource::Exact,
    };
    let mut report = Report::table(&["R", "S_nats"]);
    let mut points = Vec::new();
    for &r in sizes {
        let sites: Vec<i64> = (0..r as i64).collect();
        let s = entanglement_entropy(&restricted_symbol(symbols, &sites)?);
        report.push(vec![Cell::from(r as usize), Cell::from(s)]);
        points.push((r as f64, s));
    }
    if let [.., (r1, s1), (r2, s2)] = points[..] {
        if r2 != r1 {
            report.set("central_charge_estimate", 3.0 * (s2 - s1) / (r2 / r1).ln());
        }
    }
    let mut params = vec![("source", format!("{source:?}").to_lowercase())];
    if source == Source::Mera {
        params.extend(pair_params(args));
        params.push(("layers", layers.to_string()));
    }
    params.push(("sizes", list(sizes)));
    Ok(outcome("entropy1d", params, report))
}

/// Least-squares slope of `y` against `x`.
pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn entropy2d(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    boxes: &[u32],
) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let mut report = Report::table(&["R", "S_nats", "S_over_R"]);
    let mut points = Vec::new();
    for &r in boxes {
        let block = restricted_symbol_2d(&pair, layers as usize, layers as usize, r as usize)?;
        let s = entanglement_entropy(&block);
        report.push(vec![
            Cell::from(r as usize),
            Cell::from(s),
            Cell::from(s / r as f64),
        ]);
        points.push(((r as f64).log2(), s / r as f64));
    }
    if let Some(m) = slope(&points) {
        report.set("slope_S_over_R_vs_log2R", m);
    }
    let mut params = pair_params(args);
    params.extend([("layers", layers.to_string()), ("box", list(boxes))]);
    Ok(outcome("entropy2d", params, report))
}

fn bound(
    ctx: &Context,
    args: PairArgs,
    layers: u32,
    seed: u64,
    trials: u32,
) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let config = TrialConfig {
        trials: trials as usize,
        seed,
        ..TrialConfig::default()
    };
    let summary = run_trials(&pair, layers as usize, &config)?;
    let mut report = Report::table(&[
        "trial",
        "sites",
        "N",
        "D",
        "measured",
        "bound",
        "gap",
        "two_delta",
        "satisfied",
    ]);
    for o in &summary.outcomes {
        let sites = o
            .sites
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        report.push(vec![
            Cell::from(o.index),
            Cell::from(sites),
            Cell::from(o.report.n),
            Cell::from(o.report.d),
            Cell::from(o.report.measured.unwrap_or(0.0)),
            Cell::from(o.report.bound),
            Cell::from(o.gap.gap),
            Cell::from(o.gap.two_delta),
            Cell::from(o.report.satisfied == Some(true) && o.gap.ok),
        ]);
    }
    report.merge(&summary.worst)?;
    report.set("satisfied", summary.satisfied());
    report.set("seed", seed);
    report.set("trials", trials);
    report.set("violations", summary.violations);
    report.set("gap_violations", summary.gap_violations);
    report.set("worst_gap", serde_json::to_value(summary.worst_gap)?);
    let mut params = pair_params(args);
    params.extend([
        ("layers", layers.to_string()),
        ("seed", seed.to_string()),
        ("trials", trials.to_string()),
    ]);
    let mut out = outcome("bound", params, report);
    out.verified = summary.satisfied();
    Ok(out)
}

fn circuit(ctx: &Context, args: PairArgs, sublattice: SublatticeArg) -> Result<Outcome, Failure> {
    let pair = ctx.pair(args)?;
    let spec = match sublattice {
        SublatticeArg::Even => factor_circuit(&pair, FilterFamily::H)?,
        SublatticeArg::Odd => factor_circuit(&pair, FilterFamily::G)?,
    };
    let mut report = Report::table(&["layer", "parity", "g00", "g01", "g10", "g11"]);
    for (i, layer) in spec.layers.iter().enumerate() {
        report.push(vec![
            Cell::from(i),
            Cell::from(format!("{:?}", layer.parity).to_lowercase()),
            Cell::from(layer.gate[0][0]),
            Cell::from(layer.gate[0][1]),
            Cell::from(layer.gate[1][0]),
            Cell::from(layer.gate[1][1]),
        ]);
    }
    report.merge(&spec)?;
    report.set("orthogonality_residual", orthogonality_residual(&spec));
    let mut params = pair_params(args);
    params.push(("sublattice", format!("{sublattice:?}").to_lowercase()));
    Ok(outcome("circuit", params, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        assert!((slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap() - 2.0).abs() < 1e-15);
        assert!(slope(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn parses_named_orders() {
        let cli = Cli::try_parse_from([
            "wavemera", "energy1d", "--K", "2", "--L", "1", "--layers", "5",
        ])
        .unwrap();
        match cli.command {
            Command::Energy1d { pair, layers } => assert_eq!((pair.k, pair.l, layers), (2, 1, 5)),
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["wavemera", "energy1d", "--K", "0"]).is_err());
        let cli =
            Cli::try_parse_from(["wavemera", "entropy2d", "--box", "4,8", "--format", "json"])
                .unwrap();
        assert_eq!(cli.format, Format::Json);
        match cli.command {
            Command::Entropy2d { boxes, .. } => assert_eq!(boxes, vec![4, 8]),
            other => panic!("{other:?}"),
        }
    }
}
