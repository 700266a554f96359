//! Batch command-line front end.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit status is 0
//! on success, 1 when the computation fails and 2 on usage errors.
//!
//! Settings resolve as built-in defaults, then the `--config` TOML file, then
//! flags. Every JSON artifact records the dataset hashes and a command line
//! that regenerates it with all resolved settings spelled out.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocator::{
    ip_schedule_with, knapsack_allocate, Allocation, IpObjective, Schedule, DEFAULT_GRANULARITY,
};
use crate::egalitarianism::{
    egalitarianism, parameter_sweep, CapitalGrid, Curve, CurveMetadata, EgalScore, SweepAxis,
};
use crate::market_data::{parse_catalog, EconParams, MachineCatalog};
use crate::scenario::{Model, PowScenario};
use crate::stake_model::StakeParams;

const PROGRAM: &str = "egalitarian";
const DEFAULT_IP_STEPS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = PROGRAM, version, about = "Egalitarianism of cryptocurrency consensus mechanisms")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset checks.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Egalitarian curve: best ROI at every grid capital.
    Curve(RunArgs),
    /// Egalitarianism score of a curve.
    Egal(RunArgs),
    /// Proof-of-work curves with one parameter varied.
    Sweep(SweepArgs),
    /// Exact reinvesting purchase schedule next to the upfront knapsack.
    IpOpt(IpArgs),
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// Parse and cross-check the machine and coin tables.
    Validate(DataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModelKind {
    Pow,
    PurePos,
    TicketPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ObjectiveArg {
    AsWritten,
    CapitalFirst,
}

impl From<ObjectiveArg> for IpObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::AsWritten => IpObjective::AsWritten,
            ObjectiveArg::CapitalFirst => IpObjective::CapitalFirst,
        }
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Machines CSV (defaults to the bundled table).
    #[arg(long, value_name = "PATH")]
    dataset_machines: Option<PathBuf>,
    /// Coins CSV (defaults to the bundled table).
    #[arg(long, value_name = "PATH")]
    dataset_coins: Option<PathBuf>,
    /// TOML file with defaults for any flag; flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    coin: Option<String>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    duration_hours: Option<f64>,
    /// USD per kWh.
    #[arg(long)]
    electricity_cost: Option<f64>,
    /// Capital unit of the knapsack table, in USD.
    #[arg(long)]
    granularity: Option<f64>,
    /// One-off staking fee in USD.
    #[arg(long)]
    fee: Option<f64>,
    /// Staking return per USD over the period.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    ticket_price: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    min_capital: Option<f64>,
    #[arg(long)]
    max_capital: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (directory for per-value sweep CSVs); stdout if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    axis: SweepAxis,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    values: Vec<f64>,
    /// One CSV with a `swept_value` column instead of one file per value.
    #[arg(long)]
    long_format: bool,
}

#[derive(Debug, Args)]
struct IpArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    capital: f64,
    /// Number of equal time steps in the period.
    #[arg(long)]
    steps: Option<usize>,
    /// Machine to consider (repeatable); all machines of the coin if absent.
    #[arg(long = "machine", value_name = "NAME")]
    machines: Vec<String>,
    #[arg(long, value_enum)]
    ip_objective: Option<ObjectiveArg>,
}

/// Keys accepted in the `--config` file, named like the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dataset_machines: Option<PathBuf>,
    dataset_coins: Option<PathBuf>,
    coin: Option<String>,
    model: Option<ModelKind>,
    duration_hours: Option<f64>,
    electricity_cost: Option<f64>,
    granularity: Option<f64>,
    fee: Option<f64>,
    rate: Option<f64>,
    ticket_price: Option<f64>,
    min_capital: Option<f64>,
    max_capital: Option<f64>,
    step: Option<f64>,
    format: Option<Format>,
    steps: Option<usize>,
    ip_objective: Option<ObjectiveArg>,
}

/// Failure raised before any computation, reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Catalog {
            action: CatalogAction::Validate(data),
        } => catalog_validate(&data),
        Command::Curve(args) => curve(&args),
        Command::Egal(args) => egal(&args),
        Command::Sweep(args) => sweep(&args),
        Command::IpOpt(args) => ip_opt(&args),
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// One input table: where it came from and its SHA-256.
#[derive(Debug, Serialize)]
struct TableSource {
    source: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct DatasetInfo {
    machines: TableSource,
    coins: TableSource,
}

struct Dataset {
    catalog: MachineCatalog,
    info: DatasetInfo,
    machines_path: Option<PathBuf>,
    coins_path: Option<PathBuf>,
}

fn read_table(path: Option<&Path>, bundled: &'static str) -> anyhow::Result<(String, TableSource)> {
    let (text, source) = match path {
        Some(p) => (
            fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            p.display().to_string(),
        ),
        None => (bundled.to_string(), "bundled".to_string()),
    };
    let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
    Ok((text, TableSource { source, sha256 }))
}

fn load_dataset(data: &DataArgs, cfg: &FileConfig) -> anyhow::Result<Dataset> {
    let machines_path = data.dataset_machines.clone().or_else(|| cfg.dataset_machines.clone());
    let coins_path = data.dataset_coins.clone().or_else(|| cfg.dataset_coins.clone());
    let (bundled_machines, bundled_coins) = MachineCatalog::bundled_sources();
    let (machines_text, machines) = read_table(machines_path.as_deref(), bundled_machines)?;
    let (coins_text, coins) = read_table(coins_path.as_deref(), bundled_coins)?;
    let catalog = parse_catalog(&machines_text, &coins_text)?;
    Ok(Dataset {
        catalog,
        info: DatasetInfo { machines, coins },
        machines_path,
        coins_path,
    })
}

fn catalog_validate(data: &DataArgs) -> anyhow::Result<()> {
    let cfg = load_config(data.config.as_deref())?;
    let ds = load_dataset(data, &cfg)?;
    let mut out = format!(
        "machines: {}\ncoins: {}\n",
        ds.catalog.machines().len(),
        ds.catalog.coins().len()
    );
    for coin in ds.catalog.coins().keys() {
        let n = ds.catalog.machines().iter().filter(|m| &m.coin == coin).count();
        out.push_str(&format!("  {coin}: {n} machines\n"));
    }
    emit(None, &out)
}

/// Command-line reconstruction of the resolved settings.
struct Replay(Vec<String>);

impl Replay {
    fn new(subcommand: &str, ds: &Dataset) -> Self {
        let mut r = Replay(vec![PROGRAM.to_string(), subcommand.to_string()]);
        if let Some(p) = &ds.machines_path {
            r.flag("--dataset-machines", p.display());
        }
        if let Some(p) = &ds.coins_path {
            r.flag("--dataset-coins", p.display());
        }
        r
    }

    fn flag(&mut self, name: &str, value: impl std::fmt::Display) {
        self.0.push(name.to_string());
        self.0.push(value.to_string());
    }

    fn switch(&mut self, name: &str) {
        self.0.push(name.to_string());
    }

    fn render(&self) -> String {
        self.0.iter().map(|a| shell_quote(a)).collect::<Vec<_>>().join(" ")
    }
}

fn shell_quote(s: &str) -> String {
    let plain = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_./,:=+".contains(c));
    if plain {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn resolve_model(
    args: &ModelArgs,
    cfg: &FileConfig,
    ds: &Dataset,
    replay: &mut Replay,
) -> anyhow::Result<Model> {
    let coin = args.coin.clone().or_else(|| cfg.coin.clone());
    let kind = args.model.or(cfg.model).unwrap_or(ModelKind::Pow);
    replay.flag("--model", value_name(&kind));
    match kind {
        ModelKind::Pow => {
            let coin = coin.ok_or_else(|| usage("--coin is required for --model pow"))?;
            let econ = EconParams::new(
                args.electricity_cost
                    .or(cfg.electricity_cost)
                    .unwrap_or(EconParams::DEFAULT_ELECTRICITY_COST),
                args.duration_hours
                    .or(cfg.duration_hours)
                    .unwrap_or(EconParams::HOURS_PER_YEAR),
            )?;
            let granularity = args
                .granularity
                .or(cfg.granularity)
                .unwrap_or(DEFAULT_GRANULARITY);
            let scenario = PowScenario::from_catalog(&ds.catalog, &coin, econ, granularity)?;
            replay.flag("--coin", &coin);
            replay.flag("--duration-hours", econ.duration);
            replay.flag("--electricity-cost", econ.electricity_cost);
            replay.flag("--granularity", granularity);
            Ok(Model::Pow(scenario))
        }
        ModelKind::PurePos | ModelKind::TicketPos => {
            if let Some(coin) = coin {
                return Err(usage(format!(
                    "--coin {coin} selects mining data; it cannot be combined with --model {}",
                    value_name(&kind)
                )));
            }
            let p = StakeParams::new(
                args.rate.or(cfg.rate).unwrap_or(StakeParams::DEFAULT_RATE),
                args.fee.or(cfg.fee).unwrap_or(StakeParams::DEFAULT_FEE),
                args.ticket_price
                    .or(cfg.ticket_price)
                    .unwrap_or(StakeParams::DEFAULT_TICKET_PRICE),
            )?;
            replay.flag("--rate", p.annual_return_rate);
            if kind == ModelKind::PurePos {
                replay.flag("--fee", p.participation_fee);
                Ok(Model::PureStake(p))
            } else {
                replay.flag("--ticket-price", p.ticket_price);
                Ok(Model::TicketStake(p))
            }
        }
    }
}

fn resolve_grid(args: &GridArgs, cfg: &FileConfig, replay: &mut Replay) -> anyhow::Result<CapitalGrid> {
    let d = CapitalGrid::default();
    let grid = CapitalGrid::new(
        args.min_capital.or(cfg.min_capital).unwrap_or(d.min_capital),
        args.max_capital.or(cfg.max_capital).unwrap_or(d.max_capital),
        args.step.or(cfg.step).unwrap_or(d.step),
    )?;
    replay.flag("--min-capital", grid.min_capital);
    replay.flag("--max-capital", grid.max_capital);
    replay.flag("--step", grid.step);
    Ok(grid)
}

fn resolve_format(args: &OutputArgs, cfg: &FileConfig, default: Format, replay: &mut Replay) -> Format {
    let f = args.format.or(cfg.format).unwrap_or(default);
    replay.flag("--format", value_name(&f));
    f
}

struct Resolved {
    ds: Dataset,
    model: Model,
    grid: CapitalGrid,
    format: Format,
    replay: Replay,
}

fn resolve_run(subcommand: &str, args: &RunArgs) -> anyhow::Result<Resolved> {
    let cfg = load_config(args.data.config.as_deref())?;
    let ds = load_dataset(&args.data, &cfg)?;
    let mut replay = Replay::new(subcommand, &ds);
    let model = resolve_model(&args.model, &cfg, &ds, &mut replay)?;
    let grid = resolve_grid(&args.grid, &cfg, &mut replay)?;
    let format = resolve_format(&args.output, &cfg, Format::Csv, &mut replay);
    Ok(Resolved {
        ds,
        model,
        grid,
        format,
        replay,
    })
}

#[derive(Serialize)]
struct Provenance<'a> {
    command: String,
    dataset: &'a DatasetInfo,
}

impl<'a> Provenance<'a> {
    fn new(r: &'a Replay, ds: &'a Dataset) -> Self {
        Self {
            command: r.render(),
            dataset: &ds.info,
        }
    }
}

#[derive(Serialize)]
struct CurveDoc<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    #[serde(flatten)]
    curve: &'a Curve,
}

#[derive(Serialize)]
struct EgalDoc<'a> {
    #[serde(flatten)]
    score: EgalScore,
    #[serde(flatten)]
    provenance: Provenance<'a>,
    metadata: &'a CurveMetadata,
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    axis: SweepAxis,
    curves: &'a [Curve],
}

#[derive(Serialize)]
struct IpDoc<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    coin: &'a str,
    objective_usd: f64,
    knapsack_proceeds_usd: f64,
    schedule: &'a Schedule,
    knapsack: &'a Allocation,
}

fn to_json(v: &impl Serialize) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn curve(args: &RunArgs) -> anyhow::Result<()> {
    let r = resolve_run("curve", args)?;
    let curve = r.model.curve(&r.grid)?;
    let text = match r.format {
        Format::Csv => curve.to_csv(),
        Format::Json => to_json(&CurveDoc {
            provenance: Provenance::new(&r.replay, &r.ds),
            curve: &curve,
        })?,
    };
    emit(args.output.out.as_deref(), &text)
}

fn egal(args: &RunArgs) -> anyhow::Result<()> {
    let r = resolve_run("egal", args)?;
    let curve = r.model.curve(&r.grid)?;
    let score = egalitarianism(&curve)?;
    let text = match r.format {
        Format::Csv => score.to_csv(),
        Format::Json => to_json(&EgalDoc {
            score,
            provenance: Provenance::new(&r.replay, &r.ds),
            metadata: &curve.metadata,
        })?,
    };
    emit(args.output.out.as_deref(), &text)
}

fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let mut r = resolve_run("sweep", &args.run)?;
    let Model::Pow(base) = &r.model else {
        return Err(usage("sweep varies mining parameters; use --model pow with --coin"));
    };
    r.replay.flag("--axis", args.axis);
    r.replay.flag(
        "--values",
        args.values.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    if args.long_format {
        r.replay.switch("--long-format");
    }
    let out = args.run.output.out.as_deref();
    if r.format == Format::Csv && !args.long_format && out.is_none() {
        return Err(usage(
            "per-value CSV output needs --out DIR; use --long-format for a single CSV",
        ));
    }
    let curves = parameter_sweep(base, args.axis, &args.values, &r.grid)?;

    match (r.format, args.long_format) {
        (Format::Json, _) => emit(
            out,
            &to_json(&SweepDoc {
                provenance: Provenance::new(&r.replay, &r.ds),
                axis: args.axis,
                curves: &curves,
            })?,
        ),
        (Format::Csv, true) => {
            let mut text = String::from("capital_usd,roi,swept_value\n");
            for (c, v) in curves.iter().zip(&args.values) {
                for p in &c.points {
                    text.push_str(&format!("{},{},{}\n", p.capital_usd, p.roi, v));
                }
            }
            emit(out, &text)
        }
        (Format::Csv, false) => {
            let dir = out.expect("checked above");
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let coin = &base.coin.coin;
            for (c, v) in curves.iter().zip(&args.values) {
                let path = dir.join(format!("{coin}_{}_{v}.csv", args.axis));
                emit(Some(&path), &c.to_csv())?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn ip_opt(args: &IpArgs) -> anyhow::Result<()> {
    let cfg = load_config(args.data.config.as_deref())?;
    let ds = load_dataset(&args.data, &cfg)?;
    let mut replay = Replay::new("ip-opt", &ds);
    let Model::Pow(scenario) = resolve_model(&args.model, &cfg, &ds, &mut replay)? else {
        return Err(usage("ip-opt schedules mining hardware; use --model pow with --coin"));
    };
    let steps = args.steps.or(cfg.steps).unwrap_or(DEFAULT_IP_STEPS);
    let objective: IpObjective = args.ip_objective.or(cfg.ip_objective).map_or_else(Default::default, Into::into);
    let format = resolve_format(&args.output, &cfg, Format::Json, &mut replay);
    replay.flag("--capital", args.capital);
    replay.flag("--steps", steps);
    replay.flag(
        "--ip-objective",
        value_name(&match objective {
            IpObjective::AsWritten => ObjectiveArg::AsWritten,
            IpObjective::CapitalFirst => ObjectiveArg::CapitalFirst,
        }),
    );

    let machines = if args.machines.is_empty() {
        scenario.machines.clone()
    } else {
        let by_name: BTreeMap<&str, _> =
            scenario.machines.iter().map(|m| (m.name.as_str(), m)).collect();
        args.machines
            .iter()
            .map(|name| {
                by_name.get(name.as_str()).map(|m| (*m).clone()).ok_or_else(|| {
                    anyhow!("no machine named `{name}` for coin `{}`", scenario.coin.coin)
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?
    };
    for m in &machines {
        if !args.machines.is_empty() {
            replay.flag("--machine", &m.name);
        }
    }

    let schedule = ip_schedule_with(
        args.capital,
        &machines,
        &scenario.coin,
        &scenario.econ,
        steps,
        objective,
    )
    .map_err(|e| match e {
        crate::Error::InstanceTooLarge(_) => {
            anyhow!(e).context("select at most a few machine types with --machine, fewer --steps or less --capital")
        }
        e => e.into(),
    })?;
    let knapsack = knapsack_allocate(
        args.capital,
        &machines,
        &scenario.coin,
        &scenario.econ,
        scenario.granularity,
    )?;
    eprintln!(
        "ip objective {} USD, knapsack proceeds {} USD",
        schedule.objective, knapsack.proceeds
    );

    let text = match format {
        Format::Json => to_json(&IpDoc {
            provenance: Provenance::new(&replay, &ds),
            coin: &scenario.coin.coin,
            objective_usd: schedule.objective,
            knapsack_proceeds_usd: knapsack.proceeds,
            schedule: &schedule,
            knapsack: &knapsack,
        })?,
        Format::Csv => schedule_csv(&schedule),
    };
    emit(args.output.out.as_deref(), &text)
}

/// Holdings per step: `step,end_hour,<machine>...`.
fn schedule_csv(s: &Schedule) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "end_hour".to_string()];
    header.extend(s.names.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for t in 0..=s.steps {
        let mut row = vec![t.to_string(), (t as f64 * s.step_hours).to_string()];
        row.extend(s.holdings.iter().map(|h| h[t].to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}
