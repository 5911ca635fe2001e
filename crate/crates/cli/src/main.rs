//! `cdsbound`: no-arbitrage bounds, superhedges, densities and studies for
//! illiquid single-name CDS portfolios.
//!
//! Exit status: 0 on success, 1 on a configuration or usage error, 2 on a
//! numerical failure.

mod output;
mod portfolio;

use std::path::PathBuf;
use std::process::ExitCode;

use cdsbound::distribution::{constant_recovery_spectrum, payoff_density, pnl_density};
use cdsbound::hedge::{optimize_hedge, HedgeOutcome, HedgeProblem};
use cdsbound::market::RecoveryLaw;
use cdsbound::study::{bounds_sweep, comparative_study, StudyResult};
use cdsbound::valuation::{expected_payoff, ValuationResult};
use cdsbound::vanilla::{vanilla_ask_bound, vanilla_bid_bound};
use cdsbound::{Config, Error, LiquidMarket, Path, PayoffModel, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Field, Format, Header, Table};

#[derive(Debug, Parser)]
#[command(
    name = "cdsbound",
    version,
    about = "No-arbitrage bounds and risk figures for illiquid CDS portfolios"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; omitted fields take the reference parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `study.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    A,
    B,
    C,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::A => Variant::A,
            VariantArg::B => Variant::B,
            VariantArg::C => Variant::C,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StudyVariantArg {
    A,
    B,
    C,
    /// All three on the same portfolios.
    All,
}

#[derive(Debug, Args)]
struct MarketArgs {
    /// Restrict the configured quotes to a market variant.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Debug, Args)]
struct PositionArgs {
    /// `paper-example`, `single:<m>:<notional>` or a file of notionals.
    #[arg(long, default_value = "paper-example")]
    portfolio: String,
    /// Hedge with the liquid market (default).
    #[arg(long, conflicts_with = "unhedged")]
    hedged: bool,
    /// Hedge with cash only.
    #[arg(long)]
    unhedged: bool,
    #[command(flatten)]
    market: MarketArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal and vanilla bounds for every maturity.
    Bounds(MarketArgs),
    /// Vanilla (single-instrument) bounds with their bracketing maturities.
    Vanilla(MarketArgs),
    /// Optimal superhedge of one portfolio.
    Hedge(PositionArgs),
    /// Fair price and capital at risk of a hedged portfolio.
    Value(PositionArgs),
    /// Histogram of the hedged position's present value.
    Density {
        #[command(flatten)]
        position: PositionArgs,
        /// Report the profit and loss instead of the present value.
        #[arg(long)]
        pnl: bool,
    },
    /// Discrete law of the hedged position under constant recovery.
    Spectrum {
        #[command(flatten)]
        position: PositionArgs,
        /// Constant recovery rate, overriding the configured law.
        #[arg(long)]
        recovery: Option<f64>,
    },
    /// Random-portfolio study of hedged over unhedged capital at risk.
    Study {
        #[arg(long, value_enum)]
        variant: Option<StudyVariantArg>,
        /// Overrides `study.trials`.
        #[arg(long)]
        trials: Option<u64>,
        /// Also write one line per trial to this file.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Context {
    config: Config,
    common: Common,
}

impl Context {
    fn header(&self, command: &'static str) -> Header {
        Header {
            command,
            config_hash: output::config_hash(&self.config.to_toml_string()),
            seed: self.config.study.seed,
        }
    }

    fn write(&self, command: &'static str, table: &Table) -> CliResult<()> {
        let text = output::render(table, &self.header(command), self.common.format);
        output::emit(&text, self.common.out.as_deref())?;
        Ok(())
    }

    fn market(&self, args: &MarketArgs) -> CliResult<LiquidMarket> {
        let full = self.config.market()?;
        Ok(match args.variant {
            Some(v) => Variant::from(v).market(&full),
            None => full,
        })
    }

    fn problem(&self, args: &PositionArgs) -> CliResult<HedgeProblem> {
        let grid = self.config.grid()?;
        let old = portfolio::parse(&args.portfolio, grid.n_quarters())?;
        let market = self.market(&args.market)?;
        let market = if args.unhedged {
            market.without_quotes()
        } else {
            market
        };
        Ok(HedgeProblem::new(old, market, grid, self.config.curve()?)
            .with_discretization(self.config.discretization()))
    }
}

fn unbounded_table(ray: &[f64], problem: &HedgeProblem) -> Table {
    eprintln!(
        "diagnostic: the hedge cost is unbounded below; the quoted upfronts admit an arbitrage"
    );
    let mut table = Table::new(&["field", "value"]);
    table.push(vec!["status".into(), "unbounded".into()]);
    table.push(vec!["ray_cash".into(), ray[0].into()]);
    for (&m, &x) in problem
        .market
        .indices()
        .collect::<Vec<_>>()
        .iter()
        .zip(&ray[1..])
    {
        table.push(vec![format!("ray_alpha_{m}").into(), x.into()]);
    }
    table
}

fn path_text(path: Path) -> String {
    match path {
        Path::Default { quarter, tau, rho } => {
            format!("default quarter={quarter} tau={tau} rho={rho}")
        }
        Path::Survival => "survival".into(),
    }
}

fn bounds(ctx: &Context, args: &MarketArgs) -> CliResult<()> {
    let market = ctx.market(args)?;
    let rows = bounds_sweep(
        &market,
        &ctx.config.grid()?,
        &ctx.config.curve()?,
        ctx.config.discretization(),
    )?;
    let mut table = Table::new(&[
        "m",
        "opt_ask",
        "opt_bid",
        "van_ask",
        "van_bid",
        "interpolated",
    ]);
    for r in rows {
        table.push(vec![
            r.m.into(),
            r.opt_ask.into(),
            r.opt_bid.into(),
            r.van_ask.into(),
            r.van_bid.into(),
            r.interpolated.into(),
        ]);
    }
    ctx.write("bounds", &table)
}

fn vanilla(ctx: &Context, args: &MarketArgs) -> CliResult<()> {
    let market = ctx.market(args)?;
    let (grid, curve) = (ctx.config.grid()?, ctx.config.curve()?);
    let mut table = Table::new(&["m", "van_ask", "ask_bracket", "van_bid", "bid_bracket"]);
    for m in 1..=grid.n_quarters() {
        let ask = match vanilla_ask_bound(&market, &grid, &curve, m) {
            Ok(b) => Some(b),
            Err(Error::NotComputable(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let bid = vanilla_bid_bound(&market, &grid, &curve, m)?;
        table.push(vec![
            m.into(),
            ask.map(|b| b.bound).into(),
            ask.and_then(|b| b.bracketing_liquid).into(),
            bid.bound.into(),
            bid.bracketing_liquid.into(),
        ]);
    }
    ctx.write("vanilla", &table)
}

fn hedge(ctx: &Context, args: &PositionArgs) -> CliResult<()> {
    let problem = ctx.problem(args)?;
    let table = match optimize_hedge(&problem)? {
        HedgeOutcome::Unbounded { ray } => unbounded_table(&ray, &problem),
        HedgeOutcome::Optimal(s) => {
            let model = problem.payoff_model();
            let mut table = Table::new(&["field", "value"]);
            table.push(vec!["status".into(), "optimal".into()]);
            table.push(vec!["cost".into(), s.cost.into()]);
            table.push(vec!["cash".into(), s.cash.into()]);
            for &(m, x) in &s.hedge_notionals {
                table.push(vec![format!("alpha_{m}").into(), x.into()]);
            }
            table.push(vec![
                "path_minimum".into(),
                model.path_minimum(&s.position)?.0.into(),
            ]);
            table.push(vec![
                "survival_value".into(),
                model.survival_value(&s.position).into(),
            ]);
            table.push(vec!["max_violation".into(), s.max_violation.into()]);
            table.push(vec!["refinement_rounds".into(), s.refinement_rounds.into()]);
            for path in &s.binding_paths {
                table.push(vec!["binding_path".into(), path_text(*path).into()]);
            }
            table
        }
    };
    ctx.write("hedge", &table)
}

fn value(ctx: &Context, args: &PositionArgs) -> CliResult<()> {
    let problem = ctx.problem(args)?;
    let table = match optimize_hedge(&problem)? {
        HedgeOutcome::Unbounded { ray } => unbounded_table(&ray, &problem),
        HedgeOutcome::Optimal(s) => {
            let model = problem.payoff_model();
            let mean = expected_payoff(
                &model,
                &s.position,
                &ctx.config.measure()?,
                &ctx.config.quadrature(),
            )?;
            let v = ValuationResult::new(-s.cost, ctx.config.lambda()?, mean);
            if v.fair_price.arbitrage {
                eprintln!("diagnostic: lambda <= 0 lies in the arbitrage region");
            }
            let mut table = Table::new(&["field", "value"]);
            table.push(vec!["status".into(), "optimal".into()]);
            table.push(vec!["hedge_cost".into(), s.cost.into()]);
            table.push(vec!["glb".into(), v.glb.into()]);
            table.push(vec!["lambda".into(), v.lambda.into()]);
            table.push(vec!["expected_payoff".into(), v.expected_payoff.into()]);
            table.push(vec!["fair_price".into(), v.fair_price.value.into()]);
            table.push(vec!["arbitrage".into(), v.fair_price.arbitrage.into()]);
            table.push(vec!["max_loss".into(), v.max_loss.into()]);
            table.push(vec!["expected_return".into(), v.expected_return.into()]);
            table.push(vec![
                "survival_value".into(),
                model.survival_value(&s.position).into(),
            ]);
            table
        }
    };
    ctx.write("value", &table)
}

fn density(ctx: &Context, args: &PositionArgs, pnl: bool) -> CliResult<()> {
    let problem = ctx.problem(args)?;
    let solution = optimize_hedge(&problem)?.into_solution()?;
    let model = problem.payoff_model();
    let measure = ctx.config.measure()?;
    let mut density = payoff_density(&model, &solution.position, &measure, &ctx.config.binning())?;
    if pnl {
        let mean = expected_payoff(
            &model,
            &solution.position,
            &measure,
            &ctx.config.quadrature(),
        )?;
        density = pnl_density(&density, ctx.config.lambda()?, mean);
    }
    let mut table = Table::new(&["kind", "lower", "upper", "value", "mass"]);
    for i in 0..density.n_bins() {
        table.push(vec![
            "bin".into(),
            density.bin_edges[i].into(),
            density.bin_edges[i + 1].into(),
            density.bin_means[i].into(),
            density.bin_masses[i].into(),
        ]);
    }
    for atom in &density.atoms {
        table.push(vec![
            "atom".into(),
            atom.value.into(),
            atom.value.into(),
            atom.value.into(),
            atom.mass.into(),
        ]);
    }
    ctx.write("density", &table)
}

fn spectrum(ctx: &Context, args: &PositionArgs, recovery: Option<f64>) -> CliResult<()> {
    let problem = ctx.problem(args)?;
    let solution = optimize_hedge(&problem)?.into_solution()?;
    let mut measure = ctx.config.measure()?;
    if let Some(rho) = recovery {
        measure = measure.with_recovery(RecoveryLaw::Constant(rho))?;
    }
    let model = PayoffModel::new(problem.grid.clone(), problem.curve, problem.market.spread());
    let spectrum = constant_recovery_spectrum(&model, &solution.position, &measure)?;
    let mut table = Table::new(&["kind", "quarter", "value", "probability"]);
    for line in &spectrum.lines {
        table.push(vec![
            "line".into(),
            line.quarter.into(),
            line.value.into(),
            line.probability.into(),
        ]);
    }
    table.push(vec![
        "atom".into(),
        Field::Empty,
        spectrum.survival.value.into(),
        spectrum.survival.mass.into(),
    ]);
    ctx.write("spectrum", &table)
}

fn summary(result: &StudyResult) {
    let cdf = &result.cdf;
    eprintln!(
        "variant {}: {} trials, mean ratio {:.4} ({:.2}%), median {:.4}, max {:.4}, CDF(0.235) {:.3}, CDF(0.725) {:.3}",
        result.variant.label(),
        cdf.len(),
        cdf.mean(),
        100.0 * cdf.mean(),
        cdf.median(),
        cdf.max(),
        cdf.cdf(0.235),
        cdf.cdf(0.725)
    );
}

fn study(
    ctx: &Context,
    variant: Option<StudyVariantArg>,
    records: Option<&std::path::Path>,
) -> CliResult<()> {
    let config = ctx.config.study_config()?;
    let variants: Vec<Variant> = match variant {
        Some(StudyVariantArg::A) => vec![Variant::A],
        Some(StudyVariantArg::B) => vec![Variant::B],
        Some(StudyVariantArg::C) => vec![Variant::C],
        Some(StudyVariantArg::All) => Variant::ALL.to_vec(),
        None => vec![config.variant],
    };
    let results = comparative_study(&config, &variants)?;

    let mut cdf_table = Table::new(&["variant", "rank", "ratio", "cdf"]);
    for result in &results {
        let n = result.cdf.len();
        for (i, &ratio) in result.cdf.sorted().iter().enumerate() {
            cdf_table.push(vec![
                result.variant.label().into(),
                (i + 1).into(),
                ratio.into(),
                ((i + 1) as f64 / n as f64).into(),
            ]);
        }
        summary(result);
    }
    ctx.write("study", &cdf_table)?;

    if let Some(path) = records {
        let n = config.grid.n_quarters();
        let mut columns = vec!["variant", "trial", "lmax_hedged", "lmax_unhedged", "ratio"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        columns.extend((1..=n).map(|m| format!("alpha_{m}")));
        let mut table = Table {
            columns,
            rows: Vec::new(),
        };
        for result in &results {
            for r in &result.records {
                let mut row: Vec<Field> = vec![
                    result.variant.label().into(),
                    r.trial_index.into(),
                    r.lmax_hedged.into(),
                    r.lmax_unhedged.into(),
                    r.ratio.into(),
                ];
                row.extend(r.portfolio.iter().map(|&a| Field::from(a)));
                table.push(row);
            }
        }
        let text = output::render(&table, &ctx.header("study-records"), ctx.common.format);
        output::emit(&text, Some(path))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.common.seed {
        config.study.seed = seed;
    }
    if let Command::Study {
        variant, trials, ..
    } = &cli.command
    {
        if let Some(t) = trials {
            config.study.trials = *t;
        }
        match variant {
            Some(StudyVariantArg::A) => config.study.variant = Variant::A,
            Some(StudyVariantArg::B) => config.study.variant = Variant::B,
            Some(StudyVariantArg::C) => config.study.variant = Variant::C,
            Some(StudyVariantArg::All) | None => {}
        }
        config.validate()?;
    }
    let ctx = Context {
        config,
        common: cli.common,
    };
    match &cli.command {
        Command::Bounds(args) => bounds(&ctx, args),
        Command::Vanilla(args) => vanilla(&ctx, args),
        Command::Hedge(args) => hedge(&ctx, args),
        Command::Value(args) => value(&ctx, args),
        Command::Density { position, pnl } => density(&ctx, position, *pnl),
        Command::Spectrum { position, recovery } => spectrum(&ctx, position, *recovery),
        Command::Study {
            variant, records, ..
        } => study(&ctx, *variant, records.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_configuration() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
