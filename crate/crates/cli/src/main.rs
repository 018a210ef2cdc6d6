use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cocycle_lab::cocycles::{self, Cocycle, CocycleJson};
use cocycle_lab::growth::{self, DisplacementScaling, GrowthProfile, SlowEntropyEstimate};
use cocycle_lab::repr::{self, RepSource};
use cocycle_lab::suites::{self, Suite, SuiteConfig};
use cocycle_lab::{spec, Error, GroupModel, Measure, DEFAULT_BUDGET};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_TRUNCATED: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "cocycle-lab", version, about = "Random-walk entropy, harmonic cocycles and Cesaro decay on finitely generated groups")]
struct Cli {
    /// Element budget for balls and convolution supports; overrides COCYCLE_LAB_BUDGET.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, increments, return probabilities and displacement of mu^{*n}.
    Growth(GrowthArgs),
    /// Run a seeded randomized suite of inequality and identity checks.
    Check(CheckArgs),
    /// Project a cocycle onto the harmonic cocycles.
    Harmonic(HarmonicArgs),
    /// Ball sizes and the growth exponent estimate.
    Ball(BallArgs),
    /// Dimension of the harmonic cocycles for a representation.
    Dimension(DimensionArgs),
    /// Near-harmonic cocycles on cyclic groups acting on the complement of the constants.
    Appendix(AppendixArgs),
}

#[derive(Args)]
struct Common {
    /// Group: zd:<d>, heisenberg, free:<k>, lamplighter or cyclic:<N>.
    #[arg(long, default_value = "zd:1")]
    group: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    common: Common,
    /// lazy[:alpha] or uniform-with-hold.
    #[arg(long, default_value = "lazy:0.5")]
    measure: String,
    /// Largest convolution power.
    #[arg(long = "N", visible_alias = "n-max")]
    n_max: usize,
    #[arg(long, value_enum, default_value = "root-n")]
    scaling: ScalingArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the JSON summary here as well.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    RootN,
    InverseRootN,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// eq1, eq2, concavity, energy, lemma, theorem, appendix or return.
    #[arg(long)]
    suite: String,
    #[arg(long)]
    measure: Option<String>,
    /// Representation spec (trivial[:d], char:..., diag:..., regular) or a JSON file.
    #[arg(long)]
    rep: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on the convolution power used by walk-based suites.
    #[arg(long)]
    n_max: Option<usize>,
    /// Cyclic orders for the appendix suite.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
    orders: Vec<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct HarmonicArgs {
    #[command(flatten)]
    common: Common,
    /// JSON cocycle file: {"rep": ..., "values": {"<generator>": [[re, im], ...]}}.
    #[arg(long)]
    cocycle: PathBuf,
    #[arg(long, default_value = "lazy:0.5")]
    measure: String,
}

#[derive(Args)]
struct BallArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    radius: usize,
}

#[derive(Args)]
struct DimensionArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "trivial")]
    rep: String,
    #[arg(long, default_value = "lazy:0.5")]
    measure: String,
}

#[derive(Args)]
struct AppendixArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
    orders: Vec<u64>,
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_TRUNCATED,
            Error::Consistency { .. } | Error::NonConvergence { .. } | Error::EmptyBand { .. } => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(field: &str, detail: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("parse error in {field}: {detail}"),
    }
}

/// Usage failure for `field`, keeping the message of errors that already name a field.
fn field_error(field: &str, e: Error) -> Failure {
    match e {
        Error::Parse { .. } => Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        },
        e => usage(field, e),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let budget = resolve_budget(cli.budget)?;
    match cli.command {
        Command::Growth(a) => cmd_growth(a, budget),
        Command::Check(a) => cmd_check(a, budget),
        Command::Harmonic(a) => cmd_harmonic(a),
        Command::Ball(a) => cmd_ball(a, budget),
        Command::Dimension(a) => cmd_dimension(a),
        Command::Appendix(a) => cmd_appendix(a),
    }
}

fn resolve_budget(flag: Option<usize>) -> Result<usize, Failure> {
    let budget = match flag {
        Some(b) => b,
        None => match std::env::var("COCYCLE_LAB_BUDGET") {
            Ok(s) => s.trim().parse().map_err(|_| usage("COCYCLE_LAB_BUDGET", format!("not a count: {s:?}")))?,
            Err(_) => DEFAULT_BUDGET,
        },
    };
    if budget == 0 {
        return Err(usage("budget", "must be positive"));
    }
    Ok(budget)
}

fn parse_group(s: &str) -> Result<GroupModel, Failure> {
    s.parse().map_err(|e| field_error("group", e))
}

fn parse_measure(model: &GroupModel, s: &str) -> Result<Measure, Failure> {
    spec::parse_measure(model, s).map_err(|e| field_error("measure", e))
}

/// A spec string, or a JSON file holding either a spec string or explicit matrices.
fn parse_rep_source(s: &str) -> Result<RepSource, Failure> {
    let path = Path::new(s);
    if s.ends_with(".json") || path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| usage("rep", format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| usage("rep", e));
    }
    Ok(RepSource::Named(s.to_string()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    let result = match output {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("cannot write output: {e}"),
    })
}

fn csv_text<F>(header: &[&str], write_rows: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    write_rows(&mut w).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

/// JSON summary of a growth run: the profile without its per-n rows.
#[derive(Serialize, Deserialize)]
pub struct GrowthSummary {
    pub group: String,
    pub measure: String,
    pub n_max: usize,
    pub n_computed: usize,
    pub scaling: DisplacementScaling,
    pub ball_sizes: Vec<usize>,
    pub weak_poly_exponent: Option<f64>,
    pub slow_entropy: Option<SlowEntropyEstimate>,
    pub tail_increment: Option<f64>,
    pub entropy_nondecreasing: bool,
    pub support_bound_holds: bool,
    pub truncated: bool,
}

/// Full growth output in JSON format.
#[derive(Serialize, Deserialize)]
pub struct GrowthOutput {
    pub measure: String,
    pub profile: GrowthProfile,
}

fn cmd_growth(a: GrowthArgs, budget: usize) -> Outcome {
    let model = parse_group(&a.common.group)?;
    let mu = parse_measure(&model, &a.measure)?;
    if a.n_max == 0 {
        return Err(usage("N", "the range 1..=N is empty"));
    }
    let scaling = match a.scaling {
        ScalingArg::RootN => DisplacementScaling::RootN,
        ScalingArg::InverseRootN => DisplacementScaling::InverseRootN,
    };
    let profile = growth::growth_profile(&mu, a.n_max, scaling, budget)?;
    let summary = GrowthSummary {
        group: profile.group.clone(),
        measure: a.measure.clone(),
        n_max: profile.n_max,
        n_computed: profile.rows.len(),
        scaling,
        ball_sizes: profile.ball_sizes.clone(),
        weak_poly_exponent: profile.weak_poly_exponent,
        slow_entropy: profile.slow_entropy.clone(),
        tail_increment: profile.rows.last().map(|r| r.increment),
        entropy_nondecreasing: profile.entropy_nondecreasing,
        support_bound_holds: profile.support_bound_holds,
        truncated: profile.truncated,
    };
    let text = match a.format {
        Format::Csv => csv_text(&["n", "H", "a_n", "return_prob", "ek_displacement"], |w| {
            for r in &profile.rows {
                w.write_record([
                    r.n.to_string(),
                    r.entropy.to_string(),
                    r.increment.to_string(),
                    r.return_prob.to_string(),
                    r.ek_displacement.to_string(),
                ])?;
            }
            Ok(())
        }),
        Format::Json => json(&GrowthOutput {
            measure: a.measure.clone(),
            profile: profile.clone(),
        }),
    };
    emit(a.common.output.as_deref(), &text)?;
    if let Some(p) = &a.summary {
        emit(Some(p), &json(&summary))?;
    }
    if profile.truncated {
        eprintln!("warning: budget {budget} reached; results cover n <= {}", profile.rows.len());
        return Ok(EXIT_TRUNCATED);
    }
    Ok(EXIT_OK)
}

fn cmd_check(a: CheckArgs, budget: usize) -> Outcome {
    let suite: Suite = a.suite.parse().map_err(|e| field_error("suite", e))?;
    let model = parse_group(&a.common.group)?;
    if a.trials == 0 {
        return Err(usage("trials", "must be positive"));
    }
    let mut config = SuiteConfig::new(suite, model.clone());
    config.measure = a.measure.as_deref().map(|m| parse_measure(&model, m)).transpose()?;
    config.rep = a.rep.as_deref().map(parse_rep_source).transpose()?;
    if let Some(src) = &config.rep {
        src.resolve(&model).map_err(|e| field_error("rep", e))?;
    }
    config.trials = a.trials;
    config.seed = a.seed;
    config.budget = budget;
    config.orders = a.orders;
    config.n_max = a.n_max;
    let report = suites::run_suite(&config)?;
    let text = match a.format {
        Format::Json => json(&report),
        Format::Csv => csv_text(&["trial", "label", "margin", "holds"], |w| {
            for r in &report.instances {
                w.write_record([r.trial.to_string(), r.label.clone(), r.margin.to_string(), r.holds.to_string()])?;
            }
            Ok(())
        }),
    };
    emit(a.common.output.as_deref(), &text)?;
    Ok(if report.all_pass { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_harmonic(a: HarmonicArgs) -> Outcome {
    let model = parse_group(&a.common.group)?;
    let mu = parse_measure(&model, &a.measure)?;
    let text = fs::read_to_string(&a.cocycle).map_err(|e| usage("cocycle", format!("{}: {e}", a.cocycle.display())))?;
    let cj: CocycleJson = serde_json::from_str(&text).map_err(|e| usage("cocycle", e))?;
    let b = Cocycle::from_json(&model, &cj).map_err(|e| match e {
        Error::RelatorViolation { .. } => Failure {
            code: EXIT_USAGE,
            message: format!("cocycle is inconsistent: {e}"),
        },
        e => usage("cocycle", e),
    })?;
    let projection = cocycles::harmonic_projection(&b, &mu)?;
    emit(a.common.output.as_deref(), &json(&projection.report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize, Deserialize)]
pub struct BallReport {
    pub group: String,
    pub radius: usize,
    pub sizes: Vec<usize>,
    pub weak_poly_exponent: Option<f64>,
    pub truncated: bool,
}

fn cmd_ball(a: BallArgs, budget: usize) -> Outcome {
    let model = parse_group(&a.common.group)?;
    let (sizes, truncated) = match model.ball_sizes(a.radius, budget) {
        Ok(s) => (s, false),
        Err(Error::BudgetExceeded { reached, .. }) => (model.ball_sizes(reached, budget)?, true),
        Err(e) => return Err(e.into()),
    };
    let report = BallReport {
        group: model.to_string(),
        radius: a.radius,
        weak_poly_exponent: growth::weak_poly_exponent(&sizes).ok(),
        sizes,
        truncated,
    };
    emit(a.common.output.as_deref(), &json(&report))?;
    Ok(if truncated { EXIT_TRUNCATED } else { EXIT_OK })
}

#[derive(Serialize, Deserialize)]
pub struct DimensionReport {
    pub group: String,
    pub rep: RepSource,
    pub rep_dim: usize,
    pub measure: String,
    pub invariant_vectors: usize,
    pub harmonic_dimension: usize,
}

fn cmd_dimension(a: DimensionArgs) -> Outcome {
    let model = parse_group(&a.common.group)?;
    let mu = parse_measure(&model, &a.measure)?;
    let source = parse_rep_source(&a.rep)?;
    let rep = source.resolve(&model).map_err(|e| field_error("rep", e))?;
    let report = DimensionReport {
        group: model.to_string(),
        rep_dim: rep.dim(),
        invariant_vectors: repr::invariant_vectors_dim(&rep, &mu)?,
        harmonic_dimension: cocycles::harmonic_space_dimension(&model, &rep, &mu)?,
        rep: source,
        measure: a.measure,
    };
    emit(a.common.output.as_deref(), &json(&report))?;
    Ok(EXIT_OK)
}

fn cmd_appendix(a: AppendixArgs) -> Outcome {
    if a.orders.is_empty() {
        return Err(usage("orders", "empty list"));
    }
    let family = cocycles::appendix_family(&a.orders)?;
    emit(a.output.as_deref(), &json(&family))?;
    Ok(if family.holds { EXIT_OK } else { EXIT_FAILED })
}
