use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::estimators::{Link, Transform};
use crate::simulate::{ModelKind, PostBounds};

#[derive(Debug, Parser)]
#[command(
    name = "skeptic-update",
    version,
    about = "Belief-updating estimators for survey data: generalized Tobit, hurdle, simulation and Monte-Carlo recovery"
)]
pub struct Cli {
    /// Print stage timings to stderr.
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    /// Formatted regression table.
    #[default]
    Text,
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Survey CSV with columns prior,change,post,gender,age,police,educ_int,matching_gender.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Fail on the first file with invariant violations instead of skipping bad rows.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean, standard deviation, range and missing count per variable.
    Describe {
        #[command(flatten)]
        input: InputArgs,
        /// Keep rows where a variable equals a value, e.g. change=1.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Fit one of the estimators.
    Fit {
        #[command(subcommand)]
        model: FitCommand,
    },
    /// Average marginal effects of the change decision.
    Margins {
        #[command(flatten)]
        input: InputArgs,
        /// Regressors besides Prior and the intercept.
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int")]
        covariates: Vec<String>,
        #[arg(long, value_parser = parse_link, default_value = "probit")]
        link: Link,
    },
    /// Classify Change with a fitted binary model and score the predictions.
    Predict {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int")]
        covariates: Vec<String>,
        #[arg(long, value_parser = parse_link, default_value = "probit")]
        link: Link,
        /// Predict Change = 1 when the fitted probability is at least this.
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Draw a synthetic survey.
    Simulate {
        #[command(flatten)]
        dgp: DgpArgs,
        #[arg(long, default_value_t = 2885)]
        n: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Blank values after drawing, e.g. age=56 (age or police).
        #[arg(long = "missing", value_name = "VAR=COUNT")]
        missing: Vec<String>,
    },
    /// Monte-Carlo recovery of the planted parameters.
    Mc {
        #[command(flatten)]
        dgp: DgpArgs,
        #[arg(long, default_value_t = 2828)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct DgpArgs {
    #[arg(long, value_parser = parse_model, default_value = "tobit")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override a planted parameter, e.g. gamma=0.6, delta.age=1, level.sigma=2.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Post range: `instrument` clamps updaters to [0.1, Prior), `latent`
    /// keeps the raw model draw. Defaults to instrument for simulate and
    /// latent for mc.
    #[arg(long, value_parser = parse_bounds)]
    pub bounds: Option<PostBounds>,
    /// Link of the simulated change decision (hurdle model).
    #[arg(long, value_parser = parse_link)]
    pub link: Option<Link>,
    /// G(Post) of the simulated level equation (hurdle model).
    #[arg(long, value_parser = parse_transform)]
    pub transform: Option<Transform>,
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Generalized Tobit of Prior − Post censored at zero.
    Tobit {
        #[command(flatten)]
        input: InputArgs,
        /// Regressors besides Prior and the intercept.
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int")]
        covariates: Vec<String>,
    },
    /// Change decision plus level regression among updaters.
    Hurdle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int")]
        change_covariates: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int,police")]
        level_covariates: Vec<String>,
        #[arg(long, value_parser = parse_link, default_value = "probit")]
        link: Link,
        #[arg(long, value_parser = parse_transform, default_value = "identity")]
        transform: Transform,
    },
    /// Probit or logit of Change.
    Binary {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_value = "age,gender,matching_gender,educ_int")]
        covariates: Vec<String>,
        #[arg(long, value_parser = parse_link, default_value = "probit")]
        link: Link,
    },
}

fn parse_link(s: &str) -> Result<Link, String> {
    s.parse()
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    s.parse()
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_bounds(s: &str) -> Result<PostBounds, String> {
    s.parse()
}
