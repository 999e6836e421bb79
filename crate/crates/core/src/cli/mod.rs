//! Command-line front end. `run` parses argv, executes one subcommand and
//! returns the process exit code: 0 on success, 1 on usage errors, 2 on
//! data or estimation errors.

mod args;
mod render;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::Instant;

use clap::{CommandFactory, Parser};
use serde_json::json;
use thiserror::Error;

pub use args::{Cli, Command, DgpArgs, FitCommand, Format, InputArgs};
use render::{num, paren, starred, Records, TextTable, STAR_NOTE};

use crate::dataio::{describe, load_survey, write_survey, DataError, Dataset, Filter, LoadOptions, Variable};
use crate::estimators::{
    classify_skepticism, fit_binary, fit_hurdle, fit_tobit_generalized, marginal_effects, predict_change,
    significance_stars, BinaryFit, Coefficient, DesignMatrix, EstimationError, Link, Transform, Verdict,
};
use crate::simulate::{
    mc_recover, plant_missing, threads_from_env, DgpConfig, ModelKind, PostBounds, ResolvedDgp, SimulateError, Truth,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Data(e) => e.name(),
            CliError::Estimation(e) => e.name(),
            CliError::Simulate(e) => e.name(),
            CliError::Io(_) => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let mut ctx = Context {
        timings: cli.timings,
        err,
    };
    match execute(cli.command, out, &mut ctx) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    let usage = Cli::command().render_usage();
                    let _ = writeln!(ctx.err, "error: {msg}\n\n{usage}");
                }
                other => {
                    let _ = writeln!(ctx.err, "error: {}: {other}", other.name());
                }
            }
            e.exit_code()
        }
    }
}

struct Context<'a> {
    timings: bool,
    err: &'a mut dyn Write,
}

impl Context<'_> {
    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        if self.timings {
            let _ = writeln!(self.err, "timing {label}: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
        }
        value
    }

    fn load(&mut self, input: &InputArgs) -> Result<Dataset, CliError> {
        let options = LoadOptions { strict: input.strict };
        let loaded = self.time("load", || load_survey(&input.input, options))?;
        for w in &loaded.warnings {
            let _ = writeln!(self.err, "warning: {w}");
        }
        for v in loaded.violations() {
            let _ = writeln!(self.err, "warning: line {} skipped: {}", v.line, v.messages.join("; "));
        }
        Ok(loaded.dataset)
    }
}

fn execute(command: Command, out: &mut dyn Write, ctx: &mut Context<'_>) -> Result<(), CliError> {
    match command {
        Command::Describe { input, filter } => run_describe(&input, filter.as_deref(), out, ctx),
        Command::Fit { model } => match model {
            FitCommand::Tobit { input, covariates } => run_tobit(&input, &covariates, out, ctx),
            FitCommand::Hurdle {
                input,
                change_covariates,
                level_covariates,
                link,
                transform,
            } => run_hurdle(&input, &change_covariates, &level_covariates, link, transform, out, ctx),
            FitCommand::Binary {
                input,
                covariates,
                link,
            } => run_binary(&input, &covariates, link, out, ctx),
        },
        Command::Margins {
            input,
            covariates,
            link,
        } => run_margins(&input, &covariates, link, out, ctx),
        Command::Predict {
            input,
            covariates,
            link,
            threshold,
        } => run_predict(&input, &covariates, link, threshold, out, ctx),
        Command::Simulate { dgp, n, out: path, missing } => run_simulate(&dgp, n, path, &missing, out, ctx),
        Command::Mc { dgp, n, reps, format } => run_mc(&dgp, n, reps, format, out, ctx),
    }
}

/// Covariate names from the command line, Prior removed, deduplicated.
fn parse_covariates(names: &[String]) -> Result<Vec<Variable>, CliError> {
    let mut out = Vec::new();
    for name in names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let v = Variable::from_name(name).ok_or_else(|| CliError::Usage(format!("unknown covariate `{name}`")))?;
        if matches!(v, Variable::Change | Variable::Post) {
            return Err(CliError::Usage(format!("{} cannot be a covariate", v.label())));
        }
        if v != Variable::Prior && !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Prior followed by the listed covariates.
fn with_prior(names: &[String]) -> Result<Vec<Variable>, CliError> {
    let mut vars = vec![Variable::Prior];
    vars.extend(parse_covariates(names)?);
    Ok(vars)
}

fn run_describe(input: &InputArgs, filter: Option<&str>, out: &mut dyn Write, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let filter = filter
        .map(|f| f.parse::<Filter>())
        .transpose()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let data = ctx.load(input)?;
    let table = ctx.time("describe", || describe(&data, filter))?;
    if input.format != Format::Text {
        let mut rec = Records::new();
        for r in &table.rows {
            rec.push(
                "describe",
                json!({
                    "variable": r.variable.label(),
                    "n": table.n,
                    "mean": r.mean,
                    "sd": r.sd,
                    "min": r.min,
                    "max": r.max,
                    "missing": r.missing,
                }),
            );
        }
        rec.write(input.format, out)?;
        return Ok(());
    }
    let title = match &table.filter {
        Some(f) => format!("Descriptive statistics, {} = {} (n = {})", f.variable.label(), f.value, table.n),
        None => format!("Descriptive statistics (n = {})", table.n),
    };
    writeln!(out, "{title}")?;
    let fmt2 = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.2}"));
    let mut t = TextTable::new();
    t.rule().row(["Variable", "Mean", "Std.dev", "Min", "Max", "Missing"]).rule();
    for r in &table.rows {
        let range = |x: Option<f64>| match x {
            Some(v) if r.variable.is_discrete() => format!("{v:.0}"),
            other => fmt2(other),
        };
        t.row([
            r.variable.label().to_string(),
            fmt2(r.mean),
            fmt2(r.sd),
            range(r.min),
            range(r.max),
            r.missing.to_string(),
        ]);
    }
    t.rule();
    t.write(out)?;
    let excluded = data.len() - data.n_valid();
    if excluded > 0 {
        writeln!(out, "Rows excluded by validation: {excluded}")?;
    }
    Ok(())
}

fn run_tobit(input: &InputArgs, covariates: &[String], out: &mut dyn Write, ctx: &mut Context<'_>) -> Result<(), CliError> {
    let vars = parse_covariates(covariates)?;
    let data = ctx.load(input)?;
    let mut needed = vec![Variable::Prior];
    needed.extend(&vars);
    let rows: Vec<_> = data.complete_cases(&needed).collect();
    let dropped = data.listwise_dropped(&needed);
    let x = DesignMatrix::from_records(&rows, &vars)?;
    let prior: Vec<f64> = rows.iter().map(|r| r.prior).collect();
    let post: Vec<f64> = rows.iter().map(|r| r.post).collect();
    let fit = ctx.time("fit tobit", || fit_tobit_generalized(&prior, &post, &x))?;
    let report = classify_skepticism(&fit);
    let reported = fit.reported();
    let structural = fit.structural();

    if input.format != Format::Text {
        let mut rec = Records::new();
        rec.coefficients("reported", &reported);
        rec.coefficients("structural", &structural);
        rec.push(
            "fit",
            json!({
                "n": fit.n,
                "censored": fit.n_censored,
                "dropped": dropped,
                "log_likelihood": fit.log_likelihood,
                "sigma": fit.sigma,
                "sigma_se": fit.sigma_se,
                "wald": fit.wald.statistic,
                "wald_df": fit.wald.df,
                "wald_p_value": fit.wald.p_value,
                "verdict": format!("{:?}", report.verdict),
            }),
        );
        rec.write(input.format, out)?;
        return Ok(());
    }

    writeln!(out, "Generalized Tobit")?;
    writeln!(out, "Dependent variable: Prior - Post, censored at 0")?;
    let names: Vec<String> = reported.iter().map(|c| c.name.clone()).collect();
    let mut t = TextTable::new();
    t.rule().row(["", "Prior - Post"]).rule();
    t.coefficient_rows(&[&reported], &names).rule();
    t.row(["Observations".to_string(), fit.n.to_string()]);
    t.row(["Censored".to_string(), fit.n_censored.to_string()]);
    t.row(["Log Likelihood".to_string(), num(fit.log_likelihood)]);
    t.row(["sigma".to_string(), format!("{} {}", num(fit.sigma), paren(fit.sigma_se))]);
    t.row([
        "Wald Test".to_string(),
        format!(
            "{}{} (df = {})",
            num(fit.wald.statistic),
            significance_stars(fit.wald.p_value),
            fit.wald.df
        ),
    ]);
    t.rule();
    t.write(out)?;
    writeln!(out, "{STAR_NOTE}")?;
    if dropped > 0 {
        writeln!(out, "Rows dropped for missing covariates: {dropped}")?;
    }
    writeln!(out)?;
    writeln!(out, "Latent posterior: Post* = gamma*Prior + X*delta + u")?;
    let mut t = TextTable::new();
    t.rule().row(["", "Estimate", "Std. Error"]).rule();
    for c in &structural {
        t.row([c.name.clone(), starred(c), paren(c.std_error)]);
    }
    t.rule();
    t.write(out)?;
    let verdict = match report.verdict {
        Verdict::Skeptical => "gamma > 1: agents are skeptical",
        Verdict::Updater => "gamma < 1: agents are updaters, higher priors drive an update",
        Verdict::Indeterminate => "gamma = 1 at three decimals: neither skeptical nor updating",
    };
    writeln!(out, "gamma = 1 - {} = {}; {verdict}", num(1.0 - fit.gamma), num(fit.gamma))?;
    for (name, dir) in &report.directions {
        writeln!(out, "{name}: {}", dir.describe())?;
    }
    Ok(())
}

fn fit_change(
    data: &Dataset,
    vars: &[Variable],
    link: Link,
    ctx: &mut Context<'_>,
) -> Result<(BinaryFit, DesignMatrix, usize), CliError> {
    let rows: Vec<_> = data.complete_cases(vars).collect();
    let x = DesignMatrix::from_records(&rows, vars)?;
    let y: Vec<bool> = rows.iter().map(|r| r.change).collect();
    let fit = ctx.time("fit binary", || fit_binary(&y, &x, link))?;
    Ok((fit, x, data.listwise_dropped(vars)))
}

fn binary_footer(t: &mut TextTable, fit: &BinaryFit) {
    t.row(["Observations".to_string(), fit.n.to_string()]);
    t.row(["Log Likelihood".to_string(), num(fit.log_likelihood)]);
    t.row(["Akaike Inf. Crit.".to_string(), num(fit.aic)]);
}

fn link_label(link: Link) -> &'static str {
    match link {
        Link::Probit => "probit",
        Link::Logit => "logistic",
    }
}

/// Intercept rows go last, as in the printed tables.
fn intercept_last(rows: &[Coefficient]) -> Vec<String> {
    let mut names: Vec<String> = rows.iter().map(|c| c.name.clone()).filter(|n| n != crate::estimators::INTERCEPT).collect();
    if rows.iter().any(|c| c.name == crate::estimators::INTERCEPT) {
        names.push(crate::estimators::INTERCEPT.to_string());
    }
    names
}

fn run_binary(
    input: &InputArgs,
    covariates: &[String],
    link: Link,
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    let vars = with_prior(covariates)?;
    let data = ctx.load(input)?;
    let (fit, _, dropped) = fit_change(&data, &vars, link, ctx)?;
    let table = fit.table();
    if input.format != Format::Text {
        let mut rec = Records::new();
        rec.coefficients("coefficients", &table);
        rec.push(
            "fit",
            json!({
                "link": link.to_string(),
                "n": fit.n,
                "positive": fit.n_positive,
                "dropped": dropped,
                "log_likelihood": fit.log_likelihood,
                "aic": fit.aic,
            }),
        );
        rec.write(input.format, out)?;
        return Ok(());
    }
    writeln!(out, "Changing decision ({})", link_label(link))?;
    let mut t = TextTable::new();
    t.rule().row(["".to_string(), format!("Change ({})", link_label(link))]).rule();
    t.coefficient_rows(&[&table], &intercept_last(&table)).rule();
    binary_footer(&mut t, &fit);
    t.rule();
    t.write(out)?;
    writeln!(out, "{STAR_NOTE}")?;
    Ok(())
}

fn effects_as_coefficients(fit: &BinaryFit, x: &DesignMatrix) -> Result<Vec<Coefficient>, CliError> {
    Ok(marginal_effects(fit, x)?
        .into_iter()
        .map(|m| Coefficient {
            statistic: m.effect / m.std_error,
            name: m.name,
            estimate: m.effect,
            std_error: m.std_error,
            p_value: m.p_value,
        })
        .collect())
}

fn run_margins(
    input: &InputArgs,
    covariates: &[String],
    link: Link,
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    let vars = with_prior(covariates)?;
    let data = ctx.load(input)?;
    let (fit, x, _) = fit_change(&data, &vars, link, ctx)?;
    let effects = ctx.time("margins", || marginal_effects(&fit, &x))?;
    if input.format != Format::Text {
        let mut rec = Records::new();
        for m in &effects {
            rec.push(
                "margins",
                json!({
                    "name": m.name,
                    "kind": m.kind,
                    "effect": m.effect,
                    "std_error": m.std_error,
                    "p_value": m.p_value,
                    "stars": significance_stars(m.p_value),
                }),
            );
        }
        rec.write(input.format, out)?;
        return Ok(());
    }
    writeln!(out, "Average marginal effects ({}), n = {}", link_label(link), fit.n)?;
    let mut t = TextTable::new();
    t.rule().row(["", "Effect", "Std. Error", "Kind"]).rule();
    let order = intercept_last(&fit.table());
    for name in &order {
        if let Some(m) = effects.iter().find(|m| &m.name == name) {
            let kind = match m.kind {
                crate::estimators::EffectKind::Continuous => "derivative",
                crate::estimators::EffectKind::Discrete => "0 -> 1",
            };
            t.row([
                m.name.clone(),
                format!("{}{}", num(m.effect), significance_stars(m.p_value)),
                paren(m.std_error),
                kind.to_string(),
            ]);
        }
    }
    t.rule();
    t.write(out)?;
    writeln!(out, "{STAR_NOTE}")?;
    Ok(())
}

fn run_predict(
    input: &InputArgs,
    covariates: &[String],
    link: Link,
    threshold: f64,
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(CliError::Usage(format!("threshold {threshold} outside [0, 1]")));
    }
    let vars = with_prior(covariates)?;
    let data = ctx.load(input)?;
    let (fit, _, _) = fit_change(&data, &vars, link, ctx)?;
    let report = ctx.time("predict", || predict_change(&fit, &data, threshold))?;
    let observed_updaters = report.confusion[1][0] + report.confusion[1][1];
    let base = 1.0 - observed_updaters as f64 / report.n as f64;
    if input.format != Format::Text {
        let mut rec = Records::new();
        rec.push(
            "predict",
            json!({
                "link": link.to_string(),
                "threshold": report.threshold,
                "n": report.n,
                "correct": report.n_correct,
                "success_rate": report.success_rate,
                "non_updater_share": base,
                "true_negative": report.confusion[0][0],
                "false_positive": report.confusion[0][1],
                "false_negative": report.confusion[1][0],
                "true_positive": report.confusion[1][1],
                "dropped": report.n_dropped,
            }),
        );
        rec.write(input.format, out)?;
        return Ok(());
    }
    writeln!(out, "Prediction exercise ({}), threshold {}", link_label(link), report.threshold)?;
    let mut t = TextTable::new();
    t.rule();
    t.row(["Observations".to_string(), report.n.to_string()]);
    t.row(["Correct".to_string(), report.n_correct.to_string()]);
    t.row(["Success rate".to_string(), num(report.success_rate)]);
    t.row(["Non-updater share".to_string(), num(base)]);
    t.rule();
    t.row(["", "Predicted 0", "Predicted 1"]);
    t.row([
        "Change = 0".to_string(),
        report.confusion[0][0].to_string(),
        report.confusion[0][1].to_string(),
    ]);
    t.row([
        "Change = 1".to_string(),
        report.confusion[1][0].to_string(),
        report.confusion[1][1].to_string(),
    ]);
    t.rule();
    t.write(out)?;
    if report.n_dropped > 0 {
        writeln!(out, "Rows dropped for missing covariates: {}", report.n_dropped)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_hurdle(
    input: &InputArgs,
    change_covariates: &[String],
    level_covariates: &[String],
    link: Link,
    transform: Transform,
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    let change_vars = with_prior(change_covariates)?;
    let level_vars = with_prior(level_covariates)?;
    let data = ctx.load(input)?;
    let fit = ctx.time("fit hurdle", || fit_hurdle(&data, &change_vars, &level_vars, link, transform))?;
    let rows: Vec<_> = data.complete_cases(&change_vars).collect();
    let x = DesignMatrix::from_records(&rows, &change_vars)?;
    let change = fit.change_stage.table();
    let effects = effects_as_coefficients(&fit.change_stage, &x)?;
    let level = fit.level_stage.table();
    let ls = &fit.level_stage;

    if input.format != Format::Text {
        let mut rec = Records::new();
        rec.coefficients("change", &change);
        rec.coefficients("marginal_effects", &effects);
        rec.coefficients("level", &level);
        rec.push(
            "change_fit",
            json!({
                "link": link.to_string(),
                "n": fit.change_stage.n,
                "dropped": fit.change_dropped,
                "log_likelihood": fit.change_stage.log_likelihood,
                "aic": fit.change_stage.aic,
            }),
        );
        rec.push(
            "level_fit",
            json!({
                "transform": transform.to_string(),
                "n": ls.n,
                "dropped": fit.level_dropped,
                "r_squared": ls.r_squared,
                "adj_r_squared": ls.adj_r_squared,
                "residual_std_error": ls.residual_std_error,
                "df_residual": ls.df_residual,
                "f_statistic": ls.f_statistic.as_ref().map(|f| f.statistic),
                "f_p_value": ls.f_statistic.as_ref().map(|f| f.p_value),
            }),
        );
        rec.write(input.format, out)?;
        return Ok(());
    }

    let label = link_label(link);
    writeln!(out, "Changing decision and marginal effects")?;
    let mut t = TextTable::new();
    t.rule()
        .row(["".to_string(), format!("Change ({label})"), format!("Marginal effects ({label})")])
        .rule();
    t.coefficient_rows(&[&change, &effects], &intercept_last(&change)).rule();
    binary_footer(&mut t, &fit.change_stage);
    t.rule();
    t.write(out)?;
    writeln!(out, "{STAR_NOTE}")?;
    writeln!(out)?;
    let dep = match transform {
        Transform::Identity => "Post",
        Transform::Log => "log(Post)",
    };
    writeln!(out, "Level regression among updaters")?;
    let mut t = TextTable::new();
    t.rule().row(["", dep]).rule();
    t.coefficient_rows(&[&level], &intercept_last(&level)).rule();
    t.row(["Observations".to_string(), ls.n.to_string()]);
    let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), num);
    t.row(["R2".to_string(), opt(ls.r_squared)]);
    t.row(["Adjusted R2".to_string(), opt(ls.adj_r_squared)]);
    t.row([
        "Residual Std. Error".to_string(),
        format!("{} (df = {})", num(ls.residual_std_error), ls.df_residual),
    ]);
    if let Some(f) = &ls.f_statistic {
        t.row([
            "F Statistic".to_string(),
            format!(
                "{}{} (df = {}; {})",
                num(f.statistic),
                significance_stars(f.p_value),
                f.df1,
                f.df2
            ),
        ]);
    }
    t.rule();
    t.write(out)?;
    writeln!(out, "{STAR_NOTE}")?;
    if fit.level_dropped > 0 {
        writeln!(out, "Updaters dropped for missing covariates: {}", fit.level_dropped)?;
    }
    Ok(())
}

fn dgp_config(dgp: &DgpArgs, n: usize, default_bounds: PostBounds) -> Result<DgpConfig, CliError> {
    let mut config = DgpConfig::new(dgp.model, n, dgp.seed);
    config.bounds = dgp.bounds.unwrap_or(default_bounds);
    if dgp.link.is_some() || dgp.transform.is_some() {
        let Truth::Hurdle(h) = &mut config.truth else {
            return Err(CliError::Usage("--link and --transform apply to the hurdle model".into()));
        };
        if let Some(link) = dgp.link {
            h.link = link;
        }
        if let Some(transform) = dgp.transform {
            h.transform = transform;
        }
    }
    for p in &dgp.params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects NAME=VALUE (got `{p}`)")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--param {name}: `{value}` is not a number")))?;
        let name = if config.model() == ModelKind::Hurdle && name.trim().eq_ignore_ascii_case("level.sigma") {
            "sigma"
        } else {
            name
        };
        config.set_param(name, value).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(config)
}

fn run_simulate(
    dgp: &DgpArgs,
    n: usize,
    path: Option<std::path::PathBuf>,
    missing: &[String],
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    let config = dgp_config(dgp, n, PostBounds::Instrument)?;
    let mut plants = Vec::new();
    for m in missing {
        let (name, count) = m
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--missing expects VAR=COUNT (got `{m}`)")))?;
        let var = Variable::from_name(name).ok_or_else(|| CliError::Usage(format!("unknown variable `{name}`")))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--missing {name}: `{count}` is not a count")))?;
        plants.push((var, count));
    }
    let resolved = ResolvedDgp::new(&config)?;
    let mut data = ctx.time("simulate", || resolved.draw(0));
    for (var, count) in plants {
        plant_missing(&mut data, var, count, config.seed)?;
    }
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            write_survey(&data, &mut w)?;
            w.flush()?;
            let updaters = data.valid_records().filter(|r| r.change).count();
            writeln!(
                out,
                "wrote {} rows ({updaters} updaters) to {}",
                data.len(),
                p.display()
            )?;
        }
        None => write_survey(&data, out)?,
    }
    Ok(())
}

fn run_mc(
    dgp: &DgpArgs,
    n: usize,
    reps: usize,
    format: Format,
    out: &mut dyn Write,
    ctx: &mut Context<'_>,
) -> Result<(), CliError> {
    let config = dgp_config(dgp, n, PostBounds::Latent)?;
    let threads = threads_from_env()?;
    let report = ctx.time("mc", || mc_recover(&config, reps, threads))?;
    if format != Format::Text {
        let mut rec = Records::new();
        rec.push(
            "summary",
            json!({
                "model": report.model.to_string(),
                "n": report.n,
                "seed": report.seed,
                "replications": report.replications,
                "succeeded": report.succeeded,
                "mean_censoring_share": report.mean_censoring_share,
            }),
        );
        for p in &report.parameters {
            rec.push("parameter", serde_json::to_value(p).map_err(|e| CliError::Io(e.into()))?);
        }
        for f in &report.failures {
            rec.push("failure", serde_json::to_value(f).map_err(|e| CliError::Io(e.into()))?);
        }
        rec.write(format, out)?;
        return Ok(());
    }
    writeln!(
        out,
        "Monte-Carlo recovery: {} model, n = {}, {} replications, seed {}",
        report.model, report.n, report.replications, report.seed
    )?;
    writeln!(
        out,
        "Succeeded: {}  Failed: {}  Mean censoring share: {}",
        report.succeeded,
        report.failures.len(),
        num(report.mean_censoring_share)
    )?;
    let mut t = TextTable::new();
    t.rule()
        .row(["Parameter", "Truth", "Mean", "Bias", "MC SE", "Coverage", "Within 2 MC SE"])
        .rule();
    for p in &report.parameters {
        t.row([
            p.name.clone(),
            num(p.truth),
            num(p.mean),
            num(p.bias),
            num(p.mc_se),
            num(p.coverage),
            if p.within_two_mc_se { "yes" } else { "no" }.to_string(),
        ]);
    }
    t.rule();
    t.write(out)?;
    for f in &report.failures {
        writeln!(out, "replication {} failed: {} ({})", f.replication, f.error, f.message)?;
    }
    Ok(())
}
