//! Bayesian belief updating with skeptical agents: Beta-Bernoulli posterior
//! means, a generalized Tobit with observation-varying censoring threshold,
//! a two-stage hurdle model, a synthetic survey generator and a Monte-Carlo
//! recovery harness.

pub mod belief;
pub mod cli;
pub mod dataio;
pub mod estimators;
pub mod numerics;
pub mod simulate;
