//! `--portfolio` argument: a built-in fixture, a single contract, or a file.

use std::path::Path;

use cdsbound::study::paper_example_portfolio;
use cdsbound::{Error, Portfolio, Result};

/// Resolves `paper-example`, `single:<m>:<notional>` or a path to a file of
/// notionals separated by whitespace or commas (`#` starts a comment).
pub fn parse(spec: &str, n_quarters: usize) -> Result<Portfolio> {
    if spec == "paper-example" {
        let p = paper_example_portfolio();
        if p.len() != n_quarters {
            return Err(Error::Config(format!(
                "paper-example has {} notionals but the grid has {n_quarters} quarters",
                p.len()
            )));
        }
        return Ok(p);
    }
    if let Some(rest) = spec.strip_prefix("single:") {
        let (m, notional) = rest.split_once(':').ok_or_else(|| {
            Error::Config(format!("expected single:<m>:<notional>, got {spec:?}"))
        })?;
        let m: usize = m
            .parse()
            .map_err(|_| Error::Config(format!("bad maturity index {m:?}")))?;
        let notional: f64 = notional
            .parse()
            .map_err(|_| Error::Config(format!("bad notional {notional:?}")))?;
        return Portfolio::single(n_quarters, m, notional);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read portfolio {spec:?}: {e}")))?;
    let notionals = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|token| !token.is_empty())
        .map(|token| {
            token
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad notional {token:?} in {spec:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if notionals.len() != n_quarters {
        return Err(Error::Config(format!(
            "portfolio file has {} notionals but the grid has {n_quarters} quarters",
            notionals.len()
        )));
    }
    Portfolio::new(notionals)
}
