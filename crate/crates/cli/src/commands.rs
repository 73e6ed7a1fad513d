use std::fs;
use std::path::Path;

use anyhow::anyhow;
use log::info;
use serde_json::json;

use mermin_lhv::exact::{format_rational, parse_rational, rat, to_f64};
use mermin_lhv::fixture::paper_fixture;
use mermin_lhv::mc::{compare, empirical_mermin, run_with, RunConfig, Source};
use mermin_lhv::solver::{
    curve_csv, deviation_from_target, eta_threshold, sig12, tradeoff_curve, ThresholdOptions,
};
use mermin_lhv::stabilizer::mermin_terms;
use mermin_lhv::strategy::LhvModelJson;
use mermin_lhv::target::target_table_with;
use mermin_lhv::{Arithmetic, Execution, LhvModel, ProblemTemplate, Rational, ScenarioParams};

use crate::output::{self, table_csv};
use crate::{Cli, Command, Format, SourceKind};

pub struct CliError {
    pub code: u8,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, source: e.into() }
    }
}

impl From<mermin_lhv::Error> for CliError {
    fn from(e: mermin_lhv::Error) -> Self {
        use mermin_lhv::Error as E;
        let code = match e {
            E::Solver(_) | E::FixtureInfeasible(_) => 1,
            _ => 2,
        };
        Self { code, source: e.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, source: e.into() }
    }
}

type Outcome = Result<u8, CliError>;

const EXEC: Execution = Execution::Parallel;

pub fn execute(cli: &Cli) -> Outcome {
    let format = |default: Format| cli.format.unwrap_or(default);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Bounds { n } => bounds(*n, format(Format::Json), out),
        Command::Target(s) => {
            let params = ScenarioParams::new(s.n, s.eta.clone(), s.v.clone())?;
            let table = target_table_with(&params, EXEC)?;
            match format(Format::Json) {
                Format::Json => output::json(out, &table.to_json(Some(&params)))?,
                Format::Csv => output::text(out, &table_csv(&table))?,
            }
            Ok(0)
        }
        Command::Verify { model, scenario, tol } => {
            let model = read_model(model)?;
            if model.n != scenario.n {
                return Err(CliError::usage(anyhow!(
                    "model has n = {} but --n is {}",
                    model.n,
                    scenario.n
                )));
            }
            let params = ScenarioParams::new(scenario.n, scenario.eta.clone(), scenario.v.clone())?;
            let deviation = deviation_from_target(&model, &params.eta, &params.v)?;
            let exact = model.model_statistics_with(EXEC) == target_table_with(&params, EXEC)?;
            let pass = deviation <= *tol;
            match format(Format::Json) {
                Format::Json => output::json(
                    out,
                    &json!({
                        "n": params.n,
                        "eta": format_rational(&params.eta),
                        "v": format_rational(&params.v),
                        "max_deviation": deviation,
                        "tol": tol,
                        "exact_match": exact,
                        "pass": pass,
                    }),
                )?,
                Format::Csv => output::text(
                    out,
                    &format!(
                        "n,eta,v,max_deviation,tol,exact_match,pass\n{},{},{},{},{},{exact},{pass}\n",
                        params.n,
                        sig12(to_f64(&params.eta)),
                        sig12(to_f64(&params.v)),
                        sig12(deviation),
                        sig12(*tol),
                    ),
                )?,
            }
            Ok(if pass { 0 } else { 1 })
        }
        Command::Threshold { n, v, mode, tol } => {
            if !(*tol > 0.0 && *tol < 0.5) {
                return Err(CliError::usage(anyhow!("--tol must lie in (0, 1/2)")));
            }
            let template = ProblemTemplate::new_with(*n, *mode, EXEC)?;
            let options = ThresholdOptions {
                tol_eta: *tol,
                ..ThresholdOptions::default()
            };
            let result = eta_threshold(&template, v.clone(), &options)?;
            info!(
                "n={n} mode={mode}: eta in [{}, {:?}]",
                result.eta_low, result.eta_high
            );
            match format(Format::Json) {
                Format::Json => output::json(out, &result.to_json(&template)?)?,
                Format::Csv => {
                    let opt = |x: Option<f64>| x.map(sig12).unwrap_or_default();
                    output::text(
                        out,
                        &format!(
                            "n,mode,v,eta_low,eta_high,gap,exact_boundary_feasible,max_deviation\n{n},{mode},{},{},{},{},{},{}\n",
                            sig12(to_f64(v)),
                            sig12(result.eta_low),
                            opt(result.eta_high),
                            opt(result.gap()),
                            result.exact_boundary_feasible.map(|b| b.to_string()).unwrap_or_default(),
                            sig12(result.max_deviation),
                        ),
                    )?
                }
            }
            Ok(0)
        }
        Command::Tradeoff { n, grid, mode } => {
            let grid = parse_grid(grid).map_err(CliError::usage)?;
            let template = ProblemTemplate::new_with(*n, *mode, EXEC)?;
            let points = tradeoff_curve(&template, &grid, Arithmetic::default(), EXEC)?;
            match format(Format::Csv) {
                Format::Csv => output::text(out, &curve_csv(&points))?,
                Format::Json => {
                    let rows = points
                        .iter()
                        .map(|p| p.to_json(&template, true))
                        .collect::<Result<Vec<_>, _>>()?;
                    output::json(out, &rows)?
                }
            }
            Ok(0)
        }
        Command::Fixture { n } => {
            let fixture = paper_fixture(*n as usize)?;
            match format(Format::Json) {
                Format::Json => output::json(out, &fixture.model.to_json())?,
                Format::Csv => output::text(out, &output::model_csv(&fixture.model))?,
            }
            Ok(0)
        }
        Command::Simulate {
            source,
            n,
            eta,
            v,
            model,
            shots,
            seed,
        } => {
            let source = match source {
                SourceKind::Quantum => {
                    let (Some(n), Some(eta), Some(v)) = (n, eta, v) else {
                        return Err(CliError::usage(anyhow!("--source quantum needs --n, --eta and --v")));
                    };
                    Source::Quantum(ScenarioParams::new(*n, eta.clone(), v.clone())?)
                }
                SourceKind::Lhv => {
                    let Some(path) = model else {
                        return Err(CliError::usage(anyhow!("--source lhv needs --model")));
                    };
                    let m = read_model(path)?;
                    if n.is_some_and(|n| n != m.n) {
                        return Err(CliError::usage(anyhow!("model has n = {}", m.n)));
                    }
                    Source::Lhv(m)
                }
            };
            let n = source.n();
            // compare against the target when one is given, else against the source itself
            let reference = match (source.clone(), eta, v) {
                (Source::Lhv(_), Some(eta), Some(v)) => {
                    target_table_with(&ScenarioParams::new(n, eta.clone(), v.clone())?, EXEC)?
                }
                (s, _, _) => s.exact_table()?,
            };
            let config = RunConfig::new(source, *shots, *seed)?;
            let table = run_with(&config, EXEC)?;
            let report = compare(&table, &reference)?;
            let mermin = empirical_mermin(&table, &mermin_terms(n)?).ok();
            info!(
                "simulate n={n}: max |z| = {:?}, impossible events = {}",
                report.max_abs_z, report.impossible_events
            );
            match format(Format::Json) {
                Format::Json => output::json(
                    out,
                    &json!({ "table": table.to_json(), "report": report, "mermin": mermin }),
                )?,
                Format::Csv => output::text(out, &output::report_csv(&report))?,
            }
            Ok(0)
        }
    }
}

fn bounds(n: usize, format: Format, out: Option<&Path>) -> Outcome {
    let spec = mermin_terms(n)?;
    let summary = spec.summary();
    match format {
        Format::Json => output::json(out, &summary)?,
        Format::Csv => output::text(
            out,
            &format!(
                "n,classical_bound,quantum_value,eta_crit,v_crit,deterministic_lhv_max\n{n},{},{},{},{},{}\n",
                sig12(summary.classical_bound_f64),
                summary.quantum_value,
                sig12(summary.eta_crit_f64),
                sig12(summary.v_crit_f64),
                summary.deterministic_lhv_max.map(|m| m.to_string()).unwrap_or_default(),
            ),
        )?,
    }
    Ok(0)
}

fn read_model(path: &Path) -> Result<LhvModel, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(anyhow!("cannot read {}: {e}", path.display())))?;
    let json: LhvModelJson = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(anyhow!("{} is not a model file: {e}", path.display())))?;
    Ok(LhvModel::from_json(&json)?)
}

/// `start:stop:step` (inclusive of `stop` when it lands on the lattice) or a
/// comma-separated list, all parsed exactly.
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<Rational>> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_rational(start)?, parse_rational(stop)?, parse_rational(step)?);
            if step <= rat(0, 1) {
                return Err(anyhow!("grid step must be positive"));
            }
            let mut grid = Vec::new();
            let mut eta = start;
            while eta <= stop {
                grid.push(eta.clone());
                eta += &step;
            }
            grid
        }
        [list] => list
            .split(',')
            .map(|p| parse_rational(p).map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?,
        _ => return Err(anyhow!("grid must be start:stop:step or a comma-separated list")),
    };
    if grid.is_empty() {
        return Err(anyhow!("empty grid"));
    }
    if let Some(bad) = grid.iter().find(|e| **e < rat(1, 2) || **e > rat(1, 1)) {
        return Err(anyhow!("grid point {} outside [1/2, 1]", format_rational(bad)));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("1/2:1:1/4").unwrap(), vec![rat(1, 2), rat(3, 4), rat(1, 1)]);
        assert_eq!(parse_grid("0.5,0.75").unwrap(), vec![rat(1, 2), rat(3, 4)]);
        assert_eq!(parse_grid("0.5:1:0.05").unwrap().len(), 11);
        assert!(parse_grid("0.4,0.6").is_err());
        assert!(parse_grid("1/2:1:0").is_err());
    }
}
