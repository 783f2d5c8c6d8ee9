use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use fcbio::data::{load_dataset, synthetic_logistic, synthetic_min_norm, DataFormat, DesignMatrix};
use fcbio::driver::{certify, fc_bio, write_trace_csv, SolveReport, SolverOptions};
use fcbio::problems::{
    make_lipschitz_hard_instance, make_logistic_problem, make_lower_bound_instance, make_min_norm_problem,
    make_smooth_hard_instance, Level,
};
use fcbio::verify::{
    format_table, long_run_reference, lower_bound_floor_value, min_norm_ground_truth, monitor_zero_respecting,
    run_suite, Side, Suite, SupportLedger,
};
use fcbio::{BilevelProblem, Instance, Tolerances};

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;

enum Truth {
    Exact(f64, f64),
    /// Values of a long reference run, not true optima.
    Reference(f64, f64),
    Unknown,
}

struct Monitored {
    instance: Instance,
    ledger: SupportLedger,
}

struct Built {
    problem: BilevelProblem,
    truth: Truth,
    monitored: Option<Monitored>,
}

fn load(config: &RunConfig) -> Result<Option<DesignMatrix>, CliError> {
    match &config.data {
        None => Ok(None),
        Some(path) => load_dataset(path, config.format)
            .map(Some)
            .map_err(|e| match e {
                fcbio::Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
                other => CliError::Core(other),
            }),
    }
}

fn split_halves(d: &DesignMatrix) -> Result<(DesignMatrix, DesignMatrix), CliError> {
    if d.rows() < 2 {
        return Err(CliError::Core(fcbio::Error::InvalidData("need at least two rows to split".into())));
    }
    let half = d.rows() / 2;
    Ok((d.slice_rows(0, half), d.slice_rows(half, d.rows() - half)))
}

fn min_norm_truth(data: &DesignMatrix, radius: f64) -> Truth {
    match min_norm_ground_truth(data) {
        Ok((x, f_star)) if x.norm() <= radius => Truth::Exact(f_star, 0.0),
        Ok((x, _)) => {
            eprintln!("note: min-norm solution has norm {:.6} > radius {radius}; no ground truth", x.norm());
            Truth::Unknown
        }
        Err(e) => {
            eprintln!("note: no ground truth ({e})");
            Truth::Unknown
        }
    }
}

fn monitored(instance: Instance) -> Built {
    let (problem, ledger) = monitor_zero_respecting(&instance.problem);
    let truth = Truth::Exact(instance.truth.f_star, instance.truth.g_star);
    Built { problem, truth, monitored: Some(Monitored { instance, ledger }) }
}

fn build(config: &RunConfig) -> Result<Built, CliError> {
    let radius = config.radius_or_default();
    let (m, n) = config.dims_or_default();
    let mut built = match config.experiment {
        Experiment::MinNorm => {
            let data = match load(config)? {
                Some(d) => d,
                None => synthetic_min_norm(m, n, config.seed)?,
            };
            let truth = min_norm_truth(&data, radius);
            Built { problem: make_min_norm_problem(&data, radius)?, truth, monitored: None }
        }
        Experiment::Custom => {
            let data = load(config)?.ok_or_else(|| CliError::Config {
                field: "data".into(),
                message: "the custom experiment needs a dataset".into(),
            })?;
            Built { problem: make_min_norm_problem(&data, radius)?, truth: Truth::Unknown, monitored: None }
        }
        Experiment::Logistic => {
            let (train, val) = match load(config)? {
                Some(d) => split_halves(&d)?,
                None => synthetic_logistic(m, n, config.seed)?,
            };
            Built { problem: make_logistic_problem(&train, &val, radius)?, truth: Truth::Unknown, monitored: None }
        }
        Experiment::HardSmooth => monitored(make_smooth_hard_instance(config.horizon)?),
        Experiment::HardLipschitz => monitored(make_lipschitz_hard_instance(config.horizon)?),
        Experiment::LowerBound => {
            monitored(make_lower_bound_instance(config.setting, config.level, config.horizon, 1.0, radius)?)
        }
    };
    if config.nonneg_f {
        built.problem = built.problem.with_nonnegative_f();
    }
    for w in &built.problem.warnings {
        eprintln!("warning: {w}");
    }
    Ok(built)
}

fn write_trace(report: &SolveReport, out: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    let file = File::create(out).map_err(io)?;
    let mut w = BufWriter::new(file);
    write_trace_csv(&report.trace, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn describe_monitor(config: &RunConfig, m: &Monitored) {
    let horizon = config.horizon as u64;
    let violations = m.ledger.violations().len();
    match config.experiment {
        Experiment::HardSmooth | Experiment::HardLipschitz => {
            let f = m.instance.problem.f.function();
            let f0 = f.value(&m.instance.problem.start);
            let points = m.ledger.points_before(horizon);
            let constant = m.ledger.complete_before(horizon) && points.iter().all(|x| f.value(x) == f0);
            eprintln!(
                "stall: f(x_k) == f(x_0) = {f0} for all {} queries before {horizon} calls: {constant}",
                points.len()
            );
            eprintln!("stall: |f(x_0) - f*| = {:.12}", (f0 - m.instance.truth.f_star).abs());
        }
        Experiment::LowerBound => {
            let (side, chain, star) = match config.level {
                Level::Upper => (Side::Upper, m.instance.problem.f.function(), m.instance.truth.f_star),
                Level::Lower => (Side::Lower, m.instance.problem.g.function(), m.instance.truth.g_star),
            };
            let points = m.ledger.points_before_side(side, horizon);
            let best = points.iter().map(|x| chain.value(x) - star).fold(f64::INFINITY, f64::min);
            let floor = lower_bound_floor_value(config.setting, config.horizon, 1.0, m.instance.problem.set.radius());
            eprintln!("floor: best chain gap before {horizon} calls = {best:e}, floor = {floor:e}");
        }
        _ => {}
    }
    eprintln!("zero-respecting violations: {violations}");
}

/// Runs one experiment, writes its trace and returns the JSON summary.
pub fn cmd_solve(config: &RunConfig) -> Result<(Value, bool), CliError> {
    let (eps_f, eps_g) = config.tolerances();
    let tol = Tolerances::new(eps_f, eps_g)?;
    let built = build(config)?;
    let options = SolverOptions { budget: config.budget, early_exit: true, trace_every: config.trace_every };
    let report = fc_bio(&built.problem, tol, &options)?;
    write_trace(&report, &config.out)?;

    let truth = match built.truth {
        Truth::Unknown if config.experiment == Experiment::Logistic && config.reference_factor > 0 => {
            let factor = config.reference_factor;
            let r = long_run_reference(&built.problem, tol, report.per_round, factor)?;
            eprintln!("reference: {factor}x budget run, f = {}, g = {}", r.f_value, r.g_value);
            Truth::Reference(r.f_value, r.g_value)
        }
        t => t,
    };
    let (pair, gate) = match truth {
        Truth::Exact(f, g) => (Some((f, g)), true),
        Truth::Reference(f, g) => (Some((f, g)), false),
        Truth::Unknown => (None, false),
    };
    let cert = certify(&report, pair);
    if let Some(m) = &built.monitored {
        describe_monitor(config, m);
    }
    eprintln!(
        "rounds {} of {}, per-round budget {}, f = {}, g = {}, trace {}",
        report.rounds.len(),
        report.planned_rounds,
        report.per_round,
        report.f_value,
        report.g_value,
        config.out.display()
    );
    let summary = json!({
        "experiment": config.experiment.to_string(),
        "f_gap": cert.f_gap,
        "g_gap": cert.g_gap,
        "oracle_calls": report.first_order_calls,
        "wall_seconds": report.wall_seconds,
        "certified": cert.certified,
    });
    // only exact optima make an uncertified run a failure
    Ok((summary, !gate || cert.certified))
}

/// Runs a verification suite and prints its table; `Ok(false)` on any failed check.
pub fn cmd_verify(suite: &str, out: &mut impl Write) -> Result<bool, CliError> {
    let suite: Suite = suite.parse().map_err(|e: fcbio::Error| CliError::Usage(e.to_string()))?;
    let results = run_suite(suite);
    out.write_all(format_table(&results).as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} checks, {failed} failed", results.len()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(failed == 0)
}

/// Writes the synthetic dataset an experiment would use. Logistic data is
/// written as one file whose first half is the training split.
pub fn cmd_gen_data(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let (m, n) = config.dims_or_default();
    let data = match config.experiment {
        Experiment::MinNorm | Experiment::Custom => synthetic_min_norm(m, n, config.seed)?,
        Experiment::Logistic => {
            let (train, val) = synthetic_logistic(m, n, config.seed)?;
            let a = train.a.clone().resize_vertically(m, 0.0);
            let mut a = a;
            a.rows_mut(train.rows(), val.rows()).copy_from(&val.a);
            let b = fcbio::Vector::from_iterator(m, train.b.iter().chain(val.b.iter()).copied());
            DesignMatrix::new(a, b)?
        }
        other => {
            return Err(CliError::Usage(format!("gen-data supports min_norm, logistic and custom, not {other}")));
        }
    };
    let text = match config.format {
        DataFormat::Csv => data.to_csv(),
        DataFormat::Libsvm => data.to_libsvm(),
    };
    std::fs::write(out, text).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    eprintln!("wrote {} x {} dataset to {}", data.rows(), data.cols(), out.display());
    Ok(())
}
