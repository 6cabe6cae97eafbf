//! Subcommand implementations.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use ocslab_core::data::{self, DataError, Dataset, SplitSpec, ToyConfig};
use ocslab_core::eval::{self, BenchParams, EvalReport, GridSearchSpec};
use ocslab_core::kernels::{KernelFamily, KernelSpec};
use ocslab_core::slab::{self, AnyModel, KktCase, SlabTrainConfig, TrainError};
use ocslab_core::{FeatureMatrix, SolverConfig};

use crate::output::{opt_num, render, Record, Value};
use crate::{Cli, Command, DataArgs, DataFormat, KernelArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter combinations: exit 2.
    Usage(String),
    /// I/O, parse, or computation failures: exit 1.
    Runtime(String),
}

pub enum Outcome {
    Done,
    /// Work finished but a solver hit its iteration budget: exit 3.
    NotConverged,
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidParameter(_) | TrainError::TooFewSamples { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<slab::ModelIoError> for CliError {
    fn from(e: slab::ModelIoError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<ocslab_core::kernels::KernelError> for CliError {
    fn from(e: ocslab_core::kernels::KernelError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<eval::EvalError> for CliError {
    fn from(e: eval::EvalError) -> Self {
        match e {
            eval::EvalError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn open_source(path: &str) -> Result<Box<dyn Read>, CliError> {
    if path == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        Ok(Box::new(File::open(path).map_err(|e| {
            CliError::Runtime(format!("{path}: {e}"))
        })?))
    }
}

fn load_dataset(args: &DataArgs) -> Result<Dataset, CliError> {
    let source = open_source(&args.data)?;
    let dataset = match args.data_format {
        DataFormat::Letter => data::load_letter(source)?,
        DataFormat::Libsvm => data::load_libsvm(source)?,
        DataFormat::Csv => data::load_csv(source, &args.label_column)?,
    };
    Ok(dataset)
}

/// Rows used for training: the target class when given, otherwise all
/// rows. Letter input always needs a target: it carries 26 classes.
fn training_rows(
    dataset: &Dataset,
    target: Option<&str>,
    format: DataFormat,
) -> Result<FeatureMatrix, CliError> {
    match target {
        Some(class) => {
            let idx: Vec<usize> = (0..dataset.len())
                .filter(|&i| dataset.labels[i] == class)
                .collect();
            if idx.is_empty() {
                return Err(CliError::Runtime(format!(
                    "class {class:?} not present in the input"
                )));
            }
            Ok(dataset.features.select(&idx))
        }
        None if format == DataFormat::Letter => Err(CliError::Usage(
            "letter input carries 26 classes; pass --target <LETTER>".into(),
        )),
        None => Ok(dataset.features.clone()),
    }
}

fn kernel_spec(args: &KernelArgs) -> Result<KernelSpec, CliError> {
    let family = KernelFamily::from_str(&args.kernel)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    KernelSpec::new(family, args.gamma).map_err(|e| CliError::Usage(e.to_string()))
}

fn write_report(cli: &Cli, records: &[Record]) -> Result<(), CliError> {
    let content = render(records, cli.format);
    if cli.output == "-" {
        io::stdout().write_all(content.as_bytes())?;
    } else {
        std::fs::write(&cli.output, content)?;
    }
    Ok(())
}

/// Per-class RBF widths for the 26-class letter benchmark.
const LETTER_GAMMA: [(char, f64); 26] = [
    ('A', 1.0),
    ('B', 0.5),
    ('C', 1.0),
    ('D', 1.0),
    ('E', 1.0),
    ('F', 1.0),
    ('G', 1.0),
    ('H', 1.0),
    ('I', 1.0),
    ('J', 1.0),
    ('K', 1.0),
    ('L', 1.0),
    ('M', 0.5),
    ('N', 1.0),
    ('O', 0.5),
    ('P', 0.5),
    ('Q', 2.0),
    ('R', 0.5),
    ('S', 2.0),
    ('T', 1.0),
    ('U', 1.0),
    ('V', 0.5),
    ('W', 1.0),
    ('X', 0.5),
    ('Y', 1.0),
    ('Z', 1.0),
];

fn default_gamma(class: &str) -> Option<f64> {
    let c = class.chars().next()?;
    LETTER_GAMMA
        .iter()
        .find(|(letter, _)| *letter == c && class.len() == 1)
        .map(|(_, g)| *g)
}

/// Reads `class,gamma` override lines.
fn load_gamma_table(path: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut contents = String::new();
    open_source(path)?.read_to_string(&mut contents)?;
    let mut table = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (class, gamma) = line.split_once(',').ok_or_else(|| {
            CliError::Runtime(format!("{path}:{}: expected `class,gamma`", i + 1))
        })?;
        let gamma: f64 = gamma.trim().parse().map_err(|_| {
            CliError::Runtime(format!("{path}:{}: bad gamma {gamma:?}", i + 1))
        })?;
        table.push((class.trim().to_string(), gamma));
    }
    Ok(table)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Train {
            data,
            target,
            kernel,
            nu1,
            nu2,
            epsilon,
            baseline_ocsvm,
            nu,
            model_out,
        } => cmd_train(
            cli,
            data,
            target.as_deref(),
            kernel,
            *nu1,
            *nu2,
            *epsilon,
            *baseline_ocsvm,
            *nu,
            model_out,
        ),
        Command::Predict { model, data } => cmd_predict(cli, model, data),
        Command::Eval {
            model,
            positives,
            negatives,
            data_format,
            label_column,
        } => cmd_eval(cli, model, positives, negatives, *data_format, label_column),
        Command::Toy {
            count,
            kernel,
            nu1,
            nu2,
            grid_out,
        } => cmd_toy(cli, *count, kernel, *nu1, *nu2, grid_out.as_deref()),
        Command::LetterBench {
            data,
            kernel,
            gamma_table,
            nu1,
            nu2,
            epsilon,
            nu,
            train_rows,
        } => cmd_letter_bench(
            cli,
            data,
            kernel,
            gamma_table.as_deref(),
            *nu1,
            *nu2,
            *epsilon,
            *nu,
            *train_rows,
        ),
        Command::GridSearch {
            data,
            target,
            kernels,
            gammas,
            nu1s,
            nu2s,
            epsilons,
            folds,
        } => cmd_grid_search(
            cli,
            data,
            target.as_deref(),
            kernels,
            gammas,
            nu1s,
            nu2s,
            epsilons,
            *folds,
        ),
        Command::KktReport {
            model,
            data,
            data_format,
            label_column,
            per_sample,
        } => cmd_kkt_report(
            cli,
            model,
            data.as_deref(),
            *data_format,
            label_column,
            *per_sample,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    cli: &Cli,
    data_args: &DataArgs,
    target: Option<&str>,
    kernel_args: &KernelArgs,
    nu1: f64,
    nu2: f64,
    epsilon: f64,
    baseline_ocsvm: bool,
    nu: f64,
    model_out: &str,
) -> Result<Outcome, CliError> {
    let kernel = kernel_spec(kernel_args)?;
    let dataset = load_dataset(data_args)?;
    let rows = training_rows(&dataset, target, data_args.data_format)?;
    let started = Instant::now();

    let mut record = Record::new();
    let converged;
    if baseline_ocsvm {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(CliError::Usage(format!("--nu {nu} must lie in (0, 1]")));
        }
        let model = slab::train_ocsvm(&rows, nu, kernel, &SolverConfig::default())?;
        slab::save_ocsvm_model(&model, Path::new(model_out))?;
        converged = model.converged();
        record
            .push("model", Value::Str("ocsvm".into()))
            .push("m", Value::Int(model.m() as i64))
            .push("rho", Value::Num(model.rho()))
            .push("n_sv", Value::Int(model.n_sv() as i64))
            .push("iterations", Value::Int(model.solver_iterations() as i64));
    } else {
        let config = SlabTrainConfig {
            nu1,
            nu2,
            epsilon,
            kernel,
            solver: SolverConfig::default(),
            sv_bound_tolerance: 1e-6,
        };
        config.validate().map_err(CliError::from)?;
        let model = slab::train_slab(&rows, &config)?;
        slab::save_slab_model(&model, Path::new(model_out))?;
        converged = model.converged();
        let (n_sv1, n_sv2) = model.n_sv();
        record
            .push("model", Value::Str("slab".into()))
            .push("m", Value::Int(model.m() as i64))
            .push("rho1", Value::Num(model.rho1()))
            .push("rho2", Value::Num(model.rho2()))
            .push("n_sv1", Value::Int(n_sv1 as i64))
            .push("n_sv2", Value::Int(n_sv2 as i64))
            .push("iterations", Value::Int(model.solver_iterations() as i64));
    }
    record
        .push("converged", Value::Str(converged.to_string()))
        .push("model_out", Value::Str(model_out.to_string()))
        .push(
            "train_seconds",
            Value::Num(started.elapsed().as_secs_f64()),
        );
    write_report(cli, &[record])?;
    Ok(if converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

fn cmd_predict(cli: &Cli, model_path: &str, data_args: &DataArgs) -> Result<Outcome, CliError> {
    let model = slab::load_model(Path::new(model_path))?;
    let dataset = match load_dataset(data_args) {
        Ok(d) => d,
        // Nothing to label is a success, not a failure.
        Err(CliError::Runtime(message))
            if message == DataError::Empty.to_string() =>
        {
            write_report(cli, &[])?;
            return Ok(Outcome::Done);
        }
        Err(e) => return Err(e),
    };
    let mut records = Vec::with_capacity(dataset.len());
    for row in dataset.features.iter_rows() {
        let (score, label) = match &model {
            AnyModel::Slab(m) => {
                let s = m.score(row)?;
                (s, if (s - m.rho1()) * (m.rho2() - s) > 0.0 { 1 } else { -1 })
            }
            AnyModel::Ocsvm(m) => {
                let s = m.score(row)?;
                (s, if s > m.rho() { 1 } else { -1 })
            }
        };
        let mut record = Record::new();
        record
            .push("label", Value::Int(label))
            .push("score", Value::Num(score));
        records.push(record);
    }
    write_report(cli, &records)?;
    Ok(Outcome::Done)
}

fn load_features(
    path: &str,
    format: DataFormat,
    label_column: &str,
) -> Result<FeatureMatrix, CliError> {
    let args = DataArgs {
        data: path.to_string(),
        data_format: format,
        label_column: label_column.to_string(),
    };
    Ok(load_dataset(&args)?.features)
}

fn report_record(record: &mut Record, report: &EvalReport) {
    record
        .push("tp", Value::Int(report.counts.true_positives as i64))
        .push("fp", Value::Int(report.counts.false_positives as i64))
        .push("tn", Value::Int(report.counts.true_negatives as i64))
        .push("fn", Value::Int(report.counts.false_negatives as i64))
        .push(
            "mcc",
            if report.mcc_defined {
                Value::Num(report.mcc)
            } else {
                Value::Undefined
            },
        )
        .push("precision", opt_num(report.precision))
        .push("recall", opt_num(report.recall))
        .push("f1", opt_num(report.f1));
}

fn cmd_eval(
    cli: &Cli,
    model_path: &str,
    positives: &str,
    negatives: &str,
    format: DataFormat,
    label_column: &str,
) -> Result<Outcome, CliError> {
    let model = slab::load_model(Path::new(model_path))?;
    let pos = load_features(positives, format, label_column)?;
    let neg = load_features(negatives, format, label_column)?;
    let report = match &model {
        AnyModel::Slab(m) => eval::one_vs_rest_eval(m, &pos, &neg)?,
        AnyModel::Ocsvm(m) => eval::one_vs_rest_eval(m, &pos, &neg)?,
    };
    let mut record = Record::new();
    report_record(&mut record, &report);
    write_report(cli, &[record])?;
    Ok(Outcome::Done)
}

const EPSILON_SWEEP: [(f64, &str); 5] = [
    (1.0 / 6.0, "1/6"),
    (2.0 / 6.0, "2/6"),
    (3.0 / 6.0, "3/6"),
    (4.0 / 6.0, "4/6"),
    (5.0 / 6.0, "5/6"),
];

fn cmd_toy(
    cli: &Cli,
    count: usize,
    kernel_args: &KernelArgs,
    nu1: f64,
    nu2: f64,
    grid_out: Option<&str>,
) -> Result<Outcome, CliError> {
    let kernel = kernel_spec(kernel_args)?;
    let mut toy = ToyConfig::standard(cli.seed);
    toy.count = count;
    // Away from the origin the linear Gram cannot be cancelled to zero
    // within the dual box, so the linear sweep trains a real slab; rbf
    // is translation invariant and unaffected.
    toy.mean = [25.0, 25.0];
    let dataset = data::sample_bivariate_normal(&toy)?;
    let x = &dataset.features;

    let mut records = Vec::new();
    let mut all_converged = true;
    let started = Instant::now();
    for &(epsilon, name) in &EPSILON_SWEEP {
        let config = SlabTrainConfig {
            nu1,
            nu2,
            epsilon,
            kernel,
            solver: SolverConfig::default(),
            sv_bound_tolerance: 1e-6,
        };
        config.validate().map_err(CliError::from)?;
        let model = slab::train_slab(x, &config)?;
        all_converged &= model.converged();
        let positives = x
            .iter_rows()
            .map(|row| model.predict(row))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .filter(|&&l| l == 1)
            .count();
        let mut record = Record::new();
        record
            .push("epsilon", Value::Str(name.to_string()))
            .push(
                "fraction_positive",
                Value::Num(positives as f64 / count as f64),
            )
            .push("rho1", Value::Num(model.rho1()))
            .push("rho2", Value::Num(model.rho2()))
            .push("iterations", Value::Int(model.solver_iterations() as i64))
            .push("converged", Value::Str(model.converged().to_string()));
        records.push(record);

        if let Some(path) = grid_out {
            if name == "4/6" {
                write_decision_grid(path, x, &model)?;
            }
        }
    }
    eprintln!(
        "toy sweep finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    write_report(cli, &records)?;
    Ok(if all_converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

/// 200x200 `x,y,score,label` CSV over the data bounds padded by 1.
fn write_decision_grid(
    path: &str,
    x: &FeatureMatrix,
    model: &ocslab_core::SlabModel,
) -> Result<(), CliError> {
    const STEPS: usize = 200;
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for row in x.iter_rows() {
        for d in 0..2 {
            min[d] = min[d].min(row[d]);
            max[d] = max[d].max(row[d]);
        }
    }
    let mut out = String::from("x,y,score,label\n");
    for i in 0..STEPS {
        for j in 0..STEPS {
            let gx = min[0] - 1.0 + (max[0] - min[0] + 2.0) * i as f64 / (STEPS - 1) as f64;
            let gy = min[1] - 1.0 + (max[1] - min[1] + 2.0) * j as f64 / (STEPS - 1) as f64;
            let s = model.score(&[gx, gy])?;
            let label = if (s - model.rho1()) * (model.rho2() - s) > 0.0 {
                1
            } else {
                -1
            };
            out.push_str(&format!("{gx},{gy},{s},{label}\n"));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_letter_bench(
    cli: &Cli,
    data_path: &str,
    kernel_args: &KernelArgs,
    gamma_table: Option<&str>,
    nu1: f64,
    nu2: f64,
    epsilon: f64,
    nu: f64,
    train_rows: usize,
) -> Result<Outcome, CliError> {
    let family = KernelFamily::from_str(&kernel_args.kernel)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let dataset = data::load_letter(open_source(data_path)?)?;
    let classes = dataset.classes();
    let overrides = match gamma_table {
        Some(path) => {
            let table = load_gamma_table(path)?;
            for (class, _) in &table {
                if !classes.contains(class) {
                    return Err(CliError::Runtime(format!(
                        "gamma table names unknown class {class:?}"
                    )));
                }
            }
            table
        }
        None => Vec::new(),
    };

    let kernels: Vec<(String, KernelSpec)> = classes
        .iter()
        .map(|class| {
            let spec = if family == KernelFamily::Rbf {
                let gamma = overrides
                    .iter()
                    .find(|(c, _)| c == class)
                    .map(|(_, g)| *g)
                    .or(kernel_args.gamma)
                    .or_else(|| default_gamma(class))
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "no gamma for class {class:?}; pass --gamma or --gamma-table"
                        ))
                    })?;
                KernelSpec::rbf(gamma).map_err(|e| CliError::Usage(e.to_string()))?
            } else {
                KernelSpec::new(family, kernel_args.gamma)
                    .map_err(|e| CliError::Usage(e.to_string()))?
            };
            Ok((class.clone(), spec))
        })
        .collect::<Result<_, CliError>>()?;

    let params = BenchParams {
        nu1,
        nu2,
        epsilon,
        nu,
        solver: SolverConfig::default(),
    };
    let split = SplitSpec::Boundary(train_rows);
    let started = Instant::now();
    let rows: Vec<Result<eval::ClassBenchRow, CliError>> = kernels
        .par_iter()
        .map(|(class, spec)| {
            eval::benchmark_class(&dataset, class, split, *spec, &params).map_err(CliError::from)
        })
        .collect();
    eprintln!(
        "letter benchmark finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );

    let mut records = Vec::new();
    let mut slab_mccs = Vec::new();
    let mut baseline_mccs = Vec::new();
    let mut all_converged = true;
    for row in rows {
        let row = row?;
        all_converged &= row.slab_converged && row.baseline_converged;
        slab_mccs.push(row.slab.mcc);
        baseline_mccs.push(row.baseline.mcc);
        let mut record = Record::new();
        record
            .push("class", Value::Str(row.class.clone()))
            .push("gamma", opt_num(row.gamma))
            .push("mcc_slab", Value::Num(row.slab.mcc))
            .push("mcc_baseline", Value::Num(row.baseline.mcc))
            .push("recall_slab", opt_num(row.slab.recall))
            .push("recall_baseline", opt_num(row.baseline.recall))
            .push("converged_slab", Value::Str(row.slab_converged.to_string()))
            .push(
                "converged_baseline",
                Value::Str(row.baseline_converged.to_string()),
            );
        records.push(record);
    }
    let mut median = Record::new();
    median
        .push("class", Value::Str("median".into()))
        .push("gamma", Value::Undefined)
        .push("mcc_slab", opt_num(eval::lower_median(&slab_mccs)))
        .push("mcc_baseline", opt_num(eval::lower_median(&baseline_mccs)))
        .push("recall_slab", Value::Undefined)
        .push("recall_baseline", Value::Undefined)
        .push("converged_slab", Value::Str(all_converged.to_string()))
        .push("converged_baseline", Value::Str(all_converged.to_string()));
    records.push(median);
    write_report(cli, &records)?;
    Ok(if all_converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_grid_search(
    cli: &Cli,
    data_args: &DataArgs,
    target: Option<&str>,
    kernels: &[String],
    gammas: &[f64],
    nu1s: &[f64],
    nu2s: &[f64],
    epsilons: &[f64],
    folds: usize,
) -> Result<Outcome, CliError> {
    let dataset = load_dataset(data_args)?;
    let rows = training_rows(&dataset, target, data_args.data_format)?;

    let mut specs = Vec::new();
    for name in kernels {
        let family =
            KernelFamily::from_str(name).map_err(|e| CliError::Usage(e.to_string()))?;
        if family == KernelFamily::Rbf {
            for &g in gammas {
                specs.push(KernelSpec::rbf(g).map_err(|e| CliError::Usage(e.to_string()))?);
            }
        } else {
            specs.push(
                KernelSpec::new(family, None).map_err(|e| CliError::Usage(e.to_string()))?,
            );
        }
    }
    let spec = GridSearchSpec {
        kernels: specs,
        nu1: nu1s.to_vec(),
        nu2: nu2s.to_vec(),
        epsilon: epsilons.to_vec(),
        folds,
        seed: cli.seed,
        solver: SolverConfig::default(),
    };
    spec.validate()?;

    // Evaluate cells in parallel, then rank exactly as the library does:
    // descending mean recall, grid order on ties and failures.
    let points = spec.configurations();
    let mut results: Vec<(usize, eval::GridSearchResult)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            (
                i,
                eval::evaluate_grid_point(&rows, p, spec.folds, spec.seed, &spec.solver),
            )
        })
        .collect();
    results.sort_by(|(ia, a), (ib, b)| {
        b.mean_recall
            .unwrap_or(f64::NEG_INFINITY)
            .partial_cmp(&a.mean_recall.unwrap_or(f64::NEG_INFINITY))
            .unwrap()
            .then(ia.cmp(ib))
    });

    let mut records = Vec::new();
    for (rank, (_, result)) in results.iter().enumerate() {
        let mut record = Record::new();
        record
            .push("rank", Value::Int(rank as i64 + 1))
            .push(
                "kernel",
                Value::Str(result.point.kernel.family().name().to_string()),
            )
            .push("gamma", opt_num(result.point.kernel.gamma()))
            .push("nu1", Value::Num(result.point.nu1))
            .push("nu2", Value::Num(result.point.nu2))
            .push("epsilon", Value::Num(result.point.epsilon))
            .push("mean_recall", opt_num(result.mean_recall))
            .push(
                "error",
                result
                    .error
                    .as_ref()
                    .map(|e| Value::Str(e.clone()))
                    .unwrap_or(Value::Undefined),
            );
        records.push(record);
    }
    write_report(cli, &records)?;
    Ok(Outcome::Done)
}

fn cmd_kkt_report(
    cli: &Cli,
    model_path: &str,
    data_path: Option<&str>,
    format: DataFormat,
    label_column: &str,
    per_sample: bool,
) -> Result<Outcome, CliError> {
    let model = match slab::load_model(Path::new(model_path))? {
        AnyModel::Slab(m) => m,
        AnyModel::Ocsvm(_) => {
            return Err(CliError::Usage(
                "the KKT case report applies to slab models only".into(),
            ))
        }
    };
    // The case analysis reads the model's stored training rows; --data is
    // an optional consistency check that the right file is paired with it.
    if let Some(path) = data_path {
        let supplied = load_features(path, format, label_column)?;
        if &supplied != model.training_rows() {
            return Err(CliError::Runtime(format!(
                "{path} does not match the model's training rows"
            )));
        }
    }
    let gram =
        ocslab_core::kernels::gram_matrix(model.kernel(), model.training_rows())?;
    let report = slab::classify_kkt_cases(&model, &gram).map_err(CliError::from)?;

    let records = if per_sample {
        report
            .labels
            .iter()
            .enumerate()
            .map(|(i, case)| {
                let mut record = Record::new();
                record
                    .push("index", Value::Int(i as i64))
                    .push("case", Value::Str(case.name().to_string()))
                    .push("score", Value::Num(report.scores[i]))
                    .push("xi", Value::Num(report.xi[i]))
                    .push("xi_bar", Value::Num(report.xi_bar[i]));
                record
            })
            .collect()
    } else {
        let mut record = Record::new();
        record.push("m", Value::Int(model.m() as i64));
        for case in KktCase::ALL {
            record.push(case.name(), Value::Int(report.count(case) as i64));
        }
        vec![record]
    };
    write_report(cli, &records)?;
    Ok(Outcome::Done)
}
