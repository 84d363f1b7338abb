//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use pacmix::bench::{
    self, linear_model_spec, nonlinear_model_spec, run_comparison, transfer_spec, Method,
};
use pacmix::bound::{minimize_bound, pac_bound};
use pacmix::dataset::LabeledDataset;
use pacmix::datagen::{self, SyntheticTask};
use pacmix::hdr::{fit_task_priors, hdr_learn_prior, hdr_posterior};
use pacmix::mixture::{self, MixtureDistribution};
use pacmix::models::generate_candidates;
use pacmix::sbs::{sbs_run, LabelSource};
use pacmix::seeds;

use crate::artifact::{RunArtifact, SCHEMA_VERSION};
use crate::config::{load_toml, FitConfig, SimulateConfig};
use crate::CliError;

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::Io(format!("cannot move {} into place: {e}", path.display()))
    })
}

pub fn cmd_simulate(config_path: &Path, out: &Path, seed: u64) -> Result<(), CliError> {
    let config: SimulateConfig = load_toml(config_path)?;
    if config.count == 0 {
        return Err(CliError::Config("count must be at least 1".into()));
    }
    ensure_out_dir(out)?;
    let spec = config.dataset.to_spec(seed)?;
    if config.count == 1 {
        let data = datagen::generate(&spec)?;
        write_atomic(&out.join("dataset.csv"), &data.dataset.to_csv())?;
        println!("wrote {}", out.join("dataset.csv").display());
    } else {
        let family = datagen::task_family(&spec, config.count, seed)?;
        for (i, data) in family.iter().enumerate() {
            let path = out.join(format!("task_{i:02}.csv"));
            write_atomic(&path, &data.dataset.to_csv())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn read_datasets(paths: &[PathBuf]) -> Result<Vec<LabeledDataset>, CliError> {
    paths
        .iter()
        .map(|p| LabeledDataset::read_csv(p).map_err(CliError::from))
        .collect()
}

pub fn cmd_fit(
    method: &str,
    config_path: Option<&Path>,
    data_paths: &[PathBuf],
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let method: Method = method.parse().map_err(|e: pacmix::Error| CliError::Config(e.to_string()))?;
    let config: FitConfig = match config_path {
        Some(p) => load_toml(p)?,
        None => FitConfig::default(),
    };
    let candidate_cfg = config.candidates.to_config()?;
    ensure_out_dir(out)?;

    let artifact = match method {
        Method::Rbm | Method::Baseline => {
            let [train] = read_datasets(data_paths)?.try_into().map_err(|_| {
                CliError::Config(format!("method {method} needs exactly one data csv"))
            })?;
            let bound_cfg = config.bound.to_config(&train);
            let pool = generate_candidates(&train, &candidate_cfg)?.pool;
            let prior = MixtureDistribution::uniform(&pool);
            let (posterior, report) = if method == Method::Rbm {
                minimize_bound(&prior, &pool, &train, &bound_cfg)?
            } else {
                let point = bench::baseline_select_single(
                    &pool,
                    &train,
                    config.baseline.folds,
                    seeds::mix(seed, 4),
                )?;
                let report = pac_bound(&point, &prior, &pool, &train, &bound_cfg)?;
                (point, report)
            };
            RunArtifact {
                schema_version: SCHEMA_VERSION,
                method: method.to_string(),
                seed,
                config_echo: json!(config),
                pool,
                prior,
                posterior,
                report,
                weights: None,
                trace: None,
            }
        }
        Method::Sbs => {
            let section = config.sbs.as_ref().ok_or_else(|| {
                CliError::Config("method sbs needs an [sbs] config section".into())
            })?;
            let sbs_cfg = section.to_config(&config.bound);
            let source = match (&section.generator, data_paths) {
                (Some(gen), []) => {
                    LabelSource::Generator(SyntheticTask::new(gen.to_spec(seeds::mix(seed, 2))?)?)
                }
                (None, [pool_path]) => {
                    LabelSource::Pool(LabeledDataset::read_csv(pool_path)?)
                }
                _ => {
                    return Err(CliError::Config(
                        "method sbs needs either [sbs.generator] or exactly one pool csv".into(),
                    ))
                }
            };
            let run = sbs_run(&source, &candidate_cfg, &sbs_cfg, seeds::mix(seed, 2))?;
            let report = run.trace.last().expect("trace nonempty").report;
            let prior = MixtureDistribution::uniform(&run.pool);
            RunArtifact {
                schema_version: SCHEMA_VERSION,
                method: method.to_string(),
                seed,
                config_echo: json!(config),
                pool: run.pool,
                prior,
                posterior: run.posterior,
                report,
                weights: None,
                trace: Some(run.trace),
            }
        }
        Method::Hdr => {
            let datasets = read_datasets(data_paths)?;
            if datasets.len() < 3 {
                return Err(CliError::Config(
                    "method hdr needs at least two historical csvs plus the new task csv \
                     (history..., new_task)"
                        .into(),
                ));
            }
            let (new_task, history) = datasets.split_last().expect("nonempty");
            let hdr_cfg = config.hdr.to_config()?;
            let bound_cfg = config.bound.to_config(new_task);
            let bundles =
                fit_task_priors(history, &candidate_cfg, &bound_cfg, hdr_cfg.split_fraction)?;
            let (combined, weights) = hdr_learn_prior(
                &bundles,
                &candidate_cfg,
                &bound_cfg,
                &hdr_cfg,
                seeds::mix(seed, 5),
            )?;
            let fitted = hdr_posterior(&combined, new_task, &candidate_cfg, &bound_cfg)?;
            RunArtifact {
                schema_version: SCHEMA_VERSION,
                method: method.to_string(),
                seed,
                config_echo: json!(config),
                pool: fitted.pool,
                prior: combined,
                posterior: fitted.posterior,
                report: fitted.report,
                weights: Some(weights),
                trace: None,
            }
        }
    };

    let path = out.join("artifact.json");
    artifact.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_eval(
    artifact_path: &Path,
    test_csv: Option<&Path>,
    test_spec: Option<&Path>,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let artifact = RunArtifact::load(artifact_path)?;
    ensure_out_dir(out)?;

    let (features, truth, kind) = match (test_csv, test_spec) {
        (Some(csv), None) => {
            let test = LabeledDataset::read_csv(csv)?;
            let truth = test.scalar_responses()?.to_vec();
            (test.features().to_vec(), truth, "predictive")
        }
        (None, Some(spec_path)) => {
            let config: SimulateConfig = load_toml(spec_path)?;
            let spec = config.dataset.to_spec(seeds::mix(seed, 0x7E57))?;
            let task = SyntheticTask::new(spec.clone())?;
            let mut rng = seeds::stream_rng(spec.seed, seeds::TEST, 0);
            let features = task.sample_features(spec.n, &mut rng);
            let truth: Vec<f64> = features.iter().map(|x| task.noiseless(x)).collect();
            (features, truth, "noiseless")
        }
        _ => {
            return Err(CliError::Config(
                "eval needs exactly one of --test-csv or --test-spec".into(),
            ))
        }
    };

    let mspe = bench::mspe(&artifact.posterior, &artifact.pool, &features, &truth)?;
    let volatility = mixture::volatility(&artifact.posterior, &artifact.pool, &features)?;

    let mut csv = String::from("method,mspe_kind,mspe,volatility,bound_total,kl_total\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{}",
        artifact.method, kind, mspe, volatility, artifact.report.total, artifact.report.kl_total
    );
    let path = out.join("eval.csv");
    write_atomic(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

struct TableCell {
    label: String,
    spec: bench::ExperimentSpec,
}

fn table_cells(table: &str) -> Result<(Vec<TableCell>, Vec<Method>), CliError> {
    let grid = |model: usize| -> Result<Vec<TableCell>, CliError> {
        [(0.0, 1.0), (0.0, 5.0), (0.9, 1.0), (0.9, 5.0)]
            .iter()
            .map(|&(rho, sigma)| {
                Ok(TableCell {
                    label: format!("rho{rho}_sigma{sigma}"),
                    spec: linear_model_spec(model, rho, sigma)?,
                })
            })
            .collect()
    };
    let compare = vec![Method::Rbm, Method::Sbs, Method::Baseline];
    match table {
        "t2" => Ok((grid(1)?, compare)),
        "t3" => Ok((grid(2)?, compare)),
        "t4" => Ok((grid(3)?, compare)),
        "t5" => {
            let cells = (1..=2)
                .map(|which| {
                    Ok(TableCell {
                        label: format!("model{which}"),
                        spec: nonlinear_model_spec(which)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((cells, compare))
        }
        "fig3" => {
            let cells = (1..=5)
                .map(|sigma| TableCell {
                    label: format!("sigma{sigma}"),
                    spec: transfer_spec(sigma as f64),
                })
                .collect();
            Ok((cells, vec![Method::Rbm, Method::Hdr, Method::Baseline]))
        }
        other => Err(CliError::Config(format!(
            "unknown table '{other}' (expected t2|t3|t4|t5|fig3)"
        ))),
    }
}

pub fn cmd_reproduce(table: &str, reps: usize, out: &Path, seed: u64) -> Result<(), CliError> {
    let (cells, methods) = table_cells(table)?;
    ensure_out_dir(out)?;

    let mut results = Vec::new();
    for (idx, cell) in cells.iter().enumerate() {
        let reports = run_comparison(&cell.spec, &methods, reps, seeds::mix(seed, idx as u64))?;
        results.push(reports);
    }

    // Summary: rows metric × method, one column per cell.
    let mut summary = String::from("metric,method");
    for cell in &cells {
        let _ = write!(summary, ",{}", cell.label);
    }
    summary.push('\n');
    for (metric, pick) in [
        ("mspe", 0usize),
        ("volatility", 1),
    ] {
        for &method in &methods {
            let _ = write!(summary, "{metric},{method}");
            for reports in &results {
                let r = &reports[&method];
                let value = if pick == 0 { r.mean_mspe } else { r.mean_volatility };
                let _ = write!(summary, ",{value}");
            }
            summary.push('\n');
        }
    }
    let summary_path = out.join(format!("{table}_summary.csv"));
    write_atomic(&summary_path, &summary)?;

    // Long per-repetition records.
    let mut long = String::from("cell,rep,method,mspe,volatility,bound_total,kl_total\n");
    for (cell, reports) in cells.iter().zip(&results) {
        for report in reports.values() {
            for record in &report.per_rep {
                let _ = writeln!(
                    long,
                    "{},{},{},{},{},{},{}",
                    cell.label,
                    record.rep,
                    report.method,
                    record.mspe,
                    record.volatility,
                    record.bound.total,
                    record.bound.kl_total
                );
            }
        }
    }
    let reps_path = out.join(format!("{table}_reps.csv"));
    write_atomic(&reps_path, &long)?;
    println!("wrote {}", summary_path.display());
    println!("wrote {}", reps_path.display());

    // Plot data for the noise sweep: one two-column file per method.
    if table == "fig3" {
        for &method in &methods {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .zip(&results)
                .map(|(cell, reports)| {
                    let sigma: f64 = cell.label.trim_start_matches("sigma").parse().unwrap();
                    (sigma, reports[&method].mean_mspe)
                })
                .collect();
            let path = out.join(format!("fig3_{method}.csv"));
            write_atomic(&path, &bench::plot_csv("sigma", &points))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
