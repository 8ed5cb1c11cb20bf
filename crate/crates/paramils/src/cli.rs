use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use paramils_core::evaluation::select_best_of_k;
use paramils_core::stats::paired_wilcoxon;

use crate::driver::{Inputs, RunResult};
use crate::error::{Error, Result};
use crate::report::{self, EvaluationSummary, RunSummary, Summary};
use crate::scenario::{parse_override, Scenario};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "paramils", version, about = "Iterated local search in algorithm parameter spaces")]
pub struct Cli {
    /// Output directory
    #[arg(long, global = true, default_value = "paramils-out")]
    pub out: PathBuf,
    /// Overwrite existing output files
    #[arg(long, global = true)]
    pub force: bool,
    /// Master seed (same as `--set seed=N`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a scenario key
    #[arg(long = "set", value_name = "KEY=VALUE", global = true, value_parser = parse_override)]
    pub set: Vec<(String, String)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a good configuration
    Configure {
        scenario: PathBuf,
        /// Independent runs; the best one by training cost is reported
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
    },
    /// Measure a configuration on the test instances
    Evaluate { scenario: PathBuf, config: PathBuf },
    /// Compare the per-run test costs of two `configure` outputs
    Compare { first: PathBuf, second: PathBuf },
    /// Check scenario files and everything they reference
    Validate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

impl Cli {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = self.set.clone();
        if let Some(seed) = self.seed {
            o.push(("seed".into(), seed.to_string()));
        }
        o
    }

    fn inputs(&self, scenario: &Path) -> Result<Inputs> {
        Inputs::load(Scenario::load(scenario, &self.overrides())?)
    }
}

/// Executes a parsed command line, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let print = |out: &mut dyn Write, text: String| {
        out.write_all(text.as_bytes()).map_err(|source| Error::Write { path: "<stdout>".into(), source })
    };
    match &cli.command {
        Command::Validate { scenarios } => {
            for path in scenarios {
                let inputs = cli.inputs(path)?;
                print(
                    out,
                    format!(
                        "{}: ok ({} parameters, {} assignments, {} training / {} test instances)\n",
                        path.display(),
                        inputs.space.len(),
                        inputs.space.assignment_count(),
                        inputs.train.len(),
                        inputs.test.as_ref().map_or(0, |t| t.len()),
                    ),
                )?;
            }
            Ok(())
        }
        Command::Configure { scenario, runs } => {
            let inputs = cli.inputs(scenario)?;
            let k = *runs as usize;
            let mut files = vec![PathBuf::from("summary.json"), PathBuf::from("best.cfg")];
            for i in 0..k {
                let dir = PathBuf::from(format!("run-{i}"));
                files.extend(["trajectory.csv", "incumbent.cfg", "evaluation.csv"].map(|f| dir.join(f)));
            }
            prepare_output(&cli.out, &files, cli.force)?;
            let results = inputs.configure(k)?;
            let summary = write_configure(&cli.out, &inputs, &results)?;
            let best = &summary.runs[summary.best_run];
            let mut text = format!(
                "best run: {} (seed {}, train PAR {}, test PAR {})\n",
                best.run,
                best.seed,
                fmt_opt(best.train_par),
                fmt_opt(best.test_par)
            );
            text += &report::config_text(&inputs.space, &results[summary.best_run].outcome.incumbent);
            print(out, text)
        }
        Command::Evaluate { scenario, config } => {
            let inputs = cli.inputs(scenario)?;
            let text = report::read_file(config)?;
            let config = report::parse_config(&inputs.space, &text, config)?;
            prepare_output(&cli.out, &[PathBuf::from("evaluation.csv"), PathBuf::from("evaluation.json")], cli.force)?;
            let rep = inputs.evaluate(&config)?;
            report::write_file(&cli.out.join("evaluation.csv"), &report::evaluation_csv(&rep))?;
            let summary = EvaluationSummary::new(&inputs.space, &rep);
            report::write_file(&cli.out.join("evaluation.json"), &report::to_json(&summary))?;
            print(out, format!("test PAR {} over {} runs ({} timeouts)\n", rep.test_par, rep.runs.len(), rep.timeouts))
        }
        Command::Compare { first, second } => {
            let a = test_pars(first)?;
            let b = test_pars(second)?;
            let w = paired_wilcoxon(&a, &b)?;
            let verdict = if w.n_effective == 0 {
                "no difference".to_string()
            } else if w.p_value < SIGNIFICANCE {
                let better = if w.w_plus < w.w_minus { first } else { second };
                format!("significant difference at {SIGNIFICANCE}: {} is better", better.display())
            } else {
                format!("no significant difference at {SIGNIFICANCE}")
            };
            print(out, format!("p = {}\n{verdict}\n", w.p_value))
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| v.to_string())
}

fn test_pars(dir: &Path) -> Result<Vec<f64>> {
    let summary = report::read_summary(&dir.join("summary.json"))?;
    summary
        .runs
        .iter()
        .map(|r| {
            r.test_par
                .ok_or_else(|| Error::Invalid(format!("{}: run {} has no test PAR", dir.display(), r.run)))
        })
        .collect()
}

/// Creates `dir` and refuses to clobber any of `files` unless `force`.
fn prepare_output(dir: &Path, files: &[PathBuf], force: bool) -> Result<()> {
    if !force {
        if let Some(existing) = files.iter().map(|f| dir.join(f)).find(|p| p.exists()) {
            return Err(Error::OutputExists(existing));
        }
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.into(), source })
}

fn write_configure(dir: &Path, inputs: &Inputs, results: &[RunResult]) -> Result<Summary> {
    let space = &inputs.space;
    let mut runs = Vec::new();
    for r in results {
        let run_dir = dir.join(format!("run-{}", r.index));
        std::fs::create_dir_all(&run_dir).map_err(|source| Error::Write { path: run_dir.clone(), source })?;
        report::write_file(&run_dir.join("trajectory.csv"), &report::trajectory_csv(r.seed, &r.trajectory))?;
        report::write_file(&run_dir.join("incumbent.cfg"), &report::config_text(space, &r.outcome.incumbent))?;
        if let Some(test) = &r.test {
            report::write_file(&run_dir.join("evaluation.csv"), &report::evaluation_csv(test))?;
        }
        runs.push(RunSummary {
            run: r.index,
            seed: r.seed,
            incumbent_id: r.outcome.incumbent.id(),
            incumbent: report::assignment(space, &r.outcome.incumbent),
            train_par: r.train_par.is_finite().then_some(r.train_par),
            train_runs: r.train_runs,
            iterations: r.outcome.iterations,
            stop: format!("{:?}", r.outcome.stop).to_lowercase(),
            target_s: r.target_s,
            executed_runs: r.executed_runs,
            test_par: r.test.as_ref().map(|t| t.test_par),
            test_timeouts: r.test.as_ref().map(|t| t.timeouts),
        });
    }
    let estimates: Vec<f64> = results.iter().map(|r| r.train_par).collect();
    let best_run = select_best_of_k(&estimates).expect("at least one run");
    let summary = Summary {
        master_seed: inputs.master_seed,
        strategy: inputs.scenario.strategy.as_str().into(),
        capping: inputs.scenario.capping.as_str().into(),
        best_run,
        runs,
    };
    report::write_file(&dir.join("summary.json"), &report::to_json(&summary))?;
    report::write_file(&dir.join("best.cfg"), &report::config_text(space, &results[best_run].outcome.incumbent))?;
    Ok(summary)
}
