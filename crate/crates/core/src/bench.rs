//! Benchmark harness: every (game, solver, repetition) cell is an independent
//! deterministic solve, run on a worker pool and reported in config order.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descent::{self, SolveConfig};
use crate::error::{BenchError, GameError, IoError};
use crate::game::{is_delta_ne, regret_col, regret_row, PayoffMatrix, StrategyProfile};
use crate::generators::{generate, GameSpec, PRNG_NAME};
use crate::io::{write_json, write_text};
use crate::ogda::{ogda_solve, OgdaConfig};
use crate::trace::{Outcome, SolveTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SolverSpec {
    Descent {
        #[serde(default)]
        name: Option<String>,
        config: SolveConfig,
    },
    Ogda {
        #[serde(default)]
        name: Option<String>,
        config: OgdaConfig,
    },
}

impl SolverSpec {
    pub fn name(&self) -> String {
        match self {
            SolverSpec::Descent { name, config } => name.clone().unwrap_or_else(|| config.solver_name()),
            SolverSpec::Ogda { name, .. } => name.clone().unwrap_or_else(|| "ogda".into()),
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            SolverSpec::Descent { config, .. } => config.delta,
            SolverSpec::Ogda { config, .. } => config.delta,
        }
    }

    pub fn run(&self, r: &PayoffMatrix) -> Result<(StrategyProfile, SolveTrace), crate::SolveError> {
        let (z, mut trace) = match self {
            SolverSpec::Descent { config, .. } => descent::solve(r, config)?,
            SolverSpec::Ogda { config, .. } => ogda_solve(r, config)?,
        };
        trace.metadata.solver = self.name();
        Ok((z, trace))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verbosity {
    /// Summary table and metadata only.
    Summary,
    /// Also one trace CSV per cell.
    #[default]
    Full,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub specs: Vec<GameSpec>,
    pub solvers: Vec<SolverSpec>,
    /// Repetition `r` uses the spec's seed plus `r`.
    #[serde(default = "one")]
    pub repetitions: usize,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub verbosity: Verbosity,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.specs.is_empty() {
            return Err(BenchError::Config("no game specs".into()));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::Config("no solvers".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(BenchError::Config("threads must be at least 1".into()));
        }
        for spec in &self.specs {
            spec.validate().map_err(|e| BenchError::Config(format!("{}: {e}", spec.describe())))?;
        }
        for solver in &self.solvers {
            let checked = match solver {
                SolverSpec::Descent { config, .. } => config.validate(),
                SolverSpec::Ogda { config, .. } => config.validate(),
            };
            checked.map_err(|e| BenchError::Config(format!("{}: {e}", solver.name())))?;
        }
        Ok(())
    }
}

/// Result of one cell. `error` holds solver or I/O failures; a run that hits
/// its iteration cap is not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub spec: GameSpec,
    pub solver: String,
    pub repetition: usize,
    pub outcome: Option<Outcome>,
    pub stalled: bool,
    pub iterations: usize,
    pub final_gap: f64,
    /// Whether a converged profile passed [`verify`] at the solver's delta.
    pub verified: Option<bool>,
    pub trace_file: Option<PathBuf>,
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub size: String,
    pub variant: String,
    pub repetitions: usize,
    pub mean_iterations: f64,
    pub median_iterations: f64,
    pub convergence_rate: f64,
    pub mean_final_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

impl BenchReport {
    pub fn summary_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.summary {
            writer.serialize(row).expect("writing to memory");
        }
        if self.summary.is_empty() {
            writer
                .write_record([
                    "family", "size", "variant", "repetitions", "mean_iterations",
                    "median_iterations", "convergence_rate", "mean_final_gap",
                ])
                .expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    pub fn failed_cells(&self) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(|c| c.error.is_some())
    }
}

#[derive(Serialize)]
struct BenchMetadata<'a> {
    prng: &'a str,
    config: &'a BenchConfig,
    wall_clock_seconds: f64,
    cells: &'a [CellResult],
}

/// Duality gap, regrets and the delta-equilibrium verdict of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub delta: f64,
    pub duality_gap: f64,
    pub regret_row: f64,
    pub regret_col: f64,
    pub is_delta_ne: bool,
}

pub fn verify(r: &PayoffMatrix, z: &StrategyProfile, delta: f64) -> Result<Verdict, GameError> {
    let regret_row = regret_row(r, z)?;
    let regret_col = regret_col(r, z)?;
    Ok(Verdict {
        delta,
        duality_gap: regret_row + regret_col,
        regret_row,
        regret_col,
        is_delta_ne: is_delta_ne(r, z, delta)?,
    })
}

fn trace_file_name(spec_index: usize, spec: &GameSpec, solver_index: usize, solver: &str, rep: usize) -> String {
    format!(
        "trace-{spec_index:03}-{}-{}x{}-seed{}-{solver_index:02}-{solver}-rep{rep}.csv",
        spec.family.name(),
        spec.rows,
        spec.cols,
        spec.seed
    )
}

fn run_cell(config: &BenchConfig, spec_index: usize, solver_index: usize, rep: usize) -> CellResult {
    let started = Instant::now();
    let spec = GameSpec {
        seed: config.specs[spec_index].seed.wrapping_add(rep as u64),
        ..config.specs[spec_index]
    };
    let solver = &config.solvers[solver_index];
    let mut cell = CellResult {
        spec,
        solver: solver.name(),
        repetition: rep,
        outcome: None,
        stalled: false,
        iterations: 0,
        final_gap: f64::NAN,
        verified: None,
        trace_file: None,
        error: None,
        wall_clock_seconds: 0.0,
    };
    let solved = generate(&spec)
        .map_err(crate::SolveError::from)
        .and_then(|r| solver.run(&r).map(|out| (r, out)));
    match solved {
        Err(e) => cell.error = Some(e.to_string()),
        Ok((r, (z, mut trace))) => {
            trace.metadata.generator = Some(format!("{} ({PRNG_NAME})", spec.describe()));
            cell.outcome = Some(trace.outcome);
            cell.stalled = trace.stalled;
            cell.iterations = trace.len();
            cell.final_gap = trace.final_gap;
            if trace.converged() {
                cell.verified = verify(&r, &z, solver.delta()).ok().map(|v| v.is_delta_ne);
            }
            if config.verbosity == Verbosity::Full {
                let path = config
                    .out_dir
                    .join(trace_file_name(spec_index, &config.specs[spec_index], solver_index, &cell.solver, rep));
                match write_text(&path, &trace.to_csv_string()) {
                    Ok(()) => cell.trace_file = Some(path),
                    Err(e) => cell.error = Some(e.to_string()),
                }
            }
        }
    }
    cell.wall_clock_seconds = started.elapsed().as_secs_f64();
    cell
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn summarize(config: &BenchConfig, cells: &[CellResult]) -> Vec<SummaryRow> {
    let reps = config.repetitions;
    let mut rows = Vec::new();
    // cells are ordered spec-major, then solver, then repetition
    for (group, spec) in cells.chunks(reps).zip(
        config
            .specs
            .iter()
            .flat_map(|s| std::iter::repeat_n(s, config.solvers.len())),
    ) {
        let mut iterations: Vec<f64> = group.iter().map(|c| c.iterations as f64).collect();
        iterations.sort_by(f64::total_cmp);
        let converged = group.iter().filter(|c| c.outcome == Some(Outcome::Converged)).count();
        let gaps: Vec<f64> = group.iter().map(|c| c.final_gap).filter(|g| g.is_finite()).collect();
        rows.push(SummaryRow {
            family: spec.family.name(),
            size: format!("{}x{}", spec.rows, spec.cols),
            variant: group[0].solver.clone(),
            repetitions: reps,
            mean_iterations: iterations.iter().sum::<f64>() / reps as f64,
            median_iterations: median(&iterations),
            convergence_rate: converged as f64 / reps as f64,
            mean_final_gap: if gaps.is_empty() {
                f64::NAN
            } else {
                gaps.iter().sum::<f64>() / gaps.len() as f64
            },
        });
    }
    rows
}

/// Runs every cell, then writes `summary.csv` and `metadata.json` into the
/// output directory. Cell failures are recorded in the report, not raised.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let started = Instant::now();
    std::fs::create_dir_all(&config.out_dir).map_err(|source| IoError::Io {
        path: config.out_dir.display().to_string(),
        source,
    })?;
    let cells: Vec<(usize, usize, usize)> = (0..config.specs.len())
        .flat_map(|s| (0..config.solvers.len()).flat_map(move |v| (0..config.repetitions).map(move |r| (s, v, r))))
        .collect();
    let work = || -> Vec<CellResult> {
        cells
            .par_iter()
            .map(|&(s, v, r)| run_cell(config, s, v, r))
            .collect()
    };
    let results = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| BenchError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let report = BenchReport {
        summary: summarize(config, &results),
        cells: results,
    };
    write_text(&config.out_dir.join("summary.csv"), &report.summary_csv())?;
    write_json(
        &config.out_dir.join("metadata.json"),
        &BenchMetadata {
            prng: PRNG_NAME,
            config,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            cells: &report.cells,
        },
    )?;
    Ok(report)
}

/// Path of the summary table inside an output directory.
pub fn summary_path(out_dir: &Path) -> PathBuf {
    out_dir.join("summary.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::Initialization;
    use crate::generators::GameFamily;

    fn small_config(out_dir: PathBuf) -> BenchConfig {
        BenchConfig {
            specs: vec![
                GameSpec::uniform(8, 1),
                GameSpec {
                    family: GameFamily::Gaussian,
                    rows: 6,
                    cols: 9,
                    seed: 7,
                },
            ],
            solvers: vec![
                SolverSpec::Descent {
                    name: None,
                    config: SolveConfig::plain(0.05, 0.2),
                },
                SolverSpec::Ogda {
                    name: Some("ogda-uniform".into()),
                    config: OgdaConfig {
                        delta: 0.05,
                        alpha: 0.05,
                        initialization: Initialization::Uniform,
                        ..OgdaConfig::default()
                    },
                },
            ],
            repetitions: 3,
            out_dir,
            verbosity: Verbosity::Full,
            threads: Some(2),
        }
    }

    #[test]
    fn cell_arithmetic_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_config(dir.path().join("out"));
        let report = run_bench(&config).unwrap();
        assert_eq!(report.cells.len(), 12);
        assert_eq!(report.summary.len(), 4);
        let traces = std::fs::read_dir(&config.out_dir)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trace-"))
            .count();
        assert_eq!(traces, 12);
        assert!(report.failed_cells().next().is_none());
        for cell in &report.cells {
            if cell.outcome == Some(Outcome::Converged) {
                assert_eq!(cell.verified, Some(true));
            }
        }
        let first = std::fs::read(summary_path(&config.out_dir)).unwrap();
        run_bench(&config).unwrap();
        let second = std::fs::read(summary_path(&config.out_dir)).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with(
            "family,size,variant,repetitions,mean_iterations,median_iterations,convergence_rate,mean_final_gap\n"
        ));
    }

    #[test]
    fn summary_verbosity_writes_no_traces() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config(dir.path().to_path_buf());
        config.verbosity = Verbosity::Summary;
        config.repetitions = 1;
        let report = run_bench(&config).unwrap();
        assert!(report.cells.iter().all(|c| c.trace_file.is_none()));
        assert!(dir.path().join("summary.csv").exists());
        assert!(dir.path().join("metadata.json").exists());
    }

    #[test]
    fn rejects_empty_configs() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small_config(dir.path().to_path_buf());
        config.solvers.clear();
        assert!(matches!(run_bench(&config), Err(BenchError::Config(_))));
        let mut config = small_config(dir.path().to_path_buf());
        config.repetitions = 0;
        assert!(matches!(run_bench(&config), Err(BenchError::Config(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let config = small_config(PathBuf::from("out"));
        let json = serde_json::to_string_pretty(&config).unwrap();
        assert_eq!(serde_json::from_str::<BenchConfig>(&json).unwrap(), config);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[1.0, 2.0, 10.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0, 4.0, 10.0]), 3.0);
    }
}
