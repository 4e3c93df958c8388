use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gap::{measure_row, GapRow, CSV_HEADER};
use super::generate::generate_instance;
use crate::domain::{validate_instance, Instance};
use crate::error::HarnessError;
use crate::formulations::{Base, FormulationChoice, StartupKind};
use crate::solver::{Backend, CommandTemplate, Mode, SolveConfig, BENCHMARK_GAP, DEFAULT_TIME_LIMIT};

/// Where a benchmark instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    Generated {
        seed: u64,
        units: usize,
        horizon: usize,
        #[serde(default = "default_volatility")]
        volatility: f64,
        #[serde(default)]
        network: bool,
    },
}

fn default_volatility() -> f64 {
    0.3
}

fn default_ktol() -> Vec<f64> {
    vec![0.0, 0.05, 0.2]
}

fn default_gap() -> f64 {
    BENCHMARK_GAP
}

fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT
}

fn default_backend() -> String {
    "reference".into()
}

/// Benchmark description, read from JSON (see `docs/bench-config.md`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub instances: Vec<InstanceSource>,
    pub formulations: Vec<StartupKind>,
    #[serde(default = "default_ktol")]
    pub ktol: Vec<f64>,
    #[serde(default = "default_base")]
    pub base: Base,
    /// Horizon lengths to sweep; empty means each instance's own horizon.
    #[serde(default)]
    pub horizons: Vec<usize>,
    #[serde(default = "default_gap")]
    pub gap: f64,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    /// `reference`, or a command template with `{input}` and `{output}`.
    #[serde(default = "default_backend")]
    pub backend: String,
    /// Record wall times; off keeps reports byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

fn default_base() -> Base {
    Base::Basic
}

impl BenchConfig {
    /// Parses and checks a config; relative instance paths are resolved
    /// against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self, HarnessError> {
        let mut cfg: BenchConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(dir) = base_dir {
            for src in &mut cfg.instances {
                if let InstanceSource::File { path } = src {
                    if path.is_relative() {
                        *path = dir.join(&*path);
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        BenchConfig::from_json_str(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.formulations.is_empty() {
            return Err(HarnessError::Config("formulation list is empty".into()));
        }
        if self.ktol.is_empty() {
            return Err(HarnessError::Config("ktol list is empty".into()));
        }
        if let Some(k) = self.ktol.iter().find(|k| !(**k >= 0.0 && k.is_finite())) {
            return Err(HarnessError::Config(format!("ktol {k} must be finite and >= 0")));
        }
        if self.horizons.iter().any(|&t| t < 2) {
            return Err(HarnessError::Config("swept horizons must be >= 2".into()));
        }
        self.solve_config()?;
        Ok(())
    }

    pub fn solve_config(&self) -> Result<SolveConfig, HarnessError> {
        let backend = if self.backend.trim() == "reference" {
            Backend::Reference
        } else {
            Backend::External(CommandTemplate::parse(&self.backend)?)
        };
        Ok(SolveConfig::new(Mode::Mip, self.gap, self.time_limit, backend)?)
    }
}

/// Instances solved within budget for one horizon length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonSummary {
    pub horizon: usize,
    /// Instances for which every row was solved.
    pub solved: usize,
    pub instances: usize,
    pub rows_solved: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<GapRow>,
    pub summary: Vec<HorizonSummary>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("horizon,solved,instances,rows_solved,rows\n");
        for s in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.horizon, s.solved, s.instances, s.rows_solved, s.rows
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Writes `gaps.csv`, `summary.csv` and `report.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        let io = |path: PathBuf| move |source| HarnessError::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, body) in [
            ("gaps.csv", self.to_csv()),
            ("summary.csv", self.summary_csv()),
            ("report.json", self.to_json()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

/// Loads or generates every instance of the config, one per swept horizon.
pub fn load_instances(config: &BenchConfig) -> Result<Vec<(String, Instance)>, HarnessError> {
    let mut out = Vec::new();
    for src in &config.instances {
        let (id, native) = match src {
            InstanceSource::File { path } => {
                let inst = Instance::from_path(path)?;
                let stem = path.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
                (stem, Some(inst))
            }
            InstanceSource::Generated { seed, units, .. } => (format!("gen-s{seed}-u{units}"), None),
        };
        let make = |horizon: Option<usize>| -> Option<Instance> {
            match (src, &native) {
                (_, Some(inst)) => match horizon {
                    Some(t) if t > inst.horizon => {
                        log::warn!("{id}: horizon {} is shorter than the swept {t}, skipped", inst.horizon);
                        None
                    }
                    Some(t) => Some(inst.truncated(t)),
                    None => Some(inst.clone()),
                },
                (
                    InstanceSource::Generated {
                        seed,
                        units,
                        horizon: own,
                        volatility,
                        network,
                    },
                    None,
                ) => Some(generate_instance(*seed, *units, horizon.unwrap_or(*own), *volatility, *network)),
                _ => None,
            }
        };
        if config.horizons.is_empty() {
            out.extend(make(None).map(|inst| (id.clone(), inst)));
        } else {
            for &t in &config.horizons {
                out.extend(make(Some(t)).map(|inst| (format!("{id}-T{t}"), inst)));
            }
        }
    }
    for (id, inst) in &out {
        let report = validate_instance(inst);
        if !report.is_empty() {
            let text: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            return Err(HarnessError::Config(format!("instance {id}: {}", text.join("; "))));
        }
    }
    Ok(out)
}

/// Runs every (instance, formulation, ktol) combination. The temperature
/// model ignores the tolerance, so it is solved once per instance and its
/// row repeated for each tolerance. Rows are sorted by instance id,
/// formulation and tolerance; failures become `error` rows.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, HarnessError> {
    config.validate()?;
    let solve_config = config.solve_config()?;
    let instances = load_instances(config)?;

    let mut jobs: Vec<(usize, FormulationChoice)> = Vec::new();
    for k in 0..instances.len() {
        for &startup in &config.formulations {
            if startup.uses_steps() {
                jobs.extend(config.ktol.iter().map(|&ktol| (k, FormulationChoice::new(config.base, startup, ktol))));
            } else {
                jobs.push((k, FormulationChoice::new(config.base, startup, 0.0)));
            }
        }
    }
    let run = || -> Vec<GapRow> {
        jobs.par_iter()
            .map(|(k, choice)| {
                let (id, inst) = &instances[*k];
                log::info!("{id}: {} ktol={}", choice.startup, choice.ktol);
                measure_row(id, inst, choice, &solve_config)
            })
            .collect()
    };
    let solved = if config.threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(run)
    };

    let mut rows = Vec::new();
    for row in solved {
        if row.formulation.uses_steps() {
            rows.push(row);
        } else {
            rows.extend(config.ktol.iter().map(|&ktol| GapRow { ktol, ..row.clone() }));
        }
    }
    if !config.timing {
        for r in &mut rows {
            r.wall_ms = None;
        }
    }
    rows.sort_by(|a, b| {
        a.instance
            .cmp(&b.instance)
            .then(a.formulation.cmp(&b.formulation))
            .then(a.ktol.total_cmp(&b.ktol))
    });

    let horizon_of: BTreeMap<&str, usize> = instances.iter().map(|(id, i)| (id.as_str(), i.horizon)).collect();
    let mut per: BTreeMap<usize, (BTreeMap<&str, bool>, usize, usize)> = BTreeMap::new();
    for r in &rows {
        let t = horizon_of[r.instance.as_str()];
        let entry = per.entry(t).or_default();
        let all = entry.0.entry(r.instance.as_str()).or_insert(true);
        *all &= r.solved();
        entry.1 += usize::from(r.solved());
        entry.2 += 1;
    }
    let summary = per
        .into_iter()
        .map(|(horizon, (inst, rows_solved, rows))| HorizonSummary {
            horizon,
            solved: inst.values().filter(|&&ok| ok).count(),
            instances: inst.len(),
            rows_solved,
            rows,
        })
        .collect();
    Ok(BenchReport { rows, summary })
}
