//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use lrscov_core::estimators::{alce_solve, poet_estimate, sample_estimate, unalce, ThresholdKind};
use lrscov_core::metrics::MetricsReport;
use lrscov_core::simgen::{run_replicates, MethodSpec, ReplicateOptions, TruthMode, Tuning};
use lrscov_core::tuning::{
    cross_validate, log_spaced, select_by_mc, CvConfig, CvMethod, PairRecord, SelectionResult,
    ThresholdGrid,
};
use lrscov_core::{Estimate, SettingSpec, SolverConfig, SymmetricMatrix};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::{
    CriterionArg, EstimateArgs, GridArgs, InputArgs, MethodArg, SimulateArgs, SolverArgs, TruthArg,
};
use crate::error::{CliError, Result};
use crate::io::{csv_row, format_value, read_table, write_atomic, write_json, write_matrix};
use crate::manifest::RunManifest;
use crate::report::{rankings, summarize, variable_profiles, Rankings, Summary, VariableProfile};

/// The covariance to estimate from, with its variable labels.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub labels: Vec<String>,
    pub sigma: SymmetricMatrix,
    /// Observations in rows, present with `--data`.
    pub data: Option<DMatrix<f64>>,
}

pub fn load_input(args: &InputArgs) -> Result<LoadedInput> {
    let table = read_table(&args.input)?;
    if args.data {
        let sigma = sample_estimate(&table.values, !args.no_center)?;
        Ok(LoadedInput {
            labels: table.labels,
            sigma,
            data: Some(table.values),
        })
    } else {
        if table.rows() != table.cols() {
            return Err(CliError::Input(format!(
                "{}: covariance input must be square, got {}x{} (use --data for observations)",
                args.input.display(),
                table.rows(),
                table.cols()
            )));
        }
        Ok(LoadedInput {
            labels: table.labels,
            sigma: SymmetricMatrix::new(table.values)?,
            data: None,
        })
    }
}

fn solver_config(solver: &SolverArgs, psi: f64, rho: f64) -> SolverConfig {
    SolverConfig {
        epsilon: solver.epsilon,
        max_iter: solver.max_iter,
        ..SolverConfig::new(psi, rho)
    }
}

/// Parses `a,b,...` or `min:max:count` into an ascending list.
pub fn parse_grid(name: &str, spec: &str) -> Result<Vec<f64>> {
    let bad = |why: String| CliError::Input(format!("--{name} {spec:?}: {why}"));
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let min: f64 = parts[0].parse().map_err(|_| bad("bad minimum".into()))?;
        let max: f64 = parts[1].parse().map_err(|_| bad("bad maximum".into()))?;
        let count: usize = parts[2].parse().map_err(|_| bad("bad count".into()))?;
        return log_spaced(min, max, count).map_err(|e| bad(e.to_string()));
    }
    if parts.len() != 1 {
        return Err(bad("expected a,b,... or min:max:count".into()));
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: {:?}", s.trim())))
        })
        .collect()
}

fn required<T>(value: Option<T>, flag: &str, why: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Input(format!("--{flag} is required {why}")))
}

/// Fits the estimator selected by `args` on `sigma`.
pub fn fit_estimate(args: &EstimateArgs, sigma: &SymmetricMatrix) -> Result<Estimate> {
    match args.method {
        MethodArg::Alce | MethodArg::Unalce => {
            let psi = required(args.psi, "psi", "for alce and unalce")?;
            let (alce, state) = alce_solve(sigma, solver_config(&args.solver, psi, args.rho))?;
            if args.method == MethodArg::Alce {
                Ok(alce)
            } else {
                Ok(unalce(&alce, &state)?)
            }
        }
        MethodArg::Poet => {
            let rank = required(args.rank, "rank", "for poet")?;
            Ok(poet_estimate(sigma, rank, args.rho, args.threshold.into())?)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: PathBuf,
    pub kind: &'static str,
    pub p: usize,
    pub n: Option<usize>,
    pub labels: Vec<String>,
}

impl InputInfo {
    fn new(args: &InputArgs, loaded: &LoadedInput) -> Self {
        Self {
            path: args.input.clone(),
            kind: if args.data { "data" } else { "covariance" },
            p: loaded.sigma.dim(),
            n: loaded.data.as_ref().map(DMatrix::nrows),
            labels: loaded.labels.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentPaths {
    pub low_rank: PathBuf,
    pub sparse: PathBuf,
    pub sigma: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub manifest: RunManifest,
    pub input: InputInfo,
    pub method: String,
    pub psi: Option<f64>,
    pub rho: f64,
    #[serde(flatten)]
    pub summary: Summary,
    pub variables: Vec<VariableProfile>,
    pub rankings: Rankings,
    pub components: Option<ComponentPaths>,
}

pub fn estimate(args: &EstimateArgs) -> Result<EstimateReport> {
    let manifest = RunManifest::new("estimate", args, None)?;
    let loaded = load_input(&args.input)?;
    let est = fit_estimate(args, &loaded.sigma)?;
    if !est.converged {
        eprintln!(
            "warning: solver stopped after {} iterations without converging",
            est.solver_iters
        );
    }
    let summary = summarize(&est, &loaded.sigma)?;
    let variables = variable_profiles(&est, &loaded.labels);

    let components = match &args.components_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let paths = ComponentPaths {
                low_rank: dir.join("low_rank.csv"),
                sparse: dir.join("sparse.csv"),
                sigma: dir.join("sigma.csv"),
            };
            write_matrix(
                &paths.low_rank,
                &loaded.labels,
                est.low_rank_matrix().as_matrix(),
            )?;
            write_matrix(
                &paths.sparse,
                &loaded.labels,
                est.sparse.entries().as_matrix(),
            )?;
            write_matrix(&paths.sigma, &loaded.labels, est.sigma.as_matrix())?;
            Some(paths)
        }
        None => None,
    };

    let report = EstimateReport {
        manifest,
        input: InputInfo::new(&args.input, &loaded),
        method: est.method.name().to_string(),
        psi: est.psi,
        rho: est.rho,
        rankings: rankings(&variables),
        summary,
        variables,
        components,
    };
    write_json(&args.out, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub manifest: RunManifest,
    pub input: InputInfo,
    pub criterion: CriterionArg,
    pub method: MethodArg,
    pub psi_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub best_psi: f64,
    pub best_rho: f64,
    pub criterion_value: f64,
    pub best: BestPair,
    pub table: PathBuf,
}

/// Structure of the estimate at the selected pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestPair {
    pub r_hat: usize,
    pub nz: usize,
    pub theta_hat: f64,
    pub pd: bool,
}

impl From<&PairRecord> for BestPair {
    fn from(r: &PairRecord) -> Self {
        Self {
            r_hat: r.r_hat,
            nz: r.nz,
            theta_hat: r.theta_hat,
            pd: r.pd,
        }
    }
}

/// Column names of the per-pair table.
pub const GRID_COLUMNS: [&str; 7] = ["psi", "rho", "criterion", "theta_hat", "r_hat", "nz", "pd"];

/// Runs the selection described by `args` on already loaded input.
pub fn select(args: &GridArgs, loaded: &LoadedInput) -> Result<SelectionResult> {
    let rho = parse_grid("rho-grid", &args.rho_grid)?;
    let psi = match (&args.psi_grid, args.method) {
        (Some(spec), _) => parse_grid("psi-grid", spec)?,
        (None, MethodArg::Poet) => vec![1.0],
        (None, _) => {
            return Err(CliError::Input(
                "--psi-grid is required for alce and unalce".into(),
            ))
        }
    };
    let grid = ThresholdGrid::new(psi, rho)?;
    let cfg = solver_config(&args.solver, 1.0, 1.0);
    match args.criterion {
        CriterionArg::Mc => {
            if args.method != MethodArg::Unalce {
                return Err(CliError::Input(
                    "the mc criterion is defined for unalce only".into(),
                ));
            }
            Ok(select_by_mc(&loaded.sigma, &grid, &cfg)?)
        }
        CriterionArg::Cv => {
            let data = loaded.data.as_ref().ok_or_else(|| {
                CliError::Input("--criterion cv needs raw observations: pass --data".into())
            })?;
            let method = match args.method {
                MethodArg::Alce => CvMethod::Alce,
                MethodArg::Unalce => CvMethod::Unalce,
                MethodArg::Poet => CvMethod::Poet {
                    rank: required(args.rank, "rank", "for poet")?,
                    kind: args.threshold.into(),
                },
            };
            let cv = CvConfig {
                folds: args.folds,
                shuffle_seed: args.shuffle_seed,
                center: !args.input.no_center,
            };
            Ok(cross_validate(data, &grid, &cv, &method, &cfg)?)
        }
    }
}

pub fn grid_table_csv(table: &[PairRecord]) -> String {
    let mut out = csv_row(GRID_COLUMNS);
    for r in table {
        let cells = [
            format_value(r.psi),
            format_value(r.rho),
            format_value(r.criterion),
            format_value(r.theta_hat),
            r.r_hat.to_string(),
            r.nz.to_string(),
            r.pd.to_string(),
        ];
        out.push_str(&csv_row(cells.iter().map(String::as_str)));
    }
    out
}

pub fn grid(args: &GridArgs) -> Result<GridReport> {
    let manifest = RunManifest::new("grid", args, args.shuffle_seed)?;
    let table_path = args
        .table
        .clone()
        .unwrap_or_else(|| args.out.with_extension("csv"));
    if table_path == args.out {
        return Err(CliError::Input(
            "--table and --out must be different files".into(),
        ));
    }
    let loaded = load_input(&args.input)?;
    let result = select(args, &loaded)?;
    write_atomic(&table_path, grid_table_csv(&result.table).as_bytes())?;

    let mut psi_grid: Vec<f64> = result.table.iter().map(|r| r.psi).collect();
    psi_grid.dedup();
    let mut rho_grid: Vec<f64> = result.table.iter().map(|r| r.rho).collect();
    rho_grid.sort_by(f64::total_cmp);
    rho_grid.dedup();
    let report = GridReport {
        manifest,
        input: InputInfo::new(&args.input, &loaded),
        criterion: args.criterion,
        method: args.method,
        psi_grid,
        rho_grid,
        best_psi: result.best_psi,
        best_rho: result.best_rho,
        criterion_value: result.criterion_value,
        best: result.best_record().into(),
        table: table_path,
    };
    write_json(&args.out, &report)?;
    Ok(report)
}

pub fn parse_methods(spec: &str) -> Result<Vec<MethodSpec>> {
    let mut methods: Vec<MethodSpec> = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = match name {
            "alce" => MethodSpec::Alce,
            "unalce" => MethodSpec::Unalce,
            "poet" | "poet-soft" => MethodSpec::Poet(ThresholdKind::Soft),
            "poet-hard" => MethodSpec::Poet(ThresholdKind::Hard),
            "poet-soft-corr" => MethodSpec::Poet(ThresholdKind::SoftCorrelation),
            "poet-hard-corr" => MethodSpec::Poet(ThresholdKind::HardCorrelation),
            other => return Err(CliError::Input(format!("unknown method {other:?}"))),
        };
        if methods.iter().any(|x| x.method() == m.method()) {
            return Err(CliError::Input(format!(
                "method {name:?} given twice (at most one poet variant)"
            )));
        }
        methods.push(m);
    }
    if methods.is_empty() {
        return Err(CliError::Input("--methods is empty".into()));
    }
    Ok(methods)
}

pub fn setting_from_args(args: &SimulateArgs) -> Result<SettingSpec> {
    let mut spec = match args.setting {
        Some(id) => SettingSpec::preset(id)?.scaled(args.scale)?,
        None => {
            let why = "without --setting";
            SettingSpec {
                p: required(args.p, "p", why)?,
                n: required(args.n, "n", why)?,
                r: required(args.r, "r", why)?,
                theta: required(args.theta, "theta", why)?,
                c: required(args.cond, "cond", why)?,
                prop_s: required(args.prop_s, "prop-s", why)?,
                rho_corr: required(args.rho_corr, "rho-corr", why)?,
                tau: 1.0,
                replicates: 1,
            }
        }
    };
    if args.setting.is_some() {
        spec.p = args.p.unwrap_or(spec.p);
        spec.n = args.n.unwrap_or(spec.n);
        spec.r = args.r.unwrap_or(spec.r);
        spec.theta = args.theta.unwrap_or(spec.theta);
        spec.c = args.cond.unwrap_or(spec.c);
        spec.prop_s = args.prop_s.unwrap_or(spec.prop_s);
        spec.rho_corr = args.rho_corr.unwrap_or(spec.rho_corr);
    }
    spec.tau = args.tau.unwrap_or(spec.tau);
    spec.replicates = args.replicates;
    spec.validate()?;
    Ok(spec)
}

pub fn replicate_options(args: &SimulateArgs) -> Result<ReplicateOptions> {
    let methods = parse_methods(&args.methods)?;
    let has_poet = methods.iter().any(|m| matches!(m, MethodSpec::Poet(_)));
    let has_alce = methods.iter().any(|m| !matches!(m, MethodSpec::Poet(_)));
    let fixed = args.psi.is_some() || args.rho.is_some() || args.poet_rho.is_some();
    let tuning = if fixed {
        let why = "when any threshold is fixed";
        Tuning::Fixed {
            psi: if has_alce {
                required(args.psi, "psi", why)?
            } else {
                1.0
            },
            rho: if has_alce {
                required(args.rho, "rho", why)?
            } else {
                1.0
            },
            poet_rho: if has_poet {
                required(args.poet_rho, "poet-rho", why)?
            } else {
                1.0
            },
        }
    } else {
        Tuning::Grid {
            grid: ThresholdGrid::new(
                parse_grid("psi-grid", &args.psi_grid)?,
                parse_grid("rho-grid", &args.rho_grid)?,
            )?,
            poet_rho: parse_grid("poet-rho-grid", &args.poet_rho_grid)?,
            folds: args.folds,
        }
    };
    Ok(ReplicateOptions {
        methods,
        tuning,
        truth: match args.truth {
            TruthArg::Fresh => TruthMode::FreshPerReplicate,
            TruthArg::Fixed => TruthMode::FixedPerSetting,
        },
        solver: solver_config(&args.solver, 1.0, 1.0),
        base_seed: args.seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateManifest {
    #[serde(flatten)]
    pub run: RunManifest,
    pub setting: SettingEcho,
    pub rows: usize,
    pub failures: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingEcho {
    pub p: usize,
    pub n: usize,
    pub r: usize,
    pub theta: f64,
    pub cond: f64,
    pub prop_s: f64,
    pub rho_corr: f64,
    pub tau: f64,
    pub replicates: usize,
}

impl From<&SettingSpec> for SettingEcho {
    fn from(s: &SettingSpec) -> Self {
        Self {
            p: s.p,
            n: s.n,
            r: s.r,
            theta: s.theta,
            cond: s.c,
            prop_s: s.prop_s,
            rho_corr: s.rho_corr,
            tau: s.tau,
            replicates: s.replicates,
        }
    }
}

fn opt_value(x: Option<f64>) -> String {
    x.map(format_value).unwrap_or_default()
}

pub fn simulate(args: &SimulateArgs) -> Result<SimulateManifest> {
    let run = RunManifest::new("simulate", args, Some(args.seed))?;
    let spec = setting_from_args(args)?;
    let opts = replicate_options(args)?;
    let table = run_replicates(&spec, &opts)?;

    let dir = &args.out;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let mut header = vec!["replicate", "method", "psi", "rho", "converged"];
    header.extend(MetricsReport::COLUMNS);
    let mut rows = csv_row(header);
    for row in &table.rows {
        let mut cells = vec![
            row.replicate.to_string(),
            row.method.name().to_string(),
            opt_value(row.psi),
            format_value(row.rho),
            row.converged.to_string(),
        ];
        cells.extend(row.metrics.values().iter().map(|v| format_value(*v)));
        rows.push_str(&csv_row(cells.iter().map(String::as_str)));
    }
    write_atomic(&dir.join("replicates.csv"), rows.as_bytes())?;

    let mut header = vec!["method".to_string(), "replicates".to_string()];
    header.extend(MetricsReport::COLUMNS.iter().map(|c| format!("mean_{c}")));
    header.extend(MetricsReport::COLUMNS.iter().map(|c| format!("sd_{c}")));
    let mut agg = csv_row(header.iter().map(String::as_str));
    for row in table.aggregate() {
        let mut cells = vec![row.method.name().to_string(), row.replicates.to_string()];
        cells.extend(row.mean.iter().map(|v| format_value(*v)));
        cells.extend(row.sd.iter().map(|v| format_value(*v)));
        agg.push_str(&csv_row(cells.iter().map(String::as_str)));
    }
    write_atomic(&dir.join("aggregate.csv"), agg.as_bytes())?;

    let mut failures = csv_row(["replicate", "method", "message"]);
    for f in &table.failures {
        let method = f.method.map(|m| m.name()).unwrap_or("");
        let replicate = f.replicate.to_string();
        failures.push_str(&csv_row([replicate.as_str(), method, f.message.as_str()]));
    }
    write_atomic(&dir.join("failures.csv"), failures.as_bytes())?;

    let manifest = SimulateManifest {
        run,
        setting: SettingEcho::from(&spec),
        rows: table.rows.len(),
        failures: table.failures.len(),
        files: ["replicates.csv", "aggregate.csv", "failures.csv"]
            .map(String::from)
            .to_vec(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    if !table.failures.is_empty() {
        eprintln!(
            "warning: {} estimator failures recorded in {}",
            table.failures.len(),
            Path::new(dir).join("failures.csv").display()
        );
    }
    Ok(manifest)
}
