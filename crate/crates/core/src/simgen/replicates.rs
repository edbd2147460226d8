use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{
    alce_solve, poet_estimate, sample_estimate, unalce, Estimate, Method, SolverConfig,
    ThresholdKind,
};
use crate::linalg::SymmetricMatrix;
use crate::metrics::{self, MetricsReport};
use crate::tuning::{cross_validate, select_by_mc, CvConfig, CvMethod, ThresholdGrid};

use super::{generate_ground_truth, sample_data, GroundTruth, SettingSpec};

/// An estimator run on every replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Alce,
    Unalce,
    /// POET at the true rank.
    Poet(ThresholdKind),
}

impl MethodSpec {
    pub fn method(&self) -> Method {
        match self {
            MethodSpec::Alce => Method::Alce,
            MethodSpec::Unalce => Method::Unalce,
            MethodSpec::Poet(_) => Method::Poet,
        }
    }
}

/// How thresholds are chosen on each replicate.
#[derive(Debug, Clone, PartialEq)]
pub enum Tuning {
    /// The same thresholds on every replicate.
    Fixed { psi: f64, rho: f64, poet_rho: f64 },
    /// ALCE/UNALCE by the MC criterion over `grid`; POET's threshold by
    /// `folds`-fold cross-validation over `poet_rho`.
    Grid {
        grid: ThresholdGrid,
        poet_rho: Vec<f64>,
        folds: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthMode {
    /// A new ground truth for every replicate.
    FreshPerReplicate,
    /// One ground truth per setting, fresh samples per replicate.
    FixedPerSetting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOptions {
    pub methods: Vec<MethodSpec>,
    pub tuning: Tuning,
    pub truth: TruthMode,
    /// Supplies `epsilon` and `max_iter`.
    pub solver: SolverConfig,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub method: Method,
    pub psi: Option<f64>,
    pub rho: f64,
    pub converged: bool,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub replicate: usize,
    /// `None` when the failure happened before any estimator ran.
    pub method: Option<Method>,
    pub message: String,
}

/// Mean and standard deviation of each [`MetricsReport::COLUMNS`] entry.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub replicates: usize,
    pub mean: [f64; 26],
    /// Sample standard deviation (divisor `k - 1`); zero for a single value.
    pub sd: [f64; 26],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicateTable {
    pub rows: Vec<ReplicateRow>,
    pub failures: Vec<ReplicateFailure>,
}

impl ReplicateTable {
    /// Per-method aggregates in first-appearance order. NaN entries
    /// (undefined rates) are left out of that column's statistics.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut methods: Vec<Method> = Vec::new();
        for row in &self.rows {
            if !methods.contains(&row.method) {
                methods.push(row.method);
            }
        }
        methods
            .into_iter()
            .map(|method| {
                let values: Vec<[f64; 26]> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method)
                    .map(|r| r.metrics.values())
                    .collect();
                let mut mean = [f64::NAN; 26];
                let mut sd = [f64::NAN; 26];
                for col in 0..26 {
                    let xs: Vec<f64> = values
                        .iter()
                        .map(|v| v[col])
                        .filter(|x| !x.is_nan())
                        .collect();
                    if xs.is_empty() {
                        continue;
                    }
                    let k = xs.len() as f64;
                    let m = xs.iter().sum::<f64>() / k;
                    mean[col] = m;
                    sd[col] = if xs.len() > 1 {
                        libm::sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0))
                    } else {
                        0.0
                    };
                }
                AggregateRow {
                    method,
                    replicates: values.len(),
                    mean,
                    sd,
                }
            })
            .collect()
    }
}

/// SplitMix64 finalizer; derives independent per-job seeds.
fn mix_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the ground truth used by replicate `index`.
pub fn truth_seed(opts: &ReplicateOptions, index: usize) -> u64 {
    let k = match opts.truth {
        TruthMode::FreshPerReplicate => index as u64,
        TruthMode::FixedPerSetting => 0,
    };
    mix_seed(opts.base_seed, 1, k)
}

/// Seed of the sample drawn by replicate `index`.
pub fn sample_seed(opts: &ReplicateOptions, index: usize) -> u64 {
    mix_seed(opts.base_seed, 2, index as u64)
}

struct Prepared {
    truth: GroundTruth,
    data: nalgebra::DMatrix<f64>,
    sigma_n: SymmetricMatrix,
}

fn prepare(spec: &SettingSpec, index: usize, opts: &ReplicateOptions) -> Result<Prepared> {
    let truth = generate_ground_truth(spec, truth_seed(opts, index))?;
    let data = sample_data(&truth, spec.n, sample_seed(opts, index))?;
    let sigma_n = sample_estimate(&data, false)?;
    Ok(Prepared {
        truth,
        data,
        sigma_n,
    })
}

fn fit_low_rank_sparse(
    prepared: &Prepared,
    opts: &ReplicateOptions,
    cache: &mut Option<(f64, f64)>,
) -> Result<(f64, f64)> {
    if let Some(pair) = *cache {
        return Ok(pair);
    }
    let pair = match &opts.tuning {
        Tuning::Fixed { psi, rho, .. } => (*psi, *rho),
        Tuning::Grid { grid, .. } => {
            let sel = select_by_mc(&prepared.sigma_n, grid, &opts.solver)?;
            (sel.best_psi, sel.best_rho)
        }
    };
    *cache = Some(pair);
    Ok(pair)
}

fn fit_method(
    spec: &SettingSpec,
    prepared: &Prepared,
    method: &MethodSpec,
    opts: &ReplicateOptions,
    mc_pair: &mut Option<(f64, f64)>,
) -> Result<Estimate> {
    match method {
        MethodSpec::Alce | MethodSpec::Unalce => {
            let (psi, rho) = fit_low_rank_sparse(prepared, opts, mc_pair)?;
            let (alce, state) =
                alce_solve(&prepared.sigma_n, opts.solver.with_thresholds(psi, rho))?;
            if *method == MethodSpec::Alce {
                Ok(alce)
            } else {
                unalce(&alce, &state)
            }
        }
        MethodSpec::Poet(kind) => {
            let rho = match &opts.tuning {
                Tuning::Fixed { poet_rho, .. } => *poet_rho,
                Tuning::Grid {
                    poet_rho, folds, ..
                } => {
                    let grid = ThresholdGrid::new(alloc::vec![1.0], poet_rho.clone())?;
                    let cv = CvConfig {
                        folds: *folds,
                        shuffle_seed: None,
                        center: false,
                    };
                    let cv_method = CvMethod::Poet {
                        rank: spec.r,
                        kind: *kind,
                    };
                    cross_validate(&prepared.data, &grid, &cv, &cv_method, &opts.solver)?.best_rho
                }
            };
            poet_estimate(&prepared.sigma_n, spec.r, rho, *kind)
        }
    }
}

/// Runs every method on replicate `index`. Each replicate owns its RNG
/// streams, keyed by `(base_seed, index)`, so replicates can run in any order.
pub fn run_replicate(
    spec: &SettingSpec,
    index: usize,
    opts: &ReplicateOptions,
) -> (Vec<ReplicateRow>, Vec<ReplicateFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let prepared = match prepare(spec, index, opts) {
        Ok(p) => p,
        Err(e) => {
            failures.push(ReplicateFailure {
                replicate: index,
                method: None,
                message: e.to_string(),
            });
            return (rows, failures);
        }
    };
    let mut mc_pair = None;
    for method in &opts.methods {
        let outcome = fit_method(spec, &prepared, method, opts, &mut mc_pair).and_then(|est| {
            let gamma = match est.psi {
                Some(psi) => est.rho / psi,
                None => est.rho.max(f64::MIN_POSITIVE),
            };
            let report = metrics::evaluate(&est, &prepared.truth, &prepared.sigma_n, gamma)?;
            Ok((est, report))
        });
        match outcome {
            Ok((est, report)) => rows.push(ReplicateRow {
                replicate: index,
                method: method.method(),
                psi: est.psi,
                rho: est.rho,
                converged: est.converged,
                metrics: report,
            }),
            Err(e) => failures.push(ReplicateFailure {
                replicate: index,
                method: Some(method.method()),
                message: e.to_string(),
            }),
        }
    }
    (rows, failures)
}

/// Runs `spec.replicates` replicates serially.
pub fn run_replicates(spec: &SettingSpec, opts: &ReplicateOptions) -> Result<ReplicateTable> {
    spec.validate()?;
    if opts.methods.is_empty() {
        return Err(Error::InvalidParameter {
            name: "methods",
            reason: "at least one method is required".into(),
        });
    }
    let mut table = ReplicateTable::default();
    for index in 0..spec.replicates {
        let (rows, failures) = run_replicate(spec, index, opts);
        table.rows.extend(rows);
        table.failures.extend(failures);
    }
    Ok(table)
}
