//! Coupling-grid experiments: configuration, per-cell runs, sweeps, and the
//! CSV record format.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use crate::adiabatic::{
    evolve, spectral_flow, unit_grid, Schedule, SpectralFlow, DEFAULT_CROSSING_TOLERANCE,
};
use crate::circuit::{build_level_plan, explore_state, n1_reference, PlanMode};
use crate::eigen::{sector_eigensolve, EigenSolution, DEFAULT_CLUSTER_TOLERANCE};
use crate::error::{Error, Result};
use crate::hamiltonian::{Couplings, Hamiltonian};
use crate::mcvqe::{
    evolve_branch, fit_parameters, pipeline_basis_state, pipeline_state, BranchSolution, FitOptions,
};
use crate::statevector::StateVector;
use crate::subspace::{branch_dimension, enumerate_branch, Branch, Parity};

/// Largest ring a sweep accepts.
pub const SWEEP_QUBIT_LIMIT: usize = 12;

/// Header of every sweep CSV.
pub const CSV_HEADER: [&str; 9] = [
    "jx_ratio",
    "jy_ratio",
    "parity",
    "n",
    "level_rank",
    "steps",
    "error",
    "energy_estimate",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Branched-subspace preparation from the `-Jz sum ZZ` levels.
    #[default]
    Bsap,
    /// Conventional preparation from `-Jz sum Z_i / 2^i`.
    ApBaseline,
}

/// One prepared target. For the baseline only `level_rank` is used: it
/// selects both the initial eigenstate and the target level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_parity")]
    pub parity: Parity,
    #[serde(default)]
    pub level_rank: usize,
}

fn default_parity() -> Parity {
    Parity::Plus
}

impl LevelSpec {
    pub fn new(n: usize, parity: Parity, level_rank: usize) -> Self {
        Self {
            n,
            parity,
            level_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "L")]
    pub num_sites: usize,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    #[serde(default = "default_range")]
    pub jx_range: [f64; 2],
    #[serde(default = "default_range")]
    pub jy_range: [f64; 2],
    #[serde(default = "default_jz")]
    pub jz: f64,
    /// Defaults to `L/2` Trotter steps of `0.25`.
    #[serde(default)]
    pub schedule: Option<Schedule>,
    #[serde(default = "default_levels")]
    pub levels: Vec<LevelSpec>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Record wall-clock time per cell. Off by default so reruns are
    /// byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_cluster_tolerance")]
    pub cluster_tolerance: f64,
    /// Fit the exploration circuit to each Ritz vector (seeded by `seed`)
    /// and prepare through the circuit instead of the exact superposition.
    #[serde(default)]
    pub fit_circuit: bool,
}

fn default_grid() -> usize {
    21
}
fn default_range() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_jz() -> f64 {
    1.0
}
fn default_levels() -> Vec<LevelSpec> {
    vec![LevelSpec::new(0, Parity::Plus, 0)]
}
fn default_cluster_tolerance() -> f64 {
    DEFAULT_CLUSTER_TOLERANCE
}

impl ExperimentConfig {
    pub fn new(num_sites: usize) -> Self {
        Self {
            num_sites,
            grid_points: default_grid(),
            jx_range: default_range(),
            jy_range: default_range(),
            jz: default_jz(),
            schedule: None,
            levels: default_levels(),
            method: Method::Bsap,
            seed: 0,
            output: None,
            workers: None,
            timing: false,
            cluster_tolerance: default_cluster_tolerance(),
            fit_circuit: false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
            .unwrap_or_else(|| Schedule::for_ring(self.num_sites))
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.num_sites;
        if l < 4 || l % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "L must be even and at least 4, got {l}"
            )));
        }
        if l > SWEEP_QUBIT_LIMIT {
            return Err(Error::TooLarge {
                what: "coupling sweeps",
                num_qubits: l,
                limit: SWEEP_QUBIT_LIMIT,
            });
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig(
                "grid_points must be at least 2".into(),
            ));
        }
        for (name, r) in [("jx_range", self.jx_range), ("jy_range", self.jy_range)] {
            if !(0.0..=1.0).contains(&r[0]) || !(0.0..=1.0).contains(&r[1]) || r[0] > r[1] {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be an ordered sub-interval of [0, 1], got {r:?}"
                )));
            }
        }
        if !(self.jz.is_finite() && self.jz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "jz must be positive, got {}",
                self.jz
            )));
        }
        if !(self.cluster_tolerance.is_finite() && self.cluster_tolerance >= 0.0) {
            return Err(Error::InvalidConfig(
                "cluster_tolerance must be non-negative".into(),
            ));
        }
        self.schedule().validate()?;
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one level is required".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be positive".into()));
        }
        for level in &self.levels {
            self.validate_level(level)?;
        }
        Ok(())
    }

    fn validate_level(&self, level: &LevelSpec) -> Result<()> {
        let l = self.num_sites;
        match self.method {
            Method::Bsap => {
                if level.n >= 2 {
                    return Err(Error::InvalidConfig(format!(
                        "level n = {} is not constructed in this artifact (only n = 0 and n = 1)",
                        level.n
                    )));
                }
                let d = branch_dimension(l, level.n);
                if level.level_rank >= d {
                    return Err(Error::InvalidConfig(format!(
                        "level_rank {} exceeds the branch dimension {d} of level n = {}",
                        level.level_rank, level.n
                    )));
                }
            }
            Method::ApBaseline => {
                if level.level_rank >= 1 << l {
                    return Err(Error::InvalidConfig(format!(
                        "level_rank {} exceeds 2^L",
                        level.level_rank
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn jx_grid(&self) -> Vec<f64> {
        ratio_grid(self.jx_range, self.grid_points)
    }

    pub fn jy_grid(&self) -> Vec<f64> {
        ratio_grid(self.jy_range, self.grid_points)
    }
}

/// `points` values covering `range` with both endpoints included.
pub fn ratio_grid(range: [f64; 2], points: usize) -> Vec<f64> {
    let [lo, hi] = range;
    unit_grid(points)
        .into_iter()
        .map(|t| if t == 1.0 { hi } else { lo + t * (hi - lo) })
        .collect()
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub jx_ratio: f64,
    pub jy_ratio: f64,
    /// `+1` or `-1`; `0` for the baseline, which has no parity sector.
    pub parity: i8,
    pub n: usize,
    pub level_rank: usize,
    pub steps: usize,
    pub error: f64,
    pub energy_estimate: f64,
    pub wall_time_ms: u64,
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.jx_ratio
            .total_cmp(&b.jx_ratio)
            .then(a.jy_ratio.total_cmp(&b.jy_ratio))
            .then(a.parity.cmp(&b.parity))
            .then(a.level_rank.cmp(&b.level_rank))
            .then(a.n.cmp(&b.n))
    });
}

pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let io = |e: csv::Error| Error::Unsupported(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Unsupported(format!("csv: {e}")))
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Unsupported(format!("csv: {e}")))
}

/// Target Hamiltonian and the initial Hamiltonian of `method` at one grid
/// cell.
pub fn cell_hamiltonians(
    config: &ExperimentConfig,
    jx_ratio: f64,
    jy_ratio: f64,
) -> Result<(Hamiltonian, Hamiltonian)> {
    let couplings = Couplings::from_ratios(config.jz, jx_ratio, jy_ratio);
    let ht = Hamiltonian::xyz(config.num_sites, couplings)?;
    let h0 = match config.method {
        Method::Bsap => Hamiltonian::bsap_initial(config.num_sites, config.jz)?,
        Method::ApBaseline => Hamiltonian::ap_initial(config.num_sites, config.jz)?,
    };
    Ok((h0, ht))
}

/// Target spectra at one cell, one per parity sector of the global flip.
pub struct CellSpectra {
    pub plus: EigenSolution,
    pub minus: EigenSolution,
}

impl CellSpectra {
    pub fn new(ht: &Hamiltonian, cluster_tolerance: f64) -> Result<Self> {
        Ok(Self {
            plus: sector_eigensolve(ht, Parity::Plus, cluster_tolerance)?,
            minus: sector_eigensolve(ht, Parity::Minus, cluster_tolerance)?,
        })
    }

    pub fn sector(&self, parity: Parity) -> &EigenSolution {
        match parity {
            Parity::Plus => &self.plus,
            Parity::Minus => &self.minus,
        }
    }

    /// Both sectors combined.
    pub fn full(&self, cluster_tolerance: f64) -> EigenSolution {
        EigenSolution::merge(
            vec![self.plus.clone(), self.minus.clone()],
            cluster_tolerance,
        )
    }
}

/// Sector eigen-index targeted by Ritz level `rank` of branch level `n`:
/// levels below `n` occupy the lowest `sum_{m<n} C(L, 2m)` sector states.
pub fn bsap_target_index(num_sites: usize, n: usize, rank: usize) -> usize {
    (0..n)
        .map(|m| branch_dimension(num_sites, m))
        .sum::<usize>()
        + rank
}

/// Computational basis state with the `rank`-th lowest diagonal energy of a
/// diagonal Hamiltonian.
pub fn diagonal_eigenstate(h0: &Hamiltonian, rank: usize) -> Result<usize> {
    let mut order: Vec<usize> = (0..h0.dim()).collect();
    order.sort_by(|&a, &b| {
        h0.diagonal_element(a as u64)
            .total_cmp(&h0.diagonal_element(b as u64))
    });
    order.get(rank).copied().ok_or(Error::LevelIndexOutOfRange {
        index: rank,
        size: h0.dim(),
    })
}

/// All configured levels at one coupling point.
pub fn run_cell(config: &ExperimentConfig, jx_ratio: f64, jy_ratio: f64) -> Result<Vec<RunRecord>> {
    let clock = Instant::now();
    let (h0, ht) = cell_hamiltonians(config, jx_ratio, jy_ratio)?;
    let spectra = CellSpectra::new(&ht, config.cluster_tolerance)?;
    let mut records = run_cell_with(config, jx_ratio, jy_ratio, &h0, &ht, &spectra)?;
    if config.timing {
        let ms = clock.elapsed().as_millis() as u64;
        records.iter_mut().for_each(|r| r.wall_time_ms = ms);
    }
    Ok(records)
}

/// [`run_cell`] with precomputed target spectra.
pub fn run_cell_with(
    config: &ExperimentConfig,
    jx_ratio: f64,
    jy_ratio: f64,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    spectra: &CellSpectra,
) -> Result<Vec<RunRecord>> {
    let sched = config.schedule();
    let record = |level: &LevelSpec, parity: i8, n: usize, error: f64, energy: f64| RunRecord {
        jx_ratio,
        jy_ratio,
        parity,
        n,
        level_rank: level.level_rank,
        steps: sched.num_steps,
        error,
        energy_estimate: energy,
        wall_time_ms: 0,
    };
    let mut out = Vec::with_capacity(config.levels.len());
    match config.method {
        Method::Bsap => {
            let mut evolved: Vec<(usize, Vec<StateVector>)> = Vec::new();
            for level in &config.levels {
                config.validate_level(level)?;
                if !evolved.iter().any(|(n, _)| *n == level.n) {
                    let basis = enumerate_branch(config.num_sites, level.n, Branch::W)?;
                    evolved.push((level.n, evolve_branch(&basis, h0, ht, &sched)?));
                }
            }
            let mut solved: Vec<(usize, Parity, BranchSolution)> = Vec::new();
            for level in &config.levels {
                if !solved
                    .iter()
                    .any(|(n, p, _)| *n == level.n && *p == level.parity)
                {
                    let basis = enumerate_branch(config.num_sites, level.n, Branch::W)?;
                    let states = &evolved
                        .iter()
                        .find(|(n, _)| *n == level.n)
                        .expect("evolved above")
                        .1;
                    solved.push((
                        level.n,
                        level.parity,
                        BranchSolution::from_evolved(&basis, level.parity, states, ht)?,
                    ));
                }
                let solution = &solved
                    .iter()
                    .find(|(n, p, _)| *n == level.n && *p == level.parity)
                    .expect("solved above")
                    .2;
                let prepared = if config.fit_circuit {
                    prepare_through_circuit(config, solution, level.level_rank, h0, ht, &sched)?
                } else {
                    solution.prepared(level.level_rank)?
                };
                let target = bsap_target_index(config.num_sites, level.n, level.level_rank);
                let error = crate::adiabatic::preparation_error(
                    &prepared,
                    spectra.sector(level.parity),
                    target,
                )?;
                let energy = solution.pairs[level.level_rank].energy;
                out.push(record(level, level.parity.as_i8(), level.n, error, energy));
            }
        }
        Method::ApBaseline => {
            let full = spectra.full(config.cluster_tolerance);
            for level in &config.levels {
                config.validate_level(level)?;
                let start = diagonal_eigenstate(h0, level.level_rank)?;
                let prepared =
                    evolve(&StateVector::basis(config.num_sites, start), h0, ht, &sched)?;
                let cluster = full.cluster_by_rank(level.level_rank)?;
                let error = full.outside_norm(&prepared, cluster)?.min(1.0);
                let energy = prepared.expectation(ht)?;
                out.push(record(level, 0, 0, error, energy));
            }
        }
    }
    Ok(out)
}

/// Fits the level-1 exploration circuit to a Ritz vector and runs the
/// pipeline on its output; level 0 needs no circuit.
fn prepare_through_circuit(
    config: &ExperimentConfig,
    solution: &BranchSolution,
    rank: usize,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<StateVector> {
    let l = config.num_sites;
    if solution.basis.level == 0 {
        return pipeline_basis_state(solution.basis.members[0], solution.parity, h0, ht, sched);
    }
    let plan = build_level_plan(l, solution.basis.level, PlanMode::Orthogonal)?;
    let reference = n1_reference(l);
    let options = FitOptions {
        seed: config.seed,
        ..FitOptions::default()
    };
    let fit = fit_parameters(
        &solution.pairs[rank].coefficients,
        &plan,
        &solution.basis,
        reference,
        &options,
    )?;
    let plan = plan.with_component_bit(fit.component_bit)?;
    let explored = explore_state(&plan, &fit.params, reference)?;
    pipeline_state(&explored, solution.parity, h0, ht, sched)
}

/// Every grid cell, every configured level; rows sorted by
/// `(jx_ratio, jy_ratio, parity, level_rank, n)`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let cells: Vec<(f64, f64)> = config
        .jx_grid()
        .into_iter()
        .flat_map(|x| config.jy_grid().into_iter().map(move |y| (x, y)))
        .collect();
    let work = || -> Result<Vec<RunRecord>> {
        let per_cell: Vec<Vec<RunRecord>> = cells
            .par_iter()
            .map(|&(x, y)| run_cell(config, x, y))
            .collect::<Result<_>>()?;
        Ok(per_cell.into_iter().flatten().collect())
    };
    let mut records = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    sort_records(&mut records);
    Ok(records)
}

/// Single-point run.
pub fn run_point(
    config: &ExperimentConfig,
    jx_ratio: f64,
    jy_ratio: f64,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    for r in [jx_ratio, jy_ratio] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidConfig(format!(
                "coupling ratios must lie in [0, 1], got {r}"
            )));
        }
    }
    let mut records = run_cell(config, jx_ratio, jy_ratio)?;
    sort_records(&mut records);
    Ok(records)
}

/// Spectral flow of the method's interpolation at one coupling point.
pub fn run_spectrum(
    config: &ExperimentConfig,
    jx_ratio: f64,
    jy_ratio: f64,
    s_points: usize,
) -> Result<SpectralFlow> {
    config.validate()?;
    let (h0, ht) = cell_hamiltonians(config, jx_ratio, jy_ratio)?;
    spectral_flow(
        &h0,
        &ht,
        config.schedule().function,
        &unit_grid(s_points),
        config.cluster_tolerance,
        DEFAULT_CROSSING_TOLERANCE,
    )
}

/// Config echo plus records, for `--json` output.
#[derive(Debug, Serialize)]
pub struct ResultBundle<'a> {
    pub config: &'a ExperimentConfig,
    pub records: &'a [RunRecord],
}
