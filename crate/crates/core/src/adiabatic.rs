//! Adiabatic evolution under `H(s) = H0 + f(s) [HT - H0]`, the preparation
//! error metric, and spectral flow along the interpolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::ops::Range;

use crate::eigen::{dense_eigensolve, EigenSolution};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ScheduleFunction};
use crate::pauli::PauliTerm;
use crate::statevector::{StateVector, C64, ZERO};

/// Largest register evolved by exact stepping.
pub const EXACT_QUBIT_LIMIT: usize = 10;

/// Default minimum gap below which a spectral-flow dip counts as a crossing.
pub const DEFAULT_CROSSING_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteppingMode {
    /// First-order product formula with layers ZZ, XX, YY.
    #[default]
    Trotter,
    /// `exp(-i dt H(s))` from a dense eigendecomposition per step.
    Exact,
}

/// `num_steps` slices of duration `step_duration` (units of `1/Jz`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub num_steps: usize,
    pub step_duration: f64,
    #[serde(default)]
    pub function: ScheduleFunction,
    #[serde(default)]
    pub mode: SteppingMode,
}

impl Schedule {
    pub fn new(
        num_steps: usize,
        step_duration: f64,
        function: ScheduleFunction,
        mode: SteppingMode,
    ) -> Result<Self> {
        let s = Self {
            num_steps,
            step_duration,
            function,
            mode,
        };
        s.validate()?;
        Ok(s)
    }

    /// Trotter schedule with `L/2` steps of `0.25`.
    pub fn for_ring(num_sites: usize) -> Self {
        Self {
            num_steps: (num_sites / 2).max(1),
            step_duration: 0.25,
            function: ScheduleFunction::Linear,
            mode: SteppingMode::Trotter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_steps == 0 {
            return Err(Error::InvalidSchedule(
                "at least one step is required".into(),
            ));
        }
        if !(self.step_duration.is_finite() && self.step_duration > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "step duration must be positive, got {}",
                self.step_duration
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.num_steps as f64 * self.step_duration
    }

    /// `(k - 1/2) / N` for `k = 1..=N`.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.num_steps as f64;
        (1..=self.num_steps).map(move |k| (k as f64 - 0.5) / n)
    }

    pub fn with_steps(mut self, num_steps: usize) -> Self {
        self.num_steps = num_steps;
        self
    }

    pub fn with_mode(mut self, mode: SteppingMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Evolves `state` through every slice of `sched`.
pub fn evolve(
    state: &StateVector,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<StateVector> {
    sched.validate()?;
    if h0.num_sites() != ht.num_sites() || state.num_qubits() != h0.num_sites() {
        return Err(Error::DimensionMismatch {
            expected: h0.num_sites(),
            found: if state.num_qubits() != h0.num_sites() {
                state.num_qubits()
            } else {
                ht.num_sites()
            },
        });
    }
    if sched.mode == SteppingMode::Exact && state.num_qubits() > EXACT_QUBIT_LIMIT {
        return Err(Error::TooLarge {
            what: "exact-mode evolution",
            num_qubits: state.num_qubits(),
            limit: EXACT_QUBIT_LIMIT,
        });
    }
    let mut psi = state.clone();
    for s in sched.midpoints() {
        let h = Hamiltonian::interpolate(h0, ht, s, sched.function)?;
        match sched.mode {
            SteppingMode::Trotter => trotter_step(&mut psi, &h, sched.step_duration),
            SteppingMode::Exact => exact_step(&mut psi, &h, sched.step_duration)?,
        }
    }
    Ok(psi)
}

/// Term groups of one product-formula step, in application order.
struct Layers<'a> {
    diagonal: Vec<&'a PauliTerm>,
    x: Vec<&'a PauliTerm>,
    y: Vec<&'a PauliTerm>,
    other: Vec<&'a PauliTerm>,
}

impl<'a> Layers<'a> {
    fn split(h: &'a Hamiltonian) -> Self {
        let mut layers = Layers {
            diagonal: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            other: Vec::new(),
        };
        for t in h.terms() {
            let (x, z) = (t.string.x_mask(), t.string.z_mask());
            if x == 0 {
                layers.diagonal.push(t);
            } else if z == 0 {
                layers.x.push(t);
            } else if x == z {
                layers.y.push(t);
            } else {
                layers.other.push(t);
            }
        }
        layers
    }
}

/// One slice `exp(-i dt H_Z) exp(-i dt H_X) exp(-i dt H_Y)`, with terms
/// outside those three families applied last, one at a time.
fn trotter_step(psi: &mut StateVector, h: &Hamiltonian, dt: f64) {
    let layers = Layers::split(h);
    if !layers.diagonal.is_empty() {
        for (b, a) in psi.amplitudes_mut().iter_mut().enumerate() {
            let energy: f64 = layers
                .diagonal
                .iter()
                .map(|t| t.coefficient * t.string.phase(b as u64).re)
                .sum();
            *a *= C64::from_polar(1.0, -dt * energy);
        }
    }
    for t in layers.x.iter().chain(&layers.y).chain(&layers.other) {
        psi.apply_pauli_rotation(&t.string, dt * t.coefficient);
    }
}

fn exact_step(psi: &mut StateVector, h: &Hamiltonian, dt: f64) -> Result<()> {
    let spectrum = dense_eigensolve(h, 0.0)?;
    let mut out = vec![ZERO; psi.dim()];
    for (k, lambda) in spectrum.eigenvalues().iter().enumerate() {
        let v = spectrum.eigenvector(k);
        let c: C64 = v
            .iter()
            .zip(psi.amplitudes())
            .map(|(vi, a)| vi.conj() * a)
            .sum();
        let c = c * C64::from_polar(1.0, -dt * lambda);
        for (o, vi) in out.iter_mut().zip(v) {
            *o += c * vi;
        }
    }
    *psi = StateVector::from_amplitudes(psi.num_qubits(), out)?;
    Ok(())
}

/// `||(1 - P) psi||` where `P` projects onto the cluster of `spectrum` that
/// contains eigen-index `target`.
pub fn preparation_error(
    prepared: &StateVector,
    spectrum: &EigenSolution,
    target: usize,
) -> Result<f64> {
    let norm = prepared.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm));
    }
    let cluster = spectrum.cluster_of(target)?;
    Ok(spectrum.outside_norm(prepared, cluster)?.min(1.0))
}

/// `||(1 - P_n(1)) U P_n(0) |initial>||` where `P_n(s)` projects onto the
/// `cluster_rank`-th distinct level of `H(s)`.
pub fn ap_subspace_error(
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
    cluster_rank: usize,
    initial: &StateVector,
) -> Result<f64> {
    let start = dense_eigensolve(h0, crate::eigen::DEFAULT_CLUSTER_TOLERANCE)?;
    let end = dense_eigensolve(ht, crate::eigen::DEFAULT_CLUSTER_TOLERANCE)?;
    let projected = start.project(initial, start.cluster_by_rank(cluster_rank)?)?;
    let evolved = evolve(&projected, h0, ht, sched)?;
    end.outside_norm(&evolved, end.cluster_by_rank(cluster_rank)?)
}

/// A dip of the gap between eigenvalues `lower` and `lower + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub s: f64,
    pub lower: usize,
    pub gap: f64,
}

/// Spectra of `H(s)` on a grid of `s`.
#[derive(Debug, Clone)]
pub struct SpectralFlow {
    pub s_grid: Vec<f64>,
    /// `eigenvalue_tracks[t][k]`: `k`-th eigenvalue at `s_grid[t]`, ascending.
    pub eigenvalue_tracks: Vec<Vec<f64>>,
    pub cluster_ids: Vec<Vec<usize>>,
    pub crossings: Vec<Crossing>,
}

impl SpectralFlow {
    pub fn num_points(&self) -> usize {
        self.s_grid.len()
    }

    /// Cluster sizes at grid point `t`.
    pub fn degeneracies(&self, t: usize) -> Vec<usize> {
        let ids = &self.cluster_ids[t];
        let mut sizes = vec![0usize; ids.last().map_or(0, |m| m + 1)];
        for &id in ids {
            sizes[id] += 1;
        }
        sizes
    }

    /// `Delta(s)`: distance between the eigenvalues with index in `range`
    /// and the rest of the spectrum, per grid point.
    pub fn partition_gap(&self, range: Range<usize>) -> Vec<f64> {
        self.eigenvalue_tracks
            .iter()
            .map(|ev| {
                let below = range.start.checked_sub(1).map(|k| ev[range.start] - ev[k]);
                let above = ev.get(range.end).map(|hi| hi - ev[range.end - 1]);
                match (below, above) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => f64::INFINITY,
                }
            })
            .collect()
    }

    /// CSV with columns `s,eigenvalue_index,eigenvalue,cluster_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Unsupported(format!("csv: {e}"));
        w.write_record(["s", "eigenvalue_index", "eigenvalue", "cluster_id"])
            .map_err(io)?;
        for (t, s) in self.s_grid.iter().enumerate() {
            for (k, (ev, id)) in self.eigenvalue_tracks[t]
                .iter()
                .zip(&self.cluster_ids[t])
                .enumerate()
            {
                w.write_record([
                    s.to_string(),
                    k.to_string(),
                    format!("{ev:.12}"),
                    id.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush()
            .map_err(|e| Error::Unsupported(format!("csv: {e}")))
    }
}

/// Dense spectra of `H(s)` at every `s` in `s_points`. An adjacent gap is
/// flagged as a crossing at an interior grid point where it has a local
/// minimum below `crossing_tolerance` after having been wider than it.
pub fn spectral_flow(
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    f: ScheduleFunction,
    s_points: &[f64],
    cluster_tolerance: f64,
    crossing_tolerance: f64,
) -> Result<SpectralFlow> {
    if s_points.is_empty() {
        return Err(Error::Empty("s grid"));
    }
    if h0.num_sites() > EXACT_QUBIT_LIMIT {
        return Err(Error::TooLarge {
            what: "spectral flow",
            num_qubits: h0.num_sites(),
            limit: EXACT_QUBIT_LIMIT,
        });
    }
    let spectra: Vec<EigenSolution> = s_points
        .par_iter()
        .map(|&s| dense_eigensolve(&Hamiltonian::interpolate(h0, ht, s, f)?, cluster_tolerance))
        .collect::<Result<_>>()?;
    let eigenvalue_tracks: Vec<Vec<f64>> =
        spectra.iter().map(|e| e.eigenvalues().to_vec()).collect();
    let cluster_ids = spectra.iter().map(|e| e.cluster_ids()).collect();

    let mut crossings = Vec::new();
    let dim = eigenvalue_tracks[0].len();
    for lower in 0..dim.saturating_sub(1) {
        let gaps: Vec<f64> = eigenvalue_tracks
            .iter()
            .map(|ev| ev[lower + 1] - ev[lower])
            .collect();
        let mut opened = gaps[0] > crossing_tolerance;
        for t in 1..gaps.len().saturating_sub(1) {
            let g = gaps[t];
            if opened && g < crossing_tolerance && g <= gaps[t - 1] && g < gaps[t + 1] {
                crossings.push(Crossing {
                    s: s_points[t],
                    lower,
                    gap: g,
                });
                opened = false;
            }
            if g > crossing_tolerance {
                opened = true;
            }
        }
    }
    crossings.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.lower.cmp(&b.lower)));
    Ok(SpectralFlow {
        s_grid: s_points.to_vec(),
        eigenvalue_tracks,
        cluster_ids,
        crossings,
    })
}

/// `n` evenly spaced points covering `[0, 1]` inclusive.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}
