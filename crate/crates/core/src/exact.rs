//! Exact propagation of the composite system.
//!
//! `ρ(t) = e^{−iHt} ρ₀ e^{iHt}` is evaluated from a single eigendecomposition
//! of `H`. `H₀` acts on the environment only and the two system levels are
//! degenerate, so the reduced system state is the same in the Schrödinger and
//! interaction pictures; trajectories produced here compare directly with the
//! master-equation solutions in [`crate::tcl`].

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64, STRUCTURAL_TOL, ZERO};
use crate::model::{derive_seed, BasisIndex, ModelParams};
use crate::superop::EffectiveState;

/// System ⊗ sector variables of a composite matrix, in the sector basis
/// rotated by `theta`:
///
/// ```text
/// out[(l,j),(m,k)] = Σ_n ⟨l, n, j_θ| ρ |m, n, k_θ⟩
/// ```
pub fn sector_variables(rho: &ComplexMatrix, theta: f64, params: &ModelParams) -> Result<EffectiveState> {
    let basis = params.basis();
    if rho.shape() != (basis.dim(), basis.dim()) {
        return Err(Error::DimensionMismatch {
            context: "sector_variables",
            expected: format!("{0}x{0}", basis.dim()),
            found: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    let unrotated = EffectiveState::new(ComplexMatrix::from_fn(4, 4, |a, b| {
        let (l, j) = (a / 2, a % 2 + 1);
        let (m, k) = (b / 2, b % 2 + 1);
        (1..=basis.n_levels())
            .map(|n| rho[(basis.index(l, n, j), basis.index(m, n, k))])
            .sum()
    }))?;
    rotate(&unrotated, theta)
}

fn rotate(state: &EffectiveState, theta: f64) -> Result<EffectiveState> {
    if theta == 0.0 {
        return Ok(state.clone());
    }
    EffectiveState::new(state.in_rotated_basis(theta))
}

/// Spectral propagator for one Hamiltonian and one initial state.
pub struct Propagator {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
    /// `V† ρ₀ V`.
    rho_eigen: ComplexMatrix,
    basis: BasisIndex,
    /// For each unordered pair `a ≤ b` of system ⊗ sector indices,
    /// `r̃_pq Σ_n V[(a,n),p] conj(V[(b,n),q])`.
    sector_kernels: Vec<((usize, usize), ComplexMatrix)>,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix, rho0: &ComplexMatrix, params: &ModelParams) -> Result<Self> {
        let basis = params.basis();
        if h.shape() != (basis.dim(), basis.dim()) || rho0.shape() != h.shape() {
            return Err(Error::DimensionMismatch {
                context: "Propagator::new",
                expected: format!("{0}x{0} Hamiltonian and state", basis.dim()),
                found: format!("{:?} and {:?}", h.shape(), rho0.shape()),
            });
        }
        rho0.check_density(STRUCTURAL_TOL)?;
        let eig = eig_hermitian(h)?;
        let vectors = eig.vectors;
        let rho_eigen = vectors.dagger().matmul(rho0).matmul(&vectors);

        let dim = basis.dim();
        let rows_of = |a: usize| -> ComplexMatrix {
            let (l, j) = (a / 2, a % 2 + 1);
            ComplexMatrix::from_fn(basis.n_levels(), dim, |n, p| vectors[(basis.index(l, n + 1, j), p)])
        };
        let blocks: Vec<ComplexMatrix> = (0..4).map(rows_of).collect();
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a..4).map(move |b| (a, b))).collect();
        let sector_kernels = pairs
            .par_iter()
            .map(|&(a, b)| {
                let overlap = blocks[a].transpose().matmul(&blocks[b].conj());
                let kernel = ComplexMatrix::from_fn(dim, dim, |p, q| rho_eigen[(p, q)] * overlap[(p, q)]);
                ((a, b), kernel)
            })
            .collect();

        Ok(Self {
            energies: eig.values,
            vectors,
            rho_eigen,
            basis,
            sector_kernels,
        })
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect()
    }

    /// Full composite state at time `t`.
    pub fn state_at(&self, t: f64) -> ComplexMatrix {
        let phi = self.phases(t);
        let evolved = ComplexMatrix::from_fn(phi.len(), phi.len(), |p, q| {
            phi[p] * self.rho_eigen[(p, q)] * phi[q].conj()
        });
        self.vectors.matmul(&evolved).matmul(&self.vectors.dagger())
    }

    /// Unrotated system ⊗ sector variables at time `t`, without forming `ρ(t)`.
    pub fn effective_at(&self, t: f64) -> EffectiveState {
        let phi = self.phases(t);
        let dim = self.basis.dim();
        let mut out = ComplexMatrix::zeros(4, 4);
        for ((a, b), kernel) in &self.sector_kernels {
            let mut acc = ZERO;
            for p in 0..dim {
                let row = kernel.row(p);
                let inner: C64 = row.iter().zip(&phi).map(|(k, f)| k * f.conj()).sum();
                acc += phi[p] * inner;
            }
            out[(*a, *b)] = acc;
            if a != b {
                out[(*b, *a)] = acc.conj();
            }
        }
        EffectiveState::new(out).expect("4x4")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub params: ModelParams,
    /// Coupling seeds of every realization contributing to the trajectory.
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Reduced 2×2 system state per time.
    pub system_states: Vec<ComplexMatrix>,
    pub theta_basis: f64,
    /// Sector variables in the `theta_basis` rotation.
    pub sector_states: Vec<EffectiveState>,
    /// Sector variables in the unrotated basis.
    pub sector_states_zero: Vec<EffectiveState>,
    /// Sector variables in the `|±⟩` basis.
    pub sector_states_quarter: Vec<EffectiveState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn rho00(&self) -> Vec<f64> {
        self.system_states.iter().map(|s| s[(0, 0)].re).collect()
    }

    pub fn rho01(&self) -> Vec<C64> {
        self.system_states.iter().map(|s| s[(0, 1)]).collect()
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "time grid is empty".into(),
        });
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "times must be finite and start at or after 0".into(),
        });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "times must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Uniform grid of `points` times on `[0, t_max]`.
pub fn uniform_times(points: usize, t_max: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect(),
    }
}

pub fn evolve_exact(
    h: &ComplexMatrix,
    rho0: &ComplexMatrix,
    times: &[f64],
    theta_basis: f64,
    params: &ModelParams,
) -> Result<Trajectory> {
    check_times(times)?;
    let prop = Propagator::new(h, rho0, params)?;
    let effective: Vec<EffectiveState> = times.par_iter().map(|&t| prop.effective_at(t)).collect();
    let mut traj = Trajectory {
        times: times.to_vec(),
        system_states: effective.iter().map(EffectiveState::reduced_system).collect(),
        theta_basis,
        sector_states: Vec::with_capacity(times.len()),
        sector_states_zero: Vec::new(),
        sector_states_quarter: Vec::with_capacity(times.len()),
        meta: TrajectoryMeta {
            params: *params,
            seeds: vec![params.seed],
        },
    };
    for e in &effective {
        traj.sector_states.push(rotate(e, theta_basis)?);
        traj.sector_states_quarter.push(rotate(e, FRAC_PI_4)?);
    }
    traj.sector_states_zero = effective;
    Ok(traj)
}

/// Mean of `run` over realizations whose seeds derive from `params.seed`.
pub fn ensemble_average<F>(params: &ModelParams, n_realizations: usize, run: F) -> Result<Trajectory>
where
    F: Fn(&ModelParams) -> Result<Trajectory> + Sync,
{
    if n_realizations < 1 {
        return Err(Error::InvalidParameter {
            name: "n_realizations",
            reason: "at least one realization is required".into(),
        });
    }
    let seeds: Vec<u64> = (0..n_realizations as u64).map(|k| derive_seed(params.seed, k)).collect();
    ensemble_average_seeds(params, &seeds, run)
}

/// Mean of `run` over an explicit list of coupling seeds.
pub fn ensemble_average_seeds<F>(params: &ModelParams, seeds: &[u64], run: F) -> Result<Trajectory>
where
    F: Fn(&ModelParams) -> Result<Trajectory> + Sync,
{
    if seeds.is_empty() {
        return Err(Error::InvalidParameter {
            name: "seeds",
            reason: "at least one realization is required".into(),
        });
    }
    let runs: Vec<Trajectory> = seeds
        .par_iter()
        .map(|&s| run(&params.with_seed(s)))
        .collect::<Result<_>>()?;
    let first = &runs[0];
    if runs.iter().any(|r| r.times != first.times || r.theta_basis != first.theta_basis) {
        return Err(Error::DimensionMismatch {
            context: "ensemble_average",
            expected: "identical time grids and bases across realizations".into(),
            found: "differing grids".into(),
        });
    }
    let w = 1.0 / runs.len() as f64;
    let mean_mats = |pick: &dyn Fn(&Trajectory) -> &Vec<ComplexMatrix>| -> Vec<ComplexMatrix> {
        (0..first.times.len())
            .map(|i| {
                let mut acc = ComplexMatrix::zeros(pick(first)[i].rows(), pick(first)[i].cols());
                for r in &runs {
                    acc += &pick(r)[i];
                }
                acc.scale_real(w)
            })
            .collect()
    };
    let mean_states = |pick: &dyn Fn(&Trajectory) -> &Vec<EffectiveState>| -> Vec<EffectiveState> {
        (0..first.times.len())
            .map(|i| {
                let mut acc = EffectiveState::zeros();
                for r in &runs {
                    acc = &acc + &pick(r)[i];
                }
                acc.scale_real(w)
            })
            .collect()
    };
    Ok(Trajectory {
        times: first.times.clone(),
        system_states: mean_mats(&|r| &r.system_states),
        theta_basis: first.theta_basis,
        sector_states: mean_states(&|r| &r.sector_states),
        sector_states_zero: mean_states(&|r| &r.sector_states_zero),
        sector_states_quarter: mean_states(&|r| &r.sector_states_quarter),
        meta: TrajectoryMeta {
            params: *params,
            seeds: runs.iter().flat_map(|r| r.meta.seeds.iter().copied()).collect(),
        },
    })
}
