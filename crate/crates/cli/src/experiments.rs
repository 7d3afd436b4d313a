//! Orchestration of the three experiment kinds. Each `compute_*` function
//! returns an in-memory result; writing is left to [`crate::output`].

use std::f64::consts::FRAC_PI_4;

use ecps::exact::{ensemble_average, evolve_exact, sector_variables, uniform_times, Trajectory};
use ecps::linalg::{ComplexMatrix, C64};
use ecps::model::{build_hamiltonian, derive_seed, initial_state, sample_couplings, EnvSpec, ModelParams};
use ecps::superop::{projector_superop, scan_delta, theta_grid, ScanTable};
use ecps::tcl::{ecps_evolve, solve_tcl, steady_state, EcpsComponent, TclGenerator, TclSolution};
use ecps::EffectiveState;

use crate::config::{ExperimentConfig, SystemSpec};
use crate::error::CliError;

/// TCL solution for one projector angle.
#[derive(Clone, Debug)]
pub struct ProjectedRun {
    pub theta: f64,
    /// Largest entry of the irrelevant part `(I − P_θ)ρ₀` that was removed
    /// before solving.
    pub dropped_irrelevant: f64,
    pub solution: TclSolution,
}

#[derive(Clone, Debug)]
pub struct CompareResult {
    pub params: ModelParams,
    pub seeds: Vec<u64>,
    pub times: Vec<f64>,
    pub exact: Trajectory,
    pub tcl: Vec<ProjectedRun>,
    pub ecps: Option<TclSolution>,
}

#[derive(Clone, Debug)]
pub struct SteadyComponent {
    pub weight: f64,
    pub theta: f64,
    pub steady: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub params: ModelParams,
    pub seeds: Vec<u64>,
    pub t_eval: f64,
    pub exact: ComplexMatrix,
    pub cps: ComplexMatrix,
    pub ecps: ComplexMatrix,
    pub components: Vec<SteadyComponent>,
}

/// Exact trajectory averaged over `realizations` coupling draws.
pub fn exact_ensemble(
    params: &ModelParams,
    rho0: &ComplexMatrix,
    times: &[f64],
    realizations: usize,
) -> Result<Trajectory, CliError> {
    Ok(ensemble_average(params, realizations, |p| {
        let h = build_hamiltonian(p, &sample_couplings(p));
        evolve_exact(&h, rho0, times, 0.0, p)
    })?)
}

fn composite(system: &SystemSpec, env: EnvSpec, params: &ModelParams) -> Result<ComplexMatrix, CliError> {
    Ok(initial_state(&system.matrix(), env, params)?)
}

pub fn compare_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let lambda = cfg.model.params().lambda();
    uniform_times(cfg.time.points, cfg.time.resolve_t_max(lambda))
}

pub fn compute_compare(cfg: &ExperimentConfig) -> Result<CompareResult, CliError> {
    let params = cfg.model.params();
    let lambda = params.lambda();
    let times = compare_times(cfg);

    let (rho0, components) = match (&cfg.initial, &cfg.ecps) {
        (Some(init), None) => (composite(&init.system, init.environment.to_env(), &params)?, Vec::new()),
        (None, Some(ecps)) => {
            let mut total = ComplexMatrix::zeros(params.dim(), params.dim());
            let mut comps = Vec::with_capacity(ecps.components.len());
            for c in &ecps.components {
                let rho = composite(&c.system, c.environment.to_env(), &params)?;
                comps.push(EcpsComponent {
                    weight: c.weight,
                    state: sector_variables(&rho, 0.0, &params)?,
                    theta: c.theta.0,
                });
                total += &rho.scale_real(c.weight);
            }
            (total, comps)
        }
        _ => unreachable!("validated config has exactly one of [initial] and [ecps]"),
    };

    let exact = exact_ensemble(&params, &rho0, &times, cfg.ensemble.realizations)?;
    let effective0 = sector_variables(&rho0, 0.0, &params)?;

    let mut tcl = Vec::with_capacity(cfg.projectors.thetas.len());
    for theta in cfg.projectors.thetas.iter().map(|a| a.0) {
        let projected = projector_superop(theta).apply(effective0.matrix());
        let dropped = (&projected - effective0.matrix()).max_abs();
        let start = if cfg.projectors.project_initial {
            EffectiveState::new(projected)?
        } else {
            effective0.clone()
        };
        let solution = solve_tcl(&TclGenerator::new(theta, params.xi, lambda), &start, &times)?;
        tcl.push(ProjectedRun {
            theta,
            dropped_irrelevant: dropped,
            solution,
        });
    }

    let ecps = if components.is_empty() {
        None
    } else {
        Some(ecps_evolve(&components, params.xi, lambda, &times)?)
    };

    Ok(CompareResult {
        params,
        seeds: exact.meta.seeds.clone(),
        times,
        exact,
        tcl,
        ecps,
    })
}

pub fn compute_choi_scan(cfg: &ExperimentConfig) -> ScanTable {
    let grid = theta_grid(cfg.scan.theta_points, cfg.scan.theta_max.0);
    scan_delta(&cfg.scan.xi, &grid, cfg.scan.lambda)
}

/// The two mixture components: `diag(P, 1 − P) ⊗ I/2N` and
/// `½[[1, A], [A, 1]] ⊗ Π⁺/N`.
pub fn steady_state_components(cfg: &ExperimentConfig, params: &ModelParams) -> Result<[ComplexMatrix; 2], CliError> {
    let s = &cfg.steady_state;
    let first = composite(&SystemSpec::Diagonal { p: s.p }, EnvSpec::MaximallyMixed, params)?;
    let second = composite(
        &SystemSpec::Coherent {
            a: s.coherence,
            a_im: 0.0,
        },
        EnvSpec::PlusProjector,
        params,
    )?;
    Ok([first, second])
}

pub fn compute_steady_state(cfg: &ExperimentConfig) -> Result<SteadyStateResult, CliError> {
    let params = cfg.model.params();
    let lambda = params.lambda();
    let s = &cfg.steady_state;
    let [rho1, rho2] = steady_state_components(cfg, &params)?;
    let weights = [s.p1, 1.0 - s.p1];
    let thetas = [0.0, FRAC_PI_4];

    let mixture = &rho1.scale_real(weights[0]) + &rho2.scale_real(weights[1]);
    let t_eval = s.t_over_lambda / lambda;
    let exact = exact_ensemble(&params, &mixture, &[t_eval], s.realizations)?;

    let cps = steady_state(
        &TclGenerator::new(FRAC_PI_4, params.xi, lambda),
        &sector_variables(&mixture, 0.0, &params)?,
    )?
    .reduced_system();

    let mut components = Vec::new();
    let mut ecps = ComplexMatrix::zeros(2, 2);
    for ((rho, weight), theta) in [rho1, rho2].iter().zip(weights).zip(thetas) {
        if weight == 0.0 {
            continue;
        }
        let steady = steady_state(&TclGenerator::new(theta, params.xi, lambda), &sector_variables(rho, 0.0, &params)?)?
            .reduced_system();
        ecps += &steady.scale_real(weight);
        components.push(SteadyComponent { weight, theta, steady });
    }

    Ok(SteadyStateResult {
        params,
        seeds: exact.meta.seeds.clone(),
        t_eval,
        exact: exact.system_states[0].clone(),
        cps,
        ecps,
        components,
    })
}

/// Coupling seeds used for `realizations` draws from `base`.
pub fn resolved_seeds(base: u64, realizations: usize) -> Vec<u64> {
    (0..realizations as u64).map(|k| derive_seed(base, k)).collect()
}

/// Entries reported for a 2×2 reduced state.
pub fn reduced_entries(m: &ComplexMatrix) -> [(&'static str, f64); 4] {
    let c: C64 = m[(0, 1)];
    [
        ("rho00", m[(0, 0)].re),
        ("rho11", m[(1, 1)].re),
        ("rho01_re", c.re),
        ("rho01_im", c.im),
    ]
}
