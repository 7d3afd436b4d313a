//! Second-order time-convolutionless dynamics on the system ⊗ sector space,
//! and the extended scheme that evolves each component of a decomposed
//! initial state under its own projector.
//!
//! All equations here are homogeneous: the initial state must already be
//! invariant under the projector it is evolved with. Inputs with an
//! irrelevant part are rejected rather than silently projected.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, expm, null_space, solve, ComplexMatrix, C64, STRUCTURAL_TOL};
use crate::superop::{projector_superop, tcl_generator, EffectiveState, SuperOp};

/// Tolerance for the homogeneity precondition `P_θ ρ₀ = ρ₀`.
pub const HOMOGENEITY_TOL: f64 = 1e-10;

/// A projected generator together with the projector angle it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct TclGenerator {
    pub op: SuperOp,
    pub theta: f64,
    pub xi: f64,
    pub lambda: f64,
}

impl TclGenerator {
    /// `P_θ G P_θ` for the averaged second-order generator.
    pub fn new(theta: f64, xi: f64, lambda: f64) -> Self {
        Self {
            op: tcl_generator(theta, xi, lambda),
            theta,
            xi,
            lambda,
        }
    }

    pub fn zero(theta: f64) -> Self {
        Self {
            op: SuperOp::zero(),
            theta,
            xi: 0.0,
            lambda: 0.0,
        }
    }

    pub fn from_parts(op: SuperOp, theta: f64, xi: f64, lambda: f64) -> Self {
        Self { op, theta, xi, lambda }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorProvenance {
    pub theta: f64,
    pub xi: f64,
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TclSolution {
    pub times: Vec<f64>,
    pub states: Vec<EffectiveState>,
    pub system_states: Vec<ComplexMatrix>,
    /// One entry per evolved component.
    pub provenance: Vec<GeneratorProvenance>,
}

impl TclSolution {
    pub fn rho00(&self) -> Vec<f64> {
        self.system_states.iter().map(|s| s[(0, 0)].re).collect()
    }

    pub fn rho01(&self) -> Vec<C64> {
        self.system_states.iter().map(|s| s[(0, 1)]).collect()
    }
}

/// One term `P^i ρ^i` of a decomposed initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct EcpsComponent {
    pub weight: f64,
    pub state: EffectiveState,
    pub theta: f64,
}

/// Largest entry of `P_θ ρ − ρ`.
pub fn homogeneity_residual(rho: &EffectiveState, theta: f64) -> f64 {
    let projected = projector_superop(theta).apply(rho.matrix());
    (&projected - rho.matrix()).max_abs()
}

fn check_homogeneous(rho: &EffectiveState, theta: f64, component: Option<usize>) -> Result<()> {
    let residual = homogeneity_residual(rho, theta);
    if residual > HOMOGENEITY_TOL {
        return Err(Error::NotHomogeneous {
            component,
            theta,
            residual,
        });
    }
    Ok(())
}

/// `vec ρ(t) = exp(K t) vec ρ₀` on each requested time.
pub fn solve_tcl(k: &TclGenerator, rho0: &EffectiveState, times: &[f64]) -> Result<TclSolution> {
    crate::exact::check_times(times)?;
    check_homogeneous(rho0, k.theta, None)?;
    let v0 = rho0.to_vec();
    let states: Vec<EffectiveState> = times
        .par_iter()
        .map(|&t| {
            let prop = expm(&k.op.matrix().scale_real(t));
            EffectiveState::from_vec(&prop.apply(&v0)).expect("16-vector")
        })
        .collect();
    Ok(TclSolution {
        times: times.to_vec(),
        system_states: states.iter().map(EffectiveState::reduced_system).collect(),
        states,
        provenance: vec![GeneratorProvenance {
            theta: k.theta,
            xi: k.xi,
            lambda: k.lambda,
            weight: 1.0,
        }],
    })
}

fn check_components(components: &[EcpsComponent]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::InvalidParameter {
            name: "components",
            reason: "at least one component is required".into(),
        });
    }
    for (i, c) in components.iter().enumerate() {
        if !(c.weight.is_finite() && c.weight > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("component {i}: weight must be positive, got {}", c.weight),
            });
        }
        c.state.matrix().check_density(STRUCTURAL_TOL).map_err(|e| match e {
            Error::NotDensity { reason } => Error::NotDensity {
                reason: format!("component {i}: {reason}"),
            },
            other => other,
        })?;
        check_homogeneous(&c.state, c.theta, Some(i))?;
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > STRUCTURAL_TOL {
        return Err(Error::InvalidParameter {
            name: "weight",
            reason: format!("weights must sum to 1, got {total}"),
        });
    }
    Ok(())
}

/// Evolves every component under `P_{θ_i} G P_{θ_i}` and sums the weighted
/// solutions.
pub fn ecps_evolve(components: &[EcpsComponent], xi: f64, lambda: f64, times: &[f64]) -> Result<TclSolution> {
    check_components(components)?;
    let parts: Vec<TclSolution> = components
        .par_iter()
        .map(|c| solve_tcl(&TclGenerator::new(c.theta, xi, lambda), &c.state, times))
        .collect::<Result<_>>()?;
    let states: Vec<EffectiveState> = (0..times.len())
        .map(|i| {
            let mut acc = EffectiveState::zeros();
            for (c, part) in components.iter().zip(&parts) {
                acc = &acc + &part.states[i].scale_real(c.weight);
            }
            acc
        })
        .collect();
    Ok(TclSolution {
        times: times.to_vec(),
        system_states: states.iter().map(EffectiveState::reduced_system).collect(),
        states,
        provenance: components
            .iter()
            .map(|c| GeneratorProvenance {
                theta: c.theta,
                xi,
                lambda,
                weight: c.weight,
            })
            .collect(),
    })
}

/// `lim_{t→∞} exp(K t) ρ₀`, by projecting onto the kernel of `K` along its
/// other spectral subspaces.
pub fn steady_state(k: &TclGenerator, rho0: &EffectiveState) -> Result<EffectiveState> {
    check_homogeneous(rho0, k.theta, None)?;
    let m = k.op.matrix();
    let scale = m.max_abs().max(1.0);
    let tol = 1e-10 * scale;

    let spectrum = k.op.spectrum()?;
    let max_real = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_real > tol {
        return Err(Error::Divergent { max_real });
    }
    if let Some(z) = spectrum.iter().find(|z| z.re.abs() <= tol && z.im.abs() > tol) {
        return Err(Error::Numerical(format!(
            "generator has a purely imaginary eigenvalue {z}; the solution oscillates without a limit"
        )));
    }

    let right = null_space(m, 1e-10);
    let left = null_space(&m.dagger(), 1e-10);
    if right.cols() != left.cols() {
        return Err(Error::DefectiveKernel);
    }
    if right.cols() == 0 {
        return EffectiveState::new(ComplexMatrix::zeros(4, 4));
    }
    let overlap = left.dagger().matmul(&right);
    let sv = linalg::singular_values(&overlap);
    if sv.last().copied().unwrap_or(0.0) < 1e-8 {
        return Err(Error::DefectiveKernel);
    }
    // Π₀ = R (L†R)⁻¹ L†
    let coeffs = solve(&overlap, &left.dagger())?;
    let pi0 = right.matmul(&coeffs);
    EffectiveState::from_vec(&pi0.apply(&rho0.to_vec()))
}
