//! The spin–band model: a qubit coupled to an environment of `N` equidistant
//! levels, each split into two branches.
//!
//! # Basis ordering
//!
//! The composite space has dimension `4N`. A basis state is labelled by the
//! system level `m ∈ {0, 1}`, the environment level `n ∈ 1..=N` and the branch
//! `i ∈ {1, 2}`, and sits at flat index
//!
//! ```text
//! m·2N + (n − 1)·2 + (i − 1)
//! ```
//!
//! System-major, then level, then branch. This is the ordering produced by
//! `kron(system_op, kron(level_op, branch_op))`, so operators can be built
//! as Kronecker products and indexed through [`BasisIndex`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64, I, STRUCTURAL_TOL, ZERO};

/// Name of the generator behind [`sample_couplings`], recorded in outputs.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha, seed_from_u64)";
/// Name of the mixing function behind [`derive_seed`].
pub const SEED_DERIVATION: &str = "SplitMix64(base ^ k * 0x9E3779B97F4A7C15), k >= 1; k = 0 uses base";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Number of environment levels; the environment has `2N` states.
    pub n_levels: usize,
    /// Band width.
    pub delta_eps: f64,
    /// Coupling strength.
    pub alpha: f64,
    /// Mixing between the two interaction channels, in `[0, 1]`.
    pub xi: f64,
    pub seed: u64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 1 {
            return Err(Error::InvalidParameter {
                name: "n_levels",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.delta_eps.is_finite() && self.delta_eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta_eps",
                reason: format!("must be positive and finite, got {}", self.delta_eps),
            });
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be non-negative and finite, got {}", self.alpha),
            });
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::InvalidParameter {
                name: "xi",
                reason: format!("must lie in [0, 1], got {}", self.xi),
            });
        }
        Ok(())
    }

    /// Inverse level spacing density factor `2π/δε`.
    pub fn gamma(&self) -> f64 {
        2.0 * PI / self.delta_eps
    }

    /// Relaxation rate `α²γN`.
    pub fn lambda(&self) -> f64 {
        self.alpha * self.alpha * self.gamma() * self.n_levels as f64
    }

    pub fn env_dim(&self) -> usize {
        2 * self.n_levels
    }

    pub fn dim(&self) -> usize {
        4 * self.n_levels
    }

    pub fn basis(&self) -> BasisIndex {
        BasisIndex::new(self.n_levels)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// Flat-index bookkeeping for the composite space. See the module docs for
/// the ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisIndex {
    n_levels: usize,
}

impl BasisIndex {
    pub fn new(n_levels: usize) -> Self {
        Self { n_levels }
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn dim(&self) -> usize {
        4 * self.n_levels
    }

    pub fn env_dim(&self) -> usize {
        2 * self.n_levels
    }

    /// `m ∈ {0,1}`, `n ∈ 1..=N`, `branch ∈ {1,2}`.
    pub fn index(&self, m: usize, n: usize, branch: usize) -> usize {
        debug_assert!(m < 2 && (1..=self.n_levels).contains(&n) && (1..=2).contains(&branch));
        m * self.env_dim() + self.env_index(n, branch)
    }

    pub fn env_index(&self, n: usize, branch: usize) -> usize {
        (n - 1) * 2 + (branch - 1)
    }

    /// Inverse of [`BasisIndex::index`].
    pub fn decompose(&self, idx: usize) -> (usize, usize, usize) {
        debug_assert!(idx < self.dim());
        let m = idx / self.env_dim();
        let e = idx % self.env_dim();
        (m, e / 2 + 1, e % 2 + 1)
    }
}

/// Random coupling amplitudes `c(n₁, n₂)` and `c′(n₁, n₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    pub c: ComplexMatrix,
    pub c_prime: ComplexMatrix,
}

/// Draws both coupling matrices from a generator seeded with `params.seed`.
/// Entries are complex Gaussians with real and imaginary parts of variance
/// ½ each, so `⟨|c|²⟩ = 1` and `⟨c²⟩ = 0`. `c` is filled row-major first,
/// then `c′`.
pub fn sample_couplings(params: &ModelParams) -> CouplingSet {
    let n = params.n_levels;
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    };
    let c = ComplexMatrix::from_fn(n, n, |_, _| draw());
    let c_prime = ComplexMatrix::from_fn(n, n, |_, _| draw());
    CouplingSet { c, c_prime }
}

/// Seed of realization `k` derived from `base`. Realization 0 reuses the base
/// seed so a one-member ensemble reproduces a single run.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    if k == 0 {
        return base;
    }
    let mut z = base ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).expect("2x2")
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `(σx − iσy)/2 = |1⟩⟨0|`.
pub fn sigma_plus() -> ComplexMatrix {
    (&sigma_x() - &sigma_y().scale(I)).scale_real(0.5)
}

pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().dagger()
}

/// `(σy − iσz)/2`, the ladder operator of the x axis.
pub fn sigma_right() -> ComplexMatrix {
    (&sigma_y() - &sigma_z().scale(I)).scale_real(0.5)
}

pub fn sigma_left() -> ComplexMatrix {
    sigma_right().dagger()
}

/// `|1⟩⟨2|` on a branch pair.
pub fn branch_ladder() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]])
}

/// `|+⟩⟨−|` on a branch pair, `|±⟩ = (|1⟩ ± |2⟩)/√2`.
pub fn branch_ladder_pm() -> ComplexMatrix {
    let plus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
    let minus = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)];
    ComplexMatrix::outer(&plus, &minus)
}

/// Rotated branch vector `|i, θ⟩`: `(cos θ, sin θ)` for branch 1 and
/// `(−sin θ, cos θ)` for branch 2.
pub fn branch_vector(theta: f64, branch: usize) -> Result<[f64; 2]> {
    let (s, c) = theta.sin_cos();
    match branch {
        1 => Ok([c, s]),
        2 => Ok([-s, c]),
        _ => Err(Error::InvalidParameter {
            name: "branch",
            reason: format!("must be 1 or 2, got {branch}"),
        }),
    }
}

/// Level energies `δε·n/N`, degenerate in system level and branch.
pub fn build_h0(params: &ModelParams) -> ComplexMatrix {
    let basis = params.basis();
    let n_levels = params.n_levels as f64;
    let diag: Vec<f64> = (0..basis.dim())
        .map(|idx| {
            let (_, n, _) = basis.decompose(idx);
            params.delta_eps * n as f64 / n_levels
        })
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// The two interaction channels, prefactors `(1 − ξ)` and `ξ` included.
pub fn build_v(params: &ModelParams, couplings: &CouplingSet) -> (ComplexMatrix, ComplexMatrix) {
    let half1 = kron(&sigma_plus(), &kron(&couplings.c, &branch_ladder()))
        .scale_real(1.0 - params.xi);
    let v1 = &half1 + &half1.dagger();
    let half2 = kron(&sigma_right(), &kron(&couplings.c_prime, &branch_ladder_pm()))
        .scale_real(params.xi);
    let v2 = &half2 + &half2.dagger();
    (v1, v2)
}

/// `H₀ + α(V₁ + V₂)`.
pub fn build_hamiltonian(params: &ModelParams, couplings: &CouplingSet) -> ComplexMatrix {
    let (v1, v2) = build_v(params, couplings);
    &build_h0(params) + &(&v1 + &v2).scale_real(params.alpha)
}

/// Environment projector `Σ_n |n,i,θ⟩⟨n,i,θ|` on the `2N`-dim environment.
pub fn build_projector(theta: f64, branch: usize, params: &ModelParams) -> Result<ComplexMatrix> {
    let u = branch_vector(theta, branch)?;
    let uu = ComplexMatrix::from_real(&[&[u[0] * u[0], u[0] * u[1]], &[u[1] * u[0], u[1] * u[1]]]);
    Ok(kron(&ComplexMatrix::identity(params.n_levels), &uu))
}

/// Environment part of an initial product state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvSpec {
    /// `Π^i_θ / N`.
    BranchProjector { theta: f64, branch: usize },
    /// `I / 2N`.
    MaximallyMixed,
    /// `Π⁺ / N`, the θ = π/4 branch-1 projector.
    PlusProjector,
}

impl EnvSpec {
    pub fn state(&self, params: &ModelParams) -> Result<ComplexMatrix> {
        let n = params.n_levels as f64;
        match *self {
            EnvSpec::BranchProjector { theta, branch } => {
                Ok(build_projector(theta, branch, params)?.scale_real(1.0 / n))
            }
            EnvSpec::MaximallyMixed => {
                Ok(ComplexMatrix::identity(params.env_dim()).scale_real(0.5 / n))
            }
            EnvSpec::PlusProjector => Ok(build_projector(FRAC_PI_4, 1, params)?.scale_real(1.0 / n)),
        }
    }
}

/// `sys ⊗ env`, with the environment state normalized.
pub fn initial_state(sys: &ComplexMatrix, env: EnvSpec, params: &ModelParams) -> Result<ComplexMatrix> {
    if sys.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            context: "initial_state",
            expected: "2x2 system state".into(),
            found: format!("{}x{}", sys.rows(), sys.cols()),
        });
    }
    sys.check_density(STRUCTURAL_TOL)?;
    Ok(kron(sys, &env.state(params)?))
}

/// Pure system state `|ψ⟩⟨ψ|` from amplitudes on `|0⟩, |1⟩`.
pub fn pure_state(amp0: C64, amp1: C64) -> ComplexMatrix {
    ComplexMatrix::outer(&[amp0, amp1], &[amp0, amp1])
}

/// `O − σz` with `O = Π² − Π¹` the branch parity. Commutes with the
/// Hamiltonian at ξ = 0: each jump of `σ₊ ⊗ |1⟩⟨2|` lowers both terms by 2.
pub fn conserved_charge(params: &ModelParams) -> ComplexMatrix {
    let parity = kron(
        &ComplexMatrix::identity(params.n_levels),
        &ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]),
    );
    let o = kron(&ComplexMatrix::identity(2), &parity);
    let sz = kron(&sigma_z(), &ComplexMatrix::identity(params.env_dim()));
    &o - &sz
}

/// Pure system state with real amplitudes.
pub fn real_pure_state(a0: f64, a1: f64) -> ComplexMatrix {
    pure_state(C64::new(a0, 0.0), C64::new(a1, 0.0))
}

/// `diag(p, 1 − p)`.
pub fn diagonal_state(p: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn params(n: usize, xi: f64) -> ModelParams {
        ModelParams {
            n_levels: n,
            delta_eps: 0.5,
            alpha: 5e-3,
            xi,
            seed: 11,
        }
    }

    #[test]
    fn validation() {
        assert!(params(3, 0.5).validate().is_ok());
        assert!(params(0, 0.5).validate().is_err());
        assert!(params(3, 1.5).validate().is_err());
        assert!(ModelParams { delta_eps: 0.0, ..params(3, 0.0) }.validate().is_err());
        assert!(ModelParams { alpha: -1.0, ..params(3, 0.0) }.validate().is_err());
    }

    #[test]
    fn rate_for_figure_parameters() {
        let p = ModelParams { n_levels: 60, ..params(60, 0.0) };
        assert!((p.gamma() - 4.0 * PI).abs() < 1e-14);
        assert!((p.lambda() - 25e-6 * 4.0 * PI * 60.0).abs() < 1e-14);
    }

    #[test]
    fn basis_index_is_bijective() {
        let b = BasisIndex::new(5);
        let mut seen = vec![false; b.dim()];
        for m in 0..2 {
            for n in 1..=5 {
                for i in 1..=2 {
                    let idx = b.index(m, n, i);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(b.decompose(idx), (m, n, i));
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn couplings_are_deterministic() {
        let p = params(4, 0.5);
        assert_eq!(sample_couplings(&p), sample_couplings(&p));
        assert_ne!(sample_couplings(&p), sample_couplings(&p.with_seed(12)));
    }

    #[test]
    fn ladder_operators() {
        let sp = sigma_plus();
        assert_eq!(sp, ComplexMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]));
        let sr = sigma_right();
        let half = C64::new(0.0, 0.5);
        assert_eq!(sr, ComplexMatrix::from_vec(2, 2, vec![-half, -half, half, half]).unwrap());
        // σ→ is nilpotent like σ₊.
        assert!(sr.matmul(&sr).max_abs() < 1e-15);
        assert!(branch_ladder_pm().matmul(&branch_ladder_pm()).max_abs() < 1e-15);
    }

    #[test]
    fn h0_single_level() {
        let p = params(1, 0.0);
        let h0 = build_h0(&p);
        assert_eq!(h0, ComplexMatrix::from_real_diagonal(&[0.5; 4]));
    }

    #[test]
    fn h0_two_levels() {
        let p = params(2, 0.0);
        let h0 = build_h0(&p);
        let mut energies: Vec<f64> = h0.diagonal().iter().map(|z| z.re).collect();
        energies.sort_by(f64::total_cmp);
        assert_eq!(energies, vec![0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(h0.max_abs(), 0.5);
        assert!((&h0 - &ComplexMatrix::from_diagonal(&h0.diagonal())).max_abs() == 0.0);
    }

    #[test]
    fn h0_commutes_with_system_operators() {
        let p = params(4, 0.3);
        let h0 = build_h0(&p);
        for s in [sigma_x(), sigma_y(), sigma_z()] {
            let op = kron(&s, &ComplexMatrix::identity(p.env_dim()));
            assert!(h0.commutator(&op).max_abs() < 1e-15);
        }
    }

    #[test]
    fn interaction_prefactors_vanish_exactly() {
        let p1 = params(3, 1.0);
        let (v1, v2) = build_v(&p1, &sample_couplings(&p1));
        assert_eq!(v1.max_abs(), 0.0);
        assert!(v2.max_abs() > 0.0);
        let p0 = params(3, 0.0);
        let (v1, v2) = build_v(&p0, &sample_couplings(&p0));
        assert_eq!(v2.max_abs(), 0.0);
        assert!(v1.max_abs() > 0.0);
    }

    #[test]
    fn interactions_are_hermitian() {
        let p = params(4, 0.37);
        let cs = sample_couplings(&p);
        let (v1, v2) = build_v(&p, &cs);
        assert!(v1.is_hermitian(1e-12));
        assert!(v2.is_hermitian(1e-12));
        assert!(build_hamiltonian(&p, &cs).is_hermitian(1e-12));
    }

    #[test]
    fn v1_entries_follow_basis_index() {
        let p = params(3, 0.25);
        let cs = sample_couplings(&p);
        let (v1, _) = build_v(&p, &cs);
        let b = p.basis();
        for n1 in 1..=3 {
            for n2 in 1..=3 {
                // σ₊ = |1⟩⟨0| raises the system while moving branch 2 → 1.
                let z = v1[(b.index(1, n1, 1), b.index(0, n2, 2))];
                assert!((z - cs.c[(n1 - 1, n2 - 1)] * 0.75).norm() < 1e-15);
                assert_eq!(v1[(b.index(0, n1, 1), b.index(1, n2, 2))], ZERO);
            }
        }
    }

    #[test]
    fn charge_commutes_with_v1() {
        let p = params(4, 0.0);
        let cs = sample_couplings(&p);
        let (v1, _) = build_v(&p, &cs);
        let q = conserved_charge(&p);
        assert!(v1.commutator(&q).max_abs() < 1e-14);
        assert!(build_hamiltonian(&p, &cs).commutator(&q).max_abs() < 1e-14);
        // The channel-2 coupling breaks it.
        let p2 = params(4, 0.5);
        let (_, v2) = build_v(&p2, &sample_couplings(&p2));
        assert!(v2.commutator(&q).max_abs() > 1e-3);
    }

    #[test]
    fn projector_at_zero_selects_branch_one() {
        let p = params(3, 0.0);
        let pi1 = build_projector(0.0, 1, &p).unwrap();
        let b = p.basis();
        for n in 1..=3 {
            assert_eq!(pi1[(b.env_index(n, 1), b.env_index(n, 1))], ONE);
            assert_eq!(pi1[(b.env_index(n, 2), b.env_index(n, 2))], ZERO);
        }
        assert!((pi1.trace().re - 3.0).abs() < 1e-15);
    }

    #[test]
    fn projector_at_quarter_pi_selects_plus() {
        let p = params(3, 0.0);
        let pi1 = build_projector(FRAC_PI_4, 1, &p).unwrap();
        let plus_proj = kron(&ComplexMatrix::identity(3), &ComplexMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]));
        assert!((&pi1 - &plus_proj).max_abs() < 1e-15);
    }

    #[test]
    fn projector_rejects_bad_branch() {
        assert!(build_projector(0.0, 3, &params(2, 0.0)).is_err());
    }

    #[test]
    fn projector_algebra() {
        let p = params(4, 0.0);
        for k in 0..=16 {
            let theta = k as f64 * PI / 16.0;
            let a = build_projector(theta, 1, &p).unwrap();
            let b = build_projector(theta, 2, &p).unwrap();
            assert!((&a.matmul(&a) - &a).max_abs() < 1e-12);
            assert!((&b.matmul(&b) - &b).max_abs() < 1e-12);
            assert!(a.matmul(&b).max_abs() < 1e-12);
            assert!((&(&a + &b) - &ComplexMatrix::identity(8)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn initial_states() {
        let p = params(5, 0.0);
        let theta = (0.6f64).asin();
        let rho = initial_state(
            &real_pure_state(1.0, 0.0),
            EnvSpec::BranchProjector { theta, branch: 1 },
            &p,
        )
        .unwrap();
        assert!(rho.is_density(1e-10));
        // Environment branch weights: cos²θ = 0.64 on branch 1, sin²θ = 0.36 on branch 2.
        let b = p.basis();
        let w1: f64 = (1..=5).map(|n| rho[(b.index(0, n, 1), b.index(0, n, 1))].re).sum();
        assert!((w1 - 0.64).abs() < 1e-12);

        let rho3 = initial_state(&real_pure_state(0.6, 0.8), EnvSpec::BranchProjector { theta: 0.0, branch: 1 }, &p).unwrap();
        assert!(rho3.is_density(1e-10));
        let rho_mm = initial_state(&diagonal_state(0.9), EnvSpec::MaximallyMixed, &p).unwrap();
        assert!(rho_mm.is_density(1e-10));
        let rho_plus = initial_state(&diagonal_state(0.3), EnvSpec::PlusProjector, &p).unwrap();
        assert!(rho_plus.is_density(1e-10));
    }

    #[test]
    fn initial_state_rejects_non_density() {
        let p = params(2, 0.0);
        let bad = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            initial_state(&bad, EnvSpec::MaximallyMixed, &p),
            Err(Error::NotDensity { .. })
        ));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: Vec<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        assert_eq!(seeds[0], 7);
        let mut sorted = seeds.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
    }
}
