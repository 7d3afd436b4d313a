//! Superoperators on the reduced system ⊗ sector space.
//!
//! # Effective states
//!
//! An [`EffectiveState`] is a 4×4 matrix over the basis `|m⟩ ⊗ |s⟩` with
//! system level `m ∈ {0,1}` and sector `s ∈ {1,2}` (unrotated branch labels),
//! at index `2m + (s − 1)`. It is obtained from a composite density matrix by
//! tracing out the level index `n` while keeping the branch.
//!
//! # Vectorization
//!
//! Superoperators act on column-stacked matrices: entry `(r, c)` of a 4×4
//! matrix sits at position `r + 4c` of its vector. With this convention
//!
//! ```text
//! vec(A X B) = (Bᵀ ⊗ A) vec(X)
//! ```
//!
//! For 2×2 matrices, `X = [[x₀₀, x₀₁], [x₁₀, x₁₁]]` has
//! `vec X = (x₀₀, x₁₀, x₀₁, x₁₁)`. Left multiplication by `A` is `I ⊗ A`,
//! block diagonal with one copy of `A` per column; right multiplication by `B`
//! is `Bᵀ ⊗ I`. The same holds at size 4 with 16-vectors.
//!
//! # Choi matrix
//!
//! `C = Σ_ab S(E_ab) ⊗ E_ab` over the matrix units `E_ab = |a⟩⟨b|`, with
//! the output factor first. The map is recovered as
//! `S(X) = Tr₂[C (I ⊗ Xᵀ)]`.

use std::f64::consts::FRAC_PI_4;
use std::ops::{Add, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, kron, ComplexMatrix, C64, ONE, ZERO};
use crate::model::{branch_ladder, branch_ladder_pm, branch_vector, sigma_plus, sigma_right};

pub const EFFECTIVE_DIM: usize = 4;
pub const SUPEROP_DIM: usize = 16;

/// State on system ⊗ sector; see the module docs for the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveState(ComplexMatrix);

impl EffectiveState {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.shape() != (EFFECTIVE_DIM, EFFECTIVE_DIM) {
            return Err(Error::DimensionMismatch {
                context: "EffectiveState::new",
                expected: "4x4".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        Ok(Self(m))
    }

    pub fn zeros() -> Self {
        Self(ComplexMatrix::zeros(EFFECTIVE_DIM, EFFECTIVE_DIM))
    }

    /// `sys ⊗ sector` for a 2×2 system matrix and a 2×2 sector matrix.
    pub fn product(sys: &ComplexMatrix, sector: &ComplexMatrix) -> Result<Self> {
        Self::new(kron(sys, sector))
    }

    pub fn index(m: usize, sector: usize) -> usize {
        debug_assert!(m < 2 && (1..=2).contains(&sector));
        2 * m + (sector - 1)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Entry between `|l, j⟩` and `|m, k⟩` (system level, sector).
    pub fn entry(&self, l: usize, j: usize, m: usize, k: usize) -> C64 {
        self.0[(Self::index(l, j), Self::index(m, k))]
    }

    /// Reduced system state: sum over the diagonal sector blocks.
    pub fn reduced_system(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |l, m| {
            (1..=2).map(|j| self.entry(l, j, m, j)).sum()
        })
    }

    /// Components in the sector basis rotated by θ, `R X R†` with
    /// `R = I₂ ⊗ [[cos θ, sin θ], [−sin θ, cos θ]]`.
    pub fn in_rotated_basis(&self, theta: f64) -> ComplexMatrix {
        let r = sector_rotation(theta);
        r.matmul(&self.0).matmul(&r.dagger())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn to_vec(&self) -> Vec<C64> {
        vectorize(&self.0)
    }

    pub fn from_vec(v: &[C64]) -> Result<Self> {
        Self::new(unvectorize(v)?)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.scale_real(s))
    }
}

impl Add for &EffectiveState {
    type Output = EffectiveState;

    fn add(self, rhs: &EffectiveState) -> EffectiveState {
        EffectiveState(&self.0 + &rhs.0)
    }
}

impl Sub for &EffectiveState {
    type Output = EffectiveState;

    fn sub(self, rhs: &EffectiveState) -> EffectiveState {
        EffectiveState(&self.0 - &rhs.0)
    }
}

fn sector_rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    kron(
        &ComplexMatrix::identity(2),
        &ComplexMatrix::from_real(&[&[c, s], &[-s, c]]),
    )
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.rows();
    let mut v = vec![ZERO; n * m.cols()];
    for c in 0..m.cols() {
        for r in 0..n {
            v[r + n * c] = m[(r, c)];
        }
    }
    v
}

/// Inverse of [`vectorize`] for 4×4 matrices.
pub fn unvectorize(v: &[C64]) -> Result<ComplexMatrix> {
    if v.len() != SUPEROP_DIM {
        return Err(Error::DimensionMismatch {
            context: "unvectorize",
            expected: "16 entries".into(),
            found: format!("{} entries", v.len()),
        });
    }
    Ok(ComplexMatrix::from_fn(4, 4, |r, c| v[r + 4 * c]))
}

/// Linear map on 4×4 matrices, as a 16×16 matrix on column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp(ComplexMatrix);

impl SuperOp {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.shape() != (SUPEROP_DIM, SUPEROP_DIM) {
            return Err(Error::DimensionMismatch {
                context: "SuperOp::new",
                expected: "16x16".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        Ok(Self(m))
    }

    pub fn zero() -> Self {
        Self(ComplexMatrix::zeros(SUPEROP_DIM, SUPEROP_DIM))
    }

    pub fn identity() -> Self {
        Self(ComplexMatrix::identity(SUPEROP_DIM))
    }

    /// Builds the matrix of `f` column by column from the matrix units.
    pub fn from_map(f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut m = ComplexMatrix::zeros(SUPEROP_DIM, SUPEROP_DIM);
        for k in 0..SUPEROP_DIM {
            let mut e = ComplexMatrix::zeros(4, 4);
            e[(k % 4, k / 4)] = ONE;
            let col = vectorize(&f(&e));
            for (r, z) in col.into_iter().enumerate() {
                m[(r, k)] = z;
            }
        }
        Self(m)
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        Self(kron(&b.transpose(), a))
    }

    /// `X ↦ A X`.
    pub fn left(a: &ComplexMatrix) -> Self {
        Self::sandwich(a, &ComplexMatrix::identity(4))
    }

    /// `X ↦ X B`.
    pub fn right(b: &ComplexMatrix) -> Self {
        Self::sandwich(&ComplexMatrix::identity(4), b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let v = self.0.apply(&vectorize(x));
        unvectorize(&v).expect("16-vector")
    }

    pub fn apply_state(&self, x: &EffectiveState) -> EffectiveState {
        EffectiveState(self.apply(&x.0))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        Self(self.0.matmul(&other.0))
    }

    pub fn scale_real(&self, s: f64) -> SuperOp {
        Self(self.0.scale_real(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    /// Largest `|Tr S(E_ab)|` over the matrix units.
    pub fn trace_leak(&self) -> f64 {
        (0..SUPEROP_DIM)
            .map(|k| (0..4).map(|i| self.0[(i + 4 * i, k)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `S(X†)` from `S(X)†` over the matrix units.
    pub fn hermiticity_leak(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut e = ComplexMatrix::zeros(4, 4);
                e[(a, b)] = ONE;
                let lhs = self.apply(&e.dagger());
                let rhs = self.apply(&e).dagger();
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
        worst
    }

    /// Eigenvalues of the 16×16 matrix.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        linalg::eigenvalues(&self.0)
    }
}

impl Add for &SuperOp {
    type Output = SuperOp;

    fn add(self, rhs: &SuperOp) -> SuperOp {
        SuperOp(&self.0 + &rhs.0)
    }
}

impl Sub for &SuperOp {
    type Output = SuperOp;

    fn sub(self, rhs: &SuperOp) -> SuperOp {
        SuperOp(&self.0 - &rhs.0)
    }
}

/// `D[L]X = L X L† − ½{L†L, X}`.
pub fn dissipator(l: &ComplexMatrix) -> SuperOp {
    let ld = l.dagger();
    let ldl = ld.matmul(l).scale_real(0.5);
    let jump = SuperOp::sandwich(l, &ld);
    &(&jump - &SuperOp::left(&ldl)) - &SuperOp::right(&ldl)
}

/// Rank-1 sector projectors `|i,θ⟩⟨i,θ|` lifted to system ⊗ sector.
fn sector_projectors(theta: f64) -> [ComplexMatrix; 2] {
    [1, 2].map(|branch| {
        let u = branch_vector(theta, branch).expect("branch 1 or 2");
        let uu = ComplexMatrix::from_real(&[&[u[0] * u[0], u[0] * u[1]], &[u[1] * u[0], u[1] * u[1]]]);
        kron(&ComplexMatrix::identity(2), &uu)
    })
}

/// `X ↦ Σ_i (I ⊗ Π_i) X (I ⊗ Π_i)` for the θ-rotated sector projectors:
/// removes coherences between the two rotated sectors.
pub fn projector_superop(theta: f64) -> SuperOp {
    let [p1, p2] = sector_projectors(theta);
    &SuperOp::sandwich(&p1, &p1) + &SuperOp::sandwich(&p2, &p2)
}

/// Jump operator of the first interaction channel, `σ₊ ⊗ |1⟩⟨2|`.
pub fn channel1_jump() -> ComplexMatrix {
    kron(&sigma_plus(), &branch_ladder())
}

/// Jump operator of the second interaction channel, `σ→ ⊗ |+⟩⟨−|`.
pub fn channel2_jump() -> ComplexMatrix {
    kron(&sigma_right(), &branch_ladder_pm())
}

/// Averaged second-order generator before projection:
///
/// ```text
/// G = λ(1−ξ)² (D[L₁] + D[L₁†]) + λξ² (D[L₂] + D[L₂†])
/// ```
///
/// The environment correlation of each channel is flat over the band, so
/// both orderings of each jump carry the same weight and no Hamiltonian
/// correction survives the average.
pub fn effective_generator_full(xi: f64, lambda: f64) -> SuperOp {
    let l1 = channel1_jump();
    let l2 = channel2_jump();
    let w1 = lambda * (1.0 - xi).powi(2);
    let w2 = lambda * xi * xi;
    let c1 = &dissipator(&l1) + &dissipator(&l1.dagger());
    let c2 = &dissipator(&l2) + &dissipator(&l2.dagger());
    &c1.scale_real(w1) + &c2.scale_real(w2)
}

/// `P_θ ∘ G ∘ P_θ`.
pub fn tcl_generator(theta: f64, xi: f64, lambda: f64) -> SuperOp {
    let p = projector_superop(theta);
    p.compose(&effective_generator_full(xi, lambda)).compose(&p)
}

/// `P_θ ∘ G ∘ (I − P_θ)`: the part of the projected generator that feeds on
/// the irrelevant component.
pub fn delta_superop(theta: f64, xi: f64, lambda: f64) -> SuperOp {
    let p = projector_superop(theta);
    let q = &SuperOp::identity() - &p;
    p.compose(&effective_generator_full(xi, lambda)).compose(&q)
}

/// `Σ_ab S(E_ab) ⊗ E_ab`.
pub fn choi_matrix(s: &SuperOp) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(SUPEROP_DIM, SUPEROP_DIM);
    for a in 0..4 {
        for b in 0..4 {
            let mut e = ComplexMatrix::zeros(4, 4);
            e[(a, b)] = ONE;
            c += &kron(&s.apply(&e), &e);
        }
    }
    c
}

/// Action of the map encoded by a Choi matrix: `Tr₂[C (I ⊗ Xᵀ)]`.
pub fn apply_choi(c: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let weighted = c.matmul(&kron(&ComplexMatrix::identity(4), &x.transpose()));
    linalg::partial_trace(&weighted, &[4, 4], 0).expect("16x16")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub xi: f64,
    pub theta: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSummary {
    pub xi: f64,
    /// Grid angle with the smallest leading singular value (first on ties).
    pub argmin_theta: f64,
    pub min_max_singular_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub summaries: Vec<ScanSummary>,
}

/// Singular values of `Choi(Δ)` over a grid of `(ξ, θ)`, ξ-major.
pub fn scan_delta(xi_list: &[f64], theta_grid: &[f64], lambda: f64) -> ScanTable {
    let points: Vec<(f64, f64)> = xi_list
        .iter()
        .flat_map(|&xi| theta_grid.iter().map(move |&theta| (xi, theta)))
        .collect();
    let rows: Vec<ScanRow> = points
        .par_iter()
        .map(|&(xi, theta)| ScanRow {
            xi,
            theta,
            singular_values: linalg::singular_values(&choi_matrix(&delta_superop(theta, xi, lambda))),
        })
        .collect();
    let summaries = rows
        .chunks(theta_grid.len().max(1))
        .filter(|chunk| !chunk.is_empty())
        .map(|chunk| {
            let mut best = &chunk[0];
            for row in chunk {
                if row.singular_values[0] < best.singular_values[0] {
                    best = row;
                }
            }
            ScanSummary {
                xi: best.xi,
                argmin_theta: best.theta,
                min_max_singular_value: best.singular_values[0],
            }
        })
        .collect();
    ScanTable { rows, summaries }
}

/// `n` equally spaced angles on `[0, θ_max]`, endpoints included.
pub fn theta_grid(n: usize, theta_max: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| theta_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Default scan range, `[0, π/4]`.
pub const DEFAULT_THETA_MAX: f64 = FRAC_PI_4;
