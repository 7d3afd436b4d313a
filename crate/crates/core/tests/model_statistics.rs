//! Monte-Carlo checks of the coupling distribution.

use ecps::linalg::{ComplexMatrix, C64};
use ecps::model::{build_v, sample_couplings, ModelParams};

const DRAWS: u64 = 100_000;

fn params(n: usize, xi: f64, seed: u64) -> ModelParams {
    ModelParams {
        n_levels: n,
        delta_eps: 0.5,
        alpha: 1.0,
        xi,
        seed,
    }
}

#[test]
fn single_entry_moments() {
    let mut sum = C64::new(0.0, 0.0);
    let mut sum_sq_mag = 0.0;
    let mut sum_sq = C64::new(0.0, 0.0);
    let mut sum_cross = C64::new(0.0, 0.0);
    for seed in 0..DRAWS {
        let cs = sample_couplings(&params(1, 0.5, seed));
        let c = cs.c[(0, 0)];
        let cp = cs.c_prime[(0, 0)];
        sum += c;
        sum_sq_mag += c.norm_sqr();
        sum_sq += c * c;
        sum_cross += c * cp.conj();
    }
    let n = DRAWS as f64;
    let mean_sq_mag = sum_sq_mag / n;
    assert!((mean_sq_mag - 1.0).abs() <= 0.02, "<|c|^2> = {mean_sq_mag}");
    assert!((sum_sq / n).norm() <= 0.02, "<c c> = {}", sum_sq / n);
    assert!((sum / n).norm() <= 0.02, "<c> = {}", sum / n);
    assert!((sum_cross / n).norm() <= 0.02, "<c c'*> = {}", sum_cross / n);
}

#[test]
fn distinct_entries_are_uncorrelated() {
    let mut cross = C64::new(0.0, 0.0);
    let draws = 20_000;
    for seed in 0..draws {
        let cs = sample_couplings(&params(2, 0.5, seed));
        cross += cs.c[(0, 1)] * cs.c[(1, 0)].conj();
    }
    assert!((cross / draws as f64).norm() <= 0.04);
}

#[test]
fn interaction_commutator_vanishes_on_average() {
    let seeds = 200;
    let p0 = params(4, 0.5, 0);
    let dim = p0.dim();
    let mut mean = ComplexMatrix::zeros(dim, dim);
    let mut second = vec![0.0; dim * dim];
    for seed in 0..seeds {
        let p = params(4, 0.5, seed);
        let (v1, v2) = build_v(&p, &sample_couplings(&p));
        let comm = v1.commutator(&v2);
        mean += &comm;
        for (acc, z) in second.iter_mut().zip(comm.data()) {
            *acc += z.norm_sqr();
        }
    }
    let n = seeds as f64;
    let mean = mean.scale_real(1.0 / n);
    // Standard error of the mean matrix in Frobenius norm.
    let variance_sum: f64 = second
        .iter()
        .zip(mean.data())
        .map(|(s, m)| (s / n - m.norm_sqr()) * n / (n - 1.0))
        .sum();
    let se = (variance_sum / n).sqrt();
    let norm = mean.frobenius_norm();
    assert!(norm <= 5.0 * se, "|<[V1,V2]>| = {norm}, SE = {se}");
}
