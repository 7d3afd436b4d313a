use std::f64::consts::FRAC_PI_4;

use ecps::linalg::{kron, ComplexMatrix, C64};
use ecps::model::{sigma_x, sigma_y, sigma_z};
use ecps::superop::{
    effective_generator_full, projector_superop, tcl_generator, vectorize, EffectiveState, SuperOp,
};
use ecps::tcl::{ecps_evolve, solve_tcl, EcpsComponent, TclGenerator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_hermitian(rng: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(4, 4, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + &a.dagger()).scale_real(0.5)
}

fn random_relevant_density(rng: &mut impl Rng, theta: f64) -> EffectiveState {
    let a = ComplexMatrix::from_fn(4, 4, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = projector_superop(theta).apply(&a.matmul(&a.dagger()));
    let tr = rho.trace();
    EffectiveState::new(rho.scale(C64::new(1.0, 0.0) / tr)).unwrap()
}

/// Dormand–Prince 5(4) with error control on `dv/dt = K v`.
fn dormand_prince(k: &ComplexMatrix, v0: &[C64], t_end: f64, tol: f64) -> Vec<C64> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut v = v0.to_vec();
    let mut t = 0.0;
    let mut h = (t_end / 100.0).max(1e-6);
    while t < t_end {
        h = h.min(t_end - t);
        let mut stages: Vec<Vec<C64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut arg = v.clone();
            for (j, stage) in stages.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    for (x, y) in arg.iter_mut().zip(stage) {
                        *x += y * (a * h);
                    }
                }
            }
            stages.push(k.apply(&arg));
        }
        let mut v5 = v.clone();
        let mut err: f64 = 0.0;
        for i in 0..v.len() {
            let mut d5 = C64::new(0.0, 0.0);
            let mut d4 = C64::new(0.0, 0.0);
            for s in 0..7 {
                d5 += stages[s][i] * B5[s];
                d4 += stages[s][i] * B4[s];
            }
            v5[i] += d5 * h;
            err = err.max(((d5 - d4) * h).norm());
        }
        if err <= tol {
            t += h;
            v = v5;
        }
        let factor = if err == 0.0 { 5.0 } else { 0.9 * (tol / err).powf(0.2) };
        h *= factor.clamp(0.2, 5.0);
    }
    v
}

#[test]
fn exponential_solution_matches_adaptive_integration() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for (theta, xi) in [(0.0, 0.0), (FRAC_PI_4, 1.0), (0.3, 0.5), (FRAC_PI_4, 0.25)] {
        let k = TclGenerator::new(theta, xi, 0.7);
        let rho0 = random_relevant_density(&mut rng, theta);
        let times = [0.0, 0.4, 1.5, 6.0];
        let sol = solve_tcl(&k, &rho0, &times).unwrap();
        for (t, state) in times.iter().zip(&sol.states) {
            let oracle = dormand_prince(k.op.matrix(), &rho0.to_vec(), *t, 1e-13);
            let dev = state
                .to_vec()
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-8, "(θ={theta}, ξ={xi}, t={t}): {dev}");
        }
    }
}

#[test]
fn solutions_preserve_trace_and_hermiticity() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for (theta, xi) in [(0.0, 0.5), (0.6, 0.2), (FRAC_PI_4, 0.9)] {
        let rho0 = random_relevant_density(&mut rng, theta);
        let sol = solve_tcl(&TclGenerator::new(theta, xi, 1.0), &rho0, &[0.0, 0.3, 3.0, 30.0]).unwrap();
        for s in &sol.states {
            assert!((s.trace() - C64::new(1.0, 0.0)).norm() <= 1e-12);
            assert!(s.matrix().is_hermitian(1e-12));
        }
    }
}

#[test]
fn generator_spectrum_has_no_growing_modes() {
    for i in 0..=10 {
        let xi = i as f64 / 10.0;
        for j in 0..=16 {
            let theta = FRAC_PI_4 * j as f64 / 16.0;
            let spectrum = tcl_generator(theta, xi, 1.0).spectrum().unwrap();
            let max_re = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            assert!(max_re <= 1e-10, "(ξ={xi}, θ={theta}): max Re = {max_re}");
        }
    }
}

#[test]
fn mixture_evolution_is_linear() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let times = [0.0, 0.5, 4.0];
    let a = random_relevant_density(&mut rng, 0.0);
    let b = random_relevant_density(&mut rng, FRAC_PI_4);
    let comps = vec![
        EcpsComponent { weight: 0.3, state: a.clone(), theta: 0.0 },
        EcpsComponent { weight: 0.7, state: b.clone(), theta: FRAC_PI_4 },
    ];
    let mixed = ecps_evolve(&comps, 0.4, 1.2, &times).unwrap();
    let sa = solve_tcl(&TclGenerator::new(0.0, 0.4, 1.2), &a, &times).unwrap();
    let sb = solve_tcl(&TclGenerator::new(FRAC_PI_4, 0.4, 1.2), &b, &times).unwrap();
    for i in 0..times.len() {
        let expected = &sa.states[i].scale_real(0.3) + &sb.states[i].scale_real(0.7);
        assert!((mixed.states[i].matrix() - expected.matrix()).max_abs() <= 1e-12);
    }
}

/// Linear functional `Σ c · ρ^{jl,km}` given as (coefficient, "jlkm") pairs,
/// with `j, k` sector labels and `l, m` system levels.
fn functional(terms: &[(f64, &str)]) -> Vec<C64> {
    let mut f = vec![C64::new(0.0, 0.0); 16];
    for &(c, label) in terms {
        let d: Vec<usize> = label.chars().map(|ch| ch.to_digit(10).unwrap() as usize).collect();
        let (j, l, k, m) = (d[0], d[1], d[2], d[3]);
        let row = 2 * l + (j - 1);
        let col = 2 * m + (k - 1);
        f[row + 4 * col] += c;
    }
    f
}

fn pairing(f: &[C64], v: &[C64]) -> C64 {
    f.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn real_relevant_states(theta: f64) -> Vec<Vec<C64>> {
    let p = projector_superop(theta);
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a..4 {
            let mut e = ComplexMatrix::zeros(4, 4);
            e[(a, b)] = C64::new(1.0, 0.0);
            e[(b, a)] = C64::new(1.0, 0.0);
            out.push(vectorize(&p.apply(&e)));
        }
    }
    out
}

fn check_rate(theta: f64, xi: f64, f: &[C64], rate: f64) -> f64 {
    let k = tcl_generator(theta, xi, 1.0);
    real_relevant_states(theta)
        .iter()
        .map(|v| (pairing(f, &k.matrix().apply(v)) - pairing(f, v) * rate).norm())
        .fold(0.0, f64::max)
}

#[test]
fn unrotated_rate_table_on_real_states() {
    for xi in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let eqs: Vec<(Vec<C64>, f64)> = vec![
            (functional(&[(1.0, "1010"), (1.0, "2020"), (1.0, "1111"), (1.0, "2121")]), 0.0),
            (functional(&[(1.0, "2121"), (-1.0, "1010")]), -xi * xi / 2.0),
            (functional(&[(1.0, "2020"), (-1.0, "1111")]), -2.0 + 4.0 * xi - 2.5 * xi * xi),
            (functional(&[(1.0, "2021"), (-1.0, "1011")]), -0.5 + xi - xi * xi),
            (functional(&[(1.0, "2021"), (1.0, "1011")]), -0.5 + xi - 1.5 * xi * xi),
        ];
        for (i, (f, rate)) in eqs.iter().enumerate() {
            let dev = check_rate(0.0, xi, f, *rate);
            assert!(dev <= 1e-12, "ξ={xi}, equation {i}: {dev}");
        }
    }
}

#[test]
fn conserved_sum_holds_only_without_second_channel() {
    let f = functional(&[(1.0, "2121"), (1.0, "1010")]);
    assert!(check_rate(0.0, 0.0, &f, 0.0) <= 1e-12);
    for xi in [0.25, 0.5, 1.0] {
        assert!(check_rate(0.0, xi, &f, 0.0) > 1e-3);
    }
}

#[test]
fn rotated_rate_table_on_real_states() {
    for xi in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let eqs: Vec<(Vec<C64>, f64)> = vec![
            (functional(&[(1.0, "1010"), (1.0, "2020"), (1.0, "1111"), (1.0, "2121")]), 0.0),
            (
                functional(&[(1.0, "1020"), (1.0, "1011"), (1.0, "2021"), (1.0, "1121")]),
                -0.5 * (xi - 1.0) * (xi - 1.0),
            ),
            (
                functional(&[(1.0, "1020"), (-1.0, "1011"), (-1.0, "2021"), (1.0, "1121")]),
                -2.5 * xi * xi + xi - 0.5,
            ),
            (
                functional(&[(1.0, "1010"), (1.0, "2020"), (-1.0, "1111"), (-1.0, "2121")]),
                -1.5 * xi * xi + 2.0 * xi - 1.0,
            ),
            (functional(&[(1.0, "1020"), (-1.0, "1121")]), -xi * xi + xi - 0.5),
        ];
        for (i, (f, rate)) in eqs.iter().enumerate() {
            let dev = check_rate(FRAC_PI_4, xi, f, *rate);
            assert!(dev <= 1e-12, "ξ={xi}, equation {i}: {dev}");
        }
    }
}

#[test]
fn cross_coherence_is_frozen_only_with_second_channel() {
    let f = functional(&[(1.0, "1021")]);
    assert!(check_rate(FRAC_PI_4, 1.0, &f, 0.0) <= 1e-12);
    for xi in [0.0, 0.5, 0.75] {
        assert!(check_rate(FRAC_PI_4, xi, &f, 0.0) > 1e-3);
    }
}

#[test]
fn matched_points_are_unitarily_equivalent() {
    // Cyclic axis permutation x → y → z on the system, Hadamard on the sector.
    let half = C64::new(0.5, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    let axis_sum = &(&sigma_x() + &sigma_y()) + &sigma_z();
    let u = (&ComplexMatrix::identity(2) + &axis_sum.scale(minus_i)).scale(half);
    let u = if (&u.matmul(&sigma_x()).matmul(&u.dagger()) - &sigma_y()).max_abs() < 1e-12 {
        u
    } else {
        u.dagger()
    };
    assert!((&u.matmul(&sigma_x()).matmul(&u.dagger()) - &sigma_y()).max_abs() < 1e-12);
    assert!((&u.matmul(&sigma_y()).matmul(&u.dagger()) - &sigma_z()).max_abs() < 1e-12);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = ComplexMatrix::from_real(&[&[s, s], &[s, -s]]);
    let w = kron(&u, &hadamard);
    let conj = SuperOp::sandwich(&w, &w.dagger());
    let conj_inv = SuperOp::sandwich(&w.dagger(), &w);

    let full0 = effective_generator_full(0.0, 1.0);
    let full1 = effective_generator_full(1.0, 1.0);
    assert!((&conj.compose(&full0).compose(&conj_inv) - &full1).max_abs() < 1e-12);
    let k0 = tcl_generator(0.0, 0.0, 1.0);
    let k1 = tcl_generator(FRAC_PI_4, 1.0, 1.0);
    assert!((&conj.compose(&k0).compose(&conj_inv) - &k1).max_abs() < 1e-12);
}

proptest! {
    #[test]
    fn generators_preserve_hermiticity(seed in any::<u64>(), xi in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rho = random_hermitian(&mut rng);
        let g = effective_generator_full(xi, 1.0).apply(&rho);
        prop_assert!(g.is_hermitian(1e-12));
        let k = tcl_generator(theta, xi, 1.0).apply(&rho);
        prop_assert!(k.is_hermitian(1e-12));
        prop_assert!(k.trace().norm() <= 1e-12);
        prop_assert!(g.trace().norm() <= 1e-12);
    }

    #[test]
    fn projector_is_idempotent_and_trace_preserving(seed in any::<u64>(), theta in 0.0f64..=FRAC_PI_4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let rho = random_hermitian(&mut rng);
        let p = projector_superop(theta);
        let once = p.apply(&rho);
        prop_assert!((&p.apply(&once) - &once).max_abs() <= 1e-12);
        prop_assert!((once.trace() - rho.trace()).norm() <= 1e-12);
        prop_assert!(once.is_hermitian(1e-12));
    }

    #[test]
    fn projected_generator_closes_on_relevant_space(xi in 0.0f64..=1.0, theta in 0.0f64..=FRAC_PI_4) {
        let p = projector_superop(theta);
        let k = tcl_generator(theta, xi, 1.0);
        prop_assert!((&p.compose(&k) - &k).max_abs() <= 1e-12);
        prop_assert!((&k.compose(&p) - &k).max_abs() <= 1e-12);
    }
}
