use nalgebra::{DMatrix, DVector};
use nbiot_rach::energy::*;
use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;

fn neg_b_dense(mu: f64, nu: f64, m: u32) -> DMatrix<f64> {
    let g = generator_matrix(mu, nu, m).unwrap();
    DMatrix::from_fn(m as usize, m as usize, |i, j| -g.entry(i + 1, j + 1))
}

fn exact(x: f64) -> Ratio<BigInt> {
    Ratio::from_float(x).unwrap()
}

#[test]
fn exact_inverse_identity_across_ratio_extremes() {
    for &(mu, nu) in &[(1e-3, 1.0), (1.0, 1e-3), (0.05, 0.05), (0.7, 0.3)] {
        let m = 30usize;
        let (mu_q, nu_q) = (exact(mu), exact(nu));
        let inv = neg_b_inverse_in(mu_q.clone(), nu_q.clone(), m);
        let zero = Ratio::from_integer(BigInt::from(0));
        for i in 0..m {
            for j in 0..m {
                // -B: mu+nu on the diagonal (nu in the top level), -mu above, -nu below.
                let mut acc = zero.clone();
                for k in 0..m {
                    let b = if i == k {
                        if i == m - 1 { nu_q.clone() } else { mu_q.clone() + nu_q.clone() }
                    } else if k + 1 == i {
                        -nu_q.clone()
                    } else if k == i + 1 {
                        -mu_q.clone()
                    } else {
                        continue;
                    };
                    acc = acc + b * inv[k][j].clone();
                }
                let expect = if i == j { Ratio::from_integer(BigInt::from(1)) } else { zero.clone() };
                assert_eq!(acc, expect, "({i},{j}) at mu={mu} nu={nu}");
            }
        }
    }
}

#[test]
fn dense_generator_band_layout() {
    let g = generator_matrix(0.3, 0.7, 3).unwrap();
    let d = g.to_dense();
    assert_eq!(d.len(), 4);
    assert!((d[0][0] + 0.3).abs() < 1e-15 && (d[0][1] - 0.3).abs() < 1e-15);
    assert!((d[1][0] - 0.7).abs() < 1e-15 && (d[1][1] + 1.0).abs() < 1e-15);
    assert!((d[3][2] - 0.7).abs() < 1e-15 && (d[3][3] + 0.7).abs() < 1e-15);
}

#[test]
fn nalgebra_inverse_agrees_when_well_conditioned() {
    for &(mu, nu, m) in &[(0.05, 0.1, 20u32), (0.3, 0.2, 15), (1.0, 1.0, 25)] {
        let ours = neg_b_inverse(mu, nu, m).unwrap();
        let theirs = neg_b_dense(mu, nu, m).try_inverse().unwrap();
        for i in 0..m as usize {
            for j in 0..m as usize {
                let scale = theirs[(i, j)].abs().max(1e-300);
                assert!((ours[i][j] - theirs[(i, j)]).abs() / scale < 1e-8);
            }
        }
    }
}

#[test]
fn linear_solve_matches_lu_on_moderate_ratio() {
    let (mu, nu, m) = (0.08, 0.1, 40u32);
    let rhs = vec![1.0; m as usize];
    let lu = neg_b_dense(mu, nu, m).lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
    let ours = solve_neg_b(mu, nu, &rhs);
    for (a, b) in ours.iter().zip(lu.iter()) {
        assert!((a - b).abs() / b.abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn generator_rows_sum_to_zero(mu in 1e-3f64..1e3, nu in 1e-3f64..1e3, m in 1u32..60) {
        let g = generator_matrix(mu, nu, m).unwrap();
        for i in 0..g.dimension() {
            prop_assert!(g.row_sum(i).abs() <= 1e-12 * (mu + nu));
        }
    }

    #[test]
    fn f64_inverse_identity_when_well_conditioned(
        log_ratio in -3.0f64..0.0, nu in 0.01f64..10.0, m in 1u32..=50
    ) {
        let mu = nu * 10f64.powf(log_ratio);
        let inv = neg_b_inverse(mu, nu, m).unwrap();
        let b = neg_b_dense(mu, nu, m);
        let inv = DMatrix::from_fn(m as usize, m as usize, |i, j| inv[i][j]);
        let resid = (&b * &inv - DMatrix::identity(m as usize, m as usize)).abs().max();
        prop_assert!(resid < 1e-9, "residual {resid}");
    }

    #[test]
    fn on_time_methods_agree(log_ratio in -3.0f64..3.0, m in 1u32..=50, frac in 0.0f64..1.0) {
        let (mu, nu) = (10f64.powf(log_ratio), 1.0);
        prop_assume!((mu / nu - 1.0).abs() >= RATIO_SINGULARITY_BAND);
        let n = 1 + ((m - 1) as f64 * frac) as u32;
        let a = mean_on_time_closed_form(mu, nu, m, n);
        let b = mean_on_time_row_sum(mu, nu, m, n);
        let c = mean_on_time_linear_solve(mu, nu, m, n);
        for (x, y) in [(a, b), (a, c), (b, c)] {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(y.abs()), "{x} {y}");
        }
    }

    #[test]
    fn availability_monotone_in_harvest_rate(mu in 0.005f64..0.5, bump in 1.01f64..3.0, n in 1u32..=8) {
        let cfg = |mu| EnergyConfig::from_durations(mu, 0.001, 0.02, 6e-3, 12.4e-3, n + 40, n, BoundMode::FailureBound);
        let lo = energy_availability(&cfg(mu)).unwrap().eta0;
        let hi = energy_availability(&cfg(mu * bump)).unwrap().eta0;
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn availability_monotone_in_capacity(extra in 0u32..200, n in 1u32..=8, mu in 0.01f64..0.2) {
        let cfg = |cap| EnergyConfig::from_durations(mu, 0.001, 0.02, 6e-3, 12.4e-3, cap, n, BoundMode::FailureBound);
        let lo = energy_availability(&cfg(n + extra)).unwrap().eta0;
        let hi = energy_availability(&cfg(n + extra + 1)).unwrap().eta0;
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn normalization_is_idempotent(off in 0u32..20, gap in 0u32..20, top in 0u32..20) {
        let s = StrategySpec { off_level: off, on_cutoff: off + gap, capacity: off + gap + top };
        let c = normalize_strategy(s).unwrap();
        prop_assert_eq!(normalize_strategy(c.into()).unwrap(), c);
        prop_assert_eq!(c.cutoff, gap);
    }
}
