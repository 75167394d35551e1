use nbiot_rach::analytics::*;
use nbiot_rach::quadrature::QuadratureSettings;

fn base() -> ChannelConfig {
    ChannelConfig {
        path_loss_exp: 4.0,
        sinr_threshold: 100.0,
        noise_power: 1.4894e-20,
        tx_power: 0.02,
        preambles: 48,
        enb_density: 0.1,
        device_density: 100.0,
        nonempty_prob: 0.001,
        availability: 0.3,
        epsilon_override: None,
    }
}

fn joint(cfg: &ChannelConfig, l: u32) -> f64 {
    let l = SymbolGroupCount::new(l).unwrap();
    joint_symbol_success(l, cfg, InterferenceMode::Full, &QuadratureSettings::default()).unwrap()
}

fn rach(cfg: &ChannelConfig, nt: u32, mode: InterferenceMode) -> f64 {
    rach_success_prob(nt, cfg, mode, &QuadratureSettings::default()).unwrap().value
}

/// Asserts `f` is non-increasing along `values` applied by `set`.
fn non_increasing(values: &[f64], set: impl Fn(&mut ChannelConfig, f64), f: impl Fn(&ChannelConfig) -> f64) {
    let mut prev = f64::INFINITY;
    for &v in values {
        let mut c = base();
        // Noise large enough to matter at the km scale.
        c.noise_power = 1e-5;
        set(&mut c, v);
        let p = f(&c);
        assert!((0.0..=1.0).contains(&p));
        assert!(p <= prev + 1e-12, "value {v}: {p} > {prev}");
        prev = p;
    }
}

#[test]
fn joint_success_monotone_in_each_parameter() {
    let f = |c: &ChannelConfig| joint(c, 4);
    non_increasing(&[1.0, 10.0, 100.0, 1000.0], |c, v| c.sinr_threshold = v, f);
    non_increasing(&[0.0, 1e-6, 1e-5, 1e-4], |c, v| c.noise_power = v, f);
    non_increasing(&[10.0, 100.0, 1000.0, 1e4], |c, v| c.device_density = v, f);
    // Higher power helps, so its reciprocal is the non-increasing axis.
    non_increasing(&[1.0, 0.2, 0.02, 0.002], |c, v| c.tx_power = v, f);
    let mut prev = 1.0;
    for l in [4, 8, 16, 32] {
        let p = joint(&base(), l);
        assert!(p <= prev + 1e-12);
        prev = p;
    }
}

#[test]
fn preamble_success_grows_with_repetitions() {
    let q = QuadratureSettings::default();
    for cfg in [base(), ChannelConfig { nonempty_prob: 0.015, device_density: 2000.0, ..base() }] {
        let mut prev = 0.0;
        for nt in [1, 2, 4, 8] {
            let p = preamble_success_prob(nt, &cfg, InterferenceMode::Full, &q).unwrap();
            assert!(p >= prev - 1e-12, "N_T {nt}: {p} < {prev}");
            prev = p;
        }
    }
}

#[test]
fn rach_success_falls_with_density_ratio() {
    let mut prev = 1.0;
    for ratio in [100.0, 1e3, 5e3, 1e4, 2e4, 5e4] {
        let c = ChannelConfig { device_density: 0.1 * ratio, ..base() };
        let p = rach(&c, 2, InterferenceMode::Full);
        assert!(p <= prev + 1e-12, "ratio {ratio}");
        prev = p;
    }
}

#[test]
fn intra_cell_interference_is_optimistic() {
    for ratio in [1e3, 1e4, 3e4] {
        let c = ChannelConfig { device_density: 0.1 * ratio, nonempty_prob: 0.015, ..base() };
        for nt in [1, 4] {
            assert!(rach(&c, nt, InterferenceMode::IntraCellOnly) >= rach(&c, nt, InterferenceMode::Full));
        }
    }
}

#[test]
fn truncated_load_mass_within_tolerance() {
    for rho in [1e-3, 1.0, 1e3] {
        let t = truncate_cell_load(rho, 1.0, 1e-8);
        let total: f64 = t.pmf.iter().sum();
        assert!(total >= 1.0 - 1e-8 && total <= 1.0 + 1e-12, "rho {rho}: {total}");
    }
}

#[test]
fn efficiency_is_success_per_repetition() {
    let q = QuadratureSettings::default();
    let c = base();
    let one = repetition_efficiency(1, &c, InterferenceMode::Full, &q).unwrap();
    assert_eq!(one, rach(&c, 1, InterferenceMode::Full));
    let mut prev = one;
    for nt in [2, 4, 8] {
        let z = repetition_efficiency(nt, &c, InterferenceMode::Full, &q).unwrap();
        assert!(z < prev);
        prev = z;
    }
}
