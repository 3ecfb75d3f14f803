use levsg_core::analytic::{
    delta_k, delta_x_max, k_branch, omega, potential_energy, stage1, stage2, stage3, tau1,
    trap_params, AnalyticProtocol, ProtocolParams,
};
use levsg_core::{PhysicalConstants, SpinBranch};
use proptest::prelude::*;

fn c() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn fig5() -> ProtocolParams {
    ProtocolParams {
        mass: 1e-19,
        x0: 40e-6,
        bias: 0.5,
        eta1: 100.0,
        eta2: 100.0,
    }
}

/// Signed stage gradient and arm-centre sign for stages 0..3.
fn stage_gradient(p: &ProtocolParams, stage: usize) -> f64 {
    match stage {
        0 => -p.eta1,
        1 => p.eta1,
        _ => -p.eta2,
    }
}

#[test]
fn closed_forms_satisfy_stage_odes() {
    let c = c();
    let mut pr = fig5();
    pr.eta2 = 99.9;
    let p = AnalyticProtocol::new(pr, &c).unwrap();
    let h = 1e-5;
    for br in [SpinBranch::Up, SpinBranch::Down, SpinBranch::Neutral] {
        let s = br.zeeman_projection(&c);
        for i in 1..200 {
            let t = p.tau3 * i as f64 / 200.0;
            let stage = p.stage_at(t);
            if p.stage_at(t - h) != stage || p.stage_at(t + h) != stage {
                continue;
            }
            let eta_s = stage_gradient(&pr, stage);
            let x = |t| p.state(br, t).0;
            let acc = (x(t + h) - 2.0 * x(t) + x(t - h)) / (h * h);
            let w2 = omega(eta_s.abs(), &c).powi(2);
            let centre = k_branch(s, eta_s.abs(), pr.bias, pr.mass, &c) * -eta_s.signum();
            let expected = -w2 * (x(t) - centre);
            assert!(
                (acc - expected).abs() < 1e-6 * expected.abs().max(w2 * 1e-6),
                "t={t} {acc} {expected}"
            );
        }
    }
}

#[test]
fn stage1_matches_defining_ode_exactly() {
    let c = c();
    for s in [1.0, -1.0, 0.0] {
        let (eta, b0, m) = (100.0, 0.5, 1e-19);
        let w = omega(eta, &c);
        for t in [1e-3, 5e-3, 1.5e-2] {
            let (x, _) = stage1(t, 40e-6, eta, b0, m, s, &c);
            // ẍ from the closed form
            let k = k_branch(s, eta, b0, m, &c);
            let acc = -(-40e-6 - k) * w * w * (w * t).cos();
            let drive = (c.chi_rho * b0 / c.mu0 - c.hbar * c.gamma_e * s / m) * eta;
            let lhs = acc + w * w * x + drive;
            assert!(
                lhs.abs() < 1e-9 * (w * w * x).abs().max(drive.abs()),
                "{lhs}"
            );
        }
    }
}

#[test]
fn energy_constant_in_every_stage() {
    let c = c();
    let pr = fig5();
    let p = AnalyticProtocol::new(pr, &c).unwrap();
    let bounds = [0.0, p.tau1(), p.tau2(), p.tau3];
    for br in [SpinBranch::Up, SpinBranch::Down] {
        let s = br.zeeman_projection(&c);
        for stage in 0..3 {
            let eta_s = stage_gradient(&pr, stage);
            let (lo, hi) = (bounds[stage], bounds[stage + 1]);
            let e = |t: f64| {
                let (x, v) = match stage {
                    0 => stage1(t, pr.x0, pr.eta1, pr.bias, pr.mass, s, &c),
                    1 => stage2(t, &p.end1, pr.eta1, pr.bias, pr.mass, s, &c),
                    _ => stage3(t, &p.end2, pr.eta2, pr.bias, pr.mass, s, &c),
                };
                0.5 * pr.mass * v * v + potential_energy(x, s, eta_s, pr.bias, pr.mass, &c)
            };
            let e0 = e(lo);
            for i in 1..=10 {
                let t = lo + (hi - lo) * i as f64 / 10.0;
                assert!(((e(t) - e0) / e0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn dense_grid_maximum_matches_closed_form() {
    let c = c();
    let p = AnalyticProtocol::new(fig5(), &c).unwrap();
    let n = 200_000;
    let best = (0..=n)
        .map(|i| p.tau1() + (p.tau2() - p.tau1()) * i as f64 / n as f64)
        .map(|t| p.arc.delta_x(t))
        .fold(f64::MIN, f64::max);
    let d = delta_x_max(40e-6, 100.0, 0.5, 1e-19, &c);
    assert!(((best - d) / d).abs() < 1e-9, "{best} {d}");
}

#[test]
fn delta_x_max_reference_and_hierarchy() {
    let c = c();
    let d19 = delta_x_max(40e-6, 100.0, 0.5, 1e-19, &c);
    let d17 = delta_x_max(40e-6, 100.0, 0.5, 1e-17, &c);
    let d15 = delta_x_max(40e-6, 100.0, 0.5, 1e-15, &c);
    assert!((d19 - 12e-6).abs() < 1.2e-6);
    assert!(d17 > 0.1e-6 && d17 < 0.2e-6);
    assert!(d15 > 1e-9 && d15 < 2e-9);
}

#[test]
fn delta_k_reference() {
    let dk = delta_k(100.0, 1e-19, &c());
    assert!((dk - 7.66e-4).abs() < 0.005e-4);
}

#[test]
fn trap_reference_values() {
    let t = trap_params(1e5, 0.0, &c()).unwrap();
    assert!((t.omega_z / 7.0e3 - 1.0).abs() < 0.01);
    assert!((t.z_l / -2.0e-7 - 1.0).abs() < 0.01);
    assert!((t.bz_at_zl / -0.0199 - 1.0).abs() < 0.01);
    let s = trap_params(1e5, 100.0, &c()).unwrap();
    assert!((s.omega_x / 7.0 - 1.0).abs() < 0.01);
}

#[test]
fn fig5_timing_scale() {
    let p = AnalyticProtocol::new(fig5(), &c()).unwrap();
    assert!((p.tau1() - 1.794e-2).abs() < 0.002e-2);
    assert!(2.0 * p.t_max <= 0.1);
    assert!(p.tau3 <= 0.1);
}

#[test]
fn position_continuity_at_switches() {
    let c = c();
    let pr = fig5();
    let p = AnalyticProtocol::new(pr, &c).unwrap();
    for br in [SpinBranch::Up, SpinBranch::Down] {
        let s = br.zeeman_projection(&c);
        let pairs = [
            (
                stage1(p.tau1(), pr.x0, pr.eta1, pr.bias, pr.mass, s, &c),
                stage2(p.tau1(), &p.end1, pr.eta1, pr.bias, pr.mass, s, &c),
            ),
            (
                stage2(p.tau2(), &p.end1, pr.eta1, pr.bias, pr.mass, s, &c),
                stage3(p.tau2(), &p.end2, pr.eta2, pr.bias, pr.mass, s, &c),
            ),
        ];
        for (a, b) in pairs {
            assert!(
                (a.0 - b.0).abs() <= 1e-12 * a.0.abs().max(pr.x0),
                "{a:?} {b:?}"
            );
            assert!((a.1 - b.1).abs() <= 1e-12 * a.1.abs().max(1e-9));
        }
    }
}

proptest! {
    #[test]
    fn size_times_mass_is_invariant(x0 in 1e-6..1e-4f64, eta in 10.0..500.0f64, b0 in 0.05..2.0f64,
                                    m_exp in -20.0..-14.0f64) {
        let c = c();
        let m = 10f64.powf(m_exp);
        let a = delta_x_max(x0, eta, b0, 1e-19, &c) * 1e-19;
        let b = delta_x_max(x0, eta, b0, m, &c) * m;
        prop_assert!(((a - b) / a).abs() < 1e-9);
    }

    #[test]
    fn size_increases_with_release_distance(x0 in 1e-7..1e-4f64, dx in 1e-8..1e-5f64) {
        let c = c();
        prop_assert!(delta_x_max(x0 + dx, 100.0, 0.5, 1e-19, &c) > delta_x_max(x0, 100.0, 0.5, 1e-19, &c));
    }

    #[test]
    fn joint_scaling_keeps_phase(lambda in 0.1..10.0f64, x0 in 1e-6..1e-4f64) {
        let c = c();
        let base = omega(100.0, &c) * tau1(x0, 100.0, 0.5, &c);
        let scaled = omega(100.0 * lambda, &c) * tau1(x0, 100.0 * lambda, 0.5 * lambda, &c);
        prop_assert!(((base - scaled) / base).abs() < 1e-12);
        prop_assert!((omega(100.0 * lambda, &c) / omega(100.0, &c) - lambda).abs() < 1e-12);
    }

    #[test]
    fn delta_k_scales_inversely_with_mass(m_exp in -20.0..-14.0f64) {
        let c = c();
        let m = 10f64.powf(m_exp);
        let a = delta_k(100.0, m, &c);
        let b = delta_k(100.0, 2.0 * m, &c);
        prop_assert!((a - 2.0 * b).abs() <= 1e-12 * a);
    }

    #[test]
    fn symmetric_protocol_closes(x0 in 1e-6..1e-4f64, eta in 20.0..300.0f64, m_exp in -19.0..-15.0f64) {
        let c = c();
        let p = AnalyticProtocol::new(ProtocolParams {
            mass: 10f64.powf(m_exp), x0, bias: 0.5, eta1: eta, eta2: eta,
        }, &c).unwrap();
        let (dx, dv) = p.closure_residual();
        // Cancellation floor: arm positions carry the B0/η offset.
        let floor = 1e-12 * 0.5 / eta;
        let scale = p.delta_x_max;
        prop_assert!(dx.abs() < 1e-9 * scale + floor);
        prop_assert!(dv.abs() < (1e-9 * scale + floor) * omega(eta, &c));
    }
}
