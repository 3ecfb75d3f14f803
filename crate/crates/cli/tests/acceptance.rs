//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use levsg::config::RunConfig;
use levsg::scenario::{self, QUOTED_Z_L};
use levsg_core::analytic::{delta_x_max, trap_params, AnalyticProtocol, ProtocolParams};
use levsg_core::dynamics::{
    run_interferometer_numeric, ForceLaw, InterferometerRun, NumericSettings,
};
use levsg_core::estimates::{diffusion_length, heating_estimate};
use levsg_core::field::{
    field_jacobian, field_rect_wire, field_thin_infinite, ChipField, FieldSource, LinearField,
    RectQuadrature, DEFAULT_JACOBIAN_STEP,
};
use levsg_core::math::{max_abs, Vec3, PI};
use levsg_core::model::{thin_levitation_assembly, EndRule};
use levsg_core::{
    build_levitation_assembly, build_separation_assembly, ChipConfig, Conductor, PhysicalConstants,
    StagePlan, WireAxis, WireSegment,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn long_wire() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.chip.sep_wire_half_length = 1e-3;
    cfg
}

fn separation_gradient(chip: &ChipConfig, c: &PhysicalConstants) -> f64 {
    let stage = StagePlan::default().stages[0];
    let sep = build_separation_assembly(chip, &stage).unwrap();
    let field = ChipField::new(Vec::new(), sep, chip.bias_field, c.mu0);
    -field_jacobian(&field, &Vec3::zeros(), DEFAULT_JACOBIAN_STEP).unwrap()[(0, 0)]
}

fn c1_separation_gradient() -> Verdict {
    let c = PhysicalConstants::default();
    let start = Instant::now();
    let eta1 = separation_gradient(&ChipConfig::default(), &c);
    let secs = start.elapsed().as_secs_f64();
    let long = separation_gradient(&long_wire().chip, &c);
    verdict(
        rel(eta1, 100.0) < 0.02 && secs < 1.0,
        format!(
            "eta1 = {eta1:.4} T/m (target 100 +/- 2%) in {secs:.3} s; with 2l = 2 mm: {long:.4} T/m"
        ),
    )
}

fn c2_superposition_size(run: &InterferometerRun) -> Verdict {
    let c = PhysicalConstants::default();
    let analytic = delta_x_max(40e-6, 100.0, 0.5, 1e-19, &c);
    let size_ok = rel(analytic, 12e-6) < 0.10;
    let numeric_ok = rel(run.max_dx, analytic) < 0.05;
    let time_ok = run.duration() <= 0.1;
    verdict(
        size_ok && numeric_ok && time_ok,
        format!(
            "analytic dxmax = {:.4} um (12 +/- 10%), numeric max dx = {:.4} um ({:.2}% off), loop ends at {:.4} s",
            analytic * 1e6,
            run.max_dx * 1e6,
            100.0 * rel(run.max_dx, analytic),
            run.duration()
        ),
    )
}

fn c3_closure_current() -> Verdict {
    let start = Instant::now();
    let solved = scenario::close_loop(&RunConfig::default());
    let secs = start.elapsed().as_secs_f64();
    let long = scenario::close_loop(&long_wire())
        .map(|r| format!("{:.4} A", r.i3))
        .unwrap_or_else(|e| e.to_string());
    match solved {
        Ok(r) => verdict(
            (9.94..=10.0).contains(&r.i3)
                && r.residual_dv.abs() < 1e-7
                && r.residual_dx.abs() < 1e-8
                && secs < 60.0,
            format!(
                "I3 = {:.4} A (window [9.94, 10.00]), dx = {:.2e} m, dv = {:.2e} m/s in {secs:.1} s; with 2l = 2 mm: {long}",
                r.i3, r.residual_dx, r.residual_dv
            ),
        ),
        Err(e) => verdict(false, format!("solver error: {e}; with 2l = 2 mm: {long}")),
    }
}

fn c4_residual_field() -> Verdict {
    let c = PhysicalConstants::default();
    let mut worst = 0.0_f64;
    let mut spread = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=20 {
        let eta = 1e4 * 100f64.powf(k as f64 / 20.0);
        let t = trap_params(eta, 0.0, &c).unwrap();
        let product = t.bz_at_zl * eta;
        worst = worst.max(rel(product, -1986.0));
        spread = (spread.0.min(product), spread.1.max(product));
    }
    verdict(
        worst < 0.01,
        format!(
            "Bz(zL)*etaL in [{:.2}, {:.2}] T^2/m over etaL in [1e4, 1e6], max deviation from -1986 = {:.3}%",
            spread.0,
            spread.1,
            100.0 * worst
        ),
    )
}

fn c5_oracle_equivalence() -> Verdict {
    let c = PhysicalConstants::default();
    let (eta_l, eta) = (1.4e5, 100.0);
    let p = AnalyticProtocol::new(
        ProtocolParams {
            mass: 1e-19,
            x0: 40e-6,
            bias: 0.5,
            eta1: eta,
            eta2: eta,
        },
        &c,
    )
    .unwrap();
    let mut plan = StagePlan::three_stage(10.0, 10.0);
    plan.stages[0].end_rule = EndRule::Scheduled(p.tau1());
    plan.stages[1].end_rule = EndRule::Scheduled(p.tau2() - p.tau1());
    plan.stages[2].end_rule = EndRule::Scheduled(p.tau3 - p.tau2());
    let models = [
        LinearField::new(eta_l, -eta, 0.5),
        LinearField::new(eta_l, eta, 0.5),
        LinearField::new(eta_l, -eta, 0.5),
    ];
    let settings = NumericSettings {
        dt: 1e-5,
        ..NumericSettings::default()
    };
    let run =
        run_interferometer_numeric(&models, &plan, 40e-6, &ForceLaw::new(1e-19, c), &settings)
            .unwrap();
    let (mut dpos, mut dvel) = (0.0_f64, 0.0_f64);
    for traj in [&run.up, &run.down] {
        for s in &traj.samples {
            let (x, v) = p.state(s.branch, s.t);
            dpos = dpos.max((s.position[0] - x).abs());
            dvel = dvel.max((s.velocity[0] - v).abs());
        }
    }
    verdict(
        dpos < 1e-9 && dvel < 1e-8,
        format!(
            "max |dx| = {dpos:.2e} m (< 1e-9), max |dv| = {dvel:.2e} m/s (< 1e-8) over {:.4} s at dt = 1e-5 s",
            run.duration()
        ),
    )
}

fn c6_mass_scaling() -> Verdict {
    let c = PhysicalConstants::default();
    let masses = [1e-19, 1e-17, 1e-15];
    let sizes: Vec<f64> = masses
        .iter()
        .map(|&m| delta_x_max(40e-6, 100.0, 0.5, m, &c))
        .collect();
    let reference = sizes[0] * masses[0];
    let invariant = sizes
        .iter()
        .zip(&masses)
        .all(|(s, m)| rel(s * m, reference) < 1e-9);
    let bands = [(1e-6, 1e-4), (1e-8, 1e-6), (1e-10, 1e-8)];
    let hierarchy = sizes
        .iter()
        .zip(&bands)
        .all(|(s, (lo, hi))| s > lo && s < hi);
    verdict(
        invariant && hierarchy,
        format!(
            "dxmax = {:.4e} / {:.4e} / {:.4e} m for m = 1e-19 / 1e-17 / 1e-15 kg",
            sizes[0], sizes[1], sizes[2]
        ),
    )
}

fn c7_levitation_height() -> Verdict {
    match scenario::levitation(&RunConfig::default()) {
        Ok(l) => {
            let z = l.z_l_numeric;
            verdict(
                rel(z, l.trap.z_l) < 0.05 && (0.005e-6..=0.25e-6).contains(&z.abs()),
                format!(
                    "zL numeric = {:.4} um, formula with field etaL = {:.4e} T/m: {:.4} um, quoted {:.4} um",
                    z * 1e6,
                    l.eta_l_field,
                    l.trap.z_l * 1e6,
                    QUOTED_Z_L * 1e6
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn gap_to_levitation(cfg: &ChipConfig, y: f64, z: f64) -> f64 {
    let h = 0.5 * cfg.wire_width;
    let mut best = f64::INFINITY;
    for (sy, sz) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        let dy = ((y - sy * cfg.lev_half_spacing_y).abs() - h).max(0.0);
        let dz = ((z - sz * cfg.lev_half_spacing_z).abs() - h).max(0.0);
        best = best.min(dy.hypot(dz));
    }
    best
}

fn exterior_points(cfg: &ChipConfig, n: usize) -> Vec<Vec3> {
    let mut rng = StdRng::seed_from_u64(7);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec3::new(
            rng.gen_range(-300e-6..300e-6),
            rng.gen_range(-40e-6..40e-6),
            rng.gen_range(-40e-6..40e-6),
        );
        if gap_to_levitation(cfg, p[1], p[2]) > 2e-6 {
            out.push(p);
        }
    }
    out
}

fn c8_field_invariants() -> Verdict {
    let c = PhysicalConstants::default();
    let cfg = ChipConfig::default();
    let points = exterior_points(&cfg, 100);

    let mut antisym = 0.0_f64;
    for wires in [
        thin_levitation_assembly(&cfg),
        build_levitation_assembly(&cfg).unwrap(),
    ] {
        let f = ChipField::new(wires, Vec::new(), 0.0, c.mu0);
        for p in &points {
            let b = f.field(p).unwrap();
            let my = f.field(&Vec3::new(p[0], -p[1], p[2])).unwrap();
            let mz = f.field(&Vec3::new(p[0], p[1], -p[2])).unwrap();
            antisym = antisym.max((b[1] + my[1]).abs()).max((b[2] + mz[2]).abs());
        }
    }

    let stage = StagePlan::default().stages[0];
    let lev = build_levitation_assembly(&cfg).unwrap();
    let sep = build_separation_assembly(&cfg, &stage).unwrap();
    let both = ChipField::new(lev.clone(), sep.clone(), 0.0, c.mu0);
    let lev_only = ChipField::new(lev, Vec::new(), 0.0, c.mu0);
    let sep_only = ChipField::new(Vec::new(), sep, 0.0, c.mu0);
    let mut linearity = 0.0_f64;
    for p in &points {
        let all = both.field(p).unwrap();
        let parts = lev_only.field(p).unwrap() + sep_only.field(p).unwrap();
        linearity = linearity.max((all - parts).norm() / all.norm());
    }

    let chip = ChipField::for_stage(&cfg, &stage, &c).unwrap();
    let mut divergence = 0.0_f64;
    for p in &points {
        let j = field_jacobian(&chip, p, DEFAULT_JACOBIAN_STEP).unwrap();
        divergence = divergence.max(j.trace().abs() / max_abs(&j));
    }

    let q = RectQuadrature::default();
    let w = cfg.wire_width;
    let rect = WireSegment {
        conductor: Conductor::RectX {
            half_width: 0.5 * w,
        },
        center: [0.0, 0.0],
        current: 24.0,
    };
    let thin = WireSegment {
        conductor: Conductor::ThinInfinite { axis: WireAxis::X },
        ..rect
    };
    let r = 100.0 * w;
    let mut far = 0.0_f64;
    for k in 0..36 {
        let angle = 2.0 * PI * k as f64 / 36.0;
        let p = Vec3::new(0.0, r * angle.cos(), r * angle.sin());
        let a = field_rect_wire(&p, &rect, &q, c.mu0).unwrap();
        let b = field_thin_infinite(&p, &thin, c.mu0).unwrap();
        let mag = c.mu0 * 24.0 / (2.0 * PI * r);
        far = far.max((a[0] - b[0]).hypot(a[1] - b[1]) / mag);
    }

    verdict(
        antisym < 1e-12 && linearity < 1e-14 && divergence < 1e-4 && far < 1e-3,
        format!(
            "antisymmetry {antisym:.1e} T (< 1e-12), linearity {linearity:.1e} (< 1e-14), div/|grad| {divergence:.1e} (< 1e-4), far field {far:.1e} (< 1e-3)"
        ),
    )
}

fn c9_transverse_confinement(run: &InterferometerRun) -> Verdict {
    verdict(
        run.max_abs_y < 1e-9 && run.max_abs_dz < 1e-9,
        format!(
            "max|y| = {:.2e} m, max|z - zL| = {:.2e} m (both < 1e-9) over {:.4} s",
            run.max_abs_y,
            run.max_abs_dz,
            run.duration()
        ),
    )
}

fn c10_estimates() -> Verdict {
    let c = PhysicalConstants::default();
    let heat = heating_estimate(24.0, &ChipConfig::default(), 0.1, &c).unwrap();
    let length = diffusion_length(0.1, &c).unwrap();
    verdict(
        rel(heat.energy, 5.5) < 0.05 && rel(length, 2.8e-3) < 0.05,
        format!(
            "Q = {:.3} J (5.5 +/- 5%), diffusion length = {:.3} mm (2.8 +/- 5%)",
            heat.energy,
            length * 1e3
        ),
    )
}

fn main() -> ExitCode {
    let numeric = scenario::numeric_run(&RunConfig::default()).map(|(_, run)| run);
    let with_run = |f: fn(&InterferometerRun) -> Verdict| match &numeric {
        Ok(run) => f(run),
        Err(e) => verdict(false, format!("numeric run failed: {e}")),
    };
    let results = [
        ("separation gradient", c1_separation_gradient()),
        ("superposition size", with_run(c2_superposition_size)),
        ("closure current", c3_closure_current()),
        ("residual field", c4_residual_field()),
        ("oracle equivalence", c5_oracle_equivalence()),
        ("mass scaling", c6_mass_scaling()),
        ("levitation height", c7_levitation_height()),
        ("field invariants", c8_field_invariants()),
        (
            "transverse confinement",
            with_run(c9_transverse_confinement),
        ),
        ("engineering estimates", c10_estimates()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
