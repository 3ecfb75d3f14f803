//! Subcommand bodies: run the scenario, write CSVs, return a summary line.

use std::fs;
use std::path::{Path, PathBuf};

use levsg_core::estimates::{diffusion_length, heating_estimate};

use crate::config::{parse_config, RunConfig};
use crate::csv::{real, CsvFile};
use crate::error::CliError;
use crate::scenario::{self, EtaSource, QUOTED_Z_L};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    FieldMap,
    GradientSweep,
    BzSweep,
    Levitate,
    Interferometer { mode: Mode, eta_source: EtaSource },
    SizeSweep,
    CloseLoop,
    Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "t_s", "x_up_m", "v_up_mps", "x_dn_m", "v_dn_mps", "dx_m", "dv_mps", "stage",
];
pub const TRANSVERSE_HEADER: [&str; 8] = [
    "y_up_m",
    "z_up_m",
    "vy_up_mps",
    "vz_up_mps",
    "y_dn_m",
    "z_dn_m",
    "vy_dn_mps",
    "vz_dn_mps",
];

/// Reads the config file, or the defaults when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

pub fn execute(task: Task, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    match task {
        Task::FieldMap => field_map(cfg, dir),
        Task::GradientSweep => gradient_sweep(cfg, dir),
        Task::BzSweep => bz_sweep(cfg, dir),
        Task::Levitate => levitate(cfg, dir),
        Task::Interferometer {
            mode: Mode::Analytic,
            eta_source,
        } => interferometer_analytic(cfg, eta_source, dir),
        Task::Interferometer {
            mode: Mode::Numeric,
            ..
        } => interferometer_numeric(cfg, dir),
        Task::SizeSweep => size_sweep(cfg, dir),
        Task::CloseLoop => close_loop(cfg, dir),
        Task::Estimate => estimate(cfg, dir),
    }
}

fn done(summary: String, file: PathBuf) -> Result<Outcome, CliError> {
    Ok(Outcome {
        summary,
        files: vec![file],
    })
}

fn field_map(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let samples = scenario::field_map(cfg)?;
    let mut f = CsvFile::create(
        &dir.join("field_map.csv"),
        &["x_m", "y_m", "z_m", "Bx_T", "By_T", "Bz_T", "Bnorm_T"],
    )?;
    let mut masked = 0;
    let mut min: Option<(f64, usize)> = None;
    for (i, s) in samples.iter().enumerate() {
        let b = s.field.unwrap_or_else(|| {
            masked += 1;
            [f64::NAN; 3].into()
        });
        let norm = s.norm().unwrap_or(f64::NAN);
        if norm.is_finite() && min.is_none_or(|(m, _)| norm < m) {
            min = Some((norm, i));
        }
        let p = s.position;
        f.reals(&[p[0], p[1], p[2], b[0], b[1], b[2], norm])?;
    }
    let file = f.finish()?;
    let min_text = match min {
        Some((n, i)) => {
            let p = samples[i].position;
            format!(
                "min |B| = {n:.4e} T at ({:.3}, {:.3}, {:.3}) um",
                p[0] * 1e6,
                p[1] * 1e6,
                p[2] * 1e6
            )
        }
        None => "no exterior points".to_string(),
    };
    done(
        format!(
            "field-map: {} points ({masked} masked), {min_text} -> {}",
            samples.len(),
            file.display()
        ),
        file,
    )
}

fn gradient_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let rows = scenario::gradient_sweep(cfg);
    let mut f = CsvFile::create(
        &dir.join("gradient_sweep.csv"),
        &["two_a_um", "IL_A", "etaL_Tpm"],
    )?;
    for r in &rows {
        f.reals(&[r.two_a_um, r.il_a, r.eta_l_tpm])?;
    }
    let file = f.finish()?;
    let peak = rows.iter().map(|r| r.eta_l_tpm).fold(f64::NAN, f64::max);
    done(
        format!(
            "gradient-sweep: {} rows, peak etaL = {peak:.4e} T/m -> {}",
            rows.len(),
            file.display()
        ),
        file,
    )
}

fn bz_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let rows = scenario::bz_sweep(cfg);
    let mut f = CsvFile::create(&dir.join("bz_sweep.csv"), &["two_a_um", "IL_A", "Bz_T"])?;
    for r in &rows {
        f.reals(&[r.two_a_um, r.il_a, r.bz_t])?;
    }
    let file = f.finish()?;
    let smallest = rows.iter().map(|r| r.bz_t.abs()).fold(f64::NAN, f64::min);
    done(
        format!(
            "bz-sweep: {} rows, min |Bz(zL)| = {smallest:.4e} T -> {}",
            rows.len(),
            file.display()
        ),
        file,
    )
}

fn levitate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let lev = scenario::levitation(cfg)?;
    let t = &lev.trap;
    let mut f = CsvFile::create(
        &dir.join("levitate.csv"),
        &[
            "etaL_thin_Tpm",
            "etaL_field_Tpm",
            "omega_y_rps",
            "omega_z_rps",
            "zL_formula_m",
            "zL_numeric_m",
            "zL_quoted_m",
            "Bz_zL_T",
        ],
    )?;
    f.reals(&[
        lev.eta_l_thin,
        lev.eta_l_field,
        t.omega_y,
        t.omega_z,
        t.z_l,
        lev.z_l_numeric,
        QUOTED_Z_L,
        t.bz_at_zl,
    ])?;
    let file = f.finish()?;
    done(
        format!(
            "levitate: etaL = {:.4e} T/m (thin {:.4e}), omega_z = {:.4e} rad/s, zL = {:.4e} m numeric / {:.4e} m formula (quoted {QUOTED_Z_L:.4e} m), Bz(zL) = {:.4e} T -> {}",
            lev.eta_l_field,
            lev.eta_l_thin,
            t.omega_z,
            lev.z_l_numeric,
            t.z_l,
            t.bz_at_zl,
            file.display()
        ),
        file,
    )
}

fn interferometer_analytic(
    cfg: &RunConfig,
    source: EtaSource,
    dir: &Path,
) -> Result<Outcome, CliError> {
    let p = scenario::analytic_run(cfg, source)?;
    let samples = p.sample(cfg.numeric.sample_dt);
    let mut f = CsvFile::create(&dir.join("trajectory_analytic.csv"), &TRAJECTORY_HEADER)?;
    let mut max_dx = 0.0_f64;
    for s in &samples {
        max_dx = max_dx.max(s.dx().abs());
        let mut cells: Vec<String> = [s.t, s.x_up, s.v_up, s.x_dn, s.v_dn, s.dx(), s.dv()]
            .iter()
            .map(|&x| real(x))
            .collect();
        cells.push((s.stage + 1).to_string());
        f.row(cells)?;
    }
    let file = f.finish()?;
    let (dx3, dv3) = p.closure_residual();
    done(
        format!(
            "interferometer (analytic): eta1 = {:.4e} T/m, eta2 = {:.4e} T/m, max dx = {max_dx:.4e} m (formula {:.4e} m), tau1/tau2/tau3 = {:.4e}/{:.4e}/{:.4e} s, end dx = {dx3:.3e} m, dv = {dv3:.3e} m/s -> {}",
            p.params.eta1,
            p.params.eta2,
            p.delta_x_max,
            p.tau1(),
            p.tau2(),
            p.tau3,
            file.display()
        ),
        file,
    )
}

fn interferometer_numeric(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let (_, run) = scenario::numeric_run(cfg)?;
    let header: Vec<&str> = TRAJECTORY_HEADER
        .iter()
        .chain(TRANSVERSE_HEADER.iter())
        .copied()
        .collect();
    let mut f = CsvFile::create(&dir.join("trajectory_numeric.csv"), &header)?;
    for (u, d) in run.up.samples.iter().zip(&run.down.samples) {
        let (pu, vu, pd, vd) = (u.position, u.velocity, d.position, d.velocity);
        let mut cells: Vec<String> = [
            u.t,
            pu[0],
            vu[0],
            pd[0],
            vd[0],
            pu[0] - pd[0],
            vu[0] - vd[0],
        ]
        .iter()
        .map(|&x| real(x))
        .collect();
        cells.push((u.stage_index + 1).to_string());
        cells.extend(
            [pu[1], pu[2], vu[1], vu[2], pd[1], pd[2], vd[1], vd[2]]
                .iter()
                .map(|&x| real(x)),
        );
        f.row(cells)?;
    }
    let file = f.finish()?;
    let ends = run
        .stage_ends()
        .iter()
        .map(|t| format!("{t:.4e}"))
        .collect::<Vec<_>>()
        .join("/");
    done(
        format!(
            "interferometer (numeric): zL = {:.4e} m, max dx = {:.4e} m, stage ends {ends} s, end dx = {:.3e} m, dv = {:.3e} m/s, max|y| = {:.3e} m, max|z-zL| = {:.3e} m -> {}",
            run.z_start,
            run.max_dx,
            run.end_dx,
            run.end_dv,
            run.max_abs_y,
            run.max_abs_dz,
            file.display()
        ),
        file,
    )
}

fn size_sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let rows = scenario::size_sweep(cfg);
    let mut f = CsvFile::create(
        &dir.join("size_sweep.csv"),
        &["mass_kg", "x0_um", "dxmax_m"],
    )?;
    for r in &rows {
        f.reals(&[r.mass_kg, r.x0_um, r.dxmax_m])?;
    }
    let file = f.finish()?;
    let peak = rows.iter().map(|r| r.dxmax_m).fold(f64::NAN, f64::max);
    done(
        format!(
            "size-sweep: {} rows, largest dxmax = {peak:.4e} m -> {}",
            rows.len(),
            file.display()
        ),
        file,
    )
}

fn close_loop(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let r = scenario::close_loop(cfg)?;
    let mut f = CsvFile::create(
        &dir.join("closure.csv"),
        &[
            "I3_A",
            "eta2_Tpm",
            "tau3_s",
            "res_dx_m",
            "res_dv_mps",
            "iters",
        ],
    )?;
    let mut cells: Vec<String> = [r.i3, r.eta2, r.tau3, r.residual_dx, r.residual_dv]
        .iter()
        .map(|&x| real(x))
        .collect();
    cells.push(r.iterations.to_string());
    f.row(cells)?;
    let file = f.finish()?;
    done(
        format!(
            "close-loop: I3 = {:.6} A, eta2 = {:.4e} T/m, tau3 = {:.4e} s, dx = {:.3e} m, dv = {:.3e} m/s, {} iterations -> {}",
            r.i3,
            r.eta2,
            r.tau3,
            r.residual_dx,
            r.residual_dv,
            r.iterations,
            file.display()
        ),
        file,
    )
}

fn estimate(cfg: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    let e = &cfg.estimate;
    let heat = heating_estimate(e.current, &cfg.chip, e.duration, &cfg.constants)?;
    let diffusion = diffusion_length(e.duration, &cfg.constants)?;
    let mut f = CsvFile::create(
        &dir.join("estimate.csv"),
        &["I_A", "duration_s", "R_ohm", "Q_J", "diffusion_length_m"],
    )?;
    f.reals(&[
        e.current,
        e.duration,
        heat.resistance,
        heat.energy,
        diffusion,
    ])?;
    let file = f.finish()?;
    done(
        format!(
            "estimate: R = {:.4e} ohm, Q = {:.4e} J, diffusion length = {diffusion:.4e} m -> {}",
            heat.resistance,
            heat.energy,
            file.display()
        ),
        file,
    )
}
