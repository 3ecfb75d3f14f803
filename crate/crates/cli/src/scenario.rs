//! Builds field models, plans and solver inputs from a [`RunConfig`] and runs
//! the computations behind each subcommand. Nothing here writes files.

use rayon::prelude::*;

use levsg_core::analytic::{trap_params, AnalyticProtocol, ProtocolParams, TrapParams};
use levsg_core::closure::{solve_closure_with_scan, ClosureError, ClosureProblem, ClosureResult};
use levsg_core::dynamics::{
    find_equilibrium, run_interferometer_numeric, ForceLaw, InterferometerRun,
};
use levsg_core::field::{
    eta_l_thin, eta_s_thin, field_jacobian, total_field, ChipField, FieldSample, GridSpec, Plane,
};
use levsg_core::math::Vec3;
use levsg_core::model::{EndRule, StageSpec};
use levsg_core::sweep::{
    bz_row, gradient_row, grid, linspace, size_row, BzRow, GradientRow, SizeRow,
};
use levsg_core::StagePlan;

use crate::config::{MapPlane, RunConfig, Switching};
use crate::error::CliError;

/// Where the closed-form model takes its gradients from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaSource {
    /// Infinite thin-wire formulas.
    Thin,
    /// Numeric Jacobian of the simulated chip field at the origin.
    Field,
}

/// Gradient magnitudes, T/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradients {
    pub eta_l: f64,
    pub eta1: f64,
    pub eta2: f64,
}

pub fn force_law(cfg: &RunConfig) -> ForceLaw {
    ForceLaw {
        jacobian_step: cfg.numeric.jacobian_step,
        ..ForceLaw::new(cfg.particle.mass, cfg.constants)
    }
}

pub fn levitation_field(cfg: &RunConfig) -> Result<ChipField, CliError> {
    Ok(ChipField::levitation_only(&cfg.chip, &cfg.constants)?
        .with_quadrature(cfg.numeric.quadrature()))
}

pub fn stage_field(cfg: &RunConfig, stage: &StageSpec) -> Result<ChipField, CliError> {
    Ok(ChipField::for_stage(&cfg.chip, stage, &cfg.constants)?
        .with_quadrature(cfg.numeric.quadrature()))
}

pub fn thin_gradients(cfg: &RunConfig) -> Gradients {
    let mu0 = cfg.constants.mu0;
    let chip = &cfg.chip;
    Gradients {
        eta_l: eta_l_thin(
            chip.lev_half_spacing_y,
            chip.lev_half_spacing_z,
            chip.lev_current,
            mu0,
        ),
        eta1: eta_s_thin(chip.sep_half_spacing, cfg.current, mu0),
        eta2: eta_s_thin(chip.sep_half_spacing, cfg.closing_current, mu0),
    }
}

pub fn field_gradients(cfg: &RunConfig) -> Result<Gradients, CliError> {
    let h = cfg.numeric.jacobian_step;
    let origin = Vec3::zeros();
    let plan = cfg.plan();
    let lev = field_jacobian(&levitation_field(cfg)?, &origin, h)?;
    let s1 = field_jacobian(&stage_field(cfg, &plan.stages[0])?, &origin, h)?;
    let s3 = field_jacobian(&stage_field(cfg, &plan.stages[2])?, &origin, h)?;
    Ok(Gradients {
        eta_l: lev[(2, 2)],
        eta1: -s1[(0, 0)],
        eta2: -s3[(0, 0)],
    })
}

pub fn gradients(cfg: &RunConfig, source: EtaSource) -> Result<Gradients, CliError> {
    match source {
        EtaSource::Thin => Ok(thin_gradients(cfg)),
        EtaSource::Field => field_gradients(cfg),
    }
}

pub fn analytic_run(cfg: &RunConfig, source: EtaSource) -> Result<AnalyticProtocol, CliError> {
    let g = gradients(cfg, source)?;
    let params = ProtocolParams {
        mass: cfg.particle.mass,
        x0: cfg.x0,
        bias: cfg.chip.bias_field,
        eta1: g.eta1,
        eta2: g.eta2,
    };
    Ok(AnalyticProtocol::new(params, &cfg.constants)?)
}

/// Stage plan for numeric runs. With scheduled switching the first two
/// stages last the closed-form `τ1` and `τ2 - τ1` computed from the field's
/// own gradients; the last stage always ends at recombination.
pub fn numeric_plan(cfg: &RunConfig) -> Result<StagePlan, CliError> {
    let mut plan = cfg.plan();
    if cfg.switching == Switching::Scheduled {
        let p = analytic_run(cfg, EtaSource::Field)?;
        plan.stages[0].end_rule = EndRule::Scheduled(p.tau1());
        plan.stages[1].end_rule = EndRule::Scheduled(p.tau2() - p.tau1());
    }
    Ok(plan)
}

/// Exercises the quadrature convergence check once on the rail and returns
/// the unchecked copy used in the integration loop.
fn rail_checked(model: ChipField, x0: f64) -> Result<ChipField, CliError> {
    total_field(&Vec3::new(-x0, 0.0, 0.0), &model)?;
    Ok(model.unchecked())
}

fn stage_models(cfg: &RunConfig, stages: &[StageSpec]) -> Result<Vec<ChipField>, CliError> {
    stages
        .iter()
        .map(|s| rail_checked(stage_field(cfg, s)?, cfg.x0))
        .collect()
}

pub fn numeric_run(cfg: &RunConfig) -> Result<(StagePlan, InterferometerRun), CliError> {
    let plan = numeric_plan(cfg)?;
    let models = stage_models(cfg, &plan.stages)?;
    let run = run_interferometer_numeric(
        &models,
        &plan,
        cfg.x0,
        &force_law(cfg),
        &cfg.numeric.settings(),
    )?;
    Ok((plan, run))
}

/// Closing-current solve; the bracketing scan runs in parallel.
pub fn close_loop(cfg: &RunConfig) -> Result<ClosureResult, CliError> {
    let plan = numeric_plan(cfg)?;
    let n = plan.stages.len();
    let models = stage_models(cfg, &plan.stages[..n - 1])?;
    let last = plan.stages[n - 1];
    stage_models(cfg, &[last])?;
    let (chip, constants, quad) = (
        cfg.chip,
        cfg.constants,
        cfg.numeric.quadrature().unchecked(),
    );
    let factory = move |i3: f64| -> Result<ChipField, ClosureError> {
        let mut spec = last;
        spec.separation_current = i3;
        Ok(ChipField::for_stage(&chip, &spec, &constants)?.with_quadrature(quad.clone()))
    };
    let settings = cfg.numeric.closure;
    let problem = ClosureProblem::prepare(
        &models,
        &plan,
        cfg.x0,
        &force_law(cfg),
        &cfg.numeric.settings(),
        &settings,
        factory,
    )?;
    Ok(solve_closure_with_scan(
        &problem,
        cfg.closing_current,
        &settings,
        |p, currents| currents.par_iter().map(|&i| p.residual(i)).collect(),
    )?)
}

/// Trap of the levitation assembly alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Levitation {
    pub eta_l_thin: f64,
    pub eta_l_field: f64,
    /// Closed-form trap built on `eta_l_field`.
    pub trap: TrapParams,
    /// Root of the vertical force on the simulated field at `x = 0`.
    pub z_l_numeric: f64,
}

/// Levitation height quoted for the default chip, m.
pub const QUOTED_Z_L: f64 = -0.0176e-6;

pub fn levitation(cfg: &RunConfig) -> Result<Levitation, CliError> {
    let model = levitation_field(cfg)?;
    let eta_l_field = field_jacobian(&model, &Vec3::zeros(), cfg.numeric.jacobian_step)?[(2, 2)];
    let trap = trap_params(eta_l_field, 0.0, &cfg.constants)?;
    let z_l_numeric = find_equilibrium(
        &model,
        0.0,
        cfg.numeric.settings().equilibrium_bracket,
        &force_law(cfg),
    )?;
    Ok(Levitation {
        eta_l_thin: thin_gradients(cfg).eta_l,
        eta_l_field,
        trap,
        z_l_numeric,
    })
}

pub fn map_grid(cfg: &RunConfig) -> GridSpec {
    let m = &cfg.map;
    GridSpec {
        plane: match m.plane {
            MapPlane::Yz => Plane::Yz { x: m.coord },
            MapPlane::Xy => Plane::Xy { z: m.coord },
        },
        center: m.center,
        half_extent: m.half_extent,
        resolution: m.resolution,
    }
}

/// Field on the configured grid, in row-major order.
pub fn field_map(cfg: &RunConfig) -> Result<Vec<FieldSample>, CliError> {
    let model = match cfg.map.stage {
        0 => levitation_field(cfg)?,
        k => stage_field(cfg, &cfg.plan().stages[k - 1])?,
    };
    Ok(map_grid(cfg)
        .points()
        .par_iter()
        .map(|&p| FieldSample::evaluate(&model, p))
        .collect())
}

fn spacing_axis(cfg: &RunConfig) -> Vec<f64> {
    let s = &cfg.sweep;
    linspace(s.two_a_min_um, s.two_a_max_um, s.two_a_points)
}

pub fn gradient_sweep(cfg: &RunConfig) -> Vec<GradientRow> {
    let b = cfg.chip.lev_half_spacing_z;
    grid(&cfg.sweep.lev_currents, &spacing_axis(cfg))
        .par_iter()
        .map(|&(il, two_a)| gradient_row(b, two_a, il, &cfg.constants))
        .collect()
}

pub fn bz_sweep(cfg: &RunConfig) -> Vec<BzRow> {
    let b = cfg.chip.lev_half_spacing_z;
    grid(&cfg.sweep.lev_currents, &spacing_axis(cfg))
        .par_iter()
        .map(|&(il, two_a)| bz_row(b, two_a, il, &cfg.constants))
        .collect()
}

/// Maximum separation over the release-distance axis for every mass, with
/// the thin-wire stage-1 gradient.
pub fn size_sweep(cfg: &RunConfig) -> Vec<SizeRow> {
    let s = &cfg.sweep;
    let eta1 = thin_gradients(cfg).eta1;
    let x0 = linspace(s.x0_min_um, s.x0_max_um, s.x0_points);
    grid(&s.masses, &x0)
        .par_iter()
        .map(|&(m, x)| size_row(m, x, eta1, cfg.chip.bias_field, &cfg.constants))
        .collect()
}
