//! Stage-3 recombination: the closing current that brings the two arms back
//! together in position and velocity.
//!
//! Stages before the last are integrated once and cached. For a trial current
//! `I3` the last stage runs until the relative velocity `Δv` changes sign (the
//! turning point of the separation, `τ3`); the signed separation `Δx(τ3)` is the
//! residual driven to zero. It is monotone in `I3` and changes sign at the
//! closing current, where `Δv(τ3)` vanishes too.

use alloc::vec::Vec;

use crate::dynamics::{
    find_equilibrium, DynamicsError, ForceLaw, NumericSettings, PairIntegrator, PairState,
    PhaseState,
};
use crate::field::{field_jacobian, FieldError, FieldSource, DEFAULT_JACOBIAN_STEP};
use crate::math::Vec3;
use crate::model::{EndRule, ModelError, StagePlan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClosureError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("stage plan needs at least two stages, got {0}")]
    PlanTooShort(usize),
    #[error("closure field models: expected {expected}, got {got}")]
    ModelCount { expected: usize, got: usize },
    #[error("residual does not change sign on [{lo} A, {hi} A]")]
    NoBracket { lo: f64, hi: f64 },
    #[error(
        "no convergence after {iterations} iterations: I3 = {i3} A, Δx = {dx:e} m, Δv = {dv:e} m/s"
    )]
    NotConverged {
        iterations: usize,
        i3: f64,
        dx: f64,
        dv: f64,
    },
    #[error("invalid closure setting `{0}`")]
    InvalidSetting(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureSettings {
    /// m
    pub tolerance_dx: f64,
    /// m/s
    pub tolerance_dv: f64,
    pub max_iterations: usize,
    /// Scan interval as fractions of the nominal current.
    pub scan_range: (f64, f64),
    pub scan_points: usize,
    /// Largest accepted last update of `I3`, relative to the nominal current.
    pub current_rel_tol: f64,
    /// Last-stage horizon in units of the stage-2 duration.
    pub horizon_factor: f64,
}

impl Default for ClosureSettings {
    fn default() -> Self {
        Self {
            tolerance_dx: 1e-8,
            tolerance_dv: 1e-7,
            max_iterations: 50,
            scan_range: (0.8, 1.2),
            scan_points: 9,
            current_rel_tol: 1e-6,
            horizon_factor: 3.0,
        }
    }
}

impl ClosureSettings {
    pub fn validate(&self) -> Result<(), ClosureError> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.tolerance_dx) {
            return Err(ClosureError::InvalidSetting("tolerance_dx"));
        }
        if !pos(self.tolerance_dv) {
            return Err(ClosureError::InvalidSetting("tolerance_dv"));
        }
        if self.max_iterations == 0 {
            return Err(ClosureError::InvalidSetting("max_iterations"));
        }
        let (lo, hi) = self.scan_range;
        if !(pos(lo) && pos(hi) && lo < hi) {
            return Err(ClosureError::InvalidSetting("scan_range"));
        }
        if self.scan_points < 2 {
            return Err(ClosureError::InvalidSetting("scan_points"));
        }
        if !pos(self.current_rel_tol) {
            return Err(ClosureError::InvalidSetting("current_rel_tol"));
        }
        if !pos(self.horizon_factor) {
            return Err(ClosureError::InvalidSetting("horizon_factor"));
        }
        Ok(())
    }
}

/// Last-stage outcome for one trial current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureSample {
    pub i3: f64,
    pub tau3: f64,
    pub dx: f64,
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureResult {
    pub i3: f64,
    /// `-∂B_x/∂x` of the last-stage field at the origin, T/m.
    pub eta2: f64,
    pub tau3: f64,
    pub residual_dx: f64,
    pub residual_dv: f64,
    /// Refinement evaluations after the scan.
    pub iterations: usize,
    pub scan: Vec<ClosureSample>,
}

/// Cached state at the start of the last stage plus a factory for the
/// last-stage field as a function of its current.
pub struct ClosureProblem<F> {
    start: PairState,
    tau1: f64,
    integrator: PairIntegrator,
    horizon: f64,
    stage: usize,
    factory: F,
}

impl<F, M> ClosureProblem<F>
where
    F: Fn(f64) -> Result<M, ClosureError>,
    M: FieldSource,
{
    /// Integrates every stage but the last of `plan` with `models` (one per
    /// stage before the last) from rest at `(-x0, 0, z_L)`.
    pub fn prepare<S: FieldSource>(
        models: &[S],
        plan: &StagePlan,
        x0: f64,
        law: &ForceLaw,
        numeric: &NumericSettings,
        closure: &ClosureSettings,
        factory: F,
    ) -> Result<Self, ClosureError> {
        plan.validate()?;
        closure.validate()?;
        let n = plan.stages.len();
        if n < 2 {
            return Err(ClosureError::PlanTooShort(n));
        }
        if models.len() != n - 1 {
            return Err(ClosureError::ModelCount {
                expected: n - 1,
                got: models.len(),
            });
        }
        let z0 = find_equilibrium(&models[0], -x0, numeric.equilibrium_bracket, law)?;
        let launch = PhaseState::at_rest(Vec3::new(-x0, 0.0, z0));
        let integrator = PairIntegrator::new(*law, numeric.dt)?;
        let mut cur = PairState {
            t: 0.0,
            up: launch,
            dn: launch,
        };
        let mut ends = Vec::with_capacity(n - 1);
        for (idx, (spec, model)) in plan.stages.iter().zip(models).enumerate() {
            cur = integrator.run_stage(
                model,
                &cur,
                spec.end_rule,
                idx,
                numeric.stage_horizon,
                |_| {},
            )?;
            ends.push(cur.t);
        }
        let tau1 = ends[0];
        let span = cur.t - if n > 2 { ends[n - 3] } else { 0.0 };
        Ok(Self {
            start: cur,
            tau1,
            integrator,
            horizon: closure.horizon_factor * span,
            stage: n - 1,
            factory,
        })
    }

    /// State of both arms at the start of the last stage.
    pub fn start(&self) -> &PairState {
        &self.start
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.start.t
    }

    /// Runs the last stage at current `i3`.
    pub fn residual(&self, i3: f64) -> Result<ClosureSample, ClosureError> {
        let model = (self.factory)(i3)?;
        let end = self.integrator.run_stage(
            &model,
            &self.start,
            EndRule::Closure,
            self.stage,
            self.horizon,
            |_| {},
        )?;
        Ok(ClosureSample {
            i3,
            tau3: end.t,
            dx: end.dx(),
            dv: end.dv(),
        })
    }

    /// `-∂B_x/∂x` at the origin of the last-stage field for current `i3`.
    pub fn eta2(&self, i3: f64) -> Result<f64, ClosureError> {
        let model = (self.factory)(i3)?;
        let jac = field_jacobian(&model, &Vec3::zeros(), DEFAULT_JACOBIAN_STEP)?;
        Ok(-jac[(0, 0)])
    }
}

/// Evenly spaced scan currents.
pub fn scan_currents(nominal: f64, settings: &ClosureSettings) -> Vec<f64> {
    let (lo, hi) = settings.scan_range;
    let n = settings.scan_points;
    (0..n)
        .map(|i| nominal * (lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Sequential-scan closure solve.
pub fn solve_closure<F, M>(
    problem: &ClosureProblem<F>,
    nominal: f64,
    settings: &ClosureSettings,
) -> Result<ClosureResult, ClosureError>
where
    F: Fn(f64) -> Result<M, ClosureError>,
    M: FieldSource,
{
    solve_closure_with_scan(problem, nominal, settings, |p, currents| {
        currents.iter().map(|&i| p.residual(i)).collect()
    })
}

/// Closure solve whose bracketing scan is delegated to `scan`, which must
/// return one result per current in input order.
///
/// The first sign change of `Δx(τ3)` on the scan grid brackets the root, which
/// is then refined by Illinois-modified regula falsi.
pub fn solve_closure_with_scan<F, M, G>(
    problem: &ClosureProblem<F>,
    nominal: f64,
    settings: &ClosureSettings,
    scan: G,
) -> Result<ClosureResult, ClosureError>
where
    F: Fn(f64) -> Result<M, ClosureError>,
    M: FieldSource,
    G: FnOnce(&ClosureProblem<F>, &[f64]) -> Vec<Result<ClosureSample, ClosureError>>,
{
    settings.validate()?;
    if !(nominal > 0.0 && nominal.is_finite()) {
        return Err(ClosureError::InvalidSetting("nominal current"));
    }
    let currents = scan_currents(nominal, settings);
    let mut samples = Vec::with_capacity(currents.len());
    let mut first_err = None;
    for r in scan(problem, &currents) {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if samples.is_empty() {
        return Err(first_err.unwrap_or(ClosureError::NoBracket {
            lo: currents[0],
            hi: currents[currents.len() - 1],
        }));
    }
    let finish = |s: &ClosureSample, iterations: usize, scan: Vec<ClosureSample>| {
        Ok(ClosureResult {
            i3: s.i3,
            eta2: problem.eta2(s.i3)?,
            tau3: s.tau3,
            residual_dx: s.dx,
            residual_dv: s.dv,
            iterations,
            scan,
        })
    };
    let within = |s: &ClosureSample| {
        s.dx.abs() < settings.tolerance_dx && s.dv.abs() < settings.tolerance_dv
    };
    if let Some(exact) = samples.iter().find(|s| s.dx == 0.0 && within(s)) {
        let exact = *exact;
        return finish(&exact, 0, samples);
    }
    let Some((mut a, mut b)) = samples
        .windows(2)
        .find(|w| w[0].dx.signum() != w[1].dx.signum())
        .map(|w| (w[0], w[1]))
    else {
        return Err(ClosureError::NoBracket {
            lo: currents[0],
            hi: currents[currents.len() - 1],
        });
    };
    let step_tol = settings.current_rel_tol * nominal;
    let (mut fa, mut fb) = (a.dx, b.dx);
    let mut last = b;
    for iter in 1..=settings.max_iterations {
        let mut c = b.i3 - fb * (b.i3 - a.i3) / (fb - fa);
        if !(c > a.i3.min(b.i3) && c < a.i3.max(b.i3)) {
            c = 0.5 * (a.i3 + b.i3);
        }
        let s = problem.residual(c)?;
        let step = (c - b.i3).abs();
        last = s;
        if s.dx == 0.0 || (within(&s) && step < step_tol) {
            return finish(&s, iter, samples);
        }
        if s.dx.signum() != fb.signum() {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = s;
        fb = s.dx;
        if (b.i3 - a.i3).abs() < step_tol && within(&s) {
            return finish(&s, iter, samples);
        }
    }
    Err(ClosureError::NotConverged {
        iterations: settings.max_iterations,
        i3: last.i3,
        dx: last.dx,
        dv: last.dv,
    })
}
