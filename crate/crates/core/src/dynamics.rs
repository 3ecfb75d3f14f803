//! Classical centre-of-mass motion of the two spin arms through a field model,
//! with fixed-step RK4 and staged current switching.

use alloc::vec::Vec;

use crate::constants::PhysicalConstants;
use crate::field::{field_jacobian, FieldError, FieldSource, DEFAULT_JACOBIAN_STEP};
use crate::math::{Mat3, Vec3};
use crate::model::{EndRule, ModelError, SpinBranch, StagePlan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state became non-finite at t = {0:e} s")]
    NonFinite(f64),
    #[error("no sign change of the vertical force on [{lo:e}, {hi:e}] m")]
    NoEquilibriumBracket { lo: f64, hi: f64 },
    #[error("stage {stage} end event not reached within {horizon:e} s")]
    EventNotFound { stage: usize, horizon: f64 },
    #[error("`{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("{models} field models for {stages} stages")]
    StageCount { models: usize, stages: usize },
}

/// Force law of a levitated diamond with a frozen spin projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceLaw {
    pub mass: f64,
    pub constants: PhysicalConstants,
    /// Central-difference step for the field Jacobian, m.
    pub jacobian_step: f64,
}

impl ForceLaw {
    pub fn new(mass: f64, constants: PhysicalConstants) -> Self {
        Self {
            mass,
            constants,
            jacobian_step: DEFAULT_JACOBIAN_STEP,
        }
    }

    /// `(χ/(2μ0)) ∇(B·B) - (ħ γ_e S_x / m) ∇B_x - g e_z` without the step-halving
    /// check on the Jacobian.
    pub fn acceleration<S: FieldSource + ?Sized>(
        &self,
        model: &S,
        position: &Vec3,
        s_x: f64,
    ) -> Result<Vec3, FieldError> {
        let b = model.field(position)?;
        let jac = model.jacobian(position, self.jacobian_step)?;
        Ok(self.combine(&b, &jac, s_x))
    }

    fn combine(&self, b: &Vec3, jac: &Mat3, s_x: f64) -> Vec3 {
        let c = &self.constants;
        let grad_b2 = 2.0 * jac.tr_mul(b);
        let grad_bx = jac.row(0).transpose();
        let mut a = grad_b2 * (c.chi_rho / (2.0 * c.mu0))
            - grad_bx * (c.hbar * c.gamma_e * s_x / self.mass);
        a[2] -= c.g;
        a
    }

    /// One classic RK4 step of length `h`.
    pub fn rk4_step<S: FieldSource + ?Sized>(
        &self,
        model: &S,
        s_x: f64,
        state: &PhaseState,
        h: f64,
    ) -> Result<PhaseState, FieldError> {
        let (p, v) = (state.position, state.velocity);
        let a1 = self.acceleration(model, &p, s_x)?;
        let p2 = p + v * (0.5 * h);
        let v2 = v + a1 * (0.5 * h);
        let a2 = self.acceleration(model, &p2, s_x)?;
        let p3 = p + v2 * (0.5 * h);
        let v3 = v + a2 * (0.5 * h);
        let a3 = self.acceleration(model, &p3, s_x)?;
        let p4 = p + v3 * h;
        let v4 = v + a3 * h;
        let a4 = self.acceleration(model, &p4, s_x)?;
        Ok(PhaseState {
            position: p + (v + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0),
            velocity: v + (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0),
        })
    }
}

/// Acceleration of `branch` at `state`, using the step-halving-checked Jacobian.
pub fn acceleration<S: FieldSource + ?Sized>(
    state: &TrajectoryState,
    model: &S,
    mass: f64,
    constants: &PhysicalConstants,
) -> Result<Vec3, FieldError> {
    let law = ForceLaw::new(mass, *constants);
    let b = model.field(&state.position)?;
    let jac = field_jacobian(model, &state.position, law.jacobian_step)?;
    Ok(law.combine(&b, &jac, state.branch.zeeman_projection(constants)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl PhaseState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
        }
    }

    fn is_finite(&self) -> bool {
        self.position
            .iter()
            .chain(self.velocity.iter())
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub branch: SpinBranch,
    pub stage_index: usize,
}

impl TrajectoryState {
    pub fn phase(&self) -> PhaseState {
        PhaseState {
            position: self.position,
            velocity: self.velocity,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryState>,
    /// End time of every stage, s.
    pub stage_boundaries: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryState> {
        self.samples.last()
    }
}

/// Integrates one arm. Stage `i` uses `models[i]` until `switch_times[i]`; the
/// last stage runs to `t_end`. Steps are clipped to land on every switch.
pub fn integrate<S: FieldSource>(
    initial: &TrajectoryState,
    models: &[S],
    switch_times: &[f64],
    t_end: f64,
    law: &ForceLaw,
    dt: f64,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::NonPositive("dt"));
    }
    if models.len() != switch_times.len() + 1 {
        return Err(DynamicsError::StageCount {
            models: models.len(),
            stages: switch_times.len() + 1,
        });
    }
    let s_x = initial.branch.zeeman_projection(&law.constants);
    let mut out = Trajectory::default();
    let mut cur = *initial;
    out.samples.push(cur);
    let first = initial.stage_index;
    for (idx, model) in models.iter().enumerate().skip(first) {
        let stop = switch_times.get(idx).copied().unwrap_or(t_end).min(t_end);
        cur.stage_index = idx;
        while let Some(h) = next_step(cur.t, stop, dt) {
            let next = law.rk4_step(model, s_x, &cur.phase(), h)?;
            if !next.is_finite() {
                return Err(DynamicsError::NonFinite(cur.t));
            }
            cur.t = if stop - cur.t <= h { stop } else { cur.t + h };
            cur.position = next.position;
            cur.velocity = next.velocity;
            out.samples.push(cur);
        }
        out.stage_boundaries.push(cur.t);
        if cur.t >= t_end {
            break;
        }
    }
    Ok(out)
}

/// Length of the next step toward `stop`, or `None` once there.
fn next_step(t: f64, stop: f64, dt: f64) -> Option<f64> {
    let left = stop - t;
    if left <= 1e-12 * dt {
        None
    } else {
        Some(left.min(dt))
    }
}

/// Vertical equilibrium at `(x, 0, z)`: bisection of `a_z` for a spinless
/// particle on `[lo, hi]` until `|a_z| < 1e-6 m/s²`.
pub fn find_equilibrium<S: FieldSource + ?Sized>(
    model: &S,
    x: f64,
    bracket: (f64, f64),
    law: &ForceLaw,
) -> Result<f64, DynamicsError> {
    const TOL: f64 = 1e-6;
    let az = |z: f64| -> Result<f64, DynamicsError> {
        Ok(law.acceleration(model, &Vec3::new(x, 0.0, z), 0.0)?[2])
    };
    let (mut lo, mut hi) = bracket;
    let mut f_lo = az(lo)?;
    let f_hi = az(hi)?;
    if f_lo.abs() < TOL {
        return Ok(lo);
    }
    if f_hi.abs() < TOL {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(DynamicsError::NoEquilibriumBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = az(mid)?;
        if f_mid.abs() < TOL || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Default vertical search interval for [`find_equilibrium`], m.
pub const EQUILIBRIUM_BRACKET: (f64, f64) = (-2e-6, 0.0);

/// Both arms at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub t: f64,
    pub up: PhaseState,
    pub dn: PhaseState,
}

impl PairState {
    pub fn dx(&self) -> f64 {
        self.up.position[0] - self.dn.position[0]
    }

    pub fn dv(&self) -> f64 {
        self.up.velocity[0] - self.dn.velocity[0]
    }

    pub fn midpoint_x(&self) -> f64 {
        0.5 * (self.up.position[0] + self.dn.position[0])
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Event watcher for one event-terminated stage.
#[derive(Debug, Clone, Copy)]
struct Monitor {
    rule: EndRule,
    reference: f64,
    sign: f64,
    armed: bool,
}

impl Monitor {
    /// `None` when the stage is over before it starts.
    fn new(rule: EndRule, start: &PairState) -> Option<Self> {
        let (reference, sign, armed) = match rule {
            EndRule::MidpointCrossesZero => (0.0, sign(start.midpoint_x()), true),
            EndRule::SeparationReturnsToInitial => (start.dx(), sign(start.dv()), false),
            EndRule::Closure => (0.0, sign(start.dv()), true),
            EndRule::Scheduled(_) => return None,
        };
        (sign != 0.0).then_some(Self {
            rule,
            reference,
            sign,
            armed,
        })
    }

    fn value(&self, s: &PairState) -> f64 {
        match self.rule {
            EndRule::MidpointCrossesZero => s.midpoint_x(),
            EndRule::SeparationReturnsToInitial => s.dx() - self.reference,
            EndRule::Closure => s.dv(),
            EndRule::Scheduled(_) => 0.0,
        }
    }

    fn crossed(&self, s: &PairState) -> bool {
        self.armed && self.sign * self.value(s) <= 0.0
    }

    fn update(&mut self, s: &PairState) {
        if !self.armed && self.sign * self.value(s) > 0.0 {
            self.armed = true;
        }
    }
}

/// Advances both arms together through staged field models.
#[derive(Debug, Clone, Copy)]
pub struct PairIntegrator {
    pub law: ForceLaw,
    pub dt: f64,
    s_up: f64,
    s_dn: f64,
}

impl PairIntegrator {
    pub fn new(law: ForceLaw, dt: f64) -> Result<Self, DynamicsError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DynamicsError::NonPositive("dt"));
        }
        Ok(Self {
            s_up: SpinBranch::Up.zeeman_projection(&law.constants),
            s_dn: SpinBranch::Down.zeeman_projection(&law.constants),
            law,
            dt,
        })
    }

    pub fn step<S: FieldSource + ?Sized>(
        &self,
        model: &S,
        s: &PairState,
        h: f64,
    ) -> Result<PairState, DynamicsError> {
        let up = self.law.rk4_step(model, self.s_up, &s.up, h)?;
        let dn = self.law.rk4_step(model, self.s_dn, &s.dn, h)?;
        if !(up.is_finite() && dn.is_finite()) {
            return Err(DynamicsError::NonFinite(s.t));
        }
        Ok(PairState { t: s.t + h, up, dn })
    }

    /// Runs one stage from `start` until its end rule fires, calling `record`
    /// on every new state. Event ends are located by bisecting the length of
    /// the final step. `horizon` bounds event-terminated stages.
    pub fn run_stage<S, R>(
        &self,
        model: &S,
        start: &PairState,
        rule: EndRule,
        stage: usize,
        horizon: f64,
        mut record: R,
    ) -> Result<PairState, DynamicsError>
    where
        S: FieldSource + ?Sized,
        R: FnMut(&PairState),
    {
        let mut cur = *start;
        if let EndRule::Scheduled(d) = rule {
            let stop = start.t + d;
            while let Some(h) = next_step(cur.t, stop, self.dt) {
                let mut next = self.step(model, &cur, h)?;
                if stop - cur.t <= h {
                    next.t = stop;
                }
                cur = next;
                record(&cur);
            }
            return Ok(cur);
        }
        let Some(mut monitor) = Monitor::new(rule, start) else {
            return Ok(cur);
        };
        loop {
            if cur.t - start.t > horizon {
                return Err(DynamicsError::EventNotFound { stage, horizon });
            }
            let next = self.step(model, &cur, self.dt)?;
            if monitor.crossed(&next) {
                let (mut lo, mut hi) = (0.0, self.dt);
                let mut end = next;
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let trial = self.step(model, &cur, mid)?;
                    if monitor.crossed(&trial) {
                        hi = mid;
                        end = trial;
                    } else {
                        lo = mid;
                    }
                }
                record(&end);
                return Ok(end);
            }
            monitor.update(&next);
            cur = next;
            record(&cur);
        }
    }
}

/// Numeric-run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericSettings {
    /// RK4 step, s.
    pub dt: f64,
    /// Upper bound on any event-terminated stage, s.
    pub stage_horizon: f64,
    /// Vertical search interval for the launch height, m.
    pub equilibrium_bracket: (f64, f64),
}

impl Default for NumericSettings {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            stage_horizon: 1.0,
            equilibrium_bracket: EQUILIBRIUM_BRACKET,
        }
    }
}

/// Result of a full two-arm run.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerRun {
    pub up: Trajectory,
    pub down: Trajectory,
    /// Launch height found by [`find_equilibrium`], m.
    pub z_start: f64,
    pub max_dx: f64,
    pub end_dx: f64,
    pub end_dv: f64,
    pub max_abs_y: f64,
    pub max_abs_dz: f64,
}

impl InterferometerRun {
    pub fn stage_ends(&self) -> &[f64] {
        &self.up.stage_boundaries
    }

    pub fn duration(&self) -> f64 {
        self.up.last().map_or(0.0, |s| s.t)
    }
}

/// Runs both arms from rest at `(-x0, 0, z_L)` through every stage of `plan`,
/// `models[i]` being the field during stage `i`. `z_L` is the equilibrium of
/// the first stage's field at `x = -x0`.
///
/// Each model's rect-wire convergence check (if any) is exercised once at the
/// launch point; callers pass unchecked copies for the hot loop.
pub fn run_interferometer_numeric<S: FieldSource>(
    models: &[S],
    plan: &StagePlan,
    x0: f64,
    law: &ForceLaw,
    settings: &NumericSettings,
) -> Result<InterferometerRun, DynamicsError> {
    plan.validate()?;
    if models.len() != plan.stages.len() {
        return Err(DynamicsError::StageCount {
            models: models.len(),
            stages: plan.stages.len(),
        });
    }
    let z0 = find_equilibrium(&models[0], -x0, settings.equilibrium_bracket, law)?;
    let launch = PhaseState::at_rest(Vec3::new(-x0, 0.0, z0));
    let integ = PairIntegrator::new(*law, settings.dt)?;
    let mut cur = PairState {
        t: 0.0,
        up: launch,
        dn: launch,
    };
    let mut up = Trajectory::default();
    let mut down = Trajectory::default();
    let push = |up: &mut Trajectory, down: &mut Trajectory, s: &PairState, stage: usize| {
        let mk = |p: &PhaseState, branch| TrajectoryState {
            t: s.t,
            position: p.position,
            velocity: p.velocity,
            branch,
            stage_index: stage,
        };
        up.samples.push(mk(&s.up, SpinBranch::Up));
        down.samples.push(mk(&s.dn, SpinBranch::Down));
    };
    push(&mut up, &mut down, &cur, 0);
    for (idx, (spec, model)) in plan.stages.iter().zip(models).enumerate() {
        cur = integ.run_stage(
            model,
            &cur,
            spec.end_rule,
            idx,
            settings.stage_horizon,
            |s| push(&mut up, &mut down, s, idx),
        )?;
        up.stage_boundaries.push(cur.t);
        down.stage_boundaries.push(cur.t);
    }
    let mut max_dx = 0.0_f64;
    let mut max_abs_y = 0.0_f64;
    let mut max_abs_dz = 0.0_f64;
    for (u, d) in up.samples.iter().zip(&down.samples) {
        max_dx = max_dx.max((u.position[0] - d.position[0]).abs());
        for p in [&u.position, &d.position] {
            max_abs_y = max_abs_y.max(p[1].abs());
            max_abs_dz = max_abs_dz.max((p[2] - z0).abs());
        }
    }
    Ok(InterferometerRun {
        up,
        down,
        z_start: z0,
        max_dx,
        end_dx: cur.dx(),
        end_dv: cur.dv(),
        max_abs_y,
        max_abs_dz,
    })
}
