//! Closed-form results for the ideal linear field: trap frequencies,
//! levitation height, the three harmonic stages of the protocol and the
//! quantities derived from them.
//!
//! Stage gradients are passed as magnitudes. Stage 1 runs in `B_x = B0 - η1 x`,
//! stage 2 in `B_x = B0 + η1 x`, stage 3 in `B_x = B0 - η2 x`; the arms oscillate
//! about `+k1`, `-k1` and `+k2` respectively.
//!
//! Differences `Δ` are always `Up - Down`, which makes `Δk`, `Δx` non-negative
//! during the split (see [`SpinBranch::zeeman_projection`]).

use alloc::vec::Vec;

use crate::constants::PhysicalConstants;
#[cfg_attr(feature = "std", allow(unused_imports))]
use crate::math::{Float, PI};
use crate::model::SpinBranch;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticError {
    #[error("`{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("effective gradient `{0}` is not positive: {1:e} T/m")]
    NonPositiveGradient(&'static str, f64),
}

fn positive(v: f64, name: &'static str) -> Result<f64, AnalyticError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(AnalyticError::NonPositive(name))
    }
}

/// Harmonic trap produced by the levitation gradient `η_L` and a separation
/// gradient `η_S` (signed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    pub eta_l: f64,
    pub eta_s: f64,
    /// rad/s
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Levitation height below the quadrupole centre, m (negative).
    pub z_l: f64,
    /// `B_z` at the levitation height, T.
    pub bz_at_zl: f64,
}

pub fn trap_params(
    eta_l: f64,
    eta_s: f64,
    c: &PhysicalConstants,
) -> Result<TrapParams, AnalyticError> {
    if !(eta_l > 0.0 && eta_l.is_finite()) {
        return Err(AnalyticError::NonPositiveGradient("eta_L", eta_l));
    }
    if !(eta_l + eta_s > 0.0) {
        return Err(AnalyticError::NonPositiveGradient(
            "eta_L + eta_S",
            eta_l + eta_s,
        ));
    }
    let rate = c.diamagnetic_rate();
    let omega_z = eta_l * rate;
    Ok(TrapParams {
        eta_l,
        eta_s,
        omega_x: eta_s.abs() * rate,
        omega_y: (eta_l + eta_s) * rate,
        omega_z,
        z_l: -c.g / (omega_z * omega_z),
        bz_at_zl: c.residual_bz_product() / eta_l,
    })
}

/// `sqrt(ħ / (2 m ω))`, the harmonic-oscillator ground-state width.
pub fn ground_state_width(mass: f64, omega: f64, c: &PhysicalConstants) -> f64 {
    (c.hbar / (2.0 * mass * omega)).sqrt()
}

/// Angular frequency of the x motion for separation gradient magnitude `eta`.
pub fn omega(eta: f64, c: &PhysicalConstants) -> f64 {
    eta * c.diamagnetic_rate()
}

/// Centre offset `k = (B0 - μ0 γ_e ħ S_x / (m χ_ρ)) / η` for spin projection `s_x`.
pub fn k_branch(s_x: f64, eta: f64, b0: f64, mass: f64, c: &PhysicalConstants) -> f64 {
    (b0 - c.mu0 * c.gamma_e * c.hbar * s_x / (mass * c.chi_rho)) / eta
}

/// `k(Up) - k(Down)`.
pub fn delta_k(eta: f64, mass: f64, c: &PhysicalConstants) -> f64 {
    let up = SpinBranch::Up.zeeman_projection(c);
    let dn = SpinBranch::Down.zeeman_projection(c);
    k_branch(up, eta, 0.0, mass, c) - k_branch(dn, eta, 0.0, mass, c)
}

/// Potential energy (J) along x in `B_x = η_S x + B0`:
/// `-χ_ρ m B_x² / (2 μ0) + ħ γ_e S_x B_x`.
pub fn potential_energy(
    x: f64,
    s_x: f64,
    eta_s: f64,
    b0: f64,
    mass: f64,
    c: &PhysicalConstants,
) -> f64 {
    let bx = eta_s * x + b0;
    -c.chi_rho * mass * bx * bx / (2.0 * c.mu0) + c.hbar * c.gamma_e * s_x * bx
}

/// Harmonic arc about `center` starting from `(x, v)` after `dt` seconds.
pub fn harmonic_arc(dt: f64, x: f64, v: f64, omega: f64, center: f64) -> (f64, f64) {
    let (s, co) = (omega * dt).sin_cos();
    let a = x - center;
    (a * co + center + v / omega * s, -a * omega * s + v * co)
}

/// Stage 1 from rest at `-x0`.
pub fn stage1(
    t: f64,
    x0: f64,
    eta1: f64,
    b0: f64,
    mass: f64,
    s_x: f64,
    c: &PhysicalConstants,
) -> (f64, f64) {
    let k = k_branch(s_x, eta1, b0, mass, c);
    harmonic_arc(t, -x0, 0.0, omega(eta1, c), k)
}

/// Time at which the spinless midpoint released from `-x0` reaches `x = 0`.
pub fn tau1(x0: f64, eta1: f64, b0: f64, c: &PhysicalConstants) -> f64 {
    (b0 / (eta1 * x0 + b0)).acos() / omega(eta1, c)
}

/// Positions and velocities of both arms at the end of a stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageEndpoints {
    /// Up arm.
    pub x_plus: f64,
    /// Down arm.
    pub x_minus: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    /// Absolute end time, s.
    pub tau: f64,
}

impl StageEndpoints {
    pub fn delta_x(&self) -> f64 {
        self.x_plus - self.x_minus
    }

    pub fn delta_v(&self) -> f64 {
        self.v_plus - self.v_minus
    }

    pub fn branch(&self, branch: SpinBranch) -> (f64, f64) {
        match branch {
            SpinBranch::Up => (self.x_plus, self.v_plus),
            SpinBranch::Down => (self.x_minus, self.v_minus),
            SpinBranch::Neutral => (
                0.5 * (self.x_plus + self.x_minus),
                0.5 * (self.v_plus + self.v_minus),
            ),
        }
    }
}

/// Stage 2 for the arm with projection `s_x`, continuing from `end1`.
pub fn stage2(
    t: f64,
    end1: &StageEndpoints,
    eta1: f64,
    b0: f64,
    mass: f64,
    s_x: f64,
    c: &PhysicalConstants,
) -> (f64, f64) {
    let (x, v) = endpoint_for(end1, s_x, c);
    let k = k_branch(s_x, eta1, b0, mass, c);
    harmonic_arc(t - end1.tau, x, v, omega(eta1, c), -k)
}

/// Stage 3 for the arm with projection `s_x`, continuing from `end2`.
pub fn stage3(
    t: f64,
    end2: &StageEndpoints,
    eta2: f64,
    b0: f64,
    mass: f64,
    s_x: f64,
    c: &PhysicalConstants,
) -> (f64, f64) {
    let (x, v) = endpoint_for(end2, s_x, c);
    let k2 = k_branch(s_x, eta2, b0, mass, c);
    harmonic_arc(t - end2.tau, x, v, omega(eta2, c), k2)
}

fn endpoint_for(end: &StageEndpoints, s_x: f64, c: &PhysicalConstants) -> (f64, f64) {
    let up = SpinBranch::Up.zeeman_projection(c);
    if s_x == up {
        end.branch(SpinBranch::Up)
    } else if s_x == -up {
        end.branch(SpinBranch::Down)
    } else {
        end.branch(SpinBranch::Neutral)
    }
}

/// Closed-form `Δx2(t) = R sin(ω1 (t - τ1) + φ) - Δk1` and its amplitude and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationArc {
    pub amplitude: f64,
    pub phase: f64,
    pub delta_k: f64,
    pub omega: f64,
    pub t_start: f64,
}

impl SeparationArc {
    pub fn delta_x(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * (t - self.t_start) + self.phase).sin() - self.delta_k
    }
}

pub fn separation_size_stage2(
    end1: &StageEndpoints,
    eta1: f64,
    mass: f64,
    c: &PhysicalConstants,
) -> SeparationArc {
    let w = omega(eta1, c);
    let dk = delta_k(eta1, mass, c);
    let sin_part = end1.delta_x() + dk;
    let cos_part = end1.delta_v() / w;
    SeparationArc {
        amplitude: sin_part.hypot(cos_part),
        phase: sin_part.atan2(cos_part),
        delta_k: dk,
        omega: w,
        t_start: end1.tau,
    }
}

/// Time of the largest separation in stage 2.
pub fn t_max(arc: &SeparationArc) -> f64 {
    (0.5 * PI - arc.phase) / arc.omega + arc.t_start
}

/// End of stage 2: the separation is back at its stage-1 end value.
pub fn tau2(arc: &SeparationArc) -> f64 {
    (PI - 2.0 * arc.phase) / arc.omega + arc.t_start
}

/// `Δx_max = Δk1 (sqrt((B0 + 5 x0 η1) / (B0 + x0 η1)) - 1)`.
pub fn delta_x_max(x0: f64, eta1: f64, b0: f64, mass: f64, c: &PhysicalConstants) -> f64 {
    delta_k(eta1, mass, c) * (((b0 + 5.0 * x0 * eta1) / (b0 + x0 * eta1)).sqrt() - 1.0)
}

/// Inputs of the ideal three-stage protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub mass: f64,
    /// Release point is `-x0`.
    pub x0: f64,
    pub bias: f64,
    /// Stage-1/2 gradient magnitude, T/m.
    pub eta1: f64,
    /// Stage-3 gradient magnitude, T/m.
    pub eta2: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        positive(self.mass, "mass")?;
        positive(self.bias, "bias")?;
        positive(self.eta1, "eta1")?;
        positive(self.eta2, "eta2")?;
        if !(self.x0 >= 0.0 && self.x0.is_finite()) {
            return Err(AnalyticError::NonPositive("x0"));
        }
        Ok(())
    }
}

/// One row of the sampled protocol table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSample {
    pub t: f64,
    pub x_up: f64,
    pub v_up: f64,
    pub x_dn: f64,
    pub v_dn: f64,
    /// 0-based stage index.
    pub stage: usize,
}

impl ProtocolSample {
    pub fn dx(&self) -> f64 {
        self.x_up - self.x_dn
    }

    pub fn dv(&self) -> f64 {
        self.v_up - self.v_dn
    }
}

/// The stitched closed-form protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticProtocol {
    pub params: ProtocolParams,
    pub end1: StageEndpoints,
    pub end2: StageEndpoints,
    pub arc: SeparationArc,
    pub t_max: f64,
    /// First turning point of the separation in stage 3.
    pub tau3: f64,
    pub delta_x_max: f64,
    constants: PhysicalConstants,
}

impl AnalyticProtocol {
    pub fn new(p: ProtocolParams, c: &PhysicalConstants) -> Result<Self, AnalyticError> {
        p.validate()?;
        let up = SpinBranch::Up.zeeman_projection(c);
        let t1 = tau1(p.x0, p.eta1, p.bias, c);
        let (xp, vp) = stage1(t1, p.x0, p.eta1, p.bias, p.mass, up, c);
        let (xm, vm) = stage1(t1, p.x0, p.eta1, p.bias, p.mass, -up, c);
        let end1 = StageEndpoints {
            x_plus: xp,
            x_minus: xm,
            v_plus: vp,
            v_minus: vm,
            tau: t1,
        };
        let arc = separation_size_stage2(&end1, p.eta1, p.mass, c);
        let t2 = tau2(&arc);
        let (xp, vp) = stage2(t2, &end1, p.eta1, p.bias, p.mass, up, c);
        let (xm, vm) = stage2(t2, &end1, p.eta1, p.bias, p.mass, -up, c);
        let end2 = StageEndpoints {
            x_plus: xp,
            x_minus: xm,
            v_plus: vp,
            v_minus: vm,
            tau: t2,
        };
        let tau3 = t2 + stage3_turning_phase(&end2, p.eta2, p.mass, c) / omega(p.eta2, c);
        Ok(Self {
            params: p,
            end1,
            end2,
            t_max: t_max(&arc),
            tau3,
            delta_x_max: arc.amplitude - arc.delta_k,
            arc,
            constants: *c,
        })
    }

    pub fn tau1(&self) -> f64 {
        self.end1.tau
    }

    pub fn tau2(&self) -> f64 {
        self.end2.tau
    }

    pub fn stage_at(&self, t: f64) -> usize {
        if t <= self.end1.tau {
            0
        } else if t <= self.end2.tau {
            1
        } else {
            2
        }
    }

    /// `(x, v)` of one arm at time `t`; stage 3 is extended past `τ3`.
    pub fn state(&self, branch: SpinBranch, t: f64) -> (f64, f64) {
        let c = &self.constants;
        let p = &self.params;
        let s = branch.zeeman_projection(c);
        match self.stage_at(t) {
            0 => stage1(t, p.x0, p.eta1, p.bias, p.mass, s, c),
            1 => stage2(t, &self.end1, p.eta1, p.bias, p.mass, s, c),
            _ => stage3(t, &self.end2, p.eta2, p.bias, p.mass, s, c),
        }
    }

    /// Samples on a uniform grid of spacing `dt` from 0 to `τ3`, with the
    /// stage boundaries and `τ3` inserted exactly.
    pub fn sample(&self, dt: f64) -> Vec<ProtocolSample> {
        let n = (self.tau3 / dt).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        times.extend([self.end1.tau, self.end2.tau, self.tau3]);
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * dt);
        times.retain(|&t| t <= self.tau3);
        times
            .into_iter()
            .map(|t| {
                let (x_up, v_up) = self.state(SpinBranch::Up, t);
                let (x_dn, v_dn) = self.state(SpinBranch::Down, t);
                ProtocolSample {
                    t,
                    x_up,
                    v_up,
                    x_dn,
                    v_dn,
                    stage: self.stage_at(t),
                }
            })
            .collect()
    }

    /// Separation and relative velocity at `τ3`.
    pub fn closure_residual(&self) -> (f64, f64) {
        let (xu, vu) = self.state(SpinBranch::Up, self.tau3);
        let (xd, vd) = self.state(SpinBranch::Down, self.tau3);
        (xu - xd, vu - vd)
    }
}

/// Phase advance `ω2 (τ3 - τ2)` in `(0, 2π]` to the first minimum of
/// `Δx3 = R2 sin(θ + φ2) + Δk2`.
fn stage3_turning_phase(end2: &StageEndpoints, eta2: f64, mass: f64, c: &PhysicalConstants) -> f64 {
    let dk2 = delta_k(eta2, mass, c);
    let a = end2.delta_x() - dk2;
    let b = end2.delta_v() / omega(eta2, c);
    let phi2 = a.atan2(b);
    let mut theta = (1.5 * PI - phi2) % (2.0 * PI);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    if theta <= 0.0 {
        2.0 * PI
    } else {
        theta
    }
}

/// Convenience wrapper matching the stitched protocol constructor.
pub fn analytic_protocol(
    p: ProtocolParams,
    c: &PhysicalConstants,
) -> Result<AnalyticProtocol, AnalyticError> {
    AnalyticProtocol::new(p, c)
}
