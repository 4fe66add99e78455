//! Stochastic simulation of supermode quadrature fluctuations and balanced homodyne detection.
//!
//! Each supermode contributes two independent Ornstein-Uhlenbeck quadratures,
//! X along the half pump phase and Y orthogonal to it:
//!
//!   dX = −κ(1 ∓ σ) X dt + √κ dW,   κ = γ/τ,
//!
//! with X = (a + a†)/√2 so the vacuum variance is 1/2. The output field is
//! √(2κ) X − X_in and is recorded in shot-noise units.
//!
//! The default integrator samples the exact Gaussian transition of (X, ∫X dt, W) over
//! one step, so the sampled spectrum carries no discretization bias. Euler-Maruyama is
//! kept for comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::SupermodeSet;
use crate::dynamics::{supermode_gain, CavityParams, OperatingPoint};
use crate::error::{Error, Result};
use crate::psd::{estimate_psd, NoiseEstimate};

/// dt may not exceed this fraction of the cavity decay time τ/γ.
pub const MAX_STEP_FRACTION: f64 = 0.1;
const LO_NORM_TOLERANCE: f64 = 1e-10;
const MAX_LANES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Exact,
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Purpose {
    Cavity = 0,
    Loss = 1,
    Bright = 2,
}

/// Independent generator for one (trajectory, purpose, lane) triple of a master seed.
fn stream(seed: u64, trajectory: u64, purpose: Purpose, lane: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trajectory << 24) | ((purpose as u64) << 16) | lane as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// 0-based supermode indices to simulate.
    pub supermodes: Vec<usize>,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub integrator: Integrator,
}

impl SimulationConfig {
    pub fn validate(&self, params: &CavityParams) -> Result<()> {
        let bound = MAX_STEP_FRACTION / params.decay_rate();
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if self.dt > bound {
            return Err(Error::StepTooLarge { dt: self.dt, bound });
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        if self.supermodes.is_empty() {
            return Err(Error::invalid("supermodes", "nothing to simulate"));
        }
        for (i, k) in self.supermodes.iter().enumerate() {
            if 2 * k + 1 >= MAX_LANES {
                return Err(Error::invalid("supermodes", format!("index {k} too large")));
            }
            if self.supermodes[..i].contains(k) {
                return Err(Error::invalid("supermodes", format!("index {k} repeated")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTrace {
    /// Relaxation rate κ(1 ∓ σ) (1/s).
    pub relaxation_rate: f64,
    /// Intracavity quadrature at the end of each step.
    pub intracavity: Vec<f64>,
    /// Output quadrature averaged over each step, in shot-noise units.
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupermodeTrace {
    pub index: usize,
    pub sigma: f64,
    pub x: QuadratureTrace,
    pub y: QuadratureTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub seed: u64,
    pub trajectory_index: u64,
    /// Lab-frame angle of the X quadrature (half the pump phase).
    pub reference_angle: f64,
    pub escape_efficiency: f64,
    pub modes: Vec<SupermodeTrace>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.modes.first().map_or(0, |m| m.x.output.len())
    }

    /// Intracavity quadratures, one row every `stride` steps.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("time_s");
        for m in &self.modes {
            out.push_str(&format!(",x{0},y{0}", m.index + 1));
        }
        out.push('\n');
        for n in (0..self.steps()).step_by(stride) {
            out.push_str(&format!("{}", (n + 1) as f64 * self.dt));
            for m in &self.modes {
                out.push_str(&format!(",{},{}", m.x.intracavity[n], m.y.intracavity[n]));
            }
            out.push('\n');
        }
        out
    }
}

/// Lower-triangular factor of the covariance of (W, ∫e^{−a(h−s)}dW, ∫(1 − e^{−a(h−s)})/a dW).
fn exact_step_factor(a: f64, h: f64) -> [[f64; 3]; 3] {
    let e1 = -(-a * h).exp_m1();
    let e2 = -(-2.0 * a * h).exp_m1();
    let vw = h;
    let v1 = e2 / (2.0 * a);
    let v2 = (h - 2.0 * e1 / a + e2 / (2.0 * a)) / (a * a);
    let c1w = e1 / a;
    let c2w = (h - e1 / a) / a;
    let c12 = (e1 - 0.5 * e2) / (a * a);

    let l00 = vw.sqrt();
    let l10 = c1w / l00;
    let l11 = (v1 - l10 * l10).max(0.0).sqrt();
    let l20 = c2w / l00;
    let l21 = if l11 > 0.0 { (c12 - l20 * l10) / l11 } else { 0.0 };
    let l22 = (v2 - l20 * l20 - l21 * l21).max(0.0).sqrt();
    [[l00, 0.0, 0.0], [l10, l11, 0.0], [l20, l21, l22]]
}

fn integrate_quadrature(
    a: f64,
    kappa: f64,
    dt: f64,
    steps: usize,
    integrator: Integrator,
    rng: &mut ChaCha8Rng,
) -> QuadratureTrace {
    let sk = kappa.sqrt();
    let root_dt = dt.sqrt();
    // start from the stationary distribution
    let mut x = (kappa / (2.0 * a)).sqrt() * normal(rng);
    let mut intracavity = Vec::with_capacity(steps);
    let mut output = Vec::with_capacity(steps);
    match integrator {
        Integrator::Exact => {
            let l = exact_step_factor(a, dt);
            let decay = (-a * dt).exp();
            let mean_integral = -(-a * dt).exp_m1() / a;
            for _ in 0..steps {
                let (z0, z1, z2) = (normal(rng), normal(rng), normal(rng));
                let w = l[0][0] * z0;
                let i1 = l[1][0] * z0 + l[1][1] * z1;
                let i2 = l[2][0] * z0 + l[2][1] * z1 + l[2][2] * z2;
                let integral = x * mean_integral + sk * i2;
                x = decay * x + sk * i1;
                intracavity.push(x);
                output.push((2.0 * sk * integral - w) / root_dt);
            }
        }
        Integrator::EulerMaruyama => {
            for _ in 0..steps {
                let w = root_dt * normal(rng);
                let next = x - a * x * dt + sk * w;
                let integral = 0.5 * dt * (x + next);
                x = next;
                intracavity.push(x);
                output.push((2.0 * sk * integral - w) / root_dt);
            }
        }
    }
    QuadratureTrace {
        relaxation_rate: a,
        intracavity,
        output,
    }
}

/// Integrates one trajectory of the configured supermodes.
pub fn simulate(
    config: &SimulationConfig,
    trajectory_index: u64,
    s: &SupermodeSet,
    op: &OperatingPoint,
    params: &CavityParams,
) -> Result<Trajectory> {
    config.validate(params)?;
    let kappa = params.decay_rate();
    let modes = config
        .supermodes
        .iter()
        .map(|&k| {
            let (sigma, sign) = supermode_gain(k, s, op, params)?;
            if sigma >= 1.0 - 1e-12 {
                return Err(Error::InconsistentOperatingPoint(format!(
                    "supermode {} is at threshold and has no stationary fluctuations",
                    k + 1
                )));
            }
            let ax = kappa * (1.0 - sign * sigma);
            let ay = kappa * (1.0 + sign * sigma);
            let mut rx = stream(config.seed, trajectory_index, Purpose::Cavity, 2 * k);
            let mut ry = stream(config.seed, trajectory_index, Purpose::Cavity, 2 * k + 1);
            Ok(SupermodeTrace {
                index: k,
                sigma,
                x: integrate_quadrature(ax, kappa, config.dt, config.steps, config.integrator, &mut rx),
                y: integrate_quadrature(ay, kappa, config.dt, config.steps, config.integrator, &mut ry),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        dt: config.dt,
        seed: config.seed,
        trajectory_index,
        reference_angle: 0.5 * op.intracavity_pump_mean.arg(),
        escape_efficiency: params.escape_efficiency(),
        modes,
    })
}

/// Single-supermode trajectory with the exact integrator.
pub fn simulate_trajectory(
    k: usize,
    op: &OperatingPoint,
    s: &SupermodeSet,
    params: &CavityParams,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    let config = SimulationConfig {
        supermodes: vec![k],
        dt,
        steps,
        seed,
        integrator: Integrator::Exact,
    };
    simulate(&config, 0, s, op, params)
}

/// Independent trajectories 0..count, integrated in parallel and returned in index order.
pub fn simulate_ensemble(
    config: &SimulationConfig,
    count: usize,
    s: &SupermodeSet,
    op: &OperatingPoint,
    params: &CavityParams,
) -> Result<Vec<Trajectory>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate(config, i, s, op, params))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSpec {
    /// Local-oscillator amplitude on each simulated supermode (unit norm).
    pub lo_mode: Vec<f64>,
    /// Lab-frame LO phase (rad).
    pub lo_phase: f64,
    pub lo_power: f64,
    /// Power of an undepleted bright beam hitting the detectors (W).
    pub bright_power: f64,
    pub detection_efficiency: f64,
    /// Fringe visibility between LO and signal; mode matching enters as its square.
    pub visibility: f64,
}

impl HomodyneSpec {
    fn validate(&self, modes: usize) -> Result<()> {
        if self.lo_mode.len() != modes {
            return Err(Error::invalid(
                "lo_mode",
                format!(
                    "{} coefficients for {modes} simulated supermodes",
                    self.lo_mode.len()
                ),
            ));
        }
        let norm: f64 = self.lo_mode.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > LO_NORM_TOLERANCE {
            return Err(Error::LoNotNormalized(norm));
        }
        if self.lo_power == 0.0 {
            return Err(Error::ZeroLoPower);
        }
        if !(self.lo_power > 0.0) {
            return Err(Error::invalid("lo_power", "must be positive"));
        }
        if !(self.bright_power >= 0.0) {
            return Err(Error::invalid("bright_power", "must be non-negative"));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(Error::invalid("detection_efficiency", "must be in (0, 1]"));
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            return Err(Error::invalid("visibility", "must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneRecord {
    /// Difference photocurrent in units where vacuum input has unit variance per sample.
    pub samples: Vec<f64>,
    pub sample_interval: f64,
    /// Overall detection efficiency escape × detection × visibility².
    pub efficiency: f64,
    /// Bright-beam to LO power ratio.
    pub bright_ratio: f64,
}

pub fn homodyne_record(traj: &Trajectory, spec: &HomodyneSpec) -> Result<HomodyneRecord> {
    spec.validate(traj.modes.len())?;
    let eta = traj.escape_efficiency * spec.detection_efficiency * spec.visibility.powi(2);
    let bright_ratio = spec.bright_power / spec.lo_power;
    let steps = traj.steps();
    let theta = spec.lo_phase - traj.reference_angle;
    let (c, sn) = (theta.cos(), theta.sin());
    let (signal, vacuum) = (eta.sqrt(), (1.0 - eta).max(0.0).sqrt());
    let mut samples = vec![0.0; steps];
    for (m, &amp) in traj.modes.iter().zip(&spec.lo_mode) {
        if amp == 0.0 {
            continue;
        }
        for (q, (trace, weight)) in [(&m.x, c), (&m.y, sn)].into_iter().enumerate() {
            let mut rng = stream(traj.seed, traj.trajectory_index, Purpose::Loss, 2 * m.index + q);
            for (out, &v) in samples.iter_mut().zip(&trace.output) {
                let lost = if vacuum > 0.0 {
                    vacuum * normal(&mut rng)
                } else {
                    0.0
                };
                *out += amp * weight * (signal * v + lost);
            }
        }
    }
    if bright_ratio > 0.0 {
        let mut rng = stream(traj.seed, traj.trajectory_index, Purpose::Bright, 0);
        let scale = bright_ratio.sqrt();
        for out in &mut samples {
            *out += scale * normal(&mut rng);
        }
    }
    Ok(HomodyneRecord {
        samples,
        sample_interval: traj.dt,
        efficiency: eta,
        bright_ratio,
    })
}

impl HomodyneRecord {
    /// Sums blocks of `factor` samples, as a detector with that integration time would,
    /// keeping white noise at unit variance. A trailing partial block is dropped.
    pub fn decimate(&self, factor: usize) -> Result<HomodyneRecord> {
        if factor == 0 {
            return Err(Error::invalid("decimation", "must be at least 1"));
        }
        let norm = (factor as f64).sqrt();
        Ok(HomodyneRecord {
            samples: self
                .samples
                .chunks_exact(factor)
                .map(|c| c.iter().sum::<f64>() / norm)
                .collect(),
            sample_interval: self.sample_interval * factor as f64,
            ..self.clone()
        })
    }

    pub fn estimate_psd(&self, segment_length: usize) -> Result<NoiseEstimate> {
        estimate_psd(&self.samples, self.sample_interval, segment_length)
    }
}

/// Factor by which the detected shot-noise level exceeds that of the LO alone.
pub fn shot_noise_correction(lo_power: f64, bright_power: f64) -> Result<f64> {
    if lo_power == 0.0 {
        return Err(Error::ZeroLoPower);
    }
    if !(lo_power > 0.0) || !(bright_power >= 0.0) {
        return Err(Error::invalid(
            "power",
            "LO must be positive and bright power non-negative",
        ));
    }
    Ok((lo_power + bright_power) / lo_power)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    pub homodyne: HomodyneSpec,
    pub trajectories: usize,
    pub decimation: usize,
    pub segment_length: usize,
}

/// Simulates `plan.trajectories` records in parallel and pools their spectra in index order.
pub fn simulated_spectrum(
    config: &SimulationConfig,
    plan: &MeasurementPlan,
    s: &SupermodeSet,
    op: &OperatingPoint,
    params: &CavityParams,
) -> Result<NoiseEstimate> {
    if plan.trajectories == 0 {
        return Err(Error::invalid("trajectories", "must be positive"));
    }
    let estimates = (0..plan.trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let traj = simulate(config, i, s, op, params)?;
            homodyne_record(&traj, &plan.homodyne)?
                .decimate(plan.decimation)?
                .estimate_psd(plan.segment_length)
        })
        .collect::<Result<Vec<_>>>()?;
    NoiseEstimate::pool(&estimates)
}
