//! Scenario files: sectioned TOML with units in the key names.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{build_coupling_matrix, diagonalize, ModeBasis, SupermodeSet};
use crate::dynamics::{CavityParams, PumpDrive};
use crate::error::{Error, Result};
use crate::hg_modes::{BeamGeometry, CavityGeometry, HGMode};
use crate::locking::LockScenario;
use crate::phasematch::{calibrate_poling_period, gouy_correction, PolingSpec, SellmeierModel};
use crate::sde::{HomodyneSpec, Integrator};

/// Text of the bundled reference scenario.
pub const REFERENCE_SCENARIO: &str = include_str!("../scenarios/reference.scenario");

const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub cavity: CavitySection,
    pub basis: BasisSection,
    pub pump: PumpSection,
    pub detection: DetectionSection,
    pub phasematch: PhasematchSection,
    pub lock: LockSection,
    pub sweep: SweepSection,
    pub simulation: SimulationSection,
    /// Directory that relative paths inside the scenario are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub length_mm: f64,
    pub mirror_radius_mm: f64,
    pub crystal_length_mm: f64,
    pub crystal_index: f64,
    pub input_transmission: f64,
    pub output_transmission: f64,
    pub loss: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quoted_finesse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub m: u32,
    pub n: u32,
    #[serde(default)]
    pub offset_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub wavelength_nm: f64,
    /// Signal waist; the cavity eigenmode waist when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist_um: Option<f64>,
    /// Pump waist over signal waist.
    pub pump_waist_ratio: f64,
    pub modes: Vec<ModeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub power_mw: f64,
    pub threshold_mw: f64,
    #[serde(default)]
    pub phase_rad: f64,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub efficiency: f64,
    pub visibility: f64,
    pub lo_power_mw: f64,
    #[serde(default)]
    pub bright_power_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasematchSection {
    /// `builtin:ktp_z` or a path to a coefficient file.
    pub sellmeier: String,
    /// Temperature at which the poling period phase-matches the degenerate pair.
    pub nominal_temperature_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poling_period_um: Option<f64>,
    pub temperature_k: f64,
    pub seed_order: u32,
    pub emit_order: u32,
    #[serde(default)]
    pub transverse_path_difference_um: f64,
    pub tuning_start_k: f64,
    pub tuning_stop_k: f64,
    pub tuning_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockSection {
    pub pump_power_mw: f64,
    pub seed_power_mw: f64,
    #[serde(default)]
    pub offset_phase_rad: f64,
    pub doubling_efficiency_per_w: f64,
    /// Normalized gain of the seeded cavity used for the gain trace.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub frequencies_mhz: Vec<f64>,
    /// Pump powers as multiples of the threshold power.
    pub power_factors: Vec<f64>,
    pub phase_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Step as a fraction of the cavity decay time τ/γ.
    pub step_fraction: f64,
    pub steps: usize,
    pub trajectories: usize,
    pub decimation: usize,
    pub segment_length: usize,
    #[serde(default)]
    pub integrator: Integrator,
}

fn check(cond: bool, path: &str, message: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn fraction(v: f64, path: &str) -> Result<()> {
    check(v > 0.0 && v < 1.0, path, "must lie strictly between 0 and 1")
}

fn positive(v: f64, path: &str) -> Result<()> {
    check(v > 0.0 && v.is_finite(), path, "must be positive")
}

fn monotone(grid: &[f64], path: &str) -> Result<()> {
    check(!grid.is_empty(), path, "grid is empty")?;
    check(
        grid.iter().all(|v| v.is_finite()),
        path,
        "grid has non-finite entries",
    )?;
    check(
        grid.windows(2).all(|w| w[1] > w[0]),
        path,
        "grid must be strictly increasing",
    )
}

/// Re-labels a module error as a configuration error at `path`.
fn at(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::config(path, e.to_string())
}

impl Scenario {
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_SCENARIO).expect("bundled scenario is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let sc: Scenario =
            toml::from_str(text).map_err(|e| Error::config("scenario", e.message().to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut sc = Self::from_toml_str(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        // the coefficient file is only reachable once the base directory is known
        sc.sellmeier()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cavity;
        positive(c.length_mm, "cavity.length_mm")?;
        positive(c.mirror_radius_mm, "cavity.mirror_radius_mm")?;
        positive(c.crystal_length_mm, "cavity.crystal_length_mm")?;
        check(
            c.crystal_index >= 1.0,
            "cavity.crystal_index",
            "must be at least 1",
        )?;
        fraction(c.input_transmission, "cavity.input_transmission")?;
        fraction(c.output_transmission, "cavity.output_transmission")?;
        fraction(c.loss, "cavity.loss")?;
        self.cavity_geometry()?;
        let params = self.cavity_params()?;
        if let Some(f) = c.quoted_finesse {
            params.check_finesse(f).map_err(at("cavity.quoted_finesse"))?;
        }

        let b = &self.basis;
        positive(b.wavelength_nm, "basis.wavelength_nm")?;
        if let Some(w) = b.waist_um {
            positive(w, "basis.waist_um")?;
        }
        positive(b.pump_waist_ratio, "basis.pump_waist_ratio")?;
        check(!b.modes.is_empty(), "basis.modes", "basis is empty")?;
        self.basis().map_err(at("basis.modes"))?;

        let p = &self.pump;
        check(p.power_mw >= 0.0, "pump.power_mw", "must be non-negative")?;
        positive(p.threshold_mw, "pump.threshold_mw")?;
        positive(p.wavelength_nm, "pump.wavelength_nm")?;
        check(p.phase_rad.is_finite(), "pump.phase_rad", "must be finite")?;

        let d = &self.detection;
        check(
            d.efficiency > 0.0 && d.efficiency <= 1.0,
            "detection.efficiency",
            "must be in (0, 1]",
        )?;
        check(
            d.visibility > 0.0 && d.visibility <= 1.0,
            "detection.visibility",
            "must be in (0, 1]",
        )?;
        positive(d.lo_power_mw, "detection.lo_power_mw")?;
        check(
            d.bright_power_mw >= 0.0,
            "detection.bright_power_mw",
            "must be non-negative",
        )?;

        let ph = &self.phasematch;
        check(
            ph.sellmeier.starts_with(BUILTIN_PREFIX) || !ph.sellmeier.is_empty(),
            "phasematch.sellmeier",
            "must name a coefficient set",
        )?;
        positive(ph.nominal_temperature_k, "phasematch.nominal_temperature_k")?;
        positive(ph.temperature_k, "phasematch.temperature_k")?;
        if let Some(v) = ph.poling_period_um {
            positive(v, "phasematch.poling_period_um")?;
        }
        check(
            ph.transverse_path_difference_um.is_finite(),
            "phasematch.transverse_path_difference_um",
            "must be finite",
        )?;
        check(
            ph.tuning_points >= 1,
            "phasematch.tuning_points",
            "must be at least 1",
        )?;
        check(
            ph.tuning_points == 1 || ph.tuning_stop_k > ph.tuning_start_k,
            "phasematch.tuning_stop_k",
            "must exceed tuning_start_k",
        )?;

        let l = &self.lock;
        check(
            l.pump_power_mw >= 0.0,
            "lock.pump_power_mw",
            "must be non-negative",
        )?;
        check(
            l.seed_power_mw >= 0.0,
            "lock.seed_power_mw",
            "must be non-negative",
        )?;
        check(
            l.doubling_efficiency_per_w >= 0.0,
            "lock.doubling_efficiency_per_w",
            "must be non-negative",
        )?;
        check((0.0..1.0).contains(&l.sigma), "lock.sigma", "must be in [0, 1)")?;

        let s = &self.sweep;
        monotone(&s.frequencies_mhz, "sweep.frequencies_mhz")?;
        check(
            s.frequencies_mhz[0] >= 0.0,
            "sweep.frequencies_mhz",
            "frequencies must be non-negative",
        )?;
        monotone(&s.power_factors, "sweep.power_factors")?;
        check(
            s.power_factors[0] >= 0.0,
            "sweep.power_factors",
            "factors must be non-negative",
        )?;
        check(
            s.phase_points >= 2,
            "sweep.phase_points",
            "need at least two points",
        )?;

        let m = &self.simulation;
        check(
            m.step_fraction > 0.0 && m.step_fraction <= crate::sde::MAX_STEP_FRACTION,
            "simulation.step_fraction",
            "must be in (0, 0.1]",
        )?;
        check(m.steps > 0, "simulation.steps", "must be positive")?;
        check(m.trajectories > 0, "simulation.trajectories", "must be positive")?;
        check(m.decimation > 0, "simulation.decimation", "must be positive")?;
        check(
            m.segment_length >= 2 && m.segment_length.is_multiple_of(2),
            "simulation.segment_length",
            "must be even and at least 2",
        )?;
        check(
            m.steps / m.decimation >= 2 * m.segment_length,
            "simulation.steps",
            "too short for two PSD segments after decimation",
        )?;
        Ok(())
    }

    pub fn cavity_geometry(&self) -> Result<CavityGeometry> {
        let c = &self.cavity;
        CavityGeometry::new(c.length_mm * 1e-3, c.mirror_radius_mm * 1e-3)
            .and_then(|g| g.with_crystal(c.crystal_length_mm * 1e-3, c.crystal_index))
            .map_err(at("cavity"))
    }

    pub fn cavity_params(&self) -> Result<CavityParams> {
        let c = &self.cavity;
        CavityParams::linear(
            c.length_mm * 1e-3,
            c.input_transmission,
            c.output_transmission,
            c.loss,
        )
        .map_err(at("cavity"))
    }

    pub fn signal_geometry(&self) -> Result<BeamGeometry> {
        let lambda = self.basis.wavelength_nm * 1e-9;
        let waist = match self.basis.waist_um {
            Some(w) => w * 1e-6,
            None => self.cavity_geometry()?.eigenmode_waist(lambda),
        };
        BeamGeometry::new(lambda, waist, 0.0)
    }

    pub fn basis(&self) -> Result<ModeBasis> {
        let g = self.signal_geometry()?;
        let pump_geometry = BeamGeometry::new(
            self.pump.wavelength_nm * 1e-9,
            g.waist_radius * self.basis.pump_waist_ratio,
            0.0,
        )?;
        let modes = self
            .basis
            .modes
            .iter()
            .map(|e| HGMode::new(e.m, e.n, g).with_offset(e.offset_ghz * 1e9))
            .collect();
        ModeBasis::new(modes, HGMode::new(0, 0, pump_geometry))
    }

    pub fn supermodes(&self) -> Result<SupermodeSet> {
        diagonalize(&build_coupling_matrix(&self.basis()?)?)
    }

    pub fn pump_drive(&self) -> Result<PumpDrive> {
        Ok(
            PumpDrive::new(self.pump.power_mw * 1e-3, self.pump.threshold_mw * 1e-3)?
                .with_phase(self.pump.phase_rad)
                .with_wavelength(self.pump.wavelength_nm * 1e-9),
        )
    }

    /// Efficiency applied on top of cavity escape in analytic spectra: detection × visibility².
    pub fn analytic_detection(&self) -> f64 {
        self.detection.efficiency * self.detection.visibility.powi(2)
    }

    pub fn homodyne(&self, lo_mode: Vec<f64>, lo_phase: f64) -> HomodyneSpec {
        HomodyneSpec {
            lo_mode,
            lo_phase,
            lo_power: self.detection.lo_power_mw * 1e-3,
            bright_power: self.detection.bright_power_mw * 1e-3,
            detection_efficiency: self.detection.efficiency,
            visibility: self.detection.visibility,
        }
    }

    pub fn sellmeier(&self) -> Result<SellmeierModel> {
        let name = &self.phasematch.sellmeier;
        match name.strip_prefix(BUILTIN_PREFIX) {
            Some("ktp_z") => Ok(SellmeierModel::ktp_z()),
            Some(other) => Err(Error::config(
                "phasematch.sellmeier",
                format!("unknown built-in coefficient set `{other}`"),
            )),
            None => SellmeierModel::from_file(&self.base_dir.join(name)).map_err(at("phasematch.sellmeier")),
        }
    }

    /// Poling spec at the operating temperature; the period is calibrated at the nominal
    /// temperature unless given explicitly.
    pub fn poling(&self, model: &SellmeierModel) -> Result<PolingSpec> {
        let ph = &self.phasematch;
        let pump = self.pump.wavelength_nm * 1e-9;
        let period = match ph.poling_period_um {
            Some(p) => p * 1e-6,
            None => calibrate_poling_period(model, pump, ph.nominal_temperature_k)
                .map_err(at("phasematch.nominal_temperature_k"))?,
        };
        Ok(PolingSpec {
            poling_period: period,
            crystal_length: self.cavity.crystal_length_mm * 1e-3,
            temperature: ph.temperature_k,
            pump_wavelength: pump,
        })
    }

    pub fn gouy_correction(&self) -> Result<f64> {
        let ph = &self.phasematch;
        Ok(gouy_correction(
            &self.cavity_geometry()?,
            self.cavity.crystal_length_mm * 1e-3,
            ph.seed_order,
            ph.emit_order,
        ))
    }

    pub fn tuning_temperatures(&self) -> Vec<f64> {
        let ph = &self.phasematch;
        if ph.tuning_points == 1 {
            return vec![ph.tuning_start_k];
        }
        let step = (ph.tuning_stop_k - ph.tuning_start_k) / (ph.tuning_points - 1) as f64;
        (0..ph.tuning_points)
            .map(|i| ph.tuning_start_k + step * i as f64)
            .collect()
    }

    pub fn lock_scenario(&self) -> LockScenario {
        let l = &self.lock;
        LockScenario {
            pump_power: l.pump_power_mw * 1e-3,
            seed_power: l.seed_power_mw * 1e-3,
            offset_phase: l.offset_phase_rad,
            doubling_efficiency: l.doubling_efficiency_per_w,
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.sweep.frequencies_mhz.iter().map(|f| f * 1e6).collect()
    }

    /// Phase grid over [0, π).
    pub fn phases(&self) -> Vec<f64> {
        let n = self.sweep.phase_points;
        (0..n).map(|i| PI * i as f64 / n as f64).collect()
    }

    pub fn time_step(&self) -> Result<f64> {
        let p = self.cavity_params()?;
        Ok(self.simulation.step_fraction / p.decay_rate())
    }
}
