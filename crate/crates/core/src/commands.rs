//! Subcommand bodies. Each writes CSV or plain-text files into the output directory and
//! returns their paths; nothing is printed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::coupling::threshold_powers;
use crate::dynamics::{
    derive_cavity_figures, lorentzian_variances, quadrature_spectrum, steady_state, threshold_scan, to_db,
    Regime,
};
use crate::error::{Error, Result};
use crate::locking::{lock_point, sweep, sweep_csv, LockTarget};
use crate::phasematch::{
    degeneracy_temperature, energy_mismatch, qpm_mismatch, solve_signal_idler, transverse_splitting,
    tuning_curve, tuning_curve_csv,
};
use crate::scenario::Scenario;
use crate::sde::{
    homodyne_record, shot_noise_correction, simulate, simulated_spectrum, MeasurementPlan, SimulationConfig,
};

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Converts a 1-based supermode number from the command line.
pub fn supermode_index(k: usize, len: usize) -> Result<usize> {
    if k == 0 || k > len {
        return Err(Error::SupermodeOutOfRange { index: k, len });
    }
    Ok(k - 1)
}

pub fn cmd_supermodes(sc: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let basis = sc.basis()?;
    let s = sc.supermodes()?;
    let thresholds = threshold_powers(&s, sc.pump.threshold_mw * 1e-3)?;
    let mut csv = String::from("supermode,eigenvalue,relative_threshold,threshold_mw");
    for m in basis.modes() {
        write!(csv, ",{m}").unwrap();
    }
    csv.push('\n');
    let lead = s.leading();
    for k in 0..s.len() {
        let lam = s.eigenvalues[k];
        let rel = if lam == 0.0 {
            f64::INFINITY
        } else {
            (lead / lam).powi(2)
        };
        write!(csv, "{},{},{},{}", k + 1, lam, rel, thresholds[k] * 1e3).unwrap();
        for c in &s.eigenvectors[k] {
            write!(csv, ",{c}").unwrap();
        }
        csv.push('\n');
    }
    Ok(vec![write(out, "supermodes.csv", &csv)?])
}

pub fn cmd_spectrum(sc: &Scenario, k: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let s = sc.supermodes()?;
    let idx = supermode_index(k, s.len())?;
    let params = sc.cavity_params()?;
    let op = steady_state(&sc.pump_drive()?, &s, &params)?;
    let spec = quadrature_spectrum(idx, &s, &op, &params, sc.analytic_detection(), &sc.frequencies())?;
    Ok(vec![write(out, &format!("spectrum_k{k}.csv"), &spec.to_csv())?])
}

pub fn cmd_threshold_scan(sc: &Scenario, k: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let s = sc.supermodes()?;
    let idx = supermode_index(k, s.len())?;
    let params = sc.cavity_params()?;
    let pump = sc.pump_drive()?;
    let powers: Vec<f64> = sc
        .sweep
        .power_factors
        .iter()
        .map(|f| f * pump.threshold_power_ref)
        .collect();
    let rows = threshold_scan(idx, &powers, &pump, &s, &params, sc.analytic_detection())?;
    let mut csv = String::from("power_mw,pump_mean_abs,regime,v_min,v_min_db\n");
    for r in &rows {
        let regime = match r.regime {
            Regime::Below => "below",
            Regime::At => "at",
            Regime::Above => "above",
        };
        writeln!(
            csv,
            "{},{},{},{},{}",
            r.power * 1e3,
            r.pump_mean,
            regime,
            r.v_min,
            to_db(r.v_min)
        )
        .unwrap();
    }
    Ok(vec![write(out, &format!("threshold_scan_k{k}.csv"), &csv)?])
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryOptions {
    pub ensemble: Option<usize>,
    pub duration: Option<f64>,
    pub raw: bool,
}

/// Simulated homodyne PSD of supermode k with the LO on its squeezed quadrature, corrected for
/// the bright-beam shot noise, next to the analytic spectrum at the matching efficiency.
pub fn cmd_trajectory(sc: &Scenario, k: usize, opts: TrajectoryOptions, out: &Path) -> Result<Vec<PathBuf>> {
    let s = sc.supermodes()?;
    let idx = supermode_index(k, s.len())?;
    let params = sc.cavity_params()?;
    let op = steady_state(&sc.pump_drive()?, &s, &params)?;
    let analytic = quadrature_spectrum(idx, &s, &op, &params, sc.detection.efficiency, &[0.0])?;
    let dt = sc.time_step()?;
    let steps = match opts.duration {
        Some(d) if d > 0.0 => (d / dt).round() as usize,
        Some(_) => return Err(Error::config("duration", "must be positive")),
        None => sc.simulation.steps,
    };
    let config = SimulationConfig {
        supermodes: vec![idx],
        dt,
        steps,
        seed: sc.seed,
        integrator: sc.simulation.integrator,
    };
    let homodyne = sc.homodyne(vec![1.0], analytic.squeezed_quadrature_angle);
    let plan = MeasurementPlan {
        homodyne: homodyne.clone(),
        trajectories: opts.ensemble.unwrap_or(sc.simulation.trajectories),
        decimation: sc.simulation.decimation,
        segment_length: sc.simulation.segment_length,
    };
    let raw_psd = simulated_spectrum(&config, &plan, &s, &op, &params)?;
    let correction = shot_noise_correction(homodyne.lo_power, homodyne.bright_power)?;
    let psd = raw_psd.normalized_by(correction);
    let eta = analytic.efficiency * homodyne.visibility.powi(2) / correction;
    let scale = params.round_trip_time / params.gamma();
    let mut csv = String::from("frequency_hz,psd,std_error,psd_uncorrected,analytic_v_min\n");
    for (i, f) in psd.frequencies.iter().enumerate() {
        let (v, _) = lorentzian_variances(analytic.sigma, eta, 2.0 * std::f64::consts::PI * f * scale);
        writeln!(
            csv,
            "{},{},{},{},{}",
            f,
            psd.psd[i],
            psd.psd[i] * psd.confidence[i],
            raw_psd.psd[i],
            v
        )
        .unwrap();
    }
    let mut files = vec![write(out, &format!("psd_k{k}.csv"), &csv)?];
    if opts.raw {
        let traj = simulate(&config, 0, &s, &op, &params)?;
        let rec = homodyne_record(&traj, &homodyne)?.decimate(sc.simulation.decimation)?;
        let mut raw = String::from("time_s,photocurrent\n");
        for (n, x) in rec.samples.iter().enumerate() {
            writeln!(raw, "{},{}", (n + 1) as f64 * rec.sample_interval, x).unwrap();
        }
        files.push(write(out, &format!("record_k{k}.csv"), &raw)?);
        files.push(write(
            out,
            &format!("trajectory_k{k}.csv"),
            &traj.to_csv(sc.simulation.decimation),
        )?);
    }
    Ok(files)
}

pub fn cmd_wavelengths(sc: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let model = sc.sellmeier()?;
    let poling = sc.poling(&model)?;
    let g = sc.gouy_correction()?;
    let (ls, li) = solve_signal_idler(&model, &poling, g)?;
    let residual = qpm_mismatch(&model, &poling, ls, li, g)?;
    let t_deg = degeneracy_temperature(&model, &poling, 0.0)?;
    let t_comp = degeneracy_temperature(&model, &poling, g)?;
    let cavity = sc.cavity_geometry()?;
    let figures = derive_cavity_figures(&sc.cavity_params()?);
    let signal_frequency = crate::hg_modes::SPEED_OF_LIGHT / (2.0 * poling.pump_wavelength);
    let splitting = transverse_splitting(
        &cavity,
        signal_frequency,
        sc.phasematch.transverse_path_difference_um * 1e-6,
    );
    let mut report = String::new();
    writeln!(report, "sellmeier = {}", model.name).unwrap();
    writeln!(report, "poling_period_um = {}", poling.poling_period * 1e6).unwrap();
    writeln!(report, "temperature_k = {}", poling.temperature).unwrap();
    writeln!(report, "gouy_phase_rad = {}", cavity.gouy_phase()).unwrap();
    writeln!(report, "gouy_correction_rad_per_m = {g}").unwrap();
    writeln!(report, "signal_nm = {}", ls * 1e9).unwrap();
    writeln!(report, "idler_nm = {}", li * 1e9).unwrap();
    writeln!(report, "residual_rad_per_m = {residual}").unwrap();
    writeln!(
        report,
        "energy_mismatch = {}",
        energy_mismatch(poling.pump_wavelength, ls, li)
    )
    .unwrap();
    writeln!(report, "degeneracy_temperature_k = {t_deg}").unwrap();
    writeln!(report, "compensated_degeneracy_temperature_k = {t_comp}").unwrap();
    writeln!(report, "transverse_splitting_hz = {splitting}").unwrap();
    writeln!(report, "cavity_linewidth_hz = {}", figures.bandwidth_fwhm).unwrap();
    let curve = tuning_curve(&model, &poling, g, &sc.tuning_temperatures())?;
    Ok(vec![
        write(out, "wavelengths.txt", &report)?,
        write(out, "tuning_curve.csv", &tuning_curve_csv(&curve))?,
    ])
}

pub fn cmd_error_signal(sc: &Scenario, out: &Path) -> Result<Vec<PathBuf>> {
    let lock = sc.lock_scenario();
    let rows = sweep(&lock, sc.lock.sigma, &sc.phases())?;
    let mut report = String::new();
    for (name, target) in [
        ("amplification", LockTarget::Amplification),
        ("deamplification", LockTarget::Deamplification),
    ] {
        let p = lock_point(&lock, target);
        writeln!(report, "{name}_phase_rad = {}", p.phase).unwrap();
        writeln!(report, "{name}_error_slope = {}", p.error_slope).unwrap();
    }
    Ok(vec![
        write(out, "error_signal.csv", &sweep_csv(&rows))?,
        write(out, "lock_points.txt", &report)?,
    ])
}
