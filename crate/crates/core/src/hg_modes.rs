//! Hermite-Gauss transverse modes at the waist plane, cavity Gouy phases and
//! three-mode overlap integrals.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::AdaptiveHermite;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// 1/e² intensity radius at the waist (m).
    pub waist_radius: f64,
    /// Axial waist location (m).
    pub waist_position: f64,
}

impl BeamGeometry {
    pub fn new(wavelength: f64, waist_radius: f64, waist_position: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        if !(waist_radius > 0.0 && waist_radius.is_finite()) {
            return Err(Error::invalid("waist_radius", "must be positive"));
        }
        Ok(Self {
            wavelength,
            waist_radius,
            waist_position,
        })
    }

    pub fn with_waist(self, waist_radius: f64) -> Result<Self> {
        Self::new(self.wavelength, waist_radius, self.waist_position)
    }
}

/// A TEM_mn mode. `frequency_offset` is measured from half the pump frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HGMode {
    pub m: u32,
    pub n: u32,
    pub geometry: BeamGeometry,
    pub frequency_offset: f64,
}

impl HGMode {
    pub fn new(m: u32, n: u32, geometry: BeamGeometry) -> Self {
        Self {
            m,
            n,
            geometry,
            frequency_offset: 0.0,
        }
    }

    pub fn with_offset(mut self, frequency_offset: f64) -> Self {
        self.frequency_offset = frequency_offset;
        self
    }

    pub fn order(&self) -> u32 {
        self.m + self.n
    }

    /// Same transverse indices and frequency offset.
    pub fn same_label(&self, other: &HGMode) -> bool {
        self.m == other.m && self.n == other.n && self.frequency_offset == other.frequency_offset
    }

    fn canonical_cmp(&self, other: &HGMode) -> Ordering {
        (self.m, self.n)
            .cmp(&(other.m, other.n))
            .then(self.geometry.waist_radius.total_cmp(&other.geometry.waist_radius))
            .then(self.geometry.wavelength.total_cmp(&other.geometry.wavelength))
            .then(self.frequency_offset.total_cmp(&other.frequency_offset))
    }
}

impl fmt::Display for HGMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TEM{}{}", self.m, self.n)?;
        if self.frequency_offset != 0.0 {
            write!(f, "{:+}GHz", self.frequency_offset * 1e-9)?;
        }
        Ok(())
    }
}

/// Orthonormal Hermite function without the Gaussian factor: H_m(z) / √(2^m m! √π).
pub fn hermite_orthonormal(m: u32, z: f64) -> f64 {
    let mut cur = PI.powf(-0.25);
    let mut prev = 0.0;
    for k in 0..m {
        let kf = k as f64;
        let next = z * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One-dimensional L²-normalized Hermite-Gauss function at the waist.
pub fn hg_1d(order: u32, x: f64, waist: f64) -> f64 {
    let z = std::f64::consts::SQRT_2 * x / waist;
    2f64.powf(0.25) / waist.sqrt() * hermite_orthonormal(order, z) * (-(x * x) / (waist * waist)).exp()
}

/// Waist-plane mode function u_mn(x, y) in 1/m.
pub fn evaluate_mode(mode: &HGMode, x: f64, y: f64) -> Complex64 {
    let w = mode.geometry.waist_radius;
    Complex64::new(hg_1d(mode.m, x, w) * hg_1d(mode.n, y, w), 0.0)
}

/// ∫∫ |u_mn|² dx dy by quadrature; 1 up to rounding.
pub fn norm_squared(mode: &HGMode) -> Result<f64> {
    let w = mode.geometry.waist_radius;
    let quad = AdaptiveHermite::default();
    let axis = |order: u32| -> Result<f64> {
        // x = t w / √2 maps |u|² onto the Hermite weight
        let jac = w / std::f64::consts::SQRT_2;
        quad.integrate(|t| {
            let x = t * jac;
            let v = hg_1d(order, x, w);
            v * v * (t * t).exp() * jac
        })
    };
    Ok(axis(mode.m)? * axis(mode.n)?)
}

fn overlap_axis(orders: [u32; 3], waists: [f64; 3]) -> Result<f64> {
    // all three beams are centred, so an odd total order gives an odd integrand
    if orders.iter().sum::<u32>() % 2 == 1 {
        return Ok(0.0);
    }
    let a: f64 = waists.iter().map(|w| 1.0 / (w * w)).sum();
    let sa = a.sqrt();
    let prefactor: f64 = waists.iter().map(|w| 2f64.powf(0.25) / w.sqrt()).product::<f64>() / sa;
    let quad = AdaptiveHermite::default();
    let integral = quad.integrate(|t| {
        let mut p = 1.0;
        for k in 0..3 {
            p *= hermite_orthonormal(orders[k], std::f64::consts::SQRT_2 * t / (sa * waists[k]));
        }
        p
    })?;
    Ok(prefactor * integral)
}

/// ∫∫ u_p u_s u_i dx dy at the common waist plane (1/m).
///
/// Signal and idler are put into a canonical order first, so the result is exactly
/// symmetric under their exchange.
pub fn overlap3(pump: &HGMode, signal: &HGMode, idler: &HGMode) -> Result<f64> {
    let z0 = pump.geometry.waist_position;
    let tol = 1e-12 * pump.geometry.waist_radius;
    if (signal.geometry.waist_position - z0).abs() > tol || (idler.geometry.waist_position - z0).abs() > tol {
        return Err(Error::WaistPlaneMismatch);
    }
    let (s, i) = if signal.canonical_cmp(idler) == Ordering::Greater {
        (idler, signal)
    } else {
        (signal, idler)
    };
    let waists = [
        pump.geometry.waist_radius,
        s.geometry.waist_radius,
        i.geometry.waist_radius,
    ];
    let ix = overlap_axis([pump.m, s.m, i.m], waists)?;
    let iy = overlap_axis([pump.n, s.n, i.n], waists)?;
    Ok(ix * iy)
}

/// Crystal slab inside the cavity; shortens the effective diffraction length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalInsert {
    pub length: f64,
    pub refractive_index: f64,
}

/// Linear plano-concave cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub length: f64,
    pub mirror_radius_of_curvature: f64,
    pub crystal: Option<CrystalInsert>,
}

impl CavityGeometry {
    pub fn new(length: f64, mirror_radius_of_curvature: f64) -> Result<Self> {
        let c = Self {
            length,
            mirror_radius_of_curvature,
            crystal: None,
        };
        c.check_stable()?;
        Ok(c)
    }

    pub fn with_crystal(mut self, length: f64, refractive_index: f64) -> Result<Self> {
        if !(length > 0.0 && length < self.length) {
            return Err(Error::invalid("crystal.length", "must lie inside the cavity"));
        }
        if refractive_index < 1.0 {
            return Err(Error::invalid("crystal.refractive_index", "must be at least 1"));
        }
        self.crystal = Some(CrystalInsert {
            length,
            refractive_index,
        });
        self.check_stable()?;
        Ok(self)
    }

    fn check_stable(&self) -> Result<()> {
        let l = self.effective_length();
        if !(l > 0.0 && l < self.mirror_radius_of_curvature) {
            return Err(Error::CavityUnstable {
                length: self.length,
                radius: self.mirror_radius_of_curvature,
            });
        }
        Ok(())
    }

    /// Geometric round trip, 2 × length.
    pub fn round_trip_path(&self) -> f64 {
        2.0 * self.length
    }

    pub fn free_spectral_range(&self) -> f64 {
        SPEED_OF_LIGHT / self.round_trip_path()
    }

    /// Diffraction length: the crystal of index n counts as length l/n.
    pub fn effective_length(&self) -> f64 {
        match self.crystal {
            Some(c) => self.length - c.length + c.length / c.refractive_index,
            None => self.length,
        }
    }

    /// One-way Gouy phase Δζ = arccos √(1 − L_eff/R) (rad).
    pub fn gouy_phase(&self) -> f64 {
        (1.0 - self.effective_length() / self.mirror_radius_of_curvature)
            .sqrt()
            .acos()
    }

    /// Waist radius of the TEM00 eigenmode on the plane mirror.
    pub fn eigenmode_waist(&self, wavelength: f64) -> f64 {
        let l = self.effective_length();
        let r = self.mirror_radius_of_curvature;
        ((wavelength / PI) * (l * (r - l)).sqrt()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub q: u64,
    pub transverse_order: u32,
    pub frequency: f64,
}

/// ν(q, N) = FSR · (q + (N + 1) Δζ / π).
pub fn resonance_frequency(cavity: &CavityGeometry, q: u64, transverse_order: u32) -> f64 {
    cavity.free_spectral_range() * (q as f64 + (transverse_order as f64 + 1.0) * cavity.gouy_phase() / PI)
}

/// Resonances of longitudinal index `q` for transverse orders 0..=max_order.
pub fn gouy_resonance_frequencies(cavity: &CavityGeometry, q: u64, max_order: u32) -> Result<Vec<Resonance>> {
    cavity.check_stable()?;
    Ok((0..=max_order)
        .map(|order| Resonance {
            q,
            transverse_order: order,
            frequency: resonance_frequency(cavity, q, order),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(w: f64) -> BeamGeometry {
        BeamGeometry::new(1064e-9, w, 0.0).unwrap()
    }

    #[test]
    fn fundamental_peak() {
        let w = 60e-6;
        let u = evaluate_mode(&HGMode::new(0, 0, geom(w)), 0.0, 0.0);
        assert!((u.re - (2.0 / PI).sqrt() / w).abs() < 1e-9 * u.re);
        assert_eq!(u.im, 0.0);
    }

    #[test]
    fn tem10_node_on_y_axis() {
        let m = HGMode::new(1, 0, geom(50e-6));
        for y in [-1e-4, 0.0, 3e-5] {
            assert_eq!(evaluate_mode(&m, 0.0, y).re, 0.0);
        }
    }

    #[test]
    fn normalization_up_to_order_six() {
        for m in 0..=6 {
            for n in 0..=6 {
                let v = norm_squared(&HGMode::new(m, n, geom(40e-6))).unwrap();
                assert!((v - 1.0).abs() < 1e-10, "TEM{m}{n}: {v}");
            }
        }
    }

    #[test]
    fn odd_parity_overlaps_vanish() {
        let w = 50e-6;
        let p = HGMode::new(0, 0, geom(w / 2f64.sqrt()));
        let s00 = HGMode::new(0, 0, geom(w));
        let reference = overlap3(&p, &s00, &s00).unwrap();
        let s10 = HGMode::new(1, 0, geom(w));
        let s01 = HGMode::new(0, 1, geom(w));
        assert!(overlap3(&p, &s10, &s01).unwrap().abs() < 1e-12 * reference);
        assert!(overlap3(&p, &s00, &s10).unwrap().abs() < 1e-12 * reference);
    }

    #[test]
    fn waist_plane_mismatch_rejected() {
        let a = HGMode::new(0, 0, geom(50e-6));
        let b = HGMode::new(0, 0, BeamGeometry::new(1064e-9, 50e-6, 1e-3).unwrap());
        assert_eq!(overlap3(&a, &a, &b), Err(Error::WaistPlaneMismatch));
    }

    #[test]
    fn free_spectral_range_47mm() {
        let c = CavityGeometry::new(0.047, 0.050).unwrap();
        let fsr = c.free_spectral_range();
        assert!((fsr - SPEED_OF_LIGHT / 0.094).abs() < 1e-3);
        assert!((fsr - 3.19e9).abs() < 0.01e9);
    }

    #[test]
    fn transverse_degeneracy_and_gouy_split() {
        let c = CavityGeometry::new(0.047, 0.050).unwrap();
        let res = gouy_resonance_frequencies(&c, 100_000, 2).unwrap();
        let split = res[1].frequency - res[0].frequency;
        assert!(split > 0.0);
        assert!((split - c.free_spectral_range() * c.gouy_phase() / PI).abs() < 1.0);
        // TEM10 and TEM01 share N = 1 and hence the same frequency
        assert_eq!(
            resonance_frequency(&c, 7, HGMode::new(1, 0, geom(1e-4)).order()),
            resonance_frequency(&c, 7, HGMode::new(0, 1, geom(1e-4)).order())
        );
    }

    #[test]
    fn unstable_cavity_rejected() {
        assert!(matches!(
            CavityGeometry::new(0.06, 0.05),
            Err(Error::CavityUnstable { .. })
        ));
        assert!(CavityGeometry::new(0.047, 0.05).is_ok());
    }

    #[test]
    fn crystal_shortens_effective_length() {
        let c = CavityGeometry::new(0.047, 0.050)
            .unwrap()
            .with_crystal(0.010, 1.83)
            .unwrap();
        assert!((c.effective_length() - (0.037 + 0.010 / 1.83)).abs() < 1e-15);
        assert!(c.gouy_phase() < CavityGeometry::new(0.047, 0.05).unwrap().gouy_phase());
    }
}
