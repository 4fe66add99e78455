//! Gauss-Hermite quadrature for integrals of the form ∫ f(t) e^{-t²} dt over ℝ.
//!
//! Nodes come from the orthonormal Hermite recurrence, which stays well conditioned
//! to several hundred points.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

const BISECTION_STEPS: usize = 200;
/// π^{-1/4}
const PI_M4: f64 = 0.751_125_544_464_942_5;

#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Roots are bracketed by sign changes on a grid finer than the smallest root spacing
    /// (about π/√(2n) near the origin) and then bisected to machine precision.
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "quadrature order must be positive");
        let n = order;
        let nf = n as f64;
        let bound = (2.0 * nf + 1.0).sqrt() + 1.0;
        let step = 0.05 * std::f64::consts::PI / (2.0 * nf).sqrt();
        let mut positive = Vec::with_capacity(n / 2);
        let mut lo = if n % 2 == 1 { 0.5 * step } else { 0.0 };
        let mut f_lo = orthonormal_hermite_pair(n, lo).0;
        while positive.len() < n / 2 && lo < bound {
            let hi = lo + step;
            let f_hi = orthonormal_hermite_pair(n, hi).0;
            if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
                positive.push(bisect(n, lo, hi, f_lo));
            }
            lo = hi;
            f_lo = f_hi;
        }
        assert_eq!(positive.len(), n / 2, "lost Hermite roots at order {n}");
        let weight = |z: f64| {
            let pp = (2.0 * nf).sqrt() * orthonormal_hermite_pair(n, z).1;
            2.0 / (pp * pp)
        };
        let mut nodes: Vec<f64> = positive.iter().rev().map(|z| -z).collect();
        if n % 2 == 1 {
            nodes.push(0.0);
        }
        nodes.extend(positive.iter().copied());
        let weights = nodes.iter().map(|&z| weight(z.abs())).collect();
        Self { nodes, weights }
    }

    /// Shared rule of the given order, built once per process.
    pub fn cached(order: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.lock().unwrap().get(&order) {
            return rule.clone();
        }
        let rule = Arc::new(GaussHermite::new(order));
        cache.lock().unwrap().entry(order).or_insert(rule).clone()
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Σ wᵢ f(tᵢ), together with Σ wᵢ |f(tᵢ)| as a magnitude scale.
    pub fn integrate_with_scale<F: Fn(f64) -> f64>(&self, f: F) -> (f64, f64) {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for (&t, &wt) in self.nodes.iter().zip(&self.weights) {
            let v = wt * f(t);
            sum += v;
            scale += v.abs();
        }
        (sum, scale)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate_with_scale(f).0
    }
}

fn bisect(n: usize, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    if f_lo == 0.0 {
        return lo;
    }
    let s_lo = f_lo.signum();
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if orthonormal_hermite_pair(n, mid).0.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Returns (p_n(z), p_{n-1}(z)) for the orthonormal Hermite functions without the Gaussian factor.
fn orthonormal_hermite_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Automatic-order Gauss-Hermite integration: starts at `start` points and doubles until
/// successive results agree to `rel_tol` (relative to the integrand magnitude).
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveHermite {
    pub start: usize,
    pub max_order: usize,
    pub rel_tol: f64,
}

impl Default for AdaptiveHermite {
    fn default() -> Self {
        Self {
            start: 32,
            max_order: 512,
            rel_tol: 1e-9,
        }
    }
}

impl AdaptiveHermite {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut order = self.start;
        let (mut prev, _) = GaussHermite::cached(order).integrate_with_scale(&f);
        let mut change = f64::INFINITY;
        while order < self.max_order {
            order *= 2;
            let (cur, scale) = GaussHermite::cached(order).integrate_with_scale(&f);
            let denom = cur.abs().max(scale).max(f64::MIN_POSITIVE);
            change = (cur - prev).abs() / denom;
            if change <= self.rel_tol {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::QuadratureNotConverged {
            max_order: self.max_order,
            change,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 32, 64, 128, 256, 512] {
            let gh = GaussHermite::new(n);
            let s: f64 = gh.weights.iter().sum();
            assert!((s - PI.sqrt()).abs() < 1e-12, "n={n} sum={s}");
        }
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let gh = GaussHermite::new(33);
        for i in 0..33 {
            assert_eq!(gh.nodes[i], -gh.nodes[32 - i]);
        }
        assert!(gh.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn even_moments_exact() {
        // ∫ t^{2k} e^{-t²} dt = Γ(k + 1/2)
        let gh = GaussHermite::new(32);
        let mut gamma = PI.sqrt(); // Γ(1/2)
        for k in 0..20 {
            let q = gh.integrate(|t| t.powi(2 * k));
            assert!((q - gamma).abs() <= 1e-12 * gamma, "k={k}: {q} vs {gamma}");
            gamma *= k as f64 + 0.5;
        }
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let a = AdaptiveHermite {
            start: 2,
            max_order: 8,
            rel_tol: 1e-9,
        };
        assert!(matches!(
            a.integrate(|t| (10.0 * t).cos()),
            Err(Error::QuadratureNotConverged { .. })
        ));
        // ∫ cos(t) e^{-t²} = √π e^{-1/4}
        let v = AdaptiveHermite::default().integrate(|t| t.cos()).unwrap();
        assert!((v - PI.sqrt() * (-0.25f64).exp()).abs() < 1e-12);
    }
}
