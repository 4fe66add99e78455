//! Overlaps and supermodes checked against routes that share no code with the library:
//! Hermite polynomials expanded into monomials with Gaussian moments, and nalgebra's
//! symmetric eigensolver.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use multimode_opo::coupling::{build_coupling_matrix, diagonalize, CouplingMatrix, ModeBasis};
use multimode_opo::hg_modes::{norm_squared, overlap3, BeamGeometry, HGMode};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Coefficients of the physicists' Hermite polynomial H_m, lowest power first.
fn hermite_coefficients(m: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if m == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..m {
        let mut next = vec![0.0; k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// ∫ Π u_{m_i}(x; w_i) dx with u_m = (2/π)^{1/4} / √(2^m m! w) H_m(√2 x / w) e^{−x²/w²}.
fn axis_overlap_closed_form(orders: [usize; 3], waists: [f64; 3]) -> f64 {
    let mut poly = vec![1.0];
    let mut norm = 1.0;
    for (m, w) in orders.iter().zip(waists) {
        let beta = 2f64.sqrt() / w;
        let h: Vec<f64> = hermite_coefficients(*m)
            .iter()
            .enumerate()
            .map(|(j, c)| c * beta.powi(j as i32))
            .collect();
        let mut prod = vec![0.0; poly.len() + h.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in h.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        poly = prod;
        norm *= (2.0 / PI).powf(0.25) / (2f64.powi(*m as i32) * factorial(*m) * w).sqrt();
    }
    let a: f64 = waists.iter().map(|w| 1.0 / (w * w)).sum();
    // ∫ x^{2p} e^{−a x²} dx = (2p − 1)!! / (2a)^p · √(π/a)
    let mut total = 0.0;
    for (k, c) in poly.iter().enumerate() {
        if k % 2 == 1 {
            continue;
        }
        let p = k / 2;
        let double_fact: f64 = (1..=p).map(|i| (2 * i - 1) as f64).product();
        total += c * double_fact / (2.0 * a).powi(p as i32) * (PI / a).sqrt();
    }
    norm * total
}

fn mode(m: u32, n: u32, w: f64) -> HGMode {
    HGMode::new(m, n, BeamGeometry::new(1064e-9, w, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_matches_monomial_expansion(
        orders in prop::array::uniform6(0u32..5),
        ws in (20e-6f64..80e-6, 0.5f64..1.5, 0.5f64..1.5),
    ) {
        let (w, rs, ri) = ws;
        let wp = w / 2f64.sqrt();
        let pump = mode(orders[0], orders[1], wp);
        let s = mode(orders[2], orders[3], w * rs);
        let i = mode(orders[4], orders[5], w * ri);
        let got = overlap3(&pump, &s, &i).unwrap();
        let waists = [wp, w * rs, w * ri];
        let ox = axis_overlap_closed_form([orders[0] as usize, orders[2] as usize, orders[4] as usize], waists);
        let oy = axis_overlap_closed_form([orders[1] as usize, orders[3] as usize, orders[5] as usize], waists);
        let expected = ox * oy;
        let scale = axis_overlap_closed_form([0, 0, 0], waists).powi(2);
        prop_assert!((got - expected).abs() <= 1e-9 * scale, "{} vs {}", got, expected);
    }

    #[test]
    fn overlap_is_symmetric_in_signal_and_idler(
        orders in prop::array::uniform6(0u32..4),
        rs in 0.6f64..1.4,
    ) {
        let w = 40e-6;
        let pump = mode(orders[0], orders[1], 0.8 * w);
        let s = mode(orders[2], orders[3], w * rs);
        let i = mode(orders[4], orders[5], w);
        prop_assert_eq!(overlap3(&pump, &s, &i).unwrap(), overlap3(&pump, &i, &s).unwrap());
    }

    #[test]
    fn modes_are_normalized(m in 0u32..12, n in 0u32..12, w in 5e-6f64..500e-6) {
        let v = norm_squared(&mode(m, n, w)).unwrap();
        prop_assert!((v - 1.0).abs() < 1e-10);
    }
}

#[test]
fn tem10_pair_ratio_follows_waist_formula() {
    let w = 35e-6;
    for ratio in [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.9428090415820634, 1.0, 1.3] {
        let wp = ratio * w;
        let p = mode(0, 0, wp);
        let r = overlap3(&p, &mode(1, 0, w), &mode(1, 0, w)).unwrap()
            / overlap3(&p, &mode(0, 0, w), &mode(0, 0, w)).unwrap();
        let expected = 2.0 / (2.0 + 1.0 / (ratio * ratio));
        assert!((r - expected).abs() < 1e-12, "{ratio}: {r} vs {expected}");
    }
}

fn random_symmetric(n: usize, entries: &[f64]) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            rows[i][j] = entries[k];
            rows[j][i] = entries[k];
            k += 1;
        }
    }
    rows
}

fn symmetric_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..7).prop_flat_map(|n| {
        prop::collection::vec(-1.0f64..1.0, n * (n + 1) / 2).prop_map(move |e| random_symmetric(n, &e))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigenvalues_match_nalgebra(rows in symmetric_strategy()) {
        let n = rows.len();
        let g = CouplingMatrix::from_rows(&rows).unwrap();
        let s = diagonalize(&g).unwrap();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let eig = m.symmetric_eigen();
        let mut ours = s.eigenvalues.clone();
        let mut theirs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
        }
        // ordering by descending modulus
        for w in s.eigenvalues.windows(2) {
            prop_assert!(w[0].abs() >= w[1].abs() - 1e-9);
        }
        // isolated eigenvalues have the same eigenvector up to sign
        for (k, lam) in s.eigenvalues.iter().enumerate() {
            let gap = theirs.iter().filter(|t| (*t - lam).abs() > 1e-12).map(|t| (t - lam).abs()).fold(f64::INFINITY, f64::min);
            let mult = theirs.iter().filter(|t| (*t - lam).abs() <= 1e-12).count();
            if mult != 1 || gap < 1e-3 {
                continue;
            }
            let j = (0..n).min_by(|&a, &b| (eig.eigenvalues[a] - lam).abs().total_cmp(&(eig.eigenvalues[b] - lam).abs())).unwrap();
            let dot: f64 = (0..n).map(|i| s.eigenvectors[k][i] * eig.eigenvectors[(i, j)]).sum();
            prop_assert!((dot.abs() - 1.0).abs() < 1e-8, "dot {}", dot);
        }
    }

    #[test]
    fn decomposition_reconstructs_and_is_orthonormal(rows in symmetric_strategy()) {
        let n = rows.len();
        let g = CouplingMatrix::from_rows(&rows).unwrap();
        let s = diagonalize(&g).unwrap();
        let back = s.reconstruct();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back.get(i, j) - rows[i][j]).abs() < 1e-10);
                let dot: f64 = (0..n).map(|k| s.eigenvectors[i][k] * s.eigenvectors[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - target).abs() < 1e-10);
            }
        }
        let sum: f64 = s.eigenvalues.iter().sum();
        let sq: f64 = s.eigenvalues.iter().map(|l| l * l).sum::<f64>().sqrt();
        prop_assert!((sum - g.trace()).abs() < 1e-10);
        prop_assert!((sq - g.frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn scaling_the_matrix_scales_the_spectrum(rows in symmetric_strategy(), c in 0.1f64..10.0) {
        let g = CouplingMatrix::from_rows(&rows).unwrap();
        let a = diagonalize(&g).unwrap();
        let b = diagonalize(&g.scaled(c)).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((c * x - y).abs() < 1e-9 * c.max(1.0));
        }
    }
}

#[test]
fn four_mode_basis_has_expected_spectrum() {
    let w = 40e-6;
    let geom = BeamGeometry::new(1064e-9, w, 0.0).unwrap();
    let pump = HGMode::new(
        0,
        0,
        BeamGeometry::new(532e-9, 0.9428090415820634 * w, 0.0).unwrap(),
    );
    let modes = vec![
        HGMode::new(0, 0, geom).with_offset(3.485e12),
        HGMode::new(0, 0, geom).with_offset(-3.485e12),
        HGMode::new(1, 0, geom),
        HGMode::new(0, 1, geom),
    ];
    let g = build_coupling_matrix(&ModeBasis::new(modes, pump).unwrap()).unwrap();
    let s = diagonalize(&g).unwrap();
    let expected = [1.0, -1.0, 0.64, 0.64];
    for (l, e) in s.eigenvalues.iter().zip(expected) {
        assert!((l - e).abs() < 1e-9, "{l} vs {e}");
    }
    let x = std::f64::consts::FRAC_1_SQRT_2;
    assert!((s.eigenvectors[0][0] - x).abs() < 1e-12 && (s.eigenvectors[0][1] - x).abs() < 1e-12);
    assert_eq!(s.eigenvectors[2], vec![0.0, 0.0, 1.0, 0.0]);
    assert_eq!(s.eigenvectors[3], vec![0.0, 0.0, 0.0, 1.0]);
}
