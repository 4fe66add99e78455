//! Parametric coupling matrix over a signal-mode basis and its supermode decomposition.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hg_modes::{overlap3, HGMode};

/// Two frequency offsets are energy-conserving partners when they sum to zero within this (Hz).
const ENERGY_TOLERANCE_HZ: f64 = 1e-3;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_DIAGONAL: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    modes: Vec<HGMode>,
    pump: HGMode,
}

impl ModeBasis {
    pub fn new(modes: Vec<HGMode>, pump: HGMode) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptyBasis);
        }
        for (i, a) in modes.iter().enumerate() {
            if modes[..i].iter().any(|b| b.same_label(a)) {
                return Err(Error::DuplicateMode(a.to_string()));
            }
        }
        Ok(Self { modes, pump })
    }

    pub fn modes(&self) -> &[HGMode] {
        &self.modes
    }

    pub fn pump(&self) -> &HGMode {
        &self.pump
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Overlap of the pump with a TEM00 signal/idler pair in the first mode's geometry.
    pub fn reference_overlap(&self) -> Result<f64> {
        let g = self.modes[0].geometry;
        let s = HGMode::new(0, 0, g);
        overlap3(&self.pump, &s, &s)
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyBasis);
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "coupling matrix",
                "rows must form a square matrix",
            ));
        }
        Ok(Self {
            n,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut rows = vec![vec![0.0; n]; n];
        for (i, &v) in values.iter().enumerate() {
            rows[i][i] = v;
        }
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// G[ℓ][ℓ′] = overlap3(pump, ℓ, ℓ′) / reference when the pair conserves energy, else 0.
pub fn build_coupling_matrix(basis: &ModeBasis) -> Result<CouplingMatrix> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let reference = basis.reference_overlap()?;
    if reference == 0.0 {
        return Err(Error::invalid("basis.pump", "reference TEM00 overlap vanishes"));
    }
    let n = basis.len();
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let (a, b) = (&basis.modes[i], &basis.modes[j]);
            if (a.frequency_offset + b.frequency_offset).abs() > ENERGY_TOLERANCE_HZ {
                continue;
            }
            let g = overlap3(&basis.pump, a, b)? / reference;
            rows[i][j] = g;
            rows[j][i] = g;
        }
    }
    CouplingMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupermodeSet {
    /// Sorted by descending |Λ|.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` holds the coefficients of supermode k over the basis.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SupermodeSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Λ₁, the eigenvalue of largest modulus.
    pub fn leading(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        self.eigenvalues
            .get(k)
            .copied()
            .ok_or(Error::SupermodeOutOfRange {
                index: k,
                len: self.len(),
            })
    }

    /// V · diag(Λ) · Vᵀ
    pub fn reconstruct(&self) -> CouplingMatrix {
        let n = self.len();
        let mut rows = vec![vec![0.0; n]; n];
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            let v = &self.eigenvectors[k];
            for i in 0..n {
                for j in 0..n {
                    rows[i][j] += lam * v[i] * v[j];
                }
            }
        }
        CouplingMatrix::from_rows(&rows).expect("square by construction")
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric coupling matrix.
///
/// Ordering: descending |Λ|; ties go to the vector whose dominant coefficient has the lowest
/// basis index, then to the positive eigenvalue. Each vector's dominant coefficient is positive.
pub fn diagonalize(g: &CouplingMatrix) -> Result<SupermodeSet> {
    let asym = g.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    let n = g.dim();
    let mut a = g.rows();
    // symmetrize exactly
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let threshold = JACOBI_OFF_DIAGONAL * g.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].abs())
            .fold(0.0, f64::max);
        if off < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNotConverged(JACOBI_MAX_SWEEPS));
    }

    struct Pair {
        value: f64,
        vector: Vec<f64>,
        dominant: usize,
    }
    let scale = g.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<Pair> = (0..n)
        .map(|k| {
            let mut vector: Vec<f64> = v.iter().map(|row| row[k]).collect();
            let max_mag = vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let dominant = vector
                .iter()
                .position(|x| x.abs() >= max_mag - TIE_TOLERANCE)
                .unwrap_or(0);
            if vector[dominant] < 0.0 {
                vector.iter_mut().for_each(|x| *x = -*x);
            }
            Pair {
                value: a[k][k],
                vector,
                dominant,
            }
        })
        .collect();
    pairs.sort_by(|x, y| {
        let dx = x.value.abs() / scale;
        let dy = y.value.abs() / scale;
        if (dx - dy).abs() > TIE_TOLERANCE {
            return dy.total_cmp(&dx);
        }
        x.dominant
            .cmp(&y.dominant)
            .then_with(|| y.value.partial_cmp(&x.value).unwrap_or(Ordering::Equal))
    });

    Ok(SupermodeSet {
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.vector).collect(),
    })
}

/// P_th(k) = reference_threshold · (Λ₁/Λ_k)²; an uncoupled supermode never oscillates
/// and reports `f64::INFINITY`.
pub fn threshold_powers(s: &SupermodeSet, reference_threshold: f64) -> Result<Vec<f64>> {
    if !(reference_threshold > 0.0) {
        return Err(Error::invalid("reference_threshold", "must be positive"));
    }
    let lead = s.leading().abs();
    Ok(s.eigenvalues
        .iter()
        .map(|&l| {
            if l.abs() <= 1e-12 * lead {
                f64::INFINITY
            } else {
                reference_threshold * (lead / l.abs()).powi(2)
            }
        })
        .collect())
}
