//! Spectral observables: diagonalization, standardized spectra, density and
//! LDOS histograms, Monte-Carlo survival probability and the q-Hermite
//! theory curves including the numerical Fourier transform of v(E|q).

use crate::ensemble::ManyBodyMatrix;
use crate::error::{QembedError, Result};
use crate::linalg;
use crate::qfunc::{self, QValue, WeightSettings};
use ndarray::Array2;
use serde::Serialize;

/// Eigen-decomposition of one ensemble member.
///
/// `overlaps_sq[(b, e)]` is |C_b^E|^2 = |<E_e|b>|^2; rows index the
/// many-body basis, columns the eigenstates. `basis_energies` are the
/// diagonal elements e_b = <b|H|b>.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub overlaps_sq: Option<Array2<f64>>,
    pub basis_energies: Vec<f64>,
    pub centroid: f64,
    pub width: f64,
}

fn centroid_and_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Full dense Hermitian eigensolve with eigenvector overlaps.
pub fn diagonalize(h: &ManyBodyMatrix) -> Result<SpectralResult> {
    diagonalize_impl(h, true)
}

/// Eigenvalues only; cheaper when no overlaps are needed.
pub fn diagonalize_values(h: &ManyBodyMatrix) -> Result<SpectralResult> {
    diagonalize_impl(h, false)
}

fn diagonalize_impl(h: &ManyBodyMatrix, vectors: bool) -> Result<SpectralResult> {
    if h.hermiticity_defect() > 1e-10 * h.max_abs().max(1.0) {
        return Err(QembedError::Domain(
            "diagonalize requires a Hermitian matrix".into(),
        ));
    }
    let dim = h.dim();
    let (eigenvalues, overlaps_sq) = match h {
        ManyBodyMatrix::Real(a) => {
            let (w, v) = linalg::eigh_real(a, vectors)?;
            if let Some(v) = &v {
                check_residuals_real(a, &w, v)?;
            }
            (w, v.map(|v| v.mapv(|x| x * x)))
        }
        ManyBodyMatrix::Complex(a) => {
            let (w, v) = linalg::eigh_complex(a, vectors)?;
            if let Some(v) = &v {
                check_residuals_complex(a, &w, v)?;
            }
            (w, v.map(|v| v.mapv(|z| z.norm_sqr())))
        }
    };
    if let Some(c) = &overlaps_sq {
        // Completeness: each basis row must carry unit total overlap.
        for b in 0..dim {
            let s: f64 = c.row(b).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(QembedError::Numerical(format!(
                    "completeness defect {:e} at basis state {b}",
                    (s - 1.0).abs()
                )));
            }
        }
    }
    let (centroid, width) = centroid_and_width(&eigenvalues);
    Ok(SpectralResult {
        eigenvalues,
        overlaps_sq,
        basis_energies: h.diagonal(),
        centroid,
        width,
    })
}

/// Indices spot-checked for the eigen residual; a full check would cost
/// another O(n^3) multiply per member.
fn residual_check_indices(n: usize) -> Vec<usize> {
    let mut idx = vec![0, n / 2, n - 1];
    idx.dedup();
    idx
}

fn check_residuals_real(a: &Array2<f64>, w: &[f64], v: &Array2<f64>) -> Result<()> {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())) * (a.nrows() as f64).sqrt();
    for &j in &residual_check_indices(w.len()) {
        let av = a.dot(&v.column(j));
        let res = av
            .iter()
            .zip(v.column(j))
            .map(|(x, y)| (x - w[j] * y) * (x - w[j] * y))
            .sum::<f64>()
            .sqrt();
        if res > 1e-9 * scale.max(1.0) {
            return Err(QembedError::Numerical(format!(
                "eigen residual {res:e} at pair {j}"
            )));
        }
    }
    Ok(())
}

fn check_residuals_complex(
    a: &Array2<num_complex::Complex64>,
    w: &[f64],
    v: &Array2<num_complex::Complex64>,
) -> Result<()> {
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.norm())) * (a.nrows() as f64).sqrt();
    for &j in &residual_check_indices(w.len()) {
        let av = a.dot(&v.column(j));
        let res = av
            .iter()
            .zip(v.column(j))
            .map(|(x, y)| (x - y * w[j]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res > 1e-9 * scale.max(1.0) {
            return Err(QembedError::Numerical(format!(
                "eigen residual {res:e} at pair {j}"
            )));
        }
    }
    Ok(())
}

/// Per-member standardization E -> (E - E_c)/sigma, applied to both the
/// eigenvalues and the basis energies.
pub fn standardize(result: &SpectralResult) -> Result<SpectralResult> {
    if result.width <= 0.0 || !result.width.is_finite() {
        return Err(QembedError::Domain(format!(
            "degenerate spectrum width {}",
            result.width
        )));
    }
    let (c, s) = (result.centroid, result.width);
    let eigenvalues: Vec<f64> = result.eigenvalues.iter().map(|e| (e - c) / s).collect();
    let basis_energies: Vec<f64> = result.basis_energies.iter().map(|e| (e - c) / s).collect();
    Ok(SpectralResult {
        eigenvalues,
        overlaps_sq: result.overlaps_sq.clone(),
        basis_energies,
        centroid: 0.0,
        width: 1.0,
    })
}

/// Uniform binning specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        // Covers the support down to q ~ 0.55 and clips under 0.3% of the
        // Gaussian tail mass.
        HistogramSpec {
            bins: 50,
            lo: -3.0,
            hi: 3.0,
        }
    }
}

/// Unit-area binned density estimate.
#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub total_weight: f64,
    pub members: usize,
    pub label: String,
}

impl Histogram {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn area(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }
}

/// Mergeable weighted-histogram accumulator; merging is associative and
/// commutative so parallel reduction order cannot affect results.
#[derive(Debug, Clone)]
pub struct HistogramAccum {
    pub spec: HistogramSpec,
    sums: Vec<f64>,
    total_weight: f64,
    members: usize,
}

impl HistogramAccum {
    pub fn new(spec: HistogramSpec) -> Self {
        HistogramAccum {
            spec,
            sums: vec![0.0; spec.bins],
            total_weight: 0.0,
            members: 0,
        }
    }

    /// Samples outside [lo, hi) are dropped; the top edge is inclusive.
    pub fn add(&mut self, x: f64, weight: f64) {
        let (lo, hi) = (self.spec.lo, self.spec.hi);
        if x < lo || x > hi {
            return;
        }
        let width = (hi - lo) / self.spec.bins as f64;
        let bin = (((x - lo) / width) as usize).min(self.spec.bins - 1);
        self.sums[bin] += weight;
        self.total_weight += weight;
    }

    pub fn count_member(&mut self) {
        self.members += 1;
    }

    pub fn merge(&mut self, other: &HistogramAccum) {
        assert_eq!(self.spec, other.spec);
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.total_weight += other.total_weight;
        self.members += other.members;
    }

    pub fn finalize(&self, label: &str) -> Result<Histogram> {
        if self.total_weight <= 0.0 {
            return Err(QembedError::Numerical(
                "histogram has no weight in range".into(),
            ));
        }
        let width = (self.spec.hi - self.spec.lo) / self.spec.bins as f64;
        let edges = (0..=self.spec.bins)
            .map(|i| self.spec.lo + i as f64 * width)
            .collect();
        let density = self
            .sums
            .iter()
            .map(|&s| s / (self.total_weight * width))
            .collect();
        Ok(Histogram {
            edges,
            density,
            total_weight: self.total_weight,
            members: self.members,
            label: label.to_string(),
        })
    }

    pub fn bin_sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// Pool the (standardized) eigenvalues of all members into one unit-area
/// histogram.
pub fn density_histogram(members: &[SpectralResult], spec: HistogramSpec) -> Result<Histogram> {
    let mut accum = HistogramAccum::new(spec);
    for r in members {
        density_accumulate(r, &mut accum);
    }
    accum.finalize("spectral density")
}

pub fn density_accumulate(result: &SpectralResult, accum: &mut HistogramAccum) {
    for &e in &result.eigenvalues {
        accum.add(e, 1.0);
    }
    accum.count_member();
}

/// Sampled function with axis metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub label: String,
    pub q: Option<f64>,
}

/// Theory spectral density rho(E) = v((E - E_c)/sigma | q)/sigma on `grid`.
pub fn theory_density(
    grid: &[f64],
    q: QValue,
    e_c: f64,
    sigma: f64,
    settings: &WeightSettings,
) -> Result<Curve> {
    if sigma <= 0.0 {
        return Err(QembedError::Domain("sigma must be positive".into()));
    }
    let y = grid
        .iter()
        .map(|&e| Ok(qfunc::weight_pdf((e - e_c) / sigma, q, settings)? / sigma))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Curve {
        x: grid.to_vec(),
        y,
        label: "theory density".into(),
        q: Some(q.get()),
    })
}

/// Energy window e_psi(0) +- delta in standardized units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowSpec {
    pub center: f64,
    pub half_width: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            center: 0.0,
            half_width: 0.2,
        }
    }
}

/// Add one standardized member's LDOS contribution: |C_b^E|^2 of every
/// basis state b inside the window, binned against E. Returns the number
/// of qualifying basis states.
pub fn ldos_accumulate(
    result: &SpectralResult,
    window: &WindowSpec,
    accum: &mut HistogramAccum,
) -> Result<usize> {
    let overlaps = result.overlaps_sq.as_ref().ok_or_else(|| {
        QembedError::Domain("LDOS requires eigenvector overlaps".into())
    })?;
    let mut qualifying = 0usize;
    for (b, &eb) in result.basis_energies.iter().enumerate() {
        if (eb - window.center).abs() > window.half_width {
            continue;
        }
        qualifying += 1;
        for (e, &ev) in result.eigenvalues.iter().enumerate() {
            accum.add(ev, overlaps[(b, e)]);
        }
    }
    accum.count_member();
    Ok(qualifying)
}

/// Ensemble-averaged LDOS over standardized members.
pub fn ldos_histogram(
    members: &[SpectralResult],
    window: &WindowSpec,
    spec: HistogramSpec,
) -> Result<Histogram> {
    let mut accum = HistogramAccum::new(spec);
    for (i, r) in members.iter().enumerate() {
        let n = ldos_accumulate(r, window, &mut accum)?;
        if n == 0 {
            return Err(QembedError::Numerical(format!(
                "no basis state inside the LDOS window for member {i}"
            )));
        }
    }
    accum.finalize("LDOS")
}

/// Survival probability of one basis state:
/// F(t) = |sum_E |C_b^E|^2 exp(-i E t)|^2.
fn survival_of_state(
    eigenvalues: &[f64],
    weights: impl Iterator<Item = f64> + Clone,
    times: &[f64],
) -> Vec<f64> {
    // Dividing by the squared overlap sum absorbs completeness rounding
    // and makes F(0) exactly 1.
    let total: f64 = weights.clone().sum();
    times
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (&e, w) in eigenvalues.iter().zip(weights.clone()) {
                re += w * (e * t).cos();
                im -= w * (e * t).sin();
            }
            (re * re + im * im) / (total * total)
        })
        .collect()
}

/// Sum of per-state survival curves over qualifying basis states
/// (|e_b| <= delta1 around center 0) plus the number of states summed.
pub fn survival_accumulate(
    result: &SpectralResult,
    times: &[f64],
    delta1: f64,
) -> Result<(Vec<f64>, usize)> {
    let overlaps = result.overlaps_sq.as_ref().ok_or_else(|| {
        QembedError::Domain("survival probability requires eigenvector overlaps".into())
    })?;
    let mut sums = vec![0.0; times.len()];
    let mut count = 0usize;
    for (b, &eb) in result.basis_energies.iter().enumerate() {
        if eb.abs() > delta1 {
            continue;
        }
        count += 1;
        let f = survival_of_state(&result.eigenvalues, overlaps.row(b).iter().cloned(), times);
        for (s, v) in sums.iter_mut().zip(&f) {
            *s += v;
        }
    }
    Ok((sums, count))
}

/// Monte-Carlo ensemble-averaged survival probability: the mean of the
/// per-state probabilities over all qualifying (member, basis state)
/// pairs.
pub fn survival_mc(members: &[SpectralResult], times: &[f64], delta1: f64) -> Result<Curve> {
    if delta1 <= 0.0 {
        return Err(QembedError::Domain("delta1 must be positive".into()));
    }
    let mut sums = vec![0.0; times.len()];
    let mut count = 0usize;
    for r in members {
        let (s, c) = survival_accumulate(r, times, delta1)?;
        for (a, b) in sums.iter_mut().zip(&s) {
            *a += b;
        }
        count += c;
    }
    if count == 0 {
        return Err(QembedError::Numerical(format!(
            "no basis state with |e_b| <= {delta1} in any member; enlarge delta1"
        )));
    }
    let y: Vec<f64> = sums.iter().map(|s| s / count as f64).collect();
    Ok(Curve {
        x: times.to_vec(),
        y,
        label: "survival MC".into(),
        q: None,
    })
}

/// Theory survival probability F(t) = |int v(E|q) exp(-iEt) dE|^2 by
/// quadrature over the standardized support (Gaussian branch integrates
/// over |E| <= 10).
pub fn survival_theory(q: QValue, times: &[f64], settings: &WeightSettings) -> Result<Curve> {
    let grid: Vec<(f64, f64)> = if q.is_gaussian() || q.get() == 1.0 {
        crate::quadrature::panel_rule(-10.0, 10.0, settings.quadrature_points)
    } else {
        qfunc::weight_grid(q, settings)
    };
    let values: Vec<(f64, f64)> = grid
        .iter()
        .map(|&(x, w)| Ok((x, w * qfunc::weight_pdf(x, q, settings)?)))
        .collect::<Result<_>>()?;
    let norm: f64 = values.iter().map(|&(_, wv)| wv).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(QembedError::Numerical(format!(
            "weight quadrature area {norm} too far from 1"
        )));
    }
    let y = times
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for &(x, wv) in &values {
                re += wv * (x * t).cos();
                im -= wv * (x * t).sin();
            }
            // Normalize by the quadrature area so F(0) = 1 exactly.
            (re * re + im * im) / (norm * norm)
        })
        .collect();
    Ok(Curve {
        x: times.to_vec(),
        y,
        label: "survival theory".into(),
        q: Some(q.get()),
    })
}

/// Ensemble-averaged reduced central moment of order 2n of the pooled
/// standardized eigenvalues.
pub fn moments_of_spectrum(members: &[SpectralResult], order: u32) -> Result<f64> {
    if order > 8 || order % 2 != 0 {
        return Err(QembedError::Domain(
            "supported moment orders are 2, 4, 6, 8".into(),
        ));
    }
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for r in members {
        let std = standardize(r)?;
        for &e in &std.eigenvalues {
            sum += e.powi(order as i32);
        }
        count += std.eigenvalues.len();
    }
    if count == 0 {
        return Err(QembedError::Domain("no eigenvalues supplied".into()));
    }
    Ok(sum / count as f64)
}

/// Default time grid: t in [0, 5] in 500 steps of standardized
/// inverse-energy units.
pub fn default_time_grid() -> Vec<f64> {
    (0..=500).map(|i| i as f64 * 0.01).collect()
}
