use serde::{Deserialize, Serialize};

use crate::distribution::PdfGrid;
use crate::{Error, Result};

/// Upper bound on the number of automatically chosen bins.
pub const MAX_AUTO_BINS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Freedman–Diaconis width, at most [`MAX_AUTO_BINS`] bins.
    Auto,
    FixedWidth(f64),
    Edges(Vec<f64>),
}

/// Density histogram. With explicit edges, samples outside them are counted
/// in `outside` and the densities integrate to the inside fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub sample_count: u64,
    pub outside: u64,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|e| 0.5 * (e[0] + e[1]))
            .collect()
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { at: f64::NAN });
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn linear_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| {
            if i == bins {
                hi
            } else {
                lo + (hi - lo) * i as f64 / bins as f64
            }
        })
        .collect()
}

/// Normalized density histogram of `samples`.
pub fn build_histogram(samples: &[f64], binning: &Binning) -> Result<Histogram> {
    if samples.len() < 2 {
        return Err(Error::EmptySample(format!(
            "a histogram needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let data = sorted(samples)?;
    let (lo, hi) = (data[0], data[data.len() - 1]);
    let n = data.len();
    let edges = match binning {
        Binning::Auto => {
            if hi == lo {
                vec![lo - 0.5, lo + 0.5]
            } else {
                let iqr = quantile(&data, 0.75) - quantile(&data, 0.25);
                let width = 2.0 * iqr / (n as f64).cbrt();
                let bins = if width > 0.0 {
                    ((hi - lo) / width).ceil() as usize
                } else {
                    (n as f64).sqrt().ceil() as usize
                };
                linear_edges(lo, hi, bins.clamp(1, MAX_AUTO_BINS))
            }
        }
        Binning::FixedWidth(width) => {
            if !(*width > 0.0 && width.is_finite()) {
                return Err(crate::error::domain(
                    "build_histogram",
                    "bin width must be positive",
                ));
            }
            let bins = (((hi - lo) / width).floor() as usize + 1).max(1);
            (0..=bins).map(|i| lo + *width * i as f64).collect()
        }
        Binning::Edges(edges) => {
            if edges.len() < 2 || edges.windows(2).any(|e| !(e[1] > e[0])) {
                return Err(crate::error::domain(
                    "build_histogram",
                    "edges must be strictly increasing",
                ));
            }
            edges.clone()
        }
    };
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    let last = edges[bins];
    for &x in &data {
        if x < edges[0] || x > last {
            outside += 1;
            continue;
        }
        // Right-closed last bin, left-closed otherwise.
        let idx = edges
            .partition_point(|&e| e <= x)
            .saturating_sub(1)
            .min(bins - 1);
        counts[idx] += 1;
    }
    let total = n as f64;
    let widths: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
    let density = counts
        .iter()
        .zip(&widths)
        .map(|(&c, w)| c as f64 / (total * w))
        .collect();
    let standard_errors = counts
        .iter()
        .zip(&widths)
        .map(|(&c, w)| (c as f64).sqrt() / (total * w))
        .collect();
    Ok(Histogram {
        bin_edges: edges,
        counts,
        density,
        standard_errors,
        sample_count: n as u64,
        outside,
    })
}

/// Cumulative distribution of a tabulated density (trapezoid rule), as
/// `(s, F(s))` pairs. Not renormalized: mass outside the grid is missing.
pub fn grid_cdf(pdf: &PdfGrid<f64>) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(pdf.len());
    let mut acc = 0.0;
    for i in 0..pdf.len() {
        if i > 0 {
            acc += 0.5
                * (pdf.s_values[i] - pdf.s_values[i - 1])
                * (pdf.p_values[i] + pdf.p_values[i - 1]);
        }
        out.push((pdf.s_values[i], acc));
    }
    out
}

fn cdf_at(table: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (table[0], table[table.len() - 1]);
    if x <= first.0 {
        return 0.0;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = table.partition_point(|&(s, _)| s <= x);
    let (a, b) = (table[i - 1], table[i]);
    if b.0 == a.0 {
        return b.1;
    }
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfComparison {
    pub ks_distance: f64,
    /// χ² per degree of freedom over bins expecting at least 5 counts.
    pub chi2_per_dof: f64,
    pub dof: usize,
    /// Mass of the tabulated density inside its grid.
    pub grid_mass: f64,
    /// Share of samples inside the grid's range.
    pub covered_fraction: f64,
}

fn check_grid(pdf: &PdfGrid<f64>) -> Result<Vec<(f64, f64)>> {
    if pdf.len() < 2 {
        return Err(Error::InsufficientOverlap(
            "the density grid needs at least two points".into(),
        ));
    }
    let table = grid_cdf(pdf);
    let mass = table[table.len() - 1].1;
    if !(mass > 0.5) {
        return Err(Error::InsufficientOverlap(format!(
            "the grid carries only {mass} of the mass"
        )));
    }
    Ok(table)
}

fn chi_square(hist: &Histogram, table: &[(f64, f64)]) -> (f64, usize) {
    let n = hist.sample_count as f64;
    let mut chi2 = 0.0;
    let mut used = 0usize;
    for (i, &count) in hist.counts.iter().enumerate() {
        let expected =
            n * (cdf_at(table, hist.bin_edges[i + 1]) - cdf_at(table, hist.bin_edges[i]));
        if expected >= 5.0 {
            chi2 += (count as f64 - expected).powi(2) / expected;
            used += 1;
        }
    }
    if used < 2 {
        (f64::NAN, 0)
    } else {
        (chi2 / (used - 1) as f64, used - 1)
    }
}

/// Kolmogorov–Smirnov distance between the samples and the density, and a
/// χ² test on the automatic histogram.
pub fn compare_to_pdf(samples: &[f64], pdf: &PdfGrid<f64>) -> Result<PdfComparison> {
    let table = check_grid(pdf)?;
    let data = sorted(samples)?;
    if data.is_empty() {
        return Err(Error::EmptySample("no samples to compare".into()));
    }
    let (lo, hi) = (table[0].0, table[table.len() - 1].0);
    let covered = data.iter().filter(|&&x| x >= lo && x <= hi).count() as f64 / data.len() as f64;
    if covered < 0.5 {
        return Err(Error::InsufficientOverlap(format!(
            "only {covered} of the samples lie in [{lo}, {hi}]"
        )));
    }
    let n = data.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in data.iter().enumerate() {
        let f = cdf_at(&table, x);
        ks = ks
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    let hist = build_histogram(&data, &Binning::Auto)?;
    let (chi2_per_dof, dof) = chi_square(&hist, &table);
    Ok(PdfComparison {
        ks_distance: ks,
        chi2_per_dof,
        dof,
        grid_mass: table[table.len() - 1].1,
        covered_fraction: covered,
    })
}

/// As [`compare_to_pdf`] for binned data; the KS distance is then only
/// resolved at the bin edges.
pub fn compare_histogram_to_pdf(hist: &Histogram, pdf: &PdfGrid<f64>) -> Result<PdfComparison> {
    let table = check_grid(pdf)?;
    let n = hist.sample_count as f64;
    if n == 0.0 {
        return Err(Error::EmptySample("empty histogram".into()));
    }
    let (lo, hi) = (table[0].0, table[table.len() - 1].0);
    let mut below = 0.0;
    let mut ks: f64 = 0.0;
    let mut covered = 0.0;
    for (i, &count) in hist.counts.iter().enumerate() {
        let (a, b) = (hist.bin_edges[i], hist.bin_edges[i + 1]);
        if a >= lo && b <= hi {
            covered += count as f64;
        }
        below += count as f64;
        ks = ks.max((cdf_at(&table, b) - below / n).abs());
    }
    if covered / n < 0.5 {
        return Err(Error::InsufficientOverlap(
            "histogram and grid barely overlap".into(),
        ));
    }
    let (chi2_per_dof, dof) = chi_square(hist, &table);
    Ok(PdfComparison {
        ks_distance: ks,
        chi2_per_dof,
        dof,
        grid_mass: table[table.len() - 1].1,
        covered_fraction: covered / n,
    })
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample("both samples must be non-empty".into()));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
