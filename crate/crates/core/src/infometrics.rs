//! Histogram mutual information and the scheme grid search.
//!
//! Each axis is discretized into `n_bins` equal-width bins spanning its
//! own min/max; mutual information is computed from the joint histogram in
//! nats. The score of a scheme is the summed MI between every feature
//! column and the normalized target, and the grid search picks the
//! highest-scoring `(delta_t, k)` pair.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::marketdata::AlignedPanel;
use crate::preprocess::{build_scheme_dataset, Scheme, SchemeDataset};

pub const DEFAULT_N_BINS: usize = 100;

/// Schemes producing fewer dataset rows than this are skipped by
/// [`grid_search`].
pub const MIN_SCHEME_ROWS: usize = 30;

/// Equal-width binning of one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinGrid {
    n_bins: usize,
    min: f64,
    max: f64,
}

impl BinGrid {
    pub fn new(n_bins: usize, min: f64, max: f64) -> Result<Self> {
        if n_bins < 1 {
            return Err(Error::InvalidInput("n_bins must be at least 1".into()));
        }
        if !min.is_finite() || !max.is_finite() || min > max {
            return Err(Error::InvalidInput("bin grid needs finite min <= max".into()));
        }
        Ok(BinGrid { n_bins, min, max })
    }

    /// Grid spanning the observed range of `xs`.
    pub fn from_series(xs: &[f64], n_bins: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptySeries);
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &x in xs {
            if !x.is_finite() {
                return Err(Error::NonFinite("bin grid input".into()));
            }
            min = min.min(x);
            max = max.max(x);
        }
        BinGrid::new(n_bins, min, max)
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

/// 1-based bin of `value`: `1 + floor(n (v - min) / (max - min))`, with
/// the top edge folded into bin `n`. A zero-width grid puts everything in
/// bin 1. Values outside `[min, max]` are an error.
pub fn bin_index(value: f64, grid: &BinGrid) -> Result<usize> {
    if !value.is_finite() || value < grid.min || value > grid.max {
        return Err(Error::OutOfRange { value, min: grid.min, max: grid.max });
    }
    let width = grid.max - grid.min;
    if width == 0.0 {
        return Ok(1);
    }
    let raw = 1 + (grid.n_bins as f64 * (value - grid.min) / width) as usize;
    Ok(raw.min(grid.n_bins))
}

/// Mutual information of two equal-length series in nats, each axis
/// binned over its own range. Always non-negative; zero when the joint
/// histogram factorizes.
pub fn empirical_mi(x: &[f64], y: &[f64], n_bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let gx = BinGrid::from_series(x, n_bins)?;
    let gy = BinGrid::from_series(y, n_bins)?;
    let n = n_bins;
    let mut joint = vec![0u32; n * n];
    for (&xv, &yv) in x.iter().zip(y) {
        let i = bin_index(xv, &gx)? - 1;
        let j = bin_index(yv, &gy)? - 1;
        joint[i * n + j] += 1;
    }
    let mut px = vec![0u64; n];
    let mut py = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            let c = joint[i * n + j] as u64;
            px[i] += c;
            py[j] += c;
        }
    }
    let total = x.len() as f64;
    let mut mi = 0.0;
    for i in 0..n {
        if px[i] == 0 {
            continue;
        }
        for j in 0..n {
            let c = joint[i * n + j];
            if c == 0 {
                continue;
            }
            let p_joint = c as f64 / total;
            let p_prod = (px[i] as f64 / total) * (py[j] as f64 / total);
            mi += p_joint * (p_joint / p_prod).ln();
        }
    }
    // The estimator is non-negative in exact arithmetic; rounding can
    // leave a tiny negative residue.
    Ok(mi.max(0.0))
}

/// Scheme score: summed MI between every feature column and the
/// normalized target.
pub fn scheme_mi(dataset: &SchemeDataset, n_bins: usize) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut total = 0.0;
    for idx in 0..dataset.input_dim() {
        total += empirical_mi(&dataset.column(idx), &dataset.target, n_bins)?;
    }
    Ok(total)
}

/// One evaluated grid point; `mi` is `None` when the scheme was skipped
/// for yielding too few rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEntry {
    pub scheme: Scheme,
    pub mi: Option<f64>,
}

/// Full grid of scores plus the winning scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct MiSurface {
    pub entries: Vec<MiEntry>,
    pub best: Scheme,
}

/// Picks the highest score; ties go to the earlier entry, which with the
/// delta_t-major grid order means smaller `delta_t`, then smaller `k`.
fn select_best(entries: &[MiEntry]) -> Option<Scheme> {
    let mut best: Option<(Scheme, f64)> = None;
    for entry in entries {
        if let Some(score) = entry.mi {
            let better = match best {
                None => true,
                Some((_, best_score)) => score > best_score,
            };
            if better {
                best = Some((entry.scheme, score));
            }
        }
    }
    best.map(|(s, _)| s)
}

/// Evaluates every `(delta_t, k)` pair in the given inclusive ranges.
///
/// Schemes whose dataset has fewer than [`MIN_SCHEME_ROWS`] rows (or does
/// not fit in the panel at all) are recorded as skipped. Errors if the
/// ranges are empty or invalid, or every scheme was skipped.
pub fn grid_search(
    panel: &AlignedPanel,
    delta_t_range: RangeInclusive<usize>,
    k_range: RangeInclusive<usize>,
    n_bins: usize,
) -> Result<MiSurface> {
    if delta_t_range.is_empty() || k_range.is_empty() {
        return Err(Error::InvalidInput("empty grid range".into()));
    }
    if *delta_t_range.start() < 1 || *k_range.start() < 2 {
        return Err(Error::InvalidInput("grid requires delta_t >= 1 and k >= 2".into()));
    }
    let mut entries = Vec::new();
    for delta_t in delta_t_range {
        for k in k_range.clone() {
            let scheme = Scheme::new(delta_t, k)?;
            let mi = match build_scheme_dataset(panel, scheme) {
                Ok(ds) if ds.len() >= MIN_SCHEME_ROWS => Some(scheme_mi(&ds, n_bins)?),
                Ok(_) => None,
                Err(Error::SeriesTooShort { .. }) => None,
                Err(e) => return Err(e),
            };
            entries.push(MiEntry { scheme, mi });
        }
    }
    let best = select_best(&entries).ok_or(Error::AllSchemesSkipped)?;
    Ok(MiSurface { entries, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::Date;
    use crate::marketdata::TrendColumn;
    use crate::rng::SeedRng;
    use approx::assert_relative_eq;

    #[test]
    fn bin_index_edges() {
        let g = BinGrid::new(4, 0.0, 1.0).unwrap();
        assert_eq!(bin_index(0.0, &g).unwrap(), 1);
        assert_eq!(bin_index(1.0, &g).unwrap(), 4);
        assert_eq!(bin_index(0.5, &g).unwrap(), 3);
        assert_eq!(bin_index(0.249, &g).unwrap(), 1);
        assert!(bin_index(1.5, &g).is_err());
        assert!(bin_index(-0.1, &g).is_err());
    }

    #[test]
    fn bin_index_degenerate_grid() {
        let g = BinGrid::from_series(&[2.0, 2.0, 2.0], 10).unwrap();
        assert_eq!(bin_index(2.0, &g).unwrap(), 1);
    }

    #[test]
    fn mi_single_bin_is_zero() {
        let x = [1.0, 2.0, 3.0];
        let y = [4.0, 5.0, 6.0];
        assert_eq!(empirical_mi(&x, &y, 1).unwrap(), 0.0);
    }

    #[test]
    fn mi_independent_checkerboard_is_zero() {
        // Joint histogram factorizes exactly: each (x, y) cell count 1.
        let x = [1.0, 1.0, 2.0, 2.0];
        let y = [1.0, 2.0, 1.0, 2.0];
        let mi = empirical_mi(&x, &y, 2).unwrap();
        assert!(mi.abs() < 1e-12, "mi {mi}");
    }

    #[test]
    fn mi_identical_distinct_values_is_ln_t() {
        let t = 40;
        let x: Vec<f64> = (0..t).map(|i| i as f64).collect();
        let mi = empirical_mi(&x, &x, 4 * t).unwrap();
        assert_relative_eq!(mi, (t as f64).ln(), max_relative = 1e-12);
    }

    #[test]
    fn mi_symmetry_spot() {
        let mut rng = SeedRng::new(5);
        let x: Vec<f64> = (0..300).map(|_| rng.standard_normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.5 * rng.standard_normal()).collect();
        let a = empirical_mi(&x, &y, 20).unwrap();
        let b = empirical_mi(&y, &x, 20).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert!(a > 0.1);
    }

    #[test]
    fn mi_rejects_bad_input() {
        assert!(matches!(empirical_mi(&[1.0], &[1.0, 2.0], 4), Err(Error::LengthMismatch { .. })));
        assert!(matches!(empirical_mi(&[], &[], 4), Err(Error::EmptySeries)));
        assert!(empirical_mi(&[1.0, f64::NAN], &[1.0, 2.0], 4).is_err());
        assert!(empirical_mi(&[1.0, 2.0], &[1.0, 2.0], 0).is_err());
    }

    fn panel_from_columns(r: Vec<f64>, h: Vec<f64>, trends: Vec<Vec<f64>>) -> AlignedPanel {
        let days = r.len();
        let dates = (0..days)
            .map(|t| Date::new(2000 + (t / 300) as u16, 1 + ((t / 28) % 12) as u8, 1 + (t % 28) as u8).unwrap())
            .collect();
        let trends = trends
            .into_iter()
            .enumerate()
            .map(|(i, values)| TrendColumn { keyword: alloc::format!("kw{:02}", i + 1), values })
            .collect();
        AlignedPanel { dates, returns: r, volatility: h, trends, gk_clamped: 0 }
    }

    fn random_panel(days: usize, n_trends: usize, seed: u64) -> AlignedPanel {
        let mut rng = SeedRng::new(seed);
        let r: Vec<f64> = (0..days).map(|_| 0.01 * rng.standard_normal()).collect();
        let h: Vec<f64> = (0..days).map(|_| 0.5 + rng.uniform()).collect();
        let trends: Vec<Vec<f64>> =
            (0..n_trends).map(|_| (0..days).map(|_| 10.0 + rng.uniform()).collect()).collect();
        panel_from_columns(r, h, trends)
    }

    #[test]
    fn scheme_mi_sums_columns() {
        let panel = random_panel(400, 1, 8);
        let ds = build_scheme_dataset(&panel, Scheme::new(2, 3).unwrap()).unwrap();
        let total = scheme_mi(&ds, 16).unwrap();
        let by_hand: f64 = (0..3)
            .map(|idx| empirical_mi(&ds.column(idx), &ds.target, 16).unwrap())
            .sum();
        assert_relative_eq!(total, by_hand, max_relative = 1e-12);
    }

    #[test]
    fn select_best_breaks_ties_toward_earlier_entries() {
        let s = |dt, k| Scheme::new(dt, k).unwrap();
        let entries = vec![
            MiEntry { scheme: s(1, 2), mi: None },
            MiEntry { scheme: s(2, 2), mi: Some(0.75) },
            MiEntry { scheme: s(2, 3), mi: Some(0.75) },
            MiEntry { scheme: s(3, 2), mi: Some(0.75) },
        ];
        // Bitwise-equal scores: the first in grid order wins.
        assert_eq!(select_best(&entries), Some(s(2, 2)));
        assert_eq!(select_best(&[MiEntry { scheme: s(1, 2), mi: None }]), None);
    }

    #[test]
    fn grid_search_small_panel_skips_and_errors() {
        let panel = random_panel(60, 1, 11);
        // delta_t 9..10 with k 18..20 cannot reach 30 rows on 60 days.
        assert_eq!(
            grid_search(&panel, 9..=10, 18..=20, 8),
            Err(Error::AllSchemesSkipped)
        );
    }

    #[test]
    fn grid_search_single_cell() {
        let panel = random_panel(200, 1, 12);
        let surface = grid_search(&panel, 2..=2, 3..=3, 8).unwrap();
        assert_eq!(surface.entries.len(), 1);
        assert_eq!(surface.best, Scheme::new(2, 3).unwrap());
        assert!(surface.entries[0].mi.is_some());
    }

    #[test]
    fn grid_search_marks_skipped_entries() {
        let panel = random_panel(120, 1, 13);
        let surface = grid_search(&panel, 1..=4, 2..=3, 8).unwrap();
        assert_eq!(surface.entries.len(), 8);
        // delta_t = 1 easily clears 30 rows; delta_t = 4 gives at most
        // 120/4 - 3 = 27 rows and must be skipped.
        assert!(surface.entries.iter().any(|e| e.scheme.delta_t == 1 && e.mi.is_some()));
        assert!(surface
            .entries
            .iter()
            .filter(|e| e.scheme.delta_t == 4)
            .all(|e| e.mi.is_none()));
    }

    #[test]
    fn grid_search_validates_ranges() {
        let panel = random_panel(100, 1, 14);
        assert!(grid_search(&panel, 1..=0, 2..=3, 8).is_err());
        assert!(grid_search(&panel, 1..=2, 1..=3, 8).is_err());
        assert!(grid_search(&panel, 0..=2, 2..=3, 8).is_err());
    }
}
