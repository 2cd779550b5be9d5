//! Infinite-strength comparator: Dirichlet walls at every atom, so each gap
//! of length `l` contributes the levels `pi^2 m^2 / l^2`, `m >= 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::point_process::GapStatistics;
use crate::spectral::eigen::Spectrum;
use crate::spectral::operator::Boundary;

fn count_at_most(gaps: &[f64], energy: f64) -> usize {
    let k = energy.max(0.0).sqrt() / PI;
    gaps.iter().map(|&l| (l * k).floor() as usize).sum()
}

fn collect_levels(gaps: &[f64], keep: impl Fn(f64) -> bool) -> Vec<f64> {
    let mut levels = Vec::new();
    for &l in gaps.iter().filter(|&&l| l > 0.0) {
        let base = (PI / l).powi(2);
        let mut m = 1u64;
        loop {
            let e = base * (m * m) as f64;
            if !keep(e) {
                break;
            }
            levels.push(e);
            m += 1;
        }
    }
    levels.sort_by(f64::total_cmp);
    levels
}

fn spectrum(levels: Vec<f64>, k: usize, box_length: f64) -> Spectrum {
    Spectrum {
        eigenvalues: levels,
        k,
        grid_spacing: None,
        boundary: Some(Boundary::Dirichlet),
        domain_length: box_length,
    }
}

/// The `k` smallest levels of the merged per-gap spectra.
pub fn luttinger_sy_eigenvalues(stats: &GapStatistics, k: usize) -> Result<Spectrum> {
    let levels = lowest_levels(&stats.gaps, k)?;
    Ok(spectrum(levels, k, stats.box_length))
}

/// The `k` smallest merged levels for arbitrary gap lengths.
pub fn lowest_levels(gaps: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("need k >= 1 levels"));
    }
    let l_max = gaps.iter().copied().fold(0.0f64, f64::max);
    if !(l_max > 0.0) || !l_max.is_finite() {
        return Err(Error::invalid("all gaps are empty"));
    }
    let mut energy = (PI / l_max).powi(2);
    while count_at_most(gaps, energy) < k {
        energy *= 2.0;
    }
    let mut levels = collect_levels(gaps, |e| e <= energy);
    levels.truncate(k);
    Ok(levels)
}

/// Every merged level strictly below `energy`, ascending.
pub fn levels_below(gaps: &[f64], energy: f64) -> Vec<f64> {
    collect_levels(gaps, |e| e < energy)
}

/// All levels below `energy` as a spectrum over the configuration's box.
pub fn luttinger_sy_levels_below(stats: &GapStatistics, energy: f64) -> Spectrum {
    let levels = levels_below(&stats.gaps, energy);
    let k = levels.len();
    spectrum(levels, k, stats.box_length)
}

/// Gaps shortened by `by` (clamped at zero). Walls at the obstacle edges
/// rather than at the atoms bound the finite-strength spectrum from above:
/// the free Dirichlet eigenfunctions of the shortened gaps avoid the
/// potential altogether.
pub fn shrunk_gaps(gaps: &[f64], by: f64) -> Vec<f64> {
    gaps.iter().map(|&l| (l - by).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_gap_example() {
        let stats = GapStatistics::from_gaps(vec![2.0, 1.0]);
        let s = luttinger_sy_eigenvalues(&stats, 3).unwrap();
        let want = [PI * PI / 4.0, PI * PI, PI * PI];
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn empty_box_is_one_interval() {
        let stats = GapStatistics::from_gaps(vec![7.0]);
        let s = luttinger_sy_eigenvalues(&stats, 2).unwrap();
        assert!((s.eigenvalues[0] - PI * PI / 49.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 4.0 * PI * PI / 49.0).abs() < 1e-14);
    }

    #[test]
    fn zero_gaps_rejected() {
        assert!(lowest_levels(&[0.0, 0.0], 1).is_err());
        assert!(lowest_levels(&[1.0], 0).is_err());
    }

    #[test]
    fn levels_below_matches_lowest() {
        let gaps = [3.1, 0.4, 2.2, 5.0, 0.0, 1.7];
        let all = lowest_levels(&gaps, 40).unwrap();
        let cut = all[25];
        let below = levels_below(&gaps, cut);
        assert_eq!(below.len(), all.iter().filter(|&&e| e < cut).count());
        assert_eq!(&below[..], &all[..below.len()]);
    }

    #[test]
    fn shrinking() {
        assert_eq!(shrunk_gaps(&[3.0, 0.5, 1.0], 1.0), vec![2.0, 0.0, 0.0]);
    }
}
