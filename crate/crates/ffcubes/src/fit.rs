//! Growth exponents of count series in base `q`.

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// `(B, slope from the previous nonzero point)`.
    pub successive: Vec<(i64, f64)>,
    /// Least-squares slope of `log_q count` against `B`.
    pub lsq: f64,
    pub points: usize,
    /// `B` values dropped because their count was zero.
    pub excluded: Vec<i64>,
}

impl FitReport {
    pub fn last_successive(&self) -> Option<f64> {
        self.successive.last().map(|&(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("fit needs at least two points with nonzero counts, got {0}")]
pub struct FitError(pub usize);

pub fn fit_exponent(q: u32, series: &[(i64, u64)]) -> Result<FitReport, FitError> {
    let lq = (q as f64).ln();
    let excluded: Vec<i64> = series.iter().filter(|p| p.1 == 0).map(|p| p.0).collect();
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.1 > 0)
        .map(|&(b, c)| (b as f64, (c as f64).ln() / lq))
        .collect();
    if pts.len() < 2 {
        return Err(FitError(pts.len()));
    }
    let successive = pts
        .windows(2)
        .zip(series.iter().filter(|p| p.1 > 0).skip(1))
        .map(|(w, &(b, _))| (b, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(FitReport {
        successive,
        lsq: sxy / sxx,
        points: pts.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_power() {
        let s: Vec<(i64, u64)> = (1..=5).map(|b| (b, 2u64.pow(3 * b as u32))).collect();
        let f = fit_exponent(2, &s).unwrap();
        assert!((f.lsq - 3.0).abs() < 1e-12);
        assert!(f.successive.iter().all(|&(_, x)| (x - 3.0).abs() < 1e-12));
    }

    #[test]
    fn too_few_points() {
        assert_eq!(fit_exponent(2, &[(1, 8)]), Err(FitError(1)));
        assert_eq!(fit_exponent(2, &[(1, 8), (2, 0)]), Err(FitError(1)));
    }

    #[test]
    fn zero_excluded() {
        let f = fit_exponent(5, &[(1, 0), (2, 25), (3, 125)]).unwrap();
        assert_eq!(f.excluded, vec![1]);
        assert_eq!(f.successive.len(), 1);
        assert!((f.lsq - 1.0).abs() < 1e-12);
    }
}
