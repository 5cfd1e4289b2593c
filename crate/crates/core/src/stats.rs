//! Length histograms and the `(a + b·ln n)²` fit.

use alloc::collections::BTreeMap;

use thiserror::Error;

/// Counts of minimal lengths; automata without a word up to the cap are
/// counted apart.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    pub counts: BTreeMap<usize, usize>,
    pub not_synchronizing: usize,
}

impl Histogram {
    pub fn from_lengths<I: IntoIterator<Item = Option<usize>>>(lengths: I) -> Histogram {
        let mut h = Histogram::default();
        for l in lengths {
            h.add(l);
        }
        h
    }

    pub fn add(&mut self, length: Option<usize>) {
        match length {
            Some(l) => *self.counts.entry(l).or_insert(0) += 1,
            None => self.not_synchronizing += 1,
        }
    }

    pub fn synchronizing(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn total(&self) -> usize {
        self.synchronizing() + self.not_synchronizing
    }

    /// Most frequent length; ties go to the shorter one.
    pub fn mode(&self) -> Option<usize> {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&l, _)| l)
    }

    /// Mean over synchronizing automata.
    pub fn mean(&self) -> Option<f64> {
        let n = self.synchronizing();
        (n > 0).then(|| self.counts.iter().map(|(&l, &c)| (l * c) as f64).sum::<f64>() / n as f64)
    }

    pub fn fraction(&self, length: usize) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.counts.get(&length).copied().unwrap_or(0) as f64 / t as f64,
        }
    }
}

/// `E(n) ≈ (a + b·ln n)²`; `rss` is measured on `E` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub rss: f64,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        let r = self.a + self.b * libm::log(n);
        r * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FitError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("all points share the same n")]
    Degenerate,
    #[error("point ({n}, {mean}) is outside the domain n > 0, mean >= 0")]
    OutOfDomain { n: f64, mean: f64 },
}

/// Ordinary least squares of `√E` on `ln n`.
pub fn fit_log_square(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if let Some(&(n, mean)) = points
        .iter()
        .find(|&&(n, m)| !(n > 0.0 && n.is_finite() && m >= 0.0 && m.is_finite()))
    {
        return Err(FitError::OutOfDomain { n, mean });
    }
    let k = points.len() as f64;
    let xs = points.iter().map(|&(n, _)| libm::log(n));
    let ys = points.iter().map(|&(_, m)| libm::sqrt(m));
    let mx = xs.clone().sum::<f64>() / k;
    let my = ys.clone().sum::<f64>() / k;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= f64::EPSILON * k {
        return Err(FitError::Degenerate);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let mut fit = FitResult { a, b, rss: 0.0 };
    fit.rss = points
        .iter()
        .map(|&(n, m)| {
            let d = m - fit.predict(n);
            d * d
        })
        .sum();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn counts_and_mode() {
        let h = Histogram::from_lengths([Some(2), Some(2), Some(3)]);
        assert_eq!(h.counts.iter().map(|(&l, &c)| (l, c)).collect::<Vec<_>>(), [(2, 2), (3, 1)]);
        assert_eq!(h.mode(), Some(2));
        assert!((h.mean().unwrap() - 7.0 / 3.0).abs() < 1e-15);
        let mut h = h;
        h.add(None);
        assert_eq!(h.total(), 4);
        assert_eq!(h.fraction(2), 0.5);
        assert_eq!(Histogram::default().mode(), None);
        assert_eq!(Histogram::from_lengths([Some(3), Some(1)]).mode(), Some(1));
    }

    #[test]
    fn recovers_generating_coefficients() {
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|i| {
                let n = 10.0 * i as f64;
                let r = 0.5 + 0.7 * libm::log(n);
                (n, r * r)
            })
            .collect();
        let fit = fit_log_square(&pts).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-9);
        assert!((fit.b - 0.7).abs() < 1e-9);
        assert!(fit.rss < 1e-18);
    }

    #[test]
    fn two_points_interpolate() {
        let fit = fit_log_square(&[(10.0, 4.0), (40.0, 9.0)]).unwrap();
        assert!(fit.rss < 1e-24);
        assert!((fit.predict(10.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_log_square(&[(5.0, 1.0)]), Err(FitError::TooFewPoints(1)));
        assert_eq!(fit_log_square(&[(5.0, 1.0), (5.0, 2.0)]), Err(FitError::Degenerate));
        assert!(matches!(fit_log_square(&[(0.0, 1.0), (5.0, 2.0)]), Err(FitError::OutOfDomain { .. })));
    }

    proptest! {
        #[test]
        fn exact_recovery(a in 0.0f64..2.0, b in 0.0f64..2.0, ns in proptest::collection::btree_set(2u32..200, 2..12)) {
            let pts: Vec<(f64, f64)> = ns.iter().map(|&n| {
                let r = a + b * libm::log(n as f64);
                (n as f64, r * r)
            }).collect();
            let fit = fit_log_square(&pts).unwrap();
            prop_assert!((fit.a - a).abs() < 1e-9, "a {} vs {}", fit.a, a);
            prop_assert!((fit.b - b).abs() < 1e-9, "b {} vs {}", fit.b, b);
        }
    }
}
