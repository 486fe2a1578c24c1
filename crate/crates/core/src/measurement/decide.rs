use std::io::Write;

use crate::dynamics::QubitState;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum shots per preparation for a fidelity estimate.
pub const MIN_SHOTS_PER_PREP: usize = 100;

/// Threshold rule. The excited state sits on the positive side of the
/// amplified axis; a tie is assigned to ground.
#[inline]
pub fn threshold_decide<T: Real>(x_measured: T, threshold: T) -> QubitState {
    if x_measured > threshold {
        QubitState::Excited
    } else {
        QubitState::Ground
    }
}

/// Measured quadratures of the `0`-prepared and `π`-prepared shots.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPair<T> {
    pub x0: Vec<T>,
    pub x1: Vec<T>,
    pub threshold: T,
}

impl<T: Real> HistogramPair<T> {
    pub fn new(x0: Vec<T>, x1: Vec<T>) -> Self {
        Self {
            x0,
            x1,
            threshold: T::zero(),
        }
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self
    }

    /// Shot counts `(N₀, N_π)`.
    pub fn counts(&self) -> (usize, usize) {
        (self.x0.len(), self.x1.len())
    }

    /// Empirical `(P(e|0), P(g|π))`.
    pub fn assignment_errors(&self) -> (T, T) {
        let e0 = self.x0.iter().filter(|x| threshold_decide(**x, self.threshold) == QubitState::Excited);
        let g1 = self.x1.iter().filter(|x| threshold_decide(**x, self.threshold) == QubitState::Ground);
        (
            ratio(e0.count(), self.x0.len()),
            ratio(g1.count(), self.x1.len()),
        )
    }

    /// Columns `prep, x_measured`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["prep", "x_measured"])?;
        for (label, xs) in [("0", &self.x0), ("pi", &self.x1)] {
            for x in xs {
                w.write_record(&[label.to_string(), x.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn ratio<T: Real>(k: usize, n: usize) -> T {
    T::from_usize_lossy(k) / T::from_usize_lossy(n.max(1))
}

/// `F_r = 1 − P(e|0) − P(g|π)` with its binomial standard error.
pub fn readout_fidelity<T: Real>(hist: &HistogramPair<T>) -> Result<(T, T)> {
    let (n0, n1) = hist.counts();
    if n0 == 0 || n1 == 0 {
        return Err(Error::Precondition("empty histogram".into()));
    }
    if n0 < MIN_SHOTS_PER_PREP || n1 < MIN_SHOTS_PER_PREP {
        return Err(Error::Precondition(format!(
            "need at least {MIN_SHOTS_PER_PREP} shots per preparation, got {n0} and {n1}"
        )));
    }
    if !hist.threshold.is_finite() {
        return Err(Error::Domain("threshold must be finite".into()));
    }
    let (p, q) = hist.assignment_errors();
    let var = p * (T::one() - p) / T::from_usize_lossy(n0) + q * (T::one() - q) / T::from_usize_lossy(n1);
    Ok((T::one() - p - q, var.sqrt()))
}

/// Threshold minimising `P(e|0) + P(g|π)`, placed at the midpoint of the
/// optimal gap in the merged sorted sample. Among several equally good gaps
/// the median one is taken.
pub fn choose_threshold<T: Real>(hist: &HistogramPair<T>) -> T {
    let (n0, n1) = hist.counts();
    if n0 == 0 || n1 == 0 {
        return T::zero();
    }
    let mut merged: Vec<(T, bool)> = hist
        .x0
        .iter()
        .map(|x| (*x, false))
        .chain(hist.x1.iter().map(|x| (*x, true)))
        .collect();
    merged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite shots"));
    let (w0, w1) = (1.0 / n0 as f64, 1.0 / n1 as f64);
    // Threshold below everything: every prep-0 shot reads e, no prep-π shot reads g.
    let mut err = 1.0;
    let mut best = f64::INFINITY;
    let mut gaps: Vec<usize> = Vec::new();
    let mut candidates = |i: usize, err: f64, gaps: &mut Vec<usize>| {
        if err < best - 1e-12 {
            best = err;
            gaps.clear();
            gaps.push(i);
        } else if (err - best).abs() <= 1e-12 {
            gaps.push(i);
        }
    };
    // gap index i means the threshold sits just above merged[i - 1].
    candidates(0, err, &mut gaps);
    for i in 0..merged.len() {
        err += if merged[i].1 { w1 } else { -w0 };
        let distinct = i + 1 == merged.len() || merged[i + 1].0 > merged[i].0;
        if distinct {
            candidates(i + 1, err, &mut gaps);
        }
    }
    let i = gaps[gaps.len() / 2];
    let one = T::one();
    match i {
        0 => merged[0].0 - one,
        i if i == merged.len() => merged[i - 1].0 + one,
        i => (merged[i - 1].0 + merged[i].0) / T::lit(2.0),
    }
}
