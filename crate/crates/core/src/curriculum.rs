//! Failure-driven sampling of episode start points over motion index and
//! phase bin.

use std::io::{Read, Write};

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::Rng;

/// Default number of phase bins per motion.
pub const DEFAULT_PHASE_BINS: usize = 10;

/// Failure counts over `motions x bins`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureHistogram {
    motions: usize,
    bins: usize,
    counts: Vec<f64>,
    /// Pseudo-count added to every cell when sampling.
    pub smoothing_alpha: f64,
    /// Multiplier applied to all counts before each recorded failure; 1 disables decay.
    pub decay: f64,
}

impl FailureHistogram {
    pub fn new(motions: usize, bins: usize) -> Result<Self> {
        Self::with_counts(motions, bins, vec![0.0; motions * bins])
    }

    pub fn with_counts(motions: usize, bins: usize, counts: Vec<f64>) -> Result<Self> {
        if motions == 0 || bins == 0 {
            return Err(invalid("histogram needs at least one motion and one phase bin"));
        }
        if counts.len() != motions * bins {
            return Err(invalid(format!(
                "expected {} counts, got {}",
                motions * bins,
                counts.len()
            )));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(invalid("failure counts must be finite and non-negative"));
        }
        Ok(Self {
            motions,
            bins,
            counts,
            smoothing_alpha: 1.0,
            decay: 1.0,
        })
    }

    pub fn with_smoothing(mut self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!("smoothing must be non-negative, got {alpha}")));
        }
        self.smoothing_alpha = alpha;
        Ok(self)
    }

    pub fn with_decay(mut self, decay: f64) -> Result<Self> {
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(invalid(format!("decay must lie in (0, 1], got {decay}")));
        }
        self.decay = decay;
        Ok(self)
    }

    pub fn motions(&self) -> usize {
        self.motions
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn count(&self, motion: usize, bin: usize) -> f64 {
        self.counts[motion * self.bins + bin]
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    fn index(&self, motion: usize, bin: usize) -> Result<usize> {
        if motion >= self.motions || bin >= self.bins {
            return Err(invalid(format!(
                "cell ({motion}, {bin}) outside a {}x{} histogram",
                self.motions, self.bins
            )));
        }
        Ok(motion * self.bins + bin)
    }

    /// Decays all counts, then adds one failure at `(motion, bin)`.
    pub fn record_failure(&mut self, motion: usize, bin: usize) -> Result<()> {
        let idx = self.index(motion, bin)?;
        if self.decay < 1.0 {
            for c in &mut self.counts {
                *c *= self.decay;
            }
        }
        self.counts[idx] += 1.0;
        Ok(())
    }

    /// Phase bin containing `phase` in `[0, 1)`.
    pub fn bin_of(&self, phase: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&phase) {
            return Err(invalid(format!("phase must lie in [0, 1), got {phase}")));
        }
        Ok(((phase * self.bins as f64) as usize).min(self.bins - 1))
    }

    /// Row-major cell probabilities `(count + alpha) / sum(count + alpha)`.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        let total: f64 = self.counts.iter().map(|c| c + self.smoothing_alpha).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState(
                "all counts are zero and smoothing is disabled".into(),
            ));
        }
        Ok(self
            .counts
            .iter()
            .map(|c| (c + self.smoothing_alpha) / total)
            .collect())
    }

    /// Draws `(motion, phase)`: a cell with probability proportional to its
    /// smoothed count, then a phase uniformly inside that cell's bin.
    pub fn sample_start(&self, rng: &mut Rng) -> Result<(usize, f64)> {
        let probs = self.probabilities()?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut cell = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                cell = i;
                break;
            }
        }
        // guard against rounding in the cumulative sum landing on a zero-mass cell
        while probs[cell] == 0.0 && cell > 0 {
            cell -= 1;
        }
        let (motion, bin) = (cell / self.bins, cell % self.bins);
        let width = 1.0 / self.bins as f64;
        let lo = bin as f64 * width;
        let mut phase = lo + rng.random::<f64>() * width;
        let hi = (bin + 1) as f64 * width;
        if phase >= hi {
            phase = hi.next_down();
        }
        Ok((motion, phase.max(lo)))
    }

    /// Writes counts as `motions` rows of `bins` comma-separated values, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for row in self.counts.chunks(self.bins) {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`FailureHistogram::write_csv`]; smoothing and decay reset to defaults.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut counts = Vec::new();
        let mut bins = None;
        let mut motions = 0;
        for record in r.records() {
            let record = record?;
            if *bins.get_or_insert(record.len()) != record.len() {
                return Err(Error::Parse(format!("row {} has a different column count", motions + 1)));
            }
            for field in record.iter() {
                counts.push(field.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("row {}: `{field}`: {e}", motions + 1))
                })?);
            }
            motions += 1;
        }
        Self::with_counts(motions, bins.unwrap_or(0), counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn fresh_record() {
        let mut h = FailureHistogram::new(2, 2).unwrap();
        h.record_failure(0, 0).unwrap();
        assert_eq!(h.counts(), &[1.0, 0.0, 0.0, 0.0]);
        h.record_failure(0, 0).unwrap();
        assert_eq!(h.count(0, 0), 2.0);
    }

    #[test]
    fn decay_applies_before_increment() {
        let mut h = FailureHistogram::with_counts(2, 2, vec![4.0, 0.0, 0.0, 0.0])
            .unwrap()
            .with_decay(0.5)
            .unwrap();
        h.record_failure(1, 1).unwrap();
        assert_eq!(h.counts(), &[2.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range_cells_are_rejected() {
        let mut h = FailureHistogram::new(2, 3).unwrap();
        assert!(h.record_failure(2, 0).is_err());
        assert!(h.record_failure(0, 3).is_err());
        assert!(FailureHistogram::new(0, 3).is_err());
        assert!(FailureHistogram::with_counts(1, 2, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn smoothed_probabilities() {
        let h = FailureHistogram::with_counts(2, 2, vec![9.0, 0.0, 0.0, 0.0]).unwrap();
        let p = h.probabilities().unwrap();
        let expected = [10.0 / 13.0, 1.0 / 13.0, 1.0 / 13.0, 1.0 / 13.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_mass_is_invalid_state() {
        let h = FailureHistogram::new(2, 2).unwrap().with_smoothing(0.0).unwrap();
        assert!(matches!(h.probabilities(), Err(Error::InvalidState(_))));
        assert!(h.sample_start(&mut seeded_rng(0)).is_err());
    }

    #[test]
    fn unsmoothed_sampling_never_hits_empty_cells() {
        let h = FailureHistogram::with_counts(1, 4, vec![0.0, 3.0, 0.0, 1.0])
            .unwrap()
            .with_smoothing(0.0)
            .unwrap();
        let mut rng = seeded_rng(5);
        for _ in 0..10_000 {
            let (m, phase) = h.sample_start(&mut rng).unwrap();
            assert_eq!(m, 0);
            let bin = h.bin_of(phase).unwrap();
            assert!(bin == 1 || bin == 3);
        }
    }

    #[test]
    fn phase_stays_inside_its_bin() {
        let h = FailureHistogram::new(3, DEFAULT_PHASE_BINS).unwrap();
        let mut rng = seeded_rng(11);
        for _ in 0..10_000 {
            let (m, phase) = h.sample_start(&mut rng).unwrap();
            assert!(m < 3);
            assert!((0.0..1.0).contains(&phase));
        }
    }

    #[test]
    fn csv_round_trip() {
        let h = FailureHistogram::with_counts(2, 3, vec![1.0, 0.5, 0.0, 2.25, 0.0, 7.0]).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1,0.5,0\n2.25,0,7\n");
        assert_eq!(FailureHistogram::read_csv(buf.as_slice()).unwrap(), h);
        assert!(FailureHistogram::read_csv("1,2\n3\n".as_bytes()).is_err());
    }
}
