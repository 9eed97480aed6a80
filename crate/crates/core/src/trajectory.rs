//! Uniformly sampled scalar time series and their `t,value` CSV form.

use std::io::{Read, Write};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Rng;

/// Which experiment a trajectory records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryKind {
    /// Ball height above the floor during a drop test.
    DropHeight,
    /// Distance travelled during a roll test.
    RollDisplacement,
}

/// Samples `values[i]` taken at `t = i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory, checking the sampling interval and that every
    /// sample is finite. Physical invariants are left to [`Trajectory::check_physical`]
    /// since measured series routinely violate them by noise.
    pub fn new(kind: TrajectoryKind, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sampling interval must be positive, got {dt}")));
        }
        if values.is_empty() {
            return Err(invalid("trajectory has no samples"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("sample {i} is not finite ({v})")));
        }
        Ok(Self { kind, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.values.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }

    /// max - min of the samples.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    /// Heights must be non-negative; displacements must never decrease.
    pub fn check_physical(&self) -> Result<()> {
        match self.kind {
            TrajectoryKind::DropHeight => {
                if let Some((i, v)) = self.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
                    return Err(invalid(format!("drop height {v} at sample {i} is negative")));
                }
            }
            TrajectoryKind::RollDisplacement => {
                if let Some(i) = (1..self.values.len()).find(|&i| self.values[i] < self.values[i - 1]) {
                    return Err(invalid(format!("roll displacement decreases at sample {i}")));
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (t, v) in self.times().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `t,value` CSV. The sampling interval is inferred from the
    /// time column, which must start at 0 and be uniformly spaced.
    pub fn read_csv<R: Read>(reader: R, kind: TrajectoryKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::Parse(format!(
                "expected header `t,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record[i].trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("row {}: `{}`: {e}", row + 1, &record[i]))
                })
            };
            times.push(parse(0)?);
            values.push(parse(1)?);
        }
        if values.len() < 2 {
            return Err(Error::Parse(format!(
                "need at least two rows to infer the sampling interval, found {}",
                values.len()
            )));
        }
        if times[0].abs() > 1e-12 {
            return Err(Error::Parse(format!("time column must start at 0, found {}", times[0])));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Parse(format!("non-increasing time column (dt = {dt})")));
        }
        for (i, t) in times.iter().enumerate() {
            let expected = i as f64 * dt;
            if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::Parse(format!(
                    "row {}: time {t} breaks uniform spacing (expected {expected})",
                    i + 1
                )));
            }
        }
        Trajectory::new(kind, dt, values)
    }

    /// Copy with independent `N(0, std^2)` noise added to every sample.
    pub fn with_measurement_noise(&self, std: f64, rng: &mut Rng) -> Result<Self> {
        if !(std.is_finite() && std >= 0.0) {
            return Err(invalid(format!("noise std must be finite and non-negative, got {std}")));
        }
        let normal = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
        let values = self.values.iter().map(|v| v + normal.sample(rng)).collect();
        Trajectory::new(self.kind, self.dt, values)
    }
}

/// Pointwise mean and standard deviation of repeated recordings.
#[derive(Debug, Clone)]
pub struct RepeatedTrajectory {
    pub mean: Trajectory,
    pub std_dev: Vec<f64>,
}

/// Averages repeated experiments sample by sample. All inputs must share
/// kind, interval and length. The standard deviation uses the n-1 divisor
/// and is zero for a single recording.
pub fn average_repeats(repeats: &[Trajectory]) -> Result<RepeatedTrajectory> {
    let first = repeats.first().ok_or_else(|| invalid("no trajectories to average"))?;
    for (i, t) in repeats.iter().enumerate().skip(1) {
        if t.kind != first.kind || t.len() != first.len() || (t.dt - first.dt).abs() > 1e-12 {
            return Err(invalid(format!("repeat {i} does not match the first recording's shape")));
        }
    }
    let n = repeats.len() as f64;
    let mut mean = vec![0.0; first.len()];
    let mut std_dev = vec![0.0; first.len()];
    for i in 0..first.len() {
        let m = repeats.iter().map(|t| t.values[i]).sum::<f64>() / n;
        mean[i] = m;
        if repeats.len() > 1 {
            let ss: f64 = repeats.iter().map(|t| (t.values[i] - m).powi(2)).sum();
            std_dev[i] = (ss / (n - 1.0)).sqrt();
        }
    }
    Ok(RepeatedTrajectory {
        mean: Trajectory::new(first.kind, first.dt, mean)?,
        std_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drop(values: Vec<f64>) -> Trajectory {
        Trajectory::new(TrajectoryKind::DropHeight, 0.1, values).unwrap()
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let t = drop(vec![1.0, 0.950_949_999_999_999_9, 0.803_8, 1.0 / 3.0]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n0,1\n0.1,"));
        let back = Trajectory::read_csv(buf.as_slice(), TrajectoryKind::DropHeight).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn truncated_csv_is_a_parse_error() {
        let err = Trajectory::read_csv("t,value\n0,1\n0.1\n".as_bytes(), TrajectoryKind::DropHeight)
            .unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err:?}");
        let err = Trajectory::read_csv("t,value\n0,1\n".as_bytes(), TrajectoryKind::DropHeight)
            .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn rejects_bad_header_and_uneven_spacing() {
        assert!(Trajectory::read_csv("time,h\n0,1\n0.1,1\n".as_bytes(), TrajectoryKind::DropHeight).is_err());
        assert!(Trajectory::read_csv("t,value\n0,1\n0.1,1\n0.25,1\n".as_bytes(), TrajectoryKind::DropHeight).is_err());
    }

    #[test]
    fn physical_checks() {
        assert!(drop(vec![1.0, 0.0, -0.01]).check_physical().is_err());
        let roll = Trajectory::new(TrajectoryKind::RollDisplacement, 0.1, vec![0.0, 0.2, 0.1]).unwrap();
        assert!(roll.check_physical().is_err());
    }

    #[test]
    fn measurement_noise() {
        let t = Trajectory::new(TrajectoryKind::DropHeight, 0.1, vec![1.0; 2000]).unwrap();
        let same = t.with_measurement_noise(0.0, &mut crate::seeded_rng(1)).unwrap();
        assert_eq!(same, t);
        let a = t.with_measurement_noise(0.01, &mut crate::seeded_rng(1)).unwrap();
        let b = t.with_measurement_noise(0.01, &mut crate::seeded_rng(1)).unwrap();
        assert_eq!(a, b);
        let var = a.values.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / 2000.0;
        assert!((var.sqrt() - 0.01).abs() < 0.001);
        assert!(t.with_measurement_noise(-1.0, &mut crate::seeded_rng(1)).is_err());
    }

    #[test]
    fn averaging_repeats() {
        let avg = average_repeats(&[drop(vec![1.0, 2.0]), drop(vec![3.0, 2.0])]).unwrap();
        assert_eq!(avg.mean.values, vec![2.0, 2.0]);
        assert!((avg.std_dev[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(avg.std_dev[1], 0.0);
        assert!(average_repeats(&[drop(vec![1.0]), drop(vec![1.0, 2.0])]).is_err());
        assert!(average_repeats(&[]).is_err());
    }
}
