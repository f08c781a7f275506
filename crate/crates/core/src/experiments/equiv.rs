//! Frame-by-frame comparison of the fast decoder against the exhaustive one.

use rayon::prelude::*;

use crate::destination::{
    fast_decode_counted, novel_decode_exhaustive_counted, DecodeOutput, EvalCounter,
};

use super::{trial_stream, ExperimentError, FrameRunner, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub snr_db: f64,
    pub trial: u64,
    pub fast: DecodeOutput,
    pub exhaustive: DecodeOutput,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EquivReport {
    pub frames: u64,
    /// Frames whose decoded pair differs.
    pub pair_mismatches: u64,
    /// Frames whose pair agrees but whose winning branch differs.
    pub branch_mismatches: u64,
    pub fast_evaluations: u64,
    pub exhaustive_evaluations: u64,
    /// Lowest `(snr index, trial)` mismatch, if any.
    pub first_mismatch: Option<Mismatch>,
}

impl EquivReport {
    pub fn identical(&self) -> bool {
        self.pair_mismatches == 0 && self.branch_mismatches == 0
    }

    fn merge(mut self, other: EquivReport) -> EquivReport {
        self.frames += other.frames;
        self.pair_mismatches += other.pair_mismatches;
        self.branch_mismatches += other.branch_mismatches;
        self.fast_evaluations += other.fast_evaluations;
        self.exhaustive_evaluations += other.exhaustive_evaluations;
        self.first_mismatch = match (self.first_mismatch, other.first_mismatch) {
            (Some(a), Some(b)) => Some(if (b.snr_db, b.trial) < (a.snr_db, a.trial) { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

/// Runs `frames_per_point` frames at every SNR point of `spec` through both
/// decoders. The frames are the ones a sweep with the same seed would draw.
pub fn check_equivalence(spec: &SweepSpec, frames_per_point: u64) -> Result<EquivReport, ExperimentError> {
    let runner = FrameRunner::new(spec)?;
    let mut total = EquivReport::default();
    for &snr_db in &spec.snr_points_db {
        let part = (0..frames_per_point)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_stream(spec.seed, snr_db, trial).rng();
                let obs = runner.observe(snr_db, &mut rng)?;
                let input = obs.input(&runner)?;
                let mut fc = EvalCounter::default();
                let mut ec = EvalCounter::default();
                let fast = fast_decode_counted(&input, &mut fc)?;
                let exhaustive = novel_decode_exhaustive_counted(&input, &mut ec)?;
                let same_pair = (fast.xa_idx, fast.xb_idx) == (exhaustive.xa_idx, exhaustive.xb_idx);
                Ok::<_, ExperimentError>(EquivReport {
                    frames: 1,
                    pair_mismatches: u64::from(!same_pair),
                    branch_mismatches: u64::from(same_pair && fast.branch != exhaustive.branch),
                    fast_evaluations: fc.evaluations,
                    exhaustive_evaluations: ec.evaluations,
                    first_mismatch: (fast != exhaustive).then_some(Mismatch {
                        snr_db,
                        trial,
                        fast,
                        exhaustive,
                    }),
                })
            })
            .try_reduce(EquivReport::default, |a, b| Ok(a.merge(b)))?;
        total = total.merge(part);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcode::MapKind;

    #[test]
    fn small_battery_agrees() {
        let spec = SweepSpec {
            snr_points_db: vec![0.0, 20.0],
            m: 8,
            map: MapKind::Xor,
            ..SweepSpec::example_default()
        };
        let r = check_equivalence(&spec, 2_000).unwrap();
        assert_eq!(r.frames, 4_000);
        assert!(r.identical(), "{r:?}");
        assert_eq!(r.fast_evaluations, 4_000 * (3 * 64 + 8));
        assert_eq!(r.exhaustive_evaluations, 4_000 * 64 * 9);
    }
}
