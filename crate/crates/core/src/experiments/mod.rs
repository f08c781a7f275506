//! Monte Carlo engine: frame simulation, SNR sweeps and their statistics.
//!
//! Every trial owns its random stream, keyed by `(seed, SNR point, trial
//! index)`, and sweeps aggregate integer counters only. Results therefore do
//! not depend on the rayon worker count or on scheduling.

pub mod config;
pub mod equiv;
pub mod fit;
pub mod report;
pub mod scenario;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::cfnc::{cfnc_run_frame, CfncConfig, CfncError};
use crate::channel::{phase1, phase2, sample_channel, ChannelError, ChannelRealization, FadingProfile};
use crate::destination::{
    fast_decode, min_euclidean_decode, novel_decode_exhaustive, Branch, DecodeInput, DecodeOutput,
    DestinationError,
};
use crate::netcode::{LatinSquare, MapKind, NetcodeError};
use crate::numerics::{Complex, RngStream, StreamRng};
use crate::relay::{relay_decide, RelayDecision};
use crate::scheme::{SchemeConstants, SchemeError};
use crate::signal::{SignalError, SignalSet};

pub use fit::{estimate_diversity, fit_slope, DiversityFit, FitError, Quantity};

/// Trials are processed in fixed blocks; the early-stop test runs between
/// blocks so the stopping point is scheduling-independent.
pub const CHUNK: u64 = 8192;

/// Default early-stop threshold on joint error events per point.
pub const DEFAULT_MAX_ERRORS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Netcode(#[from] NetcodeError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Destination(#[from] DestinationError),
    #[error(transparent)]
    Cfnc(#[from] CfncError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    MinEuclid,
    NovelExhaustive,
    Fast,
    Cfnc,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::MinEuclid => "min-euclid",
            DecoderKind::NovelExhaustive => "novel-exhaustive",
            DecoderKind::Fast => "fast",
            DecoderKind::Cfnc => "cfnc",
        }
    }

    fn needs_log_correction(self) -> bool {
        matches!(self, DecoderKind::NovelExhaustive | DecoderKind::Fast)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "min-euclid" | "naive" => Ok(DecoderKind::MinEuclid),
            "novel-exhaustive" | "exhaustive" => Ok(DecoderKind::NovelExhaustive),
            "fast" => Ok(DecoderKind::Fast),
            "cfnc" => Ok(DecoderKind::Cfnc),
            other => Err(format!(
                "unknown decoder '{other}', expected min-euclid, novel-exhaustive, fast or cfnc"
            )),
        }
    }
}

/// Everything that defines a sweep. `constants` supplies `a, b, c, d`; its
/// `E_s` is replaced at each SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub snr_points_db: Vec<f64>,
    pub trials_per_point: u64,
    pub profile: FadingProfile,
    pub m: usize,
    pub map: MapKind,
    pub decoder: DecoderKind,
    pub constants: SchemeConstants,
    pub seed: u64,
    /// CFNC combining coefficient; ignored by the PNC decoders.
    pub theta: Complex,
    /// Stop a point once this many joint errors are seen; `None` runs the full
    /// budget.
    pub max_errors: Option<u64>,
    pub log_weight: f64,
}

impl SweepSpec {
    /// 4-PSK, modulo map, fast decoder, equal variances, 0–40 dB in 5 dB steps.
    pub fn example_default() -> Self {
        Self {
            snr_points_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
            trials_per_point: 1_000_000,
            profile: FadingProfile::equal(),
            m: 4,
            map: MapKind::Modulo,
            decoder: DecoderKind::Fast,
            constants: SchemeConstants::example1(1.0).expect("valid constants"),
            seed: 1,
            theta: Complex::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            max_errors: Some(DEFAULT_MAX_ERRORS),
            log_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials_per_point == 0 {
            return Err(ExperimentError::InvalidSpec("trials_per_point must be >= 1".into()));
        }
        if self.snr_points_db.is_empty() {
            return Err(ExperimentError::InvalidSpec("no SNR points".into()));
        }
        if self.snr_points_db.iter().any(|x| !x.is_finite()) {
            return Err(ExperimentError::InvalidSpec("SNR points must be finite".into()));
        }
        if self.snr_points_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExperimentError::InvalidSpec("SNR points must be strictly ascending".into()));
        }
        if self.decoder.needs_log_correction() && self.snr_points_db[0] < 0.0 {
            return Err(ExperimentError::InvalidSpec(format!(
                "decoder {} requires every SNR point >= 0 dB",
                self.decoder
            )));
        }
        if self.max_errors == Some(0) {
            return Err(ExperimentError::InvalidSpec("max_errors must be >= 1 when set".into()));
        }
        if !self.log_weight.is_finite() || self.log_weight < 0.0 {
            return Err(ExperimentError::InvalidSpec("log_weight must be finite and >= 0".into()));
        }
        FrameRunner::new(self)?;
        Ok(())
    }
}

/// Outcome of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameResult {
    pub sent: (usize, usize),
    pub decoded: DecodeOutput,
    pub relay_pair: (usize, usize),
    /// The relay transmitted a different symbol than it would have with a
    /// correct decode.
    pub relay_nc_error: bool,
}

impl FrameResult {
    pub fn joint_error(&self) -> bool {
        (self.decoded.xa_idx, self.decoded.xb_idx) != self.sent
    }

    pub fn error_a(&self) -> bool {
        self.decoded.xa_idx != self.sent.0
    }

    pub fn error_b(&self) -> bool {
        self.decoded.xb_idx != self.sent.1
    }
}

/// Per-sweep immutable state: constellation, map and baseline config.
#[derive(Debug, Clone)]
pub struct FrameRunner {
    spec_decoder: DecoderKind,
    profile: FadingProfile,
    constants: SchemeConstants,
    log_weight: f64,
    signal: SignalSet,
    map: LatinSquare,
    cfnc: Option<CfncConfig>,
}

impl FrameRunner {
    pub fn new(spec: &SweepSpec) -> Result<Self, ExperimentError> {
        let signal = SignalSet::psk(spec.m)?;
        let map = spec.map.build(spec.m)?;
        let cfnc = match spec.decoder {
            DecoderKind::Cfnc => Some(CfncConfig::new(&signal, spec.theta)?),
            _ => None,
        };
        if spec.decoder == DecoderKind::Fast && crate::scheme::fast_route(&spec.constants).is_none() {
            return Err(DestinationError::NotFastDecodable.into());
        }
        Ok(Self {
            spec_decoder: spec.decoder,
            profile: spec.profile,
            constants: spec.constants,
            log_weight: spec.log_weight,
            signal,
            map,
            cfnc,
        })
    }

    pub fn signal(&self) -> &SignalSet {
        &self.signal
    }

    pub fn map(&self) -> &LatinSquare {
        &self.map
    }

    /// Simulates one frame at `snr_db`.
    ///
    /// Draw order: A's index, B's index, the five fades, then `z_R`, `z_D1`,
    /// `z_D2`.
    pub fn run(&self, snr_db: f64, rng: &mut StreamRng) -> Result<FrameResult, ExperimentError> {
        let k = self.constants.with_es(crate::channel::db_to_linear(snr_db))?;
        let m = self.signal.m();
        let sent = (rng.uniform_index(m), rng.uniform_index(m));
        let h = sample_channel(rng, &self.profile);
        let z_r = rng.gaussian_unchecked(1.0);
        let z_d1 = rng.gaussian_unchecked(1.0);
        let z_d2 = rng.gaussian_unchecked(1.0);

        if let Some(cfg) = &self.cfnc {
            let frame = cfnc_run_frame(&k, &h, &self.signal, cfg, sent.0, sent.1, z_r, z_d1, z_d2);
            return Ok(FrameResult {
                sent,
                decoded: frame.decoded,
                relay_pair: frame.relay_pair,
                relay_nc_error: frame.relay_pair != sent,
            });
        }

        let obs = self.pnc_frame(k, sent, h, [z_r, z_d1, z_d2]);
        let relay = obs.relay;
        let relay_nc_error = obs.relay_nc_error(&self.map);
        let input = obs.input(self)?;
        let decoded = match self.spec_decoder {
            DecoderKind::MinEuclid => min_euclidean_decode(&input),
            DecoderKind::NovelExhaustive => novel_decode_exhaustive(&input)?,
            DecoderKind::Fast => fast_decode(&input)?,
            DecoderKind::Cfnc => unreachable!("handled above"),
        };
        Ok(FrameResult {
            sent,
            decoded,
            relay_pair: (relay.xa_idx, relay.xb_idx),
            relay_nc_error,
        })
    }

    /// Draws one PNC frame and runs it through the relay, without any
    /// destination decoding. Same draws as [`FrameRunner::run`].
    pub fn observe(&self, snr_db: f64, rng: &mut StreamRng) -> Result<Observation, ExperimentError> {
        let k = self.constants.with_es(crate::channel::db_to_linear(snr_db))?;
        let m = self.signal.m();
        let sent = (rng.uniform_index(m), rng.uniform_index(m));
        let h = sample_channel(rng, &self.profile);
        let z = [
            rng.gaussian_unchecked(1.0),
            rng.gaussian_unchecked(1.0),
            rng.gaussian_unchecked(1.0),
        ];
        Ok(self.pnc_frame(k, sent, h, z))
    }

    fn pnc_frame(
        &self,
        k: SchemeConstants,
        sent: (usize, usize),
        h: ChannelRealization,
        z: [Complex; 3],
    ) -> Observation {
        let p = self.signal.points();
        let (xa, xb) = (p[sent.0], p[sent.1]);
        let (y_r, y_d1) = phase1(&k, &h, xa, xb, z[0], z[1]);
        let relay = relay_decide(y_r, &h, &k, &self.signal, &self.map);
        let y_d2 = phase2(&k, &h, xa, xb, relay.x_r, z[2]);
        Observation {
            sent,
            k,
            h,
            relay,
            y_d1,
            y_d2,
        }
    }
}

/// One PNC frame as seen by the destination, plus the ground truth.
#[derive(Debug, Clone, Copy)]
pub struct Observation {
    pub sent: (usize, usize),
    pub k: SchemeConstants,
    pub h: ChannelRealization,
    pub relay: RelayDecision,
    pub y_d1: Complex,
    pub y_d2: Complex,
}

impl Observation {
    /// True when the relay forwarded a different network-coded symbol.
    pub fn relay_nc_error(&self, map: &LatinSquare) -> bool {
        map.cell(self.relay.xa_idx, self.relay.xb_idx) != map.cell(self.sent.0, self.sent.1)
    }

    pub fn input<'a>(&self, runner: &'a FrameRunner) -> Result<DecodeInput<'a>, ExperimentError> {
        Ok(DecodeInput::new(
            self.y_d1,
            self.y_d2,
            self.h.h_ad,
            self.h.h_bd,
            self.h.h_rd,
            self.k,
            &runner.signal,
            &runner.map,
        )?
        .with_log_weight(runner.log_weight))
    }
}

/// Convenience wrapper that builds a [`FrameRunner`] for a single frame.
pub fn run_frame(spec: &SweepSpec, snr_db: f64, rng: &mut StreamRng) -> Result<FrameResult, ExperimentError> {
    FrameRunner::new(spec)?.run(snr_db, rng)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D4_9BB1_3311_13EB);
    z ^ (z >> 31)
}

/// Stream for trial `trial` at `snr_db`. Keyed by the SNR value, so the same
/// point sees the same frames whatever grid it sits in and whichever decoder
/// runs.
pub fn trial_stream(seed: u64, snr_db: f64, trial: u64) -> RngStream {
    RngStream::new(splitmix64(seed ^ splitmix64(snr_db.to_bits())), trial)
}

/// Raw event counters for one SNR point.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct PointCounts {
    pub trials: u64,
    pub joint_errors: u64,
    pub errors_a: u64,
    pub errors_b: u64,
    pub relay_nc_errors: u64,
    /// Joint errors among frames where the relay's symbol was right.
    pub errors_relay_correct: u64,
    /// Joint errors among frames where the relay's symbol was wrong.
    pub errors_relay_wrong: u64,
    /// Frames the decoder resolved through the relay-error hypothesis.
    pub error_branch_decisions: u64,
}

impl PointCounts {
    fn record(&mut self, r: &FrameResult) {
        self.trials += 1;
        let joint = r.joint_error();
        self.joint_errors += u64::from(joint);
        self.errors_a += u64::from(r.error_a());
        self.errors_b += u64::from(r.error_b());
        self.relay_nc_errors += u64::from(r.relay_nc_error);
        if r.relay_nc_error {
            self.errors_relay_wrong += u64::from(joint);
        } else {
            self.errors_relay_correct += u64::from(joint);
        }
        self.error_branch_decisions += u64::from(r.decoded.branch == Branch::RelayError);
    }

    fn merge(mut self, o: PointCounts) -> PointCounts {
        self.trials += o.trials;
        self.joint_errors += o.joint_errors;
        self.errors_a += o.errors_a;
        self.errors_b += o.errors_b;
        self.relay_nc_errors += o.relay_nc_errors;
        self.errors_relay_correct += o.errors_relay_correct;
        self.errors_relay_wrong += o.errors_relay_wrong;
        self.error_branch_decisions += o.error_branch_decisions;
        self
    }
}

/// Statistics at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepPoint {
    pub snr_db: f64,
    pub counts: PointCounts,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl SepPoint {
    pub fn sep_joint(&self) -> f64 {
        ratio(self.counts.joint_errors, self.counts.trials).unwrap_or(0.0)
    }

    pub fn sep_a(&self) -> f64 {
        ratio(self.counts.errors_a, self.counts.trials).unwrap_or(0.0)
    }

    pub fn sep_b(&self) -> f64 {
        ratio(self.counts.errors_b, self.counts.trials).unwrap_or(0.0)
    }

    pub fn p_relay_nc_error(&self) -> f64 {
        ratio(self.counts.relay_nc_errors, self.counts.trials).unwrap_or(0.0)
    }

    /// `None` when no frame had a correct relay symbol.
    pub fn p_err_given_relay_correct(&self) -> Option<f64> {
        ratio(
            self.counts.errors_relay_correct,
            self.counts.trials - self.counts.relay_nc_errors,
        )
    }

    /// `None` when no frame had a wrong relay symbol.
    pub fn p_err_given_relay_wrong(&self) -> Option<f64> {
        ratio(self.counts.errors_relay_wrong, self.counts.relay_nc_errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SepCurve {
    pub points: Vec<SepPoint>,
}

impl SepCurve {
    pub fn point_at(&self, snr_db: f64) -> Option<&SepPoint> {
        self.points.iter().find(|p| p.snr_db == snr_db)
    }
}

/// Simulates one SNR point, in blocks of [`CHUNK`] trials.
pub fn run_point(spec: &SweepSpec, runner: &FrameRunner, snr_db: f64) -> Result<SepPoint, ExperimentError> {
    let mut counts = PointCounts::default();
    let mut start = 0u64;
    while start < spec.trials_per_point {
        let end = (start + CHUNK).min(spec.trials_per_point);
        let block = (start..end)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_stream(spec.seed, snr_db, trial).rng();
                let mut c = PointCounts::default();
                c.record(&runner.run(snr_db, &mut rng)?);
                Ok::<_, ExperimentError>(c)
            })
            .try_reduce(PointCounts::default, |a, b| Ok(a.merge(b)))?;
        counts = counts.merge(block);
        start = end;
        if spec.max_errors.is_some_and(|cap| counts.joint_errors >= cap) {
            break;
        }
    }
    Ok(SepPoint { snr_db, counts })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SepCurve, ExperimentError> {
    spec.validate()?;
    let runner = FrameRunner::new(spec)?;
    let points = spec
        .snr_points_db
        .iter()
        .map(|&snr| run_point(spec, &runner, snr))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SepCurve { points })
}

/// Runs a sweep inside a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SepCurve, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| ExperimentError::InvalidSpec(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}
