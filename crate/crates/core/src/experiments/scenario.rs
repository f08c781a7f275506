//! Fading presets and the PNC-versus-CFNC reproduction runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::channel::FadingProfile;

use super::report::{emit_csv, emit_plot_script, metadata};
use super::{run_sweep, DecoderKind, ExperimentError, SepCurve, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Every link at 0 dB.
    Equal,
    /// A→R and B→R at 10 dB, the rest at 0 dB.
    SrStrong,
    /// R→D at 10 dB, the rest at 0 dB.
    RdStrong,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Equal, Scenario::SrStrong, Scenario::RdStrong];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Equal => "equal",
            Scenario::SrStrong => "sr-strong",
            Scenario::RdStrong => "rd-strong",
        }
    }

    pub fn profile(self) -> FadingProfile {
        let (ar, br, rd) = match self {
            Scenario::Equal => (0.0, 0.0, 0.0),
            Scenario::SrStrong => (10.0, 10.0, 0.0),
            Scenario::RdStrong => (0.0, 0.0, 10.0),
        };
        FadingProfile::from_db(ar, br, 0.0, 0.0, rd).expect("finite presets")
    }

    /// High-SNR gain of PNC over CFNC reported for this profile, in dB.
    pub fn reported_gain_db(self) -> f64 {
        match self {
            Scenario::Equal => 3.3,
            Scenario::SrStrong => 3.0,
            Scenario::RdStrong => 6.5,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" => Ok(Scenario::Equal),
            "sr-strong" | "sr" => Ok(Scenario::SrStrong),
            "rd-strong" | "rd" => Ok(Scenario::RdStrong),
            other => Err(format!(
                "unknown scenario '{other}', expected equal, sr-strong or rd-strong"
            )),
        }
    }
}

/// SNR (dB) at which the curve first falls to `target`, interpolating
/// `log10(SEP)` linearly between the bracketing points.
pub fn snr_at_sep(curve: &SepCurve, target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.sep_joint() > 0.0)
        .map(|p| (p.snr_db, p.sep_joint()))
        .collect();
    for w in pts.windows(2) {
        let ((x0, p0), (x1, p1)) = (w[0], w[1]);
        if p0 >= target && p1 <= target {
            let (l0, l1, lt) = (p0.log10(), p1.log10(), target.log10());
            if l0 == l1 {
                return Some(x0);
            }
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub scenario: Scenario,
    pub pnc: SepCurve,
    pub naive: SepCurve,
    pub cfnc: SepCurve,
    /// Reference SEP used for the gap, and the measured gap in dB.
    pub gap: Option<(f64, f64)>,
}

impl ReproduceReport {
    /// `(snr_db, pnc, cfnc)` wherever both SEPs are below `threshold`.
    pub fn comparable_points(&self, threshold: f64) -> Vec<(f64, f64, f64)> {
        self.pnc
            .points
            .iter()
            .zip(&self.cfnc.points)
            .filter(|(p, c)| p.sep_joint() < threshold && c.sep_joint() < threshold)
            .map(|(p, c)| (p.snr_db, p.sep_joint(), c.sep_joint()))
            .collect()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("scenario {}\n", self.scenario);
        s.push_str("snr_db  sep_pnc       sep_naive     sep_cfnc\n");
        for ((p, n), c) in self.pnc.points.iter().zip(&self.naive.points).zip(&self.cfnc.points) {
            s.push_str(&format!(
                "{:6.1}  {:<12.4e}  {:<12.4e}  {:<12.4e}\n",
                p.snr_db,
                p.sep_joint(),
                n.sep_joint(),
                c.sep_joint()
            ));
        }
        match self.gap {
            Some((target, gap)) => s.push_str(&format!(
                "measured PNC gain over CFNC at SEP {target:.0e}: {gap:.2} dB (reported: {:.1} dB)\n",
                self.scenario.reported_gain_db()
            )),
            None => s.push_str(&format!(
                "measured PNC gain over CFNC: not enough range (reported: {:.1} dB)\n",
                self.scenario.reported_gain_db()
            )),
        }
        s
    }
}

/// Gap at the lowest decade both curves reach, capped at 1e-3.
fn measure_gap(pnc: &SepCurve, cfnc: &SepCurve) -> Option<(f64, f64)> {
    let floor = |c: &SepCurve| {
        c.points
            .iter()
            .map(|p| p.sep_joint())
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    };
    let reachable = floor(pnc).max(floor(cfnc));
    let mut target = 1e-3f64;
    while target < reachable && target < 1.0 {
        target *= 10.0;
    }
    let gap = snr_at_sep(cfnc, target)? - snr_at_sep(pnc, target)?;
    Some((target, gap))
}

/// Runs the fast PNC decoder, the naive decoder and the CFNC baseline on the
/// same frames of `scenario`, optionally writing CSVs and a plot script into
/// `out_dir`.
pub fn reproduce(
    scenario: Scenario,
    base: &SweepSpec,
    out_dir: Option<&Path>,
) -> Result<ReproduceReport, ExperimentError> {
    let spec_for = |decoder| SweepSpec {
        decoder,
        profile: scenario.profile(),
        ..base.clone()
    };
    let mut curves = Vec::new();
    for decoder in [DecoderKind::Fast, DecoderKind::MinEuclid, DecoderKind::Cfnc] {
        let spec = spec_for(decoder);
        let curve = run_sweep(&spec)?;
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let mut meta = metadata(&spec);
            meta.push(("scenario".to_string(), scenario.name().to_string()));
            emit_csv(&curve, &meta, &dir.join(format!("{}_{}.csv", scenario.name(), decoder.name())))?;
        }
        curves.push(curve);
    }
    let cfnc = curves.pop().expect("three curves");
    let naive = curves.pop().expect("three curves");
    let pnc = curves.pop().expect("three curves");
    if let Some(dir) = out_dir {
        let files = [
            ("PNC (fast decoder)", DecoderKind::Fast),
            ("PNC (min-distance decoder)", DecoderKind::MinEuclid),
            ("CFNC baseline", DecoderKind::Cfnc),
        ]
        .map(|(label, d)| (label.to_string(), format!("{}_{}.csv", scenario.name(), d.name())));
        emit_plot_script(
            &files,
            &format!("4-PSK, {} profile", scenario.name()),
            &dir.join(format!("plot_{}.py", scenario.name())),
        )?;
    }
    let gap = measure_gap(&pnc, &cfnc);
    Ok(ReproduceReport {
        scenario,
        pnc,
        naive,
        cfnc,
        gap,
    })
}
