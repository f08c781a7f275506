//! Destination decoders.
//!
//! Three decoders share one set of residual kernels:
//!
//! * [`min_euclidean_decode`] trusts the relay and minimises `m1`.
//! * [`novel_decode_exhaustive`] minimises `min{m1, ln(E_s) + m2}` by direct
//!   O(M³) evaluation, accounting for a wrong network-coded symbol from the
//!   relay.
//! * [`fast_decode`] computes the same decision in O(M²) by rotating the
//!   observation with the QR factor of the equivalent channel. It needs the
//!   A (or B) weight matrix to be Hurwitz–Radon orthogonal to the relay's,
//!   which makes `r13 = 0` and lets the relay-symbol search decouple from A.
//!
//! Symbols are addressed by index into the [`SignalSet`]; the relay map is a
//! grid over indices. All argmin scans run `xB` in the outer loop and `xA` in
//! the inner loop, ascending, keeping the first strict improvement. When the
//! two hypotheses give the same value for a pair, the relay-correct
//! hypothesis wins.

use thiserror::Error;

use crate::netcode::LatinSquare;
use crate::numerics::{qr_2x3_array, CMatrix, Complex};
use crate::scheme::{fast_route, FastRoute, SchemeConstants, SchemeError};
use crate::signal::SignalSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DestinationError {
    #[error("E_s = {0} is below 1 (0 dB); the log(SNR) correction would be negative")]
    EnergyBelowOne(f64),
    #[error(
        "neither W_A nor W_B is Hurwitz-Radon orthogonal to W_R; use the exhaustive decoder"
    )]
    NotFastDecodable,
    #[error("map order {map} does not match constellation size {signal}")]
    OrderMismatch { map: usize, signal: usize },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Which relay hypothesis produced the winning metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    RelayCorrect,
    RelayError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodeOutput {
    pub xa_idx: usize,
    pub xb_idx: usize,
    pub branch: Branch,
}

/// Everything the destination sees in one frame.
#[derive(Debug, Clone, Copy)]
pub struct DecodeInput<'a> {
    pub y_d1: Complex,
    pub y_d2: Complex,
    pub h_ad: Complex,
    pub h_bd: Complex,
    pub h_rd: Complex,
    pub k: SchemeConstants,
    pub s: &'a SignalSet,
    pub f: &'a LatinSquare,
    /// Multiplier on `ln(E_s)` in the relay-error branch; 1 by default.
    pub log_weight: f64,
}

impl<'a> DecodeInput<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        y_d1: Complex,
        y_d2: Complex,
        h_ad: Complex,
        h_bd: Complex,
        h_rd: Complex,
        k: SchemeConstants,
        s: &'a SignalSet,
        f: &'a LatinSquare,
    ) -> Result<Self, DestinationError> {
        if f.order() != s.m() {
            return Err(DestinationError::OrderMismatch {
                map: f.order(),
                signal: s.m(),
            });
        }
        Ok(Self {
            y_d1,
            y_d2,
            h_ad,
            h_bd,
            h_rd,
            k,
            s,
            f,
            log_weight: 1.0,
        })
    }

    pub fn with_log_weight(mut self, w: f64) -> Self {
        self.log_weight = w;
        self
    }

    /// The `log(SNR)` term added to the relay-error hypothesis.
    pub fn correction(&self) -> f64 {
        self.log_weight * self.k.es().ln()
    }

    fn require_es_at_least_one(&self) -> Result<(), DestinationError> {
        if self.k.es() < 1.0 {
            Err(DestinationError::EnergyBelowOne(self.k.es()))
        } else {
            Ok(())
        }
    }

    /// `H_eq = [[a h_AD, b h_BD, 0], [c h_AD, d h_BD, h_RD]]`.
    pub fn equivalent_channel(&self) -> CMatrix {
        let k = &self.k;
        CMatrix::from_rows([
            [k.a() * self.h_ad, k.b() * self.h_bd, Complex::new(0.0, 0.0)],
            [k.c() * self.h_ad, k.d() * self.h_bd, self.h_rd],
        ])
    }
}

/// Counts candidate-metric evaluations (one per residual computed).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct EvalCounter {
    pub evaluations: u64,
}

/// Effective per-symbol gains for the two phases, `sqrt(E_s)` folded in.
struct Gains {
    a1: Complex,
    b1: Complex,
    a2: Complex,
    b2: Complex,
    r2: Complex,
}

impl Gains {
    fn new(input: &DecodeInput<'_>) -> Self {
        let g = input.k.sqrt_es();
        let k = &input.k;
        Self {
            a1: input.h_ad * k.a() * g,
            b1: input.h_bd * k.b() * g,
            a2: input.h_ad * k.c() * g,
            b2: input.h_bd * k.d() * g,
            r2: input.h_rd * g,
        }
    }

    #[inline]
    fn phase1(&self, y: Complex, xa: Complex, xb: Complex) -> f64 {
        (y - self.a1 * xa - self.b1 * xb).norm_sqr()
    }

    #[inline]
    fn phase2(&self, y: Complex, xa: Complex, xb: Complex, xr: Complex) -> f64 {
        (y - self.a2 * xa - self.b2 * xb - self.r2 * xr).norm_sqr()
    }
}

/// Relay-correct metric for the index pair.
pub fn metric_m1(input: &DecodeInput<'_>, xa: usize, xb: usize) -> f64 {
    let g = Gains::new(input);
    let p = input.s.points();
    let fr = input.f.cell(xa, xb);
    g.phase1(input.y_d1, p[xa], p[xb]) + g.phase2(input.y_d2, p[xa], p[xb], p[fr])
}

/// Relay-error metric: phase-2 minimised over relay symbols other than
/// `f(xa, xb)`.
pub fn metric_m2(input: &DecodeInput<'_>, xa: usize, xb: usize) -> f64 {
    let g = Gains::new(input);
    let p = input.s.points();
    let fr = input.f.cell(xa, xb);
    let inner = p
        .iter()
        .enumerate()
        .filter(|&(ir, _)| ir != fr)
        .map(|(_, &xr)| g.phase2(input.y_d2, p[xa], p[xb], xr))
        .fold(f64::INFINITY, f64::min);
    g.phase1(input.y_d1, p[xa], p[xb]) + inner
}

/// As [`metric_m2`] but minimised over every relay symbol.
pub fn metric_m3(input: &DecodeInput<'_>, xa: usize, xb: usize) -> f64 {
    let g = Gains::new(input);
    let p = input.s.points();
    let inner = p
        .iter()
        .map(|&xr| g.phase2(input.y_d2, p[xa], p[xb], xr))
        .fold(f64::INFINITY, f64::min);
    g.phase1(input.y_d1, p[xa], p[xb]) + inner
}

/// Both residuals for an explicit relay symbol, plus `ln(E_s)`.
pub fn metric_m4(input: &DecodeInput<'_>, xa: usize, xb: usize, xr: Complex) -> f64 {
    let g = Gains::new(input);
    let p = input.s.points();
    g.phase1(input.y_d1, p[xa], p[xb]) + g.phase2(input.y_d2, p[xa], p[xb], xr) + input.correction()
}

/// Minimum squared Euclidean distance decoder that assumes the relay is
/// always right.
pub fn min_euclidean_decode(input: &DecodeInput<'_>) -> DecodeOutput {
    let g = Gains::new(input);
    let p = input.s.points();
    let m = p.len();
    let mut best = (0, 0);
    let mut best_metric = f64::INFINITY;
    for ib in 0..m {
        for ia in 0..m {
            let fr = input.f.cell(ia, ib);
            let metric = g.phase1(input.y_d1, p[ia], p[ib]) + g.phase2(input.y_d2, p[ia], p[ib], p[fr]);
            if metric < best_metric {
                best_metric = metric;
                best = (ia, ib);
            }
        }
    }
    DecodeOutput {
        xa_idx: best.0,
        xb_idx: best.1,
        branch: Branch::RelayCorrect,
    }
}

pub fn novel_decode_exhaustive(input: &DecodeInput<'_>) -> Result<DecodeOutput, DestinationError> {
    novel_decode_exhaustive_counted(input, &mut EvalCounter::default())
}

/// Direct evaluation of `min{m1, ln(E_s) + m2}` over all pairs: M phase-2
/// residuals per pair, O(M³) in total.
pub fn novel_decode_exhaustive_counted(
    input: &DecodeInput<'_>,
    counter: &mut EvalCounter,
) -> Result<DecodeOutput, DestinationError> {
    input.require_es_at_least_one()?;
    let g = Gains::new(input);
    let corr = input.correction();
    let p = input.s.points();
    let m = p.len();
    let mut best = DecodeOutput {
        xa_idx: 0,
        xb_idx: 0,
        branch: Branch::RelayCorrect,
    };
    let mut best_metric = f64::INFINITY;
    let mut evals = 0u64;
    for ib in 0..m {
        for ia in 0..m {
            let p1 = g.phase1(input.y_d1, p[ia], p[ib]);
            evals += 1;
            let fr = input.f.cell(ia, ib);
            let mut on_map = f64::INFINITY;
            let mut off_map = f64::INFINITY;
            for (ir, &xr) in p.iter().enumerate() {
                let r = g.phase2(input.y_d2, p[ia], p[ib], xr);
                evals += 1;
                if ir == fr {
                    on_map = r;
                } else if r < off_map {
                    off_map = r;
                }
            }
            let m1 = p1 + on_map;
            let alt = corr + (p1 + off_map);
            let (metric, branch) = if m1 <= alt {
                (m1, Branch::RelayCorrect)
            } else {
                (alt, Branch::RelayError)
            };
            if metric < best_metric {
                best_metric = metric;
                best = DecodeOutput {
                    xa_idx: ia,
                    xb_idx: ib,
                    branch,
                };
            }
        }
    }
    counter.evaluations += evals;
    Ok(best)
}

/// Destination observation rotated by the QR factor of the equivalent channel.
#[derive(Debug, Clone)]
pub struct RotatedFrame {
    pub q: CMatrix,
    pub r: CMatrix,
    pub y_tilde: [Complex; 2],
}

/// `H_eq = Q R`, `ỹ = Q* y_D`.
pub fn rotate(input: &DecodeInput<'_>) -> RotatedFrame {
    let (q, r, y_tilde) = rotate_arrays(input);
    RotatedFrame {
        q: CMatrix::from_rows(q),
        r: CMatrix::from_rows(r),
        y_tilde,
    }
}

type Rotation = ([[Complex; 2]; 2], [[Complex; 3]; 2], [Complex; 2]);

fn rotate_arrays(input: &DecodeInput<'_>) -> Rotation {
    let k = &input.k;
    let zero = Complex::new(0.0, 0.0);
    let h = [
        [k.a() * input.h_ad, k.b() * input.h_bd, zero],
        [k.c() * input.h_ad, k.d() * input.h_bd, input.h_rd],
    ];
    let (q, r) = qr_2x3_array(&h);
    let y = [input.y_d1, input.y_d2];
    let y_tilde = [
        q[0][0].conj() * y[0] + q[1][0].conj() * y[1],
        q[0][1].conj() * y[0] + q[1][1].conj() * y[1],
    ];
    (q, r, y_tilde)
}

/// Rotated-domain metrics for the index triple `(xa, xb, xr)`:
/// `φ1(xa, xb)`, `φ2(xa, xb)` (relay symbol `f(xa, xb)`) and `φ3(xb, xr)`.
pub fn phi_metrics(
    input: &DecodeInput<'_>,
    r: &CMatrix,
    y_tilde: [Complex; 2],
    xa: usize,
    xb: usize,
    xr: usize,
) -> (f64, f64, f64) {
    let rk = RotatedGains::new(input, r);
    let p = input.s.points();
    let fr = input.f.cell(xa, xb);
    (
        rk.phi1(y_tilde[0], p[xa], p[xb]),
        rk.phi3(y_tilde[1], p[xb], p[fr]),
        rk.phi3(y_tilde[1], p[xb], p[xr]),
    )
}

struct RotatedGains {
    r11: Complex,
    r12: Complex,
    r22: Complex,
    r23: Complex,
}

impl RotatedGains {
    fn new(input: &DecodeInput<'_>, r: &CMatrix) -> Self {
        Self::from_rows(
            input,
            &[[r[(0, 0)], r[(0, 1)], r[(0, 2)]], [r[(1, 0)], r[(1, 1)], r[(1, 2)]]],
        )
    }

    fn from_rows(input: &DecodeInput<'_>, r: &[[Complex; 3]; 2]) -> Self {
        let g = input.k.sqrt_es();
        Self {
            r11: r[0][0] * g,
            r12: r[0][1] * g,
            r22: r[1][1] * g,
            r23: r[1][2] * g,
        }
    }

    #[inline]
    fn phi1(&self, y1: Complex, xa: Complex, xb: Complex) -> f64 {
        (y1 - self.r11 * xa - self.r12 * xb).norm_sqr()
    }

    /// φ2 is φ3 evaluated at the mapped relay symbol.
    #[inline]
    fn phi3(&self, y2: Complex, xb: Complex, xr: Complex) -> f64 {
        (y2 - self.r22 * xb - self.r23 * xr).norm_sqr()
    }
}

pub fn fast_decode(input: &DecodeInput<'_>) -> Result<DecodeOutput, DestinationError> {
    fast_decode_counted(input, &mut EvalCounter::default())
}

/// O(M²) decoder equivalent to [`novel_decode_exhaustive`].
///
/// When only `W_B` is H-R orthogonal to `W_R`, the roles of A and B are
/// interchanged internally and the result mapped back.
pub fn fast_decode_counted(
    input: &DecodeInput<'_>,
    counter: &mut EvalCounter,
) -> Result<DecodeOutput, DestinationError> {
    input.require_es_at_least_one()?;
    match fast_route(&input.k) {
        Some(FastRoute::Direct) => Ok(fast_decode_direct(input, counter)),
        Some(FastRoute::Swapped) => {
            let k = &input.k;
            let swapped_k = SchemeConstants::new(k.b(), k.a(), k.d(), k.c(), k.es())?;
            let swapped_f = input.f.transpose();
            let swapped = DecodeInput {
                h_ad: input.h_bd,
                h_bd: input.h_ad,
                k: swapped_k,
                f: &swapped_f,
                ..*input
            };
            let out = fast_decode_direct(&swapped, counter);
            Ok(DecodeOutput {
                xa_idx: out.xb_idx,
                xb_idx: out.xa_idx,
                branch: out.branch,
            })
        }
        None => Err(DestinationError::NotFastDecodable),
    }
}

fn fast_decode_direct(input: &DecodeInput<'_>, counter: &mut EvalCounter) -> DecodeOutput {
    let (_, r, [y1, y2]) = rotate_arrays(input);
    let rk = RotatedGains::from_rows(input, &r);
    let corr = input.correction();
    let p = input.s.points();
    let mut evals = 0u64;

    let mut best = DecodeOutput {
        xa_idx: 0,
        xb_idx: 0,
        branch: Branch::RelayCorrect,
    };
    let mut best_metric = f64::INFINITY;
    for (ib, &xb) in p.iter().enumerate() {
        // x̂A¹ minimises φ1 + φ2, x̂A² minimises φ1.
        let (mut a1, mut a1_metric) = (0, f64::INFINITY);
        let (mut a2, mut a2_metric) = (0, f64::INFINITY);
        for (ia, &xa) in p.iter().enumerate() {
            let phi1 = rk.phi1(y1, xa, xb);
            let phi2 = rk.phi3(y2, xb, p[input.f.cell(ia, ib)]);
            evals += 2;
            let joint = phi1 + phi2;
            if joint < a1_metric {
                a1_metric = joint;
                a1 = ia;
            }
            if phi1 < a2_metric {
                a2_metric = phi1;
                a2 = ia;
            }
        }
        let mut r_metric = f64::INFINITY;
        for &xr in p {
            let phi3 = rk.phi3(y2, xb, xr);
            evals += 1;
            if phi3 < r_metric {
                r_metric = phi3;
            }
        }
        let alt = corr + (a2_metric + r_metric);
        let (metric, xa_idx, branch) = if a1_metric <= alt {
            (a1_metric, a1, Branch::RelayCorrect)
        } else {
            (alt, a2, Branch::RelayError)
        };
        evals += 1;
        if metric < best_metric {
            best_metric = metric;
            best = DecodeOutput {
                xa_idx,
                xb_idx: ib,
                branch,
            };
        }
    }
    counter.evaluations += evals;
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{phase1, phase2, sample_channel, ChannelRealization, FadingProfile};
    use crate::numerics::RngStream;
    use crate::relay::relay_decide;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    struct Fixture {
        s: SignalSet,
        f: LatinSquare,
    }

    impl Fixture {
        fn psk(m: usize) -> Self {
            Self {
                s: SignalSet::psk(m).unwrap(),
                f: LatinSquare::modulo(m).unwrap(),
            }
        }
    }

    /// A full random frame through the relay; returns the input and the
    /// transmitted pair.
    fn random_frame<'a>(
        fx: &'a Fixture,
        k: SchemeConstants,
        seed: u64,
        trial: u64,
    ) -> (DecodeInput<'a>, (usize, usize), bool) {
        let mut rng = RngStream::new(seed, trial).rng();
        let m = fx.s.m();
        let (a, b) = (rng.uniform_index(m), rng.uniform_index(m));
        let h = sample_channel(&mut rng, &FadingProfile::equal());
        let (zr, z1, z2) = (
            rng.sample_gaussian(1.0).unwrap(),
            rng.sample_gaussian(1.0).unwrap(),
            rng.sample_gaussian(1.0).unwrap(),
        );
        let p = fx.s.points();
        let (y_r, y1) = phase1(&k, &h, p[a], p[b], zr, z1);
        let relay = relay_decide(y_r, &h, &k, &fx.s, &fx.f);
        let y2 = phase2(&k, &h, p[a], p[b], relay.x_r, z2);
        let relay_wrong = fx.f.cell(relay.xa_idx, relay.xb_idx) != fx.f.cell(a, b);
        let input = DecodeInput::new(y1, y2, h.h_ad, h.h_bd, h.h_rd, k, &fx.s, &fx.f).unwrap();
        (input, (a, b), relay_wrong)
    }

    fn noiseless<'a>(
        fx: &'a Fixture,
        k: SchemeConstants,
        h: &ChannelRealization,
        a: usize,
        b: usize,
        xr: Complex,
    ) -> DecodeInput<'a> {
        let p = fx.s.points();
        let z = c(0.0, 0.0);
        let (_, y1) = phase1(&k, h, p[a], p[b], z, z);
        let y2 = phase2(&k, h, p[a], p[b], xr, z);
        DecodeInput::new(y1, y2, h.h_ad, h.h_bd, h.h_rd, k, &fx.s, &fx.f).unwrap()
    }

    fn generic_channel() -> ChannelRealization {
        ChannelRealization {
            h_ar: c(0.9, -0.4),
            h_br: c(-0.3, 1.1),
            h_ad: c(0.8, 0.35),
            h_bd: c(-0.45, 0.7),
            h_rd: c(1.2, -0.6),
        }
    }

    #[test]
    fn m1_vanishes_on_true_pair() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(10.0).unwrap();
        let h = generic_channel();
        let xr = fx.s.points()[fx.f.cell(1, 2)];
        let input = noiseless(&fx, k, &h, 1, 2, xr);
        assert!(metric_m1(&input, 1, 2) < 1e-20);
        assert!(metric_m3(&input, 1, 2) < 1e-20);
    }

    #[test]
    fn m1_with_dead_channel() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(10.0).unwrap();
        let (y1, y2) = (c(0.3, -1.2), c(2.0, 0.5));
        let z = c(0.0, 0.0);
        let input = DecodeInput::new(y1, y2, z, z, z, k, &fx.s, &fx.f).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let m1 = metric_m1(&input, a, b);
                assert!((m1 - (y1.norm_sqr() + y2.norm_sqr())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m2_candidate_set_and_wrong_relay() {
        let fx = Fixture::psk(2);
        let k = SchemeConstants::example1(5.0).unwrap();
        let h = generic_channel();
        // M = 2: m2 sees exactly the one symbol that is not f(a, b).
        let fr = fx.f.cell(0, 1);
        let other = fx.s.points()[1 - fr];
        let input = noiseless(&fx, k, &h, 0, 1, other);
        assert!(metric_m2(&input, 0, 1) < 1e-20);
        assert!(metric_m1(&input, 0, 1) > 1.0);

        let fx = Fixture::psk(4);
        let wrong = fx.s.points()[(fx.f.cell(2, 3) + 1) % 4];
        let input = noiseless(&fx, k, &h, 2, 3, wrong);
        assert!(metric_m2(&input, 2, 3) < 1e-20);
    }

    #[test]
    fn metric_identities_on_random_frames() {
        let fx = Fixture::psk(4);
        for trial in 0..2000u64 {
            let es = 10f64.powf((trial % 40) as f64 / 10.0);
            let k = SchemeConstants::example1(es).unwrap();
            let (input, _, _) = random_frame(&fx, k, 3, trial);
            let ln = es.ln();
            for a in 0..4 {
                for b in 0..4 {
                    let m1 = metric_m1(&input, a, b);
                    let m2 = metric_m2(&input, a, b);
                    let m3 = metric_m3(&input, a, b);
                    assert!(m1 >= 0.0 && m2 >= 0.0);
                    assert_eq!(m3, m1.min(m2));
                    assert!(m3 <= m1);
                    let lhs = m1.min(ln + m2);
                    let rhs = m1.min(ln + m3);
                    assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs));

                    let fr = fx.f.cell(a, b);
                    let m4_on = metric_m4(&input, a, b, fx.s.points()[fr]);
                    assert!((m4_on - (m1 + ln)).abs() <= 1e-12 * (1.0 + m4_on));
                    let m4_off = (0..4)
                        .filter(|&r| r != fr)
                        .map(|r| metric_m4(&input, a, b, fx.s.points()[r]))
                        .fold(f64::INFINITY, f64::min);
                    assert!((m4_off - (m2 + ln)).abs() <= 1e-12 * (1.0 + m4_off));
                }
            }
        }
    }

    #[test]
    fn m4_at_unit_energy_is_plain_residual() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(1.0).unwrap();
        let (input, _, _) = random_frame(&fx, k, 4, 0);
        let fr = fx.f.cell(1, 1);
        assert_eq!(metric_m4(&input, 1, 1, fx.s.points()[fr]), metric_m1(&input, 1, 1));
    }

    #[test]
    fn noiseless_decoders_return_truth() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(20.0).unwrap();
        let h = generic_channel();
        for a in 0..4 {
            for b in 0..4 {
                let xr = fx.s.points()[fx.f.cell(a, b)];
                let input = noiseless(&fx, k, &h, a, b, xr);
                let expect = DecodeOutput {
                    xa_idx: a,
                    xb_idx: b,
                    branch: Branch::RelayCorrect,
                };
                assert_eq!(min_euclidean_decode(&input), expect);
                assert_eq!(novel_decode_exhaustive(&input).unwrap(), expect);
                assert_eq!(fast_decode(&input).unwrap(), expect);
            }
        }
    }

    #[test]
    fn wrong_relay_recovered_through_error_branch() {
        // One fixed frame: A sends index 1, B index 2, relay forwards the
        // symbol one step past f(1, 2) = 3, i.e. index 0. All 16 pair metrics
        // are listed to pin the winner.
        let fx = Fixture::psk(4);
        let es = 100.0;
        let k = SchemeConstants::example1(es).unwrap();
        let h = generic_channel();
        let wrong = fx.s.points()[0];
        let input = noiseless(&fx, k, &h, 1, 2, wrong);
        let ln = es.ln();
        let mut values = Vec::new();
        for b in 0..4 {
            for a in 0..4 {
                let v = metric_m1(&input, a, b).min(ln + metric_m2(&input, a, b));
                values.push(((a, b), v));
            }
        }
        let truth = values.iter().find(|(p, _)| *p == (1, 2)).unwrap().1;
        assert!((truth - ln).abs() < 1e-9, "true pair scores exactly ln(E_s)");
        for (pair, v) in &values {
            if *pair != (1, 2) {
                assert!(*v > truth + 1.0, "{pair:?} -> {v}");
            }
        }
        // The naive decoder falls for it.
        assert!(metric_m1(&input, 1, 2) > ln);
        let expect = DecodeOutput {
            xa_idx: 1,
            xb_idx: 2,
            branch: Branch::RelayError,
        };
        assert_eq!(novel_decode_exhaustive(&input).unwrap(), expect);
        assert_eq!(fast_decode(&input).unwrap(), expect);
        assert_ne!(min_euclidean_decode(&input).xa_idx * 4 + min_euclidean_decode(&input).xb_idx, 6);
    }

    #[test]
    fn energy_below_one_is_rejected() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(0.5).unwrap();
        let (input, _, _) = random_frame(&fx, k, 5, 0);
        assert_eq!(
            novel_decode_exhaustive(&input),
            Err(DestinationError::EnergyBelowOne(0.5))
        );
        assert_eq!(fast_decode(&input), Err(DestinationError::EnergyBelowOne(0.5)));
        min_euclidean_decode(&input);
    }

    #[test]
    fn non_orthogonal_constants_refuse_fast_path() {
        let fx = Fixture::psk(4);
        let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let k = SchemeConstants::new(h, h, h, h, 10.0).unwrap();
        let (input, _, _) = random_frame(&fx, k, 6, 0);
        assert_eq!(fast_decode(&input), Err(DestinationError::NotFastDecodable));
        assert!(novel_decode_exhaustive(&input).is_ok());
    }

    #[test]
    fn order_mismatch_rejected() {
        let s = SignalSet::psk(8).unwrap();
        let f = LatinSquare::modulo(4).unwrap();
        let k = SchemeConstants::example1(1.0).unwrap();
        let z = c(0.0, 0.0);
        assert!(matches!(
            DecodeInput::new(z, z, z, z, z, k, &s, &f),
            Err(DestinationError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn rotation_properties() {
        let fx = Fixture::psk(4);
        for trial in 0..1000u64 {
            let k = SchemeConstants::example1(31.6).unwrap();
            let (input, _, _) = random_frame(&fx, k, 7, trial);
            let frame = rotate(&input);
            assert_eq!(frame.r[(1, 0)], c(0.0, 0.0));
            assert!(frame.r[(0, 2)].norm() < 1e-10);
            let g = k.sqrt_es();
            let p = fx.s.points();
            let h = input.equivalent_channel();
            for a in 0..4 {
                for b in 0..4 {
                    for r in 0..4 {
                        let x = [p[a], p[b], p[r]];
                        let direct: f64 = (0..2)
                            .map(|row| {
                                let y = [input.y_d1, input.y_d2][row];
                                let s: Complex = (0..3).map(|col| h[(row, col)] * x[col]).sum();
                                (y - s * g).norm_sqr()
                            })
                            .sum();
                        let rotated: f64 = (0..2)
                            .map(|row| {
                                let s: Complex = (0..3).map(|col| frame.r[(row, col)] * x[col]).sum();
                                (frame.y_tilde[row] - s * g).norm_sqr()
                            })
                            .sum();
                        assert!((direct - rotated).abs() < 1e-8 * (1.0 + direct));
                    }
                    let (phi1, phi2, _) = phi_metrics(&input, &frame.r, frame.y_tilde, a, b, 0);
                    let m1 = metric_m1(&input, a, b);
                    assert!((phi1 + phi2 - m1).abs() < 1e-8 * (1.0 + m1));
                }
                // Decomposition at fixed xB: min_xA m3 = min_xA φ1 + min_xR φ3.
                let b = a;
                let lhs = (0..4).map(|xa| metric_m3(&input, xa, b)).fold(f64::INFINITY, f64::min);
                let min_phi1 = (0..4)
                    .map(|xa| phi_metrics(&input, &frame.r, frame.y_tilde, xa, b, 0).0)
                    .fold(f64::INFINITY, f64::min);
                let min_phi3 = (0..4)
                    .map(|xr| phi_metrics(&input, &frame.r, frame.y_tilde, 0, b, xr).2)
                    .fold(f64::INFINITY, f64::min);
                assert!((lhs - (min_phi1 + min_phi3)).abs() < 1e-8 * (1.0 + lhs));
            }
        }
    }

    #[test]
    fn phi_metric_basics() {
        let fx = Fixture::psk(4);
        let k = SchemeConstants::example1(1.0).unwrap();
        let z = c(0.0, 0.0);
        let input = DecodeInput::new(z, z, z, z, z, k, &fx.s, &fx.f).unwrap();
        let r = CMatrix::zeros(2, 3);
        assert_eq!(phi_metrics(&input, &r, [z, z], 1, 2, 3), (0.0, 0.0, 0.0));

        let (input, _, _) = random_frame(&fx, SchemeConstants::example1(10.0).unwrap(), 8, 0);
        let frame = rotate(&input);
        let (_, phi2, _) = phi_metrics(&input, &frame.r, frame.y_tilde, 1, 1, 0);
        let min_phi3 = (0..4)
            .map(|r| phi_metrics(&input, &frame.r, frame.y_tilde, 1, 1, r).2)
            .fold(f64::INFINITY, f64::min);
        assert!(phi2 >= min_phi3);
    }

    #[test]
    fn fast_matches_exhaustive_small_battery() {
        let fx = Fixture::psk(4);
        let mut relay_errors = 0;
        let mut error_branches = 0;
        for trial in 0..20_000u64 {
            let snr_db = [0.0, 5.0, 10.0, 20.0][(trial % 4) as usize];
            let k = SchemeConstants::example1(10f64.powf(snr_db / 10.0)).unwrap();
            let (input, _, relay_wrong) = random_frame(&fx, k, 9, trial);
            relay_errors += usize::from(relay_wrong);
            let slow = novel_decode_exhaustive(&input).unwrap();
            let fast = fast_decode(&input).unwrap();
            assert_eq!(slow, fast, "trial {trial}");
            error_branches += usize::from(slow.branch == Branch::RelayError);
        }
        assert!(relay_errors > 100);
        assert!(error_branches > 100);
    }

    #[test]
    fn swapped_route_matches_exhaustive() {
        // W_B ⟂ W_R (d = 0) but W_A is not.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let fx = Fixture {
            s: SignalSet::psk(4).unwrap(),
            f: LatinSquare::xor(4).unwrap(),
        };
        for trial in 0..5000u64 {
            let es = 10f64.powf((trial % 3) as f64);
            let k = SchemeConstants::new(c(h, 0.0), c(0.0, 1.0), c(0.0, h), c(0.0, 0.0), es).unwrap();
            assert_eq!(fast_route(&k), Some(FastRoute::Swapped));
            let (input, _, _) = random_frame(&fx, k, 10, trial);
            assert_eq!(novel_decode_exhaustive(&input).unwrap(), fast_decode(&input).unwrap());
        }
    }

    #[test]
    fn evaluation_counts() {
        let mut last: Option<(u64, u64)> = None;
        for m in [4usize, 8, 16] {
            let fx = Fixture::psk(m);
            let k = SchemeConstants::example1(10.0).unwrap();
            let (input, _, _) = random_frame(&fx, k, 11, 0);
            let mut fast = EvalCounter::default();
            let mut slow = EvalCounter::default();
            fast_decode_counted(&input, &mut fast).unwrap();
            novel_decode_exhaustive_counted(&input, &mut slow).unwrap();
            let m = m as u64;
            assert_eq!(fast.evaluations, 3 * m * m + m);
            assert_eq!(slow.evaluations, m * m * (m + 1));
            if let Some((f0, s0)) = last {
                let rf = fast.evaluations as f64 / f0 as f64;
                let rs = slow.evaluations as f64 / s0 as f64;
                assert!((3.5..=4.5).contains(&rf));
                assert!((7.0..=9.0).contains(&rs));
            }
            last = Some((fast.evaluations, slow.evaluations));
        }
    }
}
