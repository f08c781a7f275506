use proptest::prelude::*;

use pnc_marc::channel::ChannelRealization;
use pnc_marc::destination::{
    fast_decode, metric_m1, metric_m2, metric_m3, min_euclidean_decode, novel_decode_exhaustive,
    Branch, DecodeInput, DecodeOutput,
};
use pnc_marc::netcode::{check_exclusive_law, LatinSquare, MapKind};
use pnc_marc::numerics::{cmat_mul, conj_transpose, det2, qr_2x3, CMatrix, Complex};
use pnc_marc::relay::relay_ml_decode;
use pnc_marc::scheme::{fast_route, FastRoute, SchemeConstants};
use pnc_marc::signal::SignalSet;

fn complex() -> impl Strategy<Value = Complex> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |e| CMatrix::new(rows, cols, e).unwrap())
}

fn order() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8, 16])
}

/// Unit-energy pairs `(a, c)`, `(b, d)` with `c = 0`.
fn hr_constants() -> impl Strategy<Value = SchemeConstants> {
    (0.0..std::f64::consts::TAU, complex(), complex()).prop_filter_map("zero column", |(phase, b, d)| {
        let n = (b.norm_sqr() + d.norm_sqr()).sqrt();
        if n < 1e-3 {
            return None;
        }
        SchemeConstants::new(
            Complex::from_polar(1.0, phase),
            b / n,
            Complex::new(0.0, 0.0),
            d / n,
            1.0,
        )
        .ok()
    })
}

#[derive(Debug, Clone)]
struct Frame {
    y_d1: Complex,
    y_d2: Complex,
    h: ChannelRealization,
    k: SchemeConstants,
}

impl Frame {
    fn input<'a>(&self, s: &'a SignalSet, f: &'a LatinSquare) -> DecodeInput<'a> {
        DecodeInput::new(self.y_d1, self.y_d2, self.h.h_ad, self.h.h_bd, self.h.h_rd, self.k, s, f).unwrap()
    }
}

fn frame() -> impl Strategy<Value = Frame> {
    (hr_constants(), 0.0..40.0f64, prop::collection::vec(complex(), 7)).prop_map(|(k, snr_db, v)| {
        let es = 10f64.powf(snr_db / 10.0);
        // Observations scaled like received signals so that every hypothesis
        // can win.
        let g = es.sqrt();
        Frame {
            y_d1: v[0] * g,
            y_d2: v[1] * g,
            h: ChannelRealization {
                h_ar: v[2],
                h_br: v[3],
                h_ad: v[4],
                h_bd: v[5],
                h_rd: v[6],
            },
            k: k.with_es(es).unwrap(),
        }
    })
}

fn oracle_novel(input: &DecodeInput<'_>) -> DecodeOutput {
    let m = input.s.m();
    let ln = input.k.es().ln();
    let mut best = (f64::INFINITY, 0, 0, Branch::RelayCorrect);
    for xb in 0..m {
        for xa in 0..m {
            let m1 = metric_m1(input, xa, xb);
            let m2 = ln + metric_m2(input, xa, xb);
            let (v, br) = if m1 <= m2 { (m1, Branch::RelayCorrect) } else { (m2, Branch::RelayError) };
            if v < best.0 {
                best = (v, xa, xb, br);
            }
        }
    }
    DecodeOutput {
        xa_idx: best.1,
        xb_idx: best.2,
        branch: best.3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conj_transpose_is_an_involution(a in matrix(2, 3)) {
        prop_assert_eq!(conj_transpose(&conj_transpose(&a)), a);
    }

    #[test]
    fn qr_reconstructs_and_is_unitary(h in matrix(2, 3)) {
        let (q, r) = qr_2x3(&h).unwrap();
        prop_assert_eq!(r[(1, 0)], Complex::new(0.0, 0.0));
        prop_assert!(r[(0, 0)].im == 0.0 && r[(0, 0)].re >= 0.0);
        prop_assert!(r[(1, 1)].im == 0.0 && r[(1, 1)].re >= 0.0);
        prop_assert!(cmat_mul(&q, &r).unwrap().max_abs_diff(&h).unwrap() < 1e-10);
        let qhq = cmat_mul(&conj_transpose(&q), &q).unwrap();
        prop_assert!(qhq.max_abs_diff(&CMatrix::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn det2_is_multiplicative(a in matrix(2, 2), b in matrix(2, 2)) {
        let lhs = det2(&cmat_mul(&a, &b).unwrap()).unwrap();
        let rhs = det2(&a).unwrap() * det2(&b).unwrap();
        let scale = 1.0 + a.norm_inf().powi(2) * b.norm_inf().powi(2);
        prop_assert!((lhs - rhs).norm() < 1e-10 * scale);
    }

    #[test]
    fn generated_squares_obey_exclusive_law(m in order(), xor in any::<bool>()) {
        let kind = if xor { MapKind::Xor } else { MapKind::Modulo };
        let sq = kind.build(m).unwrap();
        prop_assert!(check_exclusive_law(&sq.rows()));
        prop_assert!(check_exclusive_law(&sq.transpose().rows()));
        prop_assert_eq!(LatinSquare::parse_text(&sq.to_text()).unwrap(), sq);
    }

    #[test]
    fn exclusive_law_matches_uniqueness_predicate(
        m in 2usize..6,
        cells in prop::collection::vec(0usize..6, 36),
    ) {
        let rows: Vec<Vec<usize>> = (0..m).map(|r| cells[r * 6..r * 6 + m].to_vec()).collect();
        let distinct = |v: Vec<usize>| {
            let mut s = v.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == m && v.iter().all(|&x| x < m)
        };
        let latin = (0..m).all(|r| distinct(rows[r].clone()))
            && (0..m).all(|c| distinct(rows.iter().map(|row| row[c]).collect()));
        prop_assert_eq!(check_exclusive_law(&rows), latin);
    }

    #[test]
    fn psk_sums_to_zero_and_differences_are_symmetric(lambda in 1u32..6) {
        let s = SignalSet::psk(1 << lambda).unwrap();
        let sum: Complex = s.points().iter().sum();
        prop_assert!(sum.norm() < 1e-12);
        let diffs = s.difference_set();
        for d in &diffs {
            prop_assert!(diffs.iter().any(|e| (e + d).norm() < 1e-9));
        }
    }

    #[test]
    fn relay_squared_and_plain_modulus_agree(
        y in complex(), ha in complex(), hb in complex(), snr_db in 0.0..30.0f64
    ) {
        let s = SignalSet::psk(4).unwrap();
        let k = SchemeConstants::example1(10f64.powf(snr_db / 10.0)).unwrap();
        let h = ChannelRealization { h_ar: ha, h_br: hb, ..ChannelRealization::ones() };
        let dec = relay_ml_decode(y, &h, &k, &s);
        let g = k.sqrt_es();
        let mut best = (f64::INFINITY, 0, 0);
        for (ia, &xa) in s.points().iter().enumerate() {
            for (ib, &xb) in s.points().iter().enumerate() {
                let d = (y - ha * k.a() * g * xa - hb * k.b() * g * xb).norm();
                if d < best.0 {
                    best = (d, ia, ib);
                }
            }
        }
        prop_assert_eq!(dec, (best.1, best.2));
    }

    #[test]
    fn relay_error_branch_may_use_all_relay_symbols(f in frame(), xor in any::<bool>()) {
        let s = SignalSet::psk(4).unwrap();
        let map = if xor { MapKind::Xor } else { MapKind::Modulo }.build(4).unwrap();
        let input = f.input(&s, &map);
        let ln = input.k.es().ln();
        for xa in 0..4 {
            for xb in 0..4 {
                let m1 = metric_m1(&input, xa, xb);
                let lhs = m1.min(ln + metric_m2(&input, xa, xb));
                let rhs = m1.min(ln + metric_m3(&input, xa, xb));
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            }
        }
    }

    #[test]
    fn exhaustive_matches_brute_force(f in frame(), m in prop::sample::select(vec![2usize, 4, 8])) {
        let s = SignalSet::psk(m).unwrap();
        let map = LatinSquare::modulo(m).unwrap();
        let input = f.input(&s, &map);
        prop_assert_eq!(novel_decode_exhaustive(&input).unwrap(), oracle_novel(&input));
    }

    #[test]
    fn fast_equals_exhaustive(
        f in frame(),
        m in prop::sample::select(vec![2usize, 4, 8]),
        xor in any::<bool>(),
    ) {
        let s = SignalSet::psk(m).unwrap();
        let map = if xor { MapKind::Xor } else { MapKind::Modulo }.build(m).unwrap();
        let input = f.input(&s, &map);
        prop_assert_eq!(fast_route(&input.k), Some(FastRoute::Direct));
        prop_assert_eq!(fast_decode(&input).unwrap(), novel_decode_exhaustive(&input).unwrap());
    }

    #[test]
    fn fast_equals_exhaustive_when_swapped(f in frame(), xor in any::<bool>()) {
        // Mirror the constants so that only W_B is H-R orthogonal to W_R.
        let k = f.k;
        let mirrored = SchemeConstants::new(k.b(), k.a(), k.d(), k.c(), k.es()).unwrap();
        prop_assume!(fast_route(&mirrored) == Some(FastRoute::Swapped));
        let s = SignalSet::psk(4).unwrap();
        let map = if xor { MapKind::Xor } else { MapKind::Modulo }.build(4).unwrap();
        let input = Frame { k: mirrored, ..f }.input(&s, &map);
        prop_assert_eq!(fast_decode(&input).unwrap(), novel_decode_exhaustive(&input).unwrap());
    }

    #[test]
    fn noiseless_frames_decode_to_the_truth(
        k in hr_constants(),
        v in prop::collection::vec((0.3..2.0f64, 0.0..std::f64::consts::TAU), 5),
        xa in 0usize..4,
        xb in 0usize..4,
    ) {
        let s = SignalSet::psk(4).unwrap();
        let map = LatinSquare::modulo(4).unwrap();
        let k = k.with_es(100.0).unwrap();
        let c: Vec<Complex> = v.iter().map(|&(r, t)| Complex::from_polar(r, t)).collect();
        let h = ChannelRealization { h_ar: c[0], h_br: c[1], h_ad: c[2], h_bd: c[3], h_rd: c[4] };
        let zero = Complex::new(0.0, 0.0);
        let p = s.points();
        let (y_r, y_d1) = pnc_marc::channel::phase1(&k, &h, p[xa], p[xb], zero, zero);
        prop_assert_eq!(relay_ml_decode(y_r, &h, &k, &s), (xa, xb));
        let xr = p[map.cell(xa, xb)];
        let y_d2 = pnc_marc::channel::phase2(&k, &h, p[xa], p[xb], xr, zero);
        let input = DecodeInput::new(y_d1, y_d2, h.h_ad, h.h_bd, h.h_rd, k, &s, &map).unwrap();
        let truth = DecodeOutput { xa_idx: xa, xb_idx: xb, branch: Branch::RelayCorrect };
        prop_assert_eq!(fast_decode(&input).unwrap(), truth);
        prop_assert_eq!(novel_decode_exhaustive(&input).unwrap(), truth);
        let me = min_euclidean_decode(&input);
        prop_assert_eq!((me.xa_idx, me.xb_idx), (xa, xb));
    }
}
