use gmid_core::lut_io::{from_csv_str, to_csv_string};
use gmid_core::{eval_device, generate_lut, DeviceLut, DeviceParams, Polarity, Quantity, Sweep};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn params() -> [DeviceParams; 2] {
    [DeviceParams::nmos(300.0), DeviceParams::pmos(300.0)]
}

fn fine_sweep() -> Sweep {
    Sweep {
        n_l: 24,
        n_vgs: 81,
        ..Sweep::standard()
    }
}

#[test]
fn columns_are_monotone() {
    for p in params() {
        for sweep in [Sweep::standard(), fine_sweep()] {
            let lut = generate_lut(&p, &sweep).unwrap();
            let nv = lut.vgs_grid().len();
            for i in 0..lut.l_grid().len() {
                for j in 1..nv {
                    assert!(
                        lut.value(i, j, Quantity::GmOverId)
                            < lut.value(i, j - 1, Quantity::GmOverId)
                    );
                    assert!(
                        lut.value(i, j, Quantity::IdPerW) > lut.value(i, j - 1, Quantity::IdPerW)
                    );
                }
            }
        }
    }
}

#[test]
fn intrinsic_gain_grows_with_length() {
    for p in params() {
        let lut = generate_lut(&p, &Sweep::standard()).unwrap();
        for gm_id in [5.0, 10.0, 15.0, 20.0, 25.0] {
            let gains: Vec<f64> = lut
                .l_grid()
                .iter()
                .map(|&l| lut.gm_gds_at(l, gm_id).unwrap())
                .collect();
            assert!(
                gains.windows(2).all(|w| w[1] > w[0]),
                "{:?} at {gm_id}",
                p.polarity
            );
        }
    }
}

#[test]
fn analytic_gm_matches_finite_difference() {
    let h = 1e-6;
    for p in params() {
        let lut = generate_lut(&p, &Sweep::standard()).unwrap();
        let nv = lut.vgs_grid().len();
        for i in 1..lut.l_grid().len() - 1 {
            for j in 1..nv - 1 {
                let l = lut.l_grid()[i];
                let v = lut.vgs_grid()[j];
                let up = eval_device(&p, v + h, p.vds_char, l).unwrap().id_per_w;
                let dn = eval_device(&p, v - h, p.vds_char, l).unwrap().id_per_w;
                let gm_fd = (up - dn) / (2.0 * h);
                let gm = lut.value(i, j, Quantity::GmOverId) * lut.value(i, j, Quantity::IdPerW);
                assert!(((gm - gm_fd) / gm_fd).abs() < 1e-3, "l={l} vgs={v}");
            }
        }
    }
}

#[test]
fn gm_over_id_ceiling_and_asymptote() {
    let p = DeviceParams::nmos(300.0);
    let ceiling = p.gm_over_id_ceiling();
    let lut = generate_lut(&p, &Sweep::standard()).unwrap();
    for &l in lut.l_grid() {
        let (lo, hi) = lut.gm_id_range(l).unwrap();
        assert!(hi < ceiling && lo > 0.0);
    }
}

#[test]
fn forward_inverse_round_trip() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for p in params() {
        let lut = generate_lut(&p, &Sweep::standard()).unwrap();
        let span = 0.8;
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let l = rng.gen_range(65e-9..=180e-9);
            let v = rng.gen_range(0.1..=0.9);
            let g = lut.interp(l, v, Quantity::GmOverId).unwrap();
            let back = lut.invert_gmid(l, g).unwrap();
            let g_back = lut.interp(l, back, Quantity::GmOverId).unwrap();
            assert!(((g_back - g) / g).abs() < 1e-6);
            worst = worst.max((back - v).abs());
        }
        assert!(worst < 1e-3 * span, "{worst}");
    }
}

#[test]
fn csv_round_trip_is_lossless() {
    for p in params() {
        let lut = generate_lut(&p, &fine_sweep()).unwrap();
        let back = from_csv_str(&to_csv_string(&lut)).unwrap();
        assert_eq!(back.l_grid(), lut.l_grid());
        assert_eq!(back.vgs_grid(), lut.vgs_grid());
        for i in 0..lut.l_grid().len() {
            for j in 0..lut.vgs_grid().len() {
                for q in [Quantity::GmOverId, Quantity::GmOverGds, Quantity::IdPerW] {
                    assert_eq!(back.value(i, j, q), lut.value(i, j, q));
                }
            }
        }
    }
}

fn arb_lut() -> impl Strategy<Value = DeviceLut> {
    (
        prop_oneof![Just(Polarity::N), Just(Polarity::P)],
        0.2f64..0.45,
        1.0f64..1.8,
        10e-6f64..500e-6,
        0.005e-6f64..0.03e-6,
        2usize..8,
        2usize..12,
    )
        .prop_map(|(polarity, vth0, n, k_prime, lambda0, n_l, n_vgs)| {
            let params = DeviceParams {
                polarity,
                vth0,
                n,
                k_prime,
                lambda0,
                ..DeviceParams::nmos(300.0)
            };
            let sweep = Sweep {
                n_l,
                n_vgs,
                ..Sweep::standard()
            };
            generate_lut(&params, &sweep).unwrap()
        })
}

proptest! {
    #[test]
    fn csv_round_trip_any_table(lut in arb_lut()) {
        let back = from_csv_str(&to_csv_string(&lut)).unwrap();
        prop_assert_eq!(back.polarity(), lut.polarity());
        for i in 0..lut.l_grid().len() {
            for j in 0..lut.vgs_grid().len() {
                for q in [Quantity::GmOverId, Quantity::GmOverGds, Quantity::IdPerW] {
                    let (a, b) = (lut.value(i, j, q), back.value(i, j, q));
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs());
                }
            }
        }
    }

    #[test]
    fn interpolation_stays_within_cell(lut in arb_lut(), fl in 0.0f64..=1.0, fv in 0.0f64..=1.0) {
        let l = 65e-9 + fl * (180e-9 - 65e-9);
        let v = 0.1 + fv * 0.8;
        let li = lut.l_grid().partition_point(|&x| x <= l).clamp(1, lut.l_grid().len() - 1);
        let vi = lut.vgs_grid().partition_point(|&x| x <= v).clamp(1, lut.vgs_grid().len() - 1);
        for q in [Quantity::GmOverId, Quantity::GmOverGds, Quantity::IdPerW] {
            let got = lut.interp(l, v, q).unwrap();
            let corners = [
                lut.value(li - 1, vi - 1, q),
                lut.value(li - 1, vi, q),
                lut.value(li, vi - 1, q),
                lut.value(li, vi, q),
            ];
            let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(got >= lo && got <= hi);
        }
    }

    #[test]
    fn inversion_is_identity(lut in arb_lut(), fl in 0.0f64..=1.0, fv in 0.0f64..=1.0) {
        let l = 65e-9 + fl * (180e-9 - 65e-9);
        let v = 0.1 + fv * 0.8;
        let g = lut.interp(l, v, Quantity::GmOverId).unwrap();
        let back = lut.invert_gmid(l, g).unwrap();
        prop_assert!((back - v).abs() < 1e-3 * 0.8);
    }
}
