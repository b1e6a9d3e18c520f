//! Values frozen from an independent arbitrary-precision evaluation.

use astro_float::Consts;
use mppc_core::*;
use num_bigint::BigUint;

const NLOGK_ORACLE: &[(f64, &[(u64, &str)])] = &[
    (
        1.0,
        &[
            (3, "3"),
            (4, "5"),
            (10, "23"),
            (97, "443"),
            (1000, "6907"),
            (12345, "116302"),
            (1_000_000, "13815510"),
        ],
    ),
    (
        2.0,
        &[
            (3, "3"),
            (4, "7"),
            (10, "53"),
            (97, "2030"),
            (1000, "47717"),
            (12345, "1095684"),
            (1_000_000, "190868331"),
        ],
    ),
    (
        3.0,
        &[
            (3, "3"),
            (4, "10"),
            (10, "122"),
            (97, "9286"),
            (1000, "329617"),
            (12345, "10322454"),
            (1_000_000, "2636943455"),
        ],
    ),
    (
        2.5,
        &[
            (3, "3"),
            (4, "9"),
            (10, "80"),
            (97, "4341"),
            (1000, "125412"),
            (12345, "3363057"),
            (1_000_000, "709442738"),
        ],
    ),
    (
        14.155,
        &[
            (3, "11"),
            (4, "407"),
            (10, "1340179"),
            (97, "215883455552"),
            (1000, "760001473151317"),
            (12345, "758295293199394895"),
            (1_000_000, "13864174716392650856592"),
        ],
    ),
];

#[test]
fn nlogk_floors_match_oracle() {
    let mut cc = Consts::new().unwrap();
    for &(k, rows) in NLOGK_ORACLE {
        for &(n, expected) in rows {
            let got = certified_nlogk_floor(n, k, &mut cc).unwrap();
            assert_eq!(got, expected.parse::<BigUint>().unwrap(), "K={k}, n={n}");
        }
    }
}

#[test]
fn nlogk_generator_is_indexed_from_three() {
    let seq = gen_nlogk(3.0, 1000).unwrap();
    assert_eq!(seq.len(), 1000);
    assert_eq!(seq.as_u64().unwrap()[0], 3);
    assert_eq!(seq.as_u64().unwrap()[1], 10);
    assert_eq!(seq.as_u64().unwrap()[10 - NLOGK_START as usize], 122);
    assert_eq!(seq.as_u64().unwrap()[97 - NLOGK_START as usize], 9286);
}

#[test]
fn per_prime_moments_match_oracle() {
    for (p, sigma, l, expected) in [
        (2, 0.75, 2, 5.010457760719833),
        (2, 0.55, 8, 3_872_789.369_123_094),
        (5, 0.6, 4, 7.472_349_564_396_44),
        (3, 0.6, 1, 1.3653377990453001),
    ] {
        let got = per_prime_moment(p, sigma, l).unwrap();
        assert!(
            ((got - expected) / expected).abs() < 1e-12,
            "E_{l}({p}, {sigma}) = {got}"
        );
    }
}

#[test]
fn constants_match_oracle() {
    assert!((compute_beta() - 1.7031673999611887).abs() < 1e-15);
    assert!((solve_c_threshold() - 13.154937637631584).abs() < 1e-9);
    assert!((c_threshold_closed_form() - 13.154937637631584).abs() < 1e-14);
    let t = constants_table().unwrap();
    assert!(t.beta_precision_gap < 1e-15 && t.c_threshold_precision_gap < 1e-15);
}

#[test]
fn zeta_matches_oracle() {
    assert!((zeta_real(1.2).unwrap() - 5.591582441177752).abs() < 1e-12);
    assert!((zeta_real(1.5).unwrap() - 2.612375348685488).abs() < 1e-12);
    assert!((zeta_minus_pole(1.0).unwrap().0 - 0.5772156649015329).abs() < 1e-14);
}

#[test]
fn energy_of_small_sets() {
    let seq = IntegerSequence::from_u64(vec![1, 2, 3], "t").unwrap();
    assert_eq!(additive_energy(&seq).unwrap().energy, 19);
    let squares = gen_power(2, 100).unwrap();
    let e = additive_energy(&squares).unwrap().energy;
    assert_eq!(e, additive_energy_by_sums(&squares).unwrap().energy);
    assert_eq!(e, additive_energy_fft(&squares).unwrap().energy);
}
