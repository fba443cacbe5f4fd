//! Structural invariants checked over random fields.

use elsasser::checkpoint::{read_components, write_components};
use elsasser::field::advect;
use elsasser::random::{random_scalar, random_vector, sample_rng, Band};
use elsasser::solver::{energy_report, step, IntegratorParams, State, Viscosities};
use elsasser::spaces::{besov_norm, chi_norm, BesovParams};
use elsasser::{DyadicPartition, Grid, SpectralField, VectorField};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(16).unwrap()
}

fn scalar(seed: u64, band: Band) -> SpectralField {
    random_scalar(&grid(), band, &mut sample_rng(seed, 0)).unwrap()
}

fn vector(seed: u64, band: Band, solenoidal: bool) -> VectorField {
    random_vector(&grid(), band, solenoidal, &mut sample_rng(seed, 1)).unwrap()
}

/// Bands that stay inside the dealiased range of `n = 16`.
fn band() -> impl Strategy<Value = Band> {
    (1.0f64..3.0, 0.0f64..2.0).prop_map(|(lo, w)| Band::new(lo, lo + w))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn parseval(seed in any::<u64>(), band in band()) {
        let f = scalar(seed, band);
        let x = f.to_physical();
        let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        prop_assert!((mean_sq - f.energy()).abs() <= 1e-12 * f.energy());
    }

    #[test]
    fn physical_round_trip(seed in any::<u64>(), band in band()) {
        let f = scalar(seed, band);
        let back = SpectralField::from_physical(f.grid(), &f.to_physical()).unwrap();
        prop_assert!((&back - &f).max_abs_coefficient() <= 1e-13 * f.max_abs_coefficient());
        prop_assert!(f.conjugate_symmetry_defect() < 1e-15);
    }

    #[test]
    fn leray_is_an_orthogonal_projection(seed in any::<u64>(), band in band()) {
        let u = vector(seed, band, false);
        let v = vector(seed ^ 0x5a5a, band, false);
        let pu = u.leray_project();
        prop_assert!(pu.relative_divergence() < 1e-14);
        prop_assert!((&pu.leray_project() - &pu).max_abs_coefficient() <= 1e-14 * pu.max_abs_coefficient());
        let (a, b) = (pu.inner(&v), u.inner(&v.leray_project()));
        prop_assert!((a - b).abs() <= 1e-12 * (u.energy() * v.energy()).sqrt());
    }

    #[test]
    fn advection_is_skew(seed in any::<u64>(), band in band()) {
        let u = vector(seed, band, true);
        let v = vector(seed ^ 0xa5a5, band, false);
        let scale = u.to_physical().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())) * v.gradient_energy().sqrt()
            * v.energy().sqrt();
        prop_assert!(advect(&u, &v).unwrap().inner(&v).abs() <= 1e-12 * scale);
    }

    #[test]
    fn blocks_sum_back_to_the_field(seed in any::<u64>(), band in band()) {
        let g = grid();
        let part = DyadicPartition::for_grid(&g);
        let f = scalar(seed, band);
        let mut sum = part.lowpass(&f, part.j_min()).unwrap();
        for j in part.j_range() {
            sum = &sum + &part.block(&f, j).unwrap();
        }
        prop_assert!((&sum - &f).max_abs_coefficient() <= 1e-14 * f.max_abs_coefficient());
    }

    #[test]
    fn besov_norm_is_a_norm(seed in any::<u64>(), band in band(), a in -3.0f64..3.0, p in 2.0f64..8.0) {
        let part = DyadicPartition::for_grid(&grid());
        let params = BesovParams::critical(p, 1.0).unwrap();
        let (f, g) = (vector(seed, band, true), vector(seed ^ 1, band, true));
        let nf = besov_norm(&f, params, &part).unwrap();
        let ng = besov_norm(&g, params, &part).unwrap();
        prop_assert!((besov_norm(&f.scale(a), params, &part).unwrap() - a.abs() * nf).abs() <= 1e-12 * nf);
        prop_assert!(besov_norm(&(&f + &g), params, &part).unwrap() <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn chi_norms_are_monotone_in_s_above_unit_frequencies(seed in any::<u64>(), band in band()) {
        let f = scalar(seed, band);
        let (a, b, c) = (chi_norm(&f, -1.0), chi_norm(&f, 0.0), chi_norm(&f, 1.0));
        prop_assert!(a <= b && b <= c);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), band in band()) {
        let (a, b) = (vector(seed, band, true), vector(seed, band, true));
        for i in 0..3 {
            prop_assert_eq!(a.0[i].coefficients(), b.0[i].coefficients());
        }
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(seed in any::<u64>(), band in band()) {
        let u = vector(seed, band, true);
        let mut bytes = Vec::new();
        write_components(&mut bytes, &u.0.iter().collect::<Vec<_>>()).unwrap();
        let back = read_components(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.len(), 3);
        for (b, c) in back.iter().zip(&u.0) {
            prop_assert_eq!(b.coefficients(), c.coefficients());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn energy_never_grows(seed in any::<u64>(), mu1 in 0.05f64..1.0, mu2 in 0.05f64..1.0) {
        let band = Band::new(1.0, 3.0).with_amplitude(0.1);
        let s0 = State::new(vector(seed, band, true), vector(seed ^ 2, band, true)).unwrap();
        let visc = Viscosities::new(mu1, mu2).unwrap();
        let params = IntegratorParams::new(0.005, 0.05);
        let mut s = s0;
        let mut e = energy_report(&s, &visc).total();
        for _ in 0..params.step_count() {
            s = step(&s, &visc, &params).unwrap();
            let next = energy_report(&s, &visc).total();
            prop_assert!(next <= e * (1.0 + 1e-12));
            e = next;
        }
    }
}
