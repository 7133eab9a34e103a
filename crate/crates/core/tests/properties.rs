//! Property tests of the structural invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levy_spde::cli::{Cell, ExperimentConfig, Table};
use levy_spde::Error;
use levy_spde::cz::{cz_decompose, random_field, RadiusLadder, SpaceTimeGrid, WhitneyFactors, DEFAULT_RADII};
use levy_spde::function_spaces::LPSystem;
use levy_spde::jump_noise::{sample_path, MarkSpace};
use levy_spde::levy_measure::LevyMeasure;
use levy_spde::scaling::ScalingTriple;
use levy_spde::solver::semigroup_apply;
use levy_spde::spectral::{density, FrequencyGrid, GridFunction, SymbolTable};

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 16, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn symmetric_symbol_is_real_even_and_nonpositive(sigma in 0.2f64..1.9) {
        let g = FrequencyGrid::new(1, 64, 8.0).unwrap();
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, sigma).unwrap(), &g).unwrap();
        prop_assert_eq!(tab.values()[0].norm(), 0.0);
        for i in 1..g.len() {
            let v = tab.values()[i];
            prop_assert!(v.re < 0.0);
            prop_assert!(v.im.abs() <= 1e-9 * v.re.abs());
            let w = tab.values()[g.partner(i)];
            prop_assert!((v.re - w.re).abs() <= 1e-9 * v.re.abs());
        }
    }

    #[test]
    fn stable_symbol_is_homogeneous(sigma in 0.2f64..1.9, k in 1usize..16) {
        let g = FrequencyGrid::new(1, 64, 8.0).unwrap();
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, sigma).unwrap(), &g).unwrap();
        let ratio = tab.values()[2 * k].re / tab.values()[k].re;
        prop_assert!((ratio - 2f64.powf(sigma)).abs() < 1e-6 * ratio);
    }

    #[test]
    fn densities_have_unit_mass_or_are_refused(sigma in 0.3f64..1.9, t in 0.1f64..4.0) {
        let g = FrequencyGrid::new(1, 512, 64.0).unwrap();
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, sigma).unwrap(), &g).unwrap();
        // Sharp densities the grid cannot resolve must be refused, never returned.
        match density(&tab, t, 0.0) {
            Ok(p) => prop_assert!((p.integral() - 1.0).abs() < 1e-10),
            Err(e) => prop_assert!(matches!(e, Error::AliasingDetected { .. }), "{}", e),
        }
    }

    #[test]
    fn semigroup_contracts_in_l2(sigma in 0.3f64..1.9, t in 0.0f64..3.0, lambda in 0.0f64..5.0, w in 0.3f64..3.0) {
        let g = FrequencyGrid::new(1, 256, 16.0).unwrap();
        let tab = SymbolTable::eval(&LevyMeasure::stable(1, sigma).unwrap(), &g).unwrap();
        let f = GridFunction::from_fn(&g, |x| (-PI * (x[0] / w).powi(2)).exp() * (1.0 + x[0]));
        let u = semigroup_apply(&f, t, lambda, &tab).unwrap();
        prop_assert!(u.lp_norm(2.0) <= (-lambda * t).exp() * f.lp_norm(2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn power_scaling_inverts(sigma in 0.2f64..2.0, r in 1e-3f64..1e3) {
        let k = ScalingTriple::power(sigma).unwrap();
        prop_assert!((k.a(k.kappa(r)) / r - 1.0).abs() < 1e-8);
        prop_assert!(k.k0() >= 3.0);
    }

    #[test]
    fn littlewood_paley_partition_is_exact(base in 2u32..5, n_exp in 10u32..13) {
        let g = FrequencyGrid::new(1, 1 << n_exp, 16.0).unwrap();
        let sys = LPSystem::new(base, &g).unwrap();
        prop_assert!(sys.partition_residual() < 1e-12);
        let f = GridFunction::from_fn(&g, |x| (-PI * x[0] * x[0]).exp());
        prop_assert!(sys.reconstruction_error(&f).unwrap() < 1e-10);
    }

    #[test]
    fn jump_paths_are_ordered_and_reproducible(seed in any::<u64>(), horizon in 0.1f64..5.0) {
        let marks = MarkSpace::new(vec![1.0, 2.5]).unwrap();
        let a = sample_path(&marks, horizon, seed).unwrap();
        prop_assert_eq!(&a, &sample_path(&marks, horizon, seed).unwrap());
        prop_assert!(a.events.windows(2).all(|w| w[0].t <= w[1].t));
        prop_assert!(a.events.iter().all(|e| e.t > 0.0 && e.t <= horizon && e.mark < 2));
    }

    #[test]
    fn cz_parts_reconstruct_exactly(seed in 0u64..1000, level in 1.2f64..4.0) {
        let grid = SpaceTimeGrid::new(16, 16, 1.0, -1.0, 1.0).unwrap();
        let kappa = ScalingTriple::power(1.0).unwrap();
        let ladder = RadiusLadder::new(&grid, &kappa, DEFAULT_RADII).unwrap();
        let f = random_field(&grid, 4, false, &mut ChaCha8Rng::seed_from_u64(seed));
        if let Ok(cz) = cz_decompose(&f, level * f.mean(), &ladder, &kappa, WhitneyFactors::default()) {
            let r = cz.reconstruct();
            let sup = f.values().iter().cloned().fold(0.0, f64::max);
            for (a, b) in r.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * sup);
            }
            for part in &cz.parts {
                prop_assert!(part.integral(grid.cell()).abs() <= 1e-12 * sup * grid.cell() * part.cells.len() as f64);
            }
        }
    }

    #[test]
    fn config_round_trips(seed in 0..=i64::MAX as u64, sigma in 0.1f64..1.9, n_exp in 3u32..12, p in 1.1f64..8.0) {
        let text = format!(
            "seed = {seed}\nsuites = [\"symbols\", \"cz\"]\n[measure]\nsigma = {sigma:?}\n[grid]\nn = {}\n[spaces]\nbase = 3\np = [{p:?}]\n",
            1usize << n_exp
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&c, &ExperimentConfig::parse(&c.to_toml()).unwrap());
        prop_assert_eq!(c.seed, seed);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let mut t = Table::new(&["v"]);
        t.push(vec![Cell::Num(x)]);
        let s = t.to_csv("p").unwrap();
        let back: f64 = s.lines().nth(2).unwrap().parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}
