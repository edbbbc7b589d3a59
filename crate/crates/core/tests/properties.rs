use gardner_core::exact::{gardner_breather, BreatherParams};
use gardner_core::exec::Execution;
use gardner_core::fields::{derivative, Field, Grid};
use gardner_core::functionals::{breather_from_soliton, closed_form, ArctanBranch, Profile, Quantity};
use gardner_core::sweep::parse_range;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = BreatherParams> {
    (0.3..2.5f64, 0.3..2.5f64, 0.0..0.95f64).prop_map(|(a, b, f)| BreatherParams::at_mu_fraction(a, b, f).unwrap())
}

fn cf(q: Quantity, p: BreatherParams) -> f64 {
    closed_form(q, Profile::Breather(p)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranges_hit_both_ends(start in -5.0..5.0f64, stop in -5.0..5.0f64, n in 2usize..50) {
        let v = parse_range(&format!("{start}:{stop}:{n}")).unwrap();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], start);
        prop_assert!((v[n - 1] - stop).abs() < 1e-12);
    }

    #[test]
    fn strategies_agree(xs in prop::collection::vec(-1e3..1e3f64, 0..200)) {
        let f = |x: &f64| x.sin() * x;
        prop_assert_eq!(Execution::Sequential.map(&xs, f), Execution::Parallel.map(&xs, f));
    }

    #[test]
    fn trig_polynomials_differentiate_exactly(a in -2.0..2.0f64, b in -2.0..2.0f64, k in 1u32..20) {
        let g = Grid::new(std::f64::consts::PI, 64).unwrap();
        let k = k as f64;
        let f = Field::from_fn(g.clone(), |x| a * (k * x).sin() + b * (k * x).cos());
        let d = derivative(&f, 1).unwrap();
        let want = Field::from_fn(g, |x| a * k * (k * x).cos() - b * k * (k * x).sin());
        let err = d.zip_with(&want, |u, v| u - v).unwrap().sup_norm();
        prop_assert!(err < 1e-10 * k, "{err}");
    }

    #[test]
    fn mass_derivatives_match_differences(p in params()) {
        let h = 1e-5;
        let m = |a: f64, b: f64| cf(Quantity::BreatherMass, BreatherParams::new(a, b, p.mu).unwrap());
        let da = (m(p.alpha + h, p.beta) - m(p.alpha - h, p.beta)) / (2.0 * h);
        let db = (m(p.alpha, p.beta + h) - m(p.alpha, p.beta - h)) / (2.0 * h);
        prop_assert!((da - cf(Quantity::DMdAlpha, p)).abs() < 1e-6, "{da}");
        prop_assert!((db - cf(Quantity::DMdBeta, p)).abs() < 1e-6, "{db}");
    }

    #[test]
    fn breathers_are_paired_solitons(p in params()) {
        for q in [Quantity::BreatherMass, Quantity::BreatherEnergy, Quantity::BreatherF, Quantity::BreatherH] {
            let direct = cf(q, p);
            let via = breather_from_soliton(q, &p, ArctanBranch::Infinity).unwrap();
            prop_assert!((direct - via).abs() < 1e-9 * direct.abs().max(1.0), "{q}: {direct} vs {via}");
        }
    }

    #[test]
    fn one_period_is_a_translation(p in params(), t in 0.0..1.0f64, x in -3.0..3.0f64) {
        let (period, shift) = p.period();
        let now = gardner_breather(&p, t, x).unwrap().value;
        let later = gardner_breather(&p, t + period, x + shift).unwrap().value;
        prop_assert!((now - later).abs() < 1e-7 * now.abs().max(1.0), "{now} vs {later}");
    }
}
