use nodal_core::nodal::count_components_plane;
use nodal_core::stability::{
    c1_distance, coupled_sample, profile_of_grid, sandwich_check, section7_field, section7_perturbed, sign_patterns,
    Section7,
};
use nodal_core::{evaluate_grid, Domain, FieldSample, Kappa, Preset};
use proptest::prelude::*;

fn interior(s: &FieldSample, r: f64, h: f64) -> u64 {
    count_components_plane(&evaluate_grid(s, Domain::square(r), h, 0).unwrap()).unwrap().interior_components
}

#[test]
fn three_pair_example_counts() {
    let f = section7_field(Section7::F);
    let g = section7_field(Section7::G);
    let base_f = interior(&f, 20.0, 0.05);
    assert!(base_f > 0);
    assert_eq!(interior(&g, 20.0, 0.05), 0);
    for eps in sign_patterns(6, 0.01).iter().step_by(5) {
        let pf = section7_perturbed(Section7::F, eps).unwrap();
        assert_eq!(interior(&pf, 20.0, 0.05), base_f);
    }
}

#[test]
fn g_sits_on_a_singular_threshold() {
    // x-part sin x + 0.8 sin 3x has a local minimum 0.2 at pi / 2, so
    // g = grad g = 0 at (pi / 2, -pi / 2)
    let g = section7_field(Section7::G);
    let x = [std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2];
    assert!(g.value(x).abs() < 1e-15);
    assert!(g.gradient(x)[0].abs() < 1e-15 && g.gradient(x)[1].abs() < 1e-15);
    // a larger sin y coefficient opens small loops, a smaller one does not
    let mut up = [0.0; 6];
    up[5] = 0.01;
    let mut down = [0.0; 6];
    down[5] = -0.01;
    assert!(interior(&section7_perturbed(Section7::G, &up).unwrap(), 20.0, 0.05) > 0);
    assert_eq!(interior(&section7_perturbed(Section7::G, &down).unwrap(), 20.0, 0.05), 0);
}

#[test]
fn monochromatic_example_is_stable() {
    let g = section7_field(Section7::MonochromaticG);
    let p = profile_of_grid(&evaluate_grid(&g, Domain::square(20.0), 0.05, 2).unwrap()).unwrap();
    assert!(p.min_max > 0.5);
}

#[test]
fn sandwich_holds_for_stable_close_draws() {
    // nearly identical measures, so that the filters let draws through
    let rho0 = Preset::UniformCircle { k: 32 }.build::<f64>().unwrap().with_kappa(Kappa::One);
    let rho1 = rho0.rotated(1e-6);
    let rep = sandwich_check(&rho0, &rho1, 3.0, 60, 0.05, Some(0.1), 9).unwrap();
    assert!(rep.filtered > 0, "{rep:?}");
    assert_eq!(rep.violations, 0);
}

#[test]
fn unfiltered_far_measures_violate() {
    let nu0 = Preset::Cilleruelo.build::<f64>().unwrap();
    let uni = Preset::UniformCircle { k: 64 }.build::<f64>().unwrap();
    let rep = sandwich_check(&nu0, &uni, 4.0, 10, f64::INFINITY, None, 2).unwrap();
    assert!(rep.violations > 0);
}

#[test]
fn stable_draws_count_the_same_on_a_finer_grid() {
    let rho = Preset::UniformCircle { k: 32 }.build::<f64>().unwrap().with_kappa(Kappa::One);
    let h = 0.2;
    let mut checked = 0;
    for i in 0..40 {
        let s = FieldSample::sample_indexed(&rho, 3, i);
        let g = evaluate_grid(&s, Domain::square(4.0), h, 2).unwrap();
        if profile_of_grid(&g).unwrap().min_max > 0.2 {
            checked += 1;
            assert_eq!(interior(&s, 4.0, h), interior(&s, 4.0, h / 2.0));
        }
    }
    assert!(checked > 0);
}

#[test]
fn refinement_coupling_tightens() {
    let median = |k: usize| {
        let a = Preset::UniformCircle { k }.build::<f64>().unwrap().with_kappa(Kappa::One);
        let b = Preset::UniformCircle { k: 2 * k }.build::<f64>().unwrap().with_kappa(Kappa::One);
        let mut d: Vec<f64> = (0..15)
            .map(|i| {
                let (x, y) = coupled_sample(&a, &b, 1, i);
                c1_distance(&x, &y, Domain::square(3.0), 0.1).unwrap()
            })
            .collect();
        d.sort_by(f64::total_cmp);
        d[7]
    };
    assert!(median(64) < median(16));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn c1_distance_is_a_pseudometric(seeds in prop::array::uniform3(0u64..1000)) {
        let rho = Preset::UniformCircle { k: 8 }.build::<f64>().unwrap().with_kappa(Kappa::One);
        let s: Vec<FieldSample> = seeds.iter().map(|&k| FieldSample::sample(&rho, k)).collect();
        let d = |a: usize, b: usize| c1_distance(&s[a], &s[b], Domain::square(2.0), 0.1).unwrap();
        prop_assert!((d(0, 1) - d(1, 0)).abs() <= 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }
}
