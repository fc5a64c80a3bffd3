//! End-to-end check of the estimation pipeline on the coronary heart
//! disease case-control ages (57 controls, 43 cases, support [20, 70]).
//! Reference numbers were frozen from an independent implementation of the
//! same algorithm.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use mable_core::{
    choose_baseline, degree_lower_bound, em_fit, loglik, mele_logistic, profile_p_fit,
    select_degree, BaselineChoice, Degree, EmConfig, MixtureWeights, RegressorSpec,
    SelectionMode, TiltCoefficients, TwoSampleData,
};

const CONTROLS: [f64; 57] = [
    20.0, 23.0, 24.0, 25.0, 26.0, 26.0, 28.0, 28.0, 29.0, 30.0, 30.0, 30.0, 30.0, 30.0, 32.0,
    32.0, 33.0, 33.0, 34.0, 34.0, 34.0, 34.0, 35.0, 35.0, 36.0, 36.0, 37.0, 37.0, 38.0, 38.0,
    39.0, 40.0, 41.0, 41.0, 42.0, 42.0, 42.0, 43.0, 43.0, 44.0, 44.0, 45.0, 46.0, 47.0, 47.0,
    48.0, 49.0, 49.0, 50.0, 51.0, 52.0, 55.0, 57.0, 57.0, 58.0, 60.0, 64.0,
];
const CASES: [f64; 43] = [
    25.0, 30.0, 34.0, 36.0, 37.0, 39.0, 40.0, 42.0, 43.0, 44.0, 44.0, 45.0, 46.0, 47.0, 48.0,
    48.0, 49.0, 50.0, 52.0, 53.0, 53.0, 54.0, 55.0, 55.0, 56.0, 56.0, 56.0, 57.0, 57.0, 57.0,
    57.0, 58.0, 58.0, 59.0, 59.0, 60.0, 61.0, 62.0, 62.0, 63.0, 64.0, 65.0, 69.0,
];

fn chd() -> (TwoSampleData, RegressorSpec) {
    let spec = RegressorSpec::polynomial(1, 20.0, 70.0).unwrap();
    let data = TwoSampleData::from_original(&CONTROLS, &CASES, &spec).unwrap();
    (data, spec)
}

#[test]
fn degree_bounds_and_baseline() {
    let (data, _) = chd();
    assert_eq!(degree_lower_bound(data.x0()).unwrap(), 3);
    assert_eq!(degree_lower_bound(data.x1()).unwrap(), 3);
    let (choice, mb0, mb1) = choose_baseline(&data).unwrap();
    assert_eq!((choice, mb0, mb1), (BaselineChoice::Original, 3, 3));
}

#[test]
fn mele_matches_reference() {
    let (data, spec) = chd();
    let at = mele_logistic(&data, &spec).unwrap();
    assert_relative_eq!(at.as_slice()[0], -5.027602221778065, max_relative = 1e-7);
    assert_relative_eq!(at.as_slice()[1], 0.11092114220690004, max_relative = 1e-7);
}

#[test]
fn loglik_at_fixed_point_matches_reference() {
    // not path dependent: a direct evaluation of l(alpha, p) at externally
    // chosen values
    let (data, spec) = chd();
    let m = Degree::new(3).unwrap();
    let raw = [0.09686, 0.89834, 0.0, 0.004796];
    let s: f64 = raw.iter().sum();
    let p = MixtureWeights::new(raw.iter().map(|v| v / s).collect()).unwrap();
    let alpha = TiltCoefficients::new(vec![-5.040, 0.111]).unwrap();
    let ll = loglik(&data, m, &p, &alpha, &spec).unwrap();
    assert_relative_eq!(ll, 24.043675985618037, max_relative = 1e-9);
}

#[test]
fn em_fit_degree_three_matches_reference() {
    let (data, spec) = chd();
    let at = mele_logistic(&data, &spec).unwrap();
    let fit = em_fit(&data, Degree::new(3).unwrap(), &spec, &at, &EmConfig::default()).unwrap();
    assert_relative_eq!(fit.loglik, 24.412268232349703, max_relative = 1e-6);
    assert_relative_eq!(fit.alpha.as_slice()[0], -5.039494733148674, max_relative = 1e-5);
    assert_relative_eq!(fit.alpha.as_slice()[1], 0.11115535072463088, max_relative = 1e-5);
    let expect = [
        9.687312766504173e-2,
        8.982561862282825e-1,
        7.870263337852609e-5,
        4.791983473297333e-3,
    ];
    for (got, want) in fit.p.as_slice().iter().zip(&expect) {
        assert_abs_diff_eq!(got, want, epsilon = 1e-6);
    }
    assert!(fit.constraint_residual < 1e-8);
    assert!((250..=275).contains(&fit.em_iterations), "iters {}", fit.em_iterations);
}

#[test]
fn profile_fit_degree_three_matches_reference() {
    let (data, spec) = chd();
    let at = mele_logistic(&data, &spec).unwrap();
    let fit =
        profile_p_fit(&data, Degree::new(3).unwrap(), &spec, &at, &EmConfig::default()).unwrap();
    assert_relative_eq!(fit.loglik, 24.41215827668929, max_relative = 1e-6);
    let expect = [
        9.690309453605889e-2,
        8.982010993683830e-1,
        8.124493391218670e-5,
        4.814561161646347e-3,
    ];
    for (got, want) in fit.p.as_slice().iter().zip(&expect) {
        assert_abs_diff_eq!(got, want, epsilon = 1e-6);
    }
}

#[test]
fn degree_selection_picks_three_in_both_modes() {
    let (data, spec) = chd();
    let at = mele_logistic(&data, &spec).unwrap();
    let cfg = EmConfig::default();
    let full = select_degree(&data, 1, 20, &spec, &at, SelectionMode::Full, &cfg).unwrap();
    assert_eq!(full.selected_degree(), 3);
    // spot-check the loglik profile head
    let head = [
        17.849450686092684,
        20.04795073431209,
        24.412268232349703,
        24.42122156154401,
    ];
    for (got, want) in full.logliks.iter().zip(&head) {
        assert_relative_eq!(got, want, max_relative = 1e-5);
    }
    let prof = select_degree(&data, 1, 20, &spec, &at, SelectionMode::Profile, &cfg).unwrap();
    assert_eq!(prof.selected_degree(), 3);
    // profile never beats the full fit at any degree
    for (f, p) in full.logliks.iter().zip(&prof.logliks) {
        assert!(f >= &(p - 1e-6));
    }
}
