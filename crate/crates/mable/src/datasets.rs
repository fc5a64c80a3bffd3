//! Bundled coronary heart disease case-control ages (57 controls, 43 cases),
//! the worked example of the method. Support [20, 70].

pub const CHD_CONTROLS: [f64; 57] = [
    20.0, 23.0, 24.0, 25.0, 26.0, 26.0, 28.0, 28.0, 29.0, 30.0, 30.0, 30.0, 30.0, 30.0, 32.0,
    32.0, 33.0, 33.0, 34.0, 34.0, 34.0, 34.0, 35.0, 35.0, 36.0, 36.0, 37.0, 37.0, 38.0, 38.0,
    39.0, 40.0, 41.0, 41.0, 42.0, 42.0, 42.0, 43.0, 43.0, 44.0, 44.0, 45.0, 46.0, 47.0, 47.0,
    48.0, 49.0, 49.0, 50.0, 51.0, 52.0, 55.0, 57.0, 57.0, 58.0, 60.0, 64.0,
];

pub const CHD_CASES: [f64; 43] = [
    25.0, 30.0, 34.0, 36.0, 37.0, 39.0, 40.0, 42.0, 43.0, 44.0, 44.0, 45.0, 46.0, 47.0, 48.0,
    48.0, 49.0, 50.0, 52.0, 53.0, 53.0, 54.0, 55.0, 55.0, 56.0, 56.0, 56.0, 57.0, 57.0, 57.0,
    57.0, 58.0, 58.0, 59.0, 59.0, 60.0, 61.0, 62.0, 62.0, 63.0, 64.0, 65.0, 69.0,
];

pub const CHD_SUPPORT: (f64, f64) = (20.0, 70.0);

/// The dataset in the CLI's CSV input format.
pub fn chd_csv() -> String {
    let mut s = String::from("value,group\n");
    for v in CHD_CONTROLS {
        s.push_str(&format!("{v},0\n"));
    }
    for v in CHD_CASES {
        s.push_str(&format!("{v},1\n"));
    }
    s
}
