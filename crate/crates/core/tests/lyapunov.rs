use linvol::cocycle::{lyapunov_spectrum, LyapunovOptions};
use linvol::GeneralizedPermutation;

fn q22() -> GeneralizedPermutation {
    GeneralizedPermutation::parse("A B A C D C / D E B E").unwrap()
}

fn base() -> LyapunovOptions {
    LyapunovOptions { steps: 4_000, batches: 16, warmup: 200, seed: 8, ..Default::default() }
}

#[test]
fn orthonormalization_period_does_not_move_the_estimates() {
    let reports: Vec<_> = [1, 5, 20]
        .iter()
        .map(|&q| lyapunov_spectrum::<f64>(&q22(), &LyapunovOptions { orthonormalize_every: q, ..base() }).unwrap())
        .collect();
    for r in &reports[1..] {
        for i in 0..5 {
            let (a, b) = (reports[0].exponents[i], r.exponents[i]);
            let s = (reports[0].stderr[i].powi(2) + r.stderr[i].powi(2)).sqrt();
            assert!((a - b).abs() <= 3.0 * s + 1e-9, "exponent {i}: {a} vs {b} (sigma {s})");
        }
    }
}

#[test]
fn sign_pattern_agrees_between_time_normalizations() {
    let r = lyapunov_spectrum::<f64>(&q22(), &base()).unwrap();
    let thr = |x: f64, top: f64| if x.abs() <= 0.02 * top.abs() { 0 } else if x > 0.0 { 1 } else { -1 };
    let z: Vec<i32> = r.exponents.iter().map(|&x| thr(x, r.exponents[0])).collect();
    let e: Vec<i32> = r.elementary_exponents.iter().map(|&x| thr(x, r.elementary_exponents[0])).collect();
    assert_eq!(z, e);
    assert_eq!(z, vec![1, 0, 0, 0, -1]);
}

#[test]
fn empty_run_has_zero_exponents() {
    let r = lyapunov_spectrum::<f64>(&q22(), &LyapunovOptions { steps: 0, batches: 2, warmup: 0, ..base() }).unwrap();
    assert!(r.exponents.iter().all(|x| *x == 0.0), "{:?}", r.exponents);
}
