use std::f64::consts::FRAC_PI_4;

use lemon_billiards::verify::lyapunov::{lyapunov_exponent, lyapunov_of, Reversed};
use lemon_billiards::LemonTable;

#[test]
fn reversed_map_has_the_same_exponent() {
    let t = LemonTable::new(FRAC_PI_4, 1800.0).unwrap();
    let forward = lyapunov_exponent(&t, 40, 20_000, 11).unwrap();
    let backward = lyapunov_of(&Reversed(&t), 40, 20_000, 11).unwrap();
    let err = forward.stderr.hypot(backward.stderr);
    assert!((forward.chi - backward.chi).abs() < 3.0 * err, "{forward:?} {backward:?}");
}

#[test]
fn exponent_does_not_depend_on_seed() {
    let t = LemonTable::new(0.5, 2000.0).unwrap();
    let a = lyapunov_exponent(&t, 40, 20_000, 1).unwrap();
    let b = lyapunov_exponent(&t, 40, 20_000, 2).unwrap();
    assert!((a.chi - b.chi).abs() < 3.0 * a.stderr.hypot(b.stderr), "{a:?} {b:?}");
    assert!(a.chi > 5.0 * a.stderr);
}
