use rieszlab_core::builders::{build, BuilderSpec};
use rieszlab_core::fit::fit_loglog;

#[test]
fn gasket_volume_growth_exponent() {
    let s = build(&BuilderSpec::sierpinski(6).with_beta(1.0)).unwrap();
    let center = s.safe_zone(32.0)[0];
    let radii: Vec<f64> = (1..=5).map(|j| (j as f64).exp2()).collect();
    let vols: Vec<f64> = radii.iter().map(|&r| s.volume(center, r + 0.5)).collect();
    let fit = fit_loglog(&radii, &vols).unwrap();
    println!("gasket D = {}", fit.slope);
    assert!((fit.slope - 3f64.log2()).abs() <= 0.1);
}

#[test]
fn lattice_rho_doubling_exponent() {
    let s = build(&BuilderSpec::lattice(2, 41)).unwrap();
    let center = 20 * 41 + 20;
    let radii: Vec<f64> = (2..=8).map(|j| (j as f64).exp2()).collect();
    let report = s.doubling_scan(&radii, &[center]).unwrap();
    println!("Z2 d = {} max ratio {}", report.exponent.slope, report.max_ratio);
    assert!((report.exponent.slope - 1.0).abs() <= 0.1);
    assert!(report.max_ratio.is_finite());
}
