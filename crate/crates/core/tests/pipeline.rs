use fraclab_core::filterbank::{decompose, Filterbank, Profile};
use fraclab_core::{
    bessel_seminorm, c_const, frac_laplacian_spectral, gagliardo, lp_norm, sample, triebel_lizorkin, Descriptor,
    DifferenceProfile, GridSpec,
};

#[test]
fn two_dimensional_gaussian_end_to_end() {
    let grid = GridSpec::new(2, 128, 16.0).unwrap();
    let f = sample(&Descriptor::gaussian(), &grid).unwrap();
    let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
    let d = decompose(&fb, &f).unwrap();
    let err = d.reconstruct().sub(&f).unwrap().lp_norm(2.0).unwrap();
    assert!(err < 1e-10 * f.lp_norm(2.0).unwrap());
    let s = 0.5;
    let g = gagliardo(&f, s, 2.0, 6.0).unwrap();
    let lhs = bessel_seminorm(&f, s, 2.0).unwrap().powi(2);
    let rhs = c_const(2, s).unwrap() * g.completed().powi(2);
    assert!((lhs - rhs).abs() < 0.02 * lhs, "{lhs} vs {rhs}");
    // F^s_{2,2} and the Bessel norm agree up to the partition's overlap constant
    let ratio = triebel_lizorkin(&f, &fb, s, 2.0, 2.0).unwrap() / lhs.sqrt();
    assert!((0.5..2.0).contains(&ratio), "{ratio}");
}

#[test]
fn profile_reuse_matches_direct_evaluation() {
    let grid = GridSpec::new(1, 2048, 40.0).unwrap();
    let f = sample(&Descriptor::random(3), &grid).unwrap();
    let profile = DifferenceProfile::new(&f, 3.0, 15.0).unwrap();
    for s in [0.2, 0.6, 0.95] {
        let a = profile.evaluate(s).unwrap();
        let b = gagliardo(&f, s, 3.0, 15.0).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn half_laplacian_norm_is_bessel_norm() {
    let grid = GridSpec::new(1, 1024, 40.0).unwrap();
    let f = sample(&Descriptor::gaussian(), &grid).unwrap();
    for p in [1.5, 2.0, 4.0] {
        let direct = lp_norm(&frac_laplacian_spectral(&f, 0.6).unwrap(), p).unwrap();
        let norm = bessel_seminorm(&f, 0.6, p).unwrap();
        assert!((direct - norm).abs() <= 1e-12 * norm);
    }
}
