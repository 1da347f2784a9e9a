use bvdual_web::{duality_scan_points, hermite_dual_of, wilson_thooft_sides};

#[test]
fn odd_powers_have_imaginary_duals() {
    let h = hermite_dual_of(3, 0.5).unwrap();
    // i^3 He_3 = -i (x^3 - 3x)
    assert_eq!(h.terms.len(), 2);
    assert!(h.terms.iter().all(|t| t.re == 0.0));
    assert_eq!(h.terms[0].im, -1.0);
    assert_eq!(h.terms[1].im, 3.0);
    assert_eq!(h.expectation, 0.0);
}

#[test]
fn wilson_and_thooft_sides_agree_as_epsilon_varies() {
    let mut prefactors = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let s = wilson_thooft_sides(eps, 0.7, 1.0, 1.0, 64).unwrap();
        assert!(s.relative_gap < 1e-6, "{s:?}");
        prefactors.push(s.prefactor);
    }
    // sharper loops carry more Gaussian suppression
    assert!(prefactors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn duality_scan_matches_across_couplings() {
    let points = duality_scan_points(0.7, 1.3, 4).unwrap();
    assert_eq!(points.len(), 4);
    for p in &points {
        assert!(p.discrepancy < 1e-6, "{p:?}");
    }
    assert!(duality_scan_points(0.0, 1.0, 3).is_err());
}
