use proptest::prelude::*;

use sigmak_core::families::{build_model, FamilyKind, FamilySpec};
use sigmak_core::jacobi::{
    enumerate_model_modes, jacobi_eigenvalue, morse_index, morse_index_model, scan, IndexOptions, JacobiReport,
};
use sigmak_core::Error;

fn specs() -> Vec<FamilySpec> {
    vec![
        FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.3),
        FamilySpec::k2(FamilyKind::SphereSphere, 5, 0.15),
        FamilySpec::k2(FamilyKind::SphereHyperbolic, 2, 0.25),
        FamilySpec::k2(FamilyKind::FlatWarped, 2, 3.0),
        FamilySpec::new(FamilyKind::SphereSphere, 3, 3, 2, 0.3),
        FamilySpec::new(FamilyKind::SphereHyperbolic, 3, 2, 3, 0.3),
    ]
}

fn with_margin(margin: f64) -> IndexOptions {
    IndexOptions { margin, ..IndexOptions::default() }
}

#[test]
fn index_is_stable_under_margin_doubling() {
    for spec in specs() {
        let base = morse_index(&spec, &with_margin(1e-4)).unwrap();
        assert!(base.truncation_bound > 0.0);
        let mut margin = 1e-4;
        for _ in 0..4 {
            margin *= 2.0;
            let r = morse_index(&spec, &with_margin(margin)).unwrap();
            assert!(r.truncation_bound > 0.0);
            assert_eq!(r.index, base.index, "{spec:?} at margin {margin}");
        }
    }
}

#[test]
fn modes_beyond_the_cutoff_are_positive() {
    for spec in specs().into_iter().take(4) {
        let model = build_model(&spec).unwrap();
        let shift = 3.0 * model.h_k;
        let wide = enumerate_model_modes(&model, 0.5 * shift + 1.0).unwrap();
        let narrow = enumerate_model_modes(&model, 1e-4).unwrap();
        let mut checked = 0;
        for mode in wide.modes.iter().filter(|m| !narrow.modes.contains(m)).take(200) {
            let (_, lambda) = jacobi_eigenvalue(&model, mode, 1e-9).unwrap();
            assert!(lambda > 0.0, "{spec:?}: omitted mode {:?} has Lambda {lambda}", mode.degrees);
            checked += 1;
        }
        assert!(checked > 0, "{spec:?}: no omitted modes examined");
    }
}

#[test]
fn constant_mode_is_excluded() {
    for spec in specs() {
        let r = morse_index(&spec, &IndexOptions::default()).unwrap();
        let expect = -(2.0 * spec.k as f64 - 1.0) * r.h_k;
        assert!((r.constant_lambda - expect).abs() <= 1e-10 * expect.abs().max(1.0));
        let constant = r.entries.iter().find(|e| e.mode.is_constant()).unwrap();
        assert_eq!(constant.lambda_df, r.constant_lambda);
        let counted: u128 = r.entries.iter().filter(|e| !e.mode.is_constant() && e.lambda_df < -r.tol).map(|e| e.mode.mult).sum::<u128>()
            + r.runs.iter().map(|x| x.index_contribution).sum::<u128>();
        assert_eq!(counted, r.index);
    }
}

#[test]
fn nonpositive_h_is_refused() {
    // the cap family with ell = 1 has H_2 = 0
    let spec = FamilySpec::k2(FamilyKind::SphereHyperbolic, 1, 0.3);
    assert!(matches!(morse_index(&spec, &IndexOptions::default()), Err(Error::NonPositiveH { .. })));
}

#[test]
fn constant_index_range_has_no_brackets() {
    let r = scan(&FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.35), 0.3, 0.4, 6, &IndexOptions::default()).unwrap();
    assert!(r.samples.windows(2).all(|w| w[0].index == w[1].index));
    assert!(r.jump_brackets.is_empty());
}

#[test]
fn scan_is_deterministic() {
    let spec = FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.3);
    let a = scan(&spec, 0.2, 0.35, 12, &IndexOptions::default()).unwrap();
    let b = scan(&spec, 0.2, 0.35, 12, &IndexOptions::default()).unwrap();
    assert_eq!(a, b);
    assert!(!a.jump_brackets.is_empty());
    for br in &a.jump_brackets {
        assert!(br.resolved && br.width() < 1e-4);
    }
}

fn assert_homothetic(base: &JacobiReport, scaled: &JacobiReport, c: f64, k: u32) {
    assert_eq!(base.index, scaled.index);
    let factor = (-(2.0 * k as f64 - 1.0) * c).exp();
    assert_eq!(base.entries.len(), scaled.entries.len());
    for (a, b) in base.entries.iter().zip(&scaled.entries) {
        assert_eq!(a.mode.degrees, b.mode.degrees);
        let rel = (b.lambda_df - factor * a.lambda_df).abs() / a.lambda_df.abs().max(1e-3);
        assert!(rel < 1e-7, "{:?}: {} vs {}", a.mode.degrees, b.lambda_df, factor * a.lambda_df);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn index_invariant_under_homothety(eps in 0.2f64..0.8, c in -1.5f64..1.5, which in 0usize..3) {
        let spec = match which {
            0 => FamilySpec::k2(FamilyKind::SphereSphere, 3, eps),
            1 => FamilySpec::k2(FamilyKind::SphereHyperbolic, 2, eps),
            _ => FamilySpec::k2(FamilyKind::FlatWarped, 2, 4.0 * eps),
        };
        let model = build_model(&spec).unwrap();
        let opts = IndexOptions::default();
        let base = morse_index_model(&model, &opts).unwrap();
        let mut scaled_opts = opts;
        scaled_opts.margin = opts.margin * (-3.0 * c).exp();
        let scaled = morse_index_model(&model.dilated(c), &scaled_opts).unwrap();
        assert_homothetic(&base, &scaled, c, spec.k);
    }
}
