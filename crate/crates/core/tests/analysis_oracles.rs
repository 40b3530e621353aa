//! Eigenstructure checks against an independent solver (nalgebra's Schur
//! decomposition) plus regression constants frozen from it.

use chua_core::analysis::{median_plane_distance, PlaneSettings};
use chua_core::eigen::characteristic_coefficients;
use chua_core::linalg::{cross, dot, norm};
use chua_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn oracle_eigenvalues(m: &Matrix3) -> Vec<Complex64> {
    let nm = nalgebra::Matrix3::from_fn(|r, c| m.0[r][c]);
    let mut v: Vec<Complex64> = nm.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
    v.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()).then(b.im.total_cmp(&a.im)));
    v
}

/// det(J − λI) by cofactor expansion, evaluated at a complex λ.
fn char_det(m: &Matrix3, l: Complex64) -> Complex64 {
    let a = |r: usize, c: usize| Complex64::new(m.0[r][c], 0.0) - if r == c { l } else { Complex64::new(0.0, 0.0) };
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

// Frozen from the oracle above for the double-scroll parameter set.
const OUTER_REAL: f64 = -2.7594897060007506;
const OUTER_PAIR: (f64, f64) = (0.1297448530003742, 2.1328929756668855);
const ORIGIN_REAL: f64 = 1.5521759992782598;
const ORIGIN_PAIR: (f64, f64) = (-0.6760879996391315, 1.8978216854148273);
const OUTER_NORMAL: [f64; 3] = [-0.5656356327215211, 0.7753165242050256, -0.2809637312721385];
const ORIGIN_NORMAL: [f64; 3] = [0.6699023488812331, 0.6241346197149591, 0.4021029960553268];
const E0_EPM_POINT: [f64; 3] = [-0.3101018705521642, 0.4318816591402957, -0.15372758775846052];
const E0_EPM_DIRECTION: [f64; 3] = [-0.48713185827486966, -0.03922677280698993, 0.8724470258696635];
const E0_EPM_CLIP: (f64, f64) = (-1.3762565933737179, 2.9502316267314126);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn closed_form_matches_oracle_on_singularities() {
    let set = find_singularities(&DOUBLE_SCROLL).unwrap();
    for s in &set.singularities {
        let ours = s.eigen.eigenvalues;
        let theirs = oracle_eigenvalues(&s.jacobian);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).norm() <= 1e-12 * s.jacobian.frobenius_norm(), "{a} vs {b}");
            assert!(char_det(&s.jacobian, *a).norm() <= 1e-12);
        }
    }
}

#[test]
fn frozen_eigenvalues() {
    let set = find_singularities(&DOUBLE_SCROLL).unwrap();
    for s in &set.singularities {
        let (real, (re, im)) = match s.label {
            SingularityLabel::Origin => (ORIGIN_REAL, ORIGIN_PAIR),
            _ => (OUTER_REAL, OUTER_PAIR),
        };
        let e = &s.eigen.eigenvalues;
        assert_eq!(s.eigen.spectrum, Spectrum::SaddleFocus);
        assert!(close(e[0].re, real, 1e-12) && e[0].im == 0.0);
        assert!(close(e[1].re, re, 1e-12) && close(e[1].im, im, 1e-12));
        assert_eq!(e[2], e[1].conj());
    }
    // P± is a saddle-focus with a stable real direction, the origin an unstable one.
    assert!(OUTER_REAL < 0.0 && OUTER_PAIR.0 > 0.0);
    assert!(ORIGIN_REAL > 0.0 && ORIGIN_PAIR.0 < 0.0);
}

#[test]
fn oracle_agrees_on_random_matrices() {
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 8.0 - 4.0
    };
    for _ in 0..500 {
        let m = Matrix3(std::array::from_fn(|_| std::array::from_fn(|_| next())));
        let Ok(e) = eigen_decompose(&m) else { continue };
        let theirs = oracle_eigenvalues(&m);
        for z in &theirs {
            let nearest = e.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest <= 1e-9 * m.frobenius_norm().max(1.0), "{m:?}: {z} not found in {:?}", e.eigenvalues);
        }
        for k in 0..3 {
            assert!(e.right_residual(&m, k) <= 1e-9, "{m:?}");
            assert!(e.left_residual(&m, k) <= 1e-9, "{m:?}");
        }
        let coef = characteristic_coefficients(&m);
        let sum: Complex64 = e.eigenvalues.iter().sum();
        assert!((sum.re + coef[0]).abs() <= 1e-9 * m.frobenius_norm().max(1.0));
    }
}

#[test]
fn left_real_eigenvector_is_orthogonal_to_complex_pair() {
    for s in &find_singularities(&DOUBLE_SCROLL).unwrap().singularities {
        let alpha = s.real_left_eigenvector();
        let v = s.eigen.right[1];
        let re = v.map(|z| z.re);
        let im = v.map(|z| z.im);
        assert!(dot(alpha, re).abs() <= 1e-9);
        assert!(dot(alpha, im).abs() <= 1e-9);
    }
}

#[test]
fn frozen_planes_and_segment() {
    let report = analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap();
    let ep = report.plane(PlaneLabel::EpPlus).unwrap();
    let em = report.plane(PlaneLabel::EpMinus).unwrap();
    let e0 = report.plane(PlaneLabel::E0).unwrap();
    for k in 0..3 {
        assert!(close(ep.normal[k], OUTER_NORMAL[k], 1e-12));
        assert!(close(e0.normal[k], ORIGIN_NORMAL[k], 1e-12));
    }
    assert_eq!(ep.normal, em.normal);
    let angle = dot(ep.normal, e0.normal).abs().acos().to_degrees();
    assert!(close(angle, 89.54190888192599, 1e-9), "{angle}");

    let seg = intersect_planes(e0, em).unwrap();
    for k in 0..3 {
        assert!(close(seg.point.to_array()[k], E0_EPM_POINT[k], 1e-12));
        assert!(close(seg.direction[k], E0_EPM_DIRECTION[k], 1e-12));
    }
    assert!(close(seg.clip.0, E0_EPM_CLIP.0, 1e-12) && close(seg.clip.1, E0_EPM_CLIP.1, 1e-12));
    // The drawn segment centres in the P− half-space.
    let mid = seg.at(0.5 * (seg.clip.0 + seg.clip.1));
    assert!(mid.u1 < 0.0);
    assert!(norm(chua_core::linalg::sub(mid.to_array(), em.anchor.to_array())) < norm(chua_core::linalg::sub(mid.to_array(), ep.anchor.to_array())));
    for t in [seg.clip.0, seg.clip.1] {
        let x = seg.at(t);
        assert!(e0.modal_coordinate(x).abs() <= 1e-9 && em.modal_coordinate(x).abs() <= 1e-9);
    }
    // Mirror symmetry of the two chaos-origin segments.
    let other = intersect_planes(ep, e0).unwrap();
    assert!((other.point + seg.point).max_abs() <= 1e-12);
    assert!(norm(cross(other.direction, seg.direction)) <= 1e-12);
}

#[test]
fn parallel_outer_planes() {
    let report = analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap();
    let ep = report.plane(PlaneLabel::EpPlus).unwrap();
    let em = report.plane(PlaneLabel::EpMinus).unwrap();
    assert!(norm(cross(ep.normal, em.normal)) <= 1e-12);
    assert!(matches!(intersect_planes(ep, em), Err(AnalysisError::Parallel(..))));
    let sp = find_singularities(&DOUBLE_SCROLL).unwrap();
    let (p, m) = (sp.get(SingularityLabel::PPlus).unwrap(), sp.get(SingularityLabel::PMinus).unwrap());
    assert_eq!(p.location, -m.location);
    assert_eq!(p.jacobian, m.jacobian);
}

#[test]
fn analysis_report_json_round_trips() {
    let report = analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap();
    let json = serde_json::to_string(&report).unwrap();
    let back: AnalysisReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn median_distance_of_planar_points_is_zero() {
    let report = analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap();
    let ep = report.plane(PlaneLabel::EpPlus).unwrap();
    let pts = (0..9).map(|k| ep.point_at(k as f64 * 0.3 - 1.2, 0.7));
    assert!(median_plane_distance(ep, pts).unwrap() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn modal_coordinate_vanishes_inside_rectangles(s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let report = analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap();
        for plane in &report.planes {
            let x = plane.point_at(s * plane.half_width, t * plane.half_length);
            prop_assert!(plane.modal_coordinate(x).abs() <= 1e-9);
        }
    }
}
