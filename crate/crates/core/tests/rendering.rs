use std::path::PathBuf;

use chua_core::analysis::PlaneSettings;
use chua_core::render::svg::render_svg;
use chua_core::render::*;
use chua_core::*;
use proptest::prelude::*;

fn attractor(n: usize) -> Vec<StateVector> {
    let cfg = IntegrationConfig { n_steps: 20_000 + n as u64, transient_skip: 20_000, ..Default::default() };
    integrate(&DOUBLE_SCROLL, &cfg).unwrap().states().collect()
}

fn report() -> AnalysisReport {
    analyze(&DOUBLE_SCROLL, &PlaneSettings::default()).unwrap()
}

fn inside_convex(quad: &[[f64; 2]; 4], p: [f64; 2]) -> bool {
    let mut sign = 0.0f64;
    for k in 0..4 {
        let a = quad[k];
        let b = quad[(k + 1) % 4];
        let c = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if c != 0.0 {
            if sign * c < 0.0 {
                return false;
            }
            sign = c;
        }
    }
    true
}

#[test]
fn lone_plane_covers_its_projected_rectangle() {
    let rep = report();
    let planes = [rep.plane(PlaneLabel::E0).unwrap().clone()];
    let scene = Scene { params: &DOUBLE_SCROLL, trajectory: &[], planes: &planes, segments: &[], iv_overlay: false };
    let size = (160, 120);
    let cam = fit_camera(&scene, size, 0.1).with_angles(30.0, 20.0).unwrap();
    let view = View { projection: Projection::Axonometric, camera: cam };
    let style = SceneStyle::default();
    let img = render_frame(&scene, &view, &style, size).unwrap();
    let quad = planes[0].corners().map(|c| view.to_pixel(c, size));
    let bg = style.background.blend_over([0, 0, 0]);
    let mut expected = 0;
    for y in 0..size.1 {
        for x in 0..size.0 {
            let inside = inside_convex(&quad, [x as f64 + 0.5, y as f64 + 0.5]);
            expected += inside as usize;
            assert_eq!(img.get(x, y) != bg, inside, "pixel ({x}, {y})");
        }
    }
    assert!(expected > 100);
}

#[test]
fn half_turn_frames_are_mirror_images() {
    let traj = attractor(5000);
    let rep = report();
    let scene = Scene { params: &DOUBLE_SCROLL, trajectory: &traj, planes: &rep.planes, segments: &[], iv_overlay: false };
    let size = (128, 96);
    let cam = fit_camera(&scene, size, 0.05);
    let frames = render_sweep(&scene, &cam, &SceneStyle::default(), size, 90.0, 4, SweepAxis::Horizontal).unwrap();
    let (a, b) = (&frames[0], &frames[2]);
    let mut differing = 0;
    for y in 0..size.1 {
        for x in 0..size.0 {
            differing += (a.get(x, y) != b.get(size.0 - 1 - x, y)) as usize;
        }
    }
    assert_eq!(differing, 0);
}

#[test]
fn monge_views_match_axonometric_equivalents() {
    let traj = attractor(3000);
    for plane in [MongePlane::U2U1, MongePlane::IU1, MongePlane::IU2] {
        let (az, el, transposed) = plane.axonometric_equivalent();
        let cam = Camera::new(az, el, StateVector::new(0.2, -0.1, 0.3), 0.02).unwrap();
        let monge = View { projection: Projection::Monge(plane), camera: cam };
        let axo = View { projection: Projection::Axonometric, camera: cam };
        for &x in &traj {
            let m = monge.project(x);
            let a = axo.project(x);
            let a = if transposed { [a[1], a[0]] } else { a };
            assert_eq!(m, a, "{plane:?}");
        }
    }
}

#[test]
fn sweep_renders_are_deterministic() {
    let traj = attractor(2000);
    let rep = report();
    let segs = rep.intersection_segments();
    let scene = Scene { params: &DOUBLE_SCROLL, trajectory: &traj, planes: &rep.planes, segments: &segs, iv_overlay: false };
    let cam = fit_camera(&scene, (96, 96), 0.1);
    let style = SceneStyle::default();
    let a = render_sweep(&scene, &cam, &style, (96, 96), 5.0, 12, SweepAxis::Vertical).unwrap();
    let b = render_sweep(&scene, &cam, &style, (96, 96), 5.0, 12, SweepAxis::Vertical).unwrap();
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let paths = write_frames(dir.path(), &a).unwrap();
    assert_eq!(paths.len(), 12);
    assert!(paths[11].ends_with("frame_00011.ppm"));
    assert_eq!(std::fs::read(&paths[3]).unwrap(), a[3].to_ppm());
}

#[test]
fn render_errors() {
    let scene = Scene { params: &DOUBLE_SCROLL, trajectory: &[], planes: &[], segments: &[], iv_overlay: false };
    let view = View { projection: Projection::Axonometric, camera: Camera::default() };
    assert!(matches!(render_frame(&scene, &view, &SceneStyle::default(), (100, 100)), Err(RenderError::EmptyScene)));
    let pts = [StateVector::ORIGIN];
    let scene = Scene { trajectory: &pts, ..scene };
    assert!(matches!(render_frame(&scene, &view, &SceneStyle::default(), (63, 100)), Err(RenderError::TooSmall(63, 100))));
    assert!(Camera::new(0.0, 0.0, StateVector::ORIGIN, 0.0).is_err());
}

#[test]
fn iv_curves_cross_at_singularities() {
    let set = find_singularities(&DOUBLE_SCROLL).unwrap();
    let [g, load] = iv_curves(&DOUBLE_SCROLL, -3.0, 3.0, IV_SAMPLES);
    assert_eq!(g.len(), IV_SAMPLES);
    for s in &set.singularities {
        let u = s.location.u1;
        let gl = DOUBLE_SCROLL.nonlinearity(u);
        assert!((gl - s.location.i).abs() <= 1e-12);
        assert!((load[0][1] + DOUBLE_SCROLL.g_load * load[0][0]).abs() <= 1e-12);
    }
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against a checked-in file; `UPDATE_GOLDEN=1` rewrites it.
fn check_golden(name: &str, bytes: &[u8]) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, bytes).unwrap();
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(want == bytes, "{name} differs from golden");
}

#[test]
fn golden_frames() {
    let traj = attractor(4000);
    let rep = report();
    let segs = rep.intersection_segments();
    let scene = Scene { params: &DOUBLE_SCROLL, trajectory: &traj, planes: &rep.planes, segments: &segs, iv_overlay: true };
    let size = (96, 80);
    let cam = fit_camera(&scene, size, 0.05);
    let style = SceneStyle::default();
    let monge = View { projection: Projection::Monge(MongePlane::IU1), camera: cam };
    check_golden("iu1.ppm", &render_frame(&scene, &monge, &style, size).unwrap().to_ppm());
    let axo = View { projection: Projection::Axonometric, camera: cam.with_angles(35.0, 25.0).unwrap() };
    check_golden("axo_35_25.ppm", &render_frame(&scene, &axo, &style, size).unwrap().to_ppm());
    let short = Scene { trajectory: &traj[..200], ..scene };
    check_golden("iu1.svg", render_svg(&short, &monge, &style, (64, 64)).unwrap().as_bytes());
}

proptest! {
    #[test]
    fn projection_is_linear(
        az in 0.0f64..360.0, el in -90.0f64..90.0,
        a in prop::array::uniform3(-5.0f64..5.0), b in prop::array::uniform3(-5.0f64..5.0),
        s in -3.0f64..3.0,
    ) {
        let cam = Camera::new(az, el, StateVector::ORIGIN, 1.0).unwrap();
        let (x, y) = (StateVector::from_array(a), StateVector::from_array(b));
        let lhs = cam.rotate(x + y * s);
        let (px, py) = (cam.rotate(x), cam.rotate(y));
        for k in 0..3 {
            prop_assert!((lhs[k] - (px[k] + s * py[k])).abs() <= 1e-12 * 30.0);
        }
        // Rotation preserves length.
        let n2 = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        prop_assert!((n2(px) - n2(a)).abs() <= 1e-12 * n2(a).max(1.0));
    }

    #[test]
    fn pole_crossing_keeps_view_direction(az in 0.0f64..360.0, over in 0.1f64..89.0) {
        let a = Camera::new(az, 90.0 + over, StateVector::ORIGIN, 1.0).unwrap();
        prop_assert!(a.elevation <= 90.0 && a.elevation >= -90.0);
        prop_assert!(a.azimuth >= 0.0 && a.azimuth < 360.0);
    }
}
