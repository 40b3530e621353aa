//! SVG 1.1 output with the same geometry and painter's order as the raster.

use std::fmt::Write as _;

use super::{check_size, iv_pixels, RenderError, Scene, SceneStyle, View};
use crate::color::Rgba;

fn rgb(c: Rgba) -> String {
    let [r, g, b, _] = c.0;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn opacity(c: Rgba) -> String {
    format!("{:.4}", c.alpha() as f64 / 255.0)
}

fn points_attr(pts: &[[f64; 2]]) -> String {
    let mut s = String::new();
    for (k, p) in pts.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.3},{:.3}", p[0], p[1]);
    }
    s
}

pub fn render_svg(scene: &Scene<'_>, view: &View, style: &SceneStyle, size: (u32, u32)) -> Result<String, RenderError> {
    check_size(size)?;
    if scene.is_empty() {
        return Err(RenderError::EmptyScene);
    }
    style.validate().map_err(RenderError::Invalid)?;
    let (w, h) = size;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="{}"/>"#, rgb(style.background));
    for plane in scene.planes {
        let quad = plane.corners().map(|c| view.to_pixel(c, size));
        let _ = writeln!(
            out,
            r#"<polygon class="plane {}" points="{}" fill="{}" fill-opacity="{}"/>"#,
            plane.label,
            points_attr(&quad),
            rgb(plane.color),
            opacity(plane.color)
        );
    }
    if scene.iv_overlay {
        if let Some(plane) = view.shows_iv() {
            let curves = iv_pixels(scene, view, plane, size);
            for (pts, color) in curves.iter().zip(style.iv_colors) {
                let _ = writeln!(
                    out,
                    r#"<polyline class="iv" points="{}" fill="none" stroke="{}" stroke-opacity="{}" stroke-width="{}"/>"#,
                    points_attr(pts),
                    rgb(color),
                    opacity(color),
                    style.iv_line_width
                );
            }
        }
    }
    if !scene.trajectory.is_empty() {
        let s = style.trajectory_point_size;
        let off = ((s - 1) / 2) as f64;
        let _ = writeln!(
            out,
            r#"<g class="trajectory" fill="{}" fill-opacity="{}">"#,
            rgb(style.trajectory_color),
            opacity(style.trajectory_color)
        );
        for &x in scene.trajectory {
            let p = view.to_pixel(x, size);
            if p[0].is_finite() && p[1].is_finite() {
                let _ = writeln!(out, r#"<rect x="{:.0}" y="{:.0}" width="{s}" height="{s}"/>"#, p[0].floor() - off, p[1].floor() - off);
            }
        }
        let _ = writeln!(out, "</g>");
    }
    for seg in scene.segments {
        let [a, b] = seg.endpoints().map(|e| view.to_pixel(e, size));
        let _ = writeln!(
            out,
            r#"<line class="segment" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="{}"/>"#,
            a[0],
            a[1],
            b[0],
            b[1],
            rgb(style.segment_color),
            style.segment_width
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
