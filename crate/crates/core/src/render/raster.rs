//! RGB raster with the handful of primitives the renderer needs. All
//! drawing is integer-exact: no anti-aliasing, alpha blended in u32.

use std::io::{self, Write};

use crate::color::Rgba;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB triples, top row first.
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, background: Rgba) -> Self {
        let px = background.blend_over([0, 0, 0]);
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&px);
        }
        Image { width, height, pixels }
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let k = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    pub fn blend(&mut self, x: i64, y: i64, color: Rgba) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let k = (y as usize * self.width as usize + x as usize) * 3;
        let dst = [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]];
        self.pixels[k..k + 3].copy_from_slice(&color.blend_over(dst));
    }

    /// Square of side `size` centred on pixel `(x, y)`.
    pub fn fill_square(&mut self, x: i64, y: i64, size: u32, color: Rgba) {
        let size = size.max(1) as i64;
        let x0 = x - (size - 1) / 2;
        let y0 = y - (size - 1) / 2;
        for yy in y0..y0 + size {
            for xx in x0..x0 + size {
                self.blend(xx, yy, color);
            }
        }
    }

    /// Fills a convex polygon given in pixel coordinates. A pixel is inside
    /// when its centre is; each pixel is touched at most once.
    pub fn fill_convex_polygon(&mut self, vertices: &[[f64; 2]], color: Rgba) {
        if vertices.len() < 3 {
            return;
        }
        let ymin = vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let ymax = vertices.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        let row0 = (ymin - 0.5).ceil().max(0.0) as i64;
        let row1 = ((ymax - 0.5).floor() as i64).min(self.height as i64 - 1);
        for row in row0..=row1 {
            let yc = row as f64 + 0.5;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..vertices.len() {
                let a = vertices[k];
                let b = vertices[(k + 1) % vertices.len()];
                if (a[1] <= yc && yc < b[1]) || (b[1] <= yc && yc < a[1]) {
                    let x = a[0] + (yc - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
            if lo > hi {
                continue;
            }
            let c0 = (lo - 0.5).ceil().max(0.0) as i64;
            let c1 = ((hi - 0.5).ceil() as i64).min(self.width as i64);
            for col in c0..c1 {
                self.blend(col, row, color);
            }
        }
    }

    /// Bresenham line stamped with a square brush of side `width`.
    pub fn draw_line(&mut self, from: [f64; 2], to: [f64; 2], width: u32, color: Rgba) {
        let clamp = |v: f64| v.clamp(-1e6, 1e6).floor() as i64;
        let (mut x0, mut y0) = (clamp(from[0]), clamp(from[1]));
        let (x1, y1) = (clamp(to[0]), clamp(to[1]));
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        let margin = width as i64 + 1;
        let inside = |x: i64, y: i64, w: i64, h: i64| x >= -margin && y >= -margin && x < w + margin && y < h + margin;
        // Opaque stamping so overlapping brushes do not darken.
        let opaque = Rgba::rgb(color.0[0], color.0[1], color.0[2]);
        let stamp = if color.alpha() == 255 { opaque } else { color };
        loop {
            if inside(x0, y0, self.width as i64, self.height as i64) {
                self.fill_square(x0, y0, width, stamp);
            }
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    pub fn draw_polyline(&mut self, points: &[[f64; 2]], width: u32, color: Rgba) {
        for w in points.windows(2) {
            self.draw_line(w[0], w[1], width, color);
        }
    }

    /// Binary PPM (P6).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)?;
        out.flush()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.pixels.len() + 20);
        self.write_ppm(&mut v).expect("write to vec");
        v
    }

    pub fn count_not(&self, background: [u8; 3]) -> usize {
        self.pixels.chunks_exact(3).filter(|p| *p != background).count()
    }
}
