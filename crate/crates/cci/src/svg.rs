//! Small-multiples impulse-response plot: one panel per variable, two
//! columns, shaded band around the point response and a zero line.

use std::fmt::Write;

use cci_core::proxy::IrfBundle;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 200.0;
const MARGIN: f64 = 36.0;
const COLUMNS: usize = 2;
const BAND_FILL: &str = "#8fd19e";
const LINE: &str = "#1f3b73";

struct Frame {
    x0: f64,
    y0: f64,
    lo: f64,
    hi: f64,
    horizon: usize,
}

impl Frame {
    fn x(&self, h: usize) -> f64 {
        self.x0 + MARGIN + (PANEL_W - 2.0 * MARGIN) * h as f64 / self.horizon.max(1) as f64
    }

    fn y(&self, v: f64) -> f64 {
        let inner = PANEL_H - 2.0 * MARGIN;
        self.y0 + MARGIN + inner * (self.hi - v) / (self.hi - self.lo)
    }
}

fn path(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (k, (x, y)) in points.enumerate() {
        let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { " L" });
    }
    d
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn irf_svg(bundle: &IrfBundle) -> String {
    let n = bundle.names.len();
    let rows = n.div_ceil(COLUMNS);
    let width = PANEL_W * COLUMNS as f64;
    let height = PANEL_H * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for j in 0..n {
        let (col, row) = (j % COLUMNS, j / COLUMNS);
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for h in 0..=bundle.horizon {
            for v in [bundle.lower[(h, j)], bundle.upper[(h, j)], bundle.point[(h, j)]] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if hi - lo < 1e-12 {
            hi += 1.0;
            lo -= 1.0;
        }
        let pad = 0.05 * (hi - lo);
        let f = Frame {
            x0: col as f64 * PANEL_W,
            y0: row as f64 * PANEL_H,
            lo: lo - pad,
            hi: hi + pad,
            horizon: bundle.horizon,
        };

        let upper = (0..=bundle.horizon).map(|h| (f.x(h), f.y(bundle.upper[(h, j)])));
        let lower = (0..=bundle.horizon).rev().map(|h| (f.x(h), f.y(bundle.lower[(h, j)])));
        let _ = writeln!(
            out,
            r#"<path d="{} Z" fill="{BAND_FILL}" fill-opacity="0.6" stroke="none"/>"#,
            path(upper.chain(lower))
        );
        let zero = f.y(0.0);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="black" stroke-width="0.5" stroke-dasharray="3,3"/>"#,
            f.x(0),
            f.x(bundle.horizon)
        );
        let point = (0..=bundle.horizon).map(|h| (f.x(h), f.y(bundle.point[(h, j)])));
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{LINE}" stroke-width="1.5"/>"#, path(point));
        let bottom = f.y0 + PANEL_H - MARGIN;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="gray" stroke-width="0.5"/>"#,
            f.x(0),
            f.y0 + MARGIN,
            PANEL_W - 2.0 * MARGIN,
            PANEL_H - 2.0 * MARGIN
        );
        for h in (0..=bundle.horizon).step_by(bundle.horizon.div_ceil(6).max(1)) {
            let _ =
                writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{h}</text>"#, f.x(h), bottom + 14.0);
        }
        for v in [f.lo + pad, f.hi - pad] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
                f.x(0) - 4.0,
                f.y(v) + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
            f.x0 + PANEL_W / 2.0,
            f.y0 + MARGIN - 10.0,
            escape(&bundle.names[j])
        );
    }
    out.push_str("</svg>\n");
    out
}
