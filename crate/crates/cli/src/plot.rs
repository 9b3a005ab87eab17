//! Deterministic SVG line plots and `Pi` heatmaps (binary PPM and SVG).
//! Nothing time- or host-dependent is written.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

fn bounds(series: &[Series]) -> Option<(f64, f64, f64, f64)> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let mut b: Option<(f64, f64, f64, f64)> = None;
    for &(x, y) in pts {
        b = Some(match b {
            None => (x, x, y, y),
            Some((a, c, d, e)) => (a.min(x), c.max(x), d.min(y), e.max(y)),
        });
    }
    b.map(|(x0, x1, y0, y1)| {
        let pad = |lo: f64, hi: f64| {
            let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) * 0.1 };
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    })
}

/// Line plot with axes, five ticks per axis and a legend.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = bounds(series).unwrap_or((0.0, 1.0, 0.0, 1.0));
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let x = x0 + t * (x1 - x0);
        let y = y0 + t * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"#,
            sx(x),
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 20.0,
            tick(x)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            MARGIN - 5.0,
            sy(y),
            MARGIN,
            MARGIN - 8.0,
            sy(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            pts.join(" "),
            s.color
        );
        if !s.dashed {
            for p in &pts {
                let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{}"/>"#, s.color);
            }
        }
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"{dash}/><text x="{4}" y="{5}">{6}</text>"#,
            MARGIN + 10.0,
            ly,
            MARGIN + 34.0,
            s.color,
            MARGIN + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `Pi` trace on an `nx` by `ny` node raster, row 0 at the smallest
/// `x_{n-1}`, plus overlay points in node coordinates.
pub struct Heatmap {
    pub nx: usize,
    pub ny: usize,
    /// `values[i * ny + j]` at tangential indices `(i, j)`.
    pub values: Vec<f64>,
    pub overlay: Vec<(f64, f64)>,
}

impl Heatmap {
    fn pixel_size(&self) -> (usize, usize) {
        let px = (512 / self.nx).max(1);
        let py = if self.ny == 1 { 32 } else { (512 / self.ny).max(1) };
        (px, py)
    }

    fn color(&self, v: f64, max: f64) -> [u8; 3] {
        if max.is_nan() || max <= 0.0 {
            return [0, 0, 80];
        }
        let t = (v / max).clamp(0.0, 1.0);
        // dark blue -> teal -> yellow
        let (a, b, s) = if t < 0.5 {
            ([20.0, 20.0, 90.0], [30.0, 150.0, 140.0], t / 0.5)
        } else {
            ([30.0, 150.0, 140.0], [250.0, 230.0, 40.0], (t - 0.5) / 0.5)
        };
        let mix = |k: usize| (a[k] + (b[k] - a[k]) * s).round() as u8;
        [mix(0), mix(1), mix(2)]
    }

    fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Binary PPM (`P6`); overlay points become red 3x3 dots.
    pub fn to_ppm(&self) -> Vec<u8> {
        let (px, py) = self.pixel_size();
        let (w, hgt) = (self.nx * px, self.ny * py);
        let max = self.max();
        let mut img = vec![0u8; w * hgt * 3];
        for i in 0..self.nx {
            for j in 0..self.ny {
                let c = self.color(self.values[i * self.ny + j], max);
                let row0 = (self.ny - 1 - j) * py;
                for y in row0..row0 + py {
                    for x in i * px..(i + 1) * px {
                        img[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&c);
                    }
                }
            }
        }
        for &(a, b) in &self.overlay {
            let cx = ((a + 0.5) * px as f64).round() as i64;
            let cy = if self.ny == 1 {
                (hgt / 2) as i64
            } else {
                ((self.ny as f64 - 0.5 - b) * py as f64).round() as i64
            };
            for y in cy - 1..=cy + 1 {
                for x in cx - 1..=cx + 1 {
                    if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < hgt {
                        let k = (y as usize * w + x as usize) * 3;
                        img[k..k + 3].copy_from_slice(&[230, 30, 30]);
                    }
                }
            }
        }
        let mut out = format!("P6\n{w} {hgt}\n255\n").into_bytes();
        out.extend_from_slice(&img);
        out
    }

    /// SVG with one rectangle per run of equal colour and the overlay as a
    /// polyline.
    pub fn to_svg(&self) -> String {
        let (px, py) = self.pixel_size();
        let (w, hgt) = (self.nx * px, self.ny * py);
        let max = self.max();
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}" shape-rendering="crispEdges">"#
        );
        for j in 0..self.ny {
            let y = (self.ny - 1 - j) * py;
            let mut i = 0;
            while i < self.nx {
                let c = self.color(self.values[i * self.ny + j], max);
                let mut end = i + 1;
                while end < self.nx && self.color(self.values[end * self.ny + j], max) == c {
                    end += 1;
                }
                let _ = writeln!(
                    svg,
                    r##"<rect x="{}" y="{y}" width="{}" height="{py}" fill="#{:02x}{:02x}{:02x}"/>"##,
                    i * px,
                    (end - i) * px,
                    c[0],
                    c[1],
                    c[2]
                );
                i = end;
            }
        }
        if !self.overlay.is_empty() {
            if self.ny == 1 {
                for &(a, _) in &self.overlay {
                    let x = (a + 0.5) * px as f64;
                    let _ = writeln!(
                        svg,
                        r#"<line x1="{x:.2}" y1="0" x2="{x:.2}" y2="{hgt}" stroke="red" stroke-width="2"/>"#
                    );
                }
            } else {
                let pts: Vec<String> = self
                    .overlay
                    .iter()
                    .map(|&(a, b)| format!("{:.2},{:.2}", (a + 0.5) * px as f64, (self.ny as f64 - 0.5 - b) * py as f64))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
                    pts.join(" ")
                );
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}
