//! CSV and SVG emission. Every file is written to a temporary sibling and
//! renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header comments, a column line and rows, LF-terminated.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &Header, columns: &[&str]) -> Self {
        let mut text = header.render();
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Provenance lines carried by every output file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub config_sha256: String,
    pub tolerances: String,
    pub extra: Vec<String>,
}

impl Header {
    pub fn render(&self) -> String {
        let mut s = format!(
            "# pspect {} {}\n# config_sha256={}\n# tolerances {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_sha256,
            self.tolerances
        );
        for e in &self.extra {
            let _ = writeln!(s, "# {e}");
        }
        s
    }
}

/// Writes `contents` to `dir/name` through a temporary file in `dir`.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .map_err(|e| e.error)
        .with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}

/// A polyline plot with linear `x` and logarithmic `y`.
pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// `(label, colour, points)`.
    pub series: Vec<(String, &'a str, Vec<(f64, f64)>)>,
    /// Vertical reference lines `(x, label)`.
    pub marks: Vec<(f64, String)>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

impl Plot<'_> {
    pub fn render(&self) -> String {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.2.iter())
            .filter(|(x, y)| x.is_finite() && *y > 0.0);
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y.log10());
            y1 = y1.max(y.log10());
        }
        for (x, _) in &self.marks {
            x0 = x0.min(*x);
            x1 = x1.max(*x);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-12 * x0.abs().max(1.0) {
            let pad = 0.05 * x0.abs().max(1.0);
            x0 -= pad;
            x1 += pad;
        } else {
            let pad = 0.04 * (x1 - x0);
            x0 -= pad;
            x1 += pad;
        }
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let py = |ly: f64| H - BOTTOM - (ly - y0) / (y1 - y0) * (H - TOP - BOTTOM);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            esc(self.title)
        );
        let (bx0, bx1, by0, by1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            s,
            r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            bx1 - bx0,
            by1 - by0
        );
        for t in nice_ticks(x0, x1, 6) {
            let x = px(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{by1}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                by1 + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                by1 + 18.0,
                tick_label(t)
            );
        }
        let mut d = y0;
        while d <= y1 + 1e-9 {
            let y = py(d);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y:.2}" x2="{bx0}" y2="{y:.2}" stroke="black"/>"#,
                bx0 - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"#,
                bx0 - 8.0,
                y + 4.0,
                d as i64
            );
            d += 1.0;
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (bx0 + bx1) / 2.0,
            H - 14.0,
            esc(self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (by0 + by1) / 2.0,
            esc(self.y_label)
        );
        for (x, label) in &self.marks {
            let xx = px(*x);
            let _ = writeln!(
                s,
                r#"<line x1="{xx:.2}" y1="{by0}" x2="{xx:.2}" y2="{by1}" stroke="grey" stroke-dasharray="4 3"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" fill="grey">{}</text>"#,
                xx + 3.0,
                by0 + 14.0,
                esc(label)
            );
        }
        for (i, (label, colour, points)) in self.series.iter().enumerate() {
            let coords: Vec<String> = points
                .iter()
                .filter(|(x, y)| x.is_finite() && *y > 0.0)
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y.log10())))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
            let ly = by0 + 16.0 * (i as f64 + 1.0);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{ly}" fill="{colour}" text-anchor="end">{}</text>"#,
                bx1 - 6.0,
                esc(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.6}");
    trim_zeros(&s).to_string()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(2.4674011002723395), "2.4674011002723395");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.5), "-0.5");
        assert_eq!(num(1e-9), "1.0000000000000001e-09");
        assert_eq!(num(123456.0), "123456");
        assert_eq!(num(1e20), "1e+20");
        for x in [
            std::f64::consts::PI,
            -1.0 / 3.0,
            6.02214076e23,
            1.5e-300,
            0.1,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let h = Header {
            command: "eig".into(),
            config_sha256: "ab".into(),
            tolerances: "t".into(),
            extra: vec![],
        };
        let mut c = Csv::new(&h, &["a", "b"]);
        c.row(&[num(1.0), num(2.5)]);
        assert!(c.as_str().ends_with("a,b\n1,2.5\n"));
        assert!(!c.as_str().contains('\r'));
    }

    #[test]
    fn atomic_write_replaces() {
        let d = tempfile::tempdir().unwrap();
        write_atomic(d.path(), "x.csv", "one\n").unwrap();
        let p = write_atomic(d.path(), "x.csv", "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 1);
    }

    #[test]
    fn svg_is_well_formed() {
        let plot = Plot {
            title: "t",
            x_label: "x",
            y_label: "y",
            series: vec![("a".into(), "black", vec![(1.0, 1e-3), (2.0, 1e3)])],
            marks: vec![(1.5, "m".into())],
        };
        let s = plot.render();
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("<polyline"));
        assert!(s.contains("1e-3") && s.contains("1e3"));
    }
}
