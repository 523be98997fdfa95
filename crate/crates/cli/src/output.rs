//! Artifact rendering: CSV tables, JSON documents and SVG polylines.

use std::fmt::Write as _;

use serde_json::{json, Value};

/// Everything a subcommand produces; rendered in the requested format.
pub struct Artifact {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub plot: Option<Plot>,
    /// A fuzz campaign or suite found a violation.
    pub violation: bool,
}

pub struct Plot {
    pub title: String,
    /// Separate polylines; a trace with gaps is split into several.
    pub lines: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"` for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&t| num(t)).collect())
}

/// Shortest round-trip decimal (exponent form for very small or large values), with `inf`/`-inf`/`nan` for non-finite values.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        serde_json::to_string(&v).unwrap_or_else(|_| format!("{v}"))
    }
}

/// Point as `a;b;c` (commas would clash with CSV).
pub fn point_cell(v: &[f64]) -> String {
    v.iter().map(|&t| cell(t)).collect::<Vec<_>>().join(";")
}

pub fn render(a: &Artifact, format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&a.json).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&a.header).map_err(|e| e.to_string())?;
            for row in &a.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            let bytes = w.into_inner().map_err(|e| e.to_string())?;
            String::from_utf8(bytes).map_err(|e| e.to_string())
        }
        Format::Svg => match &a.plot {
            Some(p) => Ok(svg(p)),
            None => Err("this subcommand has no SVG output; use csv or json".into()),
        },
    }
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

fn svg(p: &Plot) -> String {
    let pts = p.lines.iter().flatten().filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // Equal scales on both axes so circles stay round.
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let inner = SIZE - 2.0 * MARGIN;
    let map = |x: f64, y: f64| (MARGIN + (x - x0) / span * inner, SIZE - MARGIN - (y - y0) / span * inner);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-size="14">{}</text>"#, escape(&p.title));
    let (ax0, ay0) = map(x0, y0);
    let (ax1, _) = map(x0 + span, y0);
    let (_, ay1) = map(x0, y0 + span);
    let _ = writeln!(s, r#"<line x1="{ax0:.3}" y1="{ay0:.3}" x2="{ax1:.3}" y2="{ay0:.3}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{ax0:.3}" y1="{ay0:.3}" x2="{ax0:.3}" y2="{ay1:.3}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{ax0:.3}" y="{:.3}" font-size="11">{}</text>"#, ay0 + 16.0, escape(&format!("{x0:.4}")));
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{}</text>"#, ax1, ay0 + 16.0, escape(&format!("{:.4}", x0 + span)));
    let _ = writeln!(s, r#"<text x="{:.3}" y="{ay0:.3}" font-size="11" text-anchor="end">{}</text>"#, ax0 - 4.0, escape(&format!("{y0:.4}")));
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{}</text>"#, ax0 - 4.0, ay1 + 4.0, escape(&format!("{:.4}", y0 + span)));
    for line in &p.lines {
        let coords: Vec<String> = line
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (u, v) = map(x, y);
                format!("{u:.3},{v:.3}")
            })
            .collect();
        if coords.len() >= 2 {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="black" points="{}"/>"#, coords.join(" "));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_cells() {
        assert_eq!(cell(f64::INFINITY), "inf");
        assert_eq!(cell(f64::NEG_INFINITY), "-inf");
        assert_eq!(cell(0.5), "0.5");
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(point_cell(&[1.0, -2.5]), "1.0;-2.5");
        assert_eq!(cell(1.5e-15), "1.5e-15");
    }

    #[test]
    fn svg_has_one_polyline_per_segment() {
        let p = Plot { title: "a<b".into(), lines: vec![vec![(0.0, 0.0), (1.0, 1.0)], vec![(2.0, 0.0), (3.0, 1.0)]] };
        let s = svg(&p);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a&lt;b"));
    }
}
