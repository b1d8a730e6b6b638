//! Box tables as CSV and their SVG rasters.
//!
//! The SVG is computed from the CSV text alone, so a table and its picture
//! can never disagree.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};

pub const HEADER: &str = "box,ix,it,x_lo,x_hi,t_lo,t_hi,class,recurrent,lyapunov";

const PLOT_SIZE: f64 = 512.0;
const MARGIN: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxRow {
    pub grid_box: usize,
    pub ix: usize,
    pub it: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub class: usize,
    pub recurrent: bool,
    pub lyapunov: Option<f64>,
}

/// CSV with the run configuration on a leading `#` line.
pub fn box_csv(config_json: &str, rows: &[BoxRow]) -> String {
    let mut out = String::new();
    writeln!(out, "# {config_json}").unwrap();
    writeln!(out, "{HEADER}").unwrap();
    for r in rows {
        let value = r.lyapunov.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.grid_box, r.ix, r.it, r.x_lo, r.x_hi, r.t_lo, r.t_hi, r.class, r.recurrent as u8, value
        )
        .unwrap();
    }
    out
}

pub fn parse_csv(text: &str) -> Result<(String, Vec<BoxRow>)> {
    let mut lines = text.lines();
    let comment = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| anyhow!("missing config line"))?;
    if lines.next() != Some(HEADER) {
        bail!("unexpected CSV header");
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            bail!("row {k}: expected 10 fields, got {}", f.len());
        }
        let num = |i: usize| -> Result<f64> { f[i].parse().with_context(|| format!("row {k} field {i}")) };
        let int = |i: usize| -> Result<usize> { f[i].parse().with_context(|| format!("row {k} field {i}")) };
        rows.push(BoxRow {
            grid_box: int(0)?,
            ix: int(1)?,
            it: int(2)?,
            x_lo: num(3)?,
            x_hi: num(4)?,
            t_lo: num(5)?,
            t_hi: num(6)?,
            class: int(7)?,
            recurrent: f[8] == "1",
            lyapunov: if f[9].is_empty() { None } else { Some(num(9)?) },
        });
    }
    Ok((comment.to_string(), rows))
}

fn class_color(class: usize, recurrent: bool) -> String {
    if !recurrent {
        return "#e4e4e4".into();
    }
    let hue = (class as f64 * 137.507_764).rem_euclid(360.0);
    format!("hsl({hue:.1},65%,45%)")
}

fn value_color(v: f64) -> String {
    let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("rgb({g},{g},{})", 255 - g / 2)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Boxes coloured by chain class (recurrent classes in colour, transient
/// boxes grey), or by Lyapunov value when the table carries one. Horizontal
/// runs of equal colour are merged.
pub fn svg_from_csv(text: &str) -> Result<String> {
    let (comment, mut rows) = parse_csv(text)?;
    if rows.is_empty() {
        bail!("empty box table");
    }
    let x0 = rows.iter().map(|r| r.x_lo).fold(f64::INFINITY, f64::min);
    let x1 = rows.iter().map(|r| r.x_hi).fold(f64::NEG_INFINITY, f64::max);
    let t0 = rows.iter().map(|r| r.t_lo).fold(f64::INFINITY, f64::min);
    let t1 = rows.iter().map(|r| r.t_hi).fold(f64::NEG_INFINITY, f64::max);
    let (sx, st) = (PLOT_SIZE / (x1 - x0), PLOT_SIZE / (t1 - t0));
    rows.sort_by_key(|r| (r.it, r.ix));
    let color = |r: &BoxRow| match r.lyapunov {
        Some(v) => value_color(v),
        None => class_color(r.class, r.recurrent),
    };
    let side = PLOT_SIZE + 2.0 * MARGIN;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}" shape-rendering="crispEdges">"#
    )?;
    writeln!(out, "<desc>{}</desc>", escape(&comment))?;
    writeln!(out, r##"<rect width="{side}" height="{side}" fill="#ffffff"/>"##)?;
    let mut i = 0;
    while i < rows.len() {
        let c = color(&rows[i]);
        let mut j = i + 1;
        while j < rows.len() && rows[j].it == rows[i].it && rows[j].ix == rows[j - 1].ix + 1 && color(&rows[j]) == c {
            j += 1;
        }
        let (first, last) = (&rows[i], &rows[j - 1]);
        let x = MARGIN + (first.x_lo - x0) * sx;
        let w = (last.x_hi - first.x_lo) * sx;
        // t grows upwards.
        let y = MARGIN + (t1 - first.t_hi) * st;
        let h = (first.t_hi - first.t_lo) * st;
        writeln!(out, r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="{c}"/>"#)?;
        i = j;
    }
    writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT_SIZE}" height="{PLOT_SIZE}" fill="none" stroke="#333333"/>"##
    )?;
    out.push_str("</svg>\n");
    Ok(out)
}
