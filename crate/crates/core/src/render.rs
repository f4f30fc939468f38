//! Small-multiples SVG grid of cumulative overnight (blue) and intraday
//! (green) curves, one cell per instrument or path.
//!
//! Output is plain SVG 1.1 text with coordinates at two decimals, so equal
//! inputs give equal bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decomposition::CumulativeCurves;
use crate::error::{Error, Result};
use crate::report::format_fraction;

pub const OVERNIGHT_COLOR: &str = "blue";
pub const INTRADAY_COLOR: &str = "green";
/// Points kept per curve; longer curves are thinned evenly.
pub const MAX_POINTS: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum YScale {
    /// Cumulative return `c`, axis from -1 up.
    #[default]
    Linear,
    /// `log10(1 + c)`.
    Log,
}

impl std::str::FromStr for YScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(YScale::Linear),
            "log" => Ok(YScale::Log),
            other => Err(Error::Config(format!("unknown scale `{other}` (linear|log)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotSpec {
    pub rows: usize,
    pub cols: usize,
    pub scale: YScale,
    pub cell_width: f64,
    pub cell_height: f64,
}

impl PlotSpec {
    /// Five columns, as many rows as needed.
    pub fn auto(n: usize, scale: YScale) -> Self {
        let cols = n.clamp(1, 5);
        Self {
            rows: n.div_ceil(cols).max(1),
            cols,
            scale,
            cell_width: 240.0,
            cell_height: 170.0,
        }
    }
}

const PAD_X: f64 = 10.0;
const PAD_TOP: f64 = 22.0;
const PAD_BOTTOM: f64 = 34.0;

fn f2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Indices kept when thinning `n` points to at most [`MAX_POINTS`]; the
/// first and last are always kept.
fn thinned(n: usize) -> Vec<usize> {
    if n <= MAX_POINTS {
        return (0..n).collect();
    }
    let step = n.div_ceil(MAX_POINTS - 1);
    let mut idx: Vec<usize> = (0..n).step_by(step).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}

fn transformed(c: &CumulativeCurves, scale: YScale) -> Result<[Vec<f64>; 2]> {
    let map = |leg: &[f64], name: &str| -> Result<Vec<f64>> {
        match scale {
            YScale::Linear => Ok(leg.to_vec()),
            YScale::Log => leg
                .iter()
                .map(|&v| {
                    let growth = 1.0 + v;
                    if growth > 0.0 && growth.is_finite() {
                        Ok(growth.log10())
                    } else {
                        Err(Error::Render {
                            instrument: c.instrument_id.clone(),
                            message: format!("{name} curve reaches {v}, which has no logarithm of 1 + c"),
                        })
                    }
                })
                .collect(),
        }
    };
    Ok([map(&c.overnight, "overnight")?, map(&c.intraday, "intraday")?])
}

fn cell(out: &mut String, c: &CumulativeCurves, spec: &PlotSpec, x0: f64, y0: f64) -> Result<()> {
    let [overnight, intraday] = transformed(c, spec.scale)?;
    let finite_max = overnight.iter().chain(&intraday).copied().fold(0.0f64, f64::max);
    let finite_min = overnight.iter().chain(&intraday).copied().fold(0.0f64, f64::min);
    let (lo, mut hi) = match spec.scale {
        YScale::Linear => (-1.0, finite_max.max(0.0)),
        YScale::Log => (finite_min, finite_max),
    };
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }

    let w = spec.cell_width - 2.0 * PAD_X;
    let h = spec.cell_height - PAD_TOP - PAD_BOTTOM;
    let n = c.overnight.len();
    let x_of = |i: usize| x0 + PAD_X + if n > 1 { w * i as f64 / (n - 1) as f64 } else { 0.0 };
    let y_of = |v: f64| y0 + PAD_TOP + h * (hi - v) / (hi - lo);

    let id = escape(&c.instrument_id);
    writeln!(
        out,
        r##"<g id="cell-{id}"><rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="#999999" stroke-width="0.5"/>"##,
        f2(x0 + PAD_X),
        f2(y0 + PAD_TOP),
        f2(w),
        f2(h)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{id}</text>"#,
        f2(x0 + spec.cell_width / 2.0),
        f2(y0 + 15.0)
    )
    .unwrap();
    // zero return is y = 0 on both scales
    writeln!(
        out,
        r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#666666" stroke-width="0.5" stroke-dasharray="3,2"/>"##,
        f2(x0 + PAD_X),
        f2(x0 + PAD_X + w),
        y = f2(y_of(0.0))
    )
    .unwrap();
    for (values, color) in [(&overnight, OVERNIGHT_COLOR), (&intraday, INTRADAY_COLOR)] {
        let points: Vec<String> = thinned(n)
            .into_iter()
            .map(|i| format!("{},{}", f2(x_of(i)), f2(y_of(values[i]))))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
    }
    let base = y0 + spec.cell_height - 20.0;
    for (k, (label, v, color)) in [
        ("overnight", c.final_overnight(), OVERNIGHT_COLOR),
        ("intraday", c.final_intraday(), INTRADAY_COLOR),
    ]
    .into_iter()
    .enumerate()
    {
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" fill="{color}">{label} {}</text>"#,
            f2(x0 + PAD_X),
            f2(base + 12.0 * k as f64),
            format_fraction(v)
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    Ok(())
}

/// Render `curves` row by row into a `spec.rows x spec.cols` grid.
pub fn render_grid(curves: &[CumulativeCurves], spec: &PlotSpec) -> Result<String> {
    if curves.len() > spec.rows * spec.cols {
        return Err(Error::Config(format!(
            "{} curves do not fit a {}x{} grid",
            curves.len(),
            spec.rows,
            spec.cols
        )));
    }
    let width = spec.cols as f64 * spec.cell_width;
    let height = spec.rows as f64 * spec.cell_height;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = f2(width),
        h = f2(height)
    )
    .unwrap();
    writeln!(out, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, f2(width), f2(height)).unwrap();
    for (k, c) in curves.iter().enumerate() {
        let (row, col) = (k / spec.cols, k % spec.cols);
        cell(&mut out, c, spec, col as f64 * spec.cell_width, row as f64 * spec.cell_height)?;
    }
    out.push_str("</svg>\n");
    Ok(out)
}
