//! Chart coordinates for sphere representations and their CSV/SVG renderings.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use holo_core::cohomology::{stabilizer_class, Stabilizer};
use holo_core::reduction::pillowcase_chart;
use holo_core::solver::fingerprint;
use holo_core::Representation;

use crate::{CliError, CliResult};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ChartRow {
    pub coords: Vec<f64>,
    pub stabilizer: Stabilizer,
    pub corner: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Charted {
    pub columns: Vec<String>,
    /// Plot window `[x0, x1] × [y0, y1]` for the first two coordinates.
    pub window: [f64; 4],
    pub rows: Vec<ChartRow>,
    pub pillowcase: bool,
}

/// Pillowcase coordinates; only for four-punctured spheres.
pub fn pillowcase(reps: &[Representation]) -> CliResult<Charted> {
    let mut rows = Vec::with_capacity(reps.len());
    for r in reps {
        if r.len() != 4 {
            return Err(CliError::usage(format!("pillowcase chart needs 4 boundary points, got {}", r.len())));
        }
        let p = pillowcase_chart(r)?;
        rows.push(ChartRow { coords: vec![p.gamma, p.theta], stabilizer: stabilizer_class(r), corner: p.is_corner() });
    }
    sort_rows(&mut rows);
    Ok(Charted { columns: vec!["gamma".into(), "theta".into()], window: [0.0, PI, 0.0, TAU], rows, pillowcase: true })
}

/// Trace fingerprints of arbitrary sphere representations.
pub fn fingerprints(reps: &[Representation]) -> Charted {
    let mut rows: Vec<ChartRow> = reps
        .iter()
        .map(|r| ChartRow { coords: fingerprint(r), stabilizer: stabilizer_class(r), corner: false })
        .collect();
    sort_rows(&mut rows);
    let width = rows.first().map_or(0, |r| r.coords.len());
    Charted {
        columns: (0..width).map(|k| format!("f{k}")).collect(),
        window: [-1.0, 1.0, -1.0, 1.0],
        rows,
        pillowcase: false,
    }
}

fn sort_rows(rows: &mut [ChartRow]) {
    rows.sort_by(|a, b| {
        a.coords.iter().zip(&b.coords).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn color(s: Stabilizer) -> &'static str {
    match s {
        Stabilizer::Irreducible => "#1f77b4",
        Stabilizer::Abelian => "#d62728",
        Stabilizer::Central => "#2ca02c",
    }
}

impl Charted {
    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push_str(",stabilizer");
        if self.pillowcase {
            s.push_str(",corner");
        }
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.coords.iter().map(|x| format!("{x:.12}")).collect();
            s.push_str(&cells.join(","));
            write!(s, ",{}", r.stabilizer).unwrap();
            if self.pillowcase {
                write!(s, ",{}", u8::from(r.corner)).unwrap();
            }
            s.push('\n');
        }
        s
    }

    fn to_px(&self, c: &[f64]) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.window;
        let w = SIZE - 2.0 * MARGIN;
        let x = c.first().copied().unwrap_or(0.0);
        let y = c.get(1).copied().unwrap_or(0.0);
        (MARGIN + (x - x0) / (x1 - x0) * w, SIZE - MARGIN - (y - y0) / (y1 - y0) * w)
    }

    /// 512×512 scatter of the first two coordinates. Output depends only on the rows.
    pub fn svg(&self, polyline: bool) -> String {
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="512" height="512" viewBox="0 0 512 512">"#).unwrap();
        writeln!(s, r##"<rect x="0" y="0" width="512" height="512" fill="#ffffff"/>"##).unwrap();
        let (l, b) = self.to_px(&[self.window[0], self.window[2]]);
        let (r, t) = self.to_px(&[self.window[1], self.window[3]]);
        writeln!(s, r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444444"/>"##, r - l, b - t)
            .unwrap();
        let (xl, yl) = (self.columns.first().cloned().unwrap_or_default(), self.columns.get(1).cloned().unwrap_or_default());
        writeln!(s, r#"<text x="256" y="{:.2}" text-anchor="middle" font-size="14">{xl}</text>"#, SIZE - 12.0).unwrap();
        writeln!(s, r#"<text x="14" y="256" text-anchor="middle" font-size="14" transform="rotate(-90 14 256)">{yl}</text>"#)
            .unwrap();
        if self.pillowcase {
            for (g, th) in [(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)] {
                let (x, y) = self.to_px(&[g, th]);
                writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="7" fill="none" stroke="#888888"/>"##).unwrap();
            }
        }
        if polyline && self.rows.len() > 1 {
            let pts: Vec<String> = self
                .rows
                .iter()
                .map(|r| {
                    let (x, y) = self.to_px(&r.coords);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##, pts.join(" "))
                .unwrap();
        }
        for row in &self.rows {
            let (x, y) = self.to_px(&row.coords);
            let rad = if row.corner { 5.0 } else { 2.5 };
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{rad}" fill="{}"/>"#, color(row.stabilizer)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}
