//! Static plots of a first-order field: SVG panels and CSV point blocks.
//!
//! The SVG is a 2x2 sheet. Top left holds direction glyphs, top right the
//! traced curves, bottom left level sets of an invariant, and bottom right
//! all three overlaid.

use std::fmt::Write;

use serde::Serialize;

use crate::chars::{trace_curves, CharacteristicOde, Curve, TraceError};
use crate::expr::{Expr, SampleRegion};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Seeds {
    /// `n x n` interior lattice.
    Grid(usize),
    /// `n` points along the horizontal midline.
    Line(usize),
    Points(Vec<(f64, f64)>),
}

impl Seeds {
    pub fn points<T: Scalar>(&self, region: &SampleRegion<T>) -> Vec<(T, T)> {
        let (x0, x1) = (region.x.0.as_f64(), region.x.1.as_f64());
        let (y0, y1) = (region.y.0.as_f64(), region.y.1.as_f64());
        let at = |i: usize, n: usize, lo: f64, hi: f64| lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let pts: Vec<(f64, f64)> = match self {
            Seeds::Grid(n) => (0..*n)
                .flat_map(|i| (0..*n).map(move |j| (i, j)))
                .map(|(i, j)| (at(i, *n, x0, x1), at(j, *n, y0, y1)))
                .collect(),
            Seeds::Line(n) => (0..*n).map(|i| (at(i, *n, x0, x1), 0.5 * (y0 + y1))).collect(),
            Seeds::Points(p) => p.clone(),
        };
        pts.into_iter().map(|(x, y)| (T::of(x), T::of(y))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PlotOptions {
    pub seeds: Seeds,
    pub h: f64,
    /// Glyphs per side.
    pub glyphs: usize,
    pub levels: usize,
    /// Side of one panel in pixels.
    pub panel: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            seeds: Seeds::Grid(4),
            h: 1e-2,
            glyphs: 15,
            levels: 8,
            panel: 360,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Contour {
    pub level: f64,
    pub segments: Vec<[(f64, f64); 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Plot {
    pub region: [f64; 4],
    /// Glyph centre and unit direction.
    pub glyphs: Vec<((f64, f64), (f64, f64))>,
    pub curves: Vec<Curve<f64>>,
    pub contours: Vec<Contour>,
}

/// Samples the field, traces one curve per seed and, when `phi` is given,
/// extracts its level sets by marching squares.
pub fn build_plot<T: Scalar>(
    ode: &CharacteristicOde,
    phi: Option<&Expr>,
    region: &SampleRegion<T>,
    opts: &PlotOptions,
) -> Result<Plot, TraceError> {
    let r64: SampleRegion<f64> = SampleRegion {
        vars: region.vars.clone(),
        x: (region.x.0.as_f64(), region.x.1.as_f64()),
        y: (region.y.0.as_f64(), region.y.1.as_f64()),
        guards: region.guards.clone(),
        eps_guard: region.eps_guard.as_f64(),
    };
    let seeds = opts.seeds.points::<f64>(&r64);
    let curves = trace_curves(ode, &seeds, &r64, opts.h, phi)?;
    let n = opts.glyphs.max(2);
    let mut glyphs = Vec::new();
    for p in Seeds::Grid(n).points::<f64>(&r64) {
        let (Ok(a), Ok(b)) = (r64.eval(&ode.alpha, p), r64.eval(&ode.beta, p)) else {
            continue;
        };
        let m = a.hypot(b);
        if m.is_finite() && m > 1e-12 {
            glyphs.push((p, (a / m, b / m)));
        }
    }
    let contours = phi.map(|f| contours(f, &r64, opts.levels)).unwrap_or_default();
    Ok(Plot {
        region: [r64.x.0, r64.x.1, r64.y.0, r64.y.1],
        glyphs,
        curves,
        contours,
    })
}

const GRID: usize = 80;

fn contours(phi: &Expr, r: &SampleRegion<f64>, levels: usize) -> Vec<Contour> {
    let (dx, dy) = ((r.x.1 - r.x.0) / GRID as f64, (r.y.1 - r.y.0) / GRID as f64);
    let node = |i: usize, j: usize| (r.x.0 + i as f64 * dx, r.y.0 + j as f64 * dy);
    let vals: Vec<Vec<Option<f64>>> = (0..=GRID)
        .map(|i| {
            (0..=GRID)
                .map(|j| r.eval(phi, node(i, j)).ok().filter(|v| v.is_finite()))
                .collect()
        })
        .collect();
    let mut all: Vec<f64> = vals.iter().flatten().flatten().copied().collect();
    if all.is_empty() || levels == 0 {
        return Vec::new();
    }
    all.sort_by(f64::total_cmp);
    // quantile levels keep contours spread even when phi is very skewed
    let mut picks: Vec<f64> = (1..=levels).map(|k| all[k * (all.len() - 1) / (levels + 1)]).collect();
    picks.dedup();
    picks
        .into_iter()
        .map(|level| {
            let mut segments = Vec::new();
            for i in 0..GRID {
                for j in 0..GRID {
                    let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                    let Some(v): Option<Vec<f64>> = corners.iter().map(|&(a, b)| vals[a][b]).collect() else {
                        continue;
                    };
                    let mut hits = Vec::with_capacity(4);
                    for e in 0..4 {
                        let (a, b) = (e, (e + 1) % 4);
                        let (va, vb) = (v[a] - level, v[b] - level);
                        if (va < 0.0) != (vb < 0.0) {
                            let t = va / (va - vb);
                            let (pa, pb) = (node(corners[a].0, corners[a].1), node(corners[b].0, corners[b].1));
                            hits.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
                        }
                    }
                    // two or four crossings; saddles pair up in edge order
                    for pair in hits.chunks_exact(2) {
                        segments.push([pair[0], pair[1]]);
                    }
                }
            }
            Contour { level, segments }
        })
        .collect()
}

struct Frame {
    ox: f64,
    oy: f64,
    side: f64,
    region: [f64; 4],
}

impl Frame {
    fn px(&self, p: (f64, f64)) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.region;
        let pad = 10.0;
        let s = self.side - 2.0 * pad;
        (
            self.ox + pad + (p.0 - x0) / (x1 - x0) * s,
            self.oy + pad + (y1 - p.1) / (y1 - y0) * s,
        )
    }

    fn cell(&self, n: usize) -> f64 {
        (self.side - 20.0) / n as f64
    }
}

impl Plot {
    pub fn svg(&self, panel: u32) -> String {
        let side = panel as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\" viewBox=\"0 0 {w} {w}\">",
            w = 2 * panel
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let frames = [(0.0, 0.0), (side, 0.0), (0.0, side), (side, side)].map(|(ox, oy)| Frame {
            ox,
            oy,
            side,
            region: self.region,
        });
        let titles = ["I field", "II curves", "III level sets", "IV overlay"];
        for (f, t) in frames.iter().zip(titles) {
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#888\"/>",
                f.ox + 10.0,
                f.oy + 10.0,
                side - 20.0,
                side - 20.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"monospace\">{t}</text>",
                f.ox + 14.0,
                f.oy + 24.0
            );
        }
        self.draw_glyphs(&mut s, &frames[0]);
        self.draw_curves(&mut s, &frames[1]);
        self.draw_contours(&mut s, &frames[2]);
        self.draw_contours(&mut s, &frames[3]);
        self.draw_glyphs(&mut s, &frames[3]);
        self.draw_curves(&mut s, &frames[3]);
        s.push_str("</svg>\n");
        s
    }

    fn draw_glyphs(&self, s: &mut String, f: &Frame) {
        let n = (self.glyphs.len() as f64).sqrt().round().max(1.0) as usize;
        let half = 0.35 * f.cell(n);
        let _ = writeln!(s, "<g stroke=\"#446\" stroke-width=\"1\">");
        for &(p, (u, v)) in &self.glyphs {
            let c = f.px(p);
            // screen y points down
            let (a, b) = ((c.0 - half * u, c.1 + half * v), (c.0 + half * u, c.1 - half * v));
            let _ = writeln!(s, "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>", a.0, a.1, b.0, b.1);
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\" fill=\"#446\"/>", b.0, b.1);
        }
        s.push_str("</g>\n");
    }

    fn draw_curves(&self, s: &mut String, f: &Frame) {
        let _ = writeln!(s, "<g fill=\"none\" stroke=\"#c33\" stroke-width=\"1.2\">");
        for c in &self.curves {
            let mut d = String::new();
            for (k, &p) in c.points.iter().enumerate() {
                let q = f.px(p);
                let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, q.0, q.1);
            }
            let _ = writeln!(s, "<path d=\"{}\"/>", d.trim_end());
        }
        s.push_str("</g>\n");
    }

    fn draw_contours(&self, s: &mut String, f: &Frame) {
        let _ = writeln!(s, "<g fill=\"none\" stroke=\"#393\" stroke-width=\"0.8\">");
        for c in &self.contours {
            let mut d = String::new();
            for [a, b] in &c.segments {
                let (a, b) = (f.px(*a), f.px(*b));
                let _ = write!(d, "M{:.2},{:.2} L{:.2},{:.2} ", a.0, a.1, b.0, b.1);
            }
            let _ = writeln!(s, "<path data-level=\"{:.6e}\" d=\"{}\"/>", c.level, d.trim_end());
        }
        s.push_str("</g>\n");
    }

    /// One block per curve: a `# curve` header, an `x,y` header, then rows;
    /// blocks are separated by a blank line.
    pub fn csv(&self) -> String {
        let mut s = String::new();
        for (k, c) in self.curves.iter().enumerate() {
            if k > 0 {
                s.push('\n');
            }
            let _ = writeln!(
                s,
                "# curve {k} seed {:.6},{:.6} closed {} truncated {}",
                c.seed.0, c.seed.1, c.closed, c.truncated
            );
            s.push_str("x,y\n");
            for &(x, y) in &c.points {
                let _ = writeln!(s, "{x:.9},{y:.9}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chars::Family;
    use crate::expr::{parse_expr, VarPair};

    fn rotation_plot() -> Plot {
        let v = VarPair::default();
        let ode = CharacteristicOde {
            vars: v.clone(),
            family: Family::Field,
            alpha: parse_expr("-y", &v).unwrap(),
            beta: parse_expr("x", &v).unwrap(),
            rhs: None,
        };
        let r = SampleRegion::new(v.clone(), (-2.0, 2.0), (-2.0, 2.0)).unwrap();
        let phi = parse_expr("x^2 + y^2", &v).unwrap();
        let opts = PlotOptions {
            seeds: Seeds::Line(6),
            ..PlotOptions::default()
        };
        build_plot(&ode, Some(&phi), &r, &opts).unwrap()
    }

    #[test]
    fn rotation_sheet_has_four_panels_and_circles() {
        let p = rotation_plot();
        let svg = p.svg(300);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<text").count(), 4);
        assert!(p.curves.iter().filter(|c| c.seed.0.abs() < 1.9).all(|c| c.closed));
        assert_eq!(p.contours.len(), 8);
        for c in &p.contours {
            for [a, b] in &c.segments {
                for q in [a, b] {
                    assert!((q.0 * q.0 + q.1 * q.1 - c.level).abs() < 0.05 * (1.0 + c.level));
                }
            }
        }
    }

    #[test]
    fn csv_blocks_match_curves() {
        let p = rotation_plot();
        let csv = p.csv();
        assert_eq!(csv.matches("# curve").count(), p.curves.len());
        let rows = csv.lines().filter(|l| !l.starts_with('#') && *l != "x,y" && !l.is_empty()).count();
        assert_eq!(rows, p.curves.iter().map(|c| c.points.len()).sum::<usize>());
    }

    #[test]
    fn deterministic_output() {
        assert_eq!(rotation_plot().svg(200), rotation_plot().svg(200));
    }

    #[test]
    fn seed_layouts() {
        let r = SampleRegion::new(VarPair::default(), (0.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!(Seeds::Grid(2).points::<f64>(&r), vec![(0.25, 0.5), (0.25, 1.5), (0.75, 0.5), (0.75, 1.5)]);
        assert_eq!(Seeds::Line(2).points::<f64>(&r), vec![(0.25, 1.0), (0.75, 1.0)]);
    }
}
