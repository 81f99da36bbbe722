use std::fmt::Write as _;

use super::format::FormatError;
use super::pipeline::ResultDocument;
use crate::domain::GridFace;
use crate::simplicial::Point;

/// Fill colors from the smallest certified margin (bin 0) to the largest.
const PALETTE: [&str; 8] = [
    "#b2182b", "#d6604d", "#f4a582", "#fddbc7", "#d1e5f0", "#92c5de", "#4393c3", "#2166ac",
];

/// Axis-aligned plane `x[axis] = value` for 3D results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slice {
    pub axis: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub slice: Option<Slice>,
    /// Width of the longer side in pixels.
    pub size: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            slice: None,
            size: 1000.0,
        }
    }
}

struct Frame {
    lo: [f64; 2],
    hi_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = [f64; 2]>, size: f64) -> Option<Self> {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if !lo[0].is_finite() {
            return None;
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let pad = 0.02 * extent;
        for d in 0..2 {
            lo[d] -= pad;
            hi[d] += pad;
        }
        let scale = size / (extent + 2.0 * pad);
        Some(Self {
            lo,
            hi_y: hi[1],
            scale,
            width: (hi[0] - lo[0]) * scale,
            height: (hi[1] - lo[1]) * scale,
        })
    }

    fn xy(&self, p: [f64; 2]) -> (f64, f64) {
        (
            (p[0] - self.lo[0]) * self.scale,
            (self.hi_y - p[1]) * self.scale,
        )
    }

    fn move_to(&self, out: &mut String, p: [f64; 2], cmd: char) {
        let (x, y) = self.xy(p);
        let _ = write!(out, "{cmd}{x:.2} {y:.2}");
    }

    fn polygon(&self, out: &mut String, pts: &[[f64; 2]]) {
        for (i, p) in pts.iter().enumerate() {
            self.move_to(out, *p, if i == 0 { 'M' } else { 'L' });
        }
        out.push('Z');
    }

    fn segment(&self, out: &mut String, a: [f64; 2], b: [f64; 2]) {
        self.move_to(out, a, 'M');
        self.move_to(out, b, 'L');
    }
}

/// Color bin of a margin on a log scale between μ and the largest margin.
fn bin(m: f64, lo: f64, hi: f64) -> usize {
    if hi - lo <= 1e-12 || m <= 0.0 {
        return 0;
    }
    let t = (m.ln() - lo) / (hi - lo);
    ((t * PALETTE.len() as f64) as usize).min(PALETTE.len() - 1)
}

/// Projection of R^n onto the drawing plane, and the slice test for n = 3.
struct View {
    n: usize,
    slice: Option<Slice>,
    axes: [usize; 2],
}

impl View {
    fn project(&self, p: &Point) -> [f64; 2] {
        [p[self.axes[0]], p[self.axes[1]]]
    }

    /// The simplex itself (n = 2) or its section by the slice plane (n = 3),
    /// as a convex polygon or segment in drawing coordinates.
    fn section(&self, pts: &[Point]) -> Vec<[f64; 2]> {
        let Some(sl) = self.slice else {
            return pts.iter().map(|p| self.project(p)).collect();
        };
        let mut out: Vec<[f64; 2]> = Vec::new();
        let side: Vec<f64> = pts.iter().map(|p| p[sl.axis] - sl.value).collect();
        for i in 0..pts.len() {
            if side[i] == 0.0 {
                out.push(self.project(&pts[i]));
            }
            for j in i + 1..pts.len() {
                if side[i] * side[j] < 0.0 {
                    let t = side[i] / (side[i] - side[j]);
                    let q = pts[i] + (pts[j] - pts[i]) * t;
                    out.push(self.project(&q));
                }
            }
        }
        if out.len() > 2 {
            let mut c = [0.0; 2];
            for p in &out {
                c[0] += p[0] / out.len() as f64;
                c[1] += p[1] / out.len() as f64;
            }
            out.sort_by(|a, b| {
                let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
                let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
                ta.total_cmp(&tb)
            });
        }
        out
    }

    fn face_section(&self, f: &GridFace, g: &crate::domain::GridSpec) -> Vec<[f64; 2]> {
        let (lo, hi) = f.bounds(g);
        let corners = |fixed: Option<(usize, f64)>| -> Vec<Point> {
            let free: Vec<usize> = (0..self.n)
                .filter(|&d| hi[d] > lo[d] && Some(d) != fixed.map(|x| x.0))
                .collect();
            let mut out = Vec::new();
            for bits in 0u32..(1 << free.len()) {
                let mut p = lo;
                for (b, &d) in free.iter().enumerate() {
                    if bits & (1 << b) != 0 {
                        p[d] = hi[d];
                    }
                }
                if let Some((d, v)) = fixed {
                    p[d] = v;
                }
                out.push(p);
            }
            out
        };
        match self.slice {
            None => corners(None).iter().map(|p| self.project(p)).collect(),
            Some(sl) => {
                if sl.value < lo[sl.axis] || sl.value > hi[sl.axis] || hi[sl.axis] == lo[sl.axis] {
                    return Vec::new();
                }
                corners(Some((sl.axis, sl.value)))
                    .iter()
                    .map(|p| self.project(p))
                    .collect()
            }
        }
    }
}

/// SVG of the result: A simplices filled by certified margin, lower
/// simplices stroked by margin, the boundary of E and the lower faces in
/// black, Discard witnesses as dots. 3D results are drawn as a slice.
pub fn render_svg(doc: &ResultDocument, opts: &RenderOptions) -> Result<String, FormatError> {
    let cx = &doc.complex;
    let n = cx.n;
    let view = match (n, opts.slice) {
        (2, _) => View {
            n,
            slice: None,
            axes: [0, 1],
        },
        (3, Some(sl)) if sl.axis < 3 && sl.value.is_finite() => {
            let rest: Vec<usize> = (0..3).filter(|&d| d != sl.axis).collect();
            View {
                n,
                slice: Some(sl),
                axes: [rest[0], rest[1]],
            }
        }
        (3, _) => {
            return Err(FormatError::Invalid(
                "3D results need a slice: an axis in 0..3 and a value".into(),
            ))
        }
        _ => return Err(FormatError::Invalid(format!("cannot render dimension {n}"))),
    };
    let domain = doc.input.domain.to_domain()?;
    let grid = domain.grid();
    let (dlo, dhi) = domain.bounding_box();
    let frame = Frame::new(
        (0..cx.vertex_count())
            .map(|v| view.project(&cx.vertex(v as u32)))
            .chain([view.project(&dlo), view.project(&dhi)]),
        opts.size,
    )
    .ok_or_else(|| FormatError::Invalid("nothing to render".into()))?;

    let margins = &doc.certificates.margins;
    let lo = doc.certificates.mu.max(f64::MIN_POSITIVE).ln();
    let hi = margins
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE)
        .ln();
    let a = cx.a_count();
    let mut fills = vec![String::new(); PALETTE.len()];
    let mut strokes = vec![String::new(); PALETTE.len()];
    for i in 0..margins.len() {
        let pts: Vec<Point> = cx.maximal(i).iter().map(|&v| cx.vertex(v)).collect();
        let sec = view.section(&pts);
        let b = bin(margins[i], lo, hi);
        if i < a && sec.len() >= 3 {
            frame.polygon(&mut fills[b], &sec);
        } else if i >= a && sec.len() >= 2 {
            if sec.len() == 2 {
                frame.segment(&mut strokes[b], sec[0], sec[1]);
            } else {
                frame.polygon(&mut strokes[b], &sec);
            }
        }
    }

    let mut boundary = String::new();
    let mut dots: Vec<[f64; 2]> = Vec::new();
    let mut faces = domain.boundary_facets();
    faces.extend_from_slice(domain.lower_faces());
    for f in &faces {
        let sec = view.face_section(f, grid);
        match sec.len() {
            0 => {}
            1 => dots.push(sec[0]),
            2 => frame.segment(&mut boundary, sec[0], sec[1]),
            _ => {
                // Axis-aligned rectangle corners come in binary order.
                let ring = [sec[0], sec[1], sec[3], sec[2]];
                frame.polygon(&mut boundary, &ring);
            }
        }
    }

    let mut witnesses = String::new();
    let near = doc.config.cell_size * 0.5;
    for w in doc.witnesses.chunks_exact(n) {
        let p = Point::new(w).map_err(|e| FormatError::Invalid(e.to_string()))?;
        if let Some(sl) = view.slice {
            if (p[sl.axis] - sl.value).abs() > near {
                continue;
            }
        }
        let (x, y) = frame.xy(view.project(&p));
        let _ = write!(witnesses, "M{:.2} {:.2}h0", x, y);
    }

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = frame.width,
        h = frame.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (b, d) in fills.iter().enumerate() {
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<path fill="{}" stroke="none" d="{d}"/>"#,
                PALETTE[b]
            );
        }
    }
    for (b, d) in strokes.iter().enumerate() {
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<path fill="none" stroke="{}" stroke-width="2" d="{d}"/>"#,
                PALETTE[b]
            );
        }
    }
    if !boundary.is_empty() {
        let _ = writeln!(
            out,
            r#"<path fill="none" stroke="black" stroke-width="1" d="{boundary}"/>"#
        );
    }
    for p in dots {
        let (x, y) = frame.xy(p);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#
        );
    }
    if !witnesses.is_empty() {
        let _ = writeln!(
            out,
            r##"<path fill="none" stroke="#333333" stroke-width="1.5" stroke-linecap="round" d="{witnesses}"/>"##
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="8" y="18" font-family="monospace" font-size="14">mu = {:e}, epsilon = {:e}</text>"#,
        doc.certificates.mu,
        doc.epsilon()
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_span_the_palette() {
        let lo = 1e-3f64.ln();
        let hi = 1.0f64.ln();
        assert_eq!(bin(1e-3, lo, hi), 0);
        assert_eq!(bin(1.0, lo, hi), PALETTE.len() - 1);
        assert_eq!(bin(0.5, lo, lo), 0);
    }

    #[test]
    fn tetrahedron_section_is_a_convex_polygon() {
        let view = View {
            n: 3,
            slice: Some(Slice {
                axis: 2,
                value: 0.5,
            }),
            axes: [0, 1],
        };
        let t = [
            Point::xyz(0.0, 0.0, 0.0),
            Point::xyz(1.0, 0.0, 0.0),
            Point::xyz(0.0, 1.0, 0.0),
            Point::xyz(0.0, 0.0, 1.0),
        ];
        // Plane through the midpoints of the three edges at the apex.
        let sec = view.section(&t);
        assert_eq!(sec.len(), 3);
        let mut xs: Vec<[f64; 2]> = sec.clone();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(xs, vec![[0.0, 0.0], [0.0, 0.5], [0.5, 0.0]]);
        // A plane cutting two opposite edge pairs gives a quadrilateral.
        let view = View {
            n: 3,
            slice: Some(Slice {
                axis: 0,
                value: 0.25,
            }),
            axes: [1, 2],
        };
        let t = [
            Point::xyz(0.0, 0.0, 0.0),
            Point::xyz(0.0, 1.0, 0.0),
            Point::xyz(1.0, 0.0, 1.0),
            Point::xyz(1.0, 1.0, 1.0),
        ];
        assert_eq!(view.section(&t).len(), 4);
    }
}
