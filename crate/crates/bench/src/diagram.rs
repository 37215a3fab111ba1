//! Standalone SVG pictures of a run: the 2D partition with its trial points,
//! and the `(d, F)` diagram with the nondominated hull.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;
use trisect_core::selection::{nondominated, Dot};
use trisect_core::trace::{DotLine, Trace};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramKind {
    Partition2d,
    Hull,
}

impl FromStr for DiagramKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "partition2d" => Ok(DiagramKind::Partition2d),
            "hull" => Ok(DiagramKind::Hull),
            _ => Err(format!("unknown diagram kind {s:?}; expected partition2d or hull")),
        }
    }
}

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("partition diagrams need a 2-dimensional trace, got dimension {0}")]
    Dimension(usize),
    #[error("trace has boxes or trials but no domain line")]
    MissingDomain,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rendered picture and what went into it.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub svg: String,
    pub boxes: usize,
    /// Distinct trial points drawn.
    pub vertices: usize,
    pub black: usize,
    pub white: usize,
}

/// Affine map from a data rectangle onto the canvas, y pointing up.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let widen = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (SIZE - 2.0 * MARGIN)
    }
}

fn open(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="10">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    let (l, r, b, t) = (MARGIN, SIZE - MARGIN, SIZE - MARGIN, MARGIN);
    writeln!(svg, r#"<g stroke="black" stroke-width="1"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#).unwrap();
    for (v, anchor) in [(frame.x0, "start"), (frame.x1, "end")] {
        writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{}</text>"#, frame.px(v), b + 15.0, short(v)).unwrap();
    }
    for v in [frame.y0, frame.y1] {
        writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 4.0, frame.py(v) + 3.0, short(v)).unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, SIZE / 2.0, SIZE - 12.0).unwrap();
    writeln!(svg, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#, SIZE / 2.0, SIZE / 2.0).unwrap();
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

/// Boxes outlined, trial points dotted and labelled with their iteration.
pub fn partition2d(trace: &Trace) -> Result<Diagram, DiagramError> {
    let domain = match &trace.domain {
        Some(d) if d.dim() != 2 => return Err(DiagramError::Dimension(d.dim())),
        Some(d) => Some(d),
        None if trace.boxes.is_empty() && trace.trials.is_empty() => None,
        None => return Err(DiagramError::MissingDomain),
    };
    let (lo, hi) = domain.map_or(([0.0, 0.0], [1.0, 1.0]), |d| ([d.lower()[0], d.lower()[1]], [d.upper()[0], d.upper()[1]]));
    let frame = Frame::new(lo[0], hi[0], lo[1], hi[1]);
    let mut svg = String::new();
    open(&mut svg, &frame, "x1", "x2");

    writeln!(svg, r#"<g fill="none" stroke="dimgray" stroke-width="0.8">"#).unwrap();
    if let Some(d) = domain {
        for bx in &trace.boxes {
            let (p, q) = (d.to_real(&bx.a), d.to_real(&bx.b));
            let (x0, x1) = (frame.px(p[0].min(q[0])), frame.px(p[0].max(q[0])));
            let (y0, y1) = (frame.py(p[1].max(q[1])), frame.py(p[1].min(q[1])));
            writeln!(svg, r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}"/>"#, x1 - x0, y1 - y0).unwrap();
        }
    }
    svg.push_str("</g>\n");

    let mut seen: Vec<&[f64]> = Vec::new();
    writeln!(svg, r#"<g fill="black">"#).unwrap();
    for t in &trace.trials {
        if seen.contains(&t.x.as_slice()) {
            continue;
        }
        seen.push(&t.x);
        let (x, y) = (frame.px(t.x[0]), frame.py(t.x[1]));
        writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/><text x="{:.2}" y="{:.2}">{}</text>"#, x + 4.0, y - 4.0, t.iteration).unwrap();
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(Diagram { svg, boxes: trace.boxes.len(), vertices: seen.len(), black: seen.len(), white: 0 })
}

/// `(d, F)` scatter: nondominated dots black, others white, the hull as a
/// polyline and, from every hull dot, the ray of its largest finite slope
/// down to `d = 0`.
pub fn hull(dots: &[DotLine]) -> Diagram {
    let finite = |v: f64| v.is_finite() && v > 0.0;
    let ray = |p: &DotLine| {
        let k = if finite(p.k_hi) { p.k_hi } else { p.k_lo };
        (finite(k) && p.selected).then_some(k)
    };
    let d_max = dots.iter().map(|p| p.d).fold(0.0, f64::max);
    let mut f_lo = dots.iter().map(|p| p.f).fold(f64::INFINITY, f64::min);
    let f_hi = dots.iter().map(|p| p.f).fold(f64::NEG_INFINITY, f64::max);
    for p in dots {
        if let Some(k) = ray(p) {
            f_lo = f_lo.min(p.f - k * p.d);
        }
    }
    let frame = if dots.is_empty() { Frame::new(0.0, 1.0, 0.0, 1.0) } else { Frame::new(0.0, d_max * 1.05, f_lo, f_hi) };
    let mut svg = String::new();
    open(&mut svg, &frame, "d", "F");

    let mut chain: Vec<&DotLine> = dots.iter().filter(|p| p.selected).collect();
    chain.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.f.total_cmp(&b.f)));
    let points: Vec<String> = chain.iter().map(|p| format!("{:.2},{:.2}", frame.px(p.d), frame.py(p.f))).collect();
    writeln!(svg, r#"<polyline fill="none" stroke="black" stroke-width="1" points="{}"/>"#, points.join(" ")).unwrap();
    writeln!(svg, r#"<g stroke="gray" stroke-dasharray="4 3">"#).unwrap();
    for p in &chain {
        if let Some(k) = ray(p) {
            writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                frame.px(p.d),
                frame.py(p.f),
                frame.px(0.0),
                frame.py(p.f - k * p.d)
            )
            .unwrap();
        }
    }
    svg.push_str("</g>\n<g stroke=\"black\">\n");
    for p in dots {
        let fill = if p.selected { "black" } else { "white" };
        writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}"/>"#, frame.px(p.d), frame.py(p.f)).unwrap();
    }
    svg.push_str("</g>\n</svg>\n");
    let black = dots.iter().filter(|p| p.selected).count();
    Diagram { svg, boxes: dots.len(), vertices: 0, black, white: dots.len() - black }
}

/// Diagram lines for a set of dots, marked by [`nondominated`].
pub fn hull_dots(dots: &[Dot]) -> Vec<DotLine> {
    let h = nondominated(dots);
    dots.iter()
        .map(|p| {
            let k = h.selected.iter().position(|q| q.id == p.id);
            let (k_lo, k_hi) = k.map_or((f64::NAN, f64::NAN), |k| h.slopes[k]);
            DotLine { id: p.id, s: p.s, d: p.d, f: p.f, selected: k.is_some(), k_lo, k_hi }
        })
        .collect()
}

pub fn render(trace: &Trace, kind: DiagramKind) -> Result<Diagram, DiagramError> {
    match kind {
        DiagramKind::Partition2d => partition2d(trace),
        DiagramKind::Hull => Ok(hull(&trace.dots)),
    }
}

pub fn emit_diagram(trace: &Trace, kind: DiagramKind, out: &Path) -> Result<Diagram, DiagramError> {
    let d = render(trace, kind)?;
    std::fs::write(out, &d.svg)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use trisect_core::geometry::Domain;
    use trisect_core::optimizer::{OptConfig, OptState, PhaseSwitch};
    use trisect_core::problems::Quadratic;
    use trisect_core::trace::{read_trace, write_domain, write_partition, write_trials};

    use super::*;

    #[test]
    fn three_dot_hull_has_two_black_dots() {
        let dots: Vec<Dot> = [(1.0, 0.0), (0.5, -1.0), (0.25, -0.5)]
            .iter()
            .enumerate()
            .map(|(id, &(d, f))| Dot { id, d, f, s: 0 })
            .collect();
        let g = hull(&hull_dots(&dots));
        assert_eq!((g.black, g.white), (2, 1));
        assert_eq!(g.svg.matches("fill=\"black\"/>").count(), 2);
        assert!(g.svg.contains("<polyline"));
    }

    #[test]
    fn empty_trace_gives_axes() {
        let g = partition2d(&Trace::default()).unwrap();
        assert!(g.svg.starts_with("<svg") && g.svg.contains("<line"));
        assert_eq!((g.boxes, g.vertices), (0, 0));
        assert!(hull(&[]).svg.ends_with("</svg>\n"));
    }

    #[test]
    fn partition_needs_two_dimensions() {
        let t = Trace { domain: Some(Domain::new(vec![0.0; 3], vec![1.0; 3], false)), ..Trace::default() };
        assert!(matches!(partition2d(&t), Err(DiagramError::Dimension(3))));
    }

    #[test]
    fn twelve_iterations_outline_every_box() {
        let q = Quadratic::sphere(vec![0.3, 0.7]).into_problem("s", vec![0.0; 2], vec![1.0; 2]);
        let mut st = OptState::initialize(&q, OptConfig { trace: true, ..OptConfig::default() }).unwrap();
        while st.iteration() < 12 {
            if st.exploration_phase().unwrap() == PhaseSwitch::Local {
                st.record_phase().unwrap();
            }
        }
        let mut buf = Vec::new();
        write_domain(&mut buf, st.partition().domain()).unwrap();
        write_partition(&mut buf, st.partition()).unwrap();
        write_trials(&mut buf, &st.report().events).unwrap();
        let t = read_trace(buf.as_slice()).unwrap();
        let g = partition2d(&t).unwrap();
        assert_eq!(g.boxes, st.partition().len());
        assert_eq!(g.svg.matches("<rect x=").count(), g.boxes);
        assert!(g.vertices <= g.boxes);
        assert_eq!(g.vertices, st.partition().eval_counter());
        let h = render(&t, DiagramKind::Hull).unwrap();
        assert!(h.black >= 1 && h.black + h.white == g.boxes);
    }
}
