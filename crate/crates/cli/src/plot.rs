//! Static SVG of a pullback run: marked-point trajectories on the left,
//! `log10 |λ_n|` against `n` on the right.

use std::fmt::Write;

use psf_core::{Finite, IterationTrace};

const PANEL: f64 = 360.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Frame {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(
        x0: f64,
        y0: f64,
        xs: impl Iterator<Item = f64> + Clone,
        ys: impl Iterator<Item = f64> + Clone,
    ) -> Self {
        let (mut xmin, mut xmax) = bounds(xs);
        let (mut ymin, mut ymax) = bounds(ys);
        widen(&mut xmin, &mut xmax);
        widen(&mut ymin, &mut ymax);
        Frame {
            x0,
            y0,
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let u = self.x0 + (x - self.xmin) / (self.xmax - self.xmin) * PANEL;
        let v = self.y0 + PANEL - (y - self.ymin) / (self.ymax - self.ymin) * PANEL;
        (u, v)
    }

    fn axes(&self, svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, y0) = (self.x0, self.y0);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{title}</text>"#,
            x0 + PANEL / 2.0,
            y0 - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{xlabel} [{}, {}]</text>"#,
            x0 + PANEL / 2.0,
            y0 + PANEL + 22.0,
            short(self.xmin),
            short(self.xmax)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" transform="rotate(-90 {} {})" text-anchor="middle">{ylabel} [{}, {}]</text>"#,
            x0 - 10.0,
            y0 + PANEL / 2.0,
            x0 - 10.0,
            y0 + PANEL / 2.0,
            short(self.ymin),
            short(self.ymax)
        );
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
}

fn widen(lo: &mut f64, hi: &mut f64) {
    if !lo.is_finite() || !hi.is_finite() {
        *lo = -1.0;
        *hi = 1.0;
    }
    let span = (*hi - *lo).max(1e-9 * lo.abs().max(1.0));
    let mid = (*hi + *lo) / 2.0;
    *lo = mid - 0.55 * span;
    *hi = mid + 0.55 * span;
}

fn short(x: f64) -> String {
    format!("{x:.3}")
}

fn polyline(svg: &mut String, pts: &[(f64, f64)], color: &str) {
    let mut d = String::new();
    for (u, v) in pts {
        let _ = write!(d, "{u:.2},{v:.2} ");
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
        d.trim_end()
    );
}

/// Renders the trace. Points at infinity are left out of the trajectory panel.
pub fn trace_svg(trace: &IterationTrace, title: &str) -> String {
    let levels: Vec<_> = std::iter::once(&trace.initial)
        .chain(trace.steps.iter().map(|s| &s.config))
        .collect();
    let slots = trace.initial.len();
    let finite = |slot: usize| {
        levels
            .iter()
            .filter_map(move |c| match c.positions[slot].normalized() {
                Finite(z) => Some(z),
                _ => None,
            })
    };
    let all = (0..slots).flat_map(&finite);
    let left = Frame::new(
        PAD,
        PAD + 20.0,
        all.clone().map(|z| z.re),
        all.map(|z| z.im),
    );

    let moduli: Vec<(f64, f64)> = trace
        .steps
        .iter()
        .map(|s| {
            (
                s.step as f64,
                s.diagnostics.param_modulus.max(f64::MIN_POSITIVE).log10(),
            )
        })
        .collect();
    let right = Frame::new(
        2.0 * PAD + PANEL + 20.0,
        PAD + 20.0,
        moduli.iter().map(|p| p.0),
        moduli.iter().map(|p| p.1),
    );

    let width = 3.0 * PAD + 2.0 * PANEL + 20.0;
    let height = 2.0 * PAD + PANEL + 40.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    left.axes(&mut svg, "marked points", "Re z", "Im z");
    right.axes(&mut svg, "log10 |lambda_n|", "step n", "log10");

    for slot in 0..slots {
        let color = COLORS[slot % COLORS.len()];
        let pts: Vec<_> = finite(slot).map(|z| left.map(z.re, z.im)).collect();
        if pts.len() > 1 {
            polyline(&mut svg, &pts, color);
        }
        if let Some((u, v)) = pts.last() {
            let _ = writeln!(
                svg,
                r#"<circle cx="{u:.2}" cy="{v:.2}" r="3" fill="{color}"/>"#
            );
        }
    }
    let pts: Vec<_> = moduli.iter().map(|&(n, m)| right.map(n, m)).collect();
    if pts.len() > 1 {
        polyline(&mut svg, &pts, "#000");
    }
    for (u, v) in &pts {
        let _ = writeln!(
            svg,
            r##"<circle cx="{u:.2}" cy="{v:.2}" r="1.5" fill="#000"/>"##
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use psf_core::{iterate, IterationSettings, OrbitPortrait};

    #[test]
    fn renders_both_panels() {
        let port = OrbitPortrait {
            k1: 1,
            l: 1,
            branch: vec![0, 0, 1],
            ..OrbitPortrait::exp_fixed(1)
        };
        let res = iterate(&port, &IterationSettings::default());
        let svg = trace_svg(&res.trace, "exp <k1=1>");
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("exp &lt;k1=1&gt;"));
        assert!(svg.matches("<polyline").count() >= 2);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn single_step_trace() {
        let res = iterate(&OrbitPortrait::exp_fixed(2), &IterationSettings::default());
        let svg = trace_svg(&res.trace, "fixed");
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
