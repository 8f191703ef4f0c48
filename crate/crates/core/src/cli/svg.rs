//! Minimal line charts written straight to SVG.

use std::fmt::Write as _;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 400.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 40.0, 50.0); // left, right, top, bottom

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Lower and upper edge per point.
    pub band: Option<Vec<(f64, f64)>>,
}

impl Series {
    /// Pointwise mean of `runs`, with a normal 95% band once there are
    /// three runs or more. Runs are truncated to the shortest.
    pub fn aggregate(name: impl Into<String>, x: &[f64], runs: &[Vec<f64>]) -> Self {
        let len = runs.iter().map(Vec::len).min().unwrap_or(0).min(x.len());
        let r = runs.len() as f64;
        let mut y = Vec::with_capacity(len);
        let mut band = Vec::with_capacity(len);
        for i in 0..len {
            let m = runs.iter().map(|v| v[i]).sum::<f64>() / r;
            let var = runs.iter().map(|v| (v[i] - m).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
            let h = 1.96 * (var / r).sqrt();
            y.push(m);
            band.push((m - h, m + h));
        }
        Self { name: name.into(), x: x[..len].to_vec(), y, band: (runs.len() >= 3).then_some(band) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Draws the panels side by side in one `800×400` view box.
pub fn render(panels: &[Panel]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let pw = WIDTH / panels.len().max(1) as f64;
    for (p, panel) in panels.iter().enumerate() {
        draw_panel(&mut s, panel, p as f64 * pw, pw);
    }
    s.push_str("</svg>\n");
    s
}

fn draw_panel(s: &mut String, panel: &Panel, x0: f64, w: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (left, right, top, bottom) = (x0 + ml, x0 + w - mr, mt, HEIGHT - mb);
    let xs = range(panel.series.iter().flat_map(|s| s.x.iter().copied()));
    let ys = range(
        panel.series.iter().flat_map(|s| s.y.iter().copied().chain(s.band.iter().flatten().flat_map(|&(a, b)| [a, b]))),
    );
    let px = |x: f64| left + (x - xs.0) / (xs.1 - xs.0) * (right - left);
    let py = |y: f64| bottom - (y - ys.0) / (ys.1 - ys.0) * (bottom - top);

    let _ = writeln!(s, r#"<g class="panel">"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        (left + right) / 2.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        right - left,
        bottom - top
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (xs.0 + f * (xs.1 - xs.0), ys.0 + f * (ys.1 - ys.0));
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, px(xv), bottom + 15.0, tick(xv));
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 4.0, py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 12.0,
        escape(&panel.x_label)
    );
    let (cx, cy) = (x0 + 14.0, (top + bottom) / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{cx:.1}" y="{cy:.1}" text-anchor="middle" transform="rotate(-90 {cx:.1} {cy:.1})">{}</text>"#,
        escape(&panel.y_label)
    );

    for (i, series) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(band) = &series.band {
            let mut pts: Vec<String> =
                series.x.iter().zip(band).map(|(&x, &(_, hi))| format!("{:.2},{:.2}", px(x), py(hi))).collect();
            pts.extend(series.x.iter().zip(band).rev().map(|(&x, &(lo, _))| format!("{:.2},{:.2}", px(x), py(lo))));
            let _ = writeln!(
                s,
                r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> =
            series.x.iter().zip(&series.y).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            escape(&series.name),
            pts.join(" ")
        );
        let ly = top + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            right - 120.0,
            right - 100.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, right - 95.0, ly + 4.0, escape(&series.name));
    }
    s.push_str("</g>\n");
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(runs: usize) -> Panel {
        let x = [1.0, 2.0, 3.0];
        let data: Vec<Vec<f64>> = (0..runs).map(|r| vec![0.5, 0.6 + 0.01 * r as f64, 0.7]).collect();
        Panel {
            title: "Accuracy".into(),
            x_label: "epoch".into(),
            y_label: "accuracy".into(),
            series: vec![Series::aggregate("test", &x, &data)],
        }
    }

    #[test]
    fn view_box_and_series() {
        let svg = render(&[panel(1)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"viewBox="0 0 800 400""#));
        assert!(svg.contains(r#"data-name="test""#));
        assert!(!svg.contains("class=\"band\""));
    }

    #[test]
    fn bands_from_three_runs() {
        assert!(!render(&[panel(2)]).contains("class=\"band\""));
        assert_eq!(render(&[panel(3), panel(3)]).matches("class=\"band\"").count(), 2);
    }

    #[test]
    fn aggregate_band_is_symmetric() {
        let s = Series::aggregate("a", &[0.0], &[vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(s.y, vec![2.0]);
        let (lo, hi) = s.band.unwrap()[0];
        assert!((hi - 2.0 - (2.0 - lo)).abs() < 1e-15);
        assert!((hi - 2.0 - 1.96 / 3f64.sqrt()).abs() < 1e-12);
    }
}
