//! Minimal static SVG line charts. Self-contained SVG 1.1, no external
//! assets, built by plain string formatting so output is deterministic.

const W: f64 = 800.0;
const H: f64 = 500.0;
const ML: f64 = 80.0;
const MR: f64 = 24.0;
const MT: f64 = 44.0;
const MB: f64 = 56.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A single-series line chart of `points` (sorted or not; drawn in the
/// given order), with four evenly spaced ticks per axis.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    // Degenerate ranges still need a finite scale.
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = if y1 - y0 <= 0.0 {
        (y0 - 0.5, y1 + 0.5)
    } else {
        (y0 - pad, y1 + pad)
    };
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"26\" font-family=\"sans-serif\" font-size=\"17\" \
         text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        esc(title)
    ));
    // Axes.
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    // Ticks and labels.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xp = px(xv);
        let yp = py(yv);
        s.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{xp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{xv:.4}</text>\n",
            H - MB + 20.0
        ));
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{ML}\" y2=\"{yp}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{yv:.4}</text>\n",
            ML - 9.0,
            yp + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        esc(xlabel)
    ));
    s.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        esc(ylabel)
    ));
    if !points.is_empty() {
        let mut path = String::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            path.push_str(if i == 0 { "M" } else { " L" });
            path.push_str(&format!("{:.2} {:.2}", px(x), py(y)));
        }
        s.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1965b0\" stroke-width=\"1.8\"/>\n"
        ));
        for &(x, y) in points {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"#1965b0\"/>\n",
                px(x),
                py(y)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}
