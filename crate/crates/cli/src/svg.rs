//! Static SVG rendering of p-value curves: axes, a reference line at
//! 0.05, one polyline per curve, and a small legend.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct Frame {
    g_min: f64,
    g_max: f64,
}

impl Frame {
    fn x(&self, g: f64) -> f64 {
        let span = (self.g_max - self.g_min).max(1e-12);
        MARGIN_LEFT + (g - self.g_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, p: f64) -> f64 {
        MARGIN_TOP + (1.0 - p) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Break the curve at missing values so failed grid points leave gaps.
fn polylines(frame: &Frame, grid: &[f64], p: &[Option<f64>], style: &str) -> String {
    let mut out = String::new();
    let mut segment: Vec<String> = Vec::new();
    let mut flush = |seg: &mut Vec<String>| {
        if seg.len() >= 2 {
            out.push_str(&format!(
                "  <polyline fill=\"none\" {style} points=\"{}\"/>\n",
                seg.join(" ")
            ));
        }
        seg.clear();
    };
    for (g, maybe_p) in grid.iter().zip(p) {
        match maybe_p {
            Some(v) => segment.push(format!("{:.2},{:.2}", frame.x(*g), frame.y(*v))),
            None => flush(&mut segment),
        }
    }
    flush(&mut segment);
    out
}

pub fn render_curves(
    grid: &[f64],
    p_full: &[Option<f64>],
    p_deleted: Option<&[Option<f64>]>,
    title: &str,
) -> String {
    let frame = Frame {
        g_min: grid.first().copied().unwrap_or(0.0),
        g_max: grid.last().copied().unwrap_or(1.0),
    };
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{:.0}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">p-values vs gamma: {}</text>\n",
        MARGIN_LEFT, title
    ));

    // Axes.
    let (x0, x1) = (frame.x(frame.g_min), frame.x(frame.g_max));
    let (y0, y1) = (frame.y(0.0), frame.y(1.0));
    s.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n"
    ));
    s.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let y = frame.y(p);
        s.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            x0 - 5.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{p:.2}</text>\n",
            x0 - 8.0,
            y + 4.0
        ));
    }
    let g_ticks = 5usize;
    for i in 0..=g_ticks {
        let g = frame.g_min + (frame.g_max - frame.g_min) * i as f64 / g_ticks as f64;
        let x = frame.x(g);
        s.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        s.push_str(&format!(
            "  <text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{g:.2}</text>\n",
            y0 + 18.0
        ));
    }
    s.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">gamma</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    ));

    // Nominal 5% reference.
    let y05 = frame.y(0.05);
    s.push_str(&format!(
        "  <line x1=\"{x0:.2}\" y1=\"{y05:.2}\" x2=\"{x1:.2}\" y2=\"{y05:.2}\" stroke=\"gray\" stroke-dasharray=\"2,4\"/>\n"
    ));

    s.push_str(&polylines(
        &frame,
        grid,
        p_full,
        "stroke=\"#1a4d8f\" stroke-width=\"2\"",
    ));
    if let Some(del) = p_deleted {
        s.push_str(&polylines(
            &frame,
            grid,
            del,
            "stroke=\"#b03030\" stroke-width=\"2\" stroke-dasharray=\"6,4\"",
        ));
    }

    // Legend.
    let lx = x1 - 170.0;
    s.push_str(&format!(
        "  <line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#1a4d8f\" stroke-width=\"2\"/>\n",
        MARGIN_TOP + 10.0,
        lx + 30.0,
        MARGIN_TOP + 10.0
    ));
    s.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">full data</text>\n",
        lx + 36.0,
        MARGIN_TOP + 14.0
    ));
    if p_deleted.is_some() {
        s.push_str(&format!(
            "  <line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#b03030\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n",
            MARGIN_TOP + 26.0,
            lx + 30.0,
            MARGIN_TOP + 26.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">outliers removed</text>\n",
            lx + 36.0,
            MARGIN_TOP + 30.0
        ));
    }
    s.push_str("</svg>\n");
    s
}
