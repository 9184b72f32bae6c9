//! Self-contained SVG line charts for running-average series.
//!
//! No plotting dependency: a fixed 800x600 viewport, tick marks at round
//! numbers, and one polyline per trajectory. Output is a pure function of
//! the data, so replays are byte-identical.

use ergodiff::ergodic_estimator::EnsembleResult;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
/// Cap on polyline vertices; long runs are thinned deterministically.
const MAX_POINTS: usize = 1024;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Largest "nice" tick step (1, 2 or 5 times a power of ten) giving at most
/// `max_ticks` intervals over `span`.
fn nice_step(span: f64, max_ticks: usize) -> f64 {
    let raw = span / max_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if mag * m >= raw {
            return mag * m;
        }
    }
    mag * 10.0
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 0.01 && a < 10000.0 {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Renders the ensemble's running averages against time.
pub fn ensemble_chart(result: &EnsembleResult, title: &str) -> String {
    let t_max = result
        .series
        .iter()
        .filter_map(|s| s.times.last().copied())
        .fold(1e-12_f64, f64::max);
    let f_max = result
        .series
        .iter()
        .flat_map(|s| s.averages.iter().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    // headroom above the tallest curve, snapped to a tick
    let y_step = nice_step(f_max * 1.1, 6);
    let y_max = (f_max * 1.05 / y_step).ceil() * y_step;
    let x_step = nice_step(t_max, 8);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: f64| MARGIN_LEFT + t / t_max * plot_w;
    let y_of = |f: f64| MARGIN_TOP + (1.0 - f / y_max) * plot_h;

    let mut svg = String::with_capacity(1 << 16);
    svg.push_str(&format!(
        "<svg version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" xmlns=\"http://www.w3.org/2000/svg\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{title}</text>\n",
        MARGIN_LEFT + plot_w / 2.0
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    ));

    // x ticks
    let mut t = 0.0;
    while t <= t_max * (1.0 + 1e-9) {
        let x = x_of(t);
        let b = HEIGHT - MARGIN_BOTTOM;
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{b:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            b + 6.0,
            b + 20.0,
            fmt_tick(t)
        ));
        t += x_step;
    }
    // y ticks
    let mut f = 0.0;
    while f <= y_max * (1.0 + 1e-9) {
        let y = y_of(f);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{l:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            MARGIN_LEFT - 9.0,
            y + 4.0,
            fmt_tick(f),
            l = MARGIN_LEFT,
        ));
        f += y_step;
    }
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">T</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    let mid = MARGIN_TOP + plot_h / 2.0;
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{mid:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\" transform=\"rotate(-90 18 {mid:.1})\">f_T</text>\n"
    ));

    for (i, series) in result.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let n = series.times.len();
        let thin = n.div_ceil(MAX_POINTS).max(1);
        let mut points = String::new();
        for j in (0..n).step_by(thin) {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(series.times[j]),
                y_of(series.averages[j])
            ));
        }
        if (n - 1) % thin != 0 {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(series.times[n - 1]),
                y_of(series.averages[n - 1])
            ));
        }
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
