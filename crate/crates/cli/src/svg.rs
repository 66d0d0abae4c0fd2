use std::fmt::Write as _;

use hardrods::GridFunction;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// One polyline per pressure, with axes and a legend. Values above `y_max` are clipped.
pub fn overlay(curves: &[(f64, GridFunction)], y_max: Option<f64>) -> String {
    let x_max = curves.iter().filter_map(|(_, g)| g.iter().last().map(|(x, _)| x)).fold(0.0_f64, f64::max).max(1.0);
    let top = y_max
        .unwrap_or_else(|| curves.iter().flat_map(|(_, g)| g.values().iter().copied()).fold(0.0_f64, f64::max))
        .max(1.0)
        * 1.05;
    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y.clamp(0.0, top) / top * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (x0, y0, x1, y1) = (sx(0.0), sy(0.0), sx(x_max), sy(top));
    writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#).unwrap();
    for k in 0..=(x_max.floor() as i64) {
        let x = sx(k as f64);
        writeln!(s, r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.1}" y="{:.1}" font-size="12" text-anchor="middle">{k}</text>"#, y0 + 20.0).unwrap();
    }
    let ticks = 5;
    for k in 0..=ticks {
        let v = top / 1.05 * k as f64 / ticks as f64;
        let y = sy(v);
        writeln!(s, r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/>"#, x0 - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{v:.2}</text>"#, x0 - 8.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">x</text>"#, WIDTH / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(s, r#"<text x="15" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {:.1})">g(x)</text>"#, HEIGHT / 2.0, HEIGHT / 2.0).unwrap();

    for (i, (p, g)) in curves.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let points: Vec<String> = g.iter().map(|(x, v)| format!("{:.2},{:.2}", sx(x), sy(v))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" ")).unwrap();
        let ly = MARGIN + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN - 100.0;
        writeln!(s, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#, lx + 25.0).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12">p = {p}</text>"#, lx + 32.0, ly + 4.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
