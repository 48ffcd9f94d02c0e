// SPDX-License-Identifier: MIT OR Apache-2.0

//! Hand-rolled SVG 1.1 heatmaps for power tables: one rectangle per cell,
//! linear white-to-dark ramp over 0-100%, whole-percent annotations, `NA`
//! on infeasible cells.

const CELL_W: usize = 72;
const CELL_H: usize = 44;
const MARGIN_LEFT: usize = 72;
const MARGIN_TOP: usize = 56;
const MARGIN_BOTTOM: usize = 44;
const MARGIN_RIGHT: usize = 16;

/// Dark end of the ramp (reached at 100%).
const DARK: (f64, f64, f64) = (8.0, 48.0, 107.0);

fn fill(pct: f64) -> String {
    let t = (pct / 100.0).clamp(0.0, 1.0);
    let ch = |d: f64| (255.0 + (d - 255.0) * t).round() as u8;
    format!("rgb({},{},{})", ch(DARK.0), ch(DARK.1), ch(DARK.2))
}

/// Render one heatmap. `values[row][col]` follows `rows` (y axis, series
/// length) by `cols` (x axis, effect size); `None` marks infeasible cells.
pub fn heatmap(
    title: &str,
    rows: &[String],
    cols: &[String],
    values: &[Vec<Option<f64>>],
) -> String {
    let width = MARGIN_LEFT + CELL_W * cols.len() + MARGIN_RIGHT;
    let height = MARGIN_TOP + CELL_H * rows.len() + MARGIN_BOTTOM;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        width / 2
    ));
    for (j, label) in cols.iter().enumerate() {
        let x = MARGIN_LEFT + j * CELL_W + CELL_W / 2;
        let y = MARGIN_TOP + CELL_H * rows.len() + 20;
        s.push_str(&format!(
            "  <text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{label}</text>\n"
        ));
    }
    for (i, label) in rows.iter().enumerate() {
        let x = MARGIN_LEFT - 8;
        let y = MARGIN_TOP + i * CELL_H + CELL_H / 2 + 4;
        s.push_str(&format!(
            "  <text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{label}</text>\n"
        ));
    }
    for (i, row) in values.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let x = MARGIN_LEFT + j * CELL_W;
            let y = MARGIN_TOP + i * CELL_H;
            let (bg, text, text_fill) = match cell {
                Some(pct) => (
                    fill(*pct),
                    format!("{}", pct.round() as i64),
                    if *pct > 55.0 { "white" } else { "black" },
                ),
                None => ("rgb(220,220,220)".to_string(), "NA".to_string(), "black"),
            };
            s.push_str(&format!(
                "  <rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" \
                 fill=\"{bg}\" stroke=\"rgb(120,120,120)\" stroke-width=\"1\"/>\n"
            ));
            s.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
                 text-anchor=\"middle\" fill=\"{text_fill}\">{text}</text>\n",
                x + CELL_W / 2,
                y + CELL_H / 2 + 5
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}
