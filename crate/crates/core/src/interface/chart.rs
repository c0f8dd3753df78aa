use std::fmt::Write;

use super::ApiSeriesResponse;

const GLYPHS: &[char] = &['*', '+', 'o', '#', 'x', '@', '%', '&'];
const WIDTH: usize = 72;
const HEIGHT: usize = 16;

/// Fixed-width ASCII line chart, one glyph per phrase. When the span is
/// wider than the plot each column shows the maximum of its years.
pub fn render_chart(response: &ApiSeriesResponse) -> String {
    let years = response.series.first().map_or(0, |s| s.values.len());
    let columns = years.clamp(1, WIDTH);
    let peak = response
        .series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0f64, f64::max);

    let mut grid = vec![vec![' '; columns]; HEIGHT];
    for (k, s) in response.series.iter().enumerate() {
        let glyph = GLYPHS[k % GLYPHS.len()];
        for (col, cell) in (0..columns).map(|c| (c, column_value(&s.values, c, columns))) {
            let Some(v) = cell else { continue };
            if peak <= 0.0 || v <= 0.0 {
                grid[HEIGHT - 1][col] = glyph;
                continue;
            }
            let row = ((v / peak) * (HEIGHT - 1) as f64).round() as usize;
            grid[HEIGHT - 1 - row.min(HEIGHT - 1)][col] = glyph;
        }
    }

    let mut out = String::new();
    let label_width = 10;
    for (r, line) in grid.iter().enumerate() {
        let label = if r == 0 {
            format!("{peak:.3e}")
        } else if r == HEIGHT - 1 {
            "0".to_owned()
        } else {
            String::new()
        };
        let body: String = line.iter().collect();
        let _ = writeln!(out, "{label:>label_width$} |{}", body.trim_end());
    }
    let _ = writeln!(out, "{:>label_width$} +{}", "", "-".repeat(columns));
    let start = response.start_year.to_string();
    let end = response.end_year.to_string();
    let pad = (columns + 1).saturating_sub(start.len() + end.len());
    let _ = writeln!(out, "{:>label_width$}  {start}{}{end}", "", " ".repeat(pad));
    for (k, s) in response.series.iter().enumerate() {
        let _ = writeln!(out, "  {} {}", GLYPHS[k % GLYPHS.len()], s.phrase);
    }
    out
}

fn column_value(values: &[f64], col: usize, columns: usize) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let lo = col * values.len() / columns;
    let hi = ((col + 1) * values.len() / columns).max(lo + 1);
    values[lo..hi.min(values.len())].iter().copied().reduce(f64::max)
}
