//! Line charts for the `--plot` options. Text is drawn only when a system
//! TrueType font can be found; the curves are drawn either way.

use std::path::Path;
use std::sync::OnceLock;

use hjb_restore::{Error, Result};
use plotters::prelude::*;

const FONT_CANDIDATES: &[&str] = &[
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/Library/Fonts/Arial.ttf",
    "C:\\Windows\\Fonts\\arial.ttf",
];

fn font_available() -> bool {
    static REGISTERED: OnceLock<bool> = OnceLock::new();
    *REGISTERED.get_or_init(|| {
        for path in FONT_CANDIDATES {
            if let Ok(bytes) = std::fs::read(path) {
                let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
                if plotters::style::register_font("sans-serif", FontStyle::Normal, bytes).is_ok() {
                    return true;
                }
            }
        }
        false
    })
}

pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Series<'a>>,
    /// Optional dashed horizontal reference line.
    pub hline: Option<(f64, String)>,
}

fn bounds(chart: &Chart<'_>) -> (f64, f64, f64, f64) {
    let mut xs = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ys = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &chart.series {
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                xs = (xs.0.min(x), xs.1.max(x));
                ys = (ys.0.min(y), ys.1.max(y));
            }
        }
    }
    if let Some((y, _)) = chart.hline {
        ys = (ys.0.min(y), ys.1.max(y));
    }
    if !xs.0.is_finite() {
        xs = (0.0, 1.0);
        ys = (0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let d = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
        (lo - d, hi + d)
    };
    let (x0, x1) = pad(xs.0, xs.1);
    let (y0, y1) = pad(ys.0, ys.1);
    (x0, x1, y0, y1)
}

pub fn render(chart: &Chart<'_>, path: &Path) -> Result<()> {
    draw(chart, path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })
}

fn draw(chart: &Chart<'_>, path: &Path) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let text = font_available();
    let (x0, x1, y0, y1) = bounds(chart);
    let root = BitMapBackend::new(path, (1000, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut builder = ChartBuilder::on(&root);
    builder.margin(20);
    if text {
        builder
            .caption(chart.title, ("sans-serif", 24))
            .x_label_area_size(45)
            .y_label_area_size(70);
    }
    let mut ctx = builder.build_cartesian_2d(x0..x1, y0..y1)?;
    if text {
        ctx.configure_mesh()
            .x_desc(chart.x_label)
            .y_desc(chart.y_label)
            .draw()?;
    }
    let palette = [BLUE, GREEN, MAGENTA, CYAN, BLACK, YELLOW];
    for (k, s) in chart.series.iter().enumerate() {
        let color = palette[k % palette.len()];
        let points: Vec<(f64, f64)> =
            s.x.iter()
                .zip(s.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| (x, y))
                .collect();
        let drawn = ctx.draw_series(LineSeries::new(points, color.stroke_width(2)))?;
        if text {
            drawn
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }
    }
    if let Some((y, label)) = &chart.hline {
        let y = *y;
        let steps = 60;
        let dashes = (0..steps).step_by(2).map(|i| {
            let a = x0 + (x1 - x0) * i as f64 / steps as f64;
            let b = x0 + (x1 - x0) * (i + 1) as f64 / steps as f64;
            PathElement::new(vec![(a, y), (b, y)], RED)
        });
        let drawn = ctx.draw_series(dashes)?;
        if text {
            drawn
                .label(label.clone())
                .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], RED));
        }
    }
    if text {
        ctx.configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
    }
    root.present()?;
    Ok(())
}
