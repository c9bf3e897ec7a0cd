//! Minimal static SVG renders for PCA scatters and metric sweeps.

/// One named point set for a scatter render.
pub struct ScatterSeries<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
    pub color: &'a str,
}

/// One named polyline for a line render.
pub struct LineSeries<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
    pub color: &'a str,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 52.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn from_points<'a>(sets: impl Iterator<Item = &'a [(f64, f64)]>) -> Frame {
        let mut x_lo = f64::INFINITY;
        let mut x_hi = f64::NEG_INFINITY;
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for points in sets {
            for &(x, y) in points {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
        if !x_lo.is_finite() {
            (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
        }
        if x_lo == x_hi {
            x_hi = x_lo + 1.0;
        }
        if y_lo == y_hi {
            y_hi = y_lo + 1.0;
        }
        Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">{title}</text>\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#444\"/>\n",
        WIDTH / 2.0,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
    )
}

fn legend(names: &[(&str, &str)]) -> String {
    let mut out = String::new();
    for (i, (name, color)) in names.iter().enumerate() {
        let y = MARGIN + 16.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>\n",
            WIDTH - MARGIN - 120.0,
            y,
            WIDTH - MARGIN - 110.0,
            y + 4.0,
        ));
    }
    out
}

/// Scatter plot of one or more point sets.
pub fn render_scatter_svg(title: &str, series: &[ScatterSeries]) -> String {
    let frame = Frame::from_points(series.iter().map(|s| s.points));
    let mut out = header(title);
    for s in series {
        for &(x, y) in s.points {
            let (px, py) = frame.map(x, y);
            out.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2\" fill=\"{}\" fill-opacity=\"0.55\"/>\n",
                s.color
            ));
        }
    }
    let names: Vec<(&str, &str)> = series.iter().map(|s| (s.name, s.color)).collect();
    out.push_str(&legend(&names));
    out.push_str("</svg>\n");
    out
}

/// Line chart of one or more series.
pub fn render_lines_svg(title: &str, series: &[LineSeries]) -> String {
    let frame = Frame::from_points(series.iter().map(|s| s.points));
    let mut out = header(title);
    for s in series {
        let path: Vec<String> = s
            .points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                let (px, py) = frame.map(x, y);
                format!("{}{px:.2},{py:.2}", if i == 0 { "M" } else { "L" })
            })
            .collect();
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>\n",
            path.join(" "),
            s.color
        ));
        for &(x, y) in s.points {
            let (px, py) = frame.map(x, y);
            out.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{}\"/>\n",
                s.color
            ));
        }
    }
    let names: Vec<(&str, &str)> = series.iter().map(|s| (s.name, s.color)).collect();
    out.push_str(&legend(&names));
    out.push_str("</svg>\n");
    out
}
