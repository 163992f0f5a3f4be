//! CSV and SVG emission.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use dupchan_core::estimator::EstimateResult;
use dupchan_core::model::DurationFamily;
use dupchan_core::sim::RNG_NAME;

pub const CSV_COLUMNS: &str =
    "family,p,pd,kmax,m,seed,replicates,h_source,h_output,h_joint,info_rate,ci95,t_m,wall_time_s";

/// Comment header plus the fixed column line. The `generated_at` comment is
/// the only part that varies between identical invocations.
pub fn csv_header() -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "# dupchan {} rng={RNG_NAME}\n# generated_at {now}\n{CSV_COLUMNS}\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// One data row; `pd` is passed separately because a failed grid point still
/// gets provenance columns.
pub fn csv_row(family: &DurationFamily, p: f64, pd: f64, r: &EstimateResult) -> String {
    let ci = r
        .ci95_halfwidth
        .map(|c| format!("{c:.6e}"))
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{:.9},{:.9},{:.9},{:.9},{},{},{:.3}\n",
        family.name(),
        p,
        pd,
        family.k_max(),
        r.m,
        r.seed,
        r.replicates,
        r.h_source,
        r.h_output,
        r.h_joint,
        r.info_rate,
        ci,
        r.t_m,
        r.wall_time_s
    )
}

/// A named polyline for the SVG plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#000000", "#1f6fd0", "#d03020", "#2a9d4e", "#a050c8", "#c88a20"];

/// Minimal line plot: fixed 800x600 viewport, linear axes with tick labels,
/// one polyline per series, legend in the top-right corner.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (800.0, 600.0);
    let (ml, mr, mt, mb) = (70.0, 30.0, 50.0, 60.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if (x1 - x0).abs() < 1e-12 {
        x1 = x0 + 1.0;
    }
    if (y1 - y0).abs() < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        w / 2.0
    );

    // Axes with 5 ticks per side.
    let _ = write!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + ph,
        ml + pw,
        mt + ph,
        mt + ph
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = write!(
            svg,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{fx:.2}</text>\n\
             <line x1=\"{}\" y1=\"{py}\" x2=\"{ml}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{fy:.2}</text>\n",
            mt + ph,
            mt + ph + 6.0,
            mt + ph + 22.0,
            ml - 6.0,
            ml - 10.0,
            py + 4.0
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_label}</text>\n",
        ml + pw / 2.0,
        h - 12.0,
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &s.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.trim_end()
        );
        // Legend entry.
        let ly = mt + 16.0 + 18.0 * si as f64;
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            ml + pw - 130.0,
            ml + pw - 100.0,
            ml + pw - 94.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_carries_version_and_rng() {
        let h = csv_header();
        assert!(h.starts_with("# dupchan "));
        assert!(h.contains("rng=chacha12"));
        assert!(h.contains("# generated_at "));
        assert!(h.ends_with(&format!("{CSV_COLUMNS}\n")));
    }

    #[test]
    fn row_has_fixed_column_count() {
        let r = EstimateResult {
            h_source: 1.0,
            h_output: 1.2,
            h_joint: 1.3,
            info_rate: 0.9,
            m: 1000,
            t_m: 1500.0,
            replicates: 1,
            ci95_halfwidth: None,
            seed: 42,
            wall_time_s: 0.5,
        };
        let row = csv_row(&DurationFamily::Bernoulli, 0.1, 0.5, &r);
        assert_eq!(row.trim_end().split(',').count(), CSV_COLUMNS.split(',').count());
        assert!(row.starts_with("bernoulli,0.1,0.5,2,1000,42,1,"));
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let s = vec![
            Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0)],
            },
            Series {
                label: "b".into(),
                points: vec![(0.0, 1.0), (1.0, 0.0)],
            },
        ];
        let svg = line_plot_svg("t", "x", "y", &s);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
