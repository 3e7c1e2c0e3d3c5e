//! Plain data files (one per curve) and optional SVG line plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::field::SpinorField;

/// A named polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

/// Writes `# x y` followed by one `x y` line per point.
pub fn write_curve(path: &Path, x_name: &str, y_name: &str, curve: &Curve) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "# {}: {x_name} {y_name}", curve.label)?;
    for (x, y) in &curve.points {
        writeln!(f, "{x:e} {y:e}")?;
    }
    Ok(())
}

/// File-name friendly label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Writes `<dir>/<stem>_<label>.dat` for each curve.
pub fn write_curves(dir: &Path, stem: &str, x_name: &str, y_name: &str, curves: &[Curve]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    curves
        .iter()
        .map(|c| {
            let p = dir.join(format!("{stem}_{}.dat", slug(&c.label)));
            write_curve(&p, x_name, y_name, c)?;
            Ok(p)
        })
        .collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi > 0.0).then(|| (lo / 1.5, hi * 1.5))
}

/// Log-log line plot of the positive points of every curve.
pub fn write_loglog_svg(path: &Path, title: &str, x_name: &str, y_name: &str, curves: &[Curve]) -> Result<()> {
    let plot_err = |e: String| Error::Io(std::io::Error::other(format!("svg plot {}: {e}", path.display())));
    let positive: Vec<Curve> = curves
        .iter()
        .map(|c| Curve::new(c.label.clone(), c.points.iter().copied().filter(|p| p.0 > 0.0 && p.1 > 0.0).collect()))
        .collect();
    let all = || positive.iter().flat_map(|c| c.points.iter().copied());
    let (Some(xr), Some(yr)) = (bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1))) else {
        return Err(plot_err("no positive data to plot".into()));
    };
    let root = SVGBackend::new(path, (720, 540)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d((xr.0..xr.1).log_scale(), (yr.0..yr.1).log_scale())
        .map_err(|e| plot_err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc(x_name)
        .y_desc(y_name)
        .x_label_formatter(&|x| format!("{x:.0e}"))
        .y_label_formatter(&|y| format!("{y:.0e}"))
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    for (i, c) in positive.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(c.points.iter().copied(), color.stroke_width(2)))
            .map_err(|e| plot_err(e.to_string()))?
            .label(c.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(c.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(|e| plot_err(e.to_string()))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    root.present().map_err(|e| plot_err(e.to_string()))?;
    Ok(())
}

/// Writes `x,re_phi1,im_phi1,re_phi2,im_phi2` rows.
pub fn write_field_csv(path: &Path, phi: &SpinorField) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Serialization(e.to_string()))?;
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(["x", "re_phi1", "im_phi1", "re_phi2", "im_phi2"]).map_err(ser)?;
    let g = phi.grid();
    for j in 0..phi.len() {
        let [p, q] = phi.at(j);
        w.write_record([g.x(j), p.re, p.im, q.re, q.im].map(|v| format!("{v:e}"))).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_files_have_one_line_per_point() {
        let dir = tempfile::tempdir().unwrap();
        let c = Curve::new("eps=0.5", vec![(0.1, 1e-2), (0.05, 2.5e-3)]);
        let files = write_curves(dir.path(), "err", "dt", "err_linf", &[c]).unwrap();
        assert!(files[0].ends_with("err_eps_0.5.dat"));
        let text = fs::read_to_string(&files[0]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "1e-1 1e-2");
    }

    #[test]
    fn svg_is_self_contained() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.svg");
        let curves = [Curve::new("a", vec![(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 0.0)]), Curve::new("b", vec![(0.1, 3e-2)])];
        write_loglog_svg(&p, "errors", "dt", "error", &curves).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.contains("polyline") || text.contains("<path"));
        assert!(!text.contains("href"));
        assert!(write_loglog_svg(&p, "t", "x", "y", &[Curve::new("z", vec![(1.0, 0.0)])]).is_err());
    }
}
