use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{DistributionTable, PhiMatrix};
use crate::error::{Error, Result};
use crate::io;
use crate::NUM_QUESTIONS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartFiles {
    pub distribution_svg: PathBuf,
    pub distribution_tsv: PathBuf,
    pub phi_svg: PathBuf,
    pub phi_tsv: PathBuf,
}

impl ChartFiles {
    pub fn all(&self) -> [&Path; 4] {
        [
            &self.distribution_svg,
            &self.distribution_tsv,
            &self.phi_svg,
            &self.phi_tsv,
        ]
    }
}

/// Writes a grouped bar chart of the label counts and a φ heatmap as SVG,
/// each with a TSV file holding the plotted numbers.
pub fn render_charts(distribution: &DistributionTable, phi: &PhiMatrix, out_dir: &Path) -> Result<ChartFiles> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = ChartFiles {
        distribution_svg: out_dir.join("label_distribution.svg"),
        distribution_tsv: out_dir.join("label_distribution.tsv"),
        phi_svg: out_dir.join("phi_matrix.svg"),
        phi_tsv: out_dir.join("phi_matrix.tsv"),
    };
    io::write_atomic(&files.distribution_svg, distribution_svg(distribution).as_bytes())?;
    io::write_atomic(&files.distribution_tsv, distribution.to_tsv().as_bytes())?;
    io::write_atomic(&files.phi_svg, phi_svg(phi).as_bytes())?;
    io::write_atomic(&files.phi_tsv, phi.to_tsv().as_bytes())?;
    Ok(files)
}

const SERIES: [(&str, &str); 3] = [("yes", "#4c72b0"), ("no", "#dd8452"), ("nan", "#8c8c8c")];

fn distribution_svg(t: &DistributionTable) -> String {
    let (w, h) = (640.0, 360.0);
    let (left, right, top, bottom) = (50.0, 20.0, 30.0, 40.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let max = t
        .questions
        .iter()
        .flat_map(|c| [c.yes, c.no, c.nan])
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let group_w = plot_w / NUM_QUESTIONS as f64;
    let bar_w = group_w * 0.8 / 3.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">Label distribution per question</text>"#,
        w / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, top + plot_h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 4.0, top + 4.0, max as usize);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">0</text>"#, left - 4.0, top + plot_h);
    for (q, c) in t.questions.iter().enumerate() {
        let gx = left + q as f64 * group_w + group_w * 0.1;
        for (k, (v, (name, color))) in [c.yes, c.no, c.nan].into_iter().zip(SERIES).enumerate() {
            let bh = plot_h * v as f64 / max;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"><title>Q{} {name}: {v}</title></rect>"#,
                gx + k as f64 * bar_w,
                top + plot_h - bh,
                bar_w,
                bh,
                q + 1
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">Q{}</text>"#,
            left + (q as f64 + 0.5) * group_w,
            top + plot_h + 16.0,
            q + 1
        );
    }
    for (k, (name, color)) in SERIES.iter().enumerate() {
        let x = left + plot_w - 170.0 + k as f64 * 58.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/>"#, h - 14.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, x + 14.0, h - 5.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Diverging blue-white-red scale on [-1, 1].
fn phi_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn phi_svg(m: &PhiMatrix) -> String {
    let cell = 56.0;
    let (left, top) = (40.0, 40.0);
    let size = cell * NUM_QUESTIONS as f64;
    let (w, h) = (left + size + 20.0, top + size + 20.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    s.push_str(
        r##"<defs><pattern id="undefined" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#d9d9d9"/><line x1="0" y1="0" x2="0" y2="6" stroke="#7f7f7f" stroke-width="2"/></pattern></defs>"##,
    );
    s.push('\n');
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">phi coefficients between questions (nan excluded)</text>"#,
        left + size / 2.0
    );
    for a in 0..NUM_QUESTIONS {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">Q{}</text>"#,
            left - 6.0,
            top + (a as f64 + 0.5) * cell + 4.0,
            a + 1
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">Q{}</text>"#,
            left + (a as f64 + 0.5) * cell,
            top - 6.0,
            a + 1
        );
        for b in 0..NUM_QUESTIONS {
            let (x, y) = (left + b as f64 * cell, top + a as f64 * cell);
            let (fill, label) = match m.values[a][b] {
                Some(v) => (phi_color(v), format!("{v:.2}")),
                None => ("url(#undefined)".to_string(), "n/a".to_string()),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="#ffffff"><title>Q{}-Q{}: {label} (n={})</title></rect>"##,
                a + 1,
                b + 1,
                m.n_pair[a][b]
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{label}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{label_distribution, phi_matrix};
    use crate::corpus::{Dataset, Split};

    #[test]
    fn empty_dataset_renders() {
        let d = Dataset::new(Split::Custom, vec![]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = render_charts(&label_distribution(&d), &phi_matrix(&d), dir.path()).unwrap();
        for f in files.all() {
            assert!(fs::metadata(f).unwrap().len() > 0);
        }
        let svg = fs::read_to_string(&files.phi_svg).unwrap();
        assert_eq!(svg.matches("url(#undefined)").count(), 49);
    }

    #[test]
    fn color_scale_endpoints() {
        assert_eq!(phi_color(1.0), "#ff0000");
        assert_eq!(phi_color(0.0), "#ffffff");
        assert_eq!(phi_color(-1.0), "#0000ff");
    }

    #[test]
    fn unwritable_dir_errors() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let d = Dataset::new(Split::Custom, vec![]).unwrap();
        assert!(render_charts(&label_distribution(&d), &phi_matrix(&d), &blocker.join("sub")).is_err());
    }
}
