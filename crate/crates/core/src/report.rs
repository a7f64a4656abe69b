//! Findings, report tables and their CSV / SVG serialization.

use std::io::Write;

use crate::error::{Error, Result};

/// Fixed 17-significant-digit rendering used by every CSV writer.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// One checked statement: a measured value against its contract.
#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Finding {
    /// `|value - expected| <= tolerance`.
    pub fn close(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
            passed: (value - expected).abs() <= tolerance,
            note: String::new(),
        }
    }

    /// `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: bound,
            tolerance: 0.0,
            passed: value <= bound,
            note: "upper bound".into(),
        }
    }

    /// `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: bound,
            tolerance: 0.0,
            passed: value >= bound,
            note: "lower bound".into(),
        }
    }

    /// A boolean fact, recorded as 1/0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: f64::from(u8::from(ok)),
            expected: 1.0,
            tolerance: 0.0,
            passed: ok,
            note: String::new(),
        }
    }

    /// A measured quantity recorded without a contract.
    pub fn observed(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: f64::NAN,
            tolerance: f64::NAN,
            passed: true,
            note: "observation".into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// A named list of findings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub findings: Vec<Finding>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            findings: Vec::new(),
        }
    }

    pub fn push(&mut self, f: Finding) {
        self.findings.push(f);
    }

    pub fn extend(&mut self, other: Report) {
        self.findings.extend(other.findings);
    }

    pub fn all_passed(&self) -> bool {
        self.findings.iter().all(|f| f.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| !f.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.name == name)
    }

    /// CSV with columns `finding,value,expected,tolerance,passed,note`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        w.write_record(["finding", "value", "expected", "tolerance", "passed", "note"])
            .map_err(ser)?;
        for f in &self.findings {
            w.write_record([
                f.name.clone(),
                fmt_f64(f.value),
                fmt_f64(f.expected),
                fmt_f64(f.tolerance),
                u8::from(f.passed).to_string(),
                f.note.clone(),
            ])
            .map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Generic numeric table for CSV emission.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        w.write_record(&self.header).map_err(ser)?;
        for r in &self.rows {
            w.write_record(r).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// SVG drawing of a closed boundary polygon and marked points, scaled into a
/// fixed 800x800 view box.
pub fn boundary_svg(polygon: &[[f64; 2]], marked: &[[f64; 2]], title: &str) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in polygon.iter().chain(marked) {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    let scale = 700.0 / span;
    let map = |p: &[f64; 2]| (400.0 + (p[0] - cx) * scale, 400.0 - (p[1] - cy) * scale);

    let mut s = String::new();
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" width=\"800\" height=\"800\">\n");
    s.push_str(&format!("<title>{}</title>\n", escape(title)));
    s.push_str("<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n");
    let pts: Vec<String> = polygon
        .iter()
        .map(|p| {
            let (x, y) = map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    s.push_str(&format!(
        "<polygon points=\"{}\" fill=\"#dde6f0\" stroke=\"black\" stroke-width=\"2\"/>\n",
        pts.join(" ")
    ));
    for p in marked {
        let (x, y) = map(p);
        s.push_str(&format!(
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"7\" fill=\"none\" stroke=\"red\" stroke-width=\"2.5\"/>\n"
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_width_floats() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(2f64.ln()).parse::<f64>().unwrap(), 2f64.ln());
    }

    #[test]
    fn report_csv_has_header() {
        let mut r = Report::new("t");
        r.push(Finding::close("x", 1.0, 1.0, 0.0));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("finding,value,expected,tolerance,passed,note\n"));
        assert!(r.all_passed());
    }

    #[test]
    fn svg_has_fixed_view_box() {
        let s = boundary_svg(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[1.0, 0.0]], "a<b");
        assert!(s.contains("viewBox=\"0 0 800 800\""));
        assert!(s.contains("a&lt;b"));
    }
}
