//! Curve containers and the CSV, JSON, and gnuplot writers.

use anyhow::Result;
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub name: String,
    pub eta: Option<f64>,
    pub energy: Option<f64>,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSet {
    pub figure: String,
    pub curves: Vec<Curve>,
}

/// Shortest round-trip decimal, so reruns are byte-identical and parsers
/// recover the exact binary value.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl CurveSet {
    /// Rows grouped curve by curve, LF line endings.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "curve", "eta", "E", "beta", "units"])?;
        for curve in &self.curves {
            for p in &curve.points {
                out.write_record([
                    num(p.x),
                    num(p.y),
                    curve.name.clone(),
                    opt(curve.eta),
                    opt(curve.energy),
                    opt(p.beta),
                    "nats".to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Plot script keyed on the curve-name column of the CSV.
    pub fn gnuplot_script(&self, data_file: &str) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set key outside\n");
        s.push_str(&format!("set title '{}'\n", self.figure));
        s.push_str("set xlabel 'x [nats]'\n");
        s.push_str("set ylabel 'y [nats]'\n");
        s.push_str("plot \\\n");
        for (i, curve) in self.curves.iter().enumerate() {
            let tail = if i + 1 == self.curves.len() { "\n" } else { ", \\\n" };
            s.push_str(&format!(
                "  '{data_file}' skip 1 using 1:(strcol(3) eq '{name}' ? $2 : NaN) \
                 with lines title '{name}'{tail}",
                name = curve.name,
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CurveSet {
        CurveSet {
            figure: "demo".into(),
            curves: vec![Curve {
                name: "lower".into(),
                eta: Some(0.5),
                energy: None,
                points: vec![
                    Point { x: 0.0, y: 0.25, beta: None },
                    Point { x: 1.5, y: 0.125, beta: Some(0.75) },
                ],
            }],
        }
    }

    #[test]
    fn csv_schema_and_empty_fields() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,curve,eta,E,beta,units");
        assert_eq!(lines.next().unwrap(), "0,0.25,lower,0.5,,,nats");
        assert_eq!(lines.next().unwrap(), "1.5,0.125,lower,0.5,,0.75,nats");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn gnuplot_script_names_every_curve() {
        let script = sample().gnuplot_script("demo.csv");
        assert!(script.contains("plot \\"));
        assert!(script.contains("strcol(3) eq 'lower'"));
    }
}
