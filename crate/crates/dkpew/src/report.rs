//! Residual tables: per-point rows plus a max/mean summary, serializable to
//! CSV (one row per point) and JSON.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    /// Evaluation point (length matches the geometry: 3 or 4 coordinates).
    pub point: Vec<f64>,
    /// Residual norm at the point (max-abs over components).
    pub norm: f64,
    /// Individual residual components, layout documented by the producer.
    pub components: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    /// What was measured, e.g. `ew-residual/conformal-einstein`.
    pub label: String,
    pub rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub points: usize,
    pub max: f64,
    pub mean: f64,
}

impl ResidualReport {
    pub fn new(label: impl Into<String>) -> Self {
        ResidualReport { label: label.into(), rows: vec![] }
    }

    pub fn push(&mut self, point: impl Into<Vec<f64>>, components: impl Into<Vec<f64>>) {
        let components = components.into();
        let norm = components.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        self.rows.push(Row { point: point.into(), norm, components });
    }

    pub fn summary(&self) -> Summary {
        let points = self.rows.len();
        let max = self.rows.iter().fold(0.0_f64, |m, r| m.max(r.norm));
        let mean = if points == 0 {
            0.0
        } else {
            self.rows.iter().map(|r| r.norm).sum::<f64>() / points as f64
        };
        Summary { points, max, mean }
    }

    /// CSV with a header row; floats are printed with full round-trip
    /// precision so output is reproducible bit-for-bit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let ncoord = self.rows.first().map_or(0, |r| r.point.len());
        let ncomp = self.rows.first().map_or(0, |r| r.components.len());
        let mut header: Vec<String> = (0..ncoord).map(|i| format!("p{i}")).collect();
        header.push("norm".into());
        header.extend((0..ncomp).map(|i| format!("c{i}")));
        writeln!(out, "{}", header.join(","))?;
        for r in &self.rows {
            let mut fields: Vec<String> = r.point.iter().map(|v| format!("{v:?}")).collect();
            fields.push(format!("{:?}", r.norm));
            fields.extend(r.components.iter().map(|v| format!("{v:?}")));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_csv() {
        let mut rep = ResidualReport::new("demo");
        rep.push([0.0, 1.0, 2.0], [1e-3, -2e-3]);
        rep.push([1.0, 1.0, 2.0], [0.5e-3, 0.0]);
        let s = rep.summary();
        assert_eq!(s.points, 2);
        assert!((s.max - 2e-3).abs() < 1e-18);
        assert!((s.mean - 1.25e-3).abs() < 1e-18);

        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "p0,p1,p2,norm,c0,c1");
        assert!(lines.next().unwrap().starts_with("0.0,1.0,2.0,0.002,"));
    }
}
