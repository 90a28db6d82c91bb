//! Stable on-disk formats.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag written into every artifact.
pub const FORMAT_VERSION: u32 = 1;

/// Which complex plane a sample lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PlaneTag {
    ZPlane,
    WPlane,
    UPlane,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    pub command: String,
    /// Parameters sufficient to reproduce the run.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Metadata {
            command: command.into(),
            config,
            seed: None,
        }
    }
}

/// Sampled solution values over a set of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSample {
    pub format_version: u32,
    pub domain: PlaneTag,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
    pub residuals: Vec<Option<f64>>,
    pub metadata: Metadata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl GridSample {
    pub fn new(
        domain: PlaneTag,
        points: Vec<[f64; 2]>,
        values: Vec<[f64; 2]>,
        residuals: Vec<Option<f64>>,
        metadata: Metadata,
    ) -> Result<Self> {
        if points.len() != values.len() || points.len() != residuals.len() {
            return Err(Error::Invalid(
                "points, values and residuals differ in length".into(),
            ));
        }
        Ok(GridSample {
            format_version: FORMAT_VERSION,
            domain,
            points,
            values,
            residuals,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Entries ordered by `Re` ascending, then `Im` ascending.
    pub fn sorted(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            let (p, q) = (self.points[a], self.points[b]);
            p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
        });
        GridSample {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
            residuals: idx.iter().map(|&i| self.residuals[i]).collect(),
            ..self.clone()
        }
    }

    /// CSV with header `re_point,im_point,re_value,im_value,residual`;
    /// a missing residual is an empty field.
    pub fn to_csv(&self) -> String {
        let s = self.sorted();
        let mut out = String::from("re_point,im_point,re_value,im_value,residual\n");
        for ((p, v), r) in s.points.iter().zip(&s.values).zip(&s.residuals) {
            let r = r.map(|r| format!("{r:e}")).unwrap_or_default();
            // `+ 0.0` folds −0 into 0 so equal values print identically.
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{}",
                p[0] + 0.0,
                p[1] + 0.0,
                v[0] + 0.0,
                v[1] + 0.0,
                r
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.sorted()).expect("grid samples serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GridSample = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        if g.points.len() != g.values.len() || g.points.len() != g.residuals.len() {
            return Err(Error::Invalid(
                "points, values and residuals differ in length".into(),
            ));
        }
        Ok(g)
    }
}

/// Writes `sample` to `path` in the chosen format.
pub fn export_grid(sample: &GridSample, format: ExportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ExportFormat::Csv => sample.to_csv(),
        ExportFormat::Json => sample.to_json(),
    };
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> GridSample {
        let points: Vec<[f64; 2]> = (0..n)
            .map(|i| [-(i as f64), 0.5 * (i % 2) as f64])
            .collect();
        let values = points.iter().map(|p| [p[0] * 2.0, 1.0]).collect();
        let residuals = (0..n)
            .map(|i| (i > 0).then_some(1e-12 * i as f64))
            .collect();
        GridSample::new(
            PlaneTag::ZPlane,
            points,
            values,
            residuals,
            Metadata::new("grid", serde_json::json!({"n": n})),
        )
        .unwrap()
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(sample(0).to_csv().lines().count(), 1);
        let one = sample(1).to_csv();
        assert_eq!(one.lines().count(), 2);
        assert_eq!(one.lines().nth(1).unwrap(), "0e0,0e0,0e0,1e0,");
    }

    #[test]
    fn csv_is_ordered_by_real_then_imaginary_part() {
        let csv = sample(4).to_csv();
        let re: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(re, vec![-3.0, -2.0, -1.0, 0.0]);
    }

    #[test]
    fn json_round_trip() {
        let g = sample(5).sorted();
        assert_eq!(GridSample::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let m = Metadata::new("x", serde_json::Value::Null);
        assert!(
            GridSample::new(PlaneTag::WPlane, vec![[0.0, 0.0]], vec![], vec![None], m).is_err()
        );
    }

    #[test]
    fn export_writes_file() {
        let dir = std::env::temp_dir().join(format!("diffeq-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("g.csv");
        export_grid(&sample(3), ExportFormat::Csv, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), sample(3).to_csv());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
