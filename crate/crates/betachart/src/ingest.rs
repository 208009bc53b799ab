//! CSV ingestion: response and covariate columns into design matrices.
//!
//! Column specs are header names or products of them written `a*b`; the
//! product is formed here, so the fit only ever sees plain matrices.

use std::path::Path;

use betachart_core::fit::{Dataset, INTERCEPT};
use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] betachart_core::Error),
}

type Result<T> = std::result::Result<T, IngestError>;

/// A numeric table with named columns. Row numbers in errors count data
/// rows from 1, header excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(IngestError::Spec("header row is missing".into()));
        }
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| IngestError::Row { row, msg: e.to_string() })?;
            let values = record
                .iter()
                .zip(&headers)
                .map(|(cell, name)| {
                    cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::Row {
                        row,
                        msg: format!("column '{name}' holds non-numeric value '{cell}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(IngestError::Spec("no data rows".into()));
        }
        Ok(Self { headers, rows })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Spec(format!("no column named '{name}' (have: {})", self.headers.join(", "))))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Values of a column spec; `a*b*c` multiplies elementwise.
    pub fn derived(&self, spec: &str) -> Result<Vec<f64>> {
        let idx = parse_product(spec)?.iter().map(|f| self.index(f)).collect::<Result<Vec<_>>>()?;
        Ok(self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).product()).collect())
    }

    /// Response in [0, 1]; anything else is an error naming the row.
    pub fn response(&self, name: &str) -> Result<Vec<f64>> {
        let y = self.column(name)?;
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(IngestError::Row {
                row: i + 1,
                msg: format!("response '{name}' = {v} lies outside [0, 1]; rescale it first"),
            });
        }
        Ok(y)
    }

    /// Design matrix with a leading intercept column followed by `specs`.
    pub fn design(&self, specs: &[String]) -> Result<DMatrix<f64>> {
        let cols = specs.iter().map(|s| self.derived(s)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(self.n(), cols.len() + 1, |t, j| if j == 0 { 1.0 } else { cols[j - 1][t] }))
    }
}

fn parse_product(spec: &str) -> Result<Vec<&str>> {
    let factors: Vec<&str> = spec.split('*').map(str::trim).collect();
    if factors.iter().any(|f| f.is_empty()) {
        return Err(IngestError::Spec(format!("malformed column spec '{spec}'")));
    }
    Ok(factors)
}

/// Names for a design built by [`Table::design`].
pub fn design_names(specs: &[String]) -> Vec<String> {
    std::iter::once(INTERCEPT.to_string())
        .chain(specs.iter().map(|s| s.split('*').map(str::trim).collect::<Vec<_>>().join("*")))
        .collect()
}

/// Splits a comma-separated list of column specs; empty input gives none.
pub fn parse_cols(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Compresses toward the interior with (y(n − 1) + 1/2)/n when any value
/// sits on 0 or 1. Interior data is returned unchanged. The map itself is
/// not idempotent, so it must be applied once, to the raw responses.
pub fn boundary_adjust(y: &[f64], n: usize) -> Vec<f64> {
    if y.iter().all(|&v| v > 0.0 && v < 1.0) {
        return y.to_vec();
    }
    let nf = n as f64;
    y.iter().map(|&v| (v * (nf - 1.0) + 0.5) / nf).collect()
}

/// (y − a)/(b − a), for responses recorded on a known interval [a, b].
pub fn rescale_interval(y: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(IngestError::Spec(format!("interval [{a}, {b}] is empty or not finite")));
    }
    y.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v < a || v > b {
                Err(IngestError::Row {
                    row: i + 1,
                    msg: format!("value {v} lies outside [{a}, {b}]"),
                })
            } else {
                Ok((v - a) / (b - a))
            }
        })
        .collect()
}

/// Everything needed to fit: response, designs and their column names.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub y: Vec<f64>,
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub mean_names: Vec<String>,
    pub disp_names: Vec<String>,
    pub adjusted: bool,
}

impl Ingested {
    pub fn dataset(&self) -> std::result::Result<Dataset, betachart_core::Error> {
        Dataset::new(self.y.clone(), self.x.clone(), self.z.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub interval: Option<(f64, f64)>,
    pub boundary_adjust: bool,
}

/// Response and designs from a table. Mean and dispersion designs both
/// carry an intercept.
pub fn ingest(table: &Table, response: &str, mean: &[String], disp: &[String], opts: &IngestOptions) -> Result<Ingested> {
    let raw = table.column(response)?;
    let mut y = match opts.interval {
        Some((a, b)) => rescale_interval(&raw, a, b)?,
        None => table.response(response)?,
    };
    let mut adjusted = false;
    if opts.boundary_adjust {
        let before = y.clone();
        y = boundary_adjust(&y, y.len());
        adjusted = y != before;
    }
    Ok(Ingested {
        y,
        x: table.design(mean)?,
        z: table.design(disp)?,
        mean_names: design_names(mean),
        disp_names: design_names(disp),
        adjusted,
    })
}

/// Reads `path` and builds a dataset in one step.
pub fn read_csv(path: &Path, response: &str, mean: &[String], disp: &[String], opts: &IngestOptions) -> Result<Ingested> {
    ingest(&Table::from_path(path)?, response, mean, disp, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Result<Table> {
        Table::from_reader(text.as_bytes())
    }

    #[test]
    fn interaction_column() {
        let t = table("y,a,b\n0.5,2,3\n0.25,-1,4\n").unwrap();
        assert_eq!(t.derived("a*b").unwrap(), vec![6.0, -4.0]);
        assert_eq!(t.derived(" a * b * a ").unwrap(), vec![12.0, 4.0]);
        let x = t.design(&["a".into(), "a*b".into()]).unwrap();
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, -1.0, -4.0]);
        assert_eq!(design_names(&["a * b".into()]), vec![INTERCEPT.to_string(), "a*b".into()]);
        assert!(t.derived("a**b").is_err());
    }

    #[test]
    fn errors_name_the_row() {
        let t = table("y,x\n0.5,1\n1.2,2\n").unwrap();
        let msg = t.response("y").unwrap_err().to_string();
        assert!(msg.contains("row 2"), "{msg}");
        let msg = table("y,x\n0.5,1\n0.4,abc\n").unwrap_err().to_string();
        assert!(msg.contains("row 2") && msg.contains("abc"), "{msg}");
        let msg = table("y,x\n0.5,1\n0.4\n").unwrap_err().to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(t.column("nope").unwrap_err().to_string().contains("nope"));
        assert!(table("y,x\n").is_err());
    }

    #[test]
    fn boundary_compression() {
        assert_eq!(boundary_adjust(&[0.2, 0.7], 2), vec![0.2, 0.7]);
        let y = vec![0.0; 100];
        assert!((boundary_adjust(&y, 100)[0] - 0.005).abs() < 1e-15);
        let one = boundary_adjust(&[0.0, 1.0, 0.5], 3);
        assert_eq!(one, vec![0.5 / 3.0, 2.5 / 3.0, 0.5]);
        // the formula moves interior values too, so a second pass would
        // change them; the function itself leaves interior data alone
        let v: f64 = 0.3;
        assert!(((v * 2.0 + 0.5) / 3.0 - v).abs() > 1e-3);
    }

    #[test]
    fn rescaling() {
        assert_eq!(rescale_interval(&[0.0, 25.0, 100.0], 0.0, 100.0).unwrap(), vec![0.0, 0.25, 1.0]);
        assert_eq!(rescale_interval(&[0.3], 0.0, 1.0).unwrap(), vec![0.3]);
        assert!(rescale_interval(&[101.0], 0.0, 100.0).unwrap_err().to_string().contains("row 1"));
        assert!(rescale_interval(&[1.0], 2.0, 2.0).is_err());
        let t = table("p,x\n0,1\n50,2\n100,3\n").unwrap();
        let opts = IngestOptions { interval: Some((0.0, 100.0)), boundary_adjust: true };
        let d = ingest(&t, "p", &["x".into()], &[], &opts).unwrap();
        assert!(d.adjusted);
        assert_eq!(d.y, vec![0.5 / 3.0, 1.5 / 3.0, 2.5 / 3.0]);
        assert_eq!((d.x.ncols(), d.z.ncols()), (2, 1));
    }
}
