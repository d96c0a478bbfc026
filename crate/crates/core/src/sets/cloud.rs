use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::compact::DeltaNet;
use crate::error::{Error, Result};

/// Finite point set in `R^d` with the l-infinity metric, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "dimension must be positive"));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::invalid("coords", format!("{} values do not split into rows of {d}", coords.len())));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coords", "coordinates must be finite"));
        }
        Ok(PointCloud { d, coords })
    }

    pub fn from_line(points: Vec<f64>) -> Result<Self> {
        Self::new(1, points)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// One point per row, `d` columns, no header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for p in self.iter() {
            wr.write_record(p.iter().map(|v| format!("{v:?}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
        let mut d = None;
        let mut coords = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            match d {
                None => d = Some(rec.len()),
                Some(d) if d != rec.len() => {
                    return Err(Error::invalid("csv", format!("row {} has {} columns, expected {d}", line + 1, rec.len())))
                }
                _ => {}
            }
            for field in rec.iter() {
                coords.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::invalid("csv", format!("row {}: `{field}`: {e}", line + 1)))?,
                );
            }
        }
        Self::new(d.unwrap_or(1), coords)
    }
}

impl From<&DeltaNet> for PointCloud {
    fn from(net: &DeltaNet) -> Self {
        PointCloud {
            d: 1,
            coords: net.points.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let c = PointCloud::new(2, vec![0.1, -2.0, 1e-17, 3.5]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0.1,-2.0\n1e-17,3.5\n");
        assert_eq!(PointCloud::read_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn ragged_csv_rejected() {
        assert!(PointCloud::read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(PointCloud::new(2, vec![1.0]).is_err());
    }
}
