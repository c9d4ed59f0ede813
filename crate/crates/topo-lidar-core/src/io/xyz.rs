//! ASCII XYZ point clouds: one `x y z` triple per line.

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut points: Vec<Point3> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut p = [0.0; 3];
        for (i, f) in fields.iter().enumerate() {
            p[i] = f.parse::<f64>().map_err(|e| Error::Parse {
                path: path.into(),
                line: lineno + 1,
                message: format!("bad coordinate {f:?}: {e}"),
            })?;
        }
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn write_xyz(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in cloud.points() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2]).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rejects_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.xyz");
        let cloud = PointCloud::new(vec![[1.5, -2.0, 0.25], [0.0, 0.0, 3.0]]).unwrap();
        write_xyz(&path, &cloud).unwrap();
        assert_eq!(read_xyz(&path).unwrap(), cloud);

        std::fs::write(&path, "1 2\n").unwrap();
        assert!(matches!(read_xyz(&path), Err(Error::Parse { line: 1, .. })));
        std::fs::write(&path, "1 2 x\n").unwrap();
        assert!(read_xyz(&path).is_err());
    }
}
