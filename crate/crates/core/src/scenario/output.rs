//! Diagnostics CSV and legacy-VTK point snapshots.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{DiagnosticRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::geometry::{Grid, Vec2};

/// Formats with 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let row: Vec<String> = r.values().iter().map(|&x| num(x)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_csv_file(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(BufWriter::new(f), records).map_err(|e| Error::io(path, e))
}

pub fn read_csv<R: BufRead>(r: R, origin: &str) -> Result<Vec<DiagnosticRecord>> {
    let bad = |line: usize, message: String| Error::ConfigAt {
        path: origin.to_string(),
        line,
        key: "csv".into(),
        message,
    };
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "empty file".into()))?
        .map_err(|e| Error::io(origin, e))?;
    if header.trim() != CSV_HEADER {
        return Err(bad(1, format!("unexpected header `{header}`")));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut v = [0.0; 11];
        let mut count = 0;
        for (slot, field) in line.split(',').enumerate() {
            if slot >= 11 {
                return Err(bad(k + 2, "too many columns".into()));
            }
            v[slot] = field
                .trim()
                .parse()
                .map_err(|_| bad(k + 2, format!("`{field}` is not a number")))?;
            count += 1;
        }
        if count != 11 {
            return Err(bad(k + 2, format!("expected 11 columns, found {count}")));
        }
        out.push(DiagnosticRecord::from_values(v));
    }
    Ok(out)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<DiagnosticRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(f), &path.display().to_string())
}

/// Snapshot file name for step `k`, zero-padded so names sort by step.
pub fn snapshot_name(k: usize) -> String {
    format!("snapshot_{k:08}.vtk")
}

/// Nodal fields written into a snapshot.
pub struct Snapshot<'a> {
    pub grid: &'a Grid,
    pub t: f64,
    pub u: &'a [Vec2],
    pub v: &'a [Vec2],
    pub damage: &'a [f64],
    pub theta: &'a [f64],
}

/// Legacy ASCII VTK, POLYDATA with one vertex per node. Ghost nodes are
/// included so the arrays line up with the node numbering.
pub fn write_vtk<W: Write>(mut w: W, s: &Snapshot<'_>) -> std::io::Result<()> {
    let n = s.grid.len();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "nodal state t={}", num(s.t))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {n} double")?;
    for p in &s.grid.coords {
        writeln!(w, "{} {} 0", num(p[0]), num(p[1]))?;
    }
    writeln!(w, "VERTICES {n} {}", 2 * n)?;
    for k in 0..n {
        writeln!(w, "1 {k}")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    for (name, field) in [("displacement", s.u), ("velocity", s.v)] {
        writeln!(w, "VECTORS {name} double")?;
        for a in field {
            writeln!(w, "{} {} 0", num(a[0]), num(a[1]))?;
        }
    }
    for (name, field) in [("damage", s.damage), ("theta", s.theta)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for a in field {
            writeln!(w, "{}", num(*a))?;
        }
    }
    w.flush()
}

/// Writes `dir/snapshot_<k>.vtk` and returns its path.
pub fn write_vtk_file(dir: &Path, k: usize, s: &Snapshot<'_>) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(k));
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_vtk(BufWriter::new(f), s).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Fails early if `dir` cannot be created or written to.
pub fn ensure_writable_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write_probe");
    File::create(&probe).map_err(|e| Error::io(dir, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};

    #[test]
    fn empty_run_writes_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_roundtrips_exactly() {
        let recs = vec![
            DiagnosticRecord::from_values([
                0.1,
                1.0 / 3.0,
                2e-300,
                -7.5,
                1e300,
                0.0,
                5.0,
                0.02,
                1.25,
                3.0,
                4.0,
            ]),
            DiagnosticRecord::from_values([
                f64::MIN_POSITIVE,
                -0.0,
                1.0,
                2.0,
                3.0,
                4.0,
                5.0,
                6.0,
                7.0,
                8.0,
                9.0,
            ]),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let back = read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn csv_reader_reports_bad_rows() {
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(matches!(
            read_csv(text.as_bytes(), "mem"),
            Err(Error::ConfigAt { line: 2, .. })
        ));
        assert!(read_csv("a,b\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn vtk_has_consistent_counts() {
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 0.5, 0.0).unwrap();
        let n = g.len();
        let z = vec![[0.0; 2]; n];
        let s = vec![0.0; n];
        let snap = Snapshot {
            grid: &g,
            t: 0.0,
            u: &z,
            v: &z,
            damage: &s,
            theta: &s,
        };
        let mut buf = Vec::new();
        write_vtk(&mut buf, &snap).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains(&format!("POINTS {n} double")));
        assert!(text.contains(&format!("VERTICES {n} {}", 2 * n)));
        assert_eq!(
            text.lines().count(),
            5 + n + 1 + n + 1 + 2 * (1 + n) + 2 * (2 + n)
        );
        assert_eq!(snapshot_name(42), "snapshot_00000042.vtk");
    }
}
