//! Text formats: the trajectory CSV and body snapshots.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly. Lines end with a bare LF.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::convex::ConvexBody;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::sphere::{build_grid, ScalarField};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

/// Streams diagnostics rows to any writer.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    n: usize,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut out: W, n: usize) -> Result<Self> {
        writeln!(out, "{}", DiagnosticsRecord::columns(n).join(","))?;
        Ok(TrajectoryWriter { out, n })
    }

    pub fn write(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        if record.dim() != self.n {
            return Err(Error::Domain(format!("record of dimension {} in a dimension-{} file", record.dim(), self.n)));
        }
        writeln!(self.out, "{}", join(record.values()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Creates `path` and writes the header.
pub fn create_trajectory(path: &Path, n: usize) -> Result<TrajectoryWriter<BufWriter<File>>> {
    TrajectoryWriter::new(BufWriter::new(File::create(path)?), n)
}

/// Serialises a whole trajectory to a string.
pub fn trajectory_to_string(records: &[DiagnosticsRecord]) -> Result<String> {
    let n = records.first().map_or(2, |r| r.dim());
    let mut w = TrajectoryWriter::new(Vec::new(), n)?;
    for r in records {
        w.write(r)?;
    }
    String::from_utf8(w.finish()?).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a trajectory CSV, looking columns up by name.
pub fn read_trajectory(input: impl Read) -> Result<Vec<DiagnosticsRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let n = headers.iter().filter(|h| h.starts_with("centroid_")).count();
    if n != 2 && n != 3 {
        return Err(Error::Parse(format!(
            "missing column 'centroid_1'..'centroid_n': found {n} centroid columns"
        )));
    }
    let columns = DiagnosticsRecord::columns(n);
    let mut index = Vec::with_capacity(columns.len());
    for name in &columns {
        match headers.iter().position(|h| h == name) {
            Some(i) => index.push(i),
            None => return Err(Error::Parse(format!("missing column '{name}'"))),
        }
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        let mut values = Vec::with_capacity(index.len());
        for (&i, name) in index.iter().zip(&columns) {
            let field = row
                .get(i)
                .ok_or_else(|| Error::Parse(format!("row {}: missing value for '{name}'", line + 2)))?;
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: bad value '{field}' for '{name}'", line + 2)))?;
            values.push(v);
        }
        out.push(DiagnosticsRecord::from_values(n, &values)?);
    }
    Ok(out)
}

pub fn read_trajectory_file(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    read_trajectory(File::open(path)?)
}

/// Snapshot text: header `n,N...,t`, then one `coords...,s` line per node.
pub fn snapshot_to_string(support: &ScalarField, t: f64) -> String {
    let grid = support.grid();
    let n = grid.ambient_dim();
    let counts = grid.resolution().counts();
    let mut out = String::new();
    out.push_str(&n.to_string());
    for c in &counts {
        out.push(',');
        out.push_str(&c.to_string());
    }
    out.push(',');
    out.push_str(&fmt_f64(t));
    out.push('\n');
    for (c, s) in grid.coords().iter().zip(support.values()) {
        out.push_str(&join(c[..n - 1].iter().copied().chain([*s])));
        out.push('\n');
    }
    out
}

pub fn write_snapshot(path: &Path, support: &ScalarField, t: f64) -> Result<()> {
    std::fs::write(path, snapshot_to_string(support, t))?;
    Ok(())
}

/// Parses a snapshot, rebuilding its grid and checking the stored coordinates.
pub fn parse_snapshot(text: &str) -> Result<(ScalarField, f64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    let n: usize = fields
        .first()
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad snapshot header '{header}'")))?;
    if !(n == 2 || n == 3) || fields.len() != n + 1 {
        return Err(Error::Parse(format!("bad snapshot header '{header}'")));
    }
    let counts: Vec<usize> = fields[1..n]
        .iter()
        .map(|f| f.trim().parse().map_err(|_| Error::Parse(format!("bad count '{f}'"))))
        .collect::<Result<_>>()?;
    let t: f64 = fields[n].trim().parse().map_err(|_| Error::Parse(format!("bad time '{}'", fields[n])))?;
    let grid = build_grid(n, &counts).map_err(|e| Error::Parse(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("node {k}: bad value '{f}'"))))
            .collect::<Result<_>>()?;
        if cols.len() != n || k >= grid.len() {
            return Err(Error::Parse(format!("node {k}: malformed line '{line}'")));
        }
        let expect = &grid.coords()[k];
        if (0..n - 1).any(|i| (cols[i] - expect[i]).abs() > 1e-12) {
            return Err(Error::Parse(format!("node {k}: coordinates do not match the grid")));
        }
        values.push(cols[n - 1]);
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!("expected {} nodes, found {}", grid.len(), values.len())));
    }
    Ok((ScalarField::new(grid, values)?, t))
}

pub fn read_snapshot(path: &Path) -> Result<(ConvexBody, f64)> {
    let (s, t) = parse_snapshot(&std::fs::read_to_string(path)?)?;
    Ok((ConvexBody::new(s)?, t))
}

/// File name `body_t<t>.csv` with `t` printed to ten decimals.
pub fn snapshot_name(t: f64) -> String {
    format!("body_t{t:.10}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::AnisotropyPhi;
    use crate::convex::ellipsoid_support;
    use crate::diagnostics::record;

    #[test]
    fn trajectory_round_trip_is_exact() {
        let g = build_grid(3, &[16, 32]).unwrap();
        let b = ConvexBody::from_fn(g, |z| ellipsoid_support(&[1.0, 1.2, 1.5], z)).unwrap();
        let r = record(&b, 0.125, 1.0 / 3.0, &AnisotropyPhi::isotropic(), 0.5);
        let text = trajectory_to_string(&[r.clone(), r.clone()]).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("t,dt,V,s_min,s_max,ratio,osc,grad_sup,S_min,S_max,K_min,K_max,"));
        let back = read_trajectory(text.as_bytes()).unwrap();
        assert_eq!(back, vec![r.clone(), r]);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "t,dt,V\n0,0,1\n";
        match read_trajectory(text.as_bytes()) {
            Err(Error::Parse(m)) => assert!(m.contains("centroid"), "{m}"),
            other => panic!("{other:?}"),
        }
        let cols = DiagnosticsRecord::columns(2);
        let header: Vec<&str> = cols.iter().map(String::as_str).filter(|c| *c != "kappa_max").collect();
        match read_trajectory(format!("{}\n", header.join(",")).as_bytes()) {
            Err(Error::Parse(m)) => assert!(m.contains("'kappa_max'"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn snapshot_round_trip() {
        for g in [build_grid(2, &[64]).unwrap(), build_grid(3, &[16, 32]).unwrap()] {
            let s = ScalarField::from_fn(g.clone(), |z| ellipsoid_support(&[1.0, 1.3, 0.9], z)).unwrap();
            let text = snapshot_to_string(&s, 0.75);
            let header = text.lines().next().unwrap();
            assert!(header.ends_with(",7.5000000000000000e-1"), "{header}");
            let (back, t) = parse_snapshot(&text).unwrap();
            assert_eq!(t, 0.75);
            assert_eq!(back.values(), s.values());
        }
        assert!(parse_snapshot("2,64\n").is_err());
        assert!(parse_snapshot("2,64,0.0\n0.1,1.0\n").is_err());
    }
}
