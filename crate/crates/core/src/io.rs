//! On-disk formats.
//!
//! A grid field is a directory holding `meta.json` and one `<component>.csv`
//! per stored component: `N` rows indexed by `x2`, `N` columns indexed by `x1`,
//! values written with 17 significant digits so a save/load round trip is exact.
//! Sinograms are a single CSV with header `phi,s,channel,value`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_field::{FieldKind, Grid2, GridField};
use crate::raytransforms::{Channel, Sinogram};

pub const FIELD_SCHEMA: &str = "tfg/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub schema: String,
    pub kind: FieldKind,
    pub n: usize,
    pub grid_n: usize,
    pub extent: f64,
    pub components: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid_field(dir: &Path, f: &GridField) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = f.grid();
    let names = f.kind().component_names();
    let meta = FieldMeta {
        schema: FIELD_SCHEMA.into(),
        kind: f.kind(),
        n: 2,
        grid_n: grid.n(),
        extent: grid.extent(),
        components: names.clone(),
    };
    write_json(&dir.join("meta.json"), &meta)?;
    let n = grid.n();
    for (name, comp) in names.iter().zip(f.components()) {
        let mut w = BufWriter::new(fs::File::create(dir.join(format!("{name}.csv")))?);
        for row in comp.chunks(n) {
            let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn read_grid_field(dir: &Path) -> Result<GridField> {
    let meta: FieldMeta = serde_json::from_reader(BufReader::new(fs::File::open(dir.join("meta.json"))?))?;
    if meta.schema != FIELD_SCHEMA {
        return Err(Error::Parse(format!("unsupported field schema '{}'", meta.schema)));
    }
    if meta.n != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: meta.n });
    }
    let expected = meta.kind.component_names();
    if meta.components != expected {
        return Err(Error::Parse(format!(
            "components {:?} do not match kind {} ({:?})",
            meta.components, meta.kind, expected
        )));
    }
    let grid = Grid2::new(meta.grid_n, meta.extent)?;
    let n = grid.n();
    let mut data = Vec::with_capacity(expected.len());
    for name in &expected {
        let path = dir.join(format!("{name}.csv"));
        let reader = BufReader::new(fs::File::open(&path)?);
        let mut comp = Vec::with_capacity(grid.len());
        let mut rows = 0;
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = comp.len();
            for cell in line.split(',') {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    Error::Parse(format!("{}: bad number '{cell}' in row {rows}", path.display()))
                })?;
                comp.push(v);
            }
            if comp.len() - before != n {
                return Err(Error::Parse(format!(
                    "{}: row {rows} has {} values, expected {n}",
                    path.display(),
                    comp.len() - before
                )));
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Parse(format!("{}: {rows} rows, expected {n}", path.display())));
        }
        data.push(comp);
    }
    GridField::new(grid, meta.kind, data)
}

pub fn write_sinogram_csv(path: &Path, s: &Sinogram) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "phi,s,channel,value")?;
    let lines = s.lines();
    for &ch in s.channels() {
        let vals = s.channel(ch).unwrap();
        for a in 0..lines.n_angles() {
            for b in 0..lines.n_offsets() {
                let v = vals[a * lines.n_offsets() + b];
                writeln!(w, "{},{},{},{}", num(lines.angle(a)), num(lines.offset(b)), ch, num(v))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of a sinogram CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramRow {
    pub phi: f64,
    pub s: f64,
    pub channel: Channel,
    pub value: f64,
}

pub fn read_sinogram_csv(path: &Path) -> Result<Vec<SinogramRow>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "phi,s,channel,value" => {}
        _ => return Err(Error::Parse(format!("{}: missing sinogram header", path.display()))),
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::Parse(format!("{}: row {k} has {} cells", path.display(), cells.len())));
        }
        let f = |c: &str| c.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{c}'")));
        out.push(SinogramRow { phi: f(cells[0])?, s: f(cells[1])?, channel: cells[2].parse()?, value: f(cells[3])? });
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::gen_random_bandlimited;
    use crate::raytransforms::{momentum_i, LineGrid};

    #[test]
    fn field_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2::new(32, 2.5).unwrap();
        for kind in [FieldKind::Scalar, FieldKind::Vector, FieldKind::Sym2, FieldKind::Elastic2] {
            let f = gen_random_bandlimited(&grid, kind, 9, 0.5, false).unwrap();
            let path = dir.path().join(kind.as_str());
            write_grid_field(&path, &f).unwrap();
            assert_eq!(read_grid_field(&path).unwrap(), f);
        }
        let meta = fs::read_to_string(dir.path().join("elastic2/meta.json")).unwrap();
        assert!(meta.contains("\"schema\": \"tfg/1\"") && meta.contains("w1222"));
    }

    #[test]
    fn rejects_malformed_fields() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2::new(16, 2.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Vector, 1, 0.5, false).unwrap();
        write_grid_field(dir.path(), &f).unwrap();
        fs::write(dir.path().join("u2.csv"), "1,2\n").unwrap();
        assert!(matches!(read_grid_field(dir.path()), Err(Error::Parse(_))));
    }

    #[test]
    fn sinogram_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2::new(32, 3.0).unwrap();
        let f = gen_random_bandlimited(&grid, FieldKind::Sym2, 4, 0.25, false).unwrap();
        let lines = LineGrid::new(&grid, 3, 5).unwrap();
        let s = momentum_i(&f, &[0, 1], &lines).unwrap();
        let path = dir.path().join("s.csv");
        write_sinogram_csv(&path, &s).unwrap();
        let rows = read_sinogram_csv(&path).unwrap();
        assert_eq!(rows.len(), 30);
        assert_eq!(rows[16].channel, Channel::I1);
        assert_eq!(rows[16].value, s.get(Channel::I1, 0, 1).unwrap());
        assert_eq!(rows[7].phi, lines.angle(1));
    }
}
