//! Field CSVs and path archives.
//!
//! A field CSV has header `i,j,c0[,c1,c2]` and one row per cell in storage
//! order. A path archive is a directory holding `manifest.toml`,
//! `grid.csv` (cell centres) and one CSV per slice: `v_0000.csv`, …,
//! `rho_0000.csv`, … and, when pressures are known, `p_0000.csv`, … per
//! interval. Floats are written in shortest round-trip form, so archives
//! reload bit-exactly and identical inputs give identical files.

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::balance::{Eos, FluidState};
use crate::error::{Error, Result};
use crate::fields::{Grid2P, ScalarField, VectorField};
use crate::sben::Path;

pub const FORMAT: &str = "sben-path";
pub const VERSION: u32 = 1;

fn archive_err(file: &FsPath, msg: impl std::fmt::Display) -> Error {
    Error::Archive(format!("{}: {msg}", file.display()))
}

fn write_components(file: &FsPath, grid: &Grid2P, comps: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(file).map_err(|e| archive_err(file, e))?;
    let mut header = vec!["i".to_string(), "j".to_string()];
    header.extend((0..comps.len()).map(|c| format!("c{c}")));
    w.write_record(&header).map_err(|e| archive_err(file, e))?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(comps.iter().map(|c| c[k].to_string()));
            w.write_record(&row).map_err(|e| archive_err(file, e))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_components(file: &FsPath, grid: &Grid2P, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(file).map_err(|e| archive_err(file, e))?;
    let header = r.headers().map_err(|e| archive_err(file, e))?.clone();
    let want: Vec<String> = ["i", "j"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..n).map(|c| format!("c{c}")))
        .collect();
    if header.iter().map(str::trim).ne(want.iter().map(String::as_str)) {
        return Err(archive_err(file, format!("expected header {}", want.join(","))));
    }
    let mut out = vec![vec![f64::NAN; grid.len()]; n];
    let mut seen = vec![false; grid.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| archive_err(file, e))?;
        let parse_idx = |s: &str| s.trim().parse::<usize>().map_err(|e| archive_err(file, format!("row {}: {e}", line + 2)));
        let (i, j) = (parse_idx(&rec[0])?, parse_idx(&rec[1])?);
        if i >= grid.nx || j >= grid.ny {
            return Err(Error::GridMismatch {
                left: (i + 1, j + 1),
                right: grid.shape(),
            });
        }
        let k = grid.idx(i, j);
        if std::mem::replace(&mut seen[k], true) {
            return Err(archive_err(file, format!("cell ({i}, {j}) appears twice")));
        }
        for (c, col) in out.iter_mut().enumerate() {
            col[k] = rec[c + 2]
                .trim()
                .parse()
                .map_err(|e| archive_err(file, format!("row {}: {e}", line + 2)))?;
        }
    }
    let count = seen.iter().filter(|s| **s).count();
    if count != grid.len() {
        return Err(archive_err(
            file,
            format!("{count} cells found, grid {:?} has {}", grid.shape(), grid.len()),
        ));
    }
    Ok(out)
}

pub fn write_scalar_csv(file: &FsPath, s: &ScalarField) -> Result<()> {
    write_components(file, s.grid(), &[s.values()])
}

pub fn read_scalar_csv(file: &FsPath, grid: Grid2P) -> Result<ScalarField> {
    let mut c = read_components(file, &grid, 1)?;
    ScalarField::from_vec(grid, c.remove(0))
}

pub fn write_vector_csv(file: &FsPath, v: &VectorField) -> Result<()> {
    write_components(file, v.grid(), &[v.comp(0), v.comp(1), v.comp(2)])
}

pub fn read_vector_csv(file: &FsPath, grid: Grid2P) -> Result<VectorField> {
    let c = read_components(file, &grid, 3)?;
    let [x, y, z]: [Vec<f64>; 3] = c.try_into().expect("three components");
    VectorField::from_components(grid, [x, y, z])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub grid: GridInfo,
    pub t0: f64,
    pub dt: f64,
    pub n_intervals: usize,
    pub has_pressure: bool,
    pub eos: Eos,
}

fn slice_name(prefix: &str, k: usize) -> String {
    format!("{prefix}_{k:04}.csv")
}

/// Writes `path` into `dir`, creating it if needed.
pub fn write_path_archive(dir: &FsPath, path: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = *path.grid();
    let manifest = Manifest {
        format: FORMAT.to_string(),
        version: VERSION,
        kind: if path.is_incompressible() { "incompressible" } else { "compressible" }.to_string(),
        grid: GridInfo {
            nx: g.nx,
            ny: g.ny,
            lx: g.lx,
            ly: g.ly,
        },
        t0: path.states[0].t,
        dt: path.dt(),
        n_intervals: path.n_intervals(),
        has_pressure: path.pressures.is_some(),
        eos: path.states[0].eos,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Archive(e.to_string()))?;
    fs::write(dir.join("manifest.toml"), text)?;
    let xs = ScalarField::from_fn(g, |x, _| x);
    let ys = ScalarField::from_fn(g, |_, y| y);
    write_components(&dir.join("grid.csv"), &g, &[xs.values(), ys.values()])?;
    for (k, s) in path.states.iter().enumerate() {
        write_vector_csv(&dir.join(slice_name("v", k)), &s.v)?;
        if !path.is_incompressible() {
            write_scalar_csv(&dir.join(slice_name("rho", k)), &s.rho)?;
        }
    }
    if let Some(ps) = &path.pressures {
        for (k, p) in ps.iter().enumerate() {
            write_scalar_csv(&dir.join(slice_name("p", k)), p)?;
        }
    }
    Ok(())
}

pub fn read_manifest(dir: &FsPath) -> Result<Manifest> {
    let file = dir.join("manifest.toml");
    let text = fs::read_to_string(&file).map_err(|e| archive_err(&file, e))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| archive_err(&file, e.message()))?;
    if m.format != FORMAT || m.version != VERSION {
        return Err(archive_err(&file, format!("unsupported format {} v{}", m.format, m.version)));
    }
    Ok(m)
}

pub fn read_path_archive(dir: &FsPath) -> Result<Path> {
    let m = read_manifest(dir)?;
    let g = Grid2P::new(m.grid.nx, m.grid.ny, m.grid.lx, m.grid.ly)?;
    m.eos.validate()?;
    let mut states = Vec::with_capacity(m.n_intervals + 1);
    for k in 0..=m.n_intervals {
        let v = read_vector_csv(&dir.join(slice_name("v", k)), g)?;
        let t = m.t0 + k as f64 * m.dt;
        let state = if m.eos.is_incompressible() {
            FluidState::homogeneous(t, v, m.eos)?
        } else {
            let rho = read_scalar_csv(&dir.join(slice_name("rho", k)), g)?;
            FluidState::new(t, v, rho, m.eos)?
        };
        states.push(state);
    }
    let path = Path::new(states)?;
    if m.has_pressure {
        let ps = (0..m.n_intervals)
            .map(|k| read_scalar_csv(&dir.join(slice_name("p", k)), g))
            .collect::<Result<Vec<_>>>()?;
        return path.with_pressures(ps);
    }
    Ok(path)
}

/// Pretty JSON, newline-terminated.
pub fn write_json(file: &FsPath, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| archive_err(file, e))?;
    text.push('\n');
    fs::write(file, text)?;
    Ok(())
}

/// Errors unless the archive lives on `grid`.
pub fn check_archive_grid(path: &Path, grid: &Grid2P) -> Result<()> {
    let g = path.grid();
    if g.shape() != grid.shape() || (g.lx - grid.lx).abs() > 1e-12 * grid.lx || (g.ly - grid.ly).abs() > 1e-12 * grid.ly {
        return Err(Error::GridMismatch {
            left: g.shape(),
            right: grid.shape(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2P::new(6, 5, 1.0, 2.5).unwrap();
        let v = synth::smooth_vector(g, &mut synth::rng(1), 2);
        let f = dir.path().join("v.csv");
        write_vector_csv(&f, &v).unwrap();
        assert_eq!(read_vector_csv(&f, g).unwrap(), v);
        let first = fs::read_to_string(&f).unwrap();
        assert!(first.starts_with("i,j,c0,c1,c2\n0,0,"));
        write_vector_csv(&f, &v).unwrap();
        assert_eq!(fs::read_to_string(&f).unwrap(), first);
    }

    #[test]
    fn reading_on_the_wrong_grid_fails() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("s.csv");
        let g = Grid2P::periodic_2pi(8).unwrap();
        write_scalar_csv(&f, &ScalarField::constant(g, 1.0)).unwrap();
        assert!(read_scalar_csv(&f, Grid2P::periodic_2pi(4).unwrap()).is_err());
        assert!(read_scalar_csv(&f, Grid2P::periodic_2pi(16).unwrap()).is_err());
        assert!(read_vector_csv(&f, g).is_err());
    }

    #[test]
    fn archive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid2P::periodic_2pi(8).unwrap();
        let eos = Eos::BarotropicPower { p0: 1.0, rho0: 1.0, gamma: 1.4 };
        let mut r = synth::rng(3);
        let states = (0..3)
            .map(|k| {
                let rho = &ScalarField::constant(g, 1.0) + &(&synth::smooth_scalar(g, &mut r, 2) * 0.01);
                FluidState::new(0.1 * k as f64, synth::smooth_vector(g, &mut r, 2), rho, eos).unwrap()
            })
            .collect();
        let p = Path::new(states).unwrap();
        write_path_archive(dir.path(), &p).unwrap();
        let q = read_path_archive(dir.path()).unwrap();
        for (a, b) in p.states.iter().zip(&q.states) {
            assert_eq!(a.v, b.v);
            assert_eq!(a.rho, b.rho);
        }
        assert!(check_archive_grid(&q, &g).is_ok());
        assert!(matches!(
            check_archive_grid(&q, &Grid2P::periodic_2pi(16).unwrap()),
            Err(Error::GridMismatch { .. })
        ));
    }
}
