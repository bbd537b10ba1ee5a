//! Persistence of fields, catalogs and gPC coefficients.
//!
//! Fields are CSV with header `x1,x2,value`, one row per interior node in
//! row-major order, values printed with 17 significant digits so a write /
//! read cycle is lossless. Coefficients are stored as three files: the
//! catalog (JSON), the block-major values as little-endian `f64`
//! (`coefficients.bin`) and a JSON manifest describing both.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{Grid2d, GridFunction};
use crate::galerkin::GpcCoefficients;
use crate::multiindex::{CatalogDocument, IndexCatalog};
use crate::randomfield::FieldParams;

pub const COEFFICIENT_FORMAT_VERSION: u32 = 1;
pub const CATALOG_FILE: &str = "catalog.json";
pub const COEFFICIENT_FILE: &str = "coefficients.bin";
pub const COEFFICIENT_MANIFEST: &str = "coefficients.json";

pub fn write_field_csv(path: &Path, grid: &Grid2d, values: &[f64]) -> Result<()> {
    if values.len() != grid.n_phy() {
        return Err(Error::Input(format!("{} values for {} interior nodes", values.len(), grid.n_phy())));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x1,x2,value")?;
    for (s, v) in values.iter().enumerate() {
        let (x1, x2) = grid.interior_coords(s);
        writeln!(w, "{x1:.16e},{x2:.16e},{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// A field read back from CSV, with the grid inferred from the row count.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCsv {
    pub grid: Grid2d,
    pub coords: Vec<(f64, f64)>,
    pub values: GridFunction,
}

pub fn read_field_csv(path: &Path) -> Result<FieldCsv> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "x1,x2,value" {
        return Err(Error::Input(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.map(str::trim)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Input(format!("{}: bad row {}: {line:?}", path.display(), lineno + 2)))
        };
        let mut cols = line.split(',');
        let x1 = parse(cols.next())?;
        let x2 = parse(cols.next())?;
        let v = parse(cols.next())?;
        coords.push((x1, x2));
        values.push(v);
    }
    let m = (values.len() as f64).sqrt().round() as usize;
    if m * m != values.len() || m == 0 {
        return Err(Error::Input(format!("{}: {} rows is not a square grid", path.display(), values.len())));
    }
    let grid = Grid2d::new(m + 1)?;
    Ok(FieldCsv { grid, coords, values: GridFunction(values) })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_catalog(path: &Path, catalog: &IndexCatalog) -> Result<()> {
    write_json(path, &catalog.to_document())
}

pub fn read_catalog(path: &Path) -> Result<IndexCatalog> {
    IndexCatalog::from_document(&read_json::<CatalogDocument>(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientManifest {
    pub format_version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: u32,
    pub grid_cells: usize,
    pub n_stoch: usize,
    pub n_phy: usize,
    pub field: FieldParams,
    /// Always `"block-major-f64-le"`.
    pub layout: String,
    pub catalog_file: String,
    pub values_file: String,
}

/// Writes catalog, values and manifest into `dir`.
pub fn write_coefficients(dir: &Path, coeffs: &GpcCoefficients, grid: &Grid2d, field: &FieldParams) -> Result<()> {
    if coeffs.n_phy != grid.n_phy() {
        return Err(Error::Input("coefficient blocks do not match the grid".into()));
    }
    write_catalog(&dir.join(CATALOG_FILE), &coeffs.catalog)?;
    let mut bytes = Vec::with_capacity(coeffs.values.len() * 8);
    for v in &coeffs.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(dir.join(COEFFICIENT_FILE), bytes)?;
    let manifest = CoefficientManifest {
        format_version: COEFFICIENT_FORMAT_VERSION,
        n: coeffs.catalog.dim(),
        p: coeffs.catalog.degree(),
        grid_cells: grid.cells(),
        n_stoch: coeffs.n_blocks(),
        n_phy: coeffs.n_phy,
        field: *field,
        layout: "block-major-f64-le".into(),
        catalog_file: CATALOG_FILE.into(),
        values_file: COEFFICIENT_FILE.into(),
    };
    write_json(&dir.join(COEFFICIENT_MANIFEST), &manifest)
}

pub fn read_coefficients(dir: &Path) -> Result<(GpcCoefficients, CoefficientManifest)> {
    let manifest: CoefficientManifest = read_json(&dir.join(COEFFICIENT_MANIFEST))?;
    if manifest.format_version != COEFFICIENT_FORMAT_VERSION {
        return Err(Error::Input(format!("unsupported coefficient format {}", manifest.format_version)));
    }
    let catalog = read_catalog(&dir.join(&manifest.catalog_file))?;
    let bytes = fs::read(dir.join(&manifest.values_file))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Input("coefficient file length is not a multiple of 8".into()));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    if catalog.len() != manifest.n_stoch {
        return Err(Error::Input("catalog size disagrees with the manifest".into()));
    }
    let coeffs = GpcCoefficients::new(catalog, manifest.n_phy, values)?;
    Ok((coeffs, manifest))
}
