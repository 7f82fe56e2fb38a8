//! Deterministic file writers: fixed column orders, 17-significant-digit
//! numerics, no timestamps, so identical configs reproduce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use kdv_core::{EnergyRecord, Field};

pub const ENERGY_COLUMNS: &str =
    "t,l2_sq,e0,h1_sq,int_u3,l3_cubed,e_sec3,k_sec3,e1,j_val,diss_cum,res_dissipation,res_hamiltonian";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_energy_csv(path: &Path, records: &[EnergyRecord]) -> std::io::Result<()> {
    let mut out = String::with_capacity(records.len() * 256 + 128);
    out.push_str(ENERGY_COLUMNS);
    out.push('\n');
    for r in records {
        let row = [
            r.t,
            r.l2_sq,
            r.e0,
            r.h1_sq,
            r.int_u3,
            r.l3_cubed,
            r.e_sec3,
            r.k_sec3,
            r.e1,
            r.j_val,
            r.diss_cum,
            r.res_dissipation,
            r.res_hamiltonian,
        ];
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

/// Two-column field dump; the single header line carries the sample time and
/// grid parameters, the remaining lines are `x,u` pairs.
pub fn write_field_csv(path: &Path, t: f64, field: &Field) -> std::io::Result<()> {
    let g = field.grid();
    let mut out = String::with_capacity(g.n() * 48 + 64);
    out.push_str(&format!(
        "# t={} box_length={} n={}\n",
        num(t),
        num(g.box_length()),
        g.n()
    ));
    for (&x, &u) in g.nodes().iter().zip(field.samples()) {
        out.push_str(&num(x));
        out.push(',');
        out.push_str(&num(u));
        out.push('\n');
    }
    fs::write(path, out)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    text.push('\n');
    fs::write(path, text)
}

/// Appends one CSV line, creating the file with `header` first when absent.
pub struct CsvWriter {
    file: fs::File,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> std::io::Result<Self> {
        let mut file = fs::File::create(path)?;
        writeln!(file, "{header}")?;
        Ok(Self { file })
    }

    pub fn row(&mut self, cells: &[String]) -> std::io::Result<()> {
        writeln!(self.file, "{}", cells.join(","))
    }
}

pub fn fmt_num(v: f64) -> String {
    num(v)
}
