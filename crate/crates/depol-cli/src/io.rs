//! File formats: the χ-matrix interchange schema and the sweep/ellipsoid
//! table writers. All numbers are written at full precision (shortest
//! round-trip decimal), so re-reading a file reproduces the exact values and
//! identical runs produce byte-identical files.

use std::path::Path;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use depol::process::ChiMatrix;

use crate::CliError;

pub const CHI_BASIS: &str = "I,t1,t2,t3";

/// χ on disk: real and imaginary parts as row-major 4x4 arrays.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChiFile {
    pub basis: String,
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl ChiFile {
    pub fn from_chi(chi: &ChiMatrix) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = chi.matrix()[(i, j)].re;
                im[i][j] = chi.matrix()[(i, j)].im;
            }
        }
        ChiFile {
            basis: CHI_BASIS.to_string(),
            re,
            im,
        }
    }

    pub fn to_chi(&self) -> Result<ChiMatrix, CliError> {
        if self.basis != CHI_BASIS {
            return Err(CliError::Malformed(format!(
                "unsupported χ basis `{}` (expected `{CHI_BASIS}`)",
                self.basis
            )));
        }
        let m = Matrix4::from_fn(|i, j| C64::new(self.re[i][j], self.im[i][j]));
        ChiMatrix::new(m).map_err(|e| CliError::Malformed(format!("not a process matrix: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("χ serializes");
        text.push('\n');
        text
    }

    /// Flattened row-major CSV: a header line, then one row of 32 values.
    pub fn to_csv(&self) -> String {
        let mut header = Vec::with_capacity(32);
        let mut row = Vec::with_capacity(32);
        for part in ["re", "im"] {
            for i in 0..4 {
                for j in 0..4 {
                    header.push(format!("{part}_{i}{j}"));
                    let v = if part == "re" { self.re[i][j] } else { self.im[i][j] };
                    row.push(format!("{v}"));
                }
            }
        }
        format!("{}\n{}\n", header.join(","), row.join(","))
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| CliError::Malformed("empty χ CSV".into()))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        let data = lines
            .next()
            .ok_or_else(|| CliError::Malformed("χ CSV has no data row".into()))?;
        let values: Vec<&str> = data.split(',').map(str::trim).collect();
        if names.len() != 32 || values.len() != 32 {
            return Err(CliError::Malformed(format!(
                "χ CSV needs 32 columns, found {} / {}",
                names.len(),
                values.len()
            )));
        }
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for (name, value) in names.iter().zip(values) {
            let v: f64 = value
                .parse()
                .map_err(|_| CliError::Malformed(format!("bad number `{value}`")))?;
            let (part, idx) = name
                .split_once('_')
                .ok_or_else(|| CliError::Malformed(format!("bad column `{name}`")))?;
            let bytes = idx.as_bytes();
            if bytes.len() != 2 || !bytes[0].is_ascii_digit() || !bytes[1].is_ascii_digit() {
                return Err(CliError::Malformed(format!("bad column `{name}`")));
            }
            let (i, j) = ((bytes[0] - b'0') as usize, (bytes[1] - b'0') as usize);
            if i > 3 || j > 3 {
                return Err(CliError::Malformed(format!("bad column `{name}`")));
            }
            match part {
                "re" => re[i][j] = v,
                "im" => im[i][j] = v,
                _ => return Err(CliError::Malformed(format!("bad column `{name}`"))),
            }
        }
        Ok(ChiFile {
            basis: CHI_BASIS.to_string(),
            re,
            im,
        })
    }
}

/// Read a χ from disk, accepting either format (sniffed, JSON first).
pub fn read_chi(path: &Path) -> Result<ChiMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let file = match serde_json::from_str::<ChiFile>(&text) {
        Ok(f) => f,
        Err(json_err) => ChiFile::from_csv(&text).map_err(|csv_err| {
            CliError::Malformed(format!(
                "{}: not χ JSON ({json_err}) nor χ CSV ({csv_err})",
                path.display()
            ))
        })?,
    };
    file.to_chi()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// One angle of a sweep.
#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub angle_degrees: f64,
    /// χ eigenvalues, descending; sum 1 within tolerance.
    pub eigenvalues: [f64; 4],
    /// Bloch-map singular values, descending.
    pub radii: [f64; 3],
    pub unitality_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_to_theory: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepFile {
    pub scheme: String,
    pub mode: String,
    /// Output-state estimator of the stochastic modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rows: Vec<SweepRow>,
}

impl SweepFile {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("sweep serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "angle_degrees,eig1,eig2,eig3,eig4,radius1,radius2,radius3,unitality_residual,fidelity_to_theory\n",
        );
        for r in &self.rows {
            let fid = r
                .fidelity_to_theory
                .map(|f| format!("{f}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.angle_degrees,
                r.eigenvalues[0],
                r.eigenvalues[1],
                r.eigenvalues[2],
                r.eigenvalues[3],
                r.radii[0],
                r.radii[1],
                r.radii[2],
                r.unitality_residual,
                fid
            ));
        }
        out
    }
}

/// One grid point of the sphere-image export.
#[derive(Debug, Serialize)]
pub struct EllipsoidPoint {
    pub input: [f64; 3],
    pub image: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct EllipsoidFile {
    pub scheme: String,
    pub angle_degrees: f64,
    pub latitudes: usize,
    pub longitudes: usize,
    pub points: Vec<EllipsoidPoint>,
}

impl EllipsoidFile {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("grid serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("lat_index,lon_index,in_s1,in_s2,in_s3,out_s1,out_s2,out_s3\n");
        for (k, p) in self.points.iter().enumerate() {
            let (i, j) = (k / self.longitudes, k % self.longitudes);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i, j, p.input[0], p.input[1], p.input[2], p.image[0], p.image[1], p.image[2]
            ));
        }
        out
    }
}
