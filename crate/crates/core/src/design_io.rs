//! Text form of a [`WaveformDesign`]: dimensions, ρ and row-major matrices.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::WaveformDesign;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRecord {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub s_p: Vec<f64>,
    pub s_i: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_i: Vec<f64>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

impl From<&WaveformDesign> for DesignRecord {
    fn from(d: &WaveformDesign) -> Self {
        let (n, m) = d.shape();
        Self {
            n,
            m,
            rho: d.rho,
            s_p: row_major(&d.s_p),
            s_i: row_major(&d.s_i),
            phi_p: row_major(&d.phi_p),
            phi_i: row_major(&d.phi_i),
        }
    }
}

impl DesignRecord {
    pub fn to_design(&self) -> Result<WaveformDesign> {
        let mat = |name: &str, v: &[f64]| -> Result<DMatrix<f64>> {
            if v.len() != self.n * self.m {
                return Err(Error::Design(format!(
                    "`{name}` has {} entries, expected n*m = {}",
                    v.len(),
                    self.n * self.m
                )));
            }
            Ok(DMatrix::from_row_slice(self.n, self.m, v))
        };
        WaveformDesign::new(
            mat("s_p", &self.s_p)?,
            mat("s_i", &self.s_i)?,
            mat("phi_p", &self.phi_p)?,
            mat("phi_i", &self.phi_i)?,
            self.rho,
        )
    }
}

pub fn design_to_toml(d: &WaveformDesign) -> String {
    toml::to_string(&DesignRecord::from(d)).expect("design record serializes")
}

/// Parses a design, either at the top level or under a `[design]` table.
pub fn design_from_toml(src: &str) -> Result<WaveformDesign> {
    let value: toml::Table = src
        .parse()
        .map_err(|e: toml::de::Error| Error::Design(e.message().to_string()))?;
    let table = match value.get("design") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => value,
    };
    let rec: DesignRecord = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::Design(e.message().to_string()))?;
    rec.to_design()
}

pub fn read_design(path: impl AsRef<Path>) -> Result<WaveformDesign> {
    design_from_toml(&std::fs::read_to_string(path)?)
}

pub fn write_design(path: impl AsRef<Path>, d: &WaveformDesign) -> Result<()> {
    std::fs::write(path, design_to_toml(d))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WaveformDesign {
        WaveformDesign::new(
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 1.0 / 3.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.6, 0.7]),
            DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.5, -0.25]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.2, 0.3]),
            0.37,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let d = sample();
        let text = design_to_toml(&d);
        assert!(text.contains("s_p = [0.1, 0.2, 0.3, 0.3333333333333333]"));
        assert_eq!(design_from_toml(&text).unwrap(), d);
        let nested = format!("[manifest]\nverb = \"optimize\"\n\n[design]\n{text}");
        assert_eq!(design_from_toml(&nested).unwrap(), d);
    }

    #[test]
    fn rejects_bad_files() {
        let text = design_to_toml(&sample()).replace("n = 2", "n = 3");
        assert!(matches!(design_from_toml(&text), Err(Error::Design(_))));
        let text = design_to_toml(&sample()).replace("rho = 0.37", "rho = 1.5");
        assert!(design_from_toml(&text).is_err());
        assert!(design_from_toml("n = 1").is_err());
        let text = design_to_toml(&sample()) + "extra = 1\n";
        assert!(design_from_toml(&text).is_err());
    }
}
