//! Field dumps: plain CSV with columns rho,z,V,W,Z,alpha and a header
//! recording class, beta, ell, and grid shape. Used for solver checkpoints.

use std::path::Path;

use crate::error::{Error, Result};
use crate::families::ClassKind;
use crate::solver::HyperbolicField;

/// One parsed field dump.
#[derive(Debug, Clone)]
pub struct FieldDump {
    pub class_tag: String,
    pub beta: f64,
    pub ell: f64,
    pub n_rho: usize,
    pub n_z: usize,
    /// Rows in node order: (rho, z, v, w, big_z, alpha).
    pub rows: Vec<(f64, f64, f64, f64, f64, f64)>,
}

/// Serialize a solver field (total V, W; the solver carries no Z or alpha,
/// which are written as zero).
pub fn write_field_csv(field: &HyperbolicField, path: &Path) -> Result<()> {
    let class = field.model.class;
    let (tag, beta, ell) = match class.kind {
        ClassKind::Ale { p, q } => (format!("ale({p},{q})"), 0.0, 0.0),
        ClassKind::Alf { k, ell } => (format!("alf({k})"), 0.0, ell),
        ClassKind::Af { beta, ell } => ("af".to_string(), beta, ell),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "# class={tag} beta={beta} ell={ell} n_rho={} n_z={}\n",
        field.spec.n_rho, field.spec.n_z
    ));
    out.push_str("rho,z,V,W,Z,alpha\n");
    for i in 0..field.spec.n_rho {
        for j in 0..field.spec.n_z {
            let p = field.point_at(i, j);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                field.rho_at(i),
                field.z_at(j),
                p.v,
                p.w,
                0.0,
                0.0
            ));
        }
    }
    Ok(std::fs::write(path, out)?)
}

pub fn read_field_csv(path: &Path) -> Result<FieldDump> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field dump".into()))?;
    if !header.starts_with('#') {
        return Err(Error::Parse("field dump missing header".into()));
    }
    let mut class_tag = String::new();
    let mut beta = 0.0;
    let mut ell = 0.0;
    let mut n_rho = 0;
    let mut n_z = 0;
    for kv in header.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = kv.split_once('=') {
            match k {
                "class" => class_tag = v.to_string(),
                "beta" => beta = v.parse().map_err(|_| Error::Parse("bad beta".into()))?,
                "ell" => ell = v.parse().map_err(|_| Error::Parse("bad ell".into()))?,
                "n_rho" => n_rho = v.parse().map_err(|_| Error::Parse("bad n_rho".into()))?,
                "n_z" => n_z = v.parse().map_err(|_| Error::Parse("bad n_z".into()))?,
                _ => {}
            }
        }
    }
    let columns = lines
        .next()
        .ok_or_else(|| Error::Parse("field dump missing column row".into()))?;
    if columns.trim() != "rho,z,V,W,Z,alpha" {
        return Err(Error::Parse(format!("unexpected columns {columns:?}")));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad field row {}", k + 3)))?;
        if vals.len() != 6 {
            return Err(Error::Parse(format!("row {} has {} columns", k + 3, vals.len())));
        }
        rows.push((vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]));
    }
    if rows.len() != n_rho * n_z {
        return Err(Error::Parse(format!(
            "field dump shape mismatch: {} rows for {}x{}",
            rows.len(),
            n_rho,
            n_z
        )));
    }
    Ok(FieldDump { class_tag, beta, ell, n_rho, n_z, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{BrillField, FamilyParams};
    use crate::solver::{build_model_map, GridSpec};

    #[test]
    fn field_dump_roundtrip() {
        let fam = FamilyParams::FlatAf { beta: 0.0, ell: 2.0 };
        let rods = fam.rod_data().unwrap();
        let model = build_model_map(&rods, &fam.class()).unwrap();
        let spec = GridSpec { n_rho: 5, n_z: 7, rho_max: 4.0, z_max: 4.0, grading: 1.0 };
        let field = HyperbolicField::new(spec, model).unwrap();
        let dir = std::env::temp_dir().join("iml_field_dump_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv(&field, &path).unwrap();
        let dump = read_field_csv(&path).unwrap();
        assert_eq!(dump.n_rho, 5);
        assert_eq!(dump.n_z, 7);
        assert_eq!(dump.rows.len(), 35);
        assert_eq!(dump.ell, 2.0);
        std::fs::remove_dir_all(&dir).ok();
    }
}
