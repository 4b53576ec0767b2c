//! File formats: profile CSV with a JSON sidecar, NDJSON snapshots, scalar
//! and diagnostic CSV series.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontsolver::FrontProfile;
use crate::pdesim::{ScalarSample, Snapshot};

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Metadata stored next to a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub n: usize,
    pub c: f64,
    pub m_minus: Vec<f64>,
    pub m_plus: Vec<f64>,
    pub xi0: f64,
    pub dxi: f64,
    pub len: usize,
    pub offset: f64,
    pub method: String,
    pub csv: String,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `xi, phi_0.., dphi_0..` rows and the sidecar JSON.
pub fn write_profile(csv_path: &Path, p: &FrontProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err)?;
    let mut header = vec!["xi".to_string()];
    header.extend((0..p.n).map(|i| format!("phi_{i}")));
    header.extend((0..p.n).map(|i| format!("dphi_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for k in 0..p.len() {
        let mut row = vec![p.xi(k).to_string()];
        row.extend(p.phi_at(k).iter().map(|x| x.to_string()));
        row.extend(p.dphi_at(k).iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    let meta = ProfileMeta {
        n: p.n,
        c: p.c,
        m_minus: p.m_minus.clone(),
        m_plus: p.m_plus.clone(),
        xi0: p.xi0,
        dxi: p.dxi,
        len: p.len(),
        offset: p.offset,
        method: p.method.clone(),
        csv: csv_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    std::fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_profile(csv_path: &Path) -> Result<FrontProfile> {
    let meta: ProfileMeta = serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path))?)?;
    let mut r = csv::Reader::from_path(csv_path).map_err(csv_err)?;
    let n = meta.n;
    let mut phi = Vec::with_capacity(meta.len * n);
    let mut dphi = Vec::with_capacity(meta.len * n);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 1 + 2 * n {
            return Err(Error::Io(format!("profile row has {} fields, expected {}", rec.len(), 1 + 2 * n)));
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Io(e.to_string())))
            .collect::<Result<_>>()?;
        phi.extend_from_slice(&vals[1..1 + n]);
        dphi.extend_from_slice(&vals[1 + n..]);
    }
    if phi.len() != meta.len * n {
        return Err(Error::Io(format!("profile has {} rows, sidecar says {}", phi.len() / n, meta.len)));
    }
    Ok(FrontProfile {
        n,
        c: meta.c,
        m_minus: meta.m_minus,
        m_plus: meta.m_plus,
        xi0: meta.xi0,
        dxi: meta.dxi,
        phi,
        dphi,
        offset: meta.offset,
        method: meta.method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub x0: f64,
    pub dx: f64,
    pub u: Vec<Vec<f64>>,
    pub ut: Vec<Vec<f64>>,
}

impl From<&Snapshot> for SnapshotRecord {
    fn from(s: &Snapshot) -> Self {
        let rows = |v: &[f64]| v.chunks(s.n).map(|c| c.to_vec()).collect();
        SnapshotRecord {
            t: s.t,
            x0: s.x0,
            dx: s.dx,
            u: rows(&s.u),
            ut: rows(&s.ut),
        }
    }
}

impl SnapshotRecord {
    pub fn into_snapshot(self) -> Result<Snapshot> {
        let n = self.u.first().map_or(1, |r| r.len());
        if self.u.len() != self.ut.len() || self.u.iter().chain(&self.ut).any(|r| r.len() != n) {
            return Err(Error::Io("ragged snapshot record".into()));
        }
        Ok(Snapshot {
            t: self.t,
            x0: self.x0,
            dx: self.dx,
            n,
            u: self.u.into_iter().flatten().collect(),
            ut: self.ut.into_iter().flatten().collect(),
        })
    }
}

pub fn write_snapshots_ndjson(path: &Path, snaps: &[Snapshot]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in snaps {
        serde_json::to_writer(&mut w, &SnapshotRecord::from(s))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots_ndjson(path: &Path) -> Result<Vec<Snapshot>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SnapshotRecord = serde_json::from_str(&line)?;
        out.push(rec.into_snapshot()?);
    }
    Ok(out)
}

pub fn write_scalars_csv(path: &Path, rows: &[ScalarSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "energy", "dissipation", "x_Esc_left", "x_Esc_right"]).map_err(csv_err)?;
    for r in rows {
        w.write_record(&[
            r.t.to_string(),
            r.energy.to_string(),
            r.dissipation.to_string(),
            r.x_esc_left.to_string(),
            r.x_esc_right.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "F0_at_xesc")]
    pub f0_at_xesc: f64,
    #[serde(rename = "Q0_at_xesc")]
    pub q0_at_xesc: f64,
    #[serde(rename = "x_Esc")]
    pub x_big: f64,
    #[serde(rename = "x_esc")]
    pub x_small: f64,
    pub s_fit: f64,
    pub delta_dissip: f64,
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    if rows.is_empty() {
        w.write_record(["t", "E", "D", "F0_at_xesc", "Q0_at_xesc", "x_Esc", "x_esc", "s_fit", "delta_dissip"])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagnostics_csv(path: &Path) -> Result<Vec<DiagnosticRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|x| x.map_err(csv_err)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> FrontProfile {
        let len = 50;
        let phi: Vec<f64> = (0..len).map(|k| (0.1 * k as f64 - 2.5).tanh()).collect();
        let dphi: Vec<f64> = phi.iter().map(|p| 1.0 - p * p).collect();
        FrontProfile {
            n: 1,
            c: 0.125,
            m_minus: vec![-1.0],
            m_plus: vec![1.0],
            xi0: -2.5,
            dxi: 0.1,
            phi,
            dphi,
            offset: 0.3,
            method: "test".into(),
        }
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("front.csv");
        let p = profile();
        write_profile(&path, &p).unwrap();
        assert_eq!(read_profile(&path).unwrap(), p);
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snaps.ndjson");
        let s = Snapshot {
            t: 1.5,
            x0: -1.0,
            dx: 0.1,
            n: 2,
            u: vec![0.1, 0.2, 1.0 / 3.0, -4.0],
            ut: vec![0.0, 1e-17, 2.0, 3.0],
        };
        write_snapshots_ndjson(&path, &[s.clone(), s.clone()]).unwrap();
        let back = read_snapshots_ndjson(&path).unwrap();
        assert_eq!(back, vec![s.clone(), s]);
    }

    #[test]
    fn diagnostics_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diag.csv");
        let rows = vec![DiagnosticRow {
            t: 1.0,
            e: 2.0,
            d: 0.5,
            f0_at_xesc: 1e-3,
            q0_at_xesc: 2e-3,
            x_big: f64::NEG_INFINITY,
            x_small: -3.0,
            s_fit: f64::NAN,
            delta_dissip: 0.25,
        }];
        write_diagnostics_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,E,D,F0_at_xesc,Q0_at_xesc,x_Esc,x_esc,s_fit,delta_dissip"));
        let back = read_diagnostics_csv(&path).unwrap();
        assert_eq!(back[0].x_big, f64::NEG_INFINITY);
        assert!(back[0].s_fit.is_nan());
        assert_eq!(back[0].delta_dissip, 0.25);
    }
}
