//! Run artifacts: CSV tables, SVG files and the hash manifest.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use loiter_core::dubins::TransitionPlan;
use loiter_core::fleet::EventRecord;
use loiter_core::geometry::{AreaSpec, PackingKind, Vec2};
use loiter_core::packing::PackingLayout;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

/// Collects every file written for one run.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let bytes = csv_bytes(rows)?;
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every artifact with its SHA-256.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        self.files.sort();
        let entries = self
            .files
            .iter()
            .map(|f| Ok(ManifestEntry { file: f.clone(), sha256: sha256_file(&self.dir.join(f))? }))
            .collect::<Result<Vec<_>>>()?;
        let json = serde_json::to_string_pretty(&entries)?;
        fs::write(self.dir.join(MANIFEST), json + "\n")?;
        Ok(entries)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct LayoutRow {
    pub id: usize,
    pub row: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub r_l_m: f64,
}

pub fn layout_rows(layout: &PackingLayout) -> Vec<LayoutRow> {
    layout
        .indexed()
        .map(|(id, row, c)| LayoutRow { id, row, x_m: c.x, y_m: c.y, r_l_m: layout.loiter_radius })
        .collect()
}

#[allow(dead_code)]
pub fn read_layout_rows<R: Read>(reader: R) -> Result<Vec<LayoutRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "row", "x_m", "y_m", "r_l_m"] {
        bail!("unexpected layout header {headers:?}");
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<LayoutRow>, _>>()?)
}

/// Rebuilds a layout from its CSV rows (ids must be dense and row-major).
#[allow(dead_code)]
pub fn layout_from_rows(rows: &[LayoutRow], kind: PackingKind, area: AreaSpec) -> Result<PackingLayout> {
    let Some(first) = rows.first() else {
        bail!("layout has no rows");
    };
    let mut out: Vec<Vec<Vec2>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.id != i || r.r_l_m != first.r_l_m {
            bail!("layout row {i} is out of order or has a different radius");
        }
        while out.len() <= r.row {
            out.push(Vec::new());
        }
        out[r.row].push(Vec2::new(r.x_m, r.y_m));
    }
    Ok(PackingLayout { kind, area, loiter_radius: first.r_l_m, rows: out })
}

#[derive(Debug, Serialize)]
pub struct EventRow<'a> {
    pub t_s: f64,
    pub event: &'a str,
    pub detail: &'a str,
}

pub fn event_rows(events: &[EventRecord]) -> Vec<EventRow<'_>> {
    events.iter().map(|e| EventRow { t_s: e.time, event: e.kind.name(), detail: &e.detail }).collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PathRow {
    pub uav_id: usize,
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
}

/// Samples a plan every `dt` from `t0` to its arrival (inclusive), with
/// times offset by `clock`.
pub fn path_rows(plan: &TransitionPlan, t0: f64, dt: f64, clock: f64) -> Vec<PathRow> {
    let end = plan.arrival_time;
    let n = ((end - t0) / dt).floor().max(0.0) as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
    if end - ts[ts.len() - 1] > 1e-9 {
        ts.push(end);
    }
    ts.into_iter()
        .map(|t| {
            let p = plan.pose_at(t);
            PathRow { uav_id: plan.uav_id, t_s: clock + t, x_m: p.position.x, y_m: p.position.y, heading_rad: p.heading }
        })
        .collect()
}
