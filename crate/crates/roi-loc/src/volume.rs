//! Volume data model and dataset directory I/O.
//!
//! A scan is stored on disk as a raw payload of 16-bit little-endian signed
//! intensities plus a JSON sidecar describing dims, spacing and units.
//! Annotations are JSON files holding one ground-truth box per scan, and a
//! dataset directory is tied together by an `index.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntensityUnits {
    #[serde(rename = "HU")]
    Hu,
    #[serde(rename = "arb")]
    Arbitrary,
}

/// A 3D scalar voxel grid with per-axis spacing in mm. Voxels are stored
/// row-major with x fastest: index = x + nx*(y + ny*z).
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: [u64; 3],
    spacing_mm: [f64; 3],
    units: IntensityUnits,
    voxels: Vec<i16>,
}

impl Volume {
    pub fn new(
        dims: [u64; 3],
        spacing_mm: [f64; 3],
        units: IntensityUnits,
        voxels: Vec<i16>,
    ) -> Result<Self> {
        if !spacing_mm.iter().all(|&s| s.is_finite() && s > 0.0) {
            return Err(Error::NonPositiveSpacing(spacing_mm));
        }
        if dims.iter().any(|&d| d < 8) {
            return Err(Error::DimsTooSmall(dims));
        }
        let n = dims.iter().map(|&d| d as usize).product::<usize>();
        if voxels.len() != n {
            return Err(Error::PayloadSizeMismatch {
                expected: n as u64 * 2,
                actual: voxels.len() as u64 * 2,
            });
        }
        Ok(Volume { dims, spacing_mm, units, voxels })
    }

    pub fn dims(&self) -> [u64; 3] {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn units(&self) -> IntensityUnits {
        self.units
    }

    pub fn voxels(&self) -> &[i16] {
        &self.voxels
    }

    #[inline]
    pub fn index(&self, x: u64, y: u64, z: u64) -> usize {
        (x + self.dims[0] * (y + self.dims[1] * z)) as usize
    }

    #[inline]
    pub fn get(&self, x: u64, y: u64, z: u64) -> i16 {
        self.voxels[self.index(x, y, z)]
    }

    /// Centre voxel of the whole volume.
    pub fn centre_voxel(&self) -> [i64; 3] {
        [
            (self.dims[0] / 2) as i64,
            (self.dims[1] / 2) as i64,
            (self.dims[2] / 2) as i64,
        ]
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    dims: [u64; 3],
    spacing_mm: [f64; 3],
    dtype: String,
    units: IntensityUnits,
}

fn sidecar_path(raw_path: &Path) -> PathBuf {
    raw_path.with_extension("json")
}

/// Write `volume` as `<path>` (raw i16le payload) plus its JSON sidecar.
pub fn save_volume(path: &Path, volume: &Volume) -> Result<()> {
    let sidecar = Sidecar {
        dims: volume.dims,
        spacing_mm: volume.spacing_mm,
        dtype: "i16le".to_string(),
        units: volume.units,
    };
    let mut bytes = Vec::with_capacity(volume.voxels.len() * 2);
    for v in &volume.voxels {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    let sp = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&sp, json).map_err(|e| Error::io(sp, e))?;
    Ok(())
}

/// Load a volume from `<path>` (raw payload) and its sidecar.
pub fn load_volume(path: &Path) -> Result<Volume> {
    let sp = sidecar_path(path);
    let sidecar_text = fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
    let sidecar: Sidecar =
        serde_json::from_str(&sidecar_text).map_err(|e| Error::parse(&sp, e))?;
    if sidecar.dtype != "i16le" {
        return Err(Error::config(format!(
            "unsupported dtype {:?} in {}",
            sidecar.dtype,
            sp.display()
        )));
    }
    if sidecar.dims.iter().any(|&d| d == 0) {
        return Err(Error::DimsTooSmall(sidecar.dims));
    }
    if !sidecar.spacing_mm.iter().all(|&s| s.is_finite() && s > 0.0) {
        return Err(Error::NonPositiveSpacing(sidecar.spacing_mm));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = sidecar.dims.iter().map(|&d| d as u64).product::<u64>() * 2;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadSizeMismatch { expected, actual: bytes.len() as u64 });
    }
    let voxels = bytes
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Volume::new(sidecar.dims, sidecar.spacing_mm, sidecar.units, voxels)
}

/// Ground-truth box for one scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub scan_id: String,
    pub gt_box: BoundingBox,
    pub organ_label: String,
}

#[derive(Serialize, Deserialize)]
struct AnnotationFile {
    scan_id: String,
    lower: [i64; 3],
    size: [u64; 3],
    organ: String,
}

pub fn save_annotation(path: &Path, ann: &Annotation) -> Result<()> {
    let file = AnnotationFile {
        scan_id: ann.scan_id.clone(),
        lower: ann.gt_box.lower,
        size: ann.gt_box.size,
        organ: ann.organ_label.clone(),
    };
    let json = serde_json::to_string_pretty(&file).expect("annotation serializes");
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_annotation(path: &Path) -> Result<Annotation> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: AnnotationFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    if file.size.iter().any(|&s| s == 0) {
        return Err(Error::config(format!("annotation {} has a zero-size box", path.display())));
    }
    Ok(Annotation {
        scan_id: file.scan_id,
        gt_box: BoundingBox::new(file.lower, file.size),
        organ_label: file.organ,
    })
}

/// One scan in a dataset directory. Paths are relative to the dataset root.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexEntry {
    pub scan_id: String,
    pub volume_path: String,
    #[serde(default)]
    pub annotation_path: Option<String>,
    pub labelled: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub entries: Vec<IndexEntry>,
}

impl DatasetIndex {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.scan_id.as_str()) {
                return Err(Error::config(format!("duplicate scan_id {:?} in index", e.scan_id)));
            }
            if e.labelled && e.annotation_path.is_none() {
                return Err(Error::MissingAnnotation(e.scan_id.clone()));
            }
        }
        Ok(())
    }
}

/// A dataset directory opened for reading.
pub struct Dataset {
    root: PathBuf,
    index: DatasetIndex,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let idx_path = root.join("index.json");
        let text = fs::read_to_string(&idx_path).map_err(|e| Error::io(&idx_path, e))?;
        let index: DatasetIndex =
            serde_json::from_str(&text).map_err(|e| Error::parse(&idx_path, e))?;
        index.validate()?;
        Ok(Dataset { root: root.to_path_buf(), index })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index(&self) -> &DatasetIndex {
        &self.index
    }

    pub fn entry(&self, scan_id: &str) -> Result<&IndexEntry> {
        self.index
            .entries
            .iter()
            .find(|e| e.scan_id == scan_id)
            .ok_or_else(|| Error::config(format!("scan {scan_id:?} not in index")))
    }

    pub fn load_volume(&self, scan_id: &str) -> Result<Volume> {
        let entry = self.entry(scan_id)?;
        load_volume(&self.root.join(&entry.volume_path))
    }

    pub fn load_annotation(&self, scan_id: &str) -> Result<Annotation> {
        let entry = self.entry(scan_id)?;
        let rel = entry
            .annotation_path
            .as_ref()
            .ok_or_else(|| Error::MissingAnnotation(scan_id.to_string()))?;
        load_annotation(&self.root.join(rel))
    }

    /// Scan ids of entries that carry an annotation.
    pub fn annotated_ids(&self) -> Vec<String> {
        self.index
            .entries
            .iter()
            .filter(|e| e.annotation_path.is_some())
            .map(|e| e.scan_id.clone())
            .collect()
    }

    /// Load a labelled scan (volume + annotation) for training.
    pub fn load_labelled(&self, scan_id: &str) -> Result<LabelledScan> {
        let volume = Arc::new(self.load_volume(scan_id)?);
        let annotation = self.load_annotation(scan_id)?;
        if !annotation.gt_box.fits(volume.dims()) {
            return Err(Error::config(format!(
                "annotation box for {scan_id:?} lies outside the volume"
            )));
        }
        Ok(LabelledScan { scan_id: scan_id.to_string(), volume, annotation })
    }
}

/// Write `index.json` for a dataset directory.
pub fn save_index(root: &Path, index: &DatasetIndex) -> Result<()> {
    index.validate()?;
    let path = root.join("index.json");
    let json = serde_json::to_string_pretty(index).expect("index serializes");
    fs::write(&path, json).map_err(|e| Error::io(path, e))
}

/// A scan with ground truth, ready for training or evaluation.
#[derive(Clone)]
pub struct LabelledScan {
    pub scan_id: String,
    pub volume: Arc<Volume>,
    pub annotation: Annotation,
}

/// A scan without ground truth; all the self-training loop may see of an
/// unlabelled sample.
#[derive(Clone)]
pub struct UnlabelledScan {
    pub scan_id: String,
    pub volume: Arc<Volume>,
}
