//! File-backed workspace: validated inputs plus a mined-pattern snapshot.
//!
//! ```text
//! <root>/
//!   manifest.json          granularity, schema, input digests, counts
//!   taxonomy.csv
//!   transactions.csv
//!   catalog.csv
//!   sizing/<class>.csv     one chart per garment class
//!   cascades/*.cascade
//!   snapshot.json          mined patterns and the fingerprint they came from
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rsos_core::gim::{mine_frequent, render_pattern_report, FrequentItemset, MinerConfig, MiningMode};
use rsos_core::higen::{extract_higens, render_higen_report, Higen, HigenError, RenderOptions};
use rsos_core::recommender::{load_catalog, load_sizing, CatalogEntry, GarmentClass, PatternModel, SizingRecord};
use rsos_core::taxonomy::Taxonomy;
use rsos_core::transactions::{load_periods, Granularity, PeriodSequence};
use rsos_core::vision::CascadeClassifier;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::PlatformError;

pub const MANIFEST: &str = "manifest.json";
pub const SNAPSHOT: &str = "snapshot.json";
pub const TAXONOMY: &str = "taxonomy.csv";
pub const TRANSACTIONS: &str = "transactions.csv";
pub const CATALOG: &str = "catalog.csv";
pub const SIZING_DIR: &str = "sizing";
pub const CASCADE_DIR: &str = "cascades";

/// Files whose digests a snapshot depends on.
const MINING_INPUTS: [&str; 2] = [TAXONOMY, TRANSACTIONS];

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<Vec<u8>, PlatformError> {
    fs::read(path).map_err(|source| PlatformError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PlatformError> {
    let io_err = |source: io::Error| PlatformError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn invalid(file: impl Into<String>, err: impl fmt::Display) -> PlatformError {
    PlatformError::Invalid {
        file: file.into(),
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub granularity: Granularity,
    pub schema: Vec<String>,
    /// Relative path -> sha256 of every stored input file.
    pub digests: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub min_sup: usize,
    pub attributes: Vec<String>,
    pub mode: MiningMode,
    pub max_itemset_size: Option<usize>,
    pub granularity: Granularity,
    pub inputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub fingerprint: Fingerprint,
    pub periods: Vec<String>,
    pub frequent: Vec<FrequentItemset>,
    pub higens: Vec<Higen>,
}

impl Snapshot {
    pub fn config(&self) -> MinerConfig {
        MinerConfig {
            min_sup: self.fingerprint.min_sup,
            attributes: self.fingerprint.attributes.clone(),
            max_itemset_size: self.fingerprint.max_itemset_size,
            mode: self.fingerprint.mode,
        }
    }

    /// One line per frequent itemset, grouped by period.
    pub fn pattern_report(&self) -> String {
        render_pattern_report(&self.frequent, &self.config().display_order())
    }

    /// One line per HIGEN, references marked.
    pub fn higen_report(&self, ascii: bool) -> String {
        let opts = RenderOptions {
            ascii,
            ..RenderOptions::report(self.config().display_order())
        };
        render_higen_report(&self.higens, &opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotStatus {
    Missing,
    Fresh,
    Stale,
}

impl fmt::Display for SnapshotStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnapshotStatus::Missing => "missing",
            SnapshotStatus::Fresh => "fresh",
            SnapshotStatus::Stale => "stale",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub transactions: usize,
    pub periods: usize,
    pub taxonomy_edges: usize,
    pub sizing_records: usize,
    pub catalog_entries: usize,
    pub cascades: usize,
    pub snapshot: SnapshotStatus,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "transactions: {}", self.transactions)?;
        writeln!(f, "periods: {}", self.periods)?;
        writeln!(f, "taxonomy edges: {}", self.taxonomy_edges)?;
        writeln!(f, "sizing records: {}", self.sizing_records)?;
        writeln!(f, "catalog entries: {}", self.catalog_entries)?;
        writeln!(f, "cascades: {}", self.cascades)?;
        write!(f, "snapshot: {}", self.snapshot)
    }
}

/// Everything the recommender and detector need, parsed.
#[derive(Debug)]
pub struct Inputs {
    pub periods: PeriodSequence,
    pub taxonomy: Taxonomy,
    pub catalog: Vec<CatalogEntry>,
    pub sizing: BTreeMap<GarmentClass, Vec<SizingRecord>>,
    pub cascades: BTreeMap<String, CascadeClassifier>,
}

/// Raw file contents keyed by workspace-relative path, plus what they parse to.
struct Validated {
    files: BTreeMap<String, Vec<u8>>,
    inputs: Inputs,
    edges: usize,
}

fn validate(files: BTreeMap<String, Vec<u8>>, granularity: Granularity) -> Result<Validated, PlatformError> {
    let text = |name: &str| -> Result<&str, PlatformError> {
        let bytes = files.get(name).ok_or_else(|| invalid(name, "file is missing"))?;
        std::str::from_utf8(bytes).map_err(|_| invalid(name, "not valid UTF-8"))
    };
    let periods = load_periods(text(TRANSACTIONS)?, &[], granularity).map_err(|e| invalid(TRANSACTIONS, e))?;
    let mut taxonomy = Taxonomy::parse(text(TAXONOMY)?, Some(&periods.schema)).map_err(|e| invalid(TAXONOMY, e))?;
    periods
        .register_domain(&mut taxonomy)
        .map_err(|e| invalid(TRANSACTIONS, e))?;
    let edges = taxonomy.edge_count();
    let catalog = load_catalog(text(CATALOG)?).map_err(|e| invalid(CATALOG, e))?;

    let mut sizing = BTreeMap::new();
    let mut cascades = BTreeMap::new();
    for name in files.keys() {
        if let Some(stem) = name.strip_prefix("sizing/").and_then(|n| n.strip_suffix(".csv")) {
            let class: GarmentClass = stem.parse().map_err(|e| invalid(name.as_str(), e))?;
            sizing.insert(
                class,
                load_sizing(text(name)?, class).map_err(|e| invalid(name.as_str(), e))?,
            );
        } else if let Some(stem) = name.strip_prefix("cascades/").and_then(|n| n.strip_suffix(".cascade")) {
            let cascade = CascadeClassifier::parse(text(name)?).map_err(|e| invalid(name.as_str(), e))?;
            cascades.insert(stem.to_string(), cascade);
        }
    }
    for entry in &catalog {
        if !sizing.contains_key(&entry.garment_class) {
            return Err(invalid(
                CATALOG,
                format!("{} needs a {} size chart", entry.outfit_id, entry.garment_class),
            ));
        }
    }
    Ok(Validated {
        files,
        inputs: Inputs {
            periods,
            taxonomy,
            catalog,
            sizing,
            cascades,
        },
        edges,
    })
}

/// Reads the input files of a source directory (same layout as a workspace).
fn collect_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, PlatformError> {
    let mut files = BTreeMap::new();
    for name in [TAXONOMY, TRANSACTIONS, CATALOG] {
        let path = dir.join(name);
        if path.exists() {
            files.insert(name.to_string(), read(&path)?);
        }
    }
    for (sub, ext) in [(SIZING_DIR, "csv"), (CASCADE_DIR, "cascade")] {
        let path = dir.join(sub);
        if !path.is_dir() {
            continue;
        }
        let entries = fs::read_dir(&path).map_err(|source| PlatformError::Io {
            path: path.clone(),
            source,
        })?;
        for entry in entries {
            let entry = entry.map_err(|source| PlatformError::Io {
                path: path.clone(),
                source,
            })?;
            let p = entry.path();
            if p.extension().is_some_and(|e| e == ext) {
                let name = format!("{sub}/{}", entry.file_name().to_string_lossy());
                files.insert(name, read(&p)?);
            }
        }
    }
    Ok(files)
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Validates every file under `source` and only then copies them in.
    /// Files of the previous ingest that are no longer present are removed.
    pub fn ingest(&self, source: &Path, granularity: Granularity) -> Result<LoadReport, PlatformError> {
        if !source.is_dir() {
            return Err(PlatformError::Io {
                path: source.to_path_buf(),
                source: io::Error::new(io::ErrorKind::NotFound, "source directory not found"),
            });
        }
        let validated = validate(collect_files(source)?, granularity)?;
        let manifest = Manifest {
            granularity,
            schema: validated.inputs.periods.schema.clone(),
            digests: validated.files.iter().map(|(k, v)| (k.clone(), digest(v))).collect(),
        };

        if let Ok(old) = self.manifest() {
            for name in old.digests.keys().filter(|k| !manifest.digests.contains_key(*k)) {
                let _ = fs::remove_file(self.path(name));
            }
        }
        for (name, bytes) in &validated.files {
            write_atomic(&self.path(name), bytes)?;
        }
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        write_atomic(&self.path(MANIFEST), &json)?;

        let inputs = &validated.inputs;
        Ok(LoadReport {
            transactions: inputs.periods.transaction_count(),
            periods: inputs.periods.len(),
            taxonomy_edges: validated.edges,
            sizing_records: inputs.sizing.values().map(Vec::len).sum(),
            catalog_entries: inputs.catalog.len(),
            cascades: inputs.cascades.len(),
            snapshot: self.snapshot_status()?,
        })
    }

    pub fn manifest(&self) -> Result<Manifest, PlatformError> {
        let path = self.path(MANIFEST);
        if !path.exists() {
            return Err(PlatformError::NotIngested(self.root.clone()));
        }
        serde_json::from_slice(&read(&path)?).map_err(|e| invalid(MANIFEST, e))
    }

    /// Parses the stored inputs, checking them against the manifest.
    pub fn load(&self) -> Result<Inputs, PlatformError> {
        let manifest = self.manifest()?;
        let mut files = BTreeMap::new();
        for (name, want) in &manifest.digests {
            let bytes = read(&self.path(name))?;
            if &digest(&bytes) != want {
                return Err(PlatformError::StaleInput(name.clone()));
            }
            files.insert(name.clone(), bytes);
        }
        Ok(validate(files, manifest.granularity)?.inputs)
    }

    fn mining_digests(manifest: &Manifest) -> BTreeMap<String, String> {
        MINING_INPUTS
            .iter()
            .filter_map(|n| manifest.digests.get(*n).map(|d| (n.to_string(), d.clone())))
            .collect()
    }

    /// Mines every period and the HIGENs across them, then stores the
    /// result. Inputs changed on disk since ingest are rejected.
    pub fn snapshot_mine(&self, cfg: &MinerConfig) -> Result<Snapshot, PlatformError> {
        cfg.validate().map_err(|e| PlatformError::Config(e.to_string()))?;
        let manifest = self.manifest()?;
        for attr in &cfg.attributes {
            if !manifest.schema.contains(attr) {
                return Err(PlatformError::Config(format!(
                    "unknown attribute `{attr}`; the log has {}",
                    manifest.schema.join(", ")
                )));
            }
        }
        let inputs = self.load()?;
        let mut frequent = Vec::new();
        for period in &inputs.periods.periods {
            frequent.extend(
                mine_frequent(period, &inputs.taxonomy, cfg).map_err(|e| PlatformError::Config(e.to_string()))?,
            );
        }
        let higens = match extract_higens(&inputs.periods, &inputs.taxonomy, cfg) {
            Ok(h) => h,
            Err(HigenError::TooFewPeriods(_)) => Vec::new(),
            Err(e) => return Err(PlatformError::Config(e.to_string())),
        };
        let snapshot = Snapshot {
            fingerprint: Fingerprint {
                min_sup: cfg.min_sup,
                attributes: cfg.attributes.clone(),
                mode: cfg.mode,
                max_itemset_size: cfg.max_itemset_size,
                granularity: manifest.granularity,
                inputs: Self::mining_digests(&manifest),
            },
            periods: inputs.periods.periods.iter().map(|p| p.period_id.clone()).collect(),
            frequent,
            higens,
        };
        // a concurrent ingest would have changed the manifest under us
        if self.manifest()? != manifest {
            return Err(PlatformError::StaleInput(MANIFEST.into()));
        }
        let json = serde_json::to_vec_pretty(&snapshot).expect("snapshot serializes");
        write_atomic(&self.path(SNAPSHOT), &json)?;
        Ok(snapshot)
    }

    pub fn snapshot(&self) -> Result<Option<Snapshot>, PlatformError> {
        let path = self.path(SNAPSHOT);
        if !path.exists() {
            return Ok(None);
        }
        serde_json::from_slice(&read(&path)?)
            .map(Some)
            .map_err(|e| invalid(SNAPSHOT, e))
    }

    pub fn snapshot_status(&self) -> Result<SnapshotStatus, PlatformError> {
        let Some(snapshot) = self.snapshot()? else {
            return Ok(SnapshotStatus::Missing);
        };
        let manifest = self.manifest()?;
        let fresh = snapshot.fingerprint.granularity == manifest.granularity
            && snapshot.fingerprint.inputs == Self::mining_digests(&manifest);
        Ok(if fresh {
            SnapshotStatus::Fresh
        } else {
            SnapshotStatus::Stale
        })
    }
}

/// Parsed inputs, the snapshot and a scoring model built from them.
#[derive(Debug)]
pub struct Loaded {
    pub catalog: Vec<CatalogEntry>,
    pub sizing: BTreeMap<GarmentClass, Vec<SizingRecord>>,
    pub cascades: BTreeMap<String, CascadeClassifier>,
    pub snapshot: Snapshot,
    pub status: SnapshotStatus,
    pub model: PatternModel,
}

impl Workspace {
    /// Loads inputs and the snapshot; a stale snapshot is an error unless
    /// `allow_stale` is set.
    pub fn open(&self, allow_stale: bool) -> Result<Loaded, PlatformError> {
        let inputs = self.load()?;
        let snapshot = self.snapshot()?.ok_or(PlatformError::NoSnapshot)?;
        let status = self.snapshot_status()?;
        if status == SnapshotStatus::Stale && !allow_stale {
            return Err(PlatformError::StaleSnapshot);
        }
        let model = PatternModel::from_parts(
            inputs.periods,
            inputs.taxonomy,
            snapshot.config(),
            snapshot.higens.clone(),
        );
        Ok(Loaded {
            catalog: inputs.catalog,
            sizing: inputs.sizing,
            cascades: inputs.cascades,
            snapshot,
            status,
            model,
        })
    }
}
