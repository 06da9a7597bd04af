//! On-disk formats. CSV for traces, matrices and rankings; JSON for
//! everything structured. All writes go to a temporary file first and are
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::{Axis, AxisChannel, Sensor};
use crate::datagen::{Sample, SensorTrace};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::eval::WindowRecord;
use crate::features::FeatureCatalog;
use crate::hierarchy::{HierarchicalModel, HierarchyConfig, TaskModel, BUNDLE_VERSION};
use crate::mode::{ModeLabel, ModePair, NUM_PAIRS};
use crate::seed::fnv1a_bytes;
use crate::selection::{FeatureSubset, ImportanceRanking, TaskId};

pub const TRACE_MANIFEST: &str = "manifest.json";
pub const BUNDLE_MANIFEST: &str = "bundle.json";

/// Hex FNV-1a of the compact JSON encoding of `value`.
pub fn fingerprint<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("value serializes");
    format!("{:016x}", fnv1a_bytes(&json))
}

/// Writes `bytes` next to `path` and renames over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::input(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::format(path, e.to_string()))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}

/// A structured artifact tagged with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub fingerprint: String,
    pub config: serde_json::Value,
    pub content: T,
}

impl<T> Stamped<T> {
    pub fn new<C: Serialize>(config: &C, content: T) -> Stamped<T> {
        Stamped {
            fingerprint: fingerprint(config),
            config: serde_json::to_value(config).expect("config serializes"),
            content,
        }
    }
}

fn csv_bytes(fingerprint: Option<&str>, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    if let Some(fp) = fingerprint {
        writeln!(out, "# fingerprint: {fp}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::input(e.to_string()))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f))
}

/// The `# fingerprint: ...` line of a CSV artifact, if any.
pub fn csv_fingerprint(path: &Path) -> Result<Option<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# fingerprint: "))
        .map(str::to_owned))
}

fn parse_f64(path: &Path, line: u64, field: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("line {line}: field `{field}` is not a number: `{s}`")))
}

fn header_of(path: &Path, r: &mut csv::Reader<fs::File>) -> Result<Vec<String>> {
    Ok(r
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect())
}

/// One trace as `timestamp,sensor,axis,value`, channel by channel.
pub fn write_trace_csv(path: &Path, trace: &SensorTrace, fingerprint: Option<&str>) -> Result<()> {
    let header = ["timestamp", "sensor", "axis", "value"].map(String::from);
    let rows = AxisChannel::all().into_iter().flat_map(|ch| {
        trace.channel(ch).iter().map(move |s| {
            vec![
                s.t.to_string(),
                ch.sensor.name().to_string(),
                ch.axis.name().to_string(),
                s.v.to_string(),
            ]
        })
    });
    write_atomic(path, &csv_bytes(fingerprint, &header, rows)?)
}

pub fn read_trace_csv(path: &Path, mode: ModeLabel) -> Result<SensorTrace> {
    let mut r = csv_reader(path)?;
    let header = header_of(path, &mut r)?;
    if header != ["timestamp", "sensor", "axis", "value"] {
        return Err(Error::format(
            path,
            format!("expected header timestamp,sensor,axis,value, found {}", header.join(",")),
        ));
    }
    let mut channels = vec![Vec::new(); AxisChannel::all().len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let sensor: Sensor = rec[1]
            .parse()
            .map_err(|e: Error| Error::format(path, format!("line {line}: {e}")))?;
        let axis: Axis = rec[2]
            .parse()
            .map_err(|e: Error| Error::format(path, format!("line {line}: {e}")))?;
        let t = parse_f64(path, line, "timestamp", &rec[0])?;
        let v = parse_f64(path, line, "value", &rec[3])?;
        channels[AxisChannel { sensor, axis }.index()].push(Sample { t, v });
    }
    let trace = SensorTrace { mode, channels };
    trace
        .validate()
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub file: String,
    pub mode: ModeLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceManifest {
    pub fingerprint: String,
    pub config: serde_json::Value,
    pub files: Vec<TraceFile>,
}

/// `trace_<mode>.csv`, or `trace_<mode>_<n>.csv` when a mode has several.
pub fn trace_file_names(traces: &[SensorTrace]) -> Vec<String> {
    traces
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let same = traces.iter().filter(|o| o.mode == t.mode).count();
            if same == 1 {
                format!("trace_{}.csv", t.mode)
            } else {
                let n = traces[..i].iter().filter(|o| o.mode == t.mode).count();
                format!("trace_{}_{n:02}.csv", t.mode)
            }
        })
        .collect()
}

/// One CSV per trace plus `manifest.json`.
pub fn write_traces<C: Serialize>(dir: &Path, traces: &[SensorTrace], config: &C) -> Result<TraceManifest> {
    fs::create_dir_all(dir)?;
    let fp = fingerprint(config);
    let mut files = Vec::new();
    for (trace, name) in traces.iter().zip(trace_file_names(traces)) {
        write_trace_csv(&dir.join(&name), trace, Some(&fp))?;
        files.push(TraceFile {
            file: name,
            mode: trace.mode,
        });
    }
    let manifest = TraceManifest {
        fingerprint: fp,
        config: serde_json::to_value(config)?,
        files,
    };
    write_json(&dir.join(TRACE_MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn read_traces(dir: &Path) -> Result<(TraceManifest, Vec<SensorTrace>)> {
    let manifest: TraceManifest = read_json(&dir.join(TRACE_MANIFEST))?;
    let traces = manifest
        .files
        .iter()
        .map(|f| read_trace_csv(&dir.join(&f.file), f.mode))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, traces))
}

/// `mode,trace,<feature names...>`, one row per window.
pub fn write_matrix_csv(
    path: &Path,
    matrix: &FeatureMatrix,
    catalog: &FeatureCatalog,
    fingerprint: Option<&str>,
) -> Result<()> {
    matrix.validate()?;
    let mut header = vec!["mode".to_string(), "trace".to_string()];
    header.extend(matrix.feature_ids.iter().map(|&id| catalog.name(id)));
    let rows = matrix
        .rows
        .iter()
        .zip(&matrix.labels)
        .zip(&matrix.groups)
        .map(|((row, mode), g)| {
            let mut r = vec![mode.to_string(), g.to_string()];
            r.extend(row.iter().map(f64::to_string));
            r
        });
    write_atomic(path, &csv_bytes(fingerprint, &header, rows)?)
}

pub fn read_matrix_csv(path: &Path, catalog: &FeatureCatalog) -> Result<FeatureMatrix> {
    let mut r = csv_reader(path)?;
    let header = header_of(path, &mut r)?;
    if header.len() < 3 || header[0] != "mode" || header[1] != "trace" {
        return Err(Error::format(
            path,
            "expected header `mode,trace,<feature names>`",
        ));
    }
    let feature_ids = header[2..]
        .iter()
        .map(|name| {
            catalog
                .id_by_name(name)
                .ok_or_else(|| Error::format(path, format!("unknown feature column `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = FeatureMatrix {
        feature_ids,
        rows: Vec::new(),
        labels: Vec::new(),
        groups: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::format(
                path,
                format!("line {line}: {} fields, header has {}", rec.len(), header.len()),
            ));
        }
        let mode: ModeLabel = rec[0]
            .parse()
            .map_err(|e: Error| Error::format(path, format!("line {line}: {e}")))?;
        let group: usize = rec[1]
            .parse()
            .map_err(|_| Error::format(path, format!("line {line}: bad trace index `{}`", &rec[1])))?;
        let row = (2..rec.len())
            .map(|i| parse_f64(path, line, &header[i], &rec[i]))
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(
                path,
                format!("line {line}: field `{}` is not finite", header[i + 2]),
            ));
        }
        m.rows.push(row);
        m.labels.push(mode);
        m.groups.push(group);
    }
    Ok(m)
}

/// `task,feature_id,feature_name,score` for every ranking, ids in ranking order.
pub fn write_rankings_csv(
    path: &Path,
    rankings: &[ImportanceRanking],
    catalog: &FeatureCatalog,
    fingerprint: Option<&str>,
) -> Result<()> {
    let header = ["task", "feature_id", "feature_name", "score"].map(String::from);
    let rows = rankings.iter().flat_map(|rk| {
        rk.feature_ids.iter().zip(&rk.scores).map(move |(&id, &s)| {
            vec![rk.task.to_string(), id.to_string(), catalog.name(id), s.to_string()]
        })
    });
    write_atomic(path, &csv_bytes(fingerprint, &header, rows)?)
}

pub fn read_rankings_csv(path: &Path) -> Result<Vec<ImportanceRanking>> {
    let mut r = csv_reader(path)?;
    let header = header_of(path, &mut r)?;
    if header != ["task", "feature_id", "feature_name", "score"] {
        return Err(Error::format(path, "expected header task,feature_id,feature_name,score"));
    }
    let mut out: Vec<ImportanceRanking> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let task: TaskId = rec[0]
            .parse()
            .map_err(|e: Error| Error::format(path, format!("line {line}: {e}")))?;
        let id: usize = rec[1]
            .parse()
            .map_err(|_| Error::format(path, format!("line {line}: bad feature id `{}`", &rec[1])))?;
        let score = parse_f64(path, line, "score", &rec[3])?;
        match out.last_mut() {
            Some(rk) if rk.task == task => {
                rk.feature_ids.push(id);
                rk.scores.push(score);
            }
            _ => out.push(ImportanceRanking {
                task,
                feature_ids: vec![id],
                scores: vec![score],
            }),
        }
    }
    Ok(out)
}

/// `row,fold,truth,top1,top2,predicted` per evaluated window.
pub fn write_records_csv(path: &Path, records: &[WindowRecord], fingerprint: Option<&str>) -> Result<()> {
    let header = ["row", "fold", "truth", "top1", "top2", "predicted"].map(String::from);
    let rows = records.iter().map(|r| {
        vec![
            r.row.to_string(),
            r.fold.to_string(),
            r.truth.to_string(),
            r.top1.to_string(),
            r.top2.to_string(),
            r.predicted.to_string(),
        ]
    });
    write_atomic(path, &csv_bytes(fingerprint, &header, rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub version: u32,
    pub fingerprint: String,
    pub config: serde_json::Value,
    pub hierarchy: HierarchyConfig,
    pub feature_ids: Vec<usize>,
    pub balance_c: f64,
    pub first_layer: String,
    /// Pair specialist files in pair-index order.
    pub pairs: Vec<String>,
    pub subsets: String,
}

fn pair_file(p: ModePair) -> String {
    format!("pair_{p}.json")
}

/// A directory with `bundle.json`, one JSON per task model and `subsets.json`.
pub fn write_bundle<C: Serialize>(dir: &Path, model: &HierarchicalModel, config: &C) -> Result<()> {
    fs::create_dir_all(dir)?;
    let fp = fingerprint(config);
    write_json(&dir.join("first_layer.json"), &model.first)?;
    let mut pairs = Vec::with_capacity(NUM_PAIRS);
    for p in ModePair::all() {
        let name = pair_file(p);
        write_json(&dir.join(&name), model.pair_model(p))?;
        pairs.push(name);
    }
    let subsets: Vec<&FeatureSubset> = std::iter::once(&model.first.subset)
        .chain(model.pairs.iter().map(|m| &m.subset))
        .collect();
    write_json(
        &dir.join("subsets.json"),
        &Stamped::new(config, subsets),
    )?;
    write_json(
        &dir.join(BUNDLE_MANIFEST),
        &BundleManifest {
            version: model.version,
            fingerprint: fp,
            config: serde_json::to_value(config)?,
            hierarchy: model.config.clone(),
            feature_ids: model.feature_ids.clone(),
            balance_c: model.balance_c,
            first_layer: "first_layer.json".into(),
            pairs,
            subsets: "subsets.json".into(),
        },
    )
}

pub fn read_bundle(dir: &Path) -> Result<(BundleManifest, HierarchicalModel)> {
    let path = dir.join(BUNDLE_MANIFEST);
    let manifest: BundleManifest = read_json(&path)?;
    if manifest.version != BUNDLE_VERSION {
        return Err(Error::format(
            &path,
            format!(
                "bundle version {} is not supported (expected {BUNDLE_VERSION})",
                manifest.version
            ),
        ));
    }
    if manifest.pairs.len() != NUM_PAIRS {
        return Err(Error::format(
            &path,
            format!("expected {NUM_PAIRS} pair models, found {}", manifest.pairs.len()),
        ));
    }
    let load = |name: &str, task: TaskId| -> Result<TaskModel> {
        let p: PathBuf = dir.join(name);
        let m: TaskModel = read_json(&p)?;
        if m.task != task {
            return Err(Error::format(&p, format!("holds task {}, expected {task}", m.task)));
        }
        Ok(m)
    };
    let first = load(&manifest.first_layer, TaskId::AllModes)?;
    let pairs = ModePair::all()
        .into_iter()
        .zip(&manifest.pairs)
        .map(|(p, name)| load(name, TaskId::Pair(p)))
        .collect::<Result<Vec<_>>>()?;
    let model = HierarchicalModel {
        version: manifest.version,
        feature_ids: manifest.feature_ids.clone(),
        config: manifest.hierarchy.clone(),
        first,
        pairs,
        balance_c: manifest.balance_c,
    };
    Ok((manifest, model))
}
