use std::fmt::Write as _;
use std::path::Path;

use modesense_core::datagen::generate_dataset;
use modesense_core::dataset::{extract_matrix, FeatureMatrix};
use modesense_core::eval::{
    confusion_table, cross_validate, data_fingerprint, domain_matrix, fold_table, sweep as run_sweep,
    sweep_table, CvConfig, SweepAxis,
};
use modesense_core::features::{FeatureCatalog, FeatureConfig, FeatureDomain};
use modesense_core::hierarchy::{
    collect_benefit_outcomes, estimate_benefit, rank_task, train_hierarchy, BetaPrior,
    HierarchyConfig,
};
use modesense_core::io::{
    read_bundle, read_matrix_csv, read_traces, write_atomic, write_bundle, write_json,
    write_matrix_csv, write_rankings_csv, write_records_csv, Stamped,
};
use modesense_core::selection::{select_top_k, TaskId};
use modesense_core::Error;
use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

type Outcome = Result<(), Failure>;

fn load_matrix(path: &Path, domain: FeatureDomain) -> Result<(String, FeatureMatrix), Error> {
    let full = read_matrix_csv(path, &FeatureCatalog::standard())?;
    let source = data_fingerprint(&full);
    let m = domain_matrix(&full, domain).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Format {
            path: path.to_path_buf(),
            message: msg,
        },
        e => e,
    })?;
    Ok((source, m))
}

pub fn generate(cfg: &RunConfig, out: &Path) -> Outcome {
    let traces = generate_dataset(&cfg.gen)?;
    let manifest = modesense_core::io::write_traces(out, &traces, &cfg.gen)?;
    println!(
        "wrote {} traces to {} (fingerprint {})",
        manifest.files.len(),
        out.display(),
        manifest.fingerprint
    );
    Ok(())
}

#[derive(Serialize)]
struct ExtractStamp<'a> {
    source: &'a str,
    domain: FeatureDomain,
    features: FeatureConfig,
}

pub fn extract(cfg: &RunConfig, traces_dir: &Path, out: &Path) -> Outcome {
    let (manifest, traces) = read_traces(traces_dir)?;
    let catalog = FeatureCatalog::standard();
    let m = extract_matrix(&traces, &catalog, cfg.cv.domain, cfg.features)?;
    let stamp = ExtractStamp {
        source: &manifest.fingerprint,
        domain: cfg.cv.domain,
        features: cfg.features,
    };
    let fp = modesense_core::io::fingerprint(&stamp);
    write_matrix_csv(out, &m, &catalog, Some(&fp))?;
    println!(
        "wrote {} windows x {} features to {}",
        m.len(),
        m.n_features(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SelectStamp<'a> {
    source: &'a str,
    domain: FeatureDomain,
    ranking_trees: usize,
    subset_size: usize,
    seed: u64,
}

pub fn select(cfg: &RunConfig, matrix: &Path, out: &Path) -> Outcome {
    let (source, m) = load_matrix(matrix, cfg.cv.domain)?;
    let rows: Vec<usize> = (0..m.len()).collect();
    let stamp = SelectStamp {
        source: &source,
        domain: cfg.cv.domain,
        ranking_trees: cfg.cv.ranking_trees,
        subset_size: cfg.cv.subset_size,
        seed: cfg.cv.seed,
    };
    let mut rankings = Vec::new();
    let mut subsets = Vec::new();
    for task in TaskId::all() {
        let r = rank_task(&m, &rows, task, cfg.cv.ranking_trees, cfg.cv.seed)?;
        subsets.push(select_top_k(&r, cfg.cv.subset_size.min(r.feature_ids.len()))?);
        rankings.push(r);
    }
    let catalog = FeatureCatalog::standard();
    let fp = modesense_core::io::fingerprint(&stamp);
    std::fs::create_dir_all(out).map_err(Error::from)?;
    write_rankings_csv(&out.join("rankings.csv"), &rankings, &catalog, Some(&fp))?;
    write_json(&out.join("subsets.json"), &Stamped::new(&stamp, subsets))?;
    println!("wrote rankings and subsets for {} tasks to {}", rankings.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct TrainStamp<'a> {
    source: &'a str,
    domain: FeatureDomain,
    hierarchy: HierarchyConfig,
    seed: u64,
}

pub fn train(cfg: &RunConfig, matrix: &Path, out: &Path) -> Outcome {
    let (source, m) = load_matrix(matrix, cfg.cv.domain)?;
    let rows: Vec<usize> = (0..m.len()).collect();
    let stamp = TrainStamp {
        source: &source,
        domain: cfg.cv.domain,
        hierarchy: cfg.cv.hierarchy(),
        seed: cfg.cv.seed,
    };
    let model = train_hierarchy(&m, &rows, &stamp.hierarchy, cfg.cv.seed)?;
    write_bundle(out, &model, &stamp)?;
    println!("wrote model bundle to {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalStamp<'a> {
    source: &'a str,
    cv: &'a CvConfig,
}

pub fn evaluate(
    cfg: &RunConfig,
    matrix: &Path,
    out: &Path,
    table: Option<&Path>,
    records: Option<&Path>,
) -> Outcome {
    let (source, m) = load_matrix(matrix, cfg.cv.domain)?;
    let report = cross_validate(&m, &cfg.cv)?;
    let stamp = EvalStamp {
        source: &source,
        cv: &cfg.cv,
    };
    let stamped = Stamped::new(&stamp, report);
    let report = &stamped.content;
    let mut text = format!(
        "{} {} on {} features (fingerprint {})\n\n",
        report.config.framework.name(),
        report.config.algorithm.name(),
        report.config.domain.name(),
        stamped.fingerprint
    );
    text.push_str(&fold_table(report));
    text.push('\n');
    text.push_str(&confusion_table(&report.confusion));
    if let Some(first) = &report.first_layer {
        let _ = write!(
            text,
            "\nfirst layer alone: {:.2}%\n",
            first.mean_accuracy
        );
    }
    write_json(out, &stamped)?;
    if let Some(path) = table {
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = records {
        write_records_csv(path, &report.records, Some(&stamped.fingerprint))?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct SweepStamp<'a> {
    source: &'a str,
    cv: &'a CvConfig,
    axis: SweepAxis,
    values: &'a [usize],
}

pub fn sweep(cfg: &RunConfig, matrix: &Path, out: &Path, csv: Option<&Path>) -> Outcome {
    let axis = cfg
        .axis
        .ok_or_else(|| Failure::Usage("sweep needs an axis (--axis or axis=...)".into()))?;
    let values = cfg.sweep_values();
    let (source, m) = load_matrix(matrix, cfg.cv.domain)?;
    let result = run_sweep(&m, axis, &values, &cfg.cv).map_err(|e| match e {
        Error::InvalidInput(msg) if msg.starts_with("sweep axis") => Failure::Usage(msg),
        e => Failure::Core(e),
    })?;
    let stamp = SweepStamp {
        source: &source,
        cv: &cfg.cv,
        axis,
        values: &values,
    };
    let stamped = Stamped::new(&stamp, result);
    write_json(out, &stamped)?;
    if let Some(path) = csv {
        let mut s = format!("{},mean_accuracy", axis.name());
        for f in 1..=cfg.cv.k {
            let _ = write!(s, ",fold_{f}");
        }
        s.push('\n');
        for p in &stamped.content.points {
            let _ = write!(s, "{},{}", p.value, p.report.mean_accuracy);
            for a in &p.report.fold_accuracies {
                let _ = write!(s, ",{a}");
            }
            s.push('\n');
        }
        write_atomic(path, format!("# fingerprint: {}\n{s}", stamped.fingerprint).as_bytes())?;
    }
    print!("{}", sweep_table(&stamped.content));
    Ok(())
}

#[derive(Serialize)]
struct BenefitStamp<'a> {
    model: &'a str,
    source: &'a str,
    prior: BetaPrior,
}

pub fn benefit(cfg: &RunConfig, model_dir: &Path, matrix: &Path, out: &Path) -> Outcome {
    let (manifest, model) = read_bundle(model_dir)?;
    let full = read_matrix_csv(matrix, &FeatureCatalog::standard())?;
    let source = data_fingerprint(&full);
    let positions = full.positions(&model.feature_ids).map_err(|e| Error::Format {
        path: matrix.to_path_buf(),
        message: format!("does not match the model's feature columns: {e}"),
    })?;
    let aligned = FeatureMatrix {
        feature_ids: model.feature_ids.clone(),
        rows: full
            .rows
            .iter()
            .map(|r| positions.iter().map(|&p| r[p]).collect())
            .collect(),
        labels: full.labels.clone(),
        groups: full.groups.clone(),
    };
    let rows: Vec<usize> = (0..aligned.len()).collect();
    let outcomes = collect_benefit_outcomes(&model, &aligned, &rows)?;
    let estimate = estimate_benefit(&outcomes, cfg.prior)?;
    let stamp = BenefitStamp {
        model: &manifest.fingerprint,
        source: &source,
        prior: cfg.prior,
    };
    write_json(out, &Stamped::new(&stamp, &estimate))?;
    println!(
        "P1 = {:.4}  Delta = {:.4}  threshold = {:.4}  beneficial = {}",
        estimate.p1, estimate.delta, estimate.threshold, estimate.beneficial
    );
    Ok(())
}
