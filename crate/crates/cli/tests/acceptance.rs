//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary
//! (`harness = false`) and exits non-zero if any criterion fails.
//!
//! `MODESENSE_ACCEPT_SECONDS` sets the per-mode duration of the end-to-end
//! dataset (default 1000 s, i.e. 1000 windows per mode).

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use modesense_core::classifiers::{knn_train, smo_solve, svm_train, Algorithm, ProbabilityVector, RbfKernel, SmoParams, SvmParams};
use modesense_core::datagen::{generate_dataset, GenSpec};
use modesense_core::dataset::{extract_matrix, FeatureMatrix};
use modesense_core::eval::{cross_validate, domain_matrix, fold_plan, train_fold, CvConfig, CvReport, Framework};
use modesense_core::features::{
    dft, dft_magnitudes, extract, time_features, FeatureCatalog, FeatureConfig, FeatureDomain, FeatureKind,
};
use modesense_core::hierarchy::{
    estimate_beta_posterior, framework_success, framework_success_via_errors, fuse, BenefitEstimate, BetaPrior,
};
use modesense_core::ModeLabel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;
const NULL_REPS: u64 = 5;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(n: u32, title: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let (pass, detail) = match result {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {}s budget", budget.as_secs())),
        Err(e) => (false, e),
    };
    println!(
        "criterion {n:>2} {}: {title}: {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    pass
}

fn feature_counts() -> Check {
    let catalog = FeatureCatalog::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = oracle::random_window(&mut rng);
    let config = FeatureConfig::default();
    let sizes: Vec<usize> = [FeatureDomain::Time, FeatureDomain::Freq, FeatureDomain::Pooled]
        .into_iter()
        .map(|d| extract(&w, &catalog, d, config).map(|v| v.values.len()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(sizes == [165, 180, 345] && catalog.len() == 345, || format!("sizes {sizes:?}"))?;
    Ok("165 time + 180 freq = 345 pooled".into())
}

fn dft_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_abs, mut worst_parseval) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x = oracle::random_series(&mut rng, 100);
        let fast = dft_magnitudes(&x).map_err(|e| e.to_string())?;
        for (a, b) in fast.iter().zip(oracle::naive_magnitudes(&x)) {
            worst_abs = worst_abs.max((a - b).abs());
        }
        let e_time: f64 = x.iter().map(|v| v * v).sum();
        let e_freq: f64 = dft(&x).map_err(|e| e.to_string())?.iter().map(|c| c.norm_sqr()).sum::<f64>() / 100.0;
        worst_parseval = worst_parseval.max((e_time - e_freq).abs() / e_time);
    }
    ensure(worst_abs <= 1e-9 && worst_parseval <= 1e-6, || {
        format!("max |diff| {worst_abs:.2e}, Parseval rel {worst_parseval:.2e}")
    })?;
    Ok(format!(
        "1000 windows, max |diff| {worst_abs:.2e}, Parseval rel {worst_parseval:.2e}"
    ))
}

fn time_oracle() -> Check {
    let catalog = FeatureCatalog::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let w = oracle::random_window(&mut rng);
        let fast = time_features(&w, &catalog).map_err(|e| e.to_string())?.0;
        for (d, v) in catalog.descriptors.iter().zip(&fast) {
            let FeatureKind::Measure(m) = d.kind else {
                return Err(format!("slot {} has no measure", d.id));
            };
            let expected = oracle::naive_measure(m, w.channel(d.channel.index()), w.dt);
            let e = oracle::rel_err(*v, expected);
            if e > 1e-9 {
                return Err(format!("{}: {v} vs {expected}", d.name()));
            }
            worst = worst.max(e);
        }
    }
    Ok(format!("1000 windows x 165 slots, max rel err {worst:.2e}"))
}

fn knn_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut queries = 0;
    for split in 0..50 {
        let n = rng.gen_range(50..=500);
        let dim = rng.gen_range(1..=3);
        let n_classes = rng.gen_range(2..=5);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(0..5) as f64).collect())
            .collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
        let cut = n * 4 / 5;
        let k = rng.gen_range(1..=12);
        let model = knn_train(&pts[..cut], &labels[..cut], n_classes, k).map_err(|e| e.to_string())?;
        for q in &pts[cut..] {
            let got = model.predict(q).map_err(|e| e.to_string())?;
            let want = ProbabilityVector(oracle::knn_scan(&pts[..cut], &labels[..cut], n_classes, k, q));
            ensure(got == want && got.argmax() == want.argmax(), || {
                format!("split {split}: {:?} vs {:?}", got.0, want.0)
            })?;
            queries += 1;
        }
    }
    Ok(format!("50 splits, {queries} queries identical to exhaustive scan"))
}

fn svm_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_balance = 0.0f64;
    for p in 0..20 {
        let n = rng.gen_range(20..80);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut y: Vec<f64> = x
            .iter()
            .map(|r| if r[0] * r[1] + rng.gen_range(-0.2..0.2) > 0.0 { 1.0 } else { -1.0 })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = rng.gen_range(0.5..20.0);
        let sol = smo_solve(
            &x,
            &y,
            RbfKernel { gamma: rng.gen_range(0.2..2.0) },
            &SmoParams {
                c,
                tol: 1e-3,
                max_iter: 1_000_000,
                record_every: 1,
            },
        )
        .map_err(|e| e.to_string())?;
        ensure(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)), || format!("problem {p}: alpha out of box"))?;
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        worst_balance = worst_balance.max(balance.abs());
        ensure(balance.abs() <= 1e-6, || format!("problem {p}: sum alpha y = {balance:e}"))?;
        let drop = sol
            .objective_trace
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(drop <= 1e-12, || format!("problem {p}: objective fell by {drop:e}"))?;
    }
    let xor = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let labels = [0, 0, 1, 1];
    let m = svm_train(&xor, &labels, 2, &SvmParams { gamma: Some(2.0), ..SvmParams::default() })
        .map_err(|e| e.to_string())?;
    for (r, &c) in xor.iter().zip(&labels) {
        let p = m.predict(r).map_err(|e| e.to_string())?;
        ensure(p.argmax() == c, || format!("XOR point {r:?} misclassified"))?;
    }
    Ok(format!("20 problems feasible, max |sum alpha y| {worst_balance:.1e}, objective monotone; XOR 4/4"))
}

fn fusion_arithmetic() -> Check {
    let out = fuse(ProbabilityVector(vec![0.40, 0.35, 0.1, 0.1, 0.05]), [0.2, 0.8]);
    ensure(out.mode == ModeLabel::Car && (out.posterior[1] - 7.0 / 9.0).abs() <= f64::EPSILON, || {
        format!("posterior {:?}, mode {}", out.posterior, out.mode)
    })?;
    let beta = estimate_beta_posterior(&[1, 1, 1, 1, 1, 1, 1, 1, 0, 0], BetaPrior::default()).map_err(|e| e.to_string())?;
    ensure(beta.mean == 0.75, || format!("Beta mean {}", beta.mean))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let p1 = rng.gen_range(0.0..1.0);
        let delta = rng.gen_range(0.0..1.0 - p1);
        let pk: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..1.0)).collect();
        let d = (framework_success(p1, delta, &pk, 0.1) - framework_success_via_errors(p1, delta, &pk, 0.1)).abs();
        worst = worst.max(d);
    }
    ensure(worst <= 1e-12, || format!("identity residual {worst:e}"))?;
    Ok(format!("posterior(j) = 7/9, Beta mean 0.75, identity residual {worst:.1e} over 1e5 draws"))
}

fn benefit_boundary() -> Check {
    let est = |p1, delta, pk: f64| BenefitEstimate::from_parameters(p1, delta, &[pk; 10], 0.1).map_err(|e| e.to_string());
    let a = est(0.9, 0.0, 1.0)?;
    let b = est(0.9, 0.05, 0.95)?;
    let c = est(0.9, 0.04, 0.95)?;
    ensure(a.threshold == 0.0 && !a.beneficial, || format!("Δ=0 case: {a:?}"))?;
    ensure((b.threshold - 0.04737).abs() < 5e-6 && b.beneficial, || format!("Δ=0.05 case: {b:?}"))?;
    ensure(!c.beneficial, || format!("Δ=0.04 case: {c:?}"))?;
    Ok(format!(
        "Δ=0 not beneficial; threshold {:.5}: Δ=0.05 beneficial, Δ=0.04 not",
        b.threshold
    ))
}

fn dataset(seconds: f64) -> Result<FeatureMatrix, String> {
    let spec = GenSpec {
        seed: SEED,
        ..GenSpec::default().with_duration(seconds)
    };
    let traces = generate_dataset(&spec).map_err(|e| e.to_string())?;
    extract_matrix(&traces, &FeatureCatalog::standard(), FeatureDomain::Pooled, FeatureConfig::default())
        .map_err(|e| e.to_string())
}

fn hierarchical(domain: FeatureDomain) -> CvConfig {
    CvConfig {
        framework: Framework::Hierarchical,
        algorithm: Algorithm::Rf,
        second_layer: Algorithm::Svm,
        domain,
        seed: SEED,
        ..CvConfig::default()
    }
}

fn ordering(m: &FeatureMatrix) -> Check {
    let cv = |d| cross_validate(m, &hierarchical(d)).map_err(|e| e.to_string());
    let pooled: CvReport = cv(FeatureDomain::Pooled)?;
    let time = cv(FeatureDomain::Time)?.mean_accuracy;
    let freq = cv(FeatureDomain::Freq)?.mean_accuracy;
    // the traditional RF is the first layer: same rows, ranking, subset, seed
    let traditional = pooled
        .first_layer
        .as_ref()
        .ok_or("no first-layer summary")?
        .mean_accuracy;
    let hier = pooled.mean_accuracy;
    let detail = format!(
        "{} windows/mode; hierarchical pooled {hier:.2}%, time {time:.2}%, freq {freq:.2}%, traditional pooled {traditional:.2}%",
        m.len() / 5
    );
    ensure(hier >= time - 0.5 && hier >= freq - 0.5 && hier >= traditional - 0.5, || detail.clone())?;
    Ok(detail)
}

fn null_run(m: &FeatureMatrix) -> Check {
    let mut config = CvConfig {
        framework: Framework::Traditional,
        algorithm: Algorithm::Rf,
        seed: SEED,
        ..CvConfig::default()
    };
    config.params.rf.n_trees = 50;
    config.ranking_trees = 50;
    let mut accs = Vec::new();
    for rep in 0..NULL_REPS {
        let mut labels = m.labels.clone();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(SEED + rep));
        let permuted = m.with_labels(labels).map_err(|e| e.to_string())?;
        accs.push(cross_validate(&permuted, &config).map_err(|e| e.to_string())?.mean_accuracy);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let (lo, hi) = accs.iter().fold((f64::MAX, f64::MIN), |(l, h), &a| (l.min(a), h.max(a)));
    let detail = format!("{NULL_REPS} permutations, RF 50 trees: mean {mean:.2}% (range {lo:.2}..{hi:.2})");
    ensure((mean - 20.0).abs() <= 5.0, || detail.clone())?;
    Ok(detail)
}

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_modesense"))
        .current_dir(dir)
        .args(["--threads", "1", "--config", "run.cfg"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let config = "\
seed = 7
duration_s = 20
ranking_trees = 20
rf_trees = 20
subset_size = 50
svm_max_passes = 500
";
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for run in &runs {
        let d = run.path();
        std::fs::write(d.join("run.cfg"), config).map_err(|e| e.to_string())?;
        cli(d, &["generate", "--out", "traces"])?;
        cli(d, &["extract", "--traces", "traces", "--out", "matrix.csv", "--domain", "pooled"])?;
        cli(d, &["select", "--matrix", "matrix.csv", "--out", "selection"])?;
        cli(d, &["train", "--matrix", "matrix.csv", "--out", "model"])?;
        cli(d, &["evaluate", "--matrix", "matrix.csv", "--out", "report.json", "--table", "report.txt", "--records", "records.csv"])?;
        cli(d, &["sweep", "--matrix", "matrix.csv", "--axis", "knn_k", "--values", "1,3", "--algorithm", "knn", "--framework", "traditional", "--out", "sweep.json", "--csv", "sweep.csv"])?;
        cli(d, &["benefit", "--model", "model", "--matrix", "matrix.csv", "--out", "benefit.json"])?;
    }
    let (a, b) = (files(runs[0].path()), files(runs[1].path()));
    ensure(a == b, || "runs produced different file sets".into())?;
    for f in &a {
        let same = std::fs::read(runs[0].path().join(f)).unwrap() == std::fs::read(runs[1].path().join(f)).unwrap();
        ensure(same, || format!("{} differs between runs", f.display()))?;
    }
    Ok(format!("7 commands run twice with --threads 1: {} artifacts byte-identical", a.len()))
}

fn hygiene() -> Check {
    let m = domain_matrix(&dataset(60.0)?, FeatureDomain::Pooled).map_err(|e| e.to_string())?;
    let mut config = hierarchical(FeatureDomain::Pooled);
    config.ranking_trees = 30;
    config.params.rf.n_trees = 30;
    let plan = fold_plan(&m, &config).map_err(|e| e.to_string())?;
    plan.validate(m.len()).map_err(|e| e.to_string())?;
    for mode in ModeLabel::ALL {
        let counts: Vec<usize> = plan
            .folds
            .iter()
            .map(|f| f.iter().filter(|&&r| m.labels[r] == mode).count())
            .collect();
        let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
        ensure(spread <= 1, || format!("{mode} fold counts {counts:?}"))?;
    }
    let fold = 4;
    let before = train_fold(&m, &plan, fold, &config).map_err(|e| e.to_string())?;
    let mut poisoned = m.clone();
    for &r in &plan.folds[fold][..5] {
        poisoned.rows[r].iter_mut().for_each(|v| *v = -1e9);
        poisoned.labels[r] = ModeLabel::Bike;
    }
    let after = train_fold(&poisoned, &plan, fold, &config).map_err(|e| e.to_string())?;
    ensure(before == after, || "mutating test rows changed the trained model".into())?;
    Ok(format!(
        "{} rows partitioned into {} stratified folds; 5 mutated test rows leave all 11 sub-models unchanged",
        m.len(),
        plan.k
    ))
}

fn main() {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let seconds: f64 = std::env::var("MODESENSE_ACCEPT_SECONDS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000.0);
    let mut pass = vec![
        run(1, "feature counts", Duration::from_secs(1), feature_counts),
        run(2, "DFT oracle", Duration::from_secs(10), dft_oracle),
        run(3, "time-measure oracle", Duration::from_secs(10), time_oracle),
        run(4, "KNN oracle", Duration::from_secs(30), knn_oracle),
        run(5, "SVM optimizer", Duration::from_secs(60), svm_checks),
        run(6, "Bayes fusion arithmetic", Duration::from_secs(5), fusion_arithmetic),
        run(7, "benefit boundary", Duration::from_secs(1), benefit_boundary),
    ];
    let start = Instant::now();
    let matrix = dataset(seconds);
    let build = start.elapsed();
    match matrix {
        Ok(m) => {
            pass.push(run(8, "end-to-end ordering", minutes(15).saturating_sub(build), || ordering(&m)));
            pass.push(run(9, "chance-level null", minutes(15), || null_run(&m)));
        }
        Err(e) => {
            println!("criterion  8 FAIL: end-to-end ordering: dataset: {e}");
            println!("criterion  9 FAIL: chance-level null: dataset: {e}");
            pass.extend([false, false]);
        }
    }
    pass.push(run(10, "determinism", minutes(5), determinism));
    pass.push(run(11, "cross-validation hygiene", minutes(1), hygiene));
    let failed = pass.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", pass.len() - failed, pass.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
