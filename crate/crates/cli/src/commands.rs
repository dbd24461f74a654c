use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::SystemTime;

use anyhow::{bail, Context, Result};
use geodesic_forest::data::{
    load_dataset, load_points, sample_gaussian_mixture, save_dataset, save_dataset_as,
    CoordSystem, GaussianMixtureSpec, LoadOptions,
};
use geodesic_forest::eval::{
    cross_validate, export_boundaries, scaling_sweep, CvOptions, ModelKind, SweepConfig,
};
use geodesic_forest::model::AnyModel;
use geodesic_forest::tree::{Impurity, TreeConfig};
use geodesic_forest::{
    fit, fit_forest_with_jobs, Dataset, ForestConfig, GeometryKind, Predictor, Strictness,
    Targets, Task,
};
use serde_json::json;

use crate::manifest::{beside, RunManifest};
use crate::{
    BoundariesArgs, Cli, Command, ConvertArgs, EvaluateArgs, FitArgs, GenerateArgs, InputArgs,
    MixtureArgs, PredictArgs, SweepArgs, UsageError,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    let started = SystemTime::now();
    match &cli.command {
        Command::Generate(a) => generate(a, cli.jobs, started),
        Command::Fit(a) => fit_cmd(a, cli.jobs, started),
        Command::Predict(a) => predict(a, cli.jobs, started),
        Command::Evaluate(a) => evaluate(a, cli.jobs, started),
        Command::Sweep(a) => sweep(a, cli.jobs, started),
        Command::Boundaries(a) => boundaries(a, cli.jobs, started),
        Command::Convert(a) => convert(a, cli.jobs, started),
    }
}

fn mixture_spec(m: &MixtureArgs) -> Result<GaussianMixtureSpec> {
    let spec = GaussianMixtureSpec {
        n_classes: m.classes,
        dim: m.dim,
        curvature: m.curvature,
        noise_scale: m.noise,
        seed: m.seed,
    };
    // Surfaces bad combinations as usage errors before any work starts.
    spec.manifold().map_err(|e| usage(e.to_string()))?;
    if m.classes == 0 {
        return Err(usage("--classes must be at least 1"));
    }
    if !(m.noise >= 0.0 && m.noise.is_finite()) {
        return Err(usage("--noise must be a finite non-negative number"));
    }
    Ok(spec)
}

fn load_options(input: &InputArgs, geometry: GeometryKind, task: Task) -> Result<LoadOptions> {
    if geometry == GeometryKind::Euclidean && input.coords != CoordSystem::Hyperboloid {
        return Err(usage("--coords poincare/klein requires --geometry hyperboloid"));
    }
    Ok(LoadOptions {
        task,
        coords: input.coords,
        geometry,
        curvature: input.curvature,
        strictness: if input.strict {
            Strictness::Strict
        } else {
            Strictness::Lenient
        },
    })
}

fn generate(a: &GenerateArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    let spec = mixture_spec(&a.mixture)?;
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let data = sample_gaussian_mixture(&spec, a.n)?;
    save_dataset(&data, &a.out)?;
    let mut m = RunManifest::new("generate", a, started, jobs);
    m.seeds = vec![spec.seed];
    m.outputs = vec![&a.out];
    m.results = json!({ "n": data.len(), "class_counts": class_counts(&data) });
    m.write(&beside(&a.out))
}

fn class_counts(data: &Dataset) -> Vec<usize> {
    let mut counts = vec![0; data.n_classes()];
    for &c in data.class_ids().unwrap_or(&[]) {
        counts[c] += 1;
    }
    counts
}

fn tree_config(a: &FitArgs) -> Result<TreeConfig> {
    let impurity = a.impurity.unwrap_or(match a.task {
        Task::Classification => Impurity::Gini,
        Task::Regression => Impurity::Mse,
    });
    let config = TreeConfig {
        max_depth: a.max_depth,
        min_samples_leaf: a.min_samples_leaf,
        min_samples_split: a.min_samples_split,
        impurity,
        task: a.task,
        midpoint_mode: a.midpoint,
        max_features: a.max_features,
        seed: a.seed,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

/// Accuracy against the file's labels, or mean squared error for regression.
fn training_score(model: &dyn Predictor, data: &Dataset) -> Result<serde_json::Value> {
    Ok(match &data.targets {
        Targets::Classes { ids, vocabulary } => {
            let pred = model.predict_labels(&data.points)?;
            let hits = pred
                .iter()
                .zip(ids)
                .filter(|(p, &t)| **p == vocabulary[t])
                .count();
            json!({ "accuracy": hits as f64 / data.len() as f64 })
        }
        Targets::Values(values) => {
            let pred = model.predict_values(&data.points)?;
            let mse = pred
                .iter()
                .zip(values)
                .map(|(p, v)| (p - v) * (p - v))
                .sum::<f64>()
                / data.len() as f64;
            json!({ "mse": mse })
        }
    })
}

fn fit_cmd(a: &FitArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    let tree = tree_config(a)?;
    if a.model == ModelKind::Forest && a.trees == 0 {
        return Err(usage("--trees must be at least 1"));
    }
    let opts = load_options(&a.input, a.geometry, a.task)?;
    let data = load_dataset(&a.input.data, &opts)?;
    let model: AnyModel = match a.model {
        ModelKind::Tree => fit(&data, &tree)?.into(),
        ModelKind::Forest => {
            let config = ForestConfig {
                n_trees: a.trees,
                tree,
                bootstrap: !a.no_bootstrap,
                hard_vote: a.hard_vote,
                seed: a.seed,
            };
            fit_forest_with_jobs(&data, &config, jobs)?.into()
        }
    };
    model.save(&a.out)?;
    let mut m = RunManifest::new("fit", a, started, jobs);
    m.seeds = vec![a.seed];
    m.inputs = vec![&a.input.data];
    m.outputs = vec![&a.out];
    let mut results = training_score(model.as_predictor(), &data)?;
    results["n_train"] = json!(data.len());
    if let AnyModel::Tree(t) = &model {
        results["depth"] = json!(t.depth());
        results["n_leaves"] = json!(t.n_leaves());
    }
    m.results = results;
    m.write(&beside(&a.out))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn predict(a: &PredictArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    let model = AnyModel::load(&a.model)?;
    let p = model.as_predictor();
    let manifold = *p.manifold();
    let input = InputArgs {
        data: a.data.clone(),
        coords: a.coords,
        curvature: manifold.curvature,
        strict: false,
    };
    let opts = load_options(&input, manifold.kind, p.task())?;
    let (file_manifold, points, targets) = load_points(&a.data, &opts)?;
    if file_manifold.dim != manifold.dim {
        bail!(
            "data has dimension {} but the model expects {}",
            file_manifold.dim,
            manifold.dim
        );
    }
    let mut out = create(&a.out)?;
    let mut results = json!({ "n": points.len() });
    match p.task() {
        Task::Classification => {
            let proba = p.predict_proba(&points)?;
            let classes = p.classes();
            let header: Vec<String> = std::iter::once("prediction".to_string())
                .chain(classes.iter().map(|c| format!("p_{c}")))
                .collect();
            writeln!(out, "{}", header.join(","))?;
            let mut labels = Vec::with_capacity(proba.len());
            for row in &proba {
                let label = classes[geodesic_forest::model::argmax(row)];
                labels.push(label);
                let probs: Vec<String> = row.iter().map(f64::to_string).collect();
                writeln!(out, "{label},{}", probs.join(","))?;
            }
            if let Some(Targets::Classes { ids, vocabulary }) = &targets {
                let hits = labels
                    .iter()
                    .zip(ids)
                    .filter(|(l, &t)| **l == vocabulary[t])
                    .count();
                results["accuracy"] = json!(hits as f64 / labels.len() as f64);
            }
        }
        Task::Regression => {
            writeln!(out, "prediction")?;
            for v in p.predict_values(&points)? {
                writeln!(out, "{v}")?;
            }
        }
    }
    out.flush()?;
    let mut m = RunManifest::new("predict", a, started, jobs);
    m.inputs = vec![&a.model, &a.data];
    m.outputs = vec![&a.out];
    m.results = results;
    m.write(&beside(&a.out))
}

fn evaluate(a: &EvaluateArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    if a.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    if a.seeds.is_empty() {
        return Err(usage("--seeds must not be empty"));
    }
    let opts = load_options(&a.input, GeometryKind::Hyperboloid, Task::Classification)?;
    let data = load_dataset(&a.input.data, &opts)?;
    let cv = CvOptions {
        k: a.folds,
        seeds: a.seeds.clone(),
        jobs,
    };
    let result = cross_validate(&data, &a.predictors, &cv)?;
    let summary = result.summary()?;

    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let csv_path = a.out_dir.join("cv.csv");
    let summary_path = a.out_dir.join("summary.json");
    result.write_csv(&csv_path)?;
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;

    for (name, s) in &summary.predictors {
        println!(
            "{name:<24} micro-F1 {:.4} +/- {:.4}  macro-F1 {:.4} +/- {:.4}  fit {:.4}s",
            s.micro_f1.mean, s.micro_f1.std, s.macro_f1.mean, s.macro_f1.std, s.fit_seconds.mean
        );
    }
    for t in &summary.t_tests {
        let p = match t.micro_f1.p_value() {
            Some(p) => format!("p = {p:.4}"),
            None => "identical".to_string(),
        };
        println!("{} vs {}: {p}", t.a, t.b);
    }

    let mut m = RunManifest::new("evaluate", a, started, jobs);
    m.seeds = a.seeds.clone();
    m.inputs = vec![&a.input.data];
    m.outputs = vec![&csv_path, &summary_path];
    m.results = json!({ "predictors": a.predictors });
    m.write(&a.out_dir.join("manifest.json"))
}

fn sweep(a: &SweepArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    let data = mixture_spec(&a.mixture)?;
    if a.grid.is_empty() {
        return Err(usage("--grid must not be empty"));
    }
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let config = SweepConfig {
        axis: a.axis,
        grid: a.grid.clone(),
        trials: a.trials,
        data,
        n_samples: a.n,
        predictor: a.predictor.clone(),
        jobs,
    };
    let rows = scaling_sweep(&config)?;
    for r in &rows {
        println!(
            "{:>8}  fit {:.5}s [{:.5}, {:.5}]  micro-F1 {:.4}",
            r.value, r.runtime.mean, r.runtime.ci_low, r.runtime.ci_high, r.micro_f1.mean
        );
    }
    let body = json!({ "axis": a.axis, "predictor": a.predictor, "rows": rows });
    std::fs::write(&a.out, serde_json::to_string_pretty(&body)?)
        .with_context(|| format!("writing {}", a.out.display()))?;
    let mut m = RunManifest::new("sweep", a, started, jobs);
    m.seeds = (0..a.trials as u64).map(|t| data.seed.wrapping_add(t)).collect();
    m.outputs = vec![&a.out];
    m.write(&beside(&a.out))
}

fn boundaries(a: &BoundariesArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    if a.resolution == 0 {
        return Err(usage("--resolution must be at least 1"));
    }
    let AnyModel::Tree(tree) = AnyModel::load(&a.model)? else {
        bail!("boundary export needs a single tree, not a forest");
    };
    let export = export_boundaries(&tree, a.resolution)?;
    std::fs::write(&a.out, serde_json::to_string(&export)?)
        .with_context(|| format!("writing {}", a.out.display()))?;
    let mut m = RunManifest::new("boundaries", a, started, jobs);
    m.inputs = vec![&a.model];
    m.outputs = vec![&a.out];
    m.results = json!({ "boundaries": export.boundaries.len() });
    m.write(&beside(&a.out))
}

fn convert(a: &ConvertArgs, jobs: Option<usize>, started: SystemTime) -> Result<()> {
    if !(a.curvature > 0.0 && a.curvature.is_finite()) {
        return Err(usage("--curvature must be positive"));
    }
    let opts = LoadOptions {
        task: if a.regression {
            Task::Regression
        } else {
            Task::Classification
        },
        coords: a.from,
        geometry: GeometryKind::Hyperboloid,
        curvature: a.curvature,
        strictness: Strictness::Lenient,
    };
    let data = load_dataset(&a.data, &opts)?;
    save_dataset_as(&data, &a.out, a.to)?;
    let mut m = RunManifest::new("convert", a, started, jobs);
    m.inputs = vec![&a.data];
    m.outputs = vec![&a.out];
    m.results = json!({ "n": data.len() });
    m.write(&beside(&a.out))
}
