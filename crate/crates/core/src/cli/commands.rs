use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Resolver, RunManifest};
use super::{ClassifyArgs, CommonArgs, EmbedArgs, FieldMode, FieldcheckArgs, LabelColumn, SweepArgs, SweepParam, ToyArgs};
use crate::data::{
    add_gaussian_noise, column_count, cube_to_points, load_cube, load_labels, log_spaced,
    make_toy_clusters, parse_point_csv, remove_bands, rescale, Scaling, supervision_subset, write_point_csv,
    GroundTruth, Label, PointCloud, ToyConfig,
};
use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::evaluate::{run_protocol, run_protocol_points, METRIC_NAMES};
use crate::fieldcheck::{check_ratio_metric, solve_affine_metric};
use crate::graph::WeightedGraph;
use crate::operators::{KnownClassSettings, SupervisionParams};
use crate::pipeline::{build_graph, build_operator, embed as run_embed, EmbedConfig, Embedding, Method};

/// Everything the data-driven subcommands need, fully resolved.
#[derive(Debug, Clone)]
struct Settings {
    input: Option<PathBuf>,
    labels: Option<PathBuf>,
    label_column: LabelColumn,
    gt: Option<PathBuf>,
    remove_bands: Vec<usize>,
    scaling: Scaling,
    method: Method,
    k: usize,
    sigma: f64,
    m: usize,
    beta: f64,
    alpha_hat: f64,
    known_class: Vec<Label>,
    a_value: Vec<f64>,
    r_small: f64,
    r_big: f64,
    known_fraction: f64,
    runs: usize,
    train_fraction: f64,
    seed: u64,
    output_dir: PathBuf,
    auto_connect: bool,
    dense_limit: usize,
    jobs: Option<usize>,
}

fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

fn resolve_common(a: &CommonArgs, r: &mut Resolver) -> Result<Settings> {
    let ks = KnownClassSettings::default();
    let s = Settings {
        input: r.path("input", a.input.clone())?,
        labels: r.path("labels", a.labels.clone())?,
        label_column: r.value("label-column", a.label_column, LabelColumn::None)?,
        gt: r.path("gt", a.gt.clone())?,
        remove_bands: r.list("remove-bands", a.remove_bands.clone())?,
        scaling: r.value("scaling", a.scaling, Scaling::None)?,
        method: r.value("method", a.method, Method::Le)?,
        k: r.value("k", a.k, 12)?,
        sigma: r.value("sigma", a.sigma, 1.0)?,
        m: r.value("m", a.m, 50)?,
        beta: r.value("beta", a.beta, ks.beta)?,
        alpha_hat: r.value("alpha-hat", a.alpha_hat, ks.alpha_hat)?,
        known_class: r.list("known-class", a.known_class.clone())?,
        a_value: r.list("a-value", a.a_value.clone())?,
        r_small: r.value("r-small", a.r_small, ks.r_small)?,
        r_big: r.value("r-big", a.r_big, ks.r_big)?,
        known_fraction: r.value("known-fraction", a.known_fraction, 1.0)?,
        runs: r.value("runs", a.runs, 10)?,
        train_fraction: r.value("train-fraction", a.train_fraction, 0.1)?,
        seed: r.value("seed", a.seed, 0)?,
        output_dir: r
            .path("output-dir", a.output_dir.clone())?
            .unwrap_or_else(|| PathBuf::from("out")),
        auto_connect: r.switch("auto-connect", a.auto_connect)?,
        dense_limit: r.value("dense-limit", a.dense_limit, EigenOptions::default().dense_limit)?,
        jobs: r.optional("jobs", a.jobs)?,
    };
    if !s.a_value.is_empty() && s.a_value.len() != s.known_class.len() {
        return Err(config_err(
            "a-value",
            format!("{} values for {} known classes", s.a_value.len(), s.known_class.len()),
        ));
    }
    if !(0.0..=1.0).contains(&s.known_fraction) {
        return Err(config_err("known-fraction", "must lie in [0, 1]"));
    }
    Ok(s)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Raw points as read; callers apply `s.scaling`.
fn load_points(s: &Settings, manifest: &mut RunManifest) -> Result<PointCloud> {
    let input = s
        .input
        .as_deref()
        .ok_or_else(|| config_err("input", "an input file is required"))?;
    manifest.add_input(input)?;
    let mut pc = if let Some(gt) = &s.gt {
        let mut cube = load_cube(input, None)?;
        manifest.add_input(&crate::data::sidecar_path(input))?;
        if !s.remove_bands.is_empty() {
            cube = remove_bands(&cube, &s.remove_bands)?;
        }
        manifest.add_input(gt)?;
        let truth = GroundTruth::new(cube.height(), cube.width(), load_labels(gt)?)?;
        cube_to_points(&cube, &truth, true)?
    } else {
        let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
        let col = match s.label_column {
            LabelColumn::None => None,
            LabelColumn::Last => Some(column_count(&text).saturating_sub(1)),
            LabelColumn::Index(i) => Some(i),
        };
        parse_point_csv(&text, col)?
    };
    if let Some(l) = &s.labels {
        manifest.add_input(l)?;
        pc = pc.with_labels(load_labels(l)?)?;
    }
    Ok(pc)
}

/// Supervision for `method` from the known classes. Revealing no node at
/// all turns the potential off so SE falls back to LE like the others.
fn supervision(s: &Settings, method: Method, pc: &PointCloud, known_fraction: f64) -> Result<SupervisionParams> {
    if matches!(method, Method::Pca | Method::Le) {
        return Ok(SupervisionParams::default());
    }
    if s.known_class.is_empty() {
        return Err(config_err(
            "known-class",
            format!("method {method} needs at least one --known-class"),
        ));
    }
    let labels = pc
        .labels()
        .ok_or_else(|| config_err("labels", "known classes need labelled input"))?;
    let mut known: Vec<Option<Label>> = vec![None; pc.len()];
    for (idx, &c) in s.known_class.iter().enumerate() {
        let members = pc.members(c);
        if members.is_empty() {
            return Err(Error::UnknownClass(c));
        }
        if known_fraction >= 1.0 {
            members.iter().for_each(|&i| known[i] = Some(c));
        } else {
            let mask = supervision_subset(pc, c, known_fraction, s.seed.wrapping_add(idx as u64))?;
            for (i, on) in mask.into_iter().enumerate() {
                if on {
                    known[i] = Some(labels[i]);
                }
            }
        }
    }
    let settings = KnownClassSettings {
        beta: s.beta,
        alpha_hat: s.alpha_hat,
        a_values: s.known_class.iter().copied().zip(s.a_value.iter().copied()).collect(),
        r_small: s.r_small,
        r_big: s.r_big,
    };
    let mut p = SupervisionParams::from_known(&known, &settings);
    if known.iter().all(Option::is_none) {
        log::warn!("no node is revealed; the potential is switched off");
        p.alpha_hat = 0.0;
    }
    Ok(p)
}

fn embed_config(s: &Settings, method: Method, supervision: SupervisionParams) -> EmbedConfig {
    EmbedConfig {
        method,
        k: s.k,
        sigma: s.sigma,
        m: s.m,
        supervision,
        seed: s.seed,
        auto_connect: s.auto_connect,
        eigen: EigenOptions {
            dense_limit: s.dense_limit,
            ..EigenOptions::default()
        },
        ..EmbedConfig::new(method)
    }
}

fn start(config: Option<&Path>) -> Result<Resolver> {
    Resolver::new(config)
}

pub(super) fn embed(a: &EmbedArgs) -> Result<()> {
    let mut r = start(a.common.config.as_deref())?;
    let s = resolve_common(&a.common, &mut r)?;
    r.finish()?;
    r.echo();
    let mut manifest = RunManifest::new("embed", s.seed, &r);
    let pc = rescale(&load_points(&s, &mut manifest)?, s.scaling);
    let cfg = embed_config(&s, s.method, supervision(&s, s.method, &pc, s.known_fraction)?);
    let emb = run_embed(&pc, &cfg)?;
    prepare_dir(&s.output_dir)?;
    emb.write_csv(s.output_dir.join("embedding.csv"), pc.labels())?;
    emb.write_spectrum(s.output_dir.join("spectrum.txt"))?;
    manifest.outputs.extend(["embedding.csv".into(), "spectrum.txt".into()]);
    if a.dump_operator && s.method != Method::Pca {
        let (g, _) = build_graph(&pc, &cfg)?;
        build_operator(&g, s.method, &cfg.supervision)?.dump(&s.output_dir, "operator")?;
        manifest
            .outputs
            .extend(["operator.T.txt".into(), "operator.X.txt".into(), "operator.D.txt".into()]);
    }
    manifest.write(&s.output_dir, &r)?;
    println!(
        "wrote {} x {} embedding to {}",
        emb.len(),
        emb.dim(),
        s.output_dir.join("embedding.csv").display()
    );
    Ok(())
}

pub(super) fn classify(a: &ClassifyArgs) -> Result<()> {
    let mut r = start(a.common.config.as_deref())?;
    let s = resolve_common(&a.common, &mut r)?;
    let precomputed = r.switch("precomputed", a.precomputed)?;
    r.finish()?;
    r.echo();
    let mut manifest = RunManifest::new("classify", s.seed, &r);
    let pc = rescale(&load_points(&s, &mut manifest)?, s.scaling);
    let labels = pc
        .labels()
        .ok_or_else(|| config_err("labels", "classify needs labels (--labels or --label-column)"))?
        .to_vec();
    let report = if precomputed {
        run_protocol_points(&pc, s.runs, s.train_fraction, s.seed)?
    } else {
        let cfg = embed_config(&s, s.method, supervision(&s, s.method, &pc, s.known_fraction)?);
        let emb = run_embed(&pc, &cfg)?;
        run_protocol(&emb, &labels, s.runs, s.train_fraction, s.seed)?
    };
    prepare_dir(&s.output_dir)?;
    let write = |name: &str, text: String| {
        let p = s.output_dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("report.txt", report.to_text())?;
    write("report.json", report.to_json())?;
    write("table.tsv", report.to_table())?;
    manifest
        .outputs
        .extend(["report.txt".into(), "report.json".into(), "table.tsv".into()]);
    manifest.write(&s.output_dir, &r)?;
    print!("{}", report.to_table());
    Ok(())
}

fn sweep_grid(param: SweepParam, values: &[f64]) -> Result<Vec<f64>> {
    let grid = match (param, values.is_empty()) {
        (SweepParam::NoiseSigma, true) => log_spaced(0.0, 5.0, 20),
        (SweepParam::InfoFraction, true) => (0..=20).map(|i| i as f64 * 0.05).collect(),
        (_, true) => {
            return Err(config_err(
                "values",
                format!("the {param} sweep needs a non-empty --values grid"),
            ))
        }
        (_, false) => values.to_vec(),
    };
    if matches!(param, SweepParam::K | SweepParam::M) {
        if let Some(v) = grid.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
            return Err(config_err("values", format!("{param} must be a positive integer, got {v}")));
        }
    }
    Ok(grid)
}

/// One sweep point: embed and classify, returning (metric, score) pairs.
fn sweep_point(s: &Settings, pc: &PointCloud, method: Method, param: SweepParam, value: f64) -> Result<Vec<(String, f64)>> {
    let mut s = s.clone();
    let mut known_fraction = s.known_fraction;
    let mut data = None;
    match param {
        SweepParam::K => s.k = value as usize,
        SweepParam::M => s.m = value as usize,
        SweepParam::Sigma => s.sigma = value,
        SweepParam::AlphaHat => s.alpha_hat = value,
        SweepParam::Beta => s.beta = value,
        SweepParam::NoiseSigma => data = Some(add_gaussian_noise(pc, s.seed, value)?),
        SweepParam::InfoFraction => known_fraction = value,
    }
    // Noise is added in the data's own units, before any rescaling.
    let pc = &rescale(data.as_ref().unwrap_or(pc), s.scaling);
    let labels = pc.labels().expect("checked by caller");
    let cfg = embed_config(&s, method, supervision(&s, method, pc, known_fraction)?);
    let emb = run_embed(pc, &cfg)?;
    let report = run_protocol(&emb, labels, s.runs, s.train_fraction, s.seed)?;
    Ok(METRIC_NAMES
        .iter()
        .zip(report.mean.as_array())
        .map(|(n, v)| (n.to_string(), v))
        .collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(super) fn sweep(a: &SweepArgs) -> Result<()> {
    let mut r = start(a.common.config.as_deref())?;
    let s = resolve_common(&a.common, &mut r)?;
    let param = r
        .optional("param", a.param)?
        .ok_or_else(|| config_err("param", "choose a sweep parameter with --param"))?;
    let values = r.list("values", a.values.clone())?;
    let mut methods = r.list("methods", a.methods.clone())?;
    r.finish()?;
    if methods.is_empty() {
        methods.push(s.method);
    }
    let grid = sweep_grid(param, &values)?;
    r.echo();
    let mut manifest = RunManifest::new("sweep", s.seed, &r);
    let pc = load_points(&s, &mut manifest)?;
    if pc.labels().is_none() {
        return Err(config_err("labels", "sweep needs labels (--labels or --label-column)"));
    }
    let points_dir = s.output_dir.join("points");
    prepare_dir(&points_dir)?;

    let tasks: Vec<(usize, f64, Method)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| methods.iter().map(move |&m| (i, v, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    let chunks: Vec<Result<String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, value, method)| {
                let mut rows = String::new();
                match sweep_point(&s, &pc, method, param, value) {
                    Ok(scores) => {
                        for (metric, score) in scores {
                            writeln!(rows, "{param},{value},{method},{metric},{score},ok").unwrap();
                        }
                    }
                    Err(e) => {
                        log::warn!("{param} = {value} ({method}) failed: {e}");
                        let msg = csv_field(&format!("error: {e}"));
                        writeln!(rows, "{param},{value},{method},,NaN,{msg}").unwrap();
                    }
                }
                // Atomic per-point file: write aside, then rename.
                let name = format!("point_{i:03}_{method}.csv");
                let tmp = points_dir.join(format!(".{name}.tmp"));
                fs::write(&tmp, &rows).map_err(|e| Error::io(&tmp, e))?;
                let dst = points_dir.join(&name);
                fs::rename(&tmp, &dst).map_err(|e| Error::io(&dst, e))?;
                Ok(rows)
            })
            .collect()
    });
    let mut out = String::from("param,value,method,metric,score,status\n");
    let mut failed = 0;
    for c in chunks {
        let c = c?;
        failed += usize::from(!c.ends_with(",ok\n"));
        out.push_str(&c);
    }
    let path = s.output_dir.join("sweep.csv");
    fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    manifest.outputs.extend(["sweep.csv".into(), "points/".into()]);
    manifest.write(&s.output_dir, &r)?;
    println!(
        "{} grid points x {} methods, {failed} failed; wrote {}",
        grid.len(),
        methods.len(),
        path.display()
    );
    Ok(())
}

/// The toy run's outputs, keyed by file name.
pub(crate) fn toy_embeddings(pc: &PointCloud, k: usize, sigma: f64, m: usize, seed: u64, te_a_blue: Option<f64>) -> Result<BTreeMap<&'static str, Embedding>> {
    const RED: Label = 0;
    const BLUE: Label = 1;
    let labels = pc.labels().expect("toy data is labelled");
    let indicator = |c: Label| -> Vec<f64> { labels.iter().map(|&l| f64::from(u8::from(l == c))).collect() };
    let base = EmbedConfig {
        k,
        sigma,
        m,
        seed,
        ..EmbedConfig::new(Method::Le)
    };
    let with = |method, supervision| EmbedConfig {
        method,
        supervision,
        ..base.clone()
    };
    let red = indicator(RED);
    let a_red: Vec<f64> = red.iter().map(|v| 1.0 + 9.0 * v).collect();
    let (te_class, te_a) = match te_a_blue {
        Some(a) => (BLUE, a),
        None => (RED, 10.0),
    };
    let known: Vec<Option<Label>> = labels.iter().map(|&l| (l == te_class).then_some(l)).collect();
    let te = SupervisionParams::from_known(
        &known,
        &KnownClassSettings {
            a_values: [(te_class, te_a)].into_iter().collect(),
            r_small: 0.5,
            r_big: 100.0,
            ..KnownClassSettings::default()
        },
    );
    let configs = [
        ("le", base.clone()),
        (
            "se",
            with(
                Method::Se,
                SupervisionParams {
                    potential: Some(red.clone()),
                    alpha_hat: 10.0,
                    ..Default::default()
                },
            ),
        ),
        (
            "ta",
            with(
                Method::Ta,
                SupervisionParams {
                    mu: Some(red.clone()),
                    beta: 10.0,
                    ..Default::default()
                },
            ),
        ),
        (
            "tg",
            with(
                Method::Tg,
                SupervisionParams {
                    a: Some(a_red),
                    ..Default::default()
                },
            ),
        ),
        ("te", with(Method::Te, te)),
    ];
    configs
        .into_par_iter()
        .map(|(name, cfg)| run_embed(pc, &cfg).map(|e| (name, e)))
        .collect()
}

pub(super) fn toy(a: &ToyArgs) -> Result<()> {
    let mut r = start(a.config.as_deref())?;
    let seed = r.value("seed", a.seed, 42)?;
    let n_per_cluster = r.value("n-per-cluster", a.n_per_cluster, 100)?;
    let k = r.value("k", a.k, 50)?;
    let sigma = r.value("sigma", a.sigma, 1.0)?;
    let m = r.value("m", a.m, 2)?;
    let te_a_blue = r.optional("te-a-blue", a.te_a_blue)?;
    let dir = r
        .path("output-dir", a.output_dir.clone())?
        .unwrap_or_else(|| PathBuf::from("out"));
    r.finish()?;
    r.echo();
    let pc = make_toy_clusters(&ToyConfig {
        seed,
        n_per_cluster,
        ..ToyConfig::default()
    })?;
    let embeddings = toy_embeddings(&pc, k, sigma, m, seed, te_a_blue)?;
    prepare_dir(&dir)?;
    let mut manifest = RunManifest::new("toy", seed, &r);
    write_point_csv(dir.join("toy_data.csv"), &pc)?;
    manifest.outputs.push("toy_data.csv".into());
    for (name, e) in &embeddings {
        let file = format!("{name}.csv");
        e.write_csv(dir.join(&file), pc.labels())?;
        manifest.outputs.push(file);
    }
    manifest.write(&dir, &r)?;
    println!("wrote {} files to {}", 1 + embeddings.len(), dir.display());
    Ok(())
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for (column, cell) in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|c| !c.is_empty())
            .enumerate()
        {
            out.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                row,
                column,
                cell: cell.into(),
            })?);
        }
    }
    Ok(out)
}

pub(super) fn fieldcheck(a: &FieldcheckArgs) -> Result<()> {
    let mut r = start(a.config.as_deref())?;
    let graph = r
        .path("graph", a.graph.clone())?
        .ok_or_else(|| config_err("graph", "an edge list is required"))?;
    let a_path = r
        .path("a", a.a.clone())?
        .ok_or_else(|| config_err("a", "a measure-modifier file is required"))?;
    let a_vec = read_vector(&a_path)?;
    let n = r.value("n", a.n, a_vec.len())?;
    let mode = r.value("mode", a.mode, FieldMode::Affine)?;
    let dir = r
        .path("output-dir", a.output_dir.clone())?
        .unwrap_or_else(|| PathBuf::from("out"));
    r.finish()?;
    r.echo();
    let mut manifest = RunManifest::new("fieldcheck", 0, &r);
    manifest.add_input(&graph)?;
    manifest.add_input(&a_path)?;
    let g = WeightedGraph::read_edge_list(&graph, Some(n))?;
    let report = match mode {
        FieldMode::Affine => solve_affine_metric(&g, &a_vec)?,
        FieldMode::Ratio => check_ratio_metric(&g, &a_vec)?,
    };
    let text = format!("mode: {mode}\n{report}");
    prepare_dir(&dir)?;
    let p = dir.join("fieldcheck.txt");
    fs::write(&p, &text).map_err(|e| Error::io(&p, e))?;
    manifest.outputs.push("fieldcheck.txt".into());
    manifest.write(&dir, &r)?;
    print!("{text}");
    Ok(())
}
