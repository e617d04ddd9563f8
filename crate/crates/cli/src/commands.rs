use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use leafadv::attack::{render_candidate, run_attack, AttackReport, TABLE1_HEADERS};
use leafadv::classifier::{self, Classifier, ClassifierSpec, StubClassifier, StubRule};
use leafadv::maskgen::{self, generate_leaf_mask, EdgeParams};
use leafadv::metrics::{
    edge_metrics_with, metrics_delta, table2_csv, table3_csv, BaselineRow, ComparisonRow, OrientationMode,
    ReferenceTables,
};
use leafadv::raster::{self, LeafAsset, LeafSpecies, SignInstance};
use leafadv::synth;
use serde::Serialize;

use crate::config::{ClassifierSource, LabelRef, RunConfig, SignEntry};
use crate::{slug, CliError, OutputFormat};

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    raster::write_atomic(path, text.as_bytes()).map_err(CliError::failed)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

/// `leafadv maskgen`: writes the leaf silhouette as a PGM mask.
pub fn cmd_maskgen(image: &Path, dest: Option<&Path>, params: &EdgeParams, out: &mut dyn Write) -> Result<(), CliError> {
    let img = raster::read_image(image).map_err(CliError::failed)?;
    let mask = generate_leaf_mask(&img, params)
        .map_err(|source| CliError::MaskGen { context: image.display().to_string(), source })?;
    let dest = match dest {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = image.file_stem().and_then(|s| s.to_str()).unwrap_or("leaf");
            image.with_file_name(format!("{stem}_mask.pgm"))
        }
    };
    raster::write_mask(&mask, &dest).map_err(CliError::failed)?;
    let bb = mask.bounding_box().expect("mask is non-empty");
    say(
        out,
        format!("{}: area {} px, bbox ({}, {})-({}, {})", dest.display(), mask.area(), bb.x0, bb.y0, bb.x1, bb.y1),
    )
}

enum LoadedClassifier {
    Spec(ClassifierSpec),
    Stub(StubRule),
}

impl LoadedClassifier {
    fn load(source: &ClassifierSource) -> Result<Self, CliError> {
        match source {
            ClassifierSource::Weights { path } => classifier::load_spec(path)
                .map(LoadedClassifier::Spec)
                .map_err(|e| CliError::ClassifierLoad(e.to_string())),
            ClassifierSource::Stub(rule) => {
                rule.validate().map_err(|e| CliError::ClassifierLoad(e.to_string()))?;
                Ok(LoadedClassifier::Stub(rule.clone()))
            }
        }
    }

    fn labels(&self) -> &[String] {
        match self {
            LoadedClassifier::Spec(s) => s.class_labels(),
            LoadedClassifier::Stub(r) => &r.class_labels,
        }
    }

    fn for_sign<'a>(&'a self, sign: &SignInstance) -> Result<Box<dyn Classifier + 'a>, CliError> {
        Ok(match self {
            LoadedClassifier::Spec(s) => Box::new(s),
            LoadedClassifier::Stub(r) => Box::new(
                StubClassifier::new(r.clone(), sign.sign_mask().clone()).map_err(|e| CliError::ClassifierLoad(e.to_string()))?,
            ),
        })
    }
}

fn resolve_label(label: &LabelRef, labels: &[String]) -> Result<usize, CliError> {
    match label {
        LabelRef::Index(i) if *i < labels.len() => Ok(*i),
        LabelRef::Index(i) => Err(CliError::Config(format!("label index {i} out of range for {} classes", labels.len()))),
        LabelRef::Name(n) => labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(n))
            .ok_or_else(|| CliError::Config(format!("unknown class label {n:?}"))),
    }
}

fn load_sign(entry: &SignEntry, labels: &[String]) -> Result<SignInstance, CliError> {
    let img = raster::ensure_rgb(&raster::read_image(&entry.image).map_err(CliError::failed)?);
    let mask = raster::read_mask(&entry.mask).map_err(CliError::failed)?;
    let label = resolve_label(&entry.label, labels)?;
    SignInstance::new(entry.name.clone(), img, mask, label).map_err(|e| CliError::Config(format!("sign {:?}: {e}", entry.name)))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix_seconds: u64,
    config_path: String,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

/// `leafadv attack`: one report (JSON, CSV row, adversarial PNG) per sign/leaf
/// pair, a summary table and a manifest.
pub fn cmd_attack(config_path: &Path, out: &mut dyn Write) -> Result<Vec<AttackReport>, CliError> {
    let cfg = RunConfig::load(config_path)?;
    let model = LoadedClassifier::load(&cfg.classifier)?;
    let signs = cfg.signs.iter().map(|s| load_sign(s, model.labels())).collect::<Result<Vec<_>, _>>()?;
    let leaves = cfg
        .leaves
        .iter()
        .map(|l| {
            maskgen::make_leaf_asset(l.species, &l.image, l.mask.as_deref(), cfg.edge())
                .map_err(|source| CliError::MaskGen { context: l.image.display().to_string(), source })
        })
        .collect::<Result<Vec<LeafAsset>, _>>()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;

    let mut reports = Vec::new();
    let mut outputs = Vec::new();
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(TABLE1_HEADERS).map_err(CliError::failed)?;
    for sign in &signs {
        let clf = model.for_sign(sign)?;
        for leaf in &leaves {
            let report = run_attack(&cfg.attack, sign, leaf, clf.as_ref()).map_err(CliError::failed)?;
            let stem = format!("{}_{}", slug(sign.name()), slug(&leaf.species().to_string()));
            let json_path = cfg.output_dir.join(format!("{stem}.report.json"));
            write_text(&json_path, &to_json(&report))?;
            let mut row = csv::Writer::from_writer(Vec::new());
            row.write_record(TABLE1_HEADERS).map_err(CliError::failed)?;
            row.write_record(report.table1_record()).map_err(CliError::failed)?;
            let csv_path = cfg.output_dir.join(format!("{stem}.csv"));
            write_text(&csv_path, &String::from_utf8(row.into_inner().map_err(CliError::failed)?).expect("utf8"))?;
            summary.write_record(report.table1_record()).map_err(CliError::failed)?;
            outputs.push(json_path);
            outputs.push(csv_path);
            if let Some(best) = &report.best {
                let img = render_candidate(sign, leaf, &best.candidate).map_err(CliError::failed)?;
                let png = cfg.output_dir.join(format!("{stem}.png"));
                raster::write_image(&img, &png).map_err(CliError::failed)?;
                outputs.push(png);
            }
            let verdict = match &report.best {
                Some(b) if b.success => format!("fooled: {} at {:.2}%", b.predicted_name, b.confidence_percent),
                Some(b) => format!("not fooled: {} at {:.2}%", b.predicted_name, b.confidence_percent),
                None => "no placement fits".to_string(),
            };
            say(
                out,
                format!(
                    "{} + {}: {verdict} ({} candidates, {} successful)",
                    sign.name(),
                    leaf.species(),
                    report.total_candidates,
                    report.successful_candidates
                ),
            )?;
            reports.push(report);
        }
    }
    let summary_path = cfg.output_dir.join("summary.csv");
    write_text(&summary_path, &String::from_utf8(summary.into_inner().map_err(CliError::failed)?).expect("utf8"))?;
    outputs.push(summary_path);

    let manifest = Manifest {
        tool: "leafadv",
        version: env!("CARGO_PKG_VERSION"),
        created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        config_path: config_path.display().to_string(),
        config: &cfg,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_text(&cfg.output_dir.join("manifest.json"), &to_json(&manifest))?;

    if reports.iter().all(|r| r.total_candidates == 0) {
        return Err(CliError::NoCandidates);
    }
    Ok(reports)
}

#[derive(Serialize)]
struct Classification {
    image: String,
    predicted_label: usize,
    predicted_name: String,
    confidence_percent: f64,
    probabilities: Vec<f64>,
}

/// `leafadv classify`: prediction for one image as JSON.
pub fn cmd_classify(
    image: &Path,
    weights: Option<&Path>,
    config: Option<&Path>,
    sign: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let img = raster::ensure_rgb(&raster::read_image(image).map_err(CliError::failed)?);
    let (model, sign) = match (weights, config) {
        (Some(w), _) => (
            LoadedClassifier::Spec(classifier::load_spec(w).map_err(|e| CliError::ClassifierLoad(e.to_string()))?),
            None,
        ),
        (None, Some(c)) => {
            let cfg = RunConfig::load(c)?;
            let model = LoadedClassifier::load(&cfg.classifier)?;
            let wanted = sign.ok_or_else(|| CliError::Config("--sign is required with --config".into()))?;
            let entry = cfg
                .signs
                .iter()
                .find(|s| s.name == wanted)
                .ok_or_else(|| CliError::Config(format!("no sign named {wanted:?} in config")))?;
            let sign = load_sign(entry, model.labels())?;
            (model, Some(sign))
        }
        (None, None) => return Err(CliError::Config("either --weights or --config is required".into())),
    };
    let probs = match (&model, &sign) {
        (LoadedClassifier::Spec(s), _) => s.classify(&img),
        (LoadedClassifier::Stub(_), Some(sign)) => model.for_sign(sign)?.classify(&img),
        (LoadedClassifier::Stub(_), None) => unreachable!("stub classifiers only come from a config"),
    }
    .map_err(CliError::failed)?;
    let result = Classification {
        image: image.display().to_string(),
        predicted_label: probs.predicted,
        predicted_name: model.labels()[probs.predicted].clone(),
        confidence_percent: probs.confidence_percent,
        probabilities: probs.probabilities,
    };
    say(out, to_json(&result).trim_end())
}

pub struct MetricsArgs {
    pub image: PathBuf,
    pub region: Option<PathBuf>,
    pub name: Option<String>,
    pub format: OutputFormat,
    pub circular: bool,
    pub out: Option<PathBuf>,
    pub params: EdgeParams,
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Some(p) => write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// `leafadv metrics`: edge metrics of one image as JSON or a one-row table.
pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let img = raster::read_image(&args.image).map_err(CliError::failed)?;
    let region = args.region.as_ref().map(raster::read_mask).transpose().map_err(CliError::failed)?;
    let mode = if args.circular { OrientationMode::Circular } else { OrientationMode::Arithmetic };
    let metrics = edge_metrics_with::<f64>(&img, region.as_ref(), &args.params, mode).map_err(CliError::failed)?;
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| args.image.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string());
    let row = BaselineRow { name, metrics };
    let text = match args.format {
        OutputFormat::Json => to_json(&row),
        OutputFormat::Csv => table2_csv(std::slice::from_ref(&row)).map_err(CliError::failed)?,
    };
    emit(&text, args.out.as_deref(), out)
}

fn read_row(path: &Path) -> Result<BaselineRow<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// `leafadv compare`: adversarial-vs-baseline table with cohort averages.
pub fn cmd_compare(
    reference: Option<&Path>,
    base: Option<&Path>,
    adv: &[String],
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let rows = match (reference, base) {
        (Some(r), _) => ReferenceTables::load(r).and_then(|t| t.comparison_rows()).map_err(CliError::failed)?,
        (None, Some(b)) => {
            let base = read_row(b)?;
            adv.iter()
                .map(|spec| {
                    let (path, flag) = spec
                        .rsplit_once(':')
                        .ok_or_else(|| CliError::Config(format!("--adv expects path:S or path:U, got {spec:?}")))?;
                    let success = match flag {
                        "S" | "s" => true,
                        "U" | "u" => false,
                        other => return Err(CliError::Config(format!("outcome flag must be S or U, got {other:?}"))),
                    };
                    let row = read_row(Path::new(path))?;
                    let delta = metrics_delta(&base.metrics, &row.metrics).map_err(CliError::failed)?;
                    Ok(ComparisonRow { name: row.name, success, metrics: row.metrics, delta })
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, None) => return Err(CliError::Config("either --reference or --base with --adv is required".into())),
    };
    let averages = ComparisonRow::averages(&rows).map_err(CliError::failed)?;
    let text = table3_csv(&rows, &averages).map_err(CliError::failed)?;
    emit(&text, dest, out)
}

/// `leafadv report`: concatenates the Table-1 rows of every report in `dir`.
pub fn cmd_report(dir: &Path, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".report.json")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(format!("no *.report.json files in {}", dir.display())));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE1_HEADERS).map_err(CliError::failed)?;
    for p in &paths {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        let report: AttackReport =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        w.write_record(report.table1_record()).map_err(CliError::failed)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(CliError::failed)?).expect("utf8");
    emit(&text, dest, out)
}

/// `leafadv init-model`: default network with seeded random weights.
pub fn cmd_init_model(dest: &Path, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = ClassifierSpec::lisa_cnn(seed);
    classifier::save_spec(&spec, dest).map_err(CliError::failed)?;
    say(out, format!("{}: {} layers, {} classes, seed {seed}", dest.display(), spec.layers().len(), spec.class_labels().len()))
}

/// `leafadv demo`: synthetic assets and a ready-to-run config.
pub fn cmd_demo(dir: &Path, stub: bool, out: &mut dyn Write) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let labels = classifier::lisa_cnn_labels();
    let stop = labels.iter().position(|l| l == "Stop").expect("Stop label");
    let sign = synth::stop_like_sign(64, stop).map_err(CliError::failed)?;
    raster::write_image(sign.image(), dir.join("stop.png")).map_err(CliError::failed)?;
    raster::write_mask(sign.sign_mask(), dir.join("stop_mask.pgm")).map_err(CliError::failed)?;
    let mut leaves = String::new();
    for species in LeafSpecies::ALL {
        let leaf = synth::leaf(species, 48).map_err(CliError::failed)?;
        let name = slug(&species.to_string());
        raster::write_image(leaf.image(), dir.join(format!("{name}.png"))).map_err(CliError::failed)?;
        leaves.push_str(&format!("\n[[leaves]]\nspecies = \"{name}\"\nimage = \"{name}.png\"\n"));
    }
    let classifier = if stub {
        let gray = raster::ensure_grayscale(sign.image());
        let mean = sign.sign_mask().iter_set().map(|(y, x)| f64::from(gray.get(x, y, 0))).sum::<f64>()
            / sign.sign_mask().area() as f64;
        let ped = labels.iter().position(|l| l == "Ped. Crossing").expect("label");
        let quoted: Vec<String> = labels.iter().map(|l| format!("{l:?}")).collect();
        format!(
            "kind = \"stub\"\nthresholds = [{:.1}]\nband_classes = [{ped}, {stop}]\nclass_labels = [{}]\nramp = 16.0\n",
            (mean - 6.0).floor(),
            quoted.join(", ")
        )
    } else {
        let spec = ClassifierSpec::lisa_cnn(0);
        classifier::save_spec(&spec, dir.join("model.lcnn")).map_err(CliError::failed)?;
        "kind = \"weights\"\npath = \"model.lcnn\"\n".to_string()
    };
    let config = format!(
        "output_dir = \"out\"\n\n[classifier]\n{classifier}\n[attack]\ngrid_stride = 8\nseed = 0\n\n[[signs]]\nname = \"Stop\"\nimage = \"stop.png\"\nmask = \"stop_mask.pgm\"\nlabel = \"Stop\"\n{leaves}"
    );
    write_text(&dir.join("run.toml"), &config)?;
    say(out, format!("wrote demo assets to {}; run: leafadv attack --config {}", dir.display(), dir.join("run.toml").display()))
}
