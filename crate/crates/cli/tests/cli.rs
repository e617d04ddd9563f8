use std::path::Path;
use std::process::{Command, Output};

use leafadv::raster::{self, BinaryMask, RasterImage};
use leafadv::synth::{shape_image, Shape};

fn leafadv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leafadv")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn blank_leaf_image_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("blank.png");
    raster::write_image(&RasterImage::filled(40, 40, &[255, 255, 255]).unwrap(), &img).unwrap();
    let o = leafadv(&["maskgen", "--image", p(&img)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("canny: no edges"), "{}", stderr(&o));
}

#[test]
fn maskgen_area_and_rerun_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let shape = Shape::Ellipse { cx: 64.0, cy: 64.0, a: 40.0, b: 24.0 };
    let (img, _) = shape_image(shape, 128, 128, [40, 90, 20], [255, 255, 255]);
    let src = dir.path().join("leaf.png");
    raster::write_image(&img, &src).unwrap();
    let o = leafadv(&["maskgen", "--image", p(&src)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = std::fs::read(dir.path().join("leaf_mask.pgm")).unwrap();
    let mask = raster::read_mask(dir.path().join("leaf_mask.pgm")).unwrap();
    let analytic = std::f64::consts::PI * 40.0 * 24.0;
    assert!((mask.area() as f64 - analytic).abs() / analytic < 0.10, "area {}", mask.area());

    let again = dir.path().join("again.pgm");
    assert!(leafadv(&["maskgen", "--image", p(&src), "--out", p(&again)]).status.success());
    assert_eq!(first, std::fs::read(&again).unwrap());
}

fn write_config(dir: &Path, classifier: &str, sign_mask: &BinaryMask) -> std::path::PathBuf {
    let sign = RasterImage::filled(sign_mask.width(), sign_mask.height(), &[200, 20, 30]).unwrap();
    raster::write_image(&sign, dir.join("sign.png")).unwrap();
    raster::write_mask(sign_mask, dir.join("sign.pgm")).unwrap();
    let leaf = leafadv::synth::leaf(leafadv::LeafSpecies::Oak, 40).unwrap();
    raster::write_image(leaf.image(), dir.join("oak.png")).unwrap();
    raster::write_mask(leaf.mask(), dir.join("oak.pgm")).unwrap();
    let text = format!(
        "output_dir = \"out\"\n[classifier]\n{classifier}\n[[signs]]\nname = \"Sign\"\nimage = \"sign.png\"\nmask = \"sign.pgm\"\nlabel = 0\n[[leaves]]\nspecies = \"oak\"\nimage = \"oak.png\"\nmask = \"oak.pgm\"\n"
    );
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const STUB: &str = "kind = \"stub\"\nthresholds = [100.0]\nband_classes = [1, 0]\nclass_labels = [\"a\", \"b\"]\nramp = 50.0\n";

#[test]
fn corrupt_weights_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.lcnn"), b"LCNN but not really").unwrap();
    let cfg = write_config(dir.path(), "kind = \"weights\"\npath = \"bad.lcnn\"\n", &BinaryMask::full(32, 32));
    let o = leafadv(&["attack", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = leafadv(&["classify", "--image", p(&dir.path().join("sign.png")), "--weights", p(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn no_fitting_placement_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let checker = BinaryMask::from_fn(32, 32, |x, y| (x + y) % 2 == 0);
    let cfg = write_config(dir.path(), STUB, &checker);
    let o = leafadv(&["attack", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(dir.path().join("out/sign_oak.report.json").is_file());
}

#[test]
fn bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "output_dir = 3\n").unwrap();
    assert_eq!(leafadv(&["attack", "--config", p(&cfg)]).status.code(), Some(1));
}

#[test]
fn compare_reference_fixture() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/edge_metrics_tables.json");
    let o = leafadv(&["compare", "--reference", p(&fixture)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 18);
    assert!(lines[0].starts_with("Adversarial Image,"));
    assert!(lines[16].starts_with("Average All Successful,2283.60,"));
    assert!(lines[17].starts_with("Average All Unsuccessful,3585.20,"));
}

#[test]
fn metrics_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let (clean, _) = shape_image(Shape::Square { cx: 32.0, cy: 32.0, side: 30.0 }, 64, 64, [220, 220, 220], [20, 20, 20]);
    let mut occluded = clean.clone();
    for y in 20..30 {
        for x in 20..30 {
            occluded.pixel_mut(x, y).copy_from_slice(&[40, 90, 20]);
        }
    }
    raster::write_image(&clean, dir.path().join("clean.png")).unwrap();
    raster::write_image(&occluded, dir.path().join("adv.png")).unwrap();
    for (name, row) in [("clean", "Clean"), ("adv", "Occluded")] {
        let img = dir.path().join(format!("{name}.png"));
        let out = dir.path().join(format!("{name}.json"));
        let o = leafadv(&["metrics", "--image", p(&img), "--name", row, "--out", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv_out = leafadv(&["metrics", "--image", p(&dir.path().join("clean.png")), "--format", "csv"]);
    assert_eq!(String::from_utf8(csv_out.stdout).unwrap().lines().count(), 2);

    let adv = format!("{}:S", p(&dir.path().join("adv.json")));
    let o = leafadv(&["compare", "--base", p(&dir.path().join("clean.json")), "--adv", &adv]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("Occluded (S),"), "{text}");
    assert!(text.contains("Average All Successful"));
}

#[test]
fn attack_outputs_reclassify_and_report() {
    let dir = tempfile::tempdir().unwrap();
    assert!(leafadv(&["demo", "--dir", p(dir.path()), "--stub"]).status.success());
    let cfg = dir.path().join("run.toml");
    let o = leafadv(&["attack", "--config", p(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");

    for leaf in ["maple", "oak", "poplar"] {
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("stop_{leaf}.report.json"))).unwrap()).unwrap();
        let png = out.join(format!("stop_{leaf}.png"));
        let o = leafadv(&["classify", "--image", p(&png), "--config", p(&cfg), "--sign", "Stop"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let got: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(got["predicted_name"], report["best"]["predicted_name"]);
        assert_eq!(got["confidence_percent"], report["best"]["confidence_percent"]);
    }

    let o = leafadv(&["report", "--dir", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(out.join("summary.csv")).unwrap());
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 10);
}

#[test]
fn init_model_round_trips_through_classify() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.lcnn");
    assert!(leafadv(&["init-model", "--out", p(&model), "--seed", "3"]).status.success());
    let img = dir.path().join("x.png");
    raster::write_image(&RasterImage::filled(20, 20, &[10, 200, 30]).unwrap(), &img).unwrap();
    let o = leafadv(&["classify", "--image", p(&img), "--weights", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["probabilities"].as_array().unwrap().len(), 16);
    let total: f64 = v["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
