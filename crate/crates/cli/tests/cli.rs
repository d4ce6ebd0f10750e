use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hers");

fn hers(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two flat halves with a soft gradient, as a binary PPM.
fn write_ppm(path: &Path, h: usize, w: usize) {
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    for r in 0..h {
        for c in 0..w {
            let px = if c < w / 2 { [200, 40, 40] } else { [30, 60, 180] };
            bytes.extend(px.map(|v: u8| v.saturating_add((r % 3) as u8)));
        }
    }
    fs::write(path, bytes).unwrap();
}

fn write_aff8(path: &Path, h: u32, w: u32, value: f32) {
    let mut bytes = b"AFF8".to_vec();
    for v in [h, w, 0] {
        bytes.extend(v.to_le_bytes());
    }
    for _ in 0..8 * h * w {
        bytes.extend(value.to_le_bytes());
    }
    fs::write(path, bytes).unwrap();
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.ppm");
    write_ppm(&img, 12, 16);
    (dir, img)
}

#[test]
fn segment_writes_labels_hierarchy_and_overlays() {
    let (dir, img) = setup();
    let out = dir.path().join("d");
    let o = hers(&["segment", "--image", s(&img), "--affinity", "gaussian", "--k", "20,40", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["a_k20.pgm", "a_k40.pgm", "a.hrs1", "a_k20_overlay.png", "a_k40_overlay.png"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    assert!(o.stdout.is_empty());
}

#[test]
fn segment_is_byte_identical_across_runs() {
    let (dir, img) = setup();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = hers(&["segment", "--image", s(&img), "--k", "7", "--out", s(out), "--labels-format", "csv"]);
        assert!(o.status.success());
    }
    for name in ["a_k7.csv", "a.hrs1", "a_k7_overlay.png"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let seq = dir.path().join("seq");
    assert!(hers(&["segment", "--image", s(&img), "--k", "7", "--out", s(&seq), "--sequential"]).status.success());
    assert_eq!(fs::read(a.join("a.hrs1")).unwrap(), fs::read(seq.join("a.hrs1")).unwrap());
}

#[test]
fn affinity_file_without_image_skips_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let aff = dir.path().join("a.aff8");
    write_aff8(&aff, 6, 5, 0.5);
    let out = dir.path().join("d");
    let o = hers(&["segment", "--affinity-file", s(&aff), "--k", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("a_k3.pgm").exists());
    assert!(!out.join("a_k3_overlay.png").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn argument_errors() {
    let (dir, img) = setup();
    let out = dir.path().join("d");
    let o = hers(&["segment", "--image", s(&img), "--k", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[argument]"));

    let o = hers(&["segment", "--image", s(&img), "--k", "100000", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let aff = dir.path().join("a.aff8");
    write_aff8(&aff, 12, 16, 0.5);
    let o = hers(&["segment", "--affinity-file", s(&aff), "--channel-perm", "0,0,2,3,4,5,6,7", "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = hers(&["segment", "--affinity-file", s(&aff), "--channel-perm", "7,6,5,4,3,2,1,0", "--k", "3", "--out", s(&out)]);
    assert!(o.status.success());
}

#[test]
fn io_and_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = hers(&["segment", "--image", s(&dir.path().join("missing.png")), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[io]"));

    let bad = dir.path().join("bad.aff8");
    fs::write(&bad, b"XFF8\0\0\0\0").unwrap();
    let o = hers(&["segment", "--affinity-file", s(&bad), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));

    let zero = dir.path().join("zero.aff8");
    write_aff8(&zero, 3, 3, 0.0);
    let o = hers(&["segment", "--affinity-file", s(&zero), "--k", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn extract_replays_stored_hierarchy() {
    let (dir, img) = setup();
    let out = dir.path().join("d");
    assert!(hers(&["segment", "--image", s(&img), "--k", "10", "--out", s(&out)]).status.success());
    let hrs = out.join("a.hrs1");

    let x1 = dir.path().join("x1");
    let x2 = dir.path().join("x2");
    for x in [&x1, &x2] {
        let o = hers(&["extract", "--hierarchy", s(&hrs), "--k", "10,192", "--width", "16", "--out", s(x), "--labels-format", "csv"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(x1.join("a_k10.csv")).unwrap(), fs::read(x2.join("a_k10.csv")).unwrap());

    // k = node count is the identity labeling
    let identity = fs::read_to_string(x1.join("a_k192.csv")).unwrap();
    let values: Vec<u32> = identity
        .lines()
        .flat_map(|l| l.split(',').map(|v| v.parse().unwrap()))
        .collect();
    assert_eq!(values, (0..192).collect::<Vec<_>>());

    // matches the labels written by segment
    let o = hers(&["extract", "--hierarchy", s(&hrs), "--k", "10", "--width", "16", "--out", s(&x1)]);
    assert!(o.status.success());
    assert_eq!(fs::read(x1.join("a_k10.pgm")).unwrap(), fs::read(out.join("a_k10.pgm")).unwrap());

    let o = hers(&["extract", "--hierarchy", s(&hrs), "--k", "10", "--width", "5", "--out", s(&x1)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_prints_and_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.csv");
    let seg = dir.path().join("seg.csv");
    fs::write(&gt, "0,0\n1,1\n").unwrap();
    fs::write(&seg, "3,3\n3,3\n").unwrap();
    let o = hers(&["eval", "--gt", s(&gt), "--seg", s(&seg), "--tolerance", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "image,k,asa,br,ev,tolerance\nseg,1,0.500000,0.000000,,1\n");

    let img = dir.path().join("img.ppm");
    let mut bytes = b"P6\n2 2\n255\n".to_vec();
    bytes.extend([0u8, 0, 0, 0, 0, 0, 255, 255, 255, 255, 255, 255]);
    fs::write(&img, bytes).unwrap();
    let report = dir.path().join("r.csv");
    for _ in 0..2 {
        let o = hers(&["eval", "--gt", s(&gt), "--seg", s(&gt), "--image", s(&img), "--out", s(&report)]);
        assert!(o.status.success());
    }
    let rows = fs::read_to_string(&report).unwrap();
    assert_eq!(
        rows,
        "image,k,asa,br,ev,tolerance\ngt,2,1.000000,1.000000,1.000000,2\ngt,2,1.000000,1.000000,1.000000,2\n"
    );

    let other = dir.path().join("other.csv");
    fs::write(&other, "0,0,0\n").unwrap();
    assert_eq!(hers(&["eval", "--gt", s(&gt), "--seg", s(&other)]).status.code(), Some(2));
}

fn csv_rows(out: &Output) -> Vec<(String, String, f64)> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn bench_reports_phases() {
    let (_dir, img) = setup();
    let o = hers(&["bench", "--image", s(&img), "--k", "10,20,30", "--solver", "hers"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("phase,k,millis\n"));
    let rows = csv_rows(&o);
    assert_eq!(rows[0].0, "build");
    assert_eq!(rows.iter().filter(|r| r.0 == "extract").count(), 3);
    let cumulative: Vec<f64> = rows.iter().filter(|r| r.0 == "cumulative").map(|r| r.2).collect();
    assert!(cumulative.windows(2).all(|w| w[0] <= w[1]));

    let o = hers(&["bench", "--image", s(&img), "--k", "10,20", "--solver", "lazy"]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows.iter().filter(|r| r.0 == "segment").count(), 2);

    let o = hers(&["bench", "--image", s(&img), "--k", "", "--solver", "hers"]);
    assert_eq!(o.status.code(), Some(2));
}
