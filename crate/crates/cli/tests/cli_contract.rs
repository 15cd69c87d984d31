use drift_core::enhance::{read_tmaps, GainBounds};
use drift_core::image::io::{read_any, read_lfr, write_lfr};
use drift_core::scene::synthetic_hdr;
use std::path::Path;
use std::process::{Command, Output};

fn drift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drift")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn scene(dir: &Path) -> String {
    let path = p(dir, "scene.lfr");
    write_lfr(&synthetic_hdr(128, 96, 2).unwrap(), &path).unwrap();
    path
}

#[test]
fn help_lists_every_subcommand() {
    let out = drift(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for sub in ["synth", "fuse", "reference", "tonemap", "eval", "serve", "oracle-maps"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn synth_from_ground_truth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let gt = scene(dir.path());
    let run = |out: &str, seed: &str| {
        let o = drift(&["--seed", seed, "synth", "--gt", &gt, "--sigma-read", "0.02", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    let (a, b, c) = (p(dir.path(), "a"), p(dir.path(), "b"), p(dir.path(), "c"));
    run(&a, "4");
    run(&b, "4");
    run(&c, "5");
    let f = |d: &str, i: usize| std::fs::read(format!("{d}/frame_{i:02}.lfr")).unwrap();
    assert_eq!(f(&a, 3), f(&b, 3));
    assert_ne!(f(&a, 3), f(&c, 3));
    let frame = read_lfr(format!("{a}/frame_00.lfr")).unwrap();
    assert_eq!((frame.dims(), frame.channels()), ((128, 96), 1));
    assert_eq!(std::fs::read_dir(&a).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("frame_")).count(), 11);
}

#[test]
fn tonemap_outputs_and_seam_report() {
    let dir = tempfile::tempdir().unwrap();
    let hdr = scene(dir.path());
    let out_lfr = p(dir.path(), "t.lfr");
    let o = drift(&["tonemap", "--in", &hdr, "--out", &out_lfr, "--tiles", "2x2", "--overlap", "16", "--check-seams"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("seam_energy") && line.contains("relative"), "{line}");
    let img = read_lfr(&out_lfr).unwrap();
    assert_eq!(img.dims(), (128, 96));
    // float output keeps more than 8-bit precision
    assert!(img.data().iter().any(|&v| ((v * 255.0) - (v * 255.0).round()).abs() > 1e-3));

    let o = drift(&["tonemap", "--in", &hdr, "--output", "base"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("scene.png").exists());
}

#[test]
fn oracle_maps_files_load_with_default_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let hdr = scene(dir.path());
    let maps = p(dir.path(), "m.tmaps");
    let viz = p(dir.path(), "viz");
    let o = drift(&["oracle-maps", "--in", &hdr, "--out", &maps, "--viz", &viz]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_tmaps(&maps, GainBounds::default()).unwrap().dims(), (128, 96));
    assert!(std::fs::read_dir(&viz).unwrap().count() >= 4);
    let o = drift(&["tonemap", "--in", &hdr, "--maps", &maps, "--out", &p(dir.path(), "o.png")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn eval_reports_requested_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let hdr = scene(dir.path());
    let (a, b) = (p(dir.path(), "a.png"), p(dir.path(), "b.png"));
    assert_eq!(code(&drift(&["reference", "--in", &hdr, "--out", &a])), 0);
    assert_eq!(code(&drift(&["tonemap", "--in", &hdr, "--out", &b, "--maps-from", "oracle", "--output", "base"])), 0);
    let o = drift(&["eval", "--a", &a, "--b", &b, "--metrics", "psnr,l1", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["psnr"].as_f64().unwrap() > 40.0);
    assert!(v["l1"].as_f64().unwrap() < 0.01);
    assert!(v.get("ssim").is_none());
    let same = drift(&["eval", "--a", &a, "--b", &a]);
    assert!(stdout(&same).contains("psnr 100"), "{}", stdout(&same));
    assert_eq!(read_any(&a).unwrap().dims(), (128, 96));
}

#[test]
fn fuse_with_estimated_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let hdr = synthetic_hdr(128, 96, 3).unwrap();
    let (ev0, evm, out) = (p(dir.path(), "ev0.lfr"), p(dir.path(), "evm.lfr"), p(dir.path(), "f.lfr"));
    write_lfr(&hdr.map(|v| v.min(1.0)), &ev0).unwrap();
    write_lfr(&hdr.map(|v| (v * 0.125).min(1.0)), &evm).unwrap();
    let o = drift(&["fuse", "--ev0", &ev0, "--evm", &evm, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fused = read_lfr(&out).unwrap();
    assert!(fused.max_value() > 1.0, "highlights should exceed EV0 clipping");
    assert_eq!(code(&drift(&["fuse", "--ev0", &ev0, "--evm", &evm, "--tau", "2", "--out", &out])), 1);
}

#[test]
fn presets_apply_and_refuse_silent_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let hdr = scene(dir.path());
    let presets = p(dir.path(), "presets");
    let profile = p(dir.path(), "p.toml");
    std::fs::write(&profile, "strength = 0.0\n").unwrap();
    let (a, b, c) = (p(dir.path(), "a.png"), p(dir.path(), "b.png"), p(dir.path(), "c.png"));
    let o = drift(&["tonemap", "--in", &hdr, "--profile", &profile, "--out", &a, "--preset-dir", &presets, "--save-preset", "flat"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = drift(&["tonemap", "--in", &hdr, "--preset", "flat", "--out", &b, "--preset-dir", &presets]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // strength 0 is the unenhanced fusion
    assert_eq!(code(&drift(&["tonemap", "--in", &hdr, "--output", "base", "--out", &c])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let again = drift(&["tonemap", "--in", &hdr, "--profile", &profile, "--out", &a, "--preset-dir", &presets, "--save-preset", "flat"]);
    assert_eq!(code(&again), 1);
    assert!(stderr(&again).contains("already exists"));
    let forced = drift(&[
        "tonemap", "--in", &hdr, "--out", &a, "--preset-dir", &presets, "--save-preset", "flat", "--force",
    ]);
    assert_eq!(code(&forced), 0, "{}", stderr(&forced));
    assert_eq!(code(&drift(&["tonemap", "--in", &hdr, "--profile", &profile, "--preset", "flat"])), 2);
}

#[test]
fn malformed_inputs_exit_1_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let junk = p(dir.path(), "junk.lfr");
    std::fs::write(&junk, b"LFR1 not really").unwrap();
    let o = drift(&["tonemap", "--in", &junk]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
    let bad_cfg = p(dir.path(), "c.toml");
    std::fs::write(&bad_cfg, "[lite]\nnot_a_key = 1\n").unwrap();
    let hdr = scene(dir.path());
    assert_eq!(code(&drift(&["reference", "--in", &hdr, "--config", &bad_cfg, "--out", &p(dir.path(), "r.png")])), 1);
    assert_eq!(code(&drift(&["serve", "--check", "--addr", "not-an-addr"])), 2);
    assert_eq!(code(&drift(&["tonemap", "--in", &hdr, "--tiles", "0x4"])), 2);
}
