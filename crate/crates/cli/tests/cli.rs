use std::fs;
use std::process::Command;

fn cubemc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubemc"))
}

#[test]
fn synthetic_eval_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let status = cubemc()
        .args(["eval", "--input", "synthetic", "--face-size", "32", "--block-size", "16"])
        .args(["--synth-frames", "3", "--synth-velocity", "1,-1,0.5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("frame,bx,by,mode,mv_x_q2,mv_y_q2,sad_trans,sad_adv"));
    // 6 faces of 2x2 blocks, 2 predicted frames.
    assert_eq!(lines.count(), 2 * 24);
    let summary = fs::read_to_string(dir.path().join("report.summary.txt")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("mean_psnr_delta_y=")));
    assert!(String::from_utf8_lossy(&status.stdout).contains("advanced_fraction="));
}

#[test]
fn static_synthetic_has_zero_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("static.csv");
    let status = cubemc()
        .args(["eval", "--input", "synthetic", "--face-size", "32", "--synth-frames", "2"])
        .args(["--synth-velocity", "0,0,0", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let summary = fs::read_to_string(dir.path().join("static.summary.txt")).unwrap();
    assert!(summary.contains("mean_psnr_delta_y=0.000\n"));
    assert!(summary.contains("advanced_fraction=0.000\n"));
}

#[test]
fn file_input_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let yuv = dir.path().join("zeros.yuv");
    fs::write(&yuv, vec![0u8; 128 * 96 * 3 / 2 * 2]).unwrap();
    let out = dir.path().join("r.csv");
    let status = cubemc()
        .args(["eval", "--input"])
        .arg(&yuv)
        .args(["--width", "128", "--height", "96", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 24);
}

#[test]
fn config_errors_exit_with_2() {
    let bad_block = cubemc()
        .args(["eval", "--input", "synthetic", "--block-size", "8"])
        .status()
        .unwrap();
    assert_eq!(bad_block.code(), Some(2));
    let no_size = cubemc().args(["eval", "--input", "x.yuv"]).status().unwrap();
    assert_eq!(no_size.code(), Some(2));
    let bad_distance = cubemc()
        .args(["eval", "--input", "synthetic", "--ref-distance", "0"])
        .status()
        .unwrap();
    assert_eq!(bad_distance.code(), Some(2));
    let unknown_flag = cubemc().args(["eval", "--bogus"]).status().unwrap();
    assert_eq!(unknown_flag.code(), Some(2));
}

#[test]
fn io_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cubemc()
        .args(["eval", "--input"])
        .arg(dir.path().join("missing.yuv"))
        .args(["--width", "128", "--height", "96"])
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(3));
    let truncated = dir.path().join("short.yuv");
    fs::write(&truncated, vec![0u8; 1000]).unwrap();
    let short = cubemc()
        .args(["eval", "--input"])
        .arg(&truncated)
        .args(["--width", "128", "--height", "96"])
        .status()
        .unwrap();
    assert_eq!(short.code(), Some(3));
}

#[test]
fn velocity_needs_three_components() {
    let out = cubemc()
        .args(["eval", "--input", "synthetic", "--synth-velocity", "1,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_states_the_psnr_proxy() {
    let out = cubemc().args(["eval", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("BD-rate"), "{text}");
    assert!(text.contains("PSNR"));
}
