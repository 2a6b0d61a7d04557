use std::path::PathBuf;
use std::process::{Command, Output};

fn hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn status(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hecke-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn plkl_writes_table() {
    let out = scratch("a1-5.json");
    let o = hecke(&["plkl", "--type", "A1~", "--ell", "5", "--bound", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["type"], "lkl");
    assert_eq!(v["ell"], 5);
    assert_eq!(v["bound"], 6);
}

#[test]
fn tilting_top_row_all_ones() {
    let o = hecke(&["tilting", "--type", "A1~", "--field", "Q", "--bound", "3", "--format", "csv"]);
    assert_eq!(status(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "w,0:,0:0,0:1,0:01,0:10,0:010,0:101");
    assert_eq!(rows[6], "0:010,1,1,1,1,1,1,0");
    assert_eq!(rows[7], "0:101,1,1,1,1,1,0,1");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(status(&hecke(&["plkl", "--ell", "4", "--bound", "3"])), 2);
    assert_eq!(status(&hecke(&["plkl", "--bound", "0"])), 2);
    assert_eq!(status(&hecke(&["plkl", "--type", "X9"])), 2);
    assert_eq!(status(&hecke(&["multside", "--level", "7"])), 2);
    assert_eq!(status(&hecke(&["verify", "--suite", "nope"])), 2);
    assert_eq!(status(&hecke(&["export"])), 2);
    assert_eq!(status(&hecke(&["nonsense"])), 2);
    // No valid realization of the simply connected rank-one datum in characteristic 2.
    assert_eq!(status(&hecke(&["plkl", "--type", "A1", "--ell", "2", "--bound", "2"])), 2);
}

#[test]
fn worker_count_from_env() {
    let run = |w: &str| {
        Command::new(env!("CARGO_BIN_EXE_hecke"))
            .args(["plkl", "--type", "A2~", "--ell", "3", "--bound", "3"])
            .env("HECKE_WORKERS", w)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(status(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(status(&run("zero")), 2);
}

#[test]
fn deterministic_bytes() {
    for args in [
        &["plkl", "--type", "A2~", "--ell", "2", "--bound", "4", "--format", "csv"][..],
        &["verify", "--suite", "lkl", "--type", "A1~", "--ell", "3", "--bound", "5", "--seed", "11"][..],
        &["multside", "--type", "A2", "--level", "1"][..],
    ] {
        let a = hecke(args);
        let b = hecke(args);
        assert_eq!(status(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn verify_examples_pass() {
    for args in [
        &["verify", "--suite", "weyl", "--type", "A2~", "--bound", "5"][..],
        &["verify", "--suite", "multside", "--type", "A1", "--ell", "7"][..],
        &["verify", "--suite", "hom-formula", "--type", "A1~", "--field", "Q", "--bound", "4"][..],
        &["verify", "--suite", "all", "--type", "A1~", "--ell", "5", "--bound", "4", "--level", "2"][..],
    ] {
        let o = hecke(args);
        assert_eq!(status(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let reports = v.as_array().cloned().unwrap_or_else(|| vec![v.clone()]);
        assert!(reports.iter().all(|r| r["pass"] == true));
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = scratch("job.conf");
    std::fs::write(&cfg, "# job\ntype = A2~\nell = 3\nbound = 2\nformat = csv\n").unwrap();
    let from_file = hecke(&["plkl", "--config", cfg.to_str().unwrap()]);
    assert_eq!(status(&from_file), 0);
    let text = String::from_utf8(from_file.stdout).unwrap();
    assert!(text.starts_with("# lkl A2 3 2\n"), "{text}");

    let flags = hecke(&["plkl", "--config", cfg.to_str().unwrap(), "--bound", "3", "--field", "Q"]);
    let text = String::from_utf8(flags.stdout).unwrap();
    assert!(text.starts_with("# lkl A2 rationals 3\n"), "{text}");

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(status(&hecke(&["plkl", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn export_round_trip_and_formats() {
    let csv = scratch("b2.csv");
    let o = hecke(&["plkl", "--type", "B2", "--ell", "3", "--bound", "4", "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json = scratch("b2.json");
    assert_eq!(status(&hecke(&["export", "--input", csv.to_str().unwrap(), "--out", json.to_str().unwrap()])), 0);
    let back = hecke(&["export", "--input", json.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(back.stdout, std::fs::read(&csv).unwrap());
    let tex = hecke(&["export", "--input", json.to_str().unwrap(), "--format", "latex"]);
    assert!(String::from_utf8(tex.stdout).unwrap().starts_with("\\begin{tabular}"));
    assert_eq!(status(&hecke(&["export", "--input", json.to_str().unwrap(), "--format", "xml"])), 2);
}

#[test]
fn export_empty_table_is_header_only() {
    let empty = scratch("empty.csv");
    std::fs::write(&empty, "# lkl A1 rationals 1\nw,y,poly\n").unwrap();
    let o = hecke(&["export", "--input", empty.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(status(&o), 0);
    assert_eq!(o.stdout, b"# lkl A1 rationals 1\nw,y,poly\n");
}

#[test]
fn weyl_listing_counts() {
    let o = hecke(&["weyl", "--type", "A2~", "--bound", "2", "--format", "csv"]);
    assert_eq!(status(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lens: Vec<usize> = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(lens, [0, 1, 1, 1, 2, 2, 2, 2, 2, 2]);
    assert!(lens.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn kl_matches_plkl_over_rationals() {
    let kl = hecke(&["kl", "--type", "A2~", "--bound", "4", "--format", "csv"]);
    let pl = hecke(&["plkl", "--type", "A2~", "--field", "Q", "--bound", "4", "--format", "csv"]);
    assert_eq!(status(&kl), 0);
    assert_eq!(kl.stdout, pl.stdout);
}
