use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polar-ocbm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn construct_examples() {
    let out = stdout(&run(&["construct", "--n", "4", "--k", "2", "--method", "bec", "--eps", "0.5"]));
    assert_eq!(out, "m=2 k=2\n2 3\n");
    let out = stdout(&run(&["construct", "--n", "2", "--k", "1", "--method", "rm"]));
    assert_eq!(out, "m=1 k=1\n1\n");
}

#[test]
fn construct_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let info = dir.path().join("code.txt");
    let scores = dir.path().join("scores.csv");
    stdout(&run(&[
        "construct", "--m", "3", "--rate", "0.5", "--method", "bec", "--out", p(&info), "--scores", p(&scores),
    ]));
    assert_eq!(std::fs::read_to_string(&info).unwrap(), "m=3 k=4\n3 5 6 7\n");
    let csv = std::fs::read_to_string(&scores).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,score,selected");
    assert_eq!(lines[1], "0,0.996094,0");
    assert_eq!(lines[8], "7,0.00390625,1");
}

#[test]
fn encode_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let info = dir.path().join("code.txt");
    stdout(&run(&["construct", "--n", "16", "--k", "8", "--method", "dega", "--out", p(&info)]));
    for systematic in [false, true] {
        for (decoder, soft) in [("scd", "llr"), ("msd", "h"), ("msd", "llr"), ("scd", "h")] {
            let symbols = dir.path().join("symbols.txt");
            let mut args = vec!["encode", "--info-set", p(&info), "--data", "10110010", "--out", p(&symbols)];
            if systematic {
                args.push("--systematic");
            }
            stdout(&run(&args));
            let text = std::fs::read_to_string(&symbols).unwrap();
            let codeword = text.lines().find_map(|l| l.strip_prefix("# codeword: ")).unwrap().to_string();
            let values = dir.path().join("soft.txt");
            let scaled: String = text
                .lines()
                .map(|l| match l.parse::<f64>() {
                    Ok(x) if soft == "llr" => format!("{}\n", 8.0 * x),
                    Ok(x) => format!("{}\n", 0.9 * x),
                    Err(_) => format!("{l}\n"),
                })
                .collect();
            std::fs::write(&values, scaled).unwrap();
            let mut args = vec![
                "decode", "--info-set", p(&info), "--input", p(&values), "--decoder", decoder, "--soft", soft,
            ];
            if systematic {
                args.push("--systematic");
            }
            let out = stdout(&run(&args));
            assert!(out.contains("data=10110010\n"), "{out}");
            assert!(out.contains(&format!("codeword={codeword}\n")), "{out}");
        }
    }
}

#[test]
fn transfer_csv() {
    let out = stdout(&run(&["transfer", "--l0-min", "0", "--l0-max", "80", "--points", "3"]));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# map: "));
    assert_eq!(lines[1], "l0,lv_dega,lv_eqsnr,eqsnr_capped,dega_capped");
    assert_eq!(lines[2], "0,0,0,0,0");
    assert!(lines[4].starts_with("80,") && lines[4].ends_with(",1,0"));
}

#[test]
fn simulate_noiseless_and_deterministic() {
    let args = [
        "simulate", "--m", "7", "--k", "64", "--ebn0-db", "-1,0.5", "--blocks", "50", "--noiseless", "--decoder", "msd",
    ];
    let out = stdout(&run(&args));
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# cmd: "));
    assert!(lines[1].starts_with("# snr: "));
    assert_eq!(lines.len(), 5);
    for row in &lines[3..] {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(&f[8..12], &["0", "0", "0", "0"]);
    }
    assert_eq!(out, stdout(&run(&args)));
}

#[test]
fn invalid_flags_exit_with_code_2() {
    let cases: [(&[&str], &str); 6] = [
        (&["construct", "--n", "6", "--k", "2"], "--n"),
        (&["construct", "--n", "8", "--m", "3", "--k", "2"], "--m"),
        (&["construct", "--n", "8", "--k", "2", "--rate", "0.25"], "--rate"),
        (&["construct", "--n", "8", "--rate", "0.3"], "--rate"),
        (&["simulate", "--n", "8", "--k", "9", "--ebn0-db", "1"], "--k"),
        (&["construct", "--n", "8", "--k", "2", "--method", "bec", "--eps", "1.5"], "--eps"),
    ];
    for (args, flag) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{args:?}: {err}");
    }
    let out = run(&["simulate", "--n", "8", "--k", "4", "--ebn0-db", "1", "--blocks", "5", "--error-target", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_files() {
    let dir = tempfile::tempdir().unwrap();
    let info = dir.path().join("code.txt");
    std::fs::write(&info, "m=2 k=2\n2 3\n").unwrap();
    let soft = dir.path().join("soft.txt");
    std::fs::write(&soft, "1\n2\nx\n4\n").unwrap();
    let out = run(&["decode", "--info-set", p(&info), "--input", p(&soft)]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&soft, "1\n2\n3\n").unwrap();
    let out = run(&["decode", "--info-set", p(&info), "--input", p(&soft)]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["encode", "--info-set", p(&info), "--data", "101"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&info, "m=2 k=3\n2 3\n").unwrap();
    let out = run(&["encode", "--info-set", p(&info), "--data", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
