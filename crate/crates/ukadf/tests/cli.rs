//! The `ukadf` binary end to end on small synthetic data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ukadf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ukadf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

const SMALL: &[&str] = &[
    "--tau", "4", "--batch", "16", "--lr", "1e-3", "--epochs", "3", "--k", "3", "--m", "4", "--seed", "1",
];

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let out = ukadf(&[
            "synth", "--stations", "4,3", "--steps", "300", "--out", dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn pretrain(&self) -> String {
        let mut args = vec!["pretrain", "--data"];
        let (data, art) = (self.p("mode0.csv"), self.p("a.ukadf"));
        args.extend([data.as_str(), "--out", art.as_str(), "--source-mode", "bus"]);
        args.extend(SMALL);
        let out = ukadf(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    }
}

fn with_small<'a>(mut args: Vec<&'a str>) -> Vec<&'a str> {
    args.extend(SMALL);
    args
}

#[test]
fn synth_writes_one_file_per_mode() {
    let f = Fixture::new();
    let text = fs::read_to_string(f.path("mode1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m1s0,m1s1,m1s2");
    assert_eq!(text.lines().count(), 301);
    assert!(!f.path("mode2.csv").exists());
}

#[test]
fn pretrain_adapt_and_report() {
    let f = Fixture::new();
    let text = f.pretrain();
    let checksum = value(&text, "checksum");
    assert_eq!(checksum.len(), 64);
    let bytes = fs::read(f.path("a.ukadf")).unwrap();
    assert!(String::from_utf8_lossy(&bytes).contains(&format!("checksum={checksum}")));

    let (data, art, rep, trace) = (f.p("mode1.csv"), f.p("a.ukadf"), f.p("rep"), f.p("t.csv"));
    let args = with_small(vec![
        "adapt", "--data", &data, "--pretrained", &art, "--gamma", "0.3", "--report", &rep, "--dump-trace-csv", &trace,
    ]);
    let out = ukadf(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "config.gamma"), "0.3");
    assert!(value(&text, "test.mae").parse::<f64>().unwrap() > 0.0);
    assert!(stderr(&out).contains("elapsed"));
    assert_eq!(fs::read_to_string(Path::new(&rep).join("report.txt")).unwrap(), text);
    let trace_text = fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.lines().next().unwrap(), "epoch,total,l1,l2,l3,val_loss");
    assert_eq!(trace_text.lines().count(), 4);

    let again = ukadf(&args);
    assert_eq!(stdout(&again), text, "reruns are identical");
}

#[test]
fn baselines_and_eval() {
    let f = Fixture::new();
    let (data, rep) = (f.p("mode1.csv"), f.p("ha"));
    let out = ukadf(&with_small(vec!["baseline", "--model", "ha", "--data", &data, "--report", &rep]));
    assert!(out.status.success(), "{}", stderr(&out));
    let mae = value(&stdout(&out), "test.mae").to_owned();

    let pred = Path::new(&rep).join("predictions.csv");
    let actual = Path::new(&rep).join("actuals.csv");
    let out = ukadf(&["eval", "--pred", pred.to_str().unwrap(), "--actual", actual.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let eval_mae: f64 = value(&stdout(&out), "mae").parse().unwrap();
    assert!((eval_mae - mae.parse::<f64>().unwrap()).abs() < 1e-9);

    let out = ukadf(&with_small(vec!["baseline", "--model", "unkadf", "--data", &data]));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: usage:"));
}

#[test]
fn correlate_reports_histogram() {
    let f = Fixture::new();
    let (a, b, m) = (f.p("mode0.csv"), f.p("mode1.csv"), f.p("corr.csv"));
    let out = ukadf(&["correlate", "--a", &a, "--b", &b, "--out", &m]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "pairs"), "12");
    assert_eq!(value(&text, "undefined"), "0");
    let counted: usize = text
        .lines()
        .filter(|l| l.starts_with("bin["))
        .map(|l| l.rsplit('=').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(counted, 12);
    assert_eq!(fs::read_to_string(&m).unwrap().lines().count(), 5);
}

#[test]
fn sweep_over_a_gamma_slice() {
    let f = Fixture::new();
    f.pretrain();
    let (data, art, rep) = (f.p("mode1.csv"), f.p("a.ukadf"), f.p("sweep"));
    let out = ukadf(&with_small(vec![
        "sweep", "--data", &data, "--pretrained", &art, "--gamma", "0.2:0.4:0.1", "--beta", "1", "--report", &rep,
    ]));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(value(&text, "runs"), "3");
    assert!(value(&text, "test_mae.std").parse::<f64>().unwrap().is_finite());
    assert!(Path::new(&rep).join("sweep.csv").exists());
}

#[test]
fn artifact_errors_exit_with_four() {
    let f = Fixture::new();
    f.pretrain();
    let mut bytes = fs::read(f.path("a.ukadf")).unwrap();
    let i = bytes.len() / 2;
    bytes[i] = if bytes[i] == b'1' { b'2' } else { b'1' };
    fs::write(f.path("bad.ukadf"), &bytes).unwrap();
    let (data, bad) = (f.p("mode1.csv"), f.p("bad.ukadf"));
    let out = ukadf(&with_small(vec!["adapt", "--data", &data, "--pretrained", &bad]));
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error: corruption:"), "{}", stderr(&out));

    let art = f.p("a.ukadf");
    let out = ukadf(&[
        "adapt", "--data", &data, "--pretrained", &art, "--tau", "4", "--epochs", "1", "--k", "3", "--m", "5",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error: incompatible-artifact:"));
}

#[test]
fn data_and_usage_errors() {
    let f = Fixture::new();
    fs::write(f.path("neg.csv"), "a,b\n1,2\n3,-1\n").unwrap();
    let neg = f.p("neg.csv");
    let out = ukadf(&with_small(vec!["baseline", "--model", "lstm", "--data", &neg]));
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let missing = f.p("nope.csv");
    let out = ukadf(&["baseline", "--model", "lstm", "--data", &missing]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error: io:"));

    let data = f.p("mode1.csv");
    let out = ukadf(&["baseline", "--model", "lstm", "--data", &data, "--split", "0.5:0.5:0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ukadf(&["baseline", "--model", "transformer", "--data", &data]);
    assert_eq!(out.status.code(), Some(2));
    let out = ukadf(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: usage:"));
    let out = ukadf(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("gradcheck"));
}

#[test]
fn gradcheck_passes() {
    let out = ukadf(&["gradcheck", "--seeds", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with(" ok")).count(), 5);
}
