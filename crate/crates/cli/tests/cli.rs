use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsbox::boxes::{builtin, parse_box, AnyBox};
use nsbox::wiring::apply_wiring;

const FEEDBACK: &str = "bp=B|AC order=C,A alpha=2 beta=4 gamma=170";

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn nsbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsbox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn fixtures_match_builtins() {
    for (file, name) in [
        ("class03.box", "class3"),
        ("class04.box", "class4"),
        ("class44.box", "class44"),
        ("pr.box", "pr"),
        ("uniform2.box", "uniform2"),
        ("uniform3.box", "uniform3"),
        ("deterministic.box", "deterministic(1,2,3)"),
    ] {
        let text = fs::read_to_string(fixture(file)).unwrap();
        assert_eq!(text, builtin(name).unwrap().to_string(), "{file}");
    }
}

#[test]
fn validate_reports_and_exit_codes() {
    let out = nsbox(&["validate", &fixture("class04.box")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "valid box3\n");

    let dir = tempfile::tempdir().unwrap();
    let signalling = dir.path().join("s.box");
    fs::write(
        &signalling,
        "box2\n0 0 | 0 0 = 1\n0 0 | 0 1 = 1\n0 0 | 1 0 = 1\n1 1 | 1 1 = 1\n",
    )
    .unwrap();
    let out = nsbox(&["validate", signalling.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("party B signals"));

    let garbled = dir.path().join("g.box");
    fs::write(&garbled, "box2\n0 0 | 0 0 1\n").unwrap();
    assert_eq!(code(&nsbox(&["validate", garbled.to_str().unwrap()])), 2);
    assert_eq!(code(&nsbox(&["validate", "/no/such/file.box"])), 2);
    assert_eq!(code(&nsbox(&["validate", "builtin:class44"])), 0);
}

#[test]
fn eval_examples() {
    let eval = |file: &str, f: &str| {
        let out = nsbox(&["eval", &fixture(file), "--functional", f]);
        assert_eq!(code(&out), 0, "{file} {f}");
        stdout(&out)
    };
    assert_eq!(eval("class04.box", "k"), "-1\n");
    assert_eq!(eval("uniform2.box", "chsh-max"), "0\n");
    assert_eq!(eval("pr.box", "uffink"), "8\n");
    assert_eq!(eval("pr.box", "chsh"), "4\n");
    assert_eq!(
        eval("class04.box", "gyni"),
        "value = 1/4\nbound = 1/4\nno violation\n"
    );
    // Arity mismatch is a usage error.
    assert_eq!(
        code(&nsbox(&["eval", &fixture("pr.box"), "--functional", "k"])),
        2
    );
}

#[test]
fn eval_gyni_with_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.txt");
    let lines: String = (0..8)
        .map(|x| format!("{} {} {} = 1/8\n", x >> 2, (x >> 1) & 1, x & 1))
        .collect();
    fs::write(&q, lines).unwrap();
    let out = nsbox(&[
        "eval",
        &fixture("class04.box"),
        "--functional",
        "gyni",
        "--q",
        q.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).ends_with("no violation\n"));

    fs::write(&q, "0 0 0 = 1/2\n").unwrap();
    let out = nsbox(&[
        "eval",
        &fixture("class04.box"),
        "--functional",
        "gyni",
        "--q",
        q.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wire_summary_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("eff.box");
    let out = nsbox(&[
        "wire",
        &fixture("class03.box"),
        "--wiring",
        FEEDBACK,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "chsh_max = 3, uffink_max = 5, IC violated (CHSH)\n"
    );

    let written = parse_box(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let class3 = builtin("class3").unwrap();
    let expected = apply_wiring(class3.as_box3().unwrap(), &FEEDBACK.parse().unwrap()).unwrap();
    assert_eq!(written, AnyBox::Two(expected));

    let to_stdout = nsbox(&["wire", &fixture("class03.box"), "--wiring", FEEDBACK]);
    assert_eq!(
        stdout(&to_stdout),
        format!(
            "{}chsh_max = 3, uffink_max = 5, IC violated (CHSH)\n",
            written
        )
    );
}

#[test]
fn wire_uniform_and_bad_encodings() {
    let out = nsbox(&["wire", &fixture("uniform3.box"), "--wiring", FEEDBACK]);
    assert!(stdout(&out).ends_with("chsh_max = 0, uffink_max = 0, no witness\n"));
    for bad in [
        "bp=A|BC",
        "bp=A|BC order=B,C alpha=4 beta=0 gamma=0",
        "nonsense",
    ] {
        let out = nsbox(&["wire", &fixture("class03.box"), "--wiring", bad]);
        assert_eq!(code(&out), 2, "{bad}");
    }
}

#[test]
fn search_class4_and_determinism() {
    let args = ["search", &fixture("class04.box")];
    let first = nsbox(&args);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).ends_with("chsh_max = 2, uffink_max = 4, no witness\n"));
    assert_eq!(first.stdout, nsbox(&args).stdout);

    let out = nsbox(&[
        "search",
        &fixture("class44.box"),
        "--functional",
        "chsh-max",
    ]);
    assert!(stdout(&out).ends_with("chsh_max = 4\n"));
}

fn membership(file: &str, extra: &[&str], cert: &Path) -> Output {
    let mut args = vec!["membership", file];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--certificate", cert.to_str().unwrap()]);
    nsbox(&args)
}

#[test]
fn membership_examples_write_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let cert: PathBuf = dir.path().join("c.cert");

    let out = membership(
        &fixture("class04.box"),
        &["--model", "tobl", "--bipartition", "A|BC"],
        &cert,
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("feasible\n"));
    assert!(fs::read_to_string(&cert).unwrap().starts_with("feasible\n"));

    let out = membership(&fixture("class44.box"), &["--model", "local"], &cert);
    assert!(stdout(&out).starts_with("infeasible\n"));
    assert!(fs::read_to_string(&cert)
        .unwrap()
        .starts_with("infeasible\n"));

    let out = membership(&fixture("deterministic.box"), &["--model", "local"], &cert);
    assert!(stdout(&out).starts_with("feasible\n"));

    let out = membership(&fixture("pr.box"), &["--model", "ns"], &cert);
    assert!(stdout(&out).starts_with("feasible\n"));

    let out = membership(&fixture("class04.box"), &["--model", "tobl"], &cert);
    assert_eq!(code(&out), 2);
}

#[test]
fn membership_default_certificate_path() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("det.box");
    fs::copy(fixture("deterministic.box"), &input).unwrap();
    let out = nsbox(&["membership", input.to_str().unwrap(), "--model", "local"]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("det.box.local.cert").is_file());
}

#[test]
fn table1_builtin_rows() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["class03.box", "class04.box", "class44.box"] {
        fs::copy(fixture(f), dir.path().join(f)).unwrap();
    }
    let out = nsbox(&["table1", "--boxes", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "class\twiring\tchsh\tuffink\tpaper_chsh\tpaper_uffink\tflag"
    );
    assert_eq!(lines[1], format!("3\t{FEEDBACK}\t3\t5\t3\t5\tok"));
    assert_eq!(lines[2], "4\tsearch\t2\t4\t-\t-\tno-violation");
    assert_eq!(
        lines[3],
        "44\tbp=A|BC order=B,C alpha=2 beta=15 gamma=102\t4\t8\t4\t8\tok"
    );
    assert_eq!(lines.len(), 4);
}

#[test]
fn table1_empty_missing_and_exceeding() {
    let dir = tempfile::tempdir().unwrap();
    let out = nsbox(&["table1", "--boxes", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1);

    assert_eq!(code(&nsbox(&["table1", "--boxes", "/no/such/dir"])), 2);

    // A user box for an unwired row whose search beats the listed values.
    fs::copy(fixture("class44.box"), dir.path().join("class01.box")).unwrap();
    let out = nsbox(&["table1", "--boxes", dir.path().to_str().unwrap()]);
    assert_eq!(
        stdout(&out).lines().nth(1),
        Some("1\tsearch\t4\t8\t-\t-\t>")
    );
}
