use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rbacv_core::prover::check_emission;
use rbacv_core::report::Report;
use rbacv_core::{check, parse_constraints, parse_policy, Status};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn rbacv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbacv"))
        .args(args)
        .env_remove("RBACV_PROVER_PATH")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn policy() -> String {
    fixture("university.policy").to_str().unwrap().to_string()
}

#[test]
fn separation_violation_exits_one_and_names_david() {
    let dir = tempfile::tempdir().unwrap();
    let cs = write(
        dir.path(),
        "c2",
        "sod-roles { Instructor Secretary Student }\n",
    );
    let o = rbacv(&["check", &policy(), &cs]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("(David, Instructor, Student)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn role_coverage_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cs = write(dir.path(), "c3", "role-coverage\n");
    let o = rbacv(&["check", &policy(), &cs]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("overall: satisfied"));
}

#[test]
fn missing_policy_exits_two() {
    let cs = fixture("university.constraints");
    let o = rbacv(&["check", "/no/such/file.policy", cs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cs = write(
        dir.path(),
        "bad.constraints",
        "role-coverage\nmin-users REC1 0\n",
    );
    let o = rbacv(&["check", &policy(), &cs]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.constraints:2:16"), "{err}");
    assert!(err.contains('^'), "{err}");
}

#[test]
fn json_report_round_trips() {
    let cs_path = fixture("university.constraints");
    let o = rbacv(&[
        "check",
        &policy(),
        cs_path.to_str().unwrap(),
        "--format",
        "json",
        "--no-timing",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let report: Report = serde_json::from_str(&stdout(&o)).unwrap();
    let p = parse_policy(&std::fs::read_to_string(fixture("university.policy")).unwrap()).unwrap();
    let cs = parse_constraints(&std::fs::read_to_string(&cs_path).unwrap(), &p).unwrap();
    let closed = p.close();
    assert_eq!(report.results.len(), cs.len());
    assert_eq!(report.overall, Status::Violated);
    assert_eq!(report.elapsed_ms, None);
    for (r, c) in report.results.iter().zip(&cs) {
        let direct = check(&closed, c).unwrap();
        assert_eq!(r, &direct);
    }
    assert_eq!(report.policy_summary.access_pairs, 14);
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let cs = fixture("university.constraints");
    for format in ["text", "json"] {
        let args = [
            "check",
            &policy(),
            cs.to_str().unwrap(),
            "--format",
            format,
            "--no-timing",
        ];
        assert_eq!(rbacv(&args).stdout, rbacv(&args).stdout);
    }
    let timed = rbacv(&["check", &policy(), cs.to_str().unwrap()]);
    assert!(stdout(&timed).contains("elapsed:"));
}

#[test]
fn witnesses_are_truncated_unless_requested() {
    let dir = tempfile::tempdir().unwrap();
    let users: Vec<String> = (0..12).map(|i| format!("P{i:02}")).collect();
    let mut text = format!("users {}\nroles A B C\n", users.join(" "));
    for u in &users {
        for r in ["A", "B", "C"] {
            text.push_str(&format!("assign {u} {r}\n"));
        }
    }
    let pol = write(dir.path(), "p", &text);
    let cs = write(dir.path(), "c", "sod-roles { A B C }\n");
    let count = |o: &Output| stdout(o).matches("witness:").count();
    let short = rbacv(&["check", &pol, &cs, "--no-timing"]);
    assert_eq!(count(&short), 10);
    assert!(stdout(&short).contains("36 violating tuple(s) in total"));
    let full = rbacv(&["check", &pol, &cs, "--no-timing", "--all-witnesses"]);
    assert_eq!(count(&full), 36);
    assert_eq!(full.status.code(), Some(1));
}

#[test]
fn emit_writes_files_and_manifest() {
    let cs = fixture("university.constraints");
    for mode in ["enumerate", "complete"] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let o = rbacv(&[
            "emit",
            &policy(),
            cs.to_str().unwrap(),
            "--mode",
            mode,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let manifest = std::fs::read_to_string(out.join("manifest.tsv")).unwrap();
        let rows: Vec<&str> = manifest.lines().collect();
        assert_eq!(rows[0], "file\tconstraint\tpolarity");
        assert_eq!(rows.len(), 15);
        assert_eq!(
            rows[2],
            "02-sod-roles.in\tsod-roles { Instructor Secretary Student }\tnegative"
        );
        assert_eq!(rows[3], "03-role-coverage.in\trole-coverage\tpositive");
        for row in &rows[1..] {
            let file = row.split('\t').next().unwrap();
            let text = std::fs::read_to_string(out.join(file)).unwrap();
            check_emission(&text).unwrap_or_else(|e| panic!("{file}: {e}"));
        }
        if mode == "enumerate" {
            let c1 = std::fs::read_to_string(out.join("01-prerequisite.in")).unwrap();
            assert!(c1.contains("x=James -> Has_Role(x,Instructor)."), "{c1}");
        }
    }
}

#[test]
fn emit_with_empty_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let cs = write(dir.path(), "empty", "# nothing\n");
    let out = dir.path().join("out");
    let o = rbacv(&["emit", &policy(), &cs, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = std::fs::read_to_string(out.join("manifest.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 1);
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn oracle_diff_exit_codes() {
    let ok = rbacv(&["oracle-diff", "--seed", "42", "--cases", "500"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("0 disagreement(s)"));

    let bad = rbacv(&["oracle-diff", "--seed", "42", "--cases", "100", "--mutant"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    assert!(text.contains("minimized reproducer"), "{text}");
    assert!(text.contains("sod-roles"), "{text}");

    let json = rbacv(&[
        "oracle-diff",
        "--cases",
        "100",
        "--mutant",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert!(v["disagreements"].as_u64().unwrap() > 0);
    assert!(v["minimized"]["policy"]
        .as_str()
        .unwrap()
        .contains("implies"));

    assert_eq!(
        rbacv(&["oracle-diff", "--cases", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn via_prover_needs_a_binary() {
    let cs = fixture("university.constraints");
    let o = rbacv(&["check", &policy(), cs.to_str().unwrap(), "--via-prover"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("RBACV_PROVER_PATH"));
}

#[cfg(unix)]
#[test]
fn via_prover_reports_each_verdict() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("fake-prover");
    std::fs::write(&bin, "#!/bin/sh\necho 'THEOREM PROVED'\n").unwrap();
    std::fs::set_permissions(&bin, std::fs::Permissions::from_mode(0o755)).unwrap();
    let cs = write(
        dir.path(),
        "c",
        "role-coverage\nsod-roles { Instructor Secretary Student }\nuser-coverage\n",
    );
    let o = rbacv(&[
        "check",
        &policy(),
        &cs,
        "--via-prover",
        "--prover",
        bin.to_str().unwrap(),
        "--no-timing",
    ]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert_eq!(text.matches("prover C").count(), 3, "{text}");
    assert!(
        text.contains("prover C3 role-coverage: Proved -> satisfied, agrees"),
        "{text}"
    );
    assert!(
        text.contains(
            "prover C2 sod-roles { Instructor Secretary Student }: Proved -> violated, agrees"
        ),
        "{text}"
    );

    let o = rbacv(&[
        "check",
        &policy(),
        &cs,
        "--via-prover",
        "--prover",
        bin.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["prover"].as_array().unwrap().len(), 3);
    assert_eq!(v["prover"][0]["outcome"], "proved");
    assert_eq!(v["prover"][0]["agrees"], true);
}
