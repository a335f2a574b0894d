//! End-to-end tests of the `veripatch` binary: exit codes, JSON document
//! shapes (validated against the schemas in `docs/schemas/`), dataset
//! layout, and determinism.

mod schema;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ABS_BUGGY: &str = "\
method abs(x: int) returns (res: int)
  ensures x >= 0 ==> res == x
  ensures x < 0 ==> res == -x
{
  if (x >= 0) {
    return x;
  } else {
    return x*1;
  }
}
";

const ABS_FIXED: &str = "\
method abs(x: int) returns (res: int)
  ensures x >= 0 ==> res == x
  ensures x < 0 ==> res == -x
{
  if (x >= 0) {
    return x;
  } else {
    return -x;
  }
}
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_veripatch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn validate(value: &serde_json::Value, schema_file: &str) {
    let text = std::fs::read_to_string(schema_dir().join(schema_file)).expect("schema file");
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    if let Err(errors) = schema::validate(value, &schema) {
        panic!("{schema_file} violations: {errors:?}");
    }
}

fn write_tmp(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn verify_exit_codes_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let fixed = write_tmp(dir.path(), "abs_fixed.dfy", ABS_FIXED);
    let buggy = write_tmp(dir.path(), "abs_buggy.dfy", ABS_BUGGY);
    let broken = write_tmp(dir.path(), "broken.dfy", "method { nope");

    let out = run(&["verify", fixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    validate(&doc, "verify.schema.json");
    assert_eq!(doc["verified"], true);

    let out = run(&["verify", buggy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    validate(&doc, "verify.schema.json");
    assert_eq!(doc["verified"], false);
    let failing: Vec<u32> = doc["methods"][0]["entailments"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] == "Invalid")
        .map(|e| e["id"].as_u64().unwrap() as u32)
        .collect();
    assert_eq!(failing, vec![3]);

    let out = run(&["verify", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn localize_reports_the_buggy_line() {
    let dir = tempfile::tempdir().unwrap();
    let buggy = write_tmp(dir.path(), "abs_buggy.dfy", ABS_BUGGY);
    let out = run(&["localize", buggy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "localization itself succeeded");
    let doc = stdout_json(&out);
    validate(&doc, "localize.schema.json");
    assert_eq!(doc["reports"][0]["lines"][0]["line"], 8);

    // A verified program gives an empty report, still exit 0.
    let fixed = write_tmp(dir.path(), "abs_fixed.dfy", ABS_FIXED);
    let out = run(&["localize", fixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert!(doc["reports"][0]["lines"].as_array().unwrap().is_empty());

    // Unsupported constructs are input errors.
    let ghost = write_tmp(dir.path(), "ghost.dfy", "ghost method m() { }");
    let out = run(&["localize", ghost.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost"));
}

#[test]
fn mutate_builds_the_dataset_tree() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    std::fs::create_dir(&src).unwrap();
    write_tmp(&src, "abs.dfy", ABS_FIXED);
    write_tmp(
        &src,
        "bool_id.dfy",
        "method bool_id(a: bool) returns (r: bool)\n  ensures r == a\n{\n  r := a;\n}\n",
    );
    write_tmp(
        &src,
        "broken_source.dfy",
        "method nope() returns (r: int)\n  ensures r == 1\n{\n  r := 2;\n}\n",
    );
    let out_dir = dir.path().join("dataset");

    let out = run(&[
        "mutate",
        src.to_str().unwrap(),
        out_dir.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    validate(&doc, "mutate.schema.json");
    assert_eq!(doc["sources"], 3);
    assert_eq!(doc["verified"], 2);
    assert_eq!(doc["skipped_unverified"][0], "broken_source");
    assert_eq!(doc["no_sites"], 1);

    for sub in [
        "Correct_Code",
        "Bugs_Code/Hints",
        "Bugs_Code/Mutations",
        "All_Bugs_Code",
        "Fail_Bugs_Code",
    ] {
        assert!(out_dir.join(sub).is_dir(), "{sub} missing");
    }
    // The boolean-only program lands in the failure set.
    assert!(out_dir.join("Fail_Bugs_Code/bool_id.dfy").is_file());
    // Hints and Mutations hold identically named twins.
    let names = |sub: &str| -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(out_dir.join(sub))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    let hints = names("Bugs_Code/Hints");
    assert!(!hints.is_empty());
    assert_eq!(hints, names("Bugs_Code/Mutations"));
    assert_eq!(hints, names("All_Bugs_Code"));
    // Hints differ from Mutations only by the marker.
    for name in &hints {
        let h = std::fs::read_to_string(out_dir.join("Bugs_Code/Hints").join(name)).unwrap();
        let m = std::fs::read_to_string(out_dir.join("Bugs_Code/Mutations").join(name)).unwrap();
        assert_eq!(h.replace(" //buggy line", ""), m);
        assert_eq!(h.matches("//buggy line").count(), 1);
    }

    // Same seed, byte-identical tree.
    let out_dir2 = dir.path().join("dataset2");
    let out = run(&[
        "mutate",
        src.to_str().unwrap(),
        out_dir2.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in &hints {
        let a = std::fs::read(out_dir.join("Bugs_Code/Hints").join(name)).unwrap();
        let b = std::fs::read(out_dir2.join("Bugs_Code/Hints").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across identically seeded runs");
    }
}

#[test]
fn repair_fixes_the_marked_line() {
    let dir = tempfile::tempdir().unwrap();
    // The prompt-style variant: sign toggle repairs it on attempt 1.
    let buggy = ABS_BUGGY.replace("return x*1;", "return x;");
    let file = write_tmp(dir.path(), "abs.dfy", &buggy);
    let out_dir = dir.path().join("out");

    let out = run(&[
        "repair",
        file.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    validate(&doc, "repair.schema.json");
    assert_eq!(doc["outcome"]["status"], "Fixed");
    assert_eq!(doc["outcome"]["validated_patches"][0]["line"], 8);
    assert_eq!(doc["outcome"]["validated_patches"][0]["text"], "return -x;");
    // The human-readable line goes to stderr; the patched file verifies.
    assert!(String::from_utf8_lossy(&out.stderr).contains("fixed line 8: return -x;"));
    let fixed = out_dir.join("abs.fixed.dfy");
    assert!(fixed.is_file());
    let out = run(&["verify", fixed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("abs.transcript.jsonl").is_file());
}

#[test]
fn unfixable_repair_exits_one_with_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let src = "\
method off(x: int) returns (r: int)
  ensures r == x + 90
{
  r := x + 3;
}
";
    let file = write_tmp(dir.path(), "off.dfy", src);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "repair",
        file.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    validate(&doc, "repair.schema.json");
    assert_eq!(doc["outcome"]["status"], "Unfixable");
    let transcript = std::fs::read_to_string(out_dir.join("off.transcript.jsonl")).unwrap();
    assert!(transcript.lines().count() >= 1);
}

#[test]
fn repair_of_verified_file_is_a_noop() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_tmp(dir.path(), "abs.dfy", ABS_FIXED);
    let out = run(&["repair", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["already_verified"], true);
}

#[test]
fn remote_model_without_api_key_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_tmp(dir.path(), "abs.dfy", ABS_BUGGY);
    let out = bin()
        .args([
            "repair",
            file.to_str().unwrap(),
            "--model-name",
            "gpt-4o-mini",
            "--model-url",
            "http://127.0.0.1:1",
        ])
        .env_remove("VERIPATCH_API_KEY")
        .env_remove("OPENAI_API_KEY")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("API key"), "stderr: {stderr}");
}

fn build_mini_dataset(dir: &Path) -> PathBuf {
    let src = dir.join("src");
    std::fs::create_dir(&src).unwrap();
    write_tmp(&src, "abs.dfy", ABS_FIXED);
    write_tmp(
        &src,
        "double_linear.dfy",
        "method double_linear(a: int, b: int) returns (r: int)\n  ensures r == a + a - b\n{\n  r := 2 * a - b;\n}\n",
    );
    let dataset = dir.join("dataset");
    let out = run(&[
        "mutate",
        src.to_str().unwrap(),
        dataset.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    dataset
}

#[test]
fn eval_writes_metrics_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = build_mini_dataset(dir.path());
    let out = run(&["eval", dataset.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("Model"), "table missing: {table}");
    assert!(table.contains("mock"));

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dataset.join("metrics.json")).unwrap())
            .unwrap();
    validate(&metrics, "metrics.schema.json");
    assert!(metrics["total"].as_u64().unwrap() >= 4);
    assert_eq!(metrics["discarded"], 0);
    assert!(dataset.join("metrics.csv").is_file());

    // Per-program records parse and satisfy the record schema. Every
    // operator-flip mutant must be repaired by the mock stream.
    let repair_dir = dataset.join("Repair/mock");
    let mut checked = 0;
    for entry in std::fs::read_dir(&repair_dir).unwrap() {
        let path = entry.unwrap().path();
        let record: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        validate(&record, "record.schema.json");
        if record["name"].as_str().unwrap().contains("__op_l") {
            assert_eq!(
                record["outcome"]["status"], "Fixed",
                "flip mutant {} must be repaired",
                record["name"]
            );
        }
        checked += 1;
    }
    assert!(checked >= 4);
}

#[test]
fn eval_cross_check_reports_no_disagreements() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = build_mini_dataset(dir.path());
    let out = run(&["eval", dataset.to_str().unwrap(), "--backend", "both"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dataset.join("backend_disagreements.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc, serde_json::json!([]), "disagreement report must be empty");
}

#[test]
fn eval_of_empty_dataset_warns_and_zeroes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("Bugs_Code/Mutations")).unwrap();
    std::fs::create_dir_all(dir.path().join("Bugs_Code/Hints")).unwrap();
    let out = run(&["eval", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["total"], 0);
    assert_eq!(metrics["success_pct"], 0.0);
}

#[test]
fn eval_missing_layout_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["eval", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
