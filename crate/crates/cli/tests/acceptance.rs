//! CLI acceptance: byte-identical outputs across repeated invocations of all
//! four commands, schema validity of the JSON reports, and the exit-code
//! contract.

use std::process::{Command, Output};

use serde_json::Value;

fn dircomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dircomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden_invocations() -> Vec<Vec<&'static str>> {
    vec![
        vec!["analyze", "s + 1 - 2^(-s)"],
        vec!["analyze", "3/4 + 1/8*2^(-s)"],
        vec![
            "compare",
            "s + 1 - 2^(-s)",
            "s + 1 - 3^(-s)",
            "--estimator-k",
            "2000",
        ],
        vec![
            "lincomb",
            "1",
            "s + 1 - 2^(-s)",
            "-1",
            "s + 1 - 3^(-s)",
        ],
        vec![
            "kernels",
            "--family",
            "partial-d:1",
            "--path",
            "radial",
            "--k-start",
            "1",
            "--k-end",
            "100",
        ],
        vec![
            "kernels",
            "--family",
            "partial-q:2",
            "--path",
            "slanted",
            "--m",
            "50",
            "--k-start",
            "1",
            "--k-end",
            "20",
            "--symbols",
            "s + 1 - 2^(-s)",
            "s + 1 - 3^(-s)",
        ],
    ]
}

/// Criterion 10: repeated invocations produce byte-identical outputs.
#[test]
fn criterion_10_cli_determinism() {
    for args in golden_invocations() {
        let first = dircomp(&args);
        assert!(
            first.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&first.stderr)
        );
        let second = dircomp(&args);
        assert_eq!(
            first.stdout, second.stdout,
            "outputs differ for {args:?}"
        );
        assert!(!first.stdout.is_empty());
    }
    println!("ACCEPT crit-10 PASS: all golden invocations are byte-identical across runs");
}

/// Minimal JSON-schema checker covering the subset the published schema
/// uses: $ref, type, enum, required, properties, items, minItems, maxItems,
/// oneOf.
fn validate(schema: &Value, root: &Value, instance: &Value) -> Result<(), String> {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        let path = reference.trim_start_matches("#/");
        let mut target = root;
        for part in path.split('/') {
            target = target
                .get(part)
                .ok_or_else(|| format!("dangling $ref {reference}"))?;
        }
        return validate(target, root, instance);
    }
    if let Some(one_of) = schema.get("oneOf").and_then(Value::as_array) {
        let hits = one_of
            .iter()
            .filter(|sub| validate(sub, root, instance).is_ok())
            .count();
        if hits != 1 {
            return Err(format!("oneOf matched {hits} variants"));
        }
        return Ok(());
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{instance} not in enum"));
        }
    }
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "number" => instance.is_number(),
            "integer" => instance.is_i64() || instance.is_u64(),
            "boolean" => instance.is_boolean(),
            "null" => instance.is_null(),
            other => return Err(format!("unknown type {other}")),
        };
        if !ok {
            return Err(format!("expected {ty}, got {instance}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        let obj = instance.as_object().ok_or("required on non-object")?;
        for key in required {
            let key = key.as_str().expect("string key");
            if !obj.contains_key(key) {
                return Err(format!("missing required key {key}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = instance.as_object() {
            for (key, sub) in props {
                if let Some(value) = obj.get(key) {
                    validate(sub, root, value).map_err(|e| format!("{key}: {e}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = instance.as_array() {
            if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
                if (arr.len() as u64) < min {
                    return Err("too few items".into());
                }
            }
            if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
                if (arr.len() as u64) > max {
                    return Err("too many items".into());
                }
            }
            for (i, item) in arr.iter().enumerate() {
                validate(items, root, item).map_err(|e| format!("[{i}]: {e}"))?;
            }
        }
    }
    Ok(())
}

#[test]
fn reports_validate_against_published_schema() {
    let schema: Value = serde_json::from_str(include_str!("../../../docs/report.schema.json"))
        .expect("schema parses");
    for args in golden_invocations() {
        if args[0] == "kernels" {
            continue;
        }
        let out = dircomp(&args);
        assert!(out.status.success());
        let report: Value = serde_json::from_slice(&out.stdout).expect("json output");
        validate(&schema, &schema, &report)
            .unwrap_or_else(|e| panic!("schema violation for {args:?}: {e}"));
    }
}

#[test]
fn exit_code_contract() {
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["analyze", "s + ("], 2),
        (vec!["analyze", "1 - 2^(-s)"], 3),
        (
            vec![
                "analyze",
                "s + 7 - 2^(-s) - 3^(-s) - 5^(-s) - 7^(-s) - 11^(-s) - 13^(-s) - 17^(-s)",
            ],
            4,
        ),
        (
            vec!["lincomb", "1", "s + 1 - 2^(-s)", "1", "s + 1 - 2^(-s)"],
            5,
        ),
        (
            vec!["lincomb", "0", "s + 1 - 2^(-s)", "1", "s + 1 - 3^(-s)"],
            5,
        ),
        (
            vec![
                "kernels",
                "--family",
                "single-prime:2",
                "--k-start",
                "1",
                "--k-end",
                "3",
                "--symbols",
                "s + 1 - 2^(-s)",
                "s + 1 - 3^(-s)",
            ],
            6,
        ),
    ];
    for (args, expected) in cases {
        let out = dircomp(&args);
        assert_eq!(
            out.status.code(),
            Some(expected),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn parse_errors_carry_positions() {
    let out = dircomp(&["analyze", "s + ("]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:"), "no position in `{err}`");
}

#[test]
fn empty_kernel_range_gives_header_only_csv() {
    let out = dircomp(&[
        "kernels", "--family", "partial-d:1", "--k-start", "5", "--k-end", "4",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "k,re_s,norm_sq,ratio\n");
}

#[test]
fn kernel_ratio_converges_to_the_blowup_constant() {
    let out = dircomp(&[
        "kernels", "--family", "partial-d:1", "--k-start", "100000", "--k-end", "100000",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text.lines().last().unwrap();
    let ratio: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((ratio - 1.0 / (2.0 * std::f64::consts::LN_2)).abs() < 1e-4);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join("dircomp-test-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("analyze.json");
    let piped = dircomp(&["analyze", "s + 1 - 2^(-s)"]);
    let _ = dircomp(&[
        "analyze",
        "s + 1 - 2^(-s)",
        "--out",
        path.to_str().unwrap(),
    ]);
    let written = std::fs::read(&path).unwrap();
    assert_eq!(piped.stdout, written);
}
