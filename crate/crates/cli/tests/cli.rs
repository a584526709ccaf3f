use std::path::PathBuf;
use std::process::{Command, Output};

use metafib::bounds::BoundsRow;
use serde_json::Value;

fn spec_file(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name);
    root.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metafib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Records of a csv stream, skipping `#` comment lines.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn column(text: &str, col: usize) -> Vec<String> {
    csv_rows(text).into_iter().map(|r| r[col].clone()).collect()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn generate_golden_tables() {
    let id = stdout(&["generate", "--kind", "identity", "--horizon", "9", "--format", "csv"]);
    assert!(id.starts_with("# metafib generate seed=0"));
    assert_eq!(column(&id, 2), ["1", "1", "2", "4", "8", "16", "32", "64", "128", "256"]);
    let eo = stdout(&["generate", "--spec", &spec_file("even-odd.json"), "--horizon", "9", "--format", "csv"]);
    assert_eq!(column(&eo, 2), ["1", "1", "2", "3", "7", "13", "27", "53", "107", "213"]);
    let ones = stdout(&["generate", "--kind", "constant", "--params", "value=1", "--horizon", "5", "--format", "csv"]);
    assert!(column(&ones, 2).iter().all(|b| b == "1"));
}

#[test]
fn generate_table_layout() {
    let text = stdout(&["generate", "--kind", "identity", "--horizon", "9"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# metafib generate seed=0 horizon=9");
    assert_eq!(lines[1].split_whitespace().collect::<Vec<_>>(), ["n", "r", "b"]);
    assert_eq!(lines[11].split_whitespace().collect::<Vec<_>>(), ["9", "9", "256"]);
}

#[test]
fn big_terms_in_full_decimal() {
    let text = stdout(&["generate", "--kind", "identity", "--horizon", "200", "--window", "200:200", "--format", "csv"]);
    let b = &column(&text, 2)[0];
    // 2^199
    assert_eq!(b, "803469022129495137770981046170581301261101496891396417650688");
}

#[test]
fn bounds_alternating_cases() {
    let text = stdout(&["bounds", "--kind", "alternating-2-3", "--horizon", "50", "--format", "csv"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 50);
    for row in rows.iter().filter(|r| r[0].parse::<usize>().unwrap() > 3) {
        let n: usize = row[0].parse().unwrap();
        let want = if n % 2 == 0 { "sub-doubling" } else { "exact-doubling" };
        assert_eq!(row[9], want, "n = {n}");
    }
    assert!(text.contains("# violations=0"));
}

#[test]
fn bounds_identity_and_constant() {
    let id = stdout(&["bounds", "--kind", "identity", "--horizon", "20", "--format", "csv"]);
    for row in csv_rows(&id).iter().skip(1) {
        assert_eq!((row[6].as_str(), row[7].as_str(), row[9].as_str()), ("2/1", "2/1", "exact-doubling"));
    }
    let one = stdout(&["bounds", "--kind", "constant", "--params", "value=1", "--horizon", "20", "--format", "csv"]);
    assert!(column(&one, 9).iter().all(|c| c == "flat"));
}

#[test]
fn bounds_csv_and_json_round_trip() {
    let csv_text = stdout(&["bounds", "--kind", "even-odd", "--horizon", "30", "--format", "csv"]);
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text.as_bytes());
    let from_csv: Vec<BoundsRow> = r.deserialize().map(|x| x.unwrap()).collect();
    let json_text = stdout(&["bounds", "--kind", "even-odd", "--horizon", "30", "--format", "json"]);
    let lines: Vec<&str> = json_text.lines().collect();
    let head: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(head["metafib"], "bounds");
    assert_eq!(head["seed"], 0);
    let from_json: Vec<BoundsRow> = lines[1..lines.len() - 1]
        .iter()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(from_csv, from_json);
    assert_eq!(from_csv.len(), 30);
    let summary: Value = serde_json::from_str(lines[lines.len() - 1]).unwrap();
    assert_eq!(summary["summary"]["violations"], 0);
}

#[test]
fn random_sweep_is_deterministic() {
    let args = ["bounds", "--random", "20", "--horizon", "80", "--seed", "11", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# metafib bounds seed=11 horizon=80 random=20"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[1] == "80" && r[2] == "0" && r[3] == "0"));
}

#[test]
fn classify_examples() {
    let fib = json_lines(&stdout(&["classify", "--kind", "fibonacci", "--horizon", "300", "--format", "json"]));
    assert_eq!(fib[0]["metafib"], "classify");
    assert_eq!(fib[1]["class"], "converges-to-alpha");
    assert_eq!(fib[1]["order"], 2);
    assert!((fib[1]["estimate"].as_f64().unwrap() - 1.618034).abs() < 1e-6);
    let towers = json_lines(&stdout(&["classify", "--kind", "towers", "--horizon", "2000", "--format", "json"]));
    assert_eq!(towers[1]["class"], "slow-growth");
    assert_eq!(towers[1]["regime"], "logarithmic");
    let alt = stdout(&["classify", "--kind", "alternating-2-3", "--horizon", "300"]);
    assert!(alt.lines().any(|l| l.starts_with("class") && l.ends_with("oscillating")));
}

#[test]
fn classify_rejects_short_horizon() {
    let out = run(&["classify", "--kind", "fibonacci", "--horizon", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon 50 too short"));
}

#[test]
fn compare_against_q_and_r_bonacci() {
    let text = stdout(&["compare", "--kind", "fibonacci", "--with", "hofstadter-q", "--horizon", "50", "--format", "csv"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().any(|r| r[6] == "false"), "Q should decrease somewhere");
    assert!(text.contains("# b_nondecreasing=true"));
    let decrease: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("# t_first_decrease="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(decrease <= 50);
    let same = stdout(&["compare", "--kind", "fibonacci", "--with", "r-bonacci:2", "--horizon", "40", "--format", "csv"]);
    assert!(same.contains("# identical_terms=true"));
    assert!(column(&same, 7).iter().all(|c| c == "true"));
}

#[test]
fn compare_conway_trend() {
    let text = stdout(&["compare", "--with", "conway", "--horizon", "10000", "--format", "csv"]);
    let approx: Vec<f64> = column(&text, 5).iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(approx.len(), 10000);
    let late = approx[5000..].iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let early = approx[10..100].iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    assert!(late < early && late < 0.05, "late {late}, early {early}");
    assert!(column(&text, 1).iter().all(|b| b.is_empty()));
}

#[test]
fn extend_examples() {
    let text = stdout(&[
        "extend", "--spec", &spec_file("tribonacci-unclamped.json"), "--init", "1,1,1", "--back", "5", "--horizon", "4",
        "--format", "csv",
    ]);
    let rows = csv_rows(&text);
    let at = |n: &str| rows.iter().find(|r| r[0] == n).map(|r| r[2].clone()).unwrap();
    assert_eq!(at("-4"), "-1/1");
    assert_eq!(at("0"), "3/1");
    assert!(text.contains("# m_r=3"));

    let ext = stdout(&["extend", "--kind", "alternating-2-3", "--init", "1", "--horizon", "30", "--window", "0:30", "--format", "csv"]);
    let gen = stdout(&["generate", "--kind", "alternating-2-3", "--horizon", "30", "--format", "csv"]);
    let beta: Vec<String> = column(&ext, 2).iter().map(|v| v.trim_end_matches("/1").to_string()).collect();
    assert_eq!(beta, column(&gen, 2));

    let zero = stdout(&["extend", "--kind", "constant", "--params", "value=2", "clamp=false", "--init", "0,0", "--format", "csv"]);
    assert!(column(&zero, 2).iter().all(|v| v == "0/1"));

    let shifted = stdout(&["extend", "--spec", &spec_file("shifted-by-two.json"), "--init", "1/2,-3", "--format", "json"]);
    let lines = json_lines(&shifted);
    assert_eq!(lines.last().unwrap()["summary"]["m_r"], 2);
    assert_eq!(lines.last().unwrap()["summary"]["recursion_failures"], 0);
}

#[test]
fn input_errors_exit_two() {
    let out = run(&["generate", "--spec", &spec_file("invalid-table.json"), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        String::from_utf8_lossy(&out.stderr).trim(),
        "error: sublinearity violated at n = 3: r(n) = 5 > n"
    );
    let arity = run(&["extend", "--kind", "constant", "--params", "value=3", "clamp=false", "--init", "1,1"]);
    assert_eq!(arity.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&arity.stderr).contains("expected 3 initial values, got 2"));
    let unknown = run(&["generate", "--kind", "wobbly"]);
    assert_eq!(unknown.status.code(), Some(2));
    let missing = run(&["generate"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_ratio = run(&["extend", "--kind", "fibonacci", "--init", "1/0"]);
    assert_eq!(bad_ratio.status.code(), Some(2));
    let past_table = run(&["generate", "--kind", "table", "--params", "values=1,1,2", "--horizon", "5"]);
    assert_eq!(past_table.status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["generate", "--kind", "even-odd", "--horizon", "60", "--format", "json"][..],
        &["classify", "--kind", "fibonacci", "--horizon", "200"][..],
        &["compare", "--with", "tak:1:3", "--horizon", "300", "--format", "csv"][..],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout);
    }
}
