//! End-to-end run of the command-line workflow inside a temporary directory:
//! simulate a CSV, cross-validate, then fit at lambda_1se.

use lpd_lasso::cli::main_with_args;

fn main() {
    let dir = std::env::temp_dir().join("lpd-lasso-fit-csv");
    let d = dir.to_str().expect("utf-8 temp path");
    let data = format!("{d}/data.csv");
    let lambda = format!("{d}/lambda.json");
    let steps: [Vec<&str>; 3] = [
        vec!["simulate", "--n", "150", "--p", "40", "--sparsity", "0.1", "--seed", "3", "--out-dir", d],
        vec!["cv", "--input", &data, "--response-col", "y", "--grid-points", "30", "--out-dir", d],
        vec!["fit", "--input", &data, "--response-col", "y", "--lambda-from", &lambda, "--out-dir", d],
    ];
    for args in steps {
        let code = main_with_args(std::iter::once("lpd-lasso").chain(args.iter().copied()));
        assert_eq!(code, 0, "step {args:?} failed");
    }
    for file in ["lambda.json", "coefficients.csv", "diagnostics.json"] {
        println!("== {file}");
        print!("{}", std::fs::read_to_string(dir.join(file)).expect("output exists"));
    }
}
