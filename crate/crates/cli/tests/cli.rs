use std::path::PathBuf;
use std::process::{Command, Output};

fn treesic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treesic")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = treesic(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn header(args: &[&str]) -> String {
    stdout(args).lines().next().unwrap_or_default().to_string()
}

#[test]
fn subcommand_schemas() {
    let cases: [(&[&str], &str); 9] = [
        (&["cri", "--K", "2", "--n-max", "5"], "n,K,p,sic,method,L_n,T_n"),
        (&["bounds", "--K", "1"], "K,m,n_eval,alpha,beta,A,B"),
        (&["gated", "--K", "4"], "K,access,lambda_S,lambda_U,lambda_S_norm,lambda_U_norm,argmax_z"),
        (&["windowed", "--K", "1"], "K,access,lambda_S,lambda_U,lambda_S_norm,lambda_U_norm,argmax_z"),
        (
            &["simulate", "--K", "1", "--n", "20", "--trials", "50"],
            "n,K,d,p,sic,trials,seed,mean_slots,std_dev,ci95,throughput",
        ),
        (&["sensitivity", "--K", "1", "--z-max", "5"], "z,F,F_no_sic"),
        (&["simulate", "--K", "1", "--n", "5", "--trace"], "index,kind,count,depth"),
        (&["amplitude", "--K-max", "3"], "K,amplitude,phase,T_min,T_max"),
        (&["asym", "--K", "2", "--n", "100"], "n,K,L_n_asym,T_n_asym,L_n_no_sic_asym,T_n_no_sic_asym,amplitude"),
    ];
    for (args, want) in cases {
        assert_eq!(header(args), want, "{args:?}");
    }
    assert_eq!(
        header(&["simulate-windowed", "--K", "1", "--lambda", "0.5", "--delta", "2", "--windows", "100"]),
        "K,d,sic,lambda,delta,windows,seed,users,mean_cri,mean_wait,drift_per_window,drift_std_error,final_lag"
    );
}

#[test]
fn reproduce_schemas() {
    let cases: [(&str, &str); 5] = [
        ("table1", "K,m,n_eval,alpha,beta,A,B"),
        ("table2", "K,lambda_S_norm,lambda_U_norm"),
        ("fig-amplitude", "K,amplitude,phase,T_min,T_max"),
        ("fig-cri", "n,K,K_L_n,K_L_n_asym,K_L_n_no_sic"),
        ("fig-throughput", "n,K,T_n,T_n_asym,T_n_no_sic"),
    ];
    for (target, want) in cases {
        assert_eq!(header(&["reproduce", "--target", target]), want, "{target}");
    }
    let sim = "n,K,d,p,sic,trials,seed,mean_slots,std_dev,ci95,throughput";
    assert_eq!(header(&["reproduce", "--target", "fig-dary-mst", "--trials", "20"]), sim);
    assert_eq!(header(&["reproduce", "--target", "fig-dary-throughput", "--trials", "5"]), sim);
}

#[test]
fn reproduce_windowed_schemas() {
    assert_eq!(header(&["reproduce", "--target", "table3"]), "K,lambda_S_norm,lambda_U_norm,lambda_S_norm_no_sic");
    assert_eq!(header(&["reproduce", "--target", "fig-sensitivity"]), "K,z,F,F_no_sic");
}

#[test]
fn table2_row() {
    let out = stdout(&["reproduce", "--target", "table2"]);
    assert!(out.lines().any(|l| l == "32,0.6536,0.7378"), "{out}");
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn table1_row() {
    let out = stdout(&["reproduce", "--target", "table1"]);
    assert!(out.lines().any(|l| l == "1,50,100,1.4427,1.4427,0.6931,0.6931"), "{out}");
}

#[test]
fn cri_hand_values() {
    let out = stdout(&["cri", "--K", "1", "--n-max", "2", "--method", "auto"]);
    let rows: Vec<(String, String)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[5].to_string())
        })
        .collect();
    let want = [("0", "1"), ("1", "1"), ("2", "3")].map(|(a, b)| (a.to_string(), b.to_string()));
    assert_eq!(rows, want);
    for method in ["recursive", "closed", "series"] {
        let out = stdout(&["cri", "--K", "1", "--n-max", "3", "--method", method]);
        assert!(out.lines().last().unwrap().contains(",4.33333,"), "{method}: {out}");
    }
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--K", "1", "--d", "3", "--n", "1000", "--trials", "10000", "--seed", "42"];
    assert_eq!(treesic(&args).stdout, treesic(&args).stdout);
    let other = ["simulate", "--K", "1", "--d", "3", "--n", "1000", "--trials", "10000", "--seed", "43"];
    assert_ne!(treesic(&args).stdout, treesic(&other).stdout);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["simulate", "--K", "2", "--n", "300", "--trials", "3000", "--seed", "5"];
    let one = Command::new(env!("CARGO_BIN_EXE_treesic")).args(args).env("TREESIC_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_treesic")).args(args).env("TREESIC_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn json_keeps_column_order() {
    let out = stdout(&["gated", "--K", "32", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["K", "access", "lambda_S", "lambda_U", "lambda_S_norm", "lambda_U_norm", "argmax_z"]);
    assert!((v[0]["lambda_S_norm"].as_f64().unwrap() - 0.6536).abs() < 5e-4);
}

#[test]
fn exit_codes() {
    assert_eq!(treesic(&["cri", "--K", "1"]).status.code(), Some(1));
    assert_eq!(treesic(&["cri", "--K", "0", "--n-max", "3"]).status.code(), Some(1));
    assert_eq!(treesic(&["simulate", "--K", "1", "--d", "3", "--n", "4", "--p", "0.3"]).status.code(), Some(1));
    assert_eq!(
        treesic(&["cri", "--K", "1", "--n-max", "400", "--p", "0.3", "--method", "closed"]).status.code(),
        Some(2)
    );
    assert_eq!(treesic(&["--help"]).status.code(), Some(0));
    assert_eq!(treesic(&["--version"]).status.code(), Some(0));
}

#[test]
fn out_dir_and_gnuplot() {
    let dir: PathBuf = std::env::temp_dir().join(format!("treesic-cli-test-{}", std::process::id()));
    stdout(&["reproduce", "--target", "fig-amplitude", "--out-dir", dir.to_str().unwrap(), "--gnuplot"]);
    let csv = std::fs::read_to_string(dir.join("fig-amplitude.csv")).unwrap();
    assert_eq!(csv.lines().count(), 65);
    let gp = std::fs::read_to_string(dir.join("fig-amplitude.gp")).unwrap();
    assert!(gp.contains("'fig-amplitude.csv'"));
    assert_eq!(treesic(&["reproduce", "--target", "table2", "--gnuplot"]).status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}
