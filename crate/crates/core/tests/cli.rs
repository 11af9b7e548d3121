use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rankone(args: &[&str], env_out: Option<&Path>, cwd: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rankone"));
    cmd.args(args).current_dir(cwd).env_remove("RANKONE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("RANKONE_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_MEAN_RATE: &str = "experiment = \"mean-rate\"\nn_steps = 2000\nbetas = [0.0, 0.5]\n\
[spectrum]\nfamily = \"power-law\"\nc = 0.4\np = 2.0\nd = 2000\n\
[check]\nwindow = [50.0, 2000.0]\nprobe_n_max = 20000\n";

const SMALL_SGD: &str = "experiment = \"sgd-rate\"\nseed = 5\nn_steps = 1000\nn_replicas = 16\n\
[spectrum]\nfamily = \"power-law\"\nc = 0.4\np = 2.0\nd = 30\n\
[check]\nwindow = [10.0, 1000.0]\nslack = 1.0\n";

#[test]
fn mean_rate_writes_all_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "m.toml", SMALL_MEAN_RATE);
    let out = tmp.path().join("out");
    let o = rankone(&["run", &cfg, "--out", out.to_str().unwrap()], None, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with("n,beta,mean,stderr,bound,replicas\n"));
    // two rows per recorded step, one per beta
    let rows: Vec<&str> = results.lines().skip(1).collect();
    assert_eq!(rows.len() % 2, 0);
    assert!(rows[0].starts_with("0,0.0000000000000000e0,"));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("rate exponent"));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("experiment = \"mean-rate\""));
    assert!(manifest.contains("version = \"0.1.0\""));
    assert!(manifest.contains("[config.spectrum]"));
}

#[test]
fn negative_step_size_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "experiment = \"mean-rate\"\ngamma = -1.0\n");
    let o = rankone(&["run", &cfg], None, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("γ > 0"), "{}", stderr(&o));
    assert!(!tmp.path().join("results").exists());
}

#[test]
fn parse_error_reports_location() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "experiment = \"mean-rate\"\n\nn_steps = [\n");
    let o = rankone(&["run", &cfg], None, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let cfg = write(tmp.path(), "unknown.toml", "experiment = \"warp-drive\"\n");
    assert_eq!(rankone(&["run", &cfg], None, tmp.path()).status.code(), Some(2));
    let missing = tmp.path().join("nope.toml");
    assert_eq!(rankone(&["run", missing.to_str().unwrap()], None, tmp.path()).status.code(), Some(2));
}

#[test]
fn env_var_sets_default_output_root() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "r.toml", "experiment = \"recursion\"\nsampler = \"coordinate-bounded\"\n");
    let root = tmp.path().join("envroot");
    let o = rankone(&["run", &cfg], Some(&root), tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(root.join("recursion").join("results.csv").exists());

    // without the variable the default is ./results/<experiment>
    let o = rankone(&["run", &cfg], None, tmp.path());
    assert!(o.status.success());
    assert!(tmp.path().join("results/recursion/results.csv").exists());

    // --out beats the variable
    let explicit = tmp.path().join("explicit");
    let o = rankone(&["run", &cfg, "--out", explicit.to_str().unwrap()], Some(&root), tmp.path());
    assert!(o.status.success());
    assert!(explicit.join("manifest.toml").exists());
}

#[test]
fn same_seed_same_bytes_and_seed_flag_changes_them() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SGD);
    let run = |name: &str, extra: &[&str]| {
        let dir = tmp.path().join(name);
        let mut args = vec!["run", cfg.as_str(), "--out", dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = rankone(&args, None, tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.join("results.csv")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    assert_eq!(a, b);
    let c = run("c", &["--seed", "6"]);
    assert_ne!(a, c);
}

#[test]
fn overrides_reach_the_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "s.toml", SMALL_SGD);
    let dir = tmp.path().join("o");
    let o = rankone(
        &["run", &cfg, "--out", dir.to_str().unwrap(), "--replicas", "8", "--steps", "500", "--seed", "42"],
        None,
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("n_replicas = 8"));
    assert!(manifest.contains("n_steps = 500"));
    assert!(manifest.contains("seed = 42"));
    let results = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(results.lines().nth(1).unwrap().ends_with(",8"));
}

#[test]
fn failing_check_exits_1_and_names_it() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "a.toml",
        "experiment = \"as-convergence\"\nn_steps = 2000\nn_replicas = 4\n[check]\nmartingale_replicas = 0\n",
    );
    let o = rankone(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("check failed: max final"), "{}", stderr(&o));
    // artifacts are still written
    assert!(tmp.path().join("o/manifest.toml").exists());
}

#[test]
fn divergence_exits_1_with_replica_indices() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "d.toml",
        "experiment = \"sgd-rate\"\nsampler = \"gff\"\ngamma = 50.0\nn_steps = 2000\nn_replicas = 3\n\
         [spectrum]\nfamily = \"power-law\"\nc = 0.4\np = 2.0\nd = 30\n",
    );
    let o = rankone(&["run", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None, tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("diverged replicas"), "{err}");
    assert!(err.contains("0@"), "{err}");
}

#[test]
fn plotdata_round_trip() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "m.toml", SMALL_MEAN_RATE);
    let out = tmp.path().join("m");
    assert!(rankone(&["run", &cfg, "--out", out.to_str().unwrap()], None, tmp.path()).status.success());
    let csv = out.join("results.csv");
    let o = rankone(&["plotdata", csv.to_str().unwrap()], None, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let plot = std::fs::read_to_string(out.join("results.plot.dat")).unwrap();
    assert!(plot.starts_with("# experiment: mean-rate\n# columns: log10_n log10_mean log10_bound\n"));
    let data: Vec<&str> = plot.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
    assert!(data.iter().all(|l| l.split_whitespace().count() == 3));
    // deterministic output
    let again = tmp.path().join("again.dat");
    let o = rankone(&["plotdata", csv.to_str().unwrap(), "--out", again.to_str().unwrap()], None, tmp.path());
    assert!(o.status.success());
    assert_eq!(std::fs::read(&again).unwrap(), plot.as_bytes());

    // stochastic runs carry a fourth SE column
    let cfg = write(tmp.path(), "s.toml", SMALL_SGD);
    let sdir = tmp.path().join("s");
    assert!(rankone(&["run", &cfg, "--out", sdir.to_str().unwrap()], None, tmp.path()).status.success());
    assert!(rankone(&["plotdata", sdir.join("results.csv").to_str().unwrap()], None, tmp.path()).status.success());
    let plot = std::fs::read_to_string(sdir.join("results.plot.dat")).unwrap();
    assert!(plot.contains("log10_se_halfwidth"));
    let first = plot.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first.split_whitespace().count(), 4);
}

#[test]
fn plotdata_rejects_empty_and_malformed_input() {
    let tmp = TempDir::new().unwrap();
    let empty = write(tmp.path(), "empty.csv", "");
    assert_eq!(rankone(&["plotdata", &empty], None, tmp.path()).status.code(), Some(2));
    let header_only = write(tmp.path(), "h.csv", "n,beta,mean,stderr,bound,replicas\n");
    assert_eq!(rankone(&["plotdata", &header_only], None, tmp.path()).status.code(), Some(2));
    let wrong = write(tmp.path(), "w.csv", "name,violations\nx,0\n");
    let o = rankone(&["plotdata", &wrong], None, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing columns"));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(rankone(&[], None, tmp.path()).status.code(), Some(2));
    assert_eq!(rankone(&["run"], None, tmp.path()).status.code(), Some(2));
    assert_eq!(rankone(&["run", "x.toml", "--seed", "abc"], None, tmp.path()).status.code(), Some(2));
}
