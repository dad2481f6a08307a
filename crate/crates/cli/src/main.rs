mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use steerlearn::pipeline::{
    class_errors, compare_runs, content_hash, generate_balanced_dataset, msplit_runs, werner_sweep,
    write_comparison_csv, write_msplit_csv, write_werner_csv, ExperimentConfig, InputDigest,
    Manifest, NOT_APPLICABLE,
};
use steerlearn::qstate::TwoQubitState;
use steerlearn::s4vm::{s4vm_predict, S4vmParams};
use steerlearn::steering::{label_state, SdpSettings, WitnessDump};
use steerlearn::svm::{grid_search, train, Dataset, GridSpec, SvmParams};
use steerlearn::LabelVector;

/// Steering detection with SDP labels and safe semi-supervised SVMs.
#[derive(Parser, Serialize)]
#[command(name = "steerlearn", version, arg_required_else_help = true)]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Directory for output files and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat `key = value` file supplying flags not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Balanced SDP-labeled dataset of random states, as CSV on stdout.
    Gen {
        /// Number of states; half of each label.
        #[arg(long)]
        n: usize,
        /// Measurement settings per SDP trial.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[command(flatten)]
        sdp: SdpArgs,
    },
    /// SDP label of a state file: -1 steerable, +1 otherwise.
    Label {
        /// State JSON with `rho_re` and `rho_im` 4×4 arrays.
        #[arg(long)]
        state: PathBuf,
        /// Measurement settings per SDP trial.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[command(flatten)]
        sdp: SdpArgs,
    },
    /// Train an RBF SVM; grid search when C or gamma is omitted.
    TrainSvm {
        /// Training CSV with header `t11,...,t33,label`.
        #[arg(long)]
        data: PathBuf,
        /// Box bound C.
        #[arg(long)]
        c: Option<f64>,
        /// RBF width gamma.
        #[arg(long)]
        gamma: Option<f64>,
        /// Print predicted labels for this CSV instead of the model.
        #[arg(long)]
        predict: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Label an unlabeled CSV with S4VM; its label column is ignored.
    S4vm {
        /// Labeled training CSV.
        #[arg(long)]
        labeled: PathBuf,
        /// CSV of points to label.
        #[arg(long)]
        unlabeled: PathBuf,
        /// Labeled-data bound C1 (grid searched when omitted).
        #[arg(long)]
        c1: Option<f64>,
        /// RBF width gamma (grid searched when omitted).
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        s4vm: S4vmArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// SVM against incremental S4VM over repeated labeled draws.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Per-class errors, of two label files or of a fresh comparison.
    ClassErrors {
        /// Dataset CSV whose label column holds the predictions.
        #[arg(long, requires = "truth")]
        predicted: Option<PathBuf>,
        /// Dataset CSV whose label column holds the truth.
        #[arg(long, requires = "predicted")]
        truth: Option<PathBuf>,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Werner-state sweep with analytic ground truth.
    Werner {
        /// Labeled random states.
        #[arg(long, default_value_t = 30)]
        l: usize,
        /// Werner angle xi in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8)]
        xi: f64,
        /// Sweep points p = k/(points − 1).
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Measurement settings per SDP trial.
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Unlabeled chunk count M.
        #[arg(long, default_value_t = 1)]
        splits: usize,
        #[command(flatten)]
        s4vm: S4vmArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sdp: SdpArgs,
    },
    /// Incremental S4VM error and wall-clock per split count.
    Msplit {
        /// Comma-separated split counts M to compare.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        split_counts: Vec<usize>,
        #[command(flatten)]
        exp: ExperimentArgs,
    },
}

#[derive(Args, Serialize)]
struct SdpArgs {
    /// Random measurement sets tried per state.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Interior-point duality-gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    sdp_tolerance: f64,
    /// Interior-point iteration cap.
    #[arg(long, default_value_t = 200)]
    sdp_max_iterations: usize,
    /// Objective below which a witness certifies steering.
    #[arg(long, default_value_t = -1e-6, allow_negative_numbers = true)]
    steer_threshold: f64,
}

impl SdpArgs {
    fn settings(&self) -> Result<SdpSettings> {
        let s = SdpSettings {
            tolerance: self.sdp_tolerance,
            max_iterations: self.sdp_max_iterations,
            steerable_threshold: self.steer_threshold,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Serialize)]
struct GridArgs {
    /// Comma-separated C grid (default 2^-5, 2^-3, ..., 2^15).
    #[arg(long, value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    /// Comma-separated gamma grid (default 2^-15, 2^-13, ..., 2^3).
    #[arg(long, value_delimiter = ',')]
    gamma_values: Option<Vec<f64>>,
    /// Cross-validation folds (capped at the labeled count).
    #[arg(long, default_value_t = 10)]
    folds: usize,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let d = GridSpec::default();
        Ok(GridSpec::new(
            self.c_values.clone().unwrap_or(d.c_values),
            self.gamma_values.clone().unwrap_or(d.gamma_values),
            self.folds,
        )?)
    }
}

#[derive(Args, Serialize)]
struct S4vmArgs {
    /// Balance slack beta.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Loss weight lambda (> 1).
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    /// Separator count T.
    #[arg(long, default_value_t = 10)]
    separators: usize,
    /// Sampled candidate labelings.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Comma-separated per-candidate flip rates.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3")]
    flip_schedule: Vec<f64>,
    /// Redraws per candidate before sampling gives up.
    #[arg(long, default_value_t = 100)]
    max_retries: usize,
    /// Train-and-relabel rounds per candidate.
    #[arg(long, default_value_t = 3)]
    refine_rounds: usize,
    /// C2 as a fraction of C1.
    #[arg(long, default_value_t = 0.1)]
    c2_ratio: f64,
}

impl S4vmArgs {
    fn params(&self) -> S4vmParams {
        S4vmParams {
            beta: self.beta,
            lambda: self.lambda,
            separators: self.separators,
            n_samples: self.samples,
            flip_schedule: self.flip_schedule.clone(),
            max_retries: self.max_retries,
            refine_rounds: self.refine_rounds,
            ..S4vmParams::default()
        }
    }
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    /// Measurement settings per SDP trial.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Labeled count l (even).
    #[arg(long, default_value_t = 30)]
    l: usize,
    /// Unlabeled count (default 500; 480 for msplit so that M = 8 divides it).
    #[arg(long)]
    u: Option<usize>,
    /// Unlabeled chunk count M.
    #[arg(long, default_value_t = 2)]
    splits: usize,
    /// Labeled-set draws per seed.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Comma-separated seed list (default: the global seed).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Folds of the grid search after each chunk.
    #[arg(long, default_value_t = 5)]
    incremental_folds: usize,
    #[command(flatten)]
    s4vm: S4vmArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sdp: SdpArgs,
}

impl ExperimentArgs {
    fn config(&self, seed: u64, default_u: usize) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            m: self.m,
            l: self.l,
            u: self.u.unwrap_or(default_u),
            splits: self.splits,
            trials: self.sdp.trials,
            n_runs: self.runs,
            seeds: self.seeds.clone().unwrap_or_else(|| vec![seed]),
            grid: self.grid.spec()?,
            s4vm: self.s4vm.params(),
            sdp: self.sdp.settings()?,
            c2_ratio: self.s4vm.c2_ratio,
            incremental_folds: self.incremental_folds,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes files into `--out-dir` and the manifest on completion.
struct Outputs {
    dir: Option<PathBuf>,
    manifest: Option<Manifest>,
}

impl Outputs {
    fn new(
        cli: &Cli,
        name: &str,
        seeds: Vec<u64>,
        resolved: serde_json::Value,
        inputs: &[&Path],
    ) -> Result<Self> {
        let Some(dir) = cli.out_dir.clone() else {
            return Ok(Outputs {
                dir: None,
                manifest: None,
            });
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let digests = inputs
            .iter()
            .map(|p| {
                let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(InputDigest {
                    path: p.display().to_string(),
                    hash: content_hash(&bytes),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = serde_json::json!({ "cli": cli, "resolved": resolved });
        Ok(Outputs {
            dir: Some(dir),
            manifest: Some(Manifest::new(name, seeds, config, digests)),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        if let (Some(dir), Some(m)) = (&self.dir, &mut self.manifest) {
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            m.outputs.push(name.to_string());
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        if let (Some(dir), Some(m)) = (self.dir, self.manifest) {
            fs::write(dir.join("manifest.json"), m.to_json()?)?;
        }
        Ok(())
    }
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Dataset::read_csv(io::BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn emit(bytes: &[u8]) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_APPLICABLE.to_string(), |x| x.to_string())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Gen { n, m, sdp } => {
            let settings = sdp.settings()?;
            let mut out = Outputs::new(
                cli,
                "gen",
                vec![seed],
                serde_json::json!({ "sdp": settings }),
                &[],
            )?;
            let g = generate_balanced_dataset(*n, *m, sdp.trials, &settings, seed)?;
            log::info!("{} draws, {} labeled steerable", g.draws, g.raw_negative);
            let mut buf = Vec::new();
            g.data.write_csv(&mut buf)?;
            out.write("dataset.csv", &buf)?;
            out.finish()?;
            emit(&buf)
        }
        Command::Label { state, m, sdp } => {
            let settings = sdp.settings()?;
            let text = fs::read_to_string(state)
                .with_context(|| format!("reading {}", state.display()))?;
            let rho = TwoQubitState::from_json(&text)?;
            let mut out = Outputs::new(
                cli,
                "label",
                vec![seed],
                serde_json::json!({ "sdp": settings }),
                &[state],
            )?;
            let outcome = label_state(&rho, *m, sdp.trials, &settings, seed)?;
            if let Some(cert) = &outcome.certificate {
                out.write(
                    "witness.json",
                    json(&WitnessDump::new(
                        &cert.witness,
                        &cert.measurements,
                        cert.seed,
                    ))?
                    .as_bytes(),
                )?;
            }
            out.write("label.json", json(&outcome)?.as_bytes())?;
            out.finish()?;
            emit(format!("{}\n", outcome.label).as_bytes())
        }
        Command::TrainSvm {
            data,
            c,
            gamma,
            predict,
            grid,
        } => {
            let ds = read_dataset(data)?;
            let spec = grid.spec()?;
            let params = match (c, gamma) {
                (Some(c), Some(g)) => SvmParams::new(*c, *g)?,
                _ => {
                    let mut spec = spec.clone();
                    if let Some(c) = c {
                        spec.c_values = vec![*c];
                    }
                    if let Some(g) = gamma {
                        spec.gamma_values = vec![*g];
                    }
                    let spec = spec.with_folds(spec.folds.min(ds.len()));
                    let best = grid_search(&ds, &spec, seed)?;
                    log::info!(
                        "grid search: C = {}, gamma = {}, CV accuracy {:.4}",
                        best.best.c,
                        best.best.gamma,
                        best.accuracy
                    );
                    best.best
                }
            };
            let mut inputs: Vec<&Path> = vec![data];
            if let Some(p) = predict {
                inputs.push(p);
            }
            let mut out = Outputs::new(
                cli,
                "train-svm",
                vec![seed],
                serde_json::json!({ "params": params }),
                &inputs,
            )?;
            let model = train(&ds, params)?;
            let model_json = model.to_json()? + "\n";
            out.write("model.json", model_json.as_bytes())?;
            let stdout = match predict {
                Some(p) => {
                    let xs = read_dataset(p)?;
                    let labels: String = model
                        .predict(xs.features())
                        .iter()
                        .map(|y| format!("{y}\n"))
                        .collect();
                    out.write("predictions.txt", labels.as_bytes())?;
                    labels
                }
                None => model_json,
            };
            out.finish()?;
            emit(stdout.as_bytes())
        }
        Command::S4vm {
            labeled,
            unlabeled,
            c1,
            gamma,
            s4vm,
            grid,
        } => {
            let lab = read_dataset(labeled)?;
            let unl = read_dataset(unlabeled)?;
            let svm = match (c1, gamma) {
                (Some(c), Some(g)) => SvmParams::new(*c, *g)?,
                _ => {
                    let spec = grid.spec()?;
                    let spec = spec.with_folds(spec.folds.min(lab.len()));
                    grid_search(&lab, &spec, seed)?.best
                }
            };
            let params = s4vm.params().with_svm(svm, s4vm.c2_ratio);
            let mut out = Outputs::new(
                cli,
                "s4vm",
                vec![seed],
                serde_json::json!({ "s4vm": params }),
                &[labeled, unlabeled],
            )?;
            let report = s4vm_predict(&lab, unl.features(), &params, seed)?;
            let text = json(&report)?;
            out.write("s4vm_report.json", text.as_bytes())?;
            out.finish()?;
            emit(text.as_bytes())
        }
        Command::Compare { exp } => {
            let cfg = exp.config(seed, 500)?;
            let mut out = Outputs::new(
                cli,
                "compare",
                cfg.seeds.clone(),
                serde_json::to_value(&cfg)?,
                &[],
            )?;
            let report = compare_runs(&cfg)?;
            log::info!(
                "mean SVM error {:.4}, mean S4VM error {:.4}, max difference {:.4}",
                report.mean_svm_error(),
                report.mean_s4vm_error(),
                report.max_difference
            );
            let mut buf = Vec::new();
            write_comparison_csv(&report, &mut buf)?;
            out.write("comparison.csv", &buf)?;
            out.write("comparison.json", json(&report)?.as_bytes())?;
            out.finish()?;
            emit(&buf)
        }
        Command::ClassErrors {
            predicted,
            truth,
            exp,
        } => {
            if let (Some(p), Some(t)) = (predicted, truth) {
                let mut out = Outputs::new(
                    cli,
                    "class-errors",
                    vec![seed],
                    serde_json::Value::Null,
                    &[p, t],
                )?;
                let pred = LabelVector::new(read_dataset(p)?.labels().to_vec())?;
                let tru = LabelVector::new(read_dataset(t)?.labels().to_vec())?;
                let r = class_errors(&pred, &tru)?;
                let line = format!(
                    "overall_error,pos_error,neg_error\n{},{},{}\n",
                    r.overall_error,
                    fmt_opt(r.positive_error),
                    fmt_opt(r.negative_error)
                );
                out.write("class_errors.csv", line.as_bytes())?;
                out.finish()?;
                return emit(line.as_bytes());
            }
            let cfg = exp.config(seed, 500)?;
            let mut out = Outputs::new(
                cli,
                "class-errors",
                cfg.seeds.clone(),
                serde_json::to_value(&cfg)?,
                &[],
            )?;
            let report = compare_runs(&cfg)?;
            let mut text = String::from(
                "run_id,seed,svm_pos_error,s4vm_pos_error,svm_neg_error,s4vm_neg_error\n",
            );
            for r in &report.runs {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.run_id,
                    r.seed,
                    fmt_opt(r.svm.positive_error),
                    fmt_opt(r.s4vm.positive_error),
                    fmt_opt(r.svm.negative_error),
                    fmt_opt(r.s4vm.negative_error)
                ));
            }
            out.write("class_errors.csv", text.as_bytes())?;
            out.write("comparison.json", json(&report)?.as_bytes())?;
            out.finish()?;
            emit(text.as_bytes())
        }
        Command::Werner {
            l,
            xi,
            points,
            m,
            splits,
            s4vm,
            grid,
            sdp,
        } => {
            let cfg = ExperimentConfig {
                m: *m,
                l: *l,
                u: *points,
                splits: *splits,
                trials: sdp.trials,
                n_runs: 1,
                seeds: vec![seed],
                grid: grid.spec()?,
                s4vm: s4vm.params(),
                sdp: sdp.settings()?,
                c2_ratio: s4vm.c2_ratio,
                ..ExperimentConfig::default()
            };
            let mut out =
                Outputs::new(cli, "werner", vec![seed], serde_json::to_value(&cfg)?, &[])?;
            let report = werner_sweep(*l, *xi, *points, *m, &cfg, seed)?;
            log::info!(
                "SVM accuracy {:.4}, S4VM accuracy {:.4}",
                report.svm_accuracy,
                report.s4vm_accuracy
            );
            let mut buf = Vec::new();
            write_werner_csv(&report, &mut buf)?;
            out.write("werner_sweep.csv", &buf)?;
            out.write("werner_sweep.json", json(&report)?.as_bytes())?;
            out.finish()?;
            emit(&buf)
        }
        Command::Msplit { split_counts, exp } => {
            let cfg = exp.config(seed, 480)?;
            let resolved = serde_json::json!({ "experiment": cfg, "split_counts": split_counts });
            let mut out = Outputs::new(cli, "msplit", cfg.seeds.clone(), resolved, &[])?;
            let rows = msplit_runs(&cfg, split_counts)?;
            let mut buf = Vec::new();
            write_msplit_csv(&rows, &mut buf)?;
            out.write("msplit.csv", &buf)?;
            out.finish()?;
            emit(&buf)
        }
    }
}

fn parse_args() -> std::result::Result<Cli, ExitCode> {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::find_config_path(&argv) {
        Some(path) => {
            let entries = fs::read_to_string(&path)
                .with_context(|| format!("reading config {path}"))
                .and_then(|t| config::parse(&t));
            match entries {
                Ok(e) => config::merge(&argv, &e),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Err(ExitCode::from(2));
                }
            }
        }
        None => argv,
    };
    let parsed = Cli::command()
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m));
    parsed.map_err(|e| {
        use clap::error::ErrorKind;
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
            _ => ExitCode::from(2),
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
