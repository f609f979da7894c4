use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use lava_core::corpus::{generate_corpus, load_corpus, write_corpus, SentenceRecord};
use lava_core::inference::oracle::oracle_check;
use lava_core::inference::{beam_score, score_branch, score_formula_with};
use lava_core::logic::Formula;
use lava_core::perception::{generate_suite, load_trace, save_trace, NoiseModel, SuiteConfig, VideoTrace};
use lava_core::recognition::{Mode, PredicateLibrary};
use lava_core::task::{disambiguate_with, evaluate_with, TaskConfig};

/// Grounded disambiguation of ambiguous sentences against detection traces.
#[derive(Parser)]
#[command(name = "lava", version)]
struct Cli {
    /// Predicate library file; the built-in one by default.
    #[arg(long, global = true)]
    library: Option<PathBuf>,
    /// Score feature tests as hard pass/fail checks.
    #[arg(long, global = true)]
    hard: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the generated corpus as JSON lines.
    GenCorpus {
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a trace for every interpretation and variation.
    Simulate {
        /// Corpus file; the generated corpus if absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long, default_value_t = SuiteConfig::default().master_seed)]
        seed: u64,
        /// Only this sentence.
        #[arg(long)]
        sentence: Option<String>,
    },
    /// MAP score of one formula on one trace.
    Score {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        formula: String,
        /// Beam width; exact decoding if absent.
        #[arg(long)]
        beam: Option<usize>,
        /// Print the per-frame joint states as JSON.
        #[arg(long)]
        dump_path: bool,
    },
    /// Choose the interpretation of a sentence that best fits a trace.
    Disambiguate {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Sentence id; taken from the trace metadata if absent.
        #[arg(long)]
        sentence: Option<String>,
        #[arg(long)]
        beam: Option<usize>,
    },
    /// Generate the suite at a noise preset and report accuracy per class.
    Evaluate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long, default_value_t = SuiteConfig::default().master_seed)]
        seed: u64,
        #[arg(long)]
        beam: Option<usize>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Compare exact decoding with exhaustive search on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print every predicate HMM.
    DumpLibrary,
}

fn corpus(path: Option<&Path>) -> Result<Vec<SentenceRecord>> {
    match path {
        Some(p) => load_corpus(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(generate_corpus()?),
    }
}

fn noise(name: &str) -> Result<NoiseModel> {
    NoiseModel::preset(name).ok_or_else(|| {
        anyhow!(
            "unknown noise preset `{name}` (expected one of {})",
            NoiseModel::PRESETS.join(", ")
        )
    })
}

fn trace(path: &Path) -> Result<VideoTrace> {
    load_trace(path).with_context(|| format!("reading {}", path.display()))
}

fn task_config(beam: Option<usize>) -> TaskConfig {
    TaskConfig {
        beam,
        ..TaskConfig::default()
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut lib = match &cli.library {
        Some(p) => PredicateLibrary::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => PredicateLibrary::default(),
    };
    if cli.hard {
        lib = lib.with_mode(Mode::Hard);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::GenCorpus { out: path } => {
            let records = generate_corpus()?;
            match path {
                Some(p) => {
                    let file = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                    write_corpus(&records, io::BufWriter::new(file))?;
                    eprintln!("{} sentences written to {}", records.len(), p.display());
                }
                None => write_corpus(&records, &mut out)?,
            }
        }
        Command::Simulate {
            corpus: cpath,
            out: dir,
            noise: preset,
            seed,
            sentence,
        } => {
            let mut records = corpus(cpath.as_deref())?;
            if let Some(id) = &sentence {
                records.retain(|r| &r.id == id);
                if records.is_empty() {
                    bail!("no sentence `{id}` in the corpus");
                }
            }
            let config = SuiteConfig {
                master_seed: seed,
                ..SuiteConfig::with_noise(noise(&preset)?)
            };
            let suite = generate_suite(&records, &config)?;
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for s in &suite {
                let id = s
                    .trace
                    .metadata
                    .as_ref()
                    .map(|m| m.trace_id())
                    .expect("suite traces carry metadata");
                save_trace(&s.trace, &dir.join(format!("{id}.jsonl")))?;
            }
            eprintln!("{} traces written to {}", suite.len(), dir.display());
        }
        Command::Score {
            trace: tpath,
            formula,
            beam,
            dump_path,
        } => {
            let t = trace(&tpath)?;
            let f = Formula::parse(&formula)?;
            let (m, branch) = score_formula_with(&f, |b| match beam {
                Some(w) => beam_score(b, &t, &lib, w),
                None => score_branch(b, &t, &lib),
            })?;
            writeln!(out, "score {:.6} (branch {branch})", m.total)?;
            let b = &m.breakdown;
            writeln!(out, "f {:.6}  g {:.6}  h {:.6}  a {:.6}", b.f, b.g, b.h, b.a)?;
            if dump_path {
                writeln!(out, "{}", serde_json::to_string(&m.path)?)?;
            }
        }
        Command::Disambiguate {
            trace: tpath,
            corpus: cpath,
            sentence,
            beam,
        } => {
            let t = trace(&tpath)?;
            let id = match sentence.or_else(|| t.metadata.as_ref().map(|m| m.sentence_id.clone())) {
                Some(id) => id,
                None => bail!("the trace has no metadata; pass --sentence"),
            };
            let records = corpus(cpath.as_deref())?;
            let rec = records
                .iter()
                .find(|r| r.id == id)
                .ok_or_else(|| anyhow!("no sentence `{id}` in the corpus"))?;
            let r = disambiguate_with(rec, &t, &lib, &task_config(beam))?;
            writeln!(out, "{}: {}", rec.id, rec.text)?;
            for (i, (s, interp)) in r.scores.iter().zip(&rec.interpretations).enumerate() {
                let mark = if i == r.chosen { '*' } else { ' ' };
                writeln!(out, "{mark} {} {:>12.3}  {}", s.id, s.score, interp.gloss)?;
            }
            if r.undecided {
                writeln!(out, "undecided: every reading is impossible")?;
            } else {
                writeln!(out, "margin {:.3}", r.margin)?;
            }
            if let Some(c) = r.correct {
                writeln!(out, "{}", if c { "correct" } else { "wrong" })?;
            }
        }
        Command::Evaluate {
            corpus: cpath,
            noise: preset,
            seed,
            beam,
            json,
        } => {
            let records = corpus(cpath.as_deref())?;
            let config = SuiteConfig {
                master_seed: seed,
                ..SuiteConfig::with_noise(noise(&preset)?)
            };
            let traces: Vec<VideoTrace> = generate_suite(&records, &config)?
                .into_iter()
                .map(|s| s.trace)
                .collect();
            let (report, _) = evaluate_with(&records, &traces, &lib, &preset, seed, &task_config(beam))?;
            if json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                write!(out, "{}", report.table())?;
            }
        }
        Command::OracleCheck { n, seed } => {
            let r = oracle_check(n, seed, &lib)?;
            writeln!(out, "{}/{} match", r.matched, r.instances)?;
            writeln!(out, "beam admissible on {}/{}", r.beam_admissible, r.instances)?;
            writeln!(
                out,
                "full-width beam exact on {}/{}",
                r.beam_exact_at_full_width, r.instances
            )?;
            if !r.all_passed() {
                bail!("failing instances: {:?}", r.failures);
            }
        }
        Command::DumpLibrary => write!(out, "{}", lib.dump())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors exit with 2 from inside clap.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
