//! Command-line surface: every pipeline of the library on manifest files,
//! with deterministic plain-text reports. Exit codes: 0 = computed and
//! positive, 1 = negative verdict (invalid / fails / does not vanish),
//! 2 = input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dgpost::cells::{bounded_big_model, check_window, rlp_batch};
use dgpost::complexes::homology;
use dgpost::dgcat::{is_fibration, Verdict};
use dgpost::manifest;
use dgpost::obstruct::{obstruction_class, rigidify, VanishingVerdict};
use dgpost::postnikov::{reconstruct, small_tower, validate_tower};
use dgpost::sqzero::{gamma, verify_fiber_sequence};
use dgpost::Error;

#[derive(Parser)]
#[command(name = "dgpost", version, about = "Postnikov towers, k-invariants and obstruction classes for finite dg categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a category file and report its structural predicates
    Check { file: PathBuf },
    /// Homology dimensions of every hom complex
    Homology { file: PathBuf },
    /// Build and verify the truncation tower up to stage N
    Tower {
        file: PathBuf,
        #[arg(long)]
        max: i64,
    },
    /// Bounded cell model of stage n, capped at degree D
    Bigmodel {
        file: PathBuf,
        #[arg(short)]
        n: i64,
        #[arg(long)]
        cap: i64,
    },
    /// k-invariant of stage n into the square-zero extension
    Kinvariant {
        file: PathBuf,
        #[arg(short)]
        n: i64,
        #[arg(long)]
        cap: i64,
    },
    /// Verify the fiber sequence at stage n inside the cap window
    Fiberseq {
        file: PathBuf,
        #[arg(short)]
        n: i64,
        #[arg(long)]
        cap: i64,
    },
    /// Obstruction class of the stage-n lift of a problem file
    Obstruct {
        #[arg(long)]
        problem: PathBuf,
        #[arg(short)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Full stagewise lifting of a problem file
    Rigidify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        cap: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Undecided => "undecided",
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Check { file } => {
            let parsed = manifest::parse_file(&file)?;
            let cat = &parsed.category;
            let report = cat.validate();
            println!(
                "{}, {}",
                if report.is_valid() { "valid" } else { "invalid" },
                if cat.is_positively_graded() {
                    "positively graded"
                } else if cat.is_connective() {
                    "connective"
                } else {
                    "not connective"
                }
            );
            for v in &report.violations {
                println!("violation: {v}");
            }
            println!("objects: {}", cat.nobj());
            if parsed.problem.is_some() {
                let p = parsed.lifting_problem()?;
                println!("problem: {} generators, target support [0,{}]", p.semifree.gens.len(), p.cap);
            }
            Ok(report.is_valid())
        }
        Command::Homology { file } => {
            let cat = manifest::parse_file(&file)?.category;
            for (x, y) in cat.pairs() {
                let h = homology(cat.hom(x, y));
                let dims: Vec<String> = cat
                    .hom(x, y)
                    .support()
                    .map(|i| format!("H{}={}", i, h.h_dim(i)))
                    .collect();
                println!(
                    "hom({},{}): {}",
                    cat.objects[x],
                    cat.objects[y],
                    if dims.is_empty() { "zero".into() } else { dims.join(" ") }
                );
            }
            Ok(true)
        }
        Command::Tower { file, max } => {
            let cat = manifest::parse_file(&file)?.category;
            let tower = small_tower(&cat, max)?;
            let report = validate_tower(&tower)?;
            for s in &report.stages {
                println!(
                    "stage {}: a1 {} a2 {} b {} category {} functor {} transition {}",
                    s.stage,
                    yes_no(s.a1),
                    yes_no(s.a2),
                    yes_no(s.b),
                    yes_no(s.category_valid),
                    yes_no(s.functor_valid),
                    s.transition_fibration
                        .map(verdict_word)
                        .unwrap_or("n/a"),
                );
            }
            let (_, rec) = reconstruct(&tower)?;
            println!("tower: {}", yes_no(report.ok));
            println!("reconstruction: {}", yes_no(rec.isomorphic));
            for m in &rec.mismatches {
                println!("mismatch: {m}");
            }
            Ok(report.ok && rec.isomorphic)
        }
        Command::Bigmodel { file, n, cap } => {
            let cat = manifest::parse_file(&file)?.category;
            let mdl = bounded_big_model(&cat, n, cap)?;
            let window = check_window(&mdl);
            let fib = is_fibration(&mdl.comparison)?;
            let rlp = rlp_batch(&mdl.comparison, n + 2)?;
            println!("generators: {}", mdl.gens.len());
            println!("window a1: {}", yes_no(window.a1));
            println!("window b: {}", yes_no(window.b));
            for d in &window.details {
                println!("detail: {d}");
            }
            println!("comparison fibration: {}", verdict_word(fib.verdict));
            println!("rlp above window: {}", yes_no(rlp));
            Ok(window.ok() && fib.verdict.holds() && rlp)
        }
        Command::Kinvariant { file, n, cap } => {
            let cat = manifest::parse_file(&file)?.category;
            let mdl = bounded_big_model(&cat, n, cap)?;
            let k = gamma(&mdl)?;
            let valid = k.functor.validate();
            println!("stage: {}", k.stage);
            println!("functor valid: {}", yes_no(valid.is_valid()));
            for v in &valid.violations {
                println!("violation: {v}");
            }
            for (x, y) in cat.pairs() {
                let dim = k.bimodule.hom(x, y).dim(n + 2);
                if dim > 0 {
                    println!(
                        "bimodule hom({},{}): dim {} rank {}",
                        cat.objects[x],
                        cat.objects[y],
                        dim,
                        k.m_component[x * cat.nobj() + y].rank()
                    );
                }
            }
            Ok(valid.is_valid())
        }
        Command::Fiberseq { file, n, cap } => {
            let cat = manifest::parse_file(&file)?.category;
            let report = verify_fiber_sequence(&cat, n, cap)?;
            println!("stage: {} cap: {}", report.stage, report.cap);
            println!("kernel identification: {}", yes_no(report.kernel_identification));
            println!("fiber homology window: {}", yes_no(report.w_vanishing));
            println!("comparison built: {}", yes_no(report.theta_built));
            println!("comparison chain map: {}", yes_no(report.theta_chain));
            println!("comparison quasi-iso: {}", yes_no(report.theta_quasi_iso));
            for d in &report.details {
                println!("detail: {d}");
            }
            Ok(report.ok())
        }
        Command::Obstruct { problem, n, seed } => {
            let p = manifest::parse_file(&problem)?.lifting_problem()?;
            let oc = obstruction_class(&p, n, &p.f0_functor, seed)?;
            println!("stage: {}", oc.stage);
            let word = match oc.verdict {
                VanishingVerdict::Vanishes => "vanishes",
                VanishingVerdict::DoesNotVanish => "does not vanish",
                VanishingVerdict::Undecided => "undecided",
            };
            println!("obstruction: {word}");
            print_derivation(&p, &oc);
            if let Some(c) = &oc.certificate {
                println!("certificate: {c}");
            }
            Ok(oc.verdict != VanishingVerdict::DoesNotVanish)
        }
        Command::Rigidify { problem, cap, seed } => {
            let p = manifest::parse_file(&problem)?.lifting_problem()?;
            if let Some(c) = cap {
                if c < p.cap {
                    return Err(Error::CapTooSmall {
                        cap: c,
                        why: format!("the target is supported up to degree {}", p.cap),
                    });
                }
            }
            let out = rigidify(&p, seed)?;
            for l in &out.log {
                let word = match l.verdict {
                    VanishingVerdict::Vanishes => "vanishes",
                    VanishingVerdict::DoesNotVanish => "does not vanish",
                    VanishingVerdict::Undecided => "undecided",
                };
                println!("stage {}: obstruction {}", l.stage, word);
            }
            if let Some(f) = &out.lift {
                println!("lift: found");
                println!("triangle: exact");
                let block = manifest::functor_block(f);
                print!("{}", manifest::emit(&p.target, &[block], None));
                Ok(true)
            } else if let Some(oc) = &out.failed {
                println!("lift: none, stage {} obstructed", oc.stage);
                print_derivation(&p, oc);
                if let Some(c) = &oc.certificate {
                    println!("certificate: {c}");
                }
                Ok(false)
            } else {
                let (stage, why) = out.undecided.expect("one outcome is set");
                println!("lift: undecided at stage {stage}: {why}");
                Ok(true)
            }
        }
    }
}

fn print_derivation(p: &dgpost::obstruct::LiftingProblem, oc: &dgpost::obstruct::ObstructionClass) {
    let field = p.target.field;
    for (j, e) in &oc.gen_values {
        let coords: Vec<String> = e.coords.iter().map(|s| field.format_scalar(s)).collect();
        println!(
            "derivation on {}: [{}]",
            p.semifree.gens[*j].label,
            coords.join(", ")
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
