//! `k3frob`: verify lattice Frobenius triples, inspect NS and chambers,
//! emit standard lattices, and search for ordinary Weil polynomials.
//!
//! Exit codes: 0 success / all axioms pass, 1 some axiom fails,
//! 2 malformed input or usage error, 3 checkpoint does not match the spec.

mod search_cmd;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use k3frob_core::ample_cone::{
    apply_frobenius, frobenius_preserves_chamber, validate_chamber, ChamberCheck, Invariance,
};
use k3frob_core::format::strings;
use k3frob_core::neron_severi::neron_severi;
use k3frob_core::verifier::{verify_triple, zeta_report, TripleInput, VerifyOptions};
use k3frob_core::{Lattice, LatticeDocument};

pub const EXIT_OK: u8 = 0;
pub const EXIT_AXIOM_FAIL: u8 = 1;
pub const EXIT_MALFORMED: u8 = 2;
pub const EXIT_CHECKPOINT: u8 = 3;

#[derive(Parser)]
#[command(name = "k3frob", version, about = "Exact checks for lattice Frobenius triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check axioms (M1)-(M5) for a triple document, or every `.json` in a directory.
    Verify {
        path: PathBuf,
        /// Report file (single input) or directory (batch); `-` prints the report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Initial p-adic precision exponent.
        #[arg(long)]
        precision: Option<u32>,
        /// Point counts N_1..N_k in the report.
        #[arg(long, default_value_t = 3)]
        max_n: u32,
        /// Height bound for the NS classification search.
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
    /// Print the NS rank, basis and restricted Gram matrix.
    Ns { path: PathBuf },
    /// Print point counts N_1..N_k and the question flag.
    Zeta {
        path: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_n: u32,
    },
    /// Check the ample point and its Frobenius image against root walls.
    Chamber { path: PathBuf },
    /// Emit a standard lattice as a Gram document.
    Lattice { name: LatticeName },
    /// Enumerate ordinary q^2-Weil polynomials.
    SearchWeil(search_cmd::SearchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeName {
    /// Hyperbolic plane.
    U,
    /// Negative-definite E8.
    E8m,
    /// U^3 + E8(-1)^2.
    K3,
}

fn load(path: &Path) -> Result<TripleInput, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    TripleInput::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn malformed(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_MALFORMED)
}

fn cmd_verify(path: &Path, report: Option<&Path>, opts: &VerifyOptions) -> ExitCode {
    if path.is_dir() {
        return cmd_verify_batch(path, report, opts);
    }
    let t = match load(path) {
        Ok(t) => t,
        Err(e) => return malformed(e),
    };
    let r = verify_triple(&t, opts);
    print!("{}", r.summary());
    match report {
        Some(p) if p == Path::new("-") => print!("{}", r.to_json()),
        Some(p) => {
            if let Err(e) = fs::write(p, r.to_json()) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(EXIT_MALFORMED);
            }
        }
        None => {}
    }
    ExitCode::from(if r.all_pass { EXIT_OK } else { EXIT_AXIOM_FAIL })
}

/// One report per `*.json` input; the exit code is the worst per-file code.
fn cmd_verify_batch(dir: &Path, out: Option<&Path>, opts: &VerifyOptions) -> ExitCode {
    let mut inputs: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json") && !is_report(p))
            .collect(),
        Err(e) => return malformed(format!("{}: {e}", dir.display())),
    };
    inputs.sort();
    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| dir.to_path_buf());
    if let Err(e) = fs::create_dir_all(&out_dir) {
        return malformed(format!("{}: {e}", out_dir.display()));
    }
    type FileResult = (PathBuf, Result<(String, bool), String>);
    let results: Vec<FileResult> = inputs
        .par_iter()
        .map(|p| {
            let res = load(p).map(|t| {
                let r = verify_triple(&t, opts);
                let stem = p.file_stem().unwrap_or_default().to_string_lossy().to_string();
                let dest = out_dir.join(format!("{stem}.report.json"));
                let ok = fs::write(&dest, r.to_json()).is_ok();
                (
                    format!("{} ({})", if r.all_pass { "pass" } else { "fail" }, r.input_digest),
                    r.all_pass && ok,
                )
            });
            (p.clone(), res)
        })
        .collect();
    let mut code = EXIT_OK;
    for (p, res) in results {
        match res {
            Ok((line, pass)) => {
                println!("{}: {line}", p.display());
                if !pass {
                    code = code.max(EXIT_AXIOM_FAIL);
                }
            }
            Err(e) => {
                println!("{}: malformed: {e}", p.display());
                code = EXIT_MALFORMED;
            }
        }
    }
    ExitCode::from(code)
}

fn is_report(p: &Path) -> bool {
    p.to_string_lossy().ends_with(".report.json")
}

fn cmd_ns(path: &Path) -> ExitCode {
    let t = match load(path) {
        Ok(t) => t,
        Err(e) => return malformed(e),
    };
    let fd = t.frobenius_data();
    let ns = neron_severi(&fd);
    println!("rank: {}", ns.rho());
    println!("basis:");
    for i in 0..ns.basis().rows() {
        println!("  [{}]", strings(ns.basis().row(i)).join(", "));
    }
    println!("gram:");
    for i in 0..ns.gram().rows() {
        println!("  [{}]", strings(ns.gram().row(i)).join(", "));
    }
    match ns.signature() {
        Ok(s) => println!("signature: {s}"),
        Err(e) => println!("signature: {e}"),
    }
    ExitCode::from(EXIT_OK)
}

fn cmd_zeta(path: &Path, k: u32) -> ExitCode {
    let t = match load(path) {
        Ok(t) => t,
        Err(e) => return malformed(e),
    };
    let z = zeta_report(&t.frobenius_data(), k, None);
    println!("trace: {}", z.trace);
    for (i, n) in z.point_counts.iter().enumerate() {
        println!("N_{} = {n}", i + 1);
    }
    println!("question (N_1 < 0): {}", z.question);
    if z.boundary {
        println!("boundary: N_1 = 0");
    }
    ExitCode::from(EXIT_OK)
}

fn cmd_chamber(path: &Path) -> ExitCode {
    let t = match load(path) {
        Ok(t) => t,
        Err(e) => return malformed(e),
    };
    let fd = t.frobenius_data();
    let ns = neron_severi(&fd);
    let lambda = &t.ample_point;
    let mut valid = false;
    match validate_chamber(&ns, lambda) {
        Ok(ChamberCheck::Valid) => {
            valid = true;
            println!("chamber: valid");
        }
        Ok(ChamberCheck::NotInNs) => println!("chamber: ample point not in NS"),
        Ok(ChamberCheck::NonPositive) => println!("chamber: ample point has non-positive norm"),
        Ok(ChamberCheck::OnWall(d)) => println!("chamber: on the wall of root [{}]", strings(&d).join(", ")),
        Err(e) => println!("chamber: {e}"),
    }
    let image = apply_frobenius(&fd, lambda);
    println!(
        "image: [{}] / {}",
        strings(image.numerators()).join(", "),
        image.denominator()
    );
    if valid {
        match frobenius_preserves_chamber(&fd, &ns, lambda) {
            Ok(Invariance::Preserved) => println!("frobenius: preserves the chamber"),
            Ok(Invariance::OppositeCone) => println!("frobenius: maps into the opposite cone"),
            Ok(Invariance::ImageOnWall(d)) => {
                println!("frobenius: image on the wall of root [{}]", strings(&d).join(", "))
            }
            Ok(Invariance::Separated(d)) => println!("frobenius: separated by root [{}]", strings(&d).join(", ")),
            Err(e) => println!("frobenius: {e}"),
        }
    }
    ExitCode::from(if valid { EXIT_OK } else { EXIT_AXIOM_FAIL })
}

fn cmd_lattice(name: LatticeName) -> ExitCode {
    let (label, l) = match name {
        LatticeName::U => ("u", Lattice::hyperbolic_plane()),
        LatticeName::E8m => ("e8m", Lattice::e8_minus()),
        LatticeName::K3 => ("k3", Lattice::k3()),
    };
    print!("{}", LatticeDocument::new(label, &l).emit());
    ExitCode::from(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            path,
            report,
            precision,
            max_n,
            bound,
        } => {
            let opts = VerifyOptions {
                precision,
                zeta_max_n: max_n.max(1),
                classification_bound: bound,
                ..VerifyOptions::default()
            };
            cmd_verify(&path, report.as_deref(), &opts)
        }
        Command::Ns { path } => cmd_ns(&path),
        Command::Zeta { path, max_n } => cmd_zeta(&path, max_n.max(1)),
        Command::Chamber { path } => cmd_chamber(&path),
        Command::Lattice { name } => cmd_lattice(name),
        Command::SearchWeil(args) => search_cmd::run(&args),
    }
}
