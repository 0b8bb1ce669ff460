//! `search-weil`: chunked, resumable enumeration.
//!
//! Prefixes of the coefficient tree are processed in fixed-size chunks.
//! After each chunk the output is flushed and the checkpoint records the
//! next prefix index and the output length, so a resumed run truncates any
//! partial chunk and continues byte-identically. Chunk boundaries do not
//! depend on the worker count.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;

use k3frob_core::search::{
    default_prefix_depth, explore_all, partition, CandidateRecord, Checkpoint, SearchSpec, SearchStats,
    REALIZATION_NOTE,
};
use k3frob_core::{BigInt, WeilParams};

use crate::{EXIT_CHECKPOINT, EXIT_MALFORMED, EXIT_OK};

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Prime power q = p^a.
    #[arg(long)]
    q: u64,
    /// Total degree of P.
    #[arg(long, default_value_t = 22)]
    degree: usize,
    /// Keep candidates with trace at most this value.
    #[arg(long, allow_hyphen_values = true)]
    trace_max: Option<i64>,
    /// Use the ceiling 1 + tr P + q^2 < 0.
    #[arg(long, conflicts_with = "trace_max")]
    question: bool,
    /// Forced (t - q) factors.
    #[arg(long, default_value_t = 0)]
    forced_plus: usize,
    /// Forced (t + q) factors.
    #[arg(long, default_value_t = 0)]
    forced_minus: usize,
    /// Disable heuristic cuts.
    #[arg(long)]
    audit: bool,
    /// Checkpoint file; resumed from when it exists. Requires --out.
    #[arg(long, requires = "out")]
    checkpoint: Option<PathBuf>,
    /// Output file (one JSON record per line); standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; never changes the output.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Prefixes per checkpoint chunk.
    #[arg(long, default_value_t = 16)]
    chunk: usize,
    /// Stop after this many chunks, leaving the checkpoint for a resume.
    #[arg(long, hide = true)]
    stop_after_chunks: Option<usize>,
}

/// `(p, a)` with `q = p^a`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..).take_while(|d| d * d <= q).find(|d| q % d == 0).unwrap_or(q);
    let (mut r, mut a) = (q, 0);
    while r % p == 0 {
        r /= p;
        a += 1;
    }
    (r == 1).then_some((p, a))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn build_spec(args: &SearchArgs) -> Result<SearchSpec, String> {
    let (p, a) = prime_power(args.q).ok_or_else(|| format!("q = {} is not a prime power", args.q))?;
    let params = WeilParams::new(p, a).map_err(|e| e.to_string())?;
    let q = BigInt::from(args.q);
    let trace_max = if args.question {
        -(&q * &q) - 2
    } else {
        args.trace_max
            .map(BigInt::from)
            .unwrap_or_else(|| &q * BigInt::from(args.degree))
    };
    let mut spec = SearchSpec::new(params, args.degree, trace_max)
        .and_then(|s| s.with_forced(args.forced_plus, args.forced_minus))
        .map_err(|e| e.to_string())?;
    if args.audit {
        spec = spec.audit();
    }
    Ok(spec)
}

fn write_records(w: &mut dyn Write, records: &[CandidateRecord]) -> io::Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_line())?;
    }
    Ok(())
}

fn save_checkpoint(path: &Path, c: &Checkpoint) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, c.emit())?;
    fs::rename(tmp, path)
}

fn print_stats(stats: &SearchStats, count: u64) {
    eprintln!(
        "nodes {} | internal {} | emitted {} ({} this session) | leaf-rejected {} | pruned: trace {}, p|trace {}, derivative {}, interval {}, valuation {}",
        stats.nodes,
        stats.internal,
        stats.emitted,
        count,
        stats.leaf_rejected,
        stats.pruned_trace,
        stats.pruned_p_divides_trace,
        stats.pruned_derivative,
        stats.pruned_interval,
        stats.pruned_valuation
    );
}

pub fn run(args: &SearchArgs) -> ExitCode {
    let spec = match build_spec(args) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_MALFORMED, e),
    };
    if args.question {
        let q = spec.params.q();
        let reach: BigInt = q * q - BigInt::from(spec.degree) * q + 1;
        if reach >= BigInt::from(0) {
            eprintln!(
                "empty: tr P >= -{0}q, so 1 + tr P + q^2 < 0 needs q^2 - {0}q + 1 < 0, which fails for q = {q}",
                spec.degree
            );
            return ExitCode::from(EXIT_OK);
        }
        eprintln!("note: {REALIZATION_NOTE}");
    }
    let start = std::time::Instant::now();
    let depth = default_prefix_depth(&spec);
    let part = partition(&spec, depth);
    let total = part.prefixes.len();
    let mut stats = part.stats.clone();
    let mut emitted_now = 0u64;

    let resume = match &args.checkpoint {
        Some(cp) if cp.exists() => {
            let text = match fs::read_to_string(cp) {
                Ok(t) => t,
                Err(e) => return fail(EXIT_MALFORMED, format!("{}: {e}", cp.display())),
            };
            let c = match Checkpoint::parse(&text) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_MALFORMED, format!("{}: {e}", cp.display())),
            };
            if c.spec_digest != spec.digest() || c.prefix_depth != depth || c.next_prefix > total {
                return fail(EXIT_CHECKPOINT, "checkpoint does not match the search spec");
            }
            let expected_last = c.next_prefix.checked_sub(1).map(|i| part.prefixes[i].clone());
            if c.next_prefix > 0 && c.last_prefix != expected_last {
                return fail(EXIT_CHECKPOINT, "checkpoint prefix does not match the search tree");
            }
            Some(c)
        }
        _ => None,
    };

    let mut sink: Box<dyn Write> = match (&args.out, &resume) {
        (Some(path), Some(c)) => {
            let f = match OpenOptions::new().write(true).open(path) {
                Ok(f) => f,
                Err(e) => return fail(EXIT_CHECKPOINT, format!("{}: {e}", path.display())),
            };
            let len = f.metadata().map(|m| m.len()).unwrap_or(0);
            if len < c.output_bytes {
                return fail(EXIT_CHECKPOINT, "output file is shorter than the checkpoint records");
            }
            if let Err(e) = f.set_len(c.output_bytes) {
                return fail(EXIT_MALFORMED, e);
            }
            let f = OpenOptions::new().append(true).open(path).expect("opened above");
            Box::new(BufWriter::new(f))
        }
        (Some(path), None) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => return fail(EXIT_MALFORMED, format!("{}: {e}", path.display())),
        },
        (None, _) => Box::new(BufWriter::new(io::stdout())),
    };

    let mut next = 0;
    let mut bytes = 0u64;
    match &resume {
        Some(c) => {
            next = c.next_prefix;
            bytes = c.output_bytes;
        }
        None => {
            if let Err(e) = write_records(&mut sink, &part.records) {
                return fail(EXIT_MALFORMED, e);
            }
            emitted_now += part.records.len() as u64;
            bytes += part.records.iter().map(|r| r.to_line().len() as u64 + 1).sum::<u64>();
        }
    }
    let chunk = args.chunk.max(1);
    let mut chunks_done = 0;
    while next < total {
        if args.stop_after_chunks.is_some_and(|k| chunks_done >= k) {
            break;
        }
        let end = (next + chunk).min(total);
        let (records, s) = explore_all(&spec, &part.prefixes[next..end], args.workers);
        stats.merge(&s);
        if let Err(e) = write_records(&mut sink, &records).and_then(|_| sink.flush()) {
            return fail(EXIT_MALFORMED, e);
        }
        emitted_now += records.len() as u64;
        bytes += records.iter().map(|r| r.to_line().len() as u64 + 1).sum::<u64>();
        next = end;
        chunks_done += 1;
        if let Some(cp) = &args.checkpoint {
            let c = Checkpoint {
                spec_digest: spec.digest(),
                prefix_depth: depth,
                next_prefix: next,
                last_prefix: Some(part.prefixes[next - 1].clone()),
                output_bytes: bytes,
            };
            if let Err(e) = save_checkpoint(cp, &c) {
                return fail(EXIT_MALFORMED, e);
            }
        }
    }
    if let Err(e) = sink.flush() {
        return fail(EXIT_MALFORMED, e);
    }
    if let (Some(cp), true) = (&args.checkpoint, total == 0) {
        let c = Checkpoint {
            spec_digest: spec.digest(),
            prefix_depth: depth,
            next_prefix: 0,
            last_prefix: None,
            output_bytes: bytes,
        };
        if let Err(e) = save_checkpoint(cp, &c) {
            return fail(EXIT_MALFORMED, e);
        }
    }
    print_stats(&stats, emitted_now);
    eprintln!(
        "prefixes {next}/{total}{} in {:.3}s",
        if next < total { " (stopped early)" } else { "" },
        start.elapsed().as_secs_f64()
    );
    ExitCode::from(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::prime_power;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
