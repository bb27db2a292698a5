//! Implementations of the four subcommands.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use veronese::algebra::{ambient_dim, binomial, MultiIndex, Rat};
use veronese::germ::{disguise, make_family_germ, project_drop, veronese, Germ};
use veronese::reduction::{
    decide_veronese, replay_trace, run_pipeline, sample_directions, PipelineVerdict, Verdict,
};
use veronese::rnc::{fit_rnc, RncError};

use crate::format::{
    self, decide_report, germ_to_file, raw_to_file, read_germ_file, read_trace_file,
    trace_to_file, write_json, FormatError,
};
use crate::polyparse::{parse_poly, PolyParseError};
use crate::{CheckKind, Cli, GenerateKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid {arg}: {message}")]
    Argument { arg: String, message: String },
    #[error("{0}")]
    Message(String),
}

impl From<PolyParseError> for CliError {
    fn from(e: PolyParseError) -> Self {
        CliError::Argument { arg: "polynomial".into(), message: e.to_string() }
    }
}

fn argument(arg: &str, message: impl fmt::Display) -> CliError {
    CliError::Argument { arg: arg.into(), message: message.to_string() }
}

/// Default truncation: deep enough for the final-form checks and for the
/// rational-curve fits on line images.
fn default_trunc(q: u32) -> u32 {
    (q + 4).max(2 * q + 2)
}

fn resolve_trunc(cli: &Cli, q: u32) -> Result<u32, CliError> {
    let trunc = cli.trunc.unwrap_or_else(|| default_trunc(q));
    if trunc < q + 3 {
        return Err(argument(
            "--trunc",
            format!("truncation {trunc} violates the constraint trunc >= q+3 = {}", q + 3),
        ));
    }
    Ok(trunc)
}

fn validate_shape(n: usize, q: u32) -> Result<(), CliError> {
    if n < 1 {
        return Err(argument("--n", "parameter count must be at least 1"));
    }
    if q < 1 {
        return Err(argument("--q", "order must be at least 1"));
    }
    Ok(())
}

fn parse_alpha(s: &str, n: usize) -> Result<MultiIndex, CliError> {
    let entries = s
        .split(',')
        .map(|part| part.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| argument("--alpha", format!("cannot parse {s:?} as exponents")))?;
    if entries.len() != n {
        return Err(argument("--alpha", format!("need exactly {n} comma-separated exponents")));
    }
    Ok(MultiIndex::new(entries))
}

pub fn generate(cli: &Cli, kind: &GenerateKind) -> Result<u8, CliError> {
    match kind {
        GenerateKind::Veronese { n, q, out } => {
            validate_shape(*n, *q)?;
            let trunc = resolve_trunc(cli, *q)?;
            let germ = veronese(*n, *q, trunc).map_err(|e| argument("--trunc", e))?;
            write_json(out, &germ_to_file(&germ))?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
        GenerateKind::Disguise { n, q, magnitude, out } => {
            validate_shape(*n, *q)?;
            let trunc = resolve_trunc(cli, *q)?;
            let germ = veronese(*n, *q, trunc).map_err(|e| argument("--trunc", e))?;
            let (disguised, _, _) =
                disguise(&germ, cli.seed, *magnitude).map_err(|e| CliError::Message(e.to_string()))?;
            write_json(out, &germ_to_file(&disguised))?;
            eprintln!("wrote {} (seed {}, magnitude {})", out.display(), cli.seed, magnitude);
            Ok(0)
        }
        GenerateKind::Family { n, q, r2, r3, r4, r5, r6, r7, r8, out } => {
            validate_shape(*n, *q)?;
            let trunc = resolve_trunc(cli, *q)?;
            let mut factors = BTreeMap::new();
            let sources: [(u32, &Option<String>); 7] = [
                (2, r2),
                (3, r3),
                (4, r4),
                (5, r5),
                (6, r6),
                (7, r7),
                (8, r8),
            ];
            for (k, source) in sources {
                let Some(text) = source else { continue };
                if k > *q {
                    return Err(argument(
                        &format!("--R{k}"),
                        format!("weight {k} exceeds the order q = {q}"),
                    ));
                }
                let jet = parse_poly(text, *n, trunc)?;
                factors.insert(k, jet);
            }
            let germ = make_family_germ(*n, *q, trunc, &factors)
                .map_err(|e| CliError::Message(format!("family constraint violated: {e}")))?;
            write_json(out, &germ_to_file(&germ))?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
        GenerateKind::ProjectDrop { n, q, alpha, out } => {
            validate_shape(*n, *q)?;
            let trunc = resolve_trunc(cli, *q)?;
            let germ = veronese(*n, *q, trunc).map_err(|e| argument("--trunc", e))?;
            let alpha = parse_alpha(alpha, *n)?;
            let raw = project_drop(&germ, &alpha)
                .map_err(|e| argument("--alpha", e))?;
            write_json(out, &raw_to_file(&raw, *q))?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
        GenerateKind::Perturb { n, q, add, out } => {
            validate_shape(*n, *q)?;
            let trunc = resolve_trunc(cli, *q)?;
            let germ = veronese(*n, *q, trunc).map_err(|e| argument("--trunc", e))?;
            let mut components = germ.components().to_vec();
            for (i, entry) in add.iter().enumerate() {
                let (alpha_text, poly_text) = entry.split_once(':').ok_or_else(|| {
                    argument("--add", format!("entry {i} must look like \"2,0:s2^3\""))
                })?;
                let alpha = parse_alpha(alpha_text, *n)?;
                let idx = veronese::algebra::canonical_index(&alpha, *n, *q)
                    .map_err(|e| argument("--add", e))?;
                let jet = parse_poly(poly_text, *n, trunc)?;
                components[idx] = components[idx]
                    .add(&jet)
                    .map_err(|e| CliError::Message(e.to_string()))?;
            }
            let germ = Germ::new(*n, *q, trunc, components)
                .map_err(|e| CliError::Message(format!("perturbation violated a germ invariant: {e}")))?;
            write_json(out, &germ_to_file(&germ))?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn dims_string(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

fn sigma_string(sigma: &[Rat]) -> String {
    format!(
        "({})",
        sigma.iter().map(format::rat_string).collect::<Vec<_>>().join(",")
    )
}

pub fn check(cli: &Cli, file: &Path, what: CheckKind) -> Result<u8, CliError> {
    let (germ_file, loaded) = read_germ_file(file)?;
    let raw = loaded.to_raw();
    let q = germ_file.q;
    let n = germ_file.n;
    match what {
        CheckKind::Regularity => {
            let dims: Vec<usize> = (1..=q).map(|k| raw.osculating_dimension(k)).collect();
            let regular = dims[q as usize - 1] == ambient_dim(n, q);
            eprintln!(
                "osculating dimensions 1..={q}: {} (maximal requires {})",
                dims_string(&dims),
                ambient_dim(n, q)
            );
            if regular {
                println!("REGULAR dims={}", dims_string(&dims));
                Ok(0)
            } else {
                println!("NOT_REGULAR dims={}", dims_string(&dims));
                Ok(1)
            }
        }
        CheckKind::Osculating => {
            let dims: Vec<usize> = (1..=q).map(|k| raw.osculating_dimension(k)).collect();
            let maximal: Vec<usize> = (1..=q)
                .map(|k| binomial((n as u64) + (k as u64), k as u64) - 1)
                .collect();
            eprintln!("osculating dimensions: {}", dims_string(&dims));
            eprintln!("maximal dimensions:    {}", dims_string(&maximal));
            if dims == maximal {
                println!("OSCULATING_MAXIMAL dims={}", dims_string(&dims));
                Ok(0)
            } else {
                println!("OSCULATING_DEFICIENT dims={}", dims_string(&dims));
                Ok(1)
            }
        }
        CheckKind::Pattern => {
            let germ = loaded.canonical().ok_or_else(|| {
                CliError::Message("pattern check requires a canonical germ file".into())
            })?;
            match veronese::germ::check_family_pattern(germ) {
                Some(factors) => {
                    for (k, factor) in &factors {
                        eprintln!("weight {k} residual factor: {factor}");
                    }
                    if factors.is_empty() {
                        eprintln!("all residual factors vanish: the standard germ");
                    }
                    println!("PATTERN_OK factors={}", factors.len());
                    Ok(0)
                }
                None => {
                    eprintln!("residual layers are not monomial multiples of shared factors");
                    println!("PATTERN_FAIL");
                    Ok(1)
                }
            }
        }
        CheckKind::RncLines => {
            let germ = loaded.canonical().ok_or_else(|| {
                CliError::Message("line-curve check requires a canonical germ file".into())
            })?;
            if germ.trunc() < 2 * q + 2 {
                return Err(CliError::Message(format!(
                    "line-curve fit needs truncation >= 2q+2 = {}, file has {}",
                    2 * q + 2,
                    germ.trunc()
                )));
            }
            if cli.samples < 1 {
                return Err(argument("--samples", "need at least one sample"));
            }
            let directions = sample_directions(n, cli.samples);
            for sigma in &directions {
                let curve = germ
                    .line_curve(sigma)
                    .map_err(|e| CliError::Message(e.to_string()))?;
                let fit = match fit_rnc(&curve, q) {
                    Ok(fit) => fit,
                    Err(RncError::BadTangent) => None,
                    Err(e) => return Err(CliError::Message(e.to_string())),
                };
                match fit {
                    Some(_) => eprintln!("direction {} fits", sigma_string(sigma)),
                    None => {
                        eprintln!(
                            "direction {} admits no degree-{q} rational representation",
                            sigma_string(sigma)
                        );
                        println!("RNC_LINES_FAIL sigma={}", sigma_string(sigma));
                        return Ok(1);
                    }
                }
            }
            println!("RNC_LINES_OK samples={}", directions.len());
            Ok(0)
        }
    }
}

pub fn reduce(
    file: &Path,
    trace_out: Option<&Path>,
    replay: Option<&Path>,
) -> Result<u8, CliError> {
    let (germ_file, loaded) = read_germ_file(file)?;
    let raw = loaded.to_raw();

    if let Some(trace_path) = replay {
        let (_, trace) = read_trace_file(trace_path)?;
        return match replay_trace(&raw, &trace) {
            Ok(()) => {
                eprintln!("trace verified against {}", file.display());
                println!("REPLAY_OK");
                Ok(0)
            }
            Err(reason) => {
                eprintln!("replay failed: {reason}");
                println!("REPLAY_FAIL");
                Ok(1)
            }
        };
    }

    let trace = run_pipeline(&raw, germ_file.q).map_err(|e| CliError::Message(e.to_string()))?;
    let location = match trace_out {
        Some(path) => {
            write_json(path, &trace_to_file(&trace))?;
            format!(" trace={}", path.display())
        }
        None => String::new(),
    };
    match trace.verdict {
        PipelineVerdict::Reduced => {
            eprintln!("every stage advanced; final form reached");
            println!("REDUCED{location}");
            Ok(0)
        }
        PipelineVerdict::NotQRegular => {
            eprintln!(
                "osculating dimensions {} fall short of {}",
                dims_string(&trace.osculating_dims),
                ambient_dim(trace.n, trace.q)
            );
            println!("NOT_Q_REGULAR{location}");
            Ok(1)
        }
        PipelineVerdict::NotPropertyP { stage } => {
            eprintln!("stage {stage} certified a violated identity");
            println!("NOT_PROPERTY_P stage={stage}{location}");
            Ok(1)
        }
    }
}

pub fn decide(cli: &Cli, file: &Path, report: Option<&Path>) -> Result<u8, CliError> {
    if cli.samples < 1 {
        return Err(argument("--samples", "need at least one sample"));
    }
    let (germ_file, loaded) = read_germ_file(file)?;
    let raw = loaded.to_raw();
    let verdict = decide_veronese(&raw, germ_file.q, cli.samples)
        .map_err(|e| CliError::Message(e.to_string()))?;

    match &verdict {
        Verdict::Veronese { trace } => {
            eprintln!("witness homography and parameter change recorded in the trace");
            if let Some(final_germ) = &trace.final_germ {
                eprintln!("final form:\n{}", format::describe_germ(final_germ));
            }
        }
        Verdict::NotQRegular { trace } => {
            eprintln!(
                "osculating dimensions {} fall short of {}",
                dims_string(&trace.osculating_dims),
                ambient_dim(trace.n, trace.q)
            );
        }
        Verdict::NotPropertyP { certificate, .. } => {
            eprintln!(
                "violated identity: {:?} at weight {}{}",
                certificate.identity,
                certificate.weight,
                certificate
                    .pivot
                    .as_ref()
                    .map(|p| format!(", pivot {p}"))
                    .unwrap_or_default()
            );
            eprintln!("evidence: {}", certificate.polynomial);
        }
        Verdict::PropertyPNotVeronese { residual_factors, failing_directions, .. } => {
            for (k, factor) in residual_factors {
                eprintln!("weight {k} residual factor: {factor}");
            }
            for sigma in failing_directions {
                eprintln!("no bounded-degree representation along {}", sigma_string(sigma));
            }
        }
    }

    let location = match report {
        Some(path) => {
            write_json(path, &decide_report(&verdict))?;
            format!(" report={}", path.display())
        }
        None => String::new(),
    };
    println!("{}{location}", verdict.name());
    Ok(if verdict.is_veronese() { 0 } else { 1 })
}

