//! Versioned text formats: germ files and trace files, as JSON documents
//! with all rationals serialized as exact `p/q` strings in lowest terms.
//! Parsing re-validates every invariant; printing is canonical, so
//! `parse . print` is the identity and generation is byte-deterministic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use veronese::algebra::{canonical_indices, HomogeneousPoly, MJet, MultiIndex, Rat};
use veronese::germ::{Germ, RawGerm, Reparametrization};
use veronese::linalg::Mat;
use veronese::projective::Homography;
use veronese::reduction::{
    DistinguishedSolution, IdentityKind, NormalizationData, PGroups, PipelineVerdict,
    PropertyPCertificate, ReductionTrace, StageRecord, StageVerdict, Verdict, Witness,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("invalid {path}: {message}")]
    Validation { path: String, message: String },
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Validation { path: path.into(), message: message.into() }
}

// ---------------------------------------------------------------------------
// rationals as strings

pub fn rat_string(r: &Rat) -> String {
    r.to_string()
}

/// Parse `p` or `p/q`, demanding lowest terms and a positive denominator.
pub fn parse_rat(s: &str, path: &str) -> Result<Rat, FormatError> {
    let (num, den) = match s.split_once('/') {
        None => (s, "1"),
        Some((n, d)) => (n, d),
    };
    let numerator =
        BigInt::from_str(num).map_err(|_| invalid(path, format!("bad numerator {num:?}")))?;
    let denominator =
        BigInt::from_str(den).map_err(|_| invalid(path, format!("bad denominator {den:?}")))?;
    if denominator.is_zero() {
        return Err(invalid(path, "zero denominator"));
    }
    if !denominator.is_positive() {
        return Err(invalid(path, "denominator must be positive"));
    }
    let value = Rat::new(numerator, denominator);
    if rat_string(&value) != s {
        return Err(invalid(path, format!("{s:?} is not in lowest terms")));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// terms, jets, polynomials, matrices

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct TermDto {
    pub exp: Vec<u32>,
    pub coeff: String,
}

pub fn jet_terms(jet: &MJet) -> Vec<TermDto> {
    jet.terms()
        .map(|(alpha, coeff)| TermDto { exp: alpha.entries().to_vec(), coeff: rat_string(coeff) })
        .collect()
}

pub fn terms_to_jet(
    n: usize,
    trunc: u32,
    terms: &[TermDto],
    path: &str,
) -> Result<MJet, FormatError> {
    let mut converted = Vec::with_capacity(terms.len());
    for (i, term) in terms.iter().enumerate() {
        let term_path = format!("{path}.terms[{i}]");
        if term.exp.len() != n {
            return Err(invalid(&term_path, format!("exponent needs {n} entries")));
        }
        let coeff = parse_rat(&term.coeff, &term_path)?;
        if coeff.is_zero() {
            return Err(invalid(&term_path, "zero coefficients are not stored"));
        }
        converted.push((MultiIndex::new(term.exp.clone()), coeff));
    }
    MJet::from_terms(n, trunc, converted).map_err(|e| invalid(path, e.to_string()))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct PolyDto {
    pub degree: u32,
    pub terms: Vec<TermDto>,
}

pub fn poly_dto(poly: &HomogeneousPoly) -> PolyDto {
    PolyDto {
        degree: poly.degree(),
        terms: poly
            .terms()
            .map(|(alpha, coeff)| TermDto {
                exp: alpha.entries().to_vec(),
                coeff: rat_string(coeff),
            })
            .collect(),
    }
}

pub fn dto_poly(n: usize, dto: &PolyDto, path: &str) -> Result<HomogeneousPoly, FormatError> {
    let mut terms = Vec::with_capacity(dto.terms.len());
    for (i, term) in dto.terms.iter().enumerate() {
        let term_path = format!("{path}.terms[{i}]");
        terms.push((MultiIndex::new(term.exp.clone()), parse_rat(&term.coeff, &term_path)?));
    }
    HomogeneousPoly::from_terms(n, dto.degree, terms).map_err(|e| invalid(path, e.to_string()))
}

pub fn mat_dto(m: &Mat) -> Vec<Vec<String>> {
    m.rows()
        .iter()
        .map(|row| row.iter().map(rat_string).collect())
        .collect()
}

pub fn dto_mat(rows: &[Vec<String>], path: &str) -> Result<Mat, FormatError> {
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (j, v) in row.iter().enumerate() {
            r.push(parse_rat(v, &format!("{path}[{i}][{j}]"))?);
        }
        out.push(r);
    }
    Ok(Mat::from_rows(out))
}

// ---------------------------------------------------------------------------
// germ files

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ComponentDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<u32>>,
    pub terms: Vec<TermDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct GermFile {
    pub format_version: u32,
    pub n: usize,
    pub q: u32,
    pub trunc: u32,
    pub kind: String,
    pub components: Vec<ComponentDto>,
}

/// Either a canonical germ or a raw parametrization, as read from a file.
pub enum LoadedGerm {
    Canonical(Germ),
    Raw(RawGerm),
}

impl LoadedGerm {
    pub fn to_raw(&self) -> RawGerm {
        match self {
            LoadedGerm::Canonical(g) => g.to_raw(),
            LoadedGerm::Raw(r) => r.clone(),
        }
    }

    pub fn canonical(&self) -> Option<&Germ> {
        match self {
            LoadedGerm::Canonical(g) => Some(g),
            LoadedGerm::Raw(_) => None,
        }
    }
}

pub fn germ_to_file(germ: &Germ) -> GermFile {
    let indices = germ.indices();
    GermFile {
        format_version: FORMAT_VERSION,
        n: germ.n(),
        q: germ.q(),
        trunc: germ.trunc(),
        kind: "germ".into(),
        components: indices
            .iter()
            .zip(germ.components())
            .map(|(alpha, jet)| ComponentDto {
                alpha: Some(alpha.entries().to_vec()),
                terms: jet_terms(jet),
            })
            .collect(),
    }
}

pub fn raw_to_file(raw: &RawGerm, q: u32) -> GermFile {
    GermFile {
        format_version: FORMAT_VERSION,
        n: raw.n(),
        q,
        trunc: raw.trunc(),
        kind: "raw".into(),
        components: raw
            .components()
            .iter()
            .map(|jet| ComponentDto { alpha: None, terms: jet_terms(jet) })
            .collect(),
    }
}

pub fn file_to_germ(file: &GermFile) -> Result<LoadedGerm, FormatError> {
    if file.format_version != FORMAT_VERSION {
        return Err(invalid(
            "format_version",
            format!("expected {FORMAT_VERSION}, found {}", file.format_version),
        ));
    }
    let mut jets = Vec::with_capacity(file.components.len());
    for (i, component) in file.components.iter().enumerate() {
        jets.push(terms_to_jet(
            file.n,
            file.trunc,
            &component.terms,
            &format!("components[{i}]"),
        )?);
    }
    match file.kind.as_str() {
        "germ" => {
            let expected = canonical_indices(file.n, file.q);
            if file.components.len() != expected.len() {
                return Err(invalid(
                    "components",
                    format!("expected {} canonical components", expected.len()),
                ));
            }
            for (i, (component, alpha)) in file.components.iter().zip(&expected).enumerate() {
                match &component.alpha {
                    Some(a) if *a == alpha.entries() => {}
                    Some(_) => {
                        return Err(invalid(
                            format!("components[{i}].alpha"),
                            "does not match the canonical coordinate order",
                        ))
                    }
                    None => {
                        return Err(invalid(
                            format!("components[{i}].alpha"),
                            "canonical germ files must name their coordinates",
                        ))
                    }
                }
            }
            let germ = Germ::new(file.n, file.q, file.trunc, jets)
                .map_err(|e| invalid("components", e.to_string()))?;
            Ok(LoadedGerm::Canonical(germ))
        }
        "raw" => {
            for (i, component) in file.components.iter().enumerate() {
                if component.alpha.is_some() {
                    return Err(invalid(
                        format!("components[{i}].alpha"),
                        "raw germ files must not name coordinates",
                    ));
                }
            }
            let raw = RawGerm::new(file.n, file.trunc, jets)
                .map_err(|e| invalid("components", e.to_string()))?;
            Ok(LoadedGerm::Raw(raw))
        }
        other => Err(invalid("kind", format!("unknown kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// trace files

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct GroupEntryDto {
    pub alpha: Vec<u32>,
    pub poly: PolyDto,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct GroupsDto {
    pub low: Vec<GroupEntryDto>,
    pub high: Vec<GroupEntryDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct NormalizationDto {
    pub rescale: PolyDto,
    pub shifts: Vec<PolyDto>,
    pub linear_fix: Vec<Vec<String>>,
    pub carry_first: PolyDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carry_second: Option<PolyDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct MultiplierDto {
    pub weight: u32,
    pub poly: PolyDto,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct SolutionDto {
    pub corrections: Vec<PolyDto>,
    pub multipliers: Vec<MultiplierDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct CertificateDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<u32>,
    pub identity: String,
    pub weight: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pivot: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer: Option<u32>,
    pub polynomial: PolyDto,
    pub divisor_power: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_term: Option<TermDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct StageDto {
    pub r: u32,
    pub extracted: GroupsDto,
    pub normalization: NormalizationDto,
    pub normalized: GroupsDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDto>,
    pub verdict: String,
    pub nonzero: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct WitnessDto {
    pub matrix: Vec<Vec<String>>,
    pub denominator_form: Vec<String>,
    pub reparam: Vec<Vec<TermDto>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub format_version: u32,
    pub n: usize,
    pub q: u32,
    pub trunc: u32,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<u32>,
    pub osculating_dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_matrix: Option<Vec<Vec<String>>>,
    pub stages: Vec<StageDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_germ: Option<Vec<ComponentDto>>,
    pub witness: WitnessDto,
}

fn identity_name(kind: IdentityKind) -> &'static str {
    match kind {
        IdentityKind::ScalingDivisibility => "scaling-divisibility",
        IdentityKind::CorrectionDivisibility => "correction-divisibility",
        IdentityKind::SharedCorrectionMismatch => "shared-correction-mismatch",
        IdentityKind::MultiplierIdentity => "multiplier-identity",
        IdentityKind::FamilyPattern => "family-pattern",
    }
}

fn parse_identity(name: &str) -> Result<IdentityKind, FormatError> {
    Ok(match name {
        "scaling-divisibility" => IdentityKind::ScalingDivisibility,
        "correction-divisibility" => IdentityKind::CorrectionDivisibility,
        "shared-correction-mismatch" => IdentityKind::SharedCorrectionMismatch,
        "multiplier-identity" => IdentityKind::MultiplierIdentity,
        "family-pattern" => IdentityKind::FamilyPattern,
        other => return Err(invalid("identity", format!("unknown identity {other:?}"))),
    })
}

fn groups_dto(p: &PGroups) -> GroupsDto {
    let entry = |(alpha, poly): (&MultiIndex, &HomogeneousPoly)| GroupEntryDto {
        alpha: alpha.entries().to_vec(),
        poly: poly_dto(poly),
    };
    GroupsDto {
        low: p.low().iter().map(entry).collect(),
        high: p.high().iter().map(entry).collect(),
    }
}

fn dto_groups(
    n: usize,
    q: u32,
    r: u32,
    dto: &GroupsDto,
    path: &str,
) -> Result<PGroups, FormatError> {
    let read = |entries: &[GroupEntryDto],
                side: &str|
     -> Result<BTreeMap<MultiIndex, HomogeneousPoly>, FormatError> {
        let mut out = BTreeMap::new();
        for (i, entry) in entries.iter().enumerate() {
            let p = dto_poly(n, &entry.poly, &format!("{path}.{side}[{i}]"))?;
            out.insert(MultiIndex::new(entry.alpha.clone()), p);
        }
        Ok(out)
    };
    PGroups::from_parts(q, r, read(&dto.low, "low")?, read(&dto.high, "high")?)
        .map_err(|e| invalid(path, e.to_string()))
}

pub fn certificate_dto(cert: &PropertyPCertificate) -> CertificateDto {
    CertificateDto {
        stage: cert.stage,
        identity: identity_name(cert.identity).into(),
        weight: cert.weight,
        var: cert.var,
        pivot: cert.pivot.as_ref().map(|a| a.entries().to_vec()),
        layer: cert.layer,
        polynomial: poly_dto(&cert.polynomial),
        divisor_power: cert.divisor_power,
        witness_term: cert.witness_term.as_ref().map(|(alpha, coeff)| TermDto {
            exp: alpha.entries().to_vec(),
            coeff: rat_string(coeff),
        }),
    }
}

fn dto_certificate(
    n: usize,
    dto: &CertificateDto,
    path: &str,
) -> Result<PropertyPCertificate, FormatError> {
    let witness_term = match &dto.witness_term {
        None => None,
        Some(term) => Some((
            MultiIndex::new(term.exp.clone()),
            parse_rat(&term.coeff, &format!("{path}.witness_term"))?,
        )),
    };
    Ok(PropertyPCertificate {
        stage: dto.stage,
        identity: parse_identity(&dto.identity)?,
        weight: dto.weight,
        var: dto.var,
        pivot: dto.pivot.clone().map(MultiIndex::new),
        layer: dto.layer,
        polynomial: dto_poly(n, &dto.polynomial, &format!("{path}.polynomial"))?,
        divisor_power: dto.divisor_power,
        witness_term,
    })
}

pub fn trace_to_file(trace: &ReductionTrace) -> TraceFile {
    let (verdict, failed_stage) = match trace.verdict {
        PipelineVerdict::Reduced => ("reduced".to_string(), None),
        PipelineVerdict::NotQRegular => ("not-q-regular".to_string(), None),
        PipelineVerdict::NotPropertyP { stage } => ("not-property-p".to_string(), Some(stage)),
    };
    TraceFile {
        format_version: FORMAT_VERSION,
        n: trace.n,
        q: trace.q,
        trunc: trace.trunc,
        verdict,
        failed_stage,
        osculating_dims: trace.osculating_dims.clone(),
        initial_matrix: trace.initial_homography.as_ref().map(|h| mat_dto(h.linear_part())),
        stages: trace
            .stages
            .iter()
            .map(|stage| StageDto {
                r: stage.r,
                extracted: groups_dto(&stage.extracted),
                normalization: NormalizationDto {
                    rescale: poly_dto(&stage.normalization.rescale_form),
                    shifts: stage.normalization.shifts.iter().map(poly_dto).collect(),
                    linear_fix: mat_dto(&stage.normalization.linear_fix),
                    carry_first: poly_dto(&stage.normalization.carry_first),
                    carry_second: stage.normalization.carry_second.as_ref().map(poly_dto),
                },
                normalized: groups_dto(&stage.normalized),
                solution: stage.solution.as_ref().map(|sol| SolutionDto {
                    corrections: sol.corrections.iter().map(poly_dto).collect(),
                    multipliers: sol
                        .multipliers
                        .iter()
                        .map(|(weight, poly)| MultiplierDto {
                            weight: *weight,
                            poly: poly_dto(poly),
                        })
                        .collect(),
                }),
                certificate: stage.certificate.as_ref().map(certificate_dto),
                verdict: match stage.verdict {
                    StageVerdict::Advance => "advance".into(),
                    StageVerdict::Fail => "fail".into(),
                },
                nonzero: stage.nonzero.iter().map(|a| a.entries().to_vec()).collect(),
            })
            .collect(),
        final_germ: trace
            .final_germ
            .as_ref()
            .map(|g| germ_to_file(g).components),
        witness: WitnessDto {
            matrix: mat_dto(trace.witness.homography.linear_part()),
            denominator_form: trace
                .witness
                .homography
                .denominator_form()
                .iter()
                .map(rat_string)
                .collect(),
            reparam: trace.witness.reparam.maps().iter().map(jet_terms).collect(),
        },
    }
}

pub fn file_to_trace(file: &TraceFile) -> Result<ReductionTrace, FormatError> {
    if file.format_version != FORMAT_VERSION {
        return Err(invalid(
            "format_version",
            format!("expected {FORMAT_VERSION}, found {}", file.format_version),
        ));
    }
    let n = file.n;
    let verdict = match (file.verdict.as_str(), file.failed_stage) {
        ("reduced", None) => PipelineVerdict::Reduced,
        ("not-q-regular", None) => PipelineVerdict::NotQRegular,
        ("not-property-p", Some(stage)) => PipelineVerdict::NotPropertyP { stage },
        (other, stage) => {
            return Err(invalid(
                "verdict",
                format!("inconsistent verdict {other:?} with failed_stage {stage:?}"),
            ))
        }
    };
    let initial_homography = match &file.initial_matrix {
        None => None,
        Some(rows) => Some(
            Homography::linear(dto_mat(rows, "initial_matrix")?)
                .map_err(|e| invalid("initial_matrix", e.to_string()))?,
        ),
    };
    let mut stages = Vec::with_capacity(file.stages.len());
    for (i, stage) in file.stages.iter().enumerate() {
        let path = format!("stages[{i}]");
        let verdict = match stage.verdict.as_str() {
            "advance" => StageVerdict::Advance,
            "fail" => StageVerdict::Fail,
            other => {
                return Err(invalid(
                    format!("{path}.verdict"),
                    format!("unknown stage verdict {other:?}"),
                ))
            }
        };
        let mut shifts = Vec::with_capacity(stage.normalization.shifts.len());
        for (j, shift) in stage.normalization.shifts.iter().enumerate() {
            shifts.push(dto_poly(n, shift, &format!("{path}.normalization.shifts[{j}]"))?);
        }
        let carry_second = match &stage.normalization.carry_second {
            None => None,
            Some(p) => Some(dto_poly(n, p, &format!("{path}.normalization.carry_second"))?),
        };
        let solution = match &stage.solution {
            None => None,
            Some(sol) => {
                let mut corrections = Vec::with_capacity(sol.corrections.len());
                for (j, c) in sol.corrections.iter().enumerate() {
                    corrections.push(dto_poly(n, c, &format!("{path}.solution.corrections[{j}]"))?);
                }
                let mut multipliers = BTreeMap::new();
                for m in &sol.multipliers {
                    multipliers.insert(
                        m.weight,
                        dto_poly(n, &m.poly, &format!("{path}.solution.multipliers"))?,
                    );
                }
                Some(DistinguishedSolution { r: stage.r, corrections, multipliers })
            }
        };
        let certificate = match &stage.certificate {
            None => None,
            Some(c) => Some(dto_certificate(n, c, &format!("{path}.certificate"))?),
        };
        stages.push(StageRecord {
            r: stage.r,
            extracted: dto_groups(n, file.q, stage.r, &stage.extracted, &format!("{path}.extracted"))?,
            normalization: NormalizationData {
                r: stage.r,
                rescale_form: dto_poly(
                    n,
                    &stage.normalization.rescale,
                    &format!("{path}.normalization.rescale"),
                )?,
                shifts,
                linear_fix: dto_mat(
                    &stage.normalization.linear_fix,
                    &format!("{path}.normalization.linear_fix"),
                )?,
                carry_first: dto_poly(
                    n,
                    &stage.normalization.carry_first,
                    &format!("{path}.normalization.carry_first"),
                )?,
                carry_second,
            },
            normalized: dto_groups(n, file.q, stage.r, &stage.normalized, &format!("{path}.normalized"))?,
            solution,
            certificate,
            verdict,
            nonzero: stage.nonzero.iter().cloned().map(MultiIndex::new).collect(),
        });
    }
    let final_germ = match &file.final_germ {
        None => None,
        Some(components) => {
            let germ_file = GermFile {
                format_version: FORMAT_VERSION,
                n,
                q: file.q,
                trunc: file.trunc,
                kind: "germ".into(),
                components: components.clone(),
            };
            match file_to_germ(&germ_file)? {
                LoadedGerm::Canonical(g) => Some(g),
                LoadedGerm::Raw(_) => unreachable!("kind is germ"),
            }
        }
    };
    let homography = Homography::new(
        dto_mat(&file.witness.matrix, "witness.matrix")?,
        file.witness
            .denominator_form
            .iter()
            .enumerate()
            .map(|(i, s)| parse_rat(s, &format!("witness.denominator_form[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
    )
    .map_err(|e| invalid("witness", e.to_string()))?;
    let mut maps = Vec::with_capacity(file.witness.reparam.len());
    for (i, terms) in file.witness.reparam.iter().enumerate() {
        maps.push(terms_to_jet(n, file.trunc, terms, &format!("witness.reparam[{i}]"))?);
    }
    let reparam =
        Reparametrization::new(maps).map_err(|e| invalid("witness.reparam", e.to_string()))?;
    Ok(ReductionTrace {
        n,
        q: file.q,
        trunc: file.trunc,
        osculating_dims: file.osculating_dims.clone(),
        initial_homography,
        stages,
        final_germ,
        witness: Witness { homography, reparam },
        verdict,
    })
}

// ---------------------------------------------------------------------------
// decision reports

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FactorDto {
    pub weight: u32,
    pub terms: Vec<TermDto>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct DecideReport {
    pub format_version: u32,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_factors: Option<Vec<FactorDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_directions: Option<Vec<Vec<String>>>,
    pub trace: TraceFile,
}

pub fn decide_report(verdict: &Verdict) -> DecideReport {
    let base = DecideReport {
        format_version: FORMAT_VERSION,
        verdict: verdict.name().into(),
        certificate: None,
        residual_factors: None,
        failing_directions: None,
        trace: trace_to_file(verdict.trace()),
    };
    match verdict {
        Verdict::Veronese { .. } | Verdict::NotQRegular { .. } => base,
        Verdict::NotPropertyP { certificate, .. } => DecideReport {
            certificate: Some(certificate_dto(certificate)),
            ..base
        },
        Verdict::PropertyPNotVeronese { residual_factors, failing_directions, .. } => {
            DecideReport {
                residual_factors: Some(
                    residual_factors
                        .iter()
                        .map(|(weight, jet)| FactorDto { weight: *weight, terms: jet_terms(jet) })
                        .collect(),
                ),
                failing_directions: Some(
                    failing_directions
                        .iter()
                        .map(|sigma| sigma.iter().map(rat_string).collect())
                        .collect(),
                ),
                ..base
            }
        }
    }
}

// ---------------------------------------------------------------------------
// io

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn read_germ_file(path: &Path) -> Result<(GermFile, LoadedGerm), FormatError> {
    let body = fs::read_to_string(path)?;
    let file: GermFile = serde_json::from_str(&body)?;
    let germ = file_to_germ(&file)?;
    Ok((file, germ))
}

pub fn read_trace_file(path: &Path) -> Result<(TraceFile, ReductionTrace), FormatError> {
    let body = fs::read_to_string(path)?;
    let file: TraceFile = serde_json::from_str(&body)?;
    let trace = file_to_trace(&file)?;
    Ok((file, trace))
}

/// Render a germ in one-line human form for reports.
pub fn describe_germ(germ: &Germ) -> String {
    let mut out = String::new();
    for (alpha, jet) in germ.indices().iter().zip(germ.components()) {
        let _ = writeln!(out, "  x{alpha} = {jet}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_round_trip() {
        for s in ["0", "1", "-7", "3/4", "-22/7"] {
            let r = parse_rat(s, "t").unwrap();
            assert_eq!(rat_string(&r), s);
        }
        assert!(parse_rat("2/4", "t").is_err(), "not lowest terms");
        assert!(parse_rat("1/-2", "t").is_err(), "negative denominator");
        assert!(parse_rat("1/0", "t").is_err());
        assert!(parse_rat("x", "t").is_err());
    }

    #[test]
    fn germ_files_round_trip() {
        let germ = veronese::germ::veronese(2, 2, 7).unwrap();
        let file = germ_to_file(&germ);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: GermFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        match file_to_germ(&parsed).unwrap() {
            LoadedGerm::Canonical(g) => assert_eq!(g, germ),
            LoadedGerm::Raw(_) => panic!("expected canonical"),
        }
    }

    #[test]
    fn germ_file_validation_catches_misorder() {
        let germ = veronese::germ::veronese(2, 2, 7).unwrap();
        let mut file = germ_to_file(&germ);
        file.components.swap(0, 1);
        assert!(matches!(
            file_to_germ(&file),
            Err(FormatError::Validation { .. })
        ));
    }

    #[test]
    fn trace_files_round_trip() {
        let v = veronese::germ::veronese(2, 2, 7).unwrap();
        let (disguised, _, _) = veronese::germ::disguise(&v, 3, 2).unwrap();
        let trace = veronese::reduction::run_pipeline(&disguised.to_raw(), 2).unwrap();
        let file = trace_to_file(&trace);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: TraceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        let rebuilt = file_to_trace(&parsed).unwrap();
        assert_eq!(rebuilt, trace);
    }
}
