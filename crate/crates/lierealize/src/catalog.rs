//! Machine-readable database of the twenty realizations, loaded from a
//! versioned data file so the formulas stay auditable as source text.

use crate::algebra::{verify_realization, AlgebraTag, RealizationFailure, StructureConstants};
use crate::liefield::{FieldError, VectorField};
use crate::parser::{parse_field, ParseDiagnostic};
use crate::symexpr::{Rat, Ratio};
use std::collections::BTreeMap;
use std::sync::OnceLock;

const CATALOG_SOURCE: &str = include_str!("../data/catalog.txt");

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: String,
    pub values: Vec<Rat>,
}

/// One catalog record: `R(algebra, index)` with its printed formulas.
#[derive(Debug, Clone)]
pub struct RealizationEntry {
    pub algebra: AlgebraTag,
    pub index: u32,
    pub n_min: u32,
    pub params: Vec<ParamSpec>,
    /// Formulas as stored in the data file.
    pub field_sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("no entry R({algebra}, {index})")]
    UnknownEntry { algebra: AlgebraTag, index: u32 },
    #[error("n = {n} below the minimal variable count {n_min}")]
    TooFewVariables { n: u32, n_min: u32 },
    #[error("parameter `{name}` = {value} outside the admissible set")]
    ParamOutOfRange { name: String, value: String },
    #[error("missing value for parameter `{0}`")]
    MissingParam(String),
    #[error("unknown parameter `{0}` for this entry")]
    UnknownParam(String),
    #[error("catalog data is malformed: {0}")]
    Malformed(String),
    #[error("formula failed to parse: {0}")]
    Parse(#[from] ParseDiagnostic),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn parse_catalog(source: &str) -> Result<Vec<RealizationEntry>, CatalogError> {
    let mut entries = Vec::new();
    let mut lines = source.lines().enumerate().peekable();
    while let Some((_, line)) = lines.next() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line != "[entry]" {
            return Err(CatalogError::Malformed(format!(
                "expected [entry] header, found `{line}`"
            )));
        }
        let mut algebra = None;
        let mut index = None;
        let mut n_min = None;
        let mut params = Vec::new();
        let mut field_sources = Vec::new();
        let mut in_fields = false;
        while let Some(&(_, peeked)) = lines.peek() {
            let t = peeked.trim();
            if t == "[entry]" {
                break;
            }
            lines.next();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if in_fields {
                field_sources.push(t.to_string());
                continue;
            }
            let Some((key, value)) = t.split_once(':') else {
                return Err(CatalogError::Malformed(format!("expected `key: value`, found `{t}`")));
            };
            let value = value.trim();
            match key.trim() {
                "algebra" => {
                    algebra = Some(AlgebraTag::parse(value).ok_or_else(|| {
                        CatalogError::Malformed(format!("unknown algebra `{value}`"))
                    })?)
                }
                "index" => {
                    index = Some(value.parse().map_err(|_| {
                        CatalogError::Malformed(format!("bad index `{value}`"))
                    })?)
                }
                "n_min" => {
                    n_min = Some(value.parse().map_err(|_| {
                        CatalogError::Malformed(format!("bad n_min `{value}`"))
                    })?)
                }
                "params" => params.push(parse_param_spec(value)?),
                "fields" => in_fields = true,
                other => {
                    return Err(CatalogError::Malformed(format!("unknown key `{other}`")))
                }
            }
        }
        entries.push(RealizationEntry {
            algebra: algebra
                .ok_or_else(|| CatalogError::Malformed("entry without algebra".into()))?,
            index: index.ok_or_else(|| CatalogError::Malformed("entry without index".into()))?,
            n_min: n_min.ok_or_else(|| CatalogError::Malformed("entry without n_min".into()))?,
            params,
            field_sources,
        });
    }
    Ok(entries)
}

fn parse_param_spec(text: &str) -> Result<ParamSpec, CatalogError> {
    // "<name> in {v1, v2, ...}"
    let (name, rest) = text
        .split_once(" in ")
        .ok_or_else(|| CatalogError::Malformed(format!("bad params spec `{text}`")))?;
    let rest = rest.trim();
    let inner = rest
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| CatalogError::Malformed(format!("bad params set `{rest}`")))?;
    let values: Result<Vec<Rat>, CatalogError> = inner
        .split(',')
        .map(|v| {
            let v = v.trim();
            let neg = v.starts_with('-');
            let body = v.trim_start_matches('-');
            let (p, q) = body.split_once('/').unwrap_or((body, "1"));
            let p: i64 = p
                .parse()
                .map_err(|_| CatalogError::Malformed(format!("bad value `{v}`")))?;
            let q: i64 = q
                .parse()
                .map_err(|_| CatalogError::Malformed(format!("bad value `{v}`")))?;
            Ok(Rat::new((if neg { -p } else { p }).into(), q.into()))
        })
        .collect();
    Ok(ParamSpec {
        name: name.trim().to_string(),
        values: values?,
    })
}

/// All twenty entries, parsed once from the data file.
pub fn list_catalog() -> &'static [RealizationEntry] {
    static CATALOG: OnceLock<Vec<RealizationEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_catalog(CATALOG_SOURCE).expect("bundled catalog must parse"))
}

pub fn find_entry(algebra: AlgebraTag, index: u32) -> Result<&'static RealizationEntry, CatalogError> {
    list_catalog()
        .iter()
        .find(|e| e.algebra == algebra && e.index == index)
        .ok_or(CatalogError::UnknownEntry { algebra, index })
}

impl RealizationEntry {
    /// Build the vector fields at `n >= n_min` with the given parameter
    /// values; coordinates above `n_min` are inert.
    pub fn instantiate(
        &self,
        n: u32,
        params: &BTreeMap<String, Rat>,
    ) -> Result<Vec<VectorField>, CatalogError> {
        if n < self.n_min {
            return Err(CatalogError::TooFewVariables { n, n_min: self.n_min });
        }
        for name in params.keys() {
            if !self.params.iter().any(|p| &p.name == name) {
                return Err(CatalogError::UnknownParam(name.clone()));
            }
        }
        for spec in &self.params {
            let value = params
                .get(&spec.name)
                .ok_or_else(|| CatalogError::MissingParam(spec.name.clone()))?;
            if !spec.values.contains(value) {
                return Err(CatalogError::ParamOutOfRange {
                    name: spec.name.clone(),
                    value: value.to_string(),
                });
            }
        }
        let mut fields = Vec::with_capacity(self.field_sources.len());
        for src in &self.field_sources {
            let parsed = parse_field(src)?;
            let mut coeffs: Vec<Ratio> = (1..=n)
                .map(|a| {
                    parsed
                        .comps
                        .get(&a)
                        .map(|e| Ratio::from_expr(e.clone()))
                        .unwrap_or_else(Ratio::zero)
                })
                .collect();
            for (name, value) in params {
                for c in &mut coeffs {
                    *c = c.subst_param(name, value).map_err(FieldError::Ratio)?;
                }
            }
            fields.push(VectorField::new(n, coeffs)?);
        }
        Ok(fields)
    }

    pub fn structure_constants(&self) -> StructureConstants {
        StructureConstants::for_tag(self.algebra).expect("catalog entries have known algebras")
    }

    /// All admissible parameter assignments (a single empty map when the
    /// entry has no parameters).
    pub fn param_assignments(&self) -> Vec<BTreeMap<String, Rat>> {
        let mut assignments = vec![BTreeMap::new()];
        for spec in &self.params {
            let mut next = Vec::new();
            for a in &assignments {
                for v in &spec.values {
                    let mut b = a.clone();
                    b.insert(spec.name.clone(), v.clone());
                    next.push(b);
                }
            }
            assignments = next;
        }
        assignments
    }
}

/// Discrepancy between a printed formula and its algebra's relations;
/// reported, never patched.
#[derive(Debug, Clone)]
pub struct Discrepancy {
    pub algebra: AlgebraTag,
    pub index: u32,
    pub n: u32,
    pub params: BTreeMap<String, Rat>,
    pub failure: RealizationFailure,
    pub printed: Vec<String>,
}

/// Verify one entry against its algebra's commutation relations and
/// faithfulness at the given `n` and parameters.
pub fn verify_entry(
    entry: &RealizationEntry,
    n: u32,
    params: &BTreeMap<String, Rat>,
) -> Result<Result<(), Discrepancy>, CatalogError> {
    let fields = entry.instantiate(n, params)?;
    let sc = entry.structure_constants();
    match verify_realization(&fields, &sc)? {
        Ok(()) => Ok(Ok(())),
        Err(failure) => Ok(Err(Discrepancy {
            algebra: entry.algebra,
            index: entry.index,
            n,
            params: params.clone(),
            failure,
            printed: entry.field_sources.clone(),
        })),
    }
}

/// Verify every entry over every admissible parameter value and
/// `n in {n_min, ..., n_min + extra_n}`; returns all discrepancies found.
pub fn verify_all(extra_n: u32, parallel: bool) -> Result<Vec<Discrepancy>, CatalogError> {
    let jobs: Vec<(usize, u32, BTreeMap<String, Rat>)> = list_catalog()
        .iter()
        .enumerate()
        .flat_map(|(idx, entry)| {
            entry.param_assignments().into_iter().flat_map(move |params| {
                (0..=extra_n).map(move |dn| (idx, entry.n_min + dn, params.clone()))
            })
        })
        .collect();
    let results = crate::par::run(jobs.len(), parallel, |i| {
        let (idx, n, ref params) = jobs[i];
        verify_entry(&list_catalog()[idx], n, params)
    });
    let mut discrepancies = Vec::new();
    for r in results {
        if let Err(d) = r? {
            discrepancies.push(d);
        }
    }
    Ok(discrepancies)
}
