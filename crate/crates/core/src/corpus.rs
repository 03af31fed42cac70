//! The case corpus: one JSON file per family at `family-N/cases.json`.
//!
//! Files are read into raw serde structures (kept verbatim for canonical
//! saving) and validated into [`CaseSpec`]s. See the README for the field
//! reference, the expression grammar and the parameter naming table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{is_pattern_symbol, Orientation, Pattern, Shape};
use crate::error::{CorpusError, ExprError};
use crate::expr::{eval, is_param_name, parse, parse_matrix, Expr, MatExpr, ParamEnv};
use crate::matd::Mat;
use crate::scalar::{Coefficient, Scalar};

pub const CORPUS_FORMAT: &str = "dd-gl2-corpus/1";

/// Expected number of cases per family, families 1 through 7.
pub const FAMILY_SIZES: [usize; 7] = [8, 15, 20, 8, 4, 7, 18];

/// Rejection-sampling budget per draw.
pub const MAX_ATTEMPTS: usize = 2000;

// Raw file structures -------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFamily {
    pub format: String,
    pub family: u32,
    pub d: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neq: Vec<[String; 2]>,
    pub cases: Vec<RawCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCase {
    pub id: String,
    pub c11: String,
    pub c12: String,
    pub c21: String,
    pub c22: String,
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<RawBranch>,
    pub dim_r: usize,
    pub dim_i: usize,
    pub r_pattern: RawShape,
    pub i_pattern: RawShape,
    pub perturbation: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<RawErratum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBranch {
    pub label: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub derived: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neq: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKron {
    pub left: Vec<Vec<String>>,
    pub right: Vec<Vec<String>>,
    pub orientation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKronShape {
    pub kron: RawKron,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawShape {
    Named(String),
    Grid(RawGrid),
    Kron(RawKronShape),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOverlay {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c11: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c12: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c21: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c22: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<RawBranch>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_pattern: Option<RawShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_pattern: Option<RawShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
}

impl RawOverlay {
    pub fn is_empty(&self) -> bool {
        *self == RawOverlay::default()
    }

    fn touches_generators(&self) -> bool {
        self.c11.is_some() || self.c12.is_some() || self.c21.is_some() || self.c22.is_some()
    }

    fn touches_constraints(&self) -> bool {
        self.params.is_some() || self.branches.is_some()
    }

    fn touches_table(&self) -> bool {
        self.dim_r.is_some()
            || self.dim_i.is_some()
            || self.r_pattern.is_some()
            || self.i_pattern.is_some()
            || self.perturbation.is_some()
    }

    fn apply(&self, c: &mut RawCase) {
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        set!(c11, c12, c21, c22, params, branches, dim_r, dim_i, r_pattern, i_pattern, perturbation);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawErratum {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covers: Vec<String>,
    pub note: String,
    #[serde(default, skip_serializing_if = "RawOverlay::is_empty")]
    pub overlay: RawOverlay,
}

// Validated structures -----------------------------------------------------

/// The checks a verification performs; errata declare which they cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Relations,
    Det,
    Invertible,
    DimR,
    DimI,
    RPattern,
    IPattern,
    Perturbation,
    RankInstability,
    Draw,
    Internal,
}

impl CheckKind {
    pub const COVERABLE: [CheckKind; 8] = [
        CheckKind::Relations,
        CheckKind::Det,
        CheckKind::Invertible,
        CheckKind::DimR,
        CheckKind::DimI,
        CheckKind::RPattern,
        CheckKind::IPattern,
        CheckKind::Perturbation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Relations => "relations",
            CheckKind::Det => "det",
            CheckKind::Invertible => "invertible",
            CheckKind::DimR => "dim_r",
            CheckKind::DimI => "dim_i",
            CheckKind::RPattern => "r_pattern",
            CheckKind::IPattern => "i_pattern",
            CheckKind::Perturbation => "perturbation",
            CheckKind::RankInstability => "rank_instability",
            CheckKind::Draw => "draw",
            CheckKind::Internal => "internal",
        }
    }

    pub fn from_name(s: &str) -> Option<CheckKind> {
        CheckKind::COVERABLE.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErratumKind {
    /// Printed notation normalized at encoding time; no overlay.
    Transcription,
    /// Corrected parameter constraints.
    Constraint,
    /// Corrected generator entries.
    Entry,
    /// Corrected expected values (dimensions, shapes, perturbation).
    Table,
}

impl ErratumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErratumKind::Transcription => "transcription",
            ErratumKind::Constraint => "constraint",
            ErratumKind::Entry => "entry",
            ErratumKind::Table => "table",
        }
    }

    fn from_name(s: &str) -> Option<ErratumKind> {
        [ErratumKind::Transcription, ErratumKind::Constraint, ErratumKind::Entry, ErratumKind::Table]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    /// True for corrections of the case data rather than of the table.
    pub fn is_input_side(self) -> bool {
        matches!(self, ErratumKind::Constraint | ErratumKind::Entry)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Erratum {
    pub id: String,
    pub kind: ErratumKind,
    pub covers: Vec<CheckKind>,
    pub note: String,
    pub overlay: RawOverlay,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatField {
    pub text: String,
    pub expr: MatExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation {
    Zero,
    Matrix(MatField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub label: String,
    /// Derived parameters in evaluation order.
    pub derived: Vec<(String, Expr)>,
    pub neq: Vec<(Expr, Expr)>,
}

/// Family-level data shared by its cases.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyCtx {
    pub family: u32,
    pub d: MatField,
    pub params: Vec<String>,
    pub neq: Vec<(Expr, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseSpec {
    pub id: String,
    pub family: u32,
    pub index: u32,
    pub d: MatField,
    /// C11, C12, C21, C22.
    pub gens: [MatField; 4],
    /// Family parameters followed by case parameters.
    pub params: Vec<String>,
    pub family_neq: Vec<(Expr, Expr)>,
    /// At least one; a case without printed constraints has one empty branch.
    pub branches: Vec<Branch>,
    pub dim_r: usize,
    pub dim_i: usize,
    pub r_shape: Shape,
    pub i_shape: Shape,
    pub perturbation: Perturbation,
    pub errata: Vec<Erratum>,
    pub raw: RawCase,
    pub ctx: FamilyCtx,
}

impl CaseSpec {
    /// Ordering key (family, index).
    pub fn key(&self) -> (u32, u32) {
        (self.family, self.index)
    }

    /// True if any erratum carries an overlay.
    pub fn has_overlay(&self) -> bool {
        self.errata.iter().any(|e| !e.overlay.is_empty())
    }

    /// The case with every erratum overlay applied in order, or `None` when
    /// there is nothing to apply.
    pub fn corrected(&self) -> Result<Option<CaseSpec>, CorpusError> {
        self.corrected_by(|_| true)
    }

    /// Like [`CaseSpec::corrected`], applying only the errata selected by `keep`.
    pub fn corrected_by(&self, keep: impl Fn(&Erratum) -> bool) -> Result<Option<CaseSpec>, CorpusError> {
        let chosen: Vec<&Erratum> = self.errata.iter().filter(|e| keep(e) && !e.overlay.is_empty()).collect();
        if chosen.is_empty() {
            return Ok(None);
        }
        let mut raw = self.raw.clone();
        for e in chosen {
            e.overlay.apply(&mut raw);
        }
        raw.errata.clear();
        build_case(&raw, &self.ctx).map(Some)
    }

    /// Errata that cover `check`.
    pub fn covering(&self, check: CheckKind) -> Vec<&Erratum> {
        self.errata.iter().filter(|e| e.covers.contains(&check)).collect()
    }

    /// Evaluates C11, C12, C21, C22 under `env`.
    pub fn generators(&self, env: &ParamEnv) -> Result<[Mat; 4], ExprError> {
        Ok([
            Mat::eval(&self.gens[0].expr, env)?,
            Mat::eval(&self.gens[1].expr, env)?,
            Mat::eval(&self.gens[2].expr, env)?,
            Mat::eval(&self.gens[3].expr, env)?,
        ])
    }

    fn evaluate_all(&self, env: &ParamEnv) -> Result<(), ExprError> {
        self.generators(env)?;
        Mat::eval(&self.d.expr, env)?;
        if let Perturbation::Matrix(m) = &self.perturbation {
            Mat::eval(&m.expr, env)?;
        }
        for s in [&self.r_shape, &self.i_shape] {
            crate::algebra::pattern_space(s, 4, env)?;
        }
        Ok(())
    }
}

fn field_err(case: &str, field: &str) -> impl Fn(ExprError) -> CorpusError {
    let case = case.to_string();
    let field = field.to_string();
    move |source| CorpusError::Expr { case: case.clone(), field: field.clone(), source }
}

fn invalid(case: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::Invalid { case: case.to_string(), message: message.into() }
}

fn mat_field(case: &str, field: &str, text: &str) -> Result<MatField, CorpusError> {
    let expr = parse_matrix(text).map_err(field_err(case, field))?;
    Ok(MatField { text: text.to_string(), expr })
}

fn scalar_expr(case: &str, field: &str, text: &str) -> Result<Expr, CorpusError> {
    parse(text).map_err(|e| field_err(case, field)(e.into()))
}

fn neq_pairs(case: &str, field: &str, raw: &[[String; 2]]) -> Result<Vec<(Expr, Expr)>, CorpusError> {
    raw.iter().map(|[a, b]| Ok((scalar_expr(case, field, a)?, scalar_expr(case, field, b)?))).collect()
}

fn grid(case: &str, field: &str, rows: &[Vec<String>], n: usize) -> Result<Pattern, CorpusError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(case, format!("{field}: expected a {n}x{n} grid")));
    }
    Pattern::parse(rows).map_err(field_err(case, field))
}

fn shape(case: &str, field: &str, raw: &RawShape) -> Result<Shape, CorpusError> {
    match raw {
        RawShape::Named(s) if s == "scalars" => Ok(Shape::Scalars),
        RawShape::Named(s) => Err(invalid(case, format!("{field}: unknown shape `{s}`"))),
        RawShape::Grid(g) => Ok(Shape::Grid(grid(case, field, &g.rows, 4)?)),
        RawShape::Kron(k) => {
            let orientation = match k.kron.orientation.as_str() {
                "standard" => Orientation::Standard,
                "swapped" => Orientation::Swapped,
                o => return Err(invalid(case, format!("{field}: unknown orientation `{o}`"))),
            };
            Ok(Shape::Kron {
                left: grid(case, field, &k.kron.left, 2)?,
                right: grid(case, field, &k.kron.right, 2)?,
                orientation,
            })
        }
    }
}

fn check_params_declared(case: &str, field: &str, used: &[String], declared: &[String]) -> Result<(), CorpusError> {
    for u in used {
        if !declared.contains(u) {
            return Err(invalid(case, format!("{field}: undeclared parameter `{u}`")));
        }
    }
    Ok(())
}

fn order_derived(
    case: &str,
    raw: &BTreeMap<String, String>,
    params: &[String],
) -> Result<Vec<(String, Expr)>, CorpusError> {
    let mut pending: Vec<(String, Expr)> = Vec::new();
    for (k, v) in raw {
        if !params.contains(k) {
            return Err(invalid(case, format!("branch derives undeclared parameter `{k}`")));
        }
        let e = scalar_expr(case, "branches.derived", v)?;
        check_params_declared(case, "branches.derived", &e.identifiers(), params)?;
        pending.push((k.clone(), e));
    }
    let derived_names: Vec<String> = pending.iter().map(|(k, _)| k.clone()).collect();
    let mut out: Vec<(String, Expr)> = Vec::new();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for (k, e) in pending {
            let ready =
                e.identifiers().iter().all(|id| !derived_names.contains(id) || out.iter().any(|(o, _)| o == id));
            if ready {
                out.push((k, e));
            } else {
                rest.push((k, e));
            }
        }
        if rest.len() == before {
            return Err(invalid(case, "derived parameters depend on each other cyclically"));
        }
        pending = rest;
    }
    Ok(out)
}

fn parse_id(id: &str) -> Option<(u32, u32)> {
    let (f, k) = id.split_once('.')?;
    let f: u32 = f.parse().ok()?;
    let k: u32 = k.parse().ok()?;
    if f.to_string() != id.split_once('.')?.0 || k.to_string() != id.split_once('.')?.1 {
        return None;
    }
    Some((f, k))
}

fn build_erratum(case: &str, raw: &RawErratum) -> Result<Erratum, CorpusError> {
    let kind = ErratumKind::from_name(&raw.kind)
        .ok_or_else(|| invalid(case, format!("erratum {}: unknown kind `{}`", raw.id, raw.kind)))?;
    let mut covers = Vec::new();
    for c in &raw.covers {
        let k =
            CheckKind::from_name(c).ok_or_else(|| invalid(case, format!("erratum {}: unknown check `{c}`", raw.id)))?;
        if covers.contains(&k) {
            return Err(invalid(case, format!("erratum {}: check `{c}` listed twice", raw.id)));
        }
        covers.push(k);
    }
    let o = &raw.overlay;
    let ok = match kind {
        ErratumKind::Transcription => o.is_empty() && covers.is_empty(),
        ErratumKind::Constraint => o.touches_constraints() && !o.touches_generators() && !o.touches_table(),
        ErratumKind::Entry => o.touches_generators() && !o.touches_table(),
        ErratumKind::Table => o.touches_table() && !o.touches_generators() && !o.touches_constraints(),
    };
    if !ok {
        return Err(invalid(case, format!("erratum {}: overlay fields do not match kind `{}`", raw.id, raw.kind)));
    }
    if kind != ErratumKind::Transcription && covers.is_empty() {
        return Err(invalid(case, format!("erratum {}: covers no check", raw.id)));
    }
    if raw.note.trim().is_empty() {
        return Err(invalid(case, format!("erratum {}: empty note", raw.id)));
    }
    Ok(Erratum { id: raw.id.clone(), kind, covers, note: raw.note.clone(), overlay: raw.overlay.clone() })
}

/// Validates one raw case in its family context.
pub fn build_case(raw: &RawCase, ctx: &FamilyCtx) -> Result<CaseSpec, CorpusError> {
    let id = raw.id.as_str();
    let (family, index) = parse_id(id).ok_or_else(|| invalid(id, "id must look like `F.K`"))?;
    if family != ctx.family {
        return Err(invalid(id, format!("listed under family {}", ctx.family)));
    }
    let mut params = ctx.params.clone();
    for p in &raw.params {
        if !is_param_name(p) || is_pattern_symbol(p) {
            return Err(invalid(id, format!("`{p}` is not a valid parameter name")));
        }
        if params.contains(p) {
            return Err(invalid(id, format!("parameter `{p}` declared twice")));
        }
        params.push(p.clone());
    }
    let gens = [
        mat_field(id, "c11", &raw.c11)?,
        mat_field(id, "c12", &raw.c12)?,
        mat_field(id, "c21", &raw.c21)?,
        mat_field(id, "c22", &raw.c22)?,
    ];
    for (name, g) in ["c11", "c12", "c21", "c22"].iter().zip(&gens) {
        check_params_declared(id, name, &g.expr.identifiers(), &params)?;
    }
    check_params_declared(id, "d", &ctx.d.expr.identifiers(), &params)?;
    let r_shape = shape(id, "r_pattern", &raw.r_pattern)?;
    let i_shape = shape(id, "i_pattern", &raw.i_pattern)?;
    check_params_declared(id, "r_pattern", &r_shape.parameters(), &params)?;
    check_params_declared(id, "i_pattern", &i_shape.parameters(), &params)?;
    let perturbation = if raw.perturbation == "zero" {
        Perturbation::Zero
    } else {
        let m = mat_field(id, "perturbation", &raw.perturbation)?;
        check_params_declared(id, "perturbation", &m.expr.identifiers(), &params)?;
        Perturbation::Matrix(m)
    };
    let mut branches = Vec::new();
    for b in &raw.branches {
        let derived = order_derived(id, &b.derived, &params)?;
        let neq = neq_pairs(id, "branches.neq", &b.neq)?;
        for (x, y) in &neq {
            check_params_declared(id, "branches.neq", &x.identifiers(), &params)?;
            check_params_declared(id, "branches.neq", &y.identifiers(), &params)?;
        }
        branches.push(Branch { label: b.label.clone(), derived, neq });
    }
    if branches.is_empty() {
        branches.push(Branch { label: "generic".into(), derived: Vec::new(), neq: Vec::new() });
    }
    let mut errata: Vec<Erratum> = Vec::new();
    for e in &raw.errata {
        let e = build_erratum(id, e)?;
        if errata.iter().any(|x| x.id == e.id) {
            return Err(invalid(id, format!("duplicate erratum id `{}`", e.id)));
        }
        errata.push(e);
    }
    let spec = CaseSpec {
        id: raw.id.clone(),
        family,
        index,
        d: ctx.d.clone(),
        gens,
        params,
        family_neq: ctx.neq.clone(),
        branches,
        dim_r: raw.dim_r,
        dim_i: raw.dim_i,
        r_shape,
        i_shape,
        perturbation,
        errata,
        raw: raw.clone(),
        ctx: ctx.clone(),
    };
    for b in 0..spec.branches.len() {
        assign_params(&spec, b, 0, 0)?;
    }
    Ok(spec)
}

/// A loaded corpus: raw family documents plus validated cases in id order.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub families: Vec<RawFamily>,
    pub cases: Vec<CaseSpec>,
}

impl Corpus {
    pub fn case(&self, id: &str) -> Option<&CaseSpec> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn family(&self, f: u32) -> Vec<&CaseSpec> {
        self.cases.iter().filter(|c| c.family == f).collect()
    }
}

fn family_ctx(doc: &RawFamily) -> Result<FamilyCtx, CorpusError> {
    let tag = format!("family {}", doc.family);
    if doc.format != CORPUS_FORMAT {
        return Err(invalid(&tag, format!("unsupported format `{}`", doc.format)));
    }
    for p in &doc.params {
        if !is_param_name(p) || is_pattern_symbol(p) {
            return Err(invalid(&tag, format!("`{p}` is not a valid parameter name")));
        }
    }
    let d = mat_field(&tag, "d", &doc.d)?;
    let neq = neq_pairs(&tag, "neq", &doc.neq)?;
    Ok(FamilyCtx { family: doc.family, d, params: doc.params.clone(), neq })
}

/// Validates family documents into a corpus without checking its size.
pub fn from_families(families: Vec<RawFamily>) -> Result<Corpus, CorpusError> {
    let mut cases: Vec<CaseSpec> = Vec::new();
    for doc in &families {
        let ctx = family_ctx(doc)?;
        for raw in &doc.cases {
            if cases.iter().any(|c| c.id == raw.id) {
                return Err(invalid(&raw.id, "duplicate case id"));
            }
            cases.push(build_case(raw, &ctx)?);
        }
    }
    cases.sort_by_key(CaseSpec::key);
    Ok(Corpus { families, cases })
}

fn family_path(dir: &Path, f: u32) -> PathBuf {
    dir.join(format!("family-{f}")).join("cases.json")
}

fn read_family(path: &Path) -> Result<RawFamily, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Loads and validates the corpus under `dir`, including the expected
/// family sizes (80 cases in total).
pub fn load(dir: &Path) -> Result<Corpus, CorpusError> {
    let mut families = Vec::new();
    for f in 1..=FAMILY_SIZES.len() as u32 {
        let path = family_path(dir, f);
        let doc = read_family(&path)?;
        if doc.family != f {
            return Err(CorpusError::Corpus(format!("{} declares family {}", path.display(), doc.family)));
        }
        families.push(doc);
    }
    let corpus = from_families(families)?;
    for (k, &want) in FAMILY_SIZES.iter().enumerate() {
        let f = k as u32 + 1;
        let got = corpus.family(f).len();
        if got != want {
            return Err(CorpusError::Corpus(format!("family {f} has {got} cases, expected {want}")));
        }
        for i in 1..=want as u32 {
            if !corpus.cases.iter().any(|c| c.key() == (f, i)) {
                return Err(CorpusError::Corpus(format!("case {f}.{i} is missing")));
            }
        }
    }
    Ok(corpus)
}

/// Canonical text of one family document.
pub fn to_canonical_json(doc: &RawFamily) -> String {
    let v = serde_json::to_value(doc).expect("serializable");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| " ".repeat(n);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_flat) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&x.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 2));
                write_value(x, indent + 2, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 2));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 2, out);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// Writes every family document canonically under `dir`.
pub fn save(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    for doc in &corpus.families {
        let path = family_path(dir, doc.family);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CorpusError::Io { path: parent.to_path_buf(), source })?;
        }
        std::fs::write(&path, to_canonical_json(doc))
            .map_err(|source| CorpusError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

// Parameter draws ----------------------------------------------------------

/// Seed and number of independent draws per branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DrawPlan {
    pub seed: u64,
    pub draws: usize,
}

/// Default seed used by the command-line tool.
pub const DEFAULT_SEED: u64 = 20_240_917;

impl Default for DrawPlan {
    fn default() -> Self {
        DrawPlan { seed: DEFAULT_SEED, draws: 3 }
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn draw_rng(seed: u64, case: &str, branch: usize, draw: usize) -> ChaCha8Rng {
    let key = format!("{seed}|{case}|{branch}|{draw}");
    ChaCha8Rng::seed_from_u64(fnv1a(key.as_bytes()))
}

/// A random nonzero rational n/d with 1 ≤ |n| ≤ 31, 1 ≤ d ≤ 17, not ±1.
fn pool_value(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let n: i64 = rng.gen_range(1..=31);
        let d: i64 = rng.gen_range(1..=17);
        if n == d {
            continue;
        }
        let n = if rng.gen_bool(0.5) { -n } else { n };
        let r = BigRational::new(BigInt::from(n), BigInt::from(d));
        return Scalar::constant(Coefficient::real(r));
    }
}

/// Deterministic parameter assignment for (case, branch, seed, draw).
///
/// Free parameters get distinct values from the pool; derived ones are
/// evaluated from the branch; draws violating an inequality, or making any
/// case expression undefined, are rejected and redrawn.
pub fn assign_params(case: &CaseSpec, branch: usize, seed: u64, draw: usize) -> Result<ParamEnv, CorpusError> {
    let b = case.branches.get(branch).ok_or_else(|| CorpusError::BadBranch { case: case.id.clone(), branch })?;
    let free: Vec<&String> = case.params.iter().filter(|p| !b.derived.iter().any(|(d, _)| d == *p)).collect();
    let mut rng = draw_rng(seed, &case.id, branch, draw);
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut env = ParamEnv::new();
        let mut used: Vec<Scalar> = Vec::new();
        for p in &free {
            let v = loop {
                let v = pool_value(&mut rng);
                if !used.contains(&v) {
                    break v;
                }
            };
            used.push(v.clone());
            env.insert(p, v);
        }
        for (name, e) in &b.derived {
            match eval(e, &env) {
                Ok(v) => env.insert(name, v),
                Err(_) => continue 'attempt,
            }
        }
        for (x, y) in b.neq.iter().chain(&case.family_neq) {
            match (eval(x, &env), eval(y, &env)) {
                (Ok(u), Ok(v)) if u != v => {}
                _ => continue 'attempt,
            }
        }
        if case.evaluate_all(&env).is_err() {
            continue;
        }
        return Ok(env);
    }
    Err(CorpusError::Unsatisfiable { case: case.id.clone(), branch, attempts: MAX_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_family() -> RawFamily {
        let raw = r#"{
          "format": "dd-gl2-corpus/1",
          "family": 1,
          "d": "q^2*e(1,1)+q*e(2,2)+e(3,3)+e(4,4)",
          "cases": [
            {
              "id": "1.1",
              "c11": "e(1,1)+e(2,2)+e(3,3)+e(4,4)",
              "c12": "a*e(1,2)",
              "c21": "0",
              "c22": "q^2*e(1,1)+q*e(2,2)+e(3,3)+e(4,4)",
              "params": ["a", "b"],
              "branches": [{"label": "b=q*a", "derived": {"b": "q*a"}, "neq": [["a", "2"]]}],
              "dim_r": 4,
              "dim_i": 1,
              "r_pattern": {"rows": [["*", "*", "0", "0"], ["0", "*", "0", "0"], ["0", "0", "Ep", "0"], ["0", "0", "0", "Ep"]]},
              "i_pattern": "scalars",
              "perturbation": "zero"
            }
          ]
        }"#;
        serde_json::from_str(raw).unwrap()
    }

    #[test]
    fn builds_and_draws() {
        let c = from_families(vec![tiny_family()]).unwrap();
        let case = &c.cases[0];
        let env = assign_params(case, 0, 7, 0).unwrap();
        let a = env.get("a").unwrap();
        assert_eq!(env.get("b").unwrap(), &(&Scalar::q() * a));
        assert_ne!(a, &Scalar::from_int(2));
        assert_eq!(assign_params(case, 0, 7, 0).unwrap(), env);
        assert_ne!(assign_params(case, 0, 7, 1).unwrap(), env);
        assert!(matches!(assign_params(case, 3, 7, 0), Err(CorpusError::BadBranch { .. })));
    }

    #[test]
    fn rejects_undeclared_parameters() {
        let mut f = tiny_family();
        f.cases[0].c12 = "z*e(1,2)".into();
        assert!(matches!(from_families(vec![f]), Err(CorpusError::Invalid { .. })));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let mut f = tiny_family();
        let dup = f.cases[0].clone();
        f.cases.push(dup);
        let err = from_families(vec![f]).unwrap_err();
        assert!(err.to_string().contains("duplicate case id"));
    }

    #[test]
    fn rejects_unsatisfiable_branch() {
        let mut f = tiny_family();
        f.cases[0].branches[0].neq.push(["b".into(), "q*a".into()]);
        assert!(matches!(from_families(vec![f]), Err(CorpusError::Unsatisfiable { .. })));
    }

    #[test]
    fn erratum_kind_must_match_overlay() {
        let mut f = tiny_family();
        f.cases[0].errata.push(RawErratum {
            id: "x".into(),
            kind: "constraint".into(),
            covers: vec!["dim_r".into()],
            note: "n".into(),
            overlay: RawOverlay { dim_r: Some(5), ..Default::default() },
        });
        assert!(from_families(vec![f]).is_err());
    }

    #[test]
    fn overlay_produces_corrected_case() {
        let mut f = tiny_family();
        f.cases[0].errata.push(RawErratum {
            id: "x".into(),
            kind: "table".into(),
            covers: vec!["dim_r".into()],
            note: "n".into(),
            overlay: RawOverlay { dim_r: Some(5), ..Default::default() },
        });
        let c = from_families(vec![f]).unwrap();
        let fixed = c.cases[0].corrected().unwrap().unwrap();
        assert_eq!(fixed.dim_r, 5);
        assert!(fixed.errata.is_empty());
    }

    #[test]
    fn canonical_text_round_trips() {
        let f = tiny_family();
        let text = to_canonical_json(&f);
        let back: RawFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(to_canonical_json(&back), text);
        assert!(text.contains("\"params\": [\"a\", \"b\"]"));
    }

    #[test]
    fn id_syntax() {
        assert_eq!(parse_id("3.17"), Some((3, 17)));
        assert_eq!(parse_id("3.017"), None);
        assert_eq!(parse_id("x"), None);
    }
}
