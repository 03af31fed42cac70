//! Per-case verification across branches and parameter draws.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{centralizer, centralizer_of, pattern_space, subspace_equal, unital_closure};
use crate::corpus::{assign_params, CaseSpec, CheckKind, DrawPlan, Erratum, ErratumKind, Perturbation};
use crate::matd::Mat;
use crate::presentation::{check_all, Assignment, Presentation};

pub const REPORT_SCHEMA: &str = "ddgl2-report/1";

/// C11·C22 − C12·C21 = d.
pub fn det_check(gens: &[Mat; 4], d: &Mat) -> bool {
    &(&gens[0] * &gens[3]) - &(&gens[1] * &gens[2]) == *d
}

/// Outcome of every check for one parameter draw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DrawRecord {
    pub draw: usize,
    pub params: BTreeMap<String, String>,
    pub failed_relations: Vec<String>,
    pub det: bool,
    pub invertible: bool,
    pub dim_r: usize,
    pub dim_i: usize,
    pub r_pattern: bool,
    pub i_pattern: bool,
    pub perturbation: bool,
    /// Centralizer of the closure equals the centralizer of the generators.
    pub centralizer_consistent: bool,
    #[serde(skip)]
    pub det_residual: Option<Mat>,
    #[serde(skip)]
    pub product: Mat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchReport {
    /// 1-based.
    pub branch: usize,
    pub label: String,
    pub draws: Vec<DrawRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BranchReport {
    fn dims(&self, f: impl Fn(&DrawRecord) -> usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.draws.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn dims_r(&self) -> Vec<usize> {
        self.dims(|d| d.dim_r)
    }

    pub fn dims_i(&self) -> Vec<usize> {
        self.dims(|d| d.dim_i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub check: CheckKind,
    /// 1-based branch index.
    pub branch: usize,
    pub draws: Vec<usize>,
    pub expected: String,
    pub computed: String,
    pub covered_by: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Printed,
    Corrected,
}

/// The outcome of one variant (as printed, or with errata applied) of a case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub case: String,
    pub variant: Variant,
    pub dim_r: usize,
    pub dim_i: usize,
    /// Expected C12·C21: `zero` or a matrix expression.
    pub perturbation: String,
    pub branches: Vec<BranchReport>,
    pub discrepancies: Vec<Discrepancy>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }

    pub fn failing(&self, check: CheckKind) -> bool {
        self.discrepancies.iter().any(|d| d.check == check)
    }

    fn computed_dims(&self, f: impl Fn(&BranchReport) -> Vec<usize>) -> String {
        let parts: Vec<String> =
            self.branches.iter().map(|b| f(b).iter().map(usize::to_string).collect::<Vec<_>>().join("~")).collect();
        parts.join("|")
    }

    /// Computed dim ℜ per branch, `|`-separated; `~` marks rank instability.
    pub fn computed_dim_r(&self) -> String {
        self.computed_dims(BranchReport::dims_r)
    }

    pub fn computed_dim_i(&self) -> String {
        self.computed_dims(BranchReport::dims_i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErratumStatus {
    pub id: String,
    pub kind: ErratumKind,
    pub covers: Vec<CheckKind>,
    /// Covers at least one discrepancy of the printed case.
    pub applies: bool,
    /// The corrected case is clean; only known with errata enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confirmed: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Explained,
    Unexplained,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub status: Status,
    pub unexplained: usize,
    pub printed: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<ErratumStatus>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub plan: DrawPlan,
    /// 0-based branch filter.
    pub branch: Option<usize>,
    pub errata: bool,
}

fn draw_record(
    case: &CaseSpec,
    pres: &Presentation,
    env: &crate::expr::ParamEnv,
    draw: usize,
) -> Result<DrawRecord, String> {
    let gens = case.generators(env).map_err(|e| e.to_string())?;
    let d = Mat::eval(&case.d.expr, env).map_err(|e| e.to_string())?;
    let asg = Assignment::new(gens[0].clone(), gens[1].clone(), gens[2].clone(), gens[3].clone());
    let failed_relations = check_all(pres, &asg, env)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|c| !c.is_zero)
        .map(|c| c.name)
        .collect();
    let prod = &(&gens[0] * &gens[3]) - &(&gens[1] * &gens[2]);
    let det = prod == d;
    let invertible = gens[0].inverse().is_ok() && gens[3].inverse().is_ok();
    let r = unital_closure(&gens);
    let i = centralizer(&r);
    let centralizer_consistent = subspace_equal(&i, &centralizer_of(&gens, 4));
    let r_pattern = subspace_equal(&pattern_space(&case.r_shape, 4, env).map_err(|e| e.to_string())?, &r);
    let i_pattern = subspace_equal(&pattern_space(&case.i_shape, 4, env).map_err(|e| e.to_string())?, &i);
    let product = &gens[1] * &gens[2];
    let perturbation = match &case.perturbation {
        Perturbation::Zero => product.is_zero(),
        Perturbation::Matrix(m) => Mat::eval(&m.expr, env).map_err(|e| e.to_string())? == product,
    };
    Ok(DrawRecord {
        draw,
        params: env.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        failed_relations,
        det,
        invertible,
        dim_r: r.rank(),
        dim_i: i.rank(),
        r_pattern,
        i_pattern,
        perturbation,
        centralizer_consistent,
        det_residual: if det { None } else { Some(prod) },
        product,
    })
}

fn run_branch(case: &CaseSpec, pres: &Presentation, plan: DrawPlan, b: usize) -> BranchReport {
    let mut report =
        BranchReport { branch: b + 1, label: case.branches[b].label.clone(), draws: Vec::new(), error: None };
    for draw in 0..plan.draws {
        let rec = assign_params(case, b, plan.seed, draw)
            .map_err(|e| e.to_string())
            .and_then(|env| draw_record(case, pres, &env, draw));
        match rec {
            Ok(r) => report.draws.push(r),
            Err(e) => {
                report.error = Some(e);
                break;
            }
        }
    }
    report
}

fn list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

fn discrepancies(case: &CaseSpec, br: &BranchReport) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let mut push = |check: CheckKind, draws: Vec<usize>, expected: String, computed: String| {
        out.push(Discrepancy { check, branch: br.branch, draws, expected, computed, covered_by: Vec::new() });
    };
    if let Some(e) = &br.error {
        push(CheckKind::Draw, Vec::new(), "admissible draws".into(), e.clone());
    }
    let failing =
        |f: &dyn Fn(&DrawRecord) -> bool| -> Vec<usize> { br.draws.iter().filter(|d| f(d)).map(|d| d.draw).collect() };
    let bad = failing(&|d| !d.failed_relations.is_empty());
    if !bad.is_empty() {
        let mut names: Vec<String> = br.draws.iter().flat_map(|d| d.failed_relations.clone()).collect();
        names.sort();
        names.dedup();
        push(CheckKind::Relations, bad, "all relations hold".into(), format!("nonzero residual: {}", names.join(", ")));
    }
    let bad = failing(&|d| !d.det);
    if !bad.is_empty() {
        let first = br.draws.iter().find(|d| !d.det).and_then(|d| d.det_residual.as_ref());
        let computed = first.map_or_else(String::new, |m| format!("C11*C22 - C12*C21 = {m}"));
        push(CheckKind::Det, bad, format!("d = {}", case.d.text), computed);
    }
    let bad = failing(&|d| !d.invertible);
    if !bad.is_empty() {
        push(CheckKind::Invertible, bad, "C11 and C22 invertible".into(), "singular".into());
    }
    for (check, want, dims) in [(CheckKind::DimR, case.dim_r, br.dims_r()), (CheckKind::DimI, case.dim_i, br.dims_i())]
    {
        let bad = failing(&|d| (if check == CheckKind::DimR { d.dim_r } else { d.dim_i }) != want);
        if !bad.is_empty() {
            push(check, bad, want.to_string(), list(&dims));
        }
    }
    let (dr, di) = (br.dims_r(), br.dims_i());
    if dr.len() > 1 || di.len() > 1 {
        push(
            CheckKind::RankInstability,
            br.draws.iter().map(|d| d.draw).collect(),
            "equal ranks across draws".into(),
            format!("dim R {{{}}}, dim I {{{}}}", list(&dr), list(&di)),
        );
    }
    for (check, shape_dim, f) in [
        (CheckKind::RPattern, case.r_shape.dim(), (|d: &DrawRecord| d.r_pattern) as fn(&DrawRecord) -> bool),
        (CheckKind::IPattern, case.i_shape.dim(), |d: &DrawRecord| d.i_pattern),
    ] {
        let bad = failing(&|d| !f(d));
        if !bad.is_empty() {
            let dims = if check == CheckKind::RPattern { &dr } else { &di };
            push(
                check,
                bad,
                format!("printed shape ({shape_dim} symbols)"),
                format!("subspace of dimension {} differs", list(dims)),
            );
        }
    }
    let bad = failing(&|d| !d.perturbation);
    if !bad.is_empty() {
        let first = br.draws.iter().find(|d| !d.perturbation).map(|d| d.product.to_string()).unwrap_or_default();
        push(CheckKind::Perturbation, bad, case.raw.perturbation.clone(), format!("C12*C21 = {first}"));
    }
    let bad = failing(&|d| !d.centralizer_consistent);
    if !bad.is_empty() {
        push(CheckKind::Internal, bad, "centralizer(R) = centralizer(gens)".into(), "differs".into());
    }
    out
}

/// Runs one variant of a case over its branches and draws.
pub fn run_case(case: &CaseSpec, pres: &Presentation, opts: &VerifyOptions, variant: Variant) -> VerificationReport {
    let branches: Vec<usize> = match opts.branch {
        Some(b) => vec![b],
        None => (0..case.branches.len()).collect(),
    };
    let mut reports = Vec::new();
    let mut found = Vec::new();
    for b in branches {
        if b >= case.branches.len() {
            continue;
        }
        let br = run_branch(case, pres, opts.plan, b);
        found.extend(discrepancies(case, &br));
        reports.push(br);
    }
    VerificationReport {
        case: case.id.clone(),
        variant,
        dim_r: case.dim_r,
        dim_i: case.dim_i,
        perturbation: case.raw.perturbation.clone(),
        branches: reports,
        discrepancies: found,
    }
}

fn covering_ids(errata: &[Erratum], check: CheckKind) -> Vec<String> {
    errata.iter().filter(|e| e.covers.contains(&check)).map(|e| e.id.clone()).collect()
}

/// Verifies a case as printed and, with errata enabled, its corrected form.
///
/// A printed discrepancy is explained when an erratum covers its check.
/// With errata enabled every discrepancy of the corrected case also counts
/// as unexplained.
pub fn verify_case(case: &CaseSpec, pres: &Presentation, opts: &VerifyOptions) -> CaseReport {
    let mut printed = run_case(case, pres, opts, Variant::Printed);
    for d in &mut printed.discrepancies {
        d.covered_by = covering_ids(&case.errata, d.check);
    }
    let mut unexplained = printed.discrepancies.iter().filter(|d| d.covered_by.is_empty()).count();
    let corrected = if opts.errata {
        match case.corrected() {
            Ok(Some(fixed)) => Some(run_case(&fixed, pres, opts, Variant::Corrected)),
            Ok(None) => None,
            Err(e) => Some(VerificationReport {
                case: case.id.clone(),
                variant: Variant::Corrected,
                dim_r: case.dim_r,
                dim_i: case.dim_i,
                perturbation: case.raw.perturbation.clone(),
                branches: Vec::new(),
                discrepancies: vec![Discrepancy {
                    check: CheckKind::Draw,
                    branch: 0,
                    draws: Vec::new(),
                    expected: "a valid corrected case".into(),
                    computed: e.to_string(),
                    covered_by: Vec::new(),
                }],
            }),
        }
    } else {
        None
    };
    if let Some(c) = &corrected {
        unexplained += c.discrepancies.len();
    }
    let errata = case
        .errata
        .iter()
        .map(|e| ErratumStatus {
            id: e.id.clone(),
            kind: e.kind,
            covers: e.covers.clone(),
            applies: printed.discrepancies.iter().any(|d| e.covers.contains(&d.check)),
            confirmed: match (&corrected, e.overlay.is_empty()) {
                (Some(c), false) => Some(c.is_clean()),
                _ => None,
            },
        })
        .collect();
    let status = if unexplained > 0 {
        Status::Unexplained
    } else if printed.is_clean() {
        Status::Ok
    } else {
        Status::Explained
    };
    CaseReport { case: case.id.clone(), status, unexplained, printed, corrected, errata }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub ok: usize,
    pub explained: usize,
    pub unexplained_cases: usize,
    pub discrepancies: usize,
    pub unexplained: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub schema: String,
    pub relations: Vec<String>,
    pub seed: u64,
    pub draws: usize,
    pub errata: bool,
    pub summary: Summary,
    pub cases: Vec<CaseReport>,
}

impl RunReport {
    pub fn new(pres: &Presentation, opts: &VerifyOptions, cases: Vec<CaseReport>) -> RunReport {
        let count = |s: Status| cases.iter().filter(|c| c.status == s).count();
        let summary = Summary {
            cases: cases.len(),
            ok: count(Status::Ok),
            explained: count(Status::Explained),
            unexplained_cases: count(Status::Unexplained),
            discrepancies: cases.iter().map(|c| c.printed.discrepancies.len()).sum(),
            unexplained: cases.iter().map(|c| c.unexplained).sum(),
        };
        RunReport {
            schema: REPORT_SCHEMA.into(),
            relations: pres.relations.iter().map(|r| r.name.clone()).collect(),
            seed: opts.plan.seed,
            draws: opts.plan.draws,
            errata: opts.errata,
            summary,
            cases,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Human-readable report: one status line per case, then its
    /// discrepancies.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "seed {}, {} draws, errata {}",
            self.seed,
            self.draws,
            if self.errata { "on" } else { "off" }
        );
        for c in &self.cases {
            let status = match c.status {
                Status::Ok => "ok",
                Status::Explained => "explained",
                Status::Unexplained => "UNEXPLAINED",
            };
            let pert = if c.printed.failing(CheckKind::Perturbation) { "differs from" } else { "=" };
            let _ = writeln!(
                out,
                "case {:<6} {:<11} dim R {} (table {}), dim I {} (table {}), C12*C21 {pert} {}",
                c.case,
                status,
                c.printed.computed_dim_r(),
                c.printed.dim_r,
                c.printed.computed_dim_i(),
                c.printed.dim_i,
                c.printed.perturbation
            );
            for (tag, rep) in
                std::iter::once(("printed", &c.printed)).chain(c.corrected.iter().map(|r| ("corrected", r)))
            {
                for d in &rep.discrepancies {
                    let by = if d.covered_by.is_empty() {
                        if rep.variant == Variant::Printed {
                            "not covered".to_string()
                        } else {
                            "errata do not restore agreement".to_string()
                        }
                    } else {
                        format!("covered by {}", d.covered_by.join(", "))
                    };
                    let _ = writeln!(
                        out,
                        "    {tag} branch {} {}: expected {}; computed {}; draws [{}]; {by}",
                        d.branch,
                        d.check,
                        d.expected,
                        d.computed,
                        list(&d.draws)
                    );
                }
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} cases: {} ok, {} explained, {} unexplained; {} discrepancies, {} unexplained",
            s.cases, s.ok, s.explained, s.unexplained_cases, s.discrepancies, s.unexplained
        );
        out
    }

    /// Fixed-width summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:>3} {:>9} {:>9} {:>9} {:>9} {:<4} {:<4} {:<4} {:<4} {:<4} {:<12}",
            "case",
            "br",
            "dimR tab",
            "dimR got",
            "dimI tab",
            "dimI got",
            "rel",
            "det",
            "patR",
            "patI",
            "pert",
            "status"
        );
        let mark = |r: &VerificationReport, k: CheckKind| if r.failing(k) { "FAIL" } else { "ok" };
        for c in &self.cases {
            let p = &c.printed;
            let status = match c.status {
                Status::Ok => "ok",
                Status::Explained => "explained",
                Status::Unexplained => "UNEXPLAINED",
            };
            let _ = writeln!(
                out,
                "{:<6} {:>3} {:>9} {:>9} {:>9} {:>9} {:<4} {:<4} {:<4} {:<4} {:<4} {:<12}",
                c.case,
                p.branches.len(),
                p.dim_r,
                p.computed_dim_r(),
                p.dim_i,
                p.computed_dim_i(),
                mark(p, CheckKind::Relations),
                mark(p, CheckKind::Det),
                mark(p, CheckKind::RPattern),
                mark(p, CheckKind::IPattern),
                mark(p, CheckKind::Perturbation),
                status
            );
        }
        out
    }
}

/// Verifies `cases` in parallel; results keep the input order.
pub fn verify_all(cases: &[&CaseSpec], pres: &Presentation, opts: &VerifyOptions, jobs: Option<usize>) -> RunReport {
    let work = || cases.par_iter().map(|c| verify_case(c, pres, opts)).collect::<Vec<_>>();
    let reports = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| work()),
        None => work(),
    };
    RunReport::new(pres, opts, reports)
}
