//! Side-by-side comparison of the two disciplines over one program.

use std::fmt::Write as _;

use serde::Serialize;

use crate::nominal::{check_program, verify_inheritance_is_subtyping, NominalError};
use std::collections::HashMap;

use crate::structural::{StructuralType, StructuralTypes, SubtypeSession, TypeRef};
use crate::syntax::{ClassGraph, ClassName, Label, Program, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairVerdict {
    pub sub: ClassName,
    pub sup: ClassName,
    pub inherits: bool,
    pub nominal_sub: bool,
    pub structural_sub: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BinaryKind {
    DeclaredBinary,
    ApproximatedBinary,
    SpuriousBinary,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BinaryMethodFinding {
    pub class: ClassName,
    pub method: Label,
    pub kind: BinaryKind,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Headline {
    #[serde(rename = "EQUIV")]
    Equiv,
    #[serde(rename = "DIVERGES")]
    Diverges,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub nominal: Headline,
    pub structural: Headline,
    /// Pairs on which inheritance and subtyping disagree, in either discipline.
    pub witnesses: Vec<(ClassName, ClassName)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub pairs: Vec<PairVerdict>,
    pub findings: Vec<BinaryMethodFinding>,
    pub summary: Summary,
    /// Sites using casts or `instanceof`, left out of the structural analysis.
    #[serde(skip)]
    pub skipped_sites: Vec<String>,
    /// `//@` contracts per class. Reported, never checked.
    #[serde(skip)]
    pub contracts: Vec<(ClassName, String)>,
}

impl AuditReport {
    pub fn pair(&self, sub: &str, sup: &str) -> Option<&PairVerdict> {
        self.pairs.iter().find(|p| p.sub == sub && p.sup == sup)
    }

    pub fn findings_for(&self, class: &str) -> impl Iterator<Item = &BinaryMethodFinding> {
        let class = ClassName::new(class);
        self.findings.iter().filter(move |f| f.class == class)
    }
}

/// Runs both disciplines over every ordered pair of classes (user classes and
/// `Object`) and classifies binary methods.
pub fn audit_program(program: &Program) -> Result<AuditReport, Vec<NominalError>> {
    let checked = check_program(program)?;
    let nominal = verify_inheritance_is_subtyping(program).map_err(|e| vec![e])?;
    let types = StructuralTypes::build(program).map_err(|e| vec![NominalError::from(e)])?;
    let graph = checked.table.graph();
    let mut session = Session::new(&types);

    let pairs: Vec<PairVerdict> = nominal
        .entries
        .iter()
        .map(|e| PairVerdict {
            sub: e.sub.clone(),
            sup: e.sup.clone(),
            inherits: e.inherits,
            nominal_sub: e.subtype,
            structural_sub: session.subtype(&e.sub, &e.sup),
        })
        .collect();

    let mut findings = Vec::new();
    for class in program.audited_names() {
        findings.extend(classify_with(program, graph, &mut session, &class));
    }
    findings.sort();

    let nominal_witnesses: Vec<_> = pairs.iter().filter(|p| p.inherits != p.nominal_sub).collect();
    let structural_witnesses: Vec<_> = pairs.iter().filter(|p| p.inherits != p.structural_sub).collect();
    let headline = |w: &[&PairVerdict]| if w.is_empty() { Headline::Equiv } else { Headline::Diverges };
    let mut witnesses: Vec<(ClassName, ClassName)> = nominal_witnesses
        .iter()
        .chain(&structural_witnesses)
        .map(|p| (p.sub.clone(), p.sup.clone()))
        .collect();
    witnesses.sort();
    witnesses.dedup();
    let summary = Summary {
        nominal: headline(&nominal_witnesses),
        structural: headline(&structural_witnesses),
        witnesses,
    };

    let mut skipped_sites = Vec::new();
    for class in program.classes() {
        for m in &class.methods {
            if m.body.uses_runtime_type_test() {
                skipped_sites.push(format!("{}.{}", class.name, m.name));
            }
        }
    }
    if program.main().is_some_and(|e| e.uses_runtime_type_test()) {
        skipped_sites.push("main expression".to_owned());
    }
    let contracts = program
        .classes()
        .iter()
        .flat_map(|c| c.contracts.iter().map(|text| (c.name.clone(), text.clone())))
        .collect();

    Ok(AuditReport {
        pairs,
        findings,
        summary,
        skipped_sites,
        contracts,
    })
}

fn ty<'t>(types: &'t StructuralTypes, class: &ClassName) -> &'t StructuralType {
    types.get(class).expect("every resolved class has a structural type")
}

/// Class types interned once for repeated queries.
struct Session {
    engine: SubtypeSession,
    refs: HashMap<ClassName, TypeRef>,
}

impl Session {
    fn new(types: &StructuralTypes) -> Self {
        let mut engine = SubtypeSession::new();
        let refs = types.iter().map(|(name, t)| (name.clone(), engine.add(t))).collect();
        Session { engine, refs }
    }

    fn subtype(&mut self, a: &ClassName, b: &ClassName) -> bool {
        self.engine.subtype(self.refs[a], self.refs[b])
    }

    fn equivalent(&mut self, a: &ClassName, b: &ClassName) -> bool {
        self.subtype(a, b) && self.subtype(b, a)
    }
}

/// Binary-method findings for one class, sorted by (method, kind).
pub fn classify_binary_methods(program: &Program, class: &ClassName) -> Result<Vec<BinaryMethodFinding>, SyntaxError> {
    let types = StructuralTypes::build(program)?;
    let mut session = Session::new(&types);
    let mut findings = classify_with(program, types.graph(), &mut session, class);
    findings.sort();
    Ok(findings)
}

fn classify_with(
    program: &Program,
    graph: &ClassGraph,
    session: &mut Session,
    class: &ClassName,
) -> Vec<BinaryMethodFinding> {
    let mut seen: Vec<&Label> = Vec::new();
    let mut findings = Vec::new();
    for declaring in graph.ancestors(class) {
        let Some(decl) = program.class(declaring) else { continue };
        for method in &decl.methods {
            if seen.contains(&&method.name) {
                continue;
            }
            seen.push(&method.name);
            let finding = |kind, depth| BinaryMethodFinding {
                class: class.clone(),
                method: method.name.clone(),
                kind,
                depth,
            };
            if method.param_types().any(|p| p == declaring) {
                if declaring == class {
                    findings.push(finding(BinaryKind::DeclaredBinary, 0));
                } else {
                    let depth = graph.distance(class, declaring).expect("declaring class is an ancestor");
                    findings.push(finding(BinaryKind::ApproximatedBinary, depth));
                }
            }
            let lookalike = method.param_types().any(|d| {
                d != class && !graph.inherits(class, d) && session.equivalent(d, class)
            });
            if lookalike {
                findings.push(finding(BinaryKind::SpuriousBinary, 0));
            }
        }
    }
    findings
}

/// Classes whose own type mentions their self type in a parameter position,
/// possibly nested inside field or result types. Sorted by name.
pub fn contravariant_self_references(program: &Program, types: &StructuralTypes) -> Vec<ClassName> {
    let mut found: Vec<ClassName> = program
        .classes()
        .iter()
        .filter(|c| match ty(types, &c.name) {
            StructuralType::Mu(body) => occurs_negatively(body, 0, true),
            _ => false,
        })
        .map(|c| c.name.clone())
        .collect();
    found.sort();
    found
}

fn occurs_negatively(ty: &StructuralType, var: usize, positive: bool) -> bool {
    match ty {
        StructuralType::Var(i) => *i == var && !positive,
        StructuralType::Mu(body) => occurs_negatively(body, var + 1, positive),
        StructuralType::Record(r) => {
            r.fields.values().any(|f| occurs_negatively(f, var, positive))
                || r.methods.values().any(|m| {
                    m.params.iter().any(|p| occurs_negatively(p, var, !positive))
                        || occurs_negatively(&m.ret, var, positive)
                })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

const GREEN: &str = "\x1b[32m";
const RED: &str = "\x1b[31m";
const BOLD: &str = "\x1b[1m";
const RESET: &str = "\x1b[0m";

/// Renders a report. `color` only affects the text form.
pub fn render_report(report: &AuditReport, format: ReportFormat, color: bool) -> String {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        ReportFormat::Text => render_text(report, color),
    }
}

fn render_text(report: &AuditReport, color: bool) -> String {
    let paint = |code: &str, text: &str| {
        if color {
            format!("{code}{text}{RESET}")
        } else {
            text.to_owned()
        }
    };
    let cell = |b: bool, width: usize| {
        let text = if b { "yes" } else { "no" };
        let pad = " ".repeat(width - text.len());
        format!("{}{pad}", paint(if b { GREEN } else { RED }, text))
    };
    let labels: Vec<String> = report.pairs.iter().map(|p| format!("{} <: {}", p.sub, p.sup)).collect();
    let width = labels.iter().map(String::len).chain([4]).max().unwrap_or(4);
    let headers = ["inherits", "nominal<:", "structural<:"];

    let mut out = String::new();
    let header = format!(
        "{:<width$}  {:<9}  {:<10}  {}",
        "pair", headers[0], headers[1], headers[2]
    );
    let _ = writeln!(out, "{}", paint(BOLD, &header));
    for (label, p) in labels.iter().zip(&report.pairs) {
        let _ = writeln!(
            out,
            "{label:<width$}  {}  {}  {}",
            cell(p.inherits, 9),
            cell(p.nominal_sub, 10),
            cell(p.structural_sub, 12).trim_end()
        );
    }

    out.push('\n');
    let _ = writeln!(out, "{}", paint(BOLD, "binary methods"));
    if report.findings.is_empty() {
        out.push_str("  none\n");
    }
    for f in &report.findings {
        let _ = writeln!(out, "  {}.{}  {:?}  depth {}", f.class, f.method, f.kind, f.depth);
    }

    out.push('\n');
    let headline = |h: Headline| match h {
        Headline::Equiv => paint(GREEN, "inheritance = subtyping (EQUIV)"),
        Headline::Diverges => paint(RED, "inheritance ≠ subtyping (DIVERGES)"),
    };
    let _ = writeln!(out, "nominal:    {}", headline(report.summary.nominal));
    let _ = writeln!(out, "structural: {}", headline(report.summary.structural));
    if !report.summary.witnesses.is_empty() {
        let list: Vec<String> = report
            .summary
            .witnesses
            .iter()
            .map(|(a, b)| format!("({a}, {b})"))
            .collect();
        let _ = writeln!(out, "witnesses:  {}", list.join(", "));
    }
    if !report.skipped_sites.is_empty() {
        let _ = writeln!(
            out,
            "runtime type tests (left out of structural analysis): {}",
            report.skipped_sites.join(", ")
        );
    }
    if !report.contracts.is_empty() {
        let _ = writeln!(out, "\ncontracts (unchecked)");
        for (class, text) in &report.contracts {
            let _ = writeln!(out, "  {class}: {text}");
        }
    }
    out
}
