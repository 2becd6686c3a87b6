//! JSON, CSV and Markdown renderings of branching reports. All three are
//! deterministic: JSON keys are sorted and rows keep table order.

use std::fmt::Write as _;

use serde::Serialize;

use crate::branch::{BranchReport, BranchRow, Special, SweepOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(format!("unknown format `{other}` (expected json, csv or md)")),
        }
    }
}

/// Pretty JSON with lexicographically sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is a BTreeMap, so a round trip through
    // `Value` sorts every object's keys
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn csv_header(r: usize) -> String {
    let mut cols = vec!["label".to_string(), "degree".into(), "lhs".into()];
    cols.extend((1..=r).map(|i| format!("t_{i}")));
    cols.extend(["st_flag".into(), "rhs".into(), "ok".into()]);
    cols.join(",")
}

fn csv_row(row: &BranchRow) -> String {
    let mut cols = vec![row.label.clone(), row.degree.to_string(), row.lhs.to_string()];
    cols.extend(row.t.iter().map(u64::to_string));
    cols.push(u8::from(row.st_flag).to_string());
    cols.push(row.rhs.to_string());
    cols.push(row.ok.to_string());
    cols.join(",")
}

pub fn to_csv(report: &BranchReport) -> String {
    let mut out = csv_header(report.pair.r);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn to_markdown(report: &BranchReport) -> String {
    let mut s = String::new();
    let p = &report.pair;
    let _ = writeln!(s, "# {} pair, q = {} (G over F_{})\n", p.family, p.q, p.q * p.q);
    let _ = writeln!(s, "## Pair\n");
    let _ = writeln!(s, "| quantity | value |\n|---|---|");
    let _ = writeln!(s, "| modulus (low to high) | {:?} |", p.modulus);
    let _ = writeln!(s, "| non-square delta | {} |", p.delta);
    let _ = writeln!(s, "| \\|H\\| | {} |", p.h_order);
    let _ = writeln!(
        s,
        "| \\|X\\|, \\|Y\\|, \\|Omega\\| | {}, {}, {} |",
        p.x_size, p.y_size, p.omega_size
    );
    let _ = writeln!(s, "| H-orbits on Y | {} |", p.y_orbit_count);
    let _ = writeln!(s, "| r | {} |", p.r);
    let _ = writeln!(s, "| G-orbits on X x X | {} |", p.g_orbits_on_x_squared);

    let _ = writeln!(s, "\n## Split orbits\n");
    let _ = writeln!(
        s,
        "| i | basepoint | size | \\|K_i\\| | cyclic | torus | unipotent-free |\n|---|---|---|---|---|---|---|"
    );
    for o in &report.orbits {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            o.index,
            o.basepoint,
            o.size,
            o.stabilizer_order,
            yes(o.stabilizer_cyclic),
            yes(o.stabilizer_is_torus),
            yes(o.unipotent_free)
        );
    }

    let c = &report.chartable_summary;
    let _ = writeln!(s, "\n## Character table\n");
    let _ = writeln!(
        s,
        "{} classes, computed modulo {} (exponent {}, seed {}). Degrees {:?}, sum of squares {}.",
        c.classes, c.ell, c.exponent, c.seed, c.degrees, c.sum_of_squares
    );

    let _ = writeln!(s, "\n## Branching rows\n");
    let mut head = "| label | name | degree | lhs |".to_string();
    let mut rule = "|---|---|---|---|".to_string();
    for i in 1..=p.r {
        let _ = write!(head, " t_{i} |");
        rule.push_str("---|");
    }
    head.push_str(" St | rhs | ok |");
    rule.push_str("---|---|---|");
    let _ = writeln!(s, "{head}\n{rule}");
    for row in &report.rows {
        let ts: String = row.t.iter().map(|t| format!(" {t} |")).collect();
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |{} {} | {} | {} |",
            row.label,
            row.name.as_deref().unwrap_or(""),
            row.degree,
            row.lhs,
            ts,
            u8::from(row.st_flag),
            row.rhs,
            yes(row.ok)
        );
    }

    let t = &report.trivial_case;
    let _ = writeln!(s, "\n## Trivial character\n");
    let _ = writeln!(s, "| quantity | value |\n|---|---|");
    let _ = writeln!(s, "| m_0 by inner product | {} |", t.m0_inner_product);
    let _ = writeln!(s, "| m_0 by orbit counting | {} |", t.m0_burnside);
    let _ = writeln!(s, "| r | {} |", t.r);
    let _ = writeln!(s, "| reference value r - 1 | {} |", t.reference_r_minus_1);
    let _ = writeln!(s, "| differs from reference | {} |", yes(t.discrepancy));
    let _ = writeln!(s, "\n{}", t.note);

    let _ = writeln!(s, "\n## Family-specific structure\n");
    match &report.special {
        Special::Pgl2(sp) => {
            let _ = writeln!(s, "K_1 has order {} (cyclic: {}).\n", sp.k1_order, yes(sp.k1_cyclic));
            let _ = writeln!(
                s,
                "| character | label | lhs | t_1 | p-adic reference |\n|---|---|---|---|---|"
            );
            for r in sp.det_characters.iter().chain(&sp.twisted_steinberg) {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    r.name, r.label, r.lhs, r.t_1, r.padic_reference
                );
            }
            let _ = writeln!(s, "\n{}", sp.note);
        }
        Special::Sl2(sp) => {
            let _ = writeln!(s, "| quantity | finite computed | p-adic reference |\n|---|---|---|");
            for c in &sp.comparisons {
                let reference = c.padic_reference.map_or(String::new(), |v| v.to_string());
                let _ = writeln!(s, "| {} | {} | {} |", c.quantity, c.finite_computed, reference);
            }
            let _ = writeln!(s, "\n{}", sp.note);
        }
    }

    let k = &report.checks;
    let _ = writeln!(s, "\n## Checks\n");
    let _ = writeln!(s, "| check | result |\n|---|---|");
    for (name, ok) in [
        ("fixed-point decomposition", k.decomposition_identity),
        ("branching formula", k.branching_formula),
        ("r <= 2", k.r_bound),
        ("orbit structure", k.orbit_structure),
        ("Frobenius reciprocity", k.frobenius_reciprocity),
        ("St_G irreducible", k.steinberg_g_irreducible),
        ("St_H irreducible", k.steinberg_h_irreducible),
        ("table certificates", k.chartable_certificates),
        ("degree bookkeeping", k.degree_bookkeeping),
        ("trivial-character count", k.trivial_case_consistent),
        ("family structure", k.special_structure),
        ("all", k.all_ok),
    ] {
        let _ = writeln!(s, "| {name} | {} |", if ok { "pass" } else { "FAIL" });
    }
    s
}

pub fn render(report: &BranchReport, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(report),
        Format::Csv => to_csv(report),
        Format::Markdown => to_markdown(report),
    }
}

/// CSV for a sweep: the per-pair rows, prefixed with family and q. Pairs
/// with different `r` share a header sized for the largest `r`.
pub fn sweep_csv(out: &SweepOutcome) -> String {
    let max_r = out
        .entries
        .iter()
        .filter_map(|e| e.report.as_ref().map(|r| r.pair.r))
        .max()
        .unwrap_or(1);
    let mut s = format!("family,q,{}\n", csv_header(max_r));
    for e in &out.entries {
        match &e.report {
            Some(rep) => {
                for row in &rep.rows {
                    let mut padded = row.clone();
                    padded.t.resize(max_r, 0);
                    let _ = writeln!(s, "{},{},{}", e.family, e.q, csv_row(&padded));
                }
            }
            None => {
                let _ = writeln!(s, "{},{},error,,,{}false", e.family, e.q, ",".repeat(max_r + 2));
            }
        }
    }
    s
}

pub fn sweep_markdown(out: &SweepOutcome) -> String {
    let mut s = String::from(
        "# Sweep\n\n| family | q | \\|H\\| | r | rows | m_0 | all checks |\n|---|---|---|---|---|---|---|\n",
    );
    for e in &out.entries {
        match (&e.report, &e.error) {
            (Some(r), _) => {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    e.family,
                    e.q,
                    r.pair.h_order,
                    r.pair.r,
                    r.rows.len(),
                    r.trivial_case.m0_inner_product,
                    if r.all_ok() { "pass" } else { "FAIL" }
                );
            }
            (None, err) => {
                let _ = writeln!(
                    s,
                    "| {} | {} | | | | | error: {} |",
                    e.family,
                    e.q,
                    err.as_deref().unwrap_or("")
                );
            }
        }
    }
    let _ = writeln!(s, "\n{} of {} pairs passed.", out.summary.passed, out.summary.pairs);
    s
}

pub fn render_sweep(out: &SweepOutcome, format: Format) -> String {
    match format {
        Format::Json => to_canonical_json(out),
        Format::Csv => sweep_csv(out),
        Format::Markdown => sweep_markdown(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{analyze, AnalysisOptions};
    use crate::groups::Family;

    #[test]
    fn csv_shape() {
        let (rep, _) = analyze(Family::Pgl2, 3, 1, &AnalysisOptions::default()).unwrap();
        let csv = to_csv(&rep);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "label,degree,lhs,t_1,st_flag,rhs,ok");
        assert_eq!(lines.len(), 1 + rep.rows.len());
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn json_keys_sorted_and_stable() {
        let (rep, _) = analyze(Family::Sl2, 3, 1, &AnalysisOptions::default()).unwrap();
        let a = to_canonical_json(&rep);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "chartable_summary",
                "checks",
                "meta",
                "orbits",
                "pair",
                "rows",
                "special",
                "trivial_case"
            ]
        );
        let back: BranchReport = serde_json::from_str(&a).unwrap();
        assert_eq!(to_canonical_json(&back), a);
    }

    #[test]
    fn markdown_mentions_every_row() {
        let (rep, _) = analyze(Family::Pgl2, 5, 1, &AnalysisOptions::default()).unwrap();
        let md = to_markdown(&rep);
        assert!(rep.rows.iter().all(|r| md.contains(&format!("| {} |", r.label))));
        assert!(md.contains("p-adic reference"));
    }
}
