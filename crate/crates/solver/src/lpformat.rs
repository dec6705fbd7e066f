use std::fmt::Write;

use crate::problem::{MilpProblem, Relation};

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    let sign = if coef < 0.0 { "- " } else if first { "" } else { "+ " };
    let _ = write!(out, " {sign}{} {name}", coef.abs());
}

/// Renders the model in CPLEX LP text format for inspection with other tools.
pub fn write_lp(problem: &MilpProblem) -> String {
    let lp = &problem.lp;
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, &lp.names[j]);
            first = false;
        }
    }
    if lp.objective_offset != 0.0 || first {
        let c = lp.objective_offset;
        let sign = if c < 0.0 { "- " } else if first { "" } else { "+ " };
        let _ = write!(out, " {sign}{}", c.abs());
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let _ = write!(out, " r{i}:");
        let mut first = true;
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                term(&mut out, first, a, &lp.names[j]);
                first = false;
            }
        }
        if first {
            out.push_str(" 0 x0");
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {rel} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let name = &lp.names[j];
        if lp.upper[j].is_infinite() {
            let _ = writeln!(out, " {name} >= {}", lp.lower[j]);
        } else {
            let _ = writeln!(out, " {} <= {name} <= {}", lp.lower[j], lp.upper[j]);
        }
    }
    if !problem.binaries.is_empty() {
        out.push_str("Binaries\n");
        for &b in &problem.binaries {
            let _ = writeln!(out, " {}", lp.names[b]);
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::LpProblem;

    #[test]
    fn renders_sections() {
        let mut lp = LpProblem::new();
        let w = lp.add_named_var("w", 16000.0, 0.0, 1.0);
        let e = lp.add_named_var("e", 200.0, 0.0, f64::INFINITY);
        lp.objective_offset = 32000.0;
        lp.add_row(vec![(w, -128.0), (e, -1.0)], Relation::Le, -64.0);
        let text = write_lp(&MilpProblem::new(lp, vec![w]));
        assert!(text.contains(" obj: 16000 w + 200 e + 32000"));
        assert!(text.contains(" r0: - 128 w - 1 e <= -64"));
        assert!(text.contains(" 0 <= w <= 1"));
        assert!(text.contains(" e >= 0"));
        assert!(text.contains("Binaries\n w\nEnd"));
    }
}
