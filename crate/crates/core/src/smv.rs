//! Export of a single semantic trace as an SMV model for cross-validation
//! with an external model checker: one module, a step counter frozen at the
//! last state (the stutter extension), one boolean DEFINE per atom, and one
//! LTLSPEC per rule.

use std::fmt::Write as _;

use crate::ltl::SemanticTrace;
use crate::rules::RuleSpec;

/// Renders the SMV model for `trace` with one LTLSPEC line per rule.
pub fn export_trace(trace: &SemanticTrace, rules: &[RuleSpec]) -> String {
    let last = trace.len() - 1;
    let mut out = String::new();
    out.push_str("MODULE main\n");
    out.push_str("VAR\n");
    let _ = writeln!(out, "  step : 0..{last};");
    out.push_str("ASSIGN\n");
    out.push_str("  init(step) := 0;\n");
    if last == 0 {
        out.push_str("  next(step) := step;\n");
    } else {
        out.push_str("  next(step) := case\n");
        let _ = writeln!(out, "    step < {last} : step + 1;");
        out.push_str("    TRUE : step;\n  esac;\n");
    }
    out.push_str("DEFINE\n");
    for atom in trace.atoms() {
        let steps: Vec<String> = (0..trace.len())
            .filter(|&i| trace.value(i, atom) == Some(true))
            .map(|i| format!("step = {i}"))
            .collect();
        let expr = if steps.is_empty() {
            "FALSE".to_string()
        } else if steps.len() == trace.len() {
            "TRUE".to_string()
        } else {
            steps.join(" | ")
        };
        let _ = writeln!(out, "  {atom} := {expr};");
    }
    for rule in rules {
        let _ = writeln!(out, "LTLSPEC {}", rule.formula.print_smv());
    }
    out
}

/// Reads the per-step atom assignments back out of an exported model (used to
/// cross-check the exporter against the valuation construction).
pub fn parse_defines(model: &str, steps: usize) -> Vec<(String, Vec<bool>)> {
    let mut out = Vec::new();
    let mut in_defines = false;
    for line in model.lines() {
        let line = line.trim();
        if line == "DEFINE" {
            in_defines = true;
            continue;
        }
        if !in_defines {
            continue;
        }
        if line.starts_with("LTLSPEC") {
            break;
        }
        let Some((atom, expr)) = line.split_once(":=") else { continue };
        let atom = atom.trim().to_string();
        let expr = expr.trim().trim_end_matches(';').trim();
        let values = match expr {
            "TRUE" => vec![true; steps],
            "FALSE" => vec![false; steps],
            _ => {
                let mut v = vec![false; steps];
                for part in expr.split('|') {
                    let idx: usize = part
                        .trim()
                        .strip_prefix("step = ")
                        .expect("define in exported form")
                        .parse()
                        .expect("step index");
                    v[idx] = true;
                }
                v
            }
        };
        out.push((atom, values));
    }
    out
}
