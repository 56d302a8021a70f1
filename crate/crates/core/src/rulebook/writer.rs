use std::fmt::Write;

use crate::fuzzy::MembershipFunction;

use super::RuleBase;

/// Canonical text form: registries in declaration order, rules by id,
/// single spaces, one statement per line.
pub fn serialize(rb: &RuleBase) -> String {
    let mut out = String::new();
    for var in &rb.variables {
        let _ = writeln!(
            out,
            "VAR {} {} {} {} RANGE {} {}",
            var.name,
            var.direction,
            var.kind,
            var.universe.unit,
            var.universe.min,
            var.universe.max
        );
        for label in &var.labels {
            let shape = match label.mf {
                MembershipFunction::Gaussian { lower, upper, .. } => {
                    format!("GAUSS {lower} {upper}")
                }
                MembershipFunction::Triangular { a, b, c } => format!("TRI {a} {b} {c}"),
                MembershipFunction::Singleton { value } => format!("SINGLETON {value}"),
            };
            let _ = writeln!(out, "  LABEL {} {}", label.name, shape);
        }
    }
    for obj in &rb.objects {
        let _ = writeln!(out, "OBJECT {} AT {} {}", obj.name, obj.x, obj.y);
    }
    let mut rules: Vec<_> = rb.rules.iter().collect();
    rules.sort_by_key(|r| r.reference());
    for rule in rules {
        let atoms: Vec<String> = rule
            .antecedent
            .iter()
            .map(|a| match &a.object {
                Some(o) => format!("{}({}) IS {}", a.variable, o, a.label),
                None => format!("{} IS {}", a.variable, a.label),
            })
            .collect();
        let actions: Vec<String> = rule
            .consequent
            .iter()
            .map(|a| format!("{} IS {}", a.variable, a.value))
            .collect();
        let _ = writeln!(
            out,
            "RULE {}: IF {} THEN {} CLASS {}",
            rule.id,
            atoms.join(" AND "),
            actions.join(" AND "),
            rule.class
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulebook::{default_rulebook, parse_rulebook, parse_unchecked};

    #[test]
    fn default_round_trips() {
        let rb = default_rulebook();
        let text = serialize(&rb);
        assert_eq!(parse_rulebook(&text).unwrap(), rb);
        assert_eq!(serialize(&parse_rulebook(&text).unwrap()), text);
    }

    #[test]
    fn one_rule_is_one_line_plus_header() {
        let text = "VAR p input linguistic % RANGE 0 100\n  LABEL dry GAUSS 0 40\nVAR t output integer id RANGE 0 10\n  LABEL 1 SINGLETON 1\nRULE 3: IF p IS dry THEN t IS 1 CLASS reminder\n";
        let rb = parse_rulebook(text).unwrap();
        let out = serialize(&rb);
        assert_eq!(out, text);
        assert_eq!(out.lines().filter(|l| l.starts_with("RULE")).count(), 1);
    }

    #[test]
    fn messy_whitespace_canonicalizes() {
        let messy = "VAR   p input linguistic %\tRANGE 0 100 LABEL dry GAUSS 0.0 40\n\n\nVAR t output integer id RANGE 0 10 LABEL 1 SINGLETON 1\nRULE 3 :IF p IS dry\n THEN   t IS 1 CLASS REMINDER   # trailing\n";
        let rb = parse_unchecked(messy).unwrap();
        let canonical = serialize(&rb);
        assert_ne!(canonical, messy);
        assert_eq!(parse_unchecked(&canonical).unwrap(), rb);
        assert!(canonical.contains("RULE 3: IF p IS dry THEN t IS 1 CLASS reminder"));
    }
}
