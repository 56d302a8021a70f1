use std::sync::OnceLock;

use super::{parse_rulebook, Action, ActionValue, Atom, CommandClass, FuzzyRule, RuleBase};

pub const DEFAULT_RULEBOOK_SOURCE: &str = include_str!("../../rules/default.rules");

pub fn default_rulebook_text() -> &'static str {
    DEFAULT_RULEBOOK_SOURCE
}

/// The shipped rulebook, parsed once.
pub fn default_rulebook() -> RuleBase {
    static RB: OnceLock<RuleBase> = OnceLock::new();
    RB.get_or_init(|| parse_rulebook(DEFAULT_RULEBOOK_SOURCE).expect("shipped rulebook is valid"))
        .clone()
}

/// Object-proximity rule used by the object interaction fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProximityFixture {
    pub object: &'static str,
    pub rule_id: u32,
    pub needs_heading: bool,
}

impl ProximityFixture {
    /// Fixture as a rule that writes nothing observable.
    pub fn rule(&self) -> FuzzyRule {
        let mut antecedent = vec![Atom {
            variable: "distance".into(),
            object: Some(self.object.into()),
            label: "near".into(),
        }];
        if self.needs_heading {
            antecedent.push(Atom {
                variable: "heading".into(),
                object: None,
                label: "small".into(),
            });
        }
        FuzzyRule {
            id: self.rule_id,
            part: None,
            antecedent,
            consequent: vec![Action {
                variable: "reminder".into(),
                value: ActionValue::Label("yes".into()),
            }],
            class: CommandClass::Reminder,
        }
    }
}

pub fn proximity_fixtures() -> [ProximityFixture; 5] {
    let f = |object, rule_id, needs_heading| ProximityFixture {
        object,
        rule_id,
        needs_heading,
    };
    [
        f("object1", 12, true),
        f("object2", 14, true),
        f("object3", 11, false),
        f("object4", 21, true),
        f("object5", 2, true),
    ]
}
