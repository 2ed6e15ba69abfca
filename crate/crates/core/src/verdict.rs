use serde::{Deserialize, Serialize};

/// Outcome of checking an implication "premise ⇒ conclusion" on one input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    PremiseFailed(String),
    Violated(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, Verdict::Violated(_))
    }
}
