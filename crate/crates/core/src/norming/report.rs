use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Satisfied,
    Inconclusive,
    Violated,
}

impl Verdict {
    /// Combines two verdicts; violation dominates inconclusiveness.
    pub fn worst(self, other: Self) -> Self {
        self.max(other)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "satisfied",
            Self::Inconclusive => "inconclusive",
            Self::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub id: String,
    pub verdict: Verdict,
    pub evidence: String,
}

impl ConditionEntry {
    pub fn new(id: impl Into<String>, verdict: Verdict, evidence: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            verdict,
            evidence: evidence.into(),
        }
    }

    pub fn relabel(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn get(&self, id: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn overall(&self) -> Verdict {
        self.entries.iter().fold(Verdict::Satisfied, |v, e| v.worst(e.verdict))
    }

    /// 0 if everything holds, 3 on any violation, 4 if only inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.overall() {
            Verdict::Satisfied => 0,
            Verdict::Violated => 3,
            Verdict::Inconclusive => 4,
        }
    }

    /// `condition,verdict,evidence` rows; evidence is quoted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,verdict,evidence\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},\"{}\"\n",
                e.id,
                e.verdict,
                e.evidence.replace('"', "'")
            ));
        }
        out
    }
}
