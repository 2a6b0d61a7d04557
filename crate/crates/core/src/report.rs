//! Named pass/fail records shared by the verification suites.

use serde::{Deserialize, Serialize};

/// One pass/fail line in a report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: &str, inputs: String, expected: impl ToString, got: impl ToString) -> Self {
        let expected = expected.to_string();
        let got = got.to_string();
        CheckRecord {
            name: name.into(),
            inputs,
            pass: expected == got,
            expected,
            got,
        }
    }

    pub fn flag(name: &str, inputs: String, ok: bool) -> Self {
        Self::new(name, inputs, true, ok)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub suite: String,
    pub label: String,
    pub field: String,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str, label: &str, field: &str, checks: Vec<CheckRecord>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            suite: suite.into(),
            label: label.into(),
            field: field.into(),
            checks,
            pass,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {} {} {}\nname,inputs,expected,got,pass\n", self.suite, self.label, self.field);
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&c.name),
                csv_field(&c.inputs),
                csv_field(&c.expected),
                csv_field(&c.got),
                c.pass
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
