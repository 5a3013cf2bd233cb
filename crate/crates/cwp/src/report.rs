//! Findings and reports. Reports are byte-reproducible for identical
//! inputs: findings are sorted, digests are content-addressed, and no
//! wall clock is ever read.

use std::fmt;

use sha2::{Digest as _, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub subject: String,
    pub message: String,
}

impl Finding {
    pub fn new(
        severity: Severity,
        code: impl Into<String>,
        subject: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Finding {
            severity,
            code: code.into(),
            subject: subject.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Human,
    /// One finding per line: `severity<TAB>code<TAB>subject<TAB>message`.
    Lines,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    /// (input name, sha256 hex) pairs, in argument order.
    pub inputs: Vec<(String, String)>,
    pub findings: Vec<Finding>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

impl Report {
    pub fn add_input(&mut self, name: impl Into<String>, content: &[u8]) {
        self.inputs.push((name.into(), sha256_hex(content)));
    }

    pub fn push(&mut self, finding: Finding) {
        self.findings.push(finding);
    }

    pub fn finish(&mut self) {
        self.findings.sort();
        self.findings.dedup();
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.findings.iter().filter(|f| f.severity == severity).count()
    }

    /// 0 when no errors, 2 otherwise (1 is reserved for input failures).
    pub fn exit_code(&self) -> i32 {
        if self.count(Severity::Error) == 0 {
            0
        } else {
            2
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Lines => {
                let mut out = String::new();
                for f in &self.findings {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        f.severity, f.code, f.subject, f.message
                    ));
                }
                out
            }
            ReportFormat::Human => {
                let mut out = format!("cwp {}\n", env!("CARGO_PKG_VERSION"));
                for (name, digest) in &self.inputs {
                    out.push_str(&format!("input {} sha256:{}\n", name, digest));
                }
                for f in &self.findings {
                    out.push_str(&format!(
                        "  {} {} {} {}\n",
                        f.severity, f.code, f.subject, f.message
                    ));
                }
                out.push_str(&format!(
                    "summary: {} errors, {} warnings, {} notes\n",
                    self.count(Severity::Error),
                    self.count(Severity::Warning),
                    self.count(Severity::Note)
                ));
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn findings_sort_errors_first_and_render_stably() {
        let mut report = Report::default();
        report.add_input("model.wm", b"content");
        report.push(Finding::new(Severity::Note, "LINT:X", "s", "n"));
        report.push(Finding::new(Severity::Error, "CONSTRAINT:gender", "casemanager:o1", "bad"));
        report.finish();
        assert_eq!(report.findings[0].severity, Severity::Error);
        assert_eq!(report.exit_code(), 2);
        let lines = report.render(ReportFormat::Lines);
        assert_eq!(
            lines,
            "error\tCONSTRAINT:gender\tcasemanager:o1\tbad\nnote\tLINT:X\ts\tn\n"
        );
        let human = report.render(ReportFormat::Human);
        assert!(human.contains("input model.wm sha256:ed7002b439e9ac845f22357d822bac1444730fbdb6016d3ec9432297b9ec9f73"));
        assert!(human.ends_with("summary: 1 errors, 0 warnings, 1 notes\n"));
    }

    #[test]
    fn empty_report_exits_zero() {
        let report = Report::default();
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.render(ReportFormat::Lines), "");
    }
}
