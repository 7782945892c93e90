use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};
use crate::time::TimePoint;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailRecord {
    pub seq: u64,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc: Option<String>,
    pub subject: String,
    pub body: String,
    pub sent_at: TimePoint,
}

/// The content of an email, as sent or as expected by ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailSpec {
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cc: Option<String>,
    pub subject: String,
    pub body: String,
}

/// Trims the edges and folds CRLF/CR line endings to LF. Nothing else.
pub fn normalize_email_text(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\r', "\n").trim().to_string()
}

impl EmailSpec {
    /// Strict comparison after normalization. `cc` is only compared when the
    /// expectation names one.
    pub fn matches(&self, sent: &EmailRecord) -> bool {
        let eq = |a: &str, b: &str| normalize_email_text(a) == normalize_email_text(b);
        eq(&self.to, &sent.to)
            && eq(&self.subject, &sent.subject)
            && eq(&self.body, &sent.body)
            && self
                .cc
                .as_deref()
                .is_none_or(|cc| sent.cc.as_deref().is_some_and(|s| eq(cc, s)))
    }
}

/// Append-only log of every email the agent has sent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailLog {
    records: Vec<EmailRecord>,
}

impl EmailLog {
    pub fn send(&mut self, spec: EmailSpec, now: TimePoint) -> ToolResult<&EmailRecord> {
        for (field, value) in [("to", &spec.to), ("subject", &spec.subject), ("body", &spec.body)] {
            if value.trim().is_empty() {
                return Err(ToolError::Usage(format!("`{field}` is required and must be non-empty")));
            }
        }
        let seq = self.records.len() as u64 + 1;
        self.records.push(EmailRecord {
            seq,
            to: spec.to,
            cc: spec.cc.filter(|c| !c.trim().is_empty()),
            subject: spec.subject,
            body: spec.body,
            sent_at: now,
        });
        Ok(self.records.last().unwrap())
    }

    pub fn records(&self) -> &[EmailRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(body: &str) -> EmailSpec {
        EmailSpec {
            to: "advisor.x@lau.edu".into(),
            cc: None,
            subject: "Question".into(),
            body: body.into(),
        }
    }

    #[test]
    fn append_order_and_seq() {
        let mut log = EmailLog::default();
        let t = "Week 0, Monday, 09:00".parse().unwrap();
        log.send(spec("one"), t).unwrap();
        log.send(spec("two"), t).unwrap();
        let bodies: Vec<(u64, &str)> = log.records().iter().map(|r| (r.seq, r.body.as_str())).collect();
        assert_eq!(bodies, [(1, "one"), (2, "two")]);
    }

    #[test]
    fn missing_body_is_usage_error() {
        let mut log = EmailLog::default();
        let t = "Week 0, Monday, 09:00".parse().unwrap();
        assert!(matches!(log.send(spec("  "), t), Err(ToolError::Usage(_))));
        assert!(log.is_empty());
    }

    #[test]
    fn strict_matching() {
        let mut log = EmailLog::default();
        let t = "Week 0, Monday, 09:00".parse().unwrap();
        let sent = log.send(spec("Dear Advisor,\r\nThanks.\n"), t).unwrap().clone();
        assert!(spec("Dear Advisor,\nThanks.").matches(&sent));
        assert!(!spec("Dear Advisor,\nThanks!").matches(&sent));
        assert!(!spec("dear Advisor,\nThanks.").matches(&sent));
        let mut with_cc = spec("Dear Advisor,\nThanks.");
        with_cc.cc = Some("dean@lau.edu".into());
        assert!(!with_cc.matches(&sent));
    }
}
