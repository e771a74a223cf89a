//! Flat `key=value` documents: one entry per line, `#` comments, insertion
//! order preserved on output.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: Vec<(String, String)>,
}

impl KvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_comment(&mut self, text: impl Into<String>) {
        self.entries.push((String::from("#"), text.into()));
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .filter(|(k, _)| k != "#")
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            if k == "#" {
                out.push_str("# ");
                out.push_str(v);
            } else {
                out.push_str(k);
                out.push('=');
                out.push_str(v);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDocument::new();
        let mut seen = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got {line:?}")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            if let Some(first) = seen.insert(k.to_string(), i + 1) {
                return Err(Error::parse(
                    i + 1,
                    format!("duplicate key {k:?} (first on line {first})"),
                ));
            }
            doc.push(k, v.trim());
        }
        Ok(doc)
    }
}

/// Typed accessors with line-agnostic error messages.
pub(crate) struct KvReader<'a> {
    doc: &'a KvDocument,
}

impl<'a> KvReader<'a> {
    pub fn new(doc: &'a KvDocument) -> Self {
        KvReader { doc }
    }

    pub fn str(&self, key: &str) -> Result<&'a str> {
        self.doc
            .get(key)
            .ok_or_else(|| Error::parse(0, format!("missing key {key}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key)?;
        v.parse::<f64>()
            .map_err(|_| Error::parse(0, format!("key {key}: cannot parse {v:?} as a number")))
    }
}
