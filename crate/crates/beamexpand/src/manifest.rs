//! Run manifests: resolved inputs, unit conversions and one entry per
//! computed point. The hash of the rendered text tags every CSV.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::table::format_number;

pub const VERSION: &str = concat!("beamexpand ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub index: usize,
    pub fields: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub name: String,
    pub version: String,
    pub parameters: Vec<(String, String)>,
    pub units: Vec<(String, String)>,
    pub entries: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            version: VERSION.to_string(),
            parameters: Vec::new(),
            units: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.to_string(), value.to_string()));
    }

    pub fn number(&mut self, key: &str, value: f64) {
        self.parameter(key, format_number(value));
    }

    pub fn unit(&mut self, key: &str, value: f64) {
        self.units.push((key.to_string(), format_number(value)));
    }

    pub fn entry(&mut self, index: usize, fields: Vec<(String, String)>) {
        self.entries.push(ManifestEntry { index, fields });
    }

    /// Lines copied into CSV headers.
    pub fn summary(&self) -> Vec<(String, String)> {
        let mut out = vec![("version".to_string(), self.version.clone())];
        out.extend(self.parameters.iter().cloned());
        out.extend(
            self.units
                .iter()
                .map(|(k, v)| (format!("unit.{k}"), v.clone())),
        );
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "manifest = {}", self.name);
        for (k, v) in self.summary() {
            let _ = writeln!(out, "{k} = {v}");
        }
        let mut entries: Vec<&ManifestEntry> = self.entries.iter().collect();
        entries.sort_by_key(|e| e.index);
        for e in entries {
            let fields: Vec<String> = e.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "point {}: {}", e.index, fields.join(" "));
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_entry_order_but_not_content() {
        let mut a = RunManifest::new("x");
        a.entry(1, vec![("f".into(), "0.5".into())]);
        a.entry(0, vec![("f".into(), "0.4".into())]);
        let mut b = RunManifest::new("x");
        b.entry(0, vec![("f".into(), "0.4".into())]);
        b.entry(1, vec![("f".into(), "0.5".into())]);
        assert_eq!(a.hash(), b.hash());
        b.number("waist", 3e-6);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
