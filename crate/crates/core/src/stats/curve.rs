//! Two-column curve files with a `#`-comment header.
//!
//! ```text
//! # statistic: rms-delay-ccdf
//! # preset: mmwave_3d
//! 1.5e-8 9.8e-1
//! ```

use std::fmt::Write as _;

use crate::error::{GbsmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub statistic: String,
    /// Extra header entries in emission order.
    pub meta: Vec<(String, String)>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(statistic: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { statistic: statistic.into(), meta: Vec::new(), x, y }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# statistic: {}\n", self.statistic);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        for (x, y) in self.x.iter().zip(&self.y) {
            let _ = writeln!(s, "{x:e} {y:e}");
        }
        s
    }

    /// Parse the text form. The `statistic` header line is mandatory.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut statistic = None;
        let mut meta = Vec::new();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    let (k, v) = (k.trim(), v.trim());
                    if k == "statistic" {
                        statistic = Some(v.to_string());
                    } else {
                        meta.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            if statistic.is_none() {
                return Err(GbsmError::Parse { line: i + 1, message: "data before `# statistic:` header".into() });
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| GbsmError::Parse { line: i + 1, message: format!("{s}: {e}") });
            if cols.len() != 2 {
                return Err(GbsmError::Parse { line: i + 1, message: format!("expected 2 columns, found {}", cols.len()) });
            }
            x.push(parse(cols[0])?);
            y.push(parse(cols[1])?);
        }
        let statistic = statistic.ok_or(GbsmError::Parse { line: 1, message: "missing `# statistic:` header".into() })?;
        Ok(Self { statistic, meta, x, y })
    }
}
