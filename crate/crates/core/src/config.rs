//! Flat `key = value` text format used for parameter and calibration files.
//!
//! Rules: UTF-8, one pair per line, `#` starts a comment (full-line or
//! trailing), blank lines ignored. Consumers decide which keys are legal;
//! unknown keys are errors there, not here.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl KvEntry {
    pub fn f64(&self) -> Result<f64> {
        self.value.parse::<f64>().map_err(|_| Error::Config {
            line: self.line,
            msg: format!("key `{}`: `{}` is not a number", self.key, self.value),
        })
    }

    pub fn u64(&self) -> Result<u64> {
        self.value.parse::<u64>().map_err(|_| Error::Config {
            line: self.line,
            msg: format!("key `{}`: `{}` is not an integer", self.key, self.value),
        })
    }

    pub fn unknown_key(&self) -> Error {
        Error::Config {
            line: self.line,
            msg: format!("unknown key `{}`", self.key),
        }
    }

    pub fn duplicate_key(&self) -> Error {
        Error::Config {
            line: self.line,
            msg: format!("duplicate key `{}`", self.key),
        }
    }
}

/// Parse the full text into entries, in file order.
pub fn parse(text: &str) -> Result<Vec<KvEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                msg: format!("expected `key = value`, got `{}`", content.trim()),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                msg: "empty key".into(),
            });
        }
        entries.push(KvEntry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(entries)
}

/// Render pairs back to file text. `comments` go first, one `# ` line each.
pub fn render(comments: &[String], pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_blanks() {
        let text = "# header\nbend_gain = 15.0\n\nnoise_sigma = 0.5 # trailing\n";
        let entries = parse(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].key, "bend_gain");
        assert_eq!(entries[0].f64().unwrap(), 15.0);
        assert_eq!(entries[1].key, "noise_sigma");
        assert_eq!(entries[1].line, 4);
    }

    #[test]
    fn rejects_malformed_line() {
        let err = parse("bend_gain 15").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }

    #[test]
    fn rejects_bad_number() {
        let entries = parse("x = abc").unwrap();
        assert!(entries[0].f64().is_err());
    }

    #[test]
    fn render_round_trips() {
        let text = render(
            &["r2_x = 1.0".into()],
            &[("alpha_x", "0.0222".into()), ("alpha_y", "0.0222".into())],
        );
        let entries = parse(&text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].key, "alpha_x");
    }
}
