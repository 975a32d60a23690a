//! Sectioned `key = value` text in TOML syntax.
//!
//! Every key lives in a `[section]`. Readers take the keys they understand;
//! whatever is left over is reported as an unknown key, with its line.

use toml_edit::{ImDocument, Item, Table, Value};

use crate::error::{GeomError, Result};

#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    /// Scalars as text; strings without quotes.
    pub value: String,
    pub line: usize,
    raw: Value,
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub line: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Clone)]
pub struct Config {
    sections: Vec<Section>,
}

fn err(line: usize, key: &str, message: impl Into<String>) -> GeomError {
    GeomError::Config { line, key: key.into(), message: message.into() }
}

fn line_of(text: &str, offset: Option<usize>) -> usize {
    offset.map_or(0, |o| text[..o.min(text.len())].matches('\n').count() + 1)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.value().clone(),
        Value::Integer(i) => i.value().to_string(),
        Value::Float(f) => f.value().to_string(),
        Value::Boolean(b) => b.value().to_string(),
        other => other.to_string().trim().to_string(),
    }
}

fn entries(text: &str, table: &Table) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (key, item) in table.iter() {
        let (k, _) = table.get_key_value(key).expect("iterated key");
        let line = line_of(text, k.span().map(|s| s.start));
        let raw = match item {
            Item::Value(v) => v.clone(),
            _ => return Err(err(line, key, "nested tables are not supported")),
        };
        out.push(Entry { key: key.into(), value: scalar_text(&raw), line, raw });
    }
    out.sort_by_key(|e| e.line);
    Ok(out)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = ImDocument::parse(text).map_err(|e| {
            let line = line_of(text, e.span().map(|s| s.start));
            let source = text.lines().nth(line.saturating_sub(1)).unwrap_or("");
            let key = source.split_once('=').map_or(source, |(k, _)| k).trim();
            err(line, key, e.message().trim())
        })?;
        let mut sections = Vec::new();
        for (name, item) in doc.as_table().iter() {
            let (k, _) = doc.as_table().get_key_value(name).expect("iterated key");
            let line = line_of(text, k.span().map(|s| s.start));
            let Item::Table(table) = item else {
                return Err(err(line, name, "key outside any section"));
            };
            sections.push(Section { name: name.into(), line, entries: entries(text, table)? });
        }
        sections.sort_by_key(|s| s.line);
        Ok(Self { sections })
    }

    pub fn take_section(&mut self, name: &str) -> Option<Section> {
        let i = self.sections.iter().position(|s| s.name == name)?;
        Some(self.sections.remove(i))
    }

    pub fn require_section(&mut self, name: &str) -> Result<Section> {
        self.take_section(name).ok_or_else(|| err(0, name, "missing section"))
    }

    /// Fails on the first section nobody took.
    pub fn finish(self) -> Result<()> {
        match self.sections.first() {
            Some(s) => Err(err(s.line, &s.name, "unknown section")),
            None => Ok(()),
        }
    }
}

impl Section {
    /// A key given once, or an array of strings expanded to one entry per element.
    pub fn take_all(&mut self, key: &str) -> Vec<Entry> {
        let Some(i) = self.entries.iter().position(|e| e.key == key) else {
            return Vec::new();
        };
        let e = self.entries.remove(i);
        match &e.raw {
            Value::Array(a) if a.iter().all(|v| v.is_str()) => e.items(),
            _ => vec![e],
        }
    }

    pub fn take(&mut self, key: &str) -> Result<Option<Entry>> {
        let i = self.entries.iter().position(|e| e.key == key);
        Ok(i.map(|i| self.entries.remove(i)))
    }

    pub fn require(&mut self, key: &str) -> Result<Entry> {
        self.take(key)?.ok_or_else(|| err(self.line, key, format!("missing key in [{}]", self.name)))
    }

    pub fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key)? {
            Some(e) => e.parse().map(Some),
            None => Ok(None),
        }
    }

    pub fn parsed_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key)? {
            Some(e) => e.list().map(Some),
            None => Ok(None),
        }
    }

    /// Fails on the first key nobody took.
    pub fn finish(self) -> Result<()> {
        match self.entries.first() {
            Some(e) => Err(err(e.line, &e.key, format!("unknown key in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

impl Entry {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T> {
        if matches!(self.raw, Value::Array(_) | Value::InlineTable(_)) {
            return Err(self.error("expected a single value"));
        }
        self.value.parse().map_err(|_| self.error(format!("cannot parse `{}`", self.value)))
    }

    /// An array of numbers, or a single number.
    pub fn list(&self) -> Result<Vec<f64>> {
        let number = |v: &Value| match v {
            Value::Integer(i) => Ok(*i.value() as f64),
            Value::Float(f) => Ok(*f.value()),
            other => Err(self.error(format!("cannot parse `{}` as a number", other.to_string().trim()))),
        };
        match &self.raw {
            Value::Array(a) => a.iter().map(number).collect(),
            v => Ok(vec![number(v)?]),
        }
    }

    /// Array elements as entries of their own, or the entry itself.
    pub fn items(&self) -> Vec<Entry> {
        match &self.raw {
            Value::Array(a) => a
                .iter()
                .map(|v| Entry { key: self.key.clone(), value: scalar_text(v), line: self.line, raw: v.clone() })
                .collect(),
            _ => vec![self.clone()],
        }
    }

    pub fn error(&self, message: impl Into<String>) -> GeomError {
        err(self.line, &self.key, message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_keys() {
        let text = "# x\n[a]\nk = 1.5\nlist = [1, 2.0, 3]\nterm = [\"p\", \"q\"]\n\n[b]\nname = \"foo\"\n";
        let mut c = Config::parse(text).unwrap();
        let mut a = c.require_section("a").unwrap();
        assert_eq!(a.parsed::<f64>("k").unwrap(), Some(1.5));
        assert_eq!(a.list("list").unwrap(), Some(vec![1.0, 2.0, 3.0]));
        let terms: Vec<String> = a.take_all("term").into_iter().map(|e| e.value).collect();
        assert_eq!(terms, ["p", "q"]);
        a.finish().unwrap();
        let mut b = c.require_section("b").unwrap();
        assert_eq!(b.require("name").unwrap().value, "foo");
        assert_eq!(b.parsed_or("missing", 7_usize).unwrap(), 7);
        b.finish().unwrap();
        c.finish().unwrap();
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = Config::parse("[a]\nk 1\n").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 2, .. }), "{e}");
        let e = Config::parse("[a]\nkind = fubini_study\n").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 2, ref key, .. } if key == "kind"), "{e}");
        let e = Config::parse("k = 1\n").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 1, ref key, .. } if key == "k"));
        let mut c = Config::parse("[a]\nk = \"x\"\nextra = 2\n").unwrap();
        let mut a = c.take_section("a").unwrap();
        let e = a.parsed::<f64>("k").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 2, ref key, .. } if key == "k"));
        let e = a.finish().unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 3, ref key, .. } if key == "extra"));
        let e = Config::parse("[a]\n[a]\n").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 2, .. }), "{e}");
        let e = Config::parse("[a]\nk = 1\nk = 2\n").unwrap_err();
        assert!(matches!(e, GeomError::Config { line: 3, .. }), "{e}");
        let mut c = Config::parse("[a]\nk = [1, \"x\"]\n").unwrap();
        assert!(c.take_section("a").unwrap().list("k").is_err());
    }
}
