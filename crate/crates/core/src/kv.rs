//! Flat `key = value` text files with `#` line comments.

use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn bad_value(&self) -> KvError {
        KvError::BadValue {
            line: self.line,
            key: self.key.clone(),
            value: self.value.clone(),
        }
    }

    pub fn unknown(&self) -> KvError {
        KvError::UnknownKey {
            line: self.line,
            key: self.key.clone(),
        }
    }

    pub fn parse<T: FromStr>(&self) -> Result<T, KvError> {
        self.value.parse().map_err(|_| self.bad_value())
    }

    /// Whitespace-separated list of values.
    pub fn parse_list<T: FromStr>(&self) -> Result<Vec<T>, KvError> {
        self.value
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.bad_value()))
            .collect()
    }

    pub fn parse_array<T: FromStr + Copy, const N: usize>(&self) -> Result<[T; N], KvError> {
        let list = self.parse_list::<T>()?;
        list.try_into().map_err(|_| self.bad_value())
    }
}

/// Splits text into entries, in file order. Keys are not checked here.
pub fn parse(text: &str) -> Result<Vec<Entry>, KvError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(KvError::Syntax { line })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(KvError::Syntax { line });
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

/// Rejects a second occurrence of any key not listed in `repeatable`.
pub fn reject_duplicates(entries: &[Entry], repeatable: &[&str]) -> Result<(), KvError> {
    let mut seen = std::collections::HashSet::new();
    for e in entries {
        if !repeatable.contains(&e.key.as_str()) && !seen.insert(e.key.as_str()) {
            return Err(KvError::DuplicateKey {
                line: e.line,
                key: e.key.clone(),
            });
        }
    }
    Ok(())
}
