use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::token_strings;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
    #[default]
    U,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasEntry {
    pub aliases: Vec<String>,
    #[serde(default)]
    pub gender: Gender,
}

/// Canonical character names and the surface forms that refer to them.
///
/// Construction validates the table and compiles a token-sequence index used
/// for longest-match scanning. The canonical name is added to its own alias
/// list when absent.
#[derive(Clone, Debug)]
pub struct AliasTable {
    entries: BTreeMap<String, AliasEntry>,
    index: HashMap<Vec<String>, String>,
    max_len: usize,
}

impl AliasTable {
    pub fn new(mut entries: BTreeMap<String, AliasEntry>) -> Result<Self> {
        let mut index: HashMap<Vec<String>, String> = HashMap::new();
        let mut max_len = 0;
        for (canonical, entry) in entries.iter_mut() {
            if canonical.trim().is_empty() {
                return Err(Error::invalid("empty canonical name in alias table"));
            }
            let own = token_strings(canonical);
            if !entry.aliases.iter().any(|a| token_strings(a) == own) {
                entry.aliases.insert(0, canonical.clone());
            }
            for alias in &entry.aliases {
                let key = token_strings(alias);
                if key.is_empty() {
                    return Err(Error::invalid(format!(
                        "alias {alias:?} of {canonical:?} has no word characters"
                    )));
                }
                match index.get(&key) {
                    Some(other) if other != canonical => {
                        return Err(Error::invalid(format!(
                            "surface form {alias:?} maps to both {other:?} and {canonical:?}"
                        )));
                    }
                    _ => {}
                }
                max_len = max_len.max(key.len());
                index.insert(key, canonical.clone());
            }
        }
        Ok(AliasTable {
            entries,
            index,
            max_len,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let entries: BTreeMap<String, AliasEntry> = serde_json::from_str(s)?;
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("alias table serializes")
    }

    pub fn entries(&self) -> &BTreeMap<String, AliasEntry> {
        &self.entries
    }

    pub fn contains(&self, canonical: &str) -> bool {
        self.entries.contains_key(canonical)
    }

    pub fn canonical_names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn gender(&self, canonical: &str) -> Option<Gender> {
        self.entries.get(canonical).map(|e| e.gender)
    }

    pub(crate) fn max_alias_len(&self) -> usize {
        self.max_len
    }

    /// Canonical name for an exact normalized token sequence.
    pub(crate) fn lookup(&self, tokens: &[String]) -> Option<&str> {
        self.index.get(tokens).map(String::as_str)
    }
}
