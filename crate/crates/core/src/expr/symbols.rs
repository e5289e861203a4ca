//! Symbol vocabulary: names, their LaTeX spelling and their role.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use thiserror::Error;

use super::Expr;

const DEFAULT_VOCABULARY: &str = include_str!("../../data/vocabulary.tsv");

/// The eleven out-of-distribution letters used by variable renaming.
pub const GREEK_POOL: [&str; 11] = [
    "\\alpha", "\\beta", "\\gamma", "\\zeta", "\\iota", "\\kappa", "\\nu", "\\xi", "\\tau",
    "\\upsilon", "\\chi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Variable,
    FunctionName,
    Constant,
}

impl SymbolKind {
    fn parse(s: &str) -> Option<SymbolKind> {
        match s {
            "variable" => Some(SymbolKind::Variable),
            "function-name" => Some(SymbolKind::FunctionName),
            "constant" => Some(SymbolKind::Constant),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolEntry {
    pub name: String,
    pub latex: String,
    pub kind: SymbolKind,
}

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("vocabulary line {line}: expected `name<TAB>latex<TAB>kind`")]
    Malformed { line: usize },
    #[error("vocabulary line {line}: unknown kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("vocabulary line {line}: duplicate name `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("vocabulary line {line}: `{name}` is reserved")]
    Reserved { line: usize, name: String },
    #[error("reading vocabulary: {0}")]
    Io(#[from] std::io::Error),
}

/// Name → LaTeX lookup.
///
/// `entries` is the sampling vocabulary. Renderable-only names (the Greek
/// pool, names picked up from parsed text) live in a separate list so the
/// generator never draws them.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    entries: Vec<SymbolEntry>,
    extra: Vec<SymbolEntry>,
    index: HashMap<String, (bool, usize)>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable::from_tsv(DEFAULT_VOCABULARY).expect("bundled vocabulary is valid")
    }
}

impl SymbolTable {
    /// Parses a tab-separated vocabulary. Blank lines and `#` comments are
    /// skipped. The Greek pool is always added as renderable-only.
    pub fn from_tsv(text: &str) -> Result<SymbolTable, VocabularyError> {
        let mut table = SymbolTable {
            entries: Vec::new(),
            extra: Vec::new(),
            index: HashMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() != 3 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(VocabularyError::Malformed { line });
            }
            let kind = SymbolKind::parse(cols[2].trim()).ok_or_else(|| VocabularyError::UnknownKind {
                line,
                kind: cols[2].to_string(),
            })?;
            let name = cols[0].to_string();
            if name == "d" || name == "e" || GREEK_POOL.contains(&name.as_str()) {
                return Err(VocabularyError::Reserved { line, name });
            }
            if table.index.contains_key(&name) {
                return Err(VocabularyError::Duplicate { line, name });
            }
            table.index.insert(name.clone(), (false, table.entries.len()));
            table.entries.push(SymbolEntry {
                name,
                latex: cols[1].to_string(),
                kind,
            });
        }
        for g in GREEK_POOL {
            table.add_extra(g, g, SymbolKind::Variable);
        }
        Ok(table)
    }

    pub fn from_file(path: &Path) -> Result<SymbolTable, VocabularyError> {
        let text = std::fs::read_to_string(path)?;
        SymbolTable::from_tsv(&text)
    }

    fn add_extra(&mut self, name: &str, latex: &str, kind: SymbolKind) {
        if self.index.contains_key(name) {
            return;
        }
        self.index.insert(name.to_string(), (true, self.extra.len()));
        self.extra.push(SymbolEntry {
            name: name.to_string(),
            latex: latex.to_string(),
            kind,
        });
    }

    /// Register every name in `e` that the table does not know yet, using the
    /// name itself as its LaTeX. Names produced by the parser's generic
    /// fallback are already valid LaTeX, so this makes parsed text renderable.
    pub fn learn_from(&mut self, e: &Expr) {
        for name in e.function_names() {
            let latex = if needs_operatorname(&name) {
                format!("\\operatorname{{{name}}}")
            } else {
                name.clone()
            };
            self.add_extra(&name, &latex, SymbolKind::FunctionName);
        }
        for name in e.free_variables() {
            self.add_extra(&name, &name, SymbolKind::Variable);
        }
    }

    /// Make `name` renderable (as itself) without adding it to the sampling
    /// vocabulary.
    pub fn add_renderable(&mut self, name: &str, kind: SymbolKind) {
        self.add_extra(name, name, kind);
    }

    pub fn latex_of(&self, name: &str) -> Option<&str> {
        self.get(name).map(|e| e.latex.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&SymbolEntry> {
        self.index.get(name).map(|&(extra, i)| {
            if extra {
                &self.extra[i]
            } else {
                &self.entries[i]
            }
        })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Sampling vocabulary (excludes renderable-only names).
    pub fn entries(&self) -> &[SymbolEntry] {
        &self.entries
    }

    pub fn of_kind(&self, kind: SymbolKind) -> Vec<&SymbolEntry> {
        self.entries.iter().filter(|e| e.kind == kind).collect()
    }

    /// Names of the given kind that are not in `used`, in file order.
    pub fn unused(&self, kind: SymbolKind, used: &BTreeSet<String>) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.kind == kind && !used.contains(&e.name))
            .map(|e| e.name.clone())
            .collect()
    }

    /// Every (latex, name) pair, longest LaTeX first. Used by the parser.
    pub(crate) fn latex_patterns(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self
            .entries
            .iter()
            .chain(self.extra.iter())
            .map(|e| (e.latex.as_str(), e.name.as_str()))
            .collect();
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        out
    }
}

/// Multi-character function names are wrapped in `\operatorname`.
pub(crate) fn needs_operatorname(name: &str) -> bool {
    if name.starts_with('\\') {
        return name.contains('_') || name.contains('^');
    }
    name.chars().count() > 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_vocabulary_loads() {
        let t = SymbolTable::default();
        assert!(t.of_kind(SymbolKind::Variable).len() >= 50);
        assert!(t.of_kind(SymbolKind::FunctionName).len() >= 30);
        assert!(t.of_kind(SymbolKind::Constant).len() >= 15);
        assert_eq!(t.latex_of("t_{1}"), Some("\\operatorname{t_{1}}"));
        assert_eq!(t.latex_of("\\alpha"), Some("\\alpha"));
    }

    #[test]
    fn greek_pool_disjoint_from_vocabulary() {
        let t = SymbolTable::default();
        for g in GREEK_POOL {
            assert!(t.entries().iter().all(|e| e.name != g && e.latex != g));
        }
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = SymbolTable::from_tsv("x\tx\tvariable\nx\tx\tconstant\n").unwrap_err();
        assert!(matches!(err, VocabularyError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(SymbolTable::from_tsv("d\td\tvariable\n").is_err());
        assert!(SymbolTable::from_tsv("\\chi\t\\chi\tconstant\n").is_err());
    }
}
