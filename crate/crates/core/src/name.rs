//! Hierarchical names and the identifiers embedded in them.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// Errors raised while building or parsing names.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("name has no components")]
    Empty,
    #[error("invalid name component {0:?}")]
    InvalidComponent(String),
    #[error("invalid identifier {0:?}")]
    InvalidIdent(String),
    #[error("malformed name {name}: {reason}")]
    Malformed { name: String, reason: &'static str },
}

impl NameError {
    pub(crate) fn malformed(name: &Name, reason: &'static str) -> Self {
        NameError::Malformed { name: name.to_string(), reason }
    }
}

/// An ordered, non-empty list of text components rendered as `/a/b/c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    components: Vec<String>,
}

impl Name {
    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let components: Vec<String> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        if let Some(bad) = components.iter().find(|c| c.is_empty() || c.contains('/')) {
            return Err(NameError::InvalidComponent(bad.clone()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.components.get(index).map(String::as_str)
    }

    pub fn last(&self) -> &str {
        // never empty
        &self.components[self.components.len() - 1]
    }

    pub fn is_prefix_of(&self, other: &Name) -> bool {
        other.components.len() >= self.components.len()
            && other.components[..self.components.len()] == self.components[..]
    }

    /// Returns a copy with `component` appended.
    pub fn child(&self, component: &str) -> Result<Name, NameError> {
        let mut components = self.components.clone();
        components.push(component.to_string());
        Name::from_components(components)
    }

    /// Drops the last component; `None` for a single-component name.
    pub fn parent(&self) -> Option<Name> {
        if self.components.len() < 2 {
            return None;
        }
        Some(Name { components: self.components[..self.components.len() - 1].to_vec() })
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            write!(f, "/{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix('/')
            .ok_or_else(|| NameError::InvalidComponent(s.to_string()))?;
        Name::from_components(rest.split('/'))
    }
}

/// Keywords with a fixed meaning in the name grammar. Identifiers may not
/// collide with them.
pub const RESERVED: &[&str] = &[
    "FastCharging",
    "Discovery",
    "Verification",
    "Negotiation",
    "Coordination",
    "Spatial",
    "Temporal",
    "Hard",
];

/// Producer or consumer identifier (`EV7`, `S01`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(String);

impl Ident {
    pub fn new(text: impl Into<String>) -> Result<Self, NameError> {
        let text = text.into();
        let charset_ok = text
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
        let starts_alpha = text.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if !charset_ok || !starts_alpha || RESERVED.contains(&text.as_str()) {
            return Err(NameError::InvalidIdent(text));
        }
        Ok(Ident(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Ident {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ident::new(s)
    }
}
