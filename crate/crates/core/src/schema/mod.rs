//! FSU domain model: function types, attribute values, FSU entries and groups,
//! and the hierarchical decomposition of one sign.
//!
//! A [`SignDecomposition`] holds the global visual attributes of a sign plus
//! one [`FsuGroup`] per function present on it. Values are normalized on
//! construction; nothing here rejects schema violations, those are reported
//! as data by [`validate`].

mod registry;
mod serialize;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use registry::{Schema, TopLevelKey};
pub use serialize::canonical_serialize;
pub use validate::{validate, Violation, ViolationCode};

use crate::error::UnknownFunction;
use crate::text::{lookup_key, normalize_text};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FunctionType {
    Direction,
    Notice,
    Lane,
    Construction,
}

impl FunctionType {
    /// Report column order.
    pub const ALL: [FunctionType; 4] = [
        FunctionType::Direction,
        FunctionType::Notice,
        FunctionType::Lane,
        FunctionType::Construction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionType::Direction => "Direction",
            FunctionType::Notice => "Notice",
            FunctionType::Lane => "Lane",
            FunctionType::Construction => "Construction",
        }
    }

    /// `"<Function> Information"`, used for entry keys and tree nodes.
    pub fn info_label(self) -> String {
        format!("{} Information", self.name())
    }

    /// `"Number of <Function> Information"`.
    pub fn count_label(self) -> String {
        format!("Number of {} Information", self.name())
    }

    /// Lane FSUs are read left to right; the others have no inherent order.
    pub fn is_ordered(self) -> bool {
        self == FunctionType::Lane
    }
}

impl fmt::Display for FunctionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionType {
    type Err = UnknownFunction;

    /// Case-insensitive match on the four English labels.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = lookup_key(s);
        FunctionType::ALL
            .into_iter()
            .find(|f| f.name().to_lowercase() == key)
            .ok_or_else(|| UnknownFunction(normalize_text(s)))
    }
}

/// The five closed-set Yes/No global attributes, in serialization order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryGlobal {
    TrafficSign,
    ElectronicSign,
    Obstruction,
    Truncation,
    Blur,
}

impl BinaryGlobal {
    pub const ALL: [BinaryGlobal; 5] = [
        BinaryGlobal::TrafficSign,
        BinaryGlobal::ElectronicSign,
        BinaryGlobal::Obstruction,
        BinaryGlobal::Truncation,
        BinaryGlobal::Blur,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BinaryGlobal::TrafficSign => "Traffic Sign",
            BinaryGlobal::ElectronicSign => "Electronic Sign",
            BinaryGlobal::Obstruction => "Obstruction",
            BinaryGlobal::Truncation => "Truncation",
            BinaryGlobal::Blur => "Blur",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        BinaryGlobal::ALL.into_iter().find(|g| g.key() == key)
    }
}

pub const OTHER_GLOBAL_KEY: &str = "Other Global Information";
pub const FUNCTION_TYPE_KEY: &str = "Function Type";
pub const YES: &str = "Yes";
pub const NO: &str = "No";

/// A normalized attribute value: a single text or an ordered list of texts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Scalar(String),
    List(Vec<String>),
}

impl AttrValue {
    pub fn scalar(raw: &str) -> Self {
        AttrValue::Scalar(normalize_text(raw))
    }

    /// Items are normalized; items that normalize to nothing are dropped.
    pub fn list<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        AttrValue::List(
            items
                .into_iter()
                .map(|s| normalize_text(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    /// Interprets bracketed text (`"[a, b]"`) as a list, anything else as a
    /// scalar.
    pub fn parse(raw: &str) -> Self {
        let text = normalize_text(raw);
        match text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            Some(inner) => AttrValue::list(inner.split(',')),
            None => AttrValue::Scalar(text),
        }
    }

    /// Comparison text: the scalar itself, or list items joined with `", "`.
    pub fn canonical_text(&self) -> String {
        match self {
            AttrValue::Scalar(s) => s.clone(),
            AttrValue::List(items) => items.join(", "),
        }
    }

    /// Text placed inside the quoted value of the dictionary form.
    pub fn wire_text(&self) -> String {
        match self {
            AttrValue::Scalar(s) => s.clone(),
            AttrValue::List(items) => format!("[{}]", items.join(", ")),
        }
    }

    pub fn is_list(&self) -> bool {
        matches!(self, AttrValue::List(_))
    }
}

impl From<&str> for AttrValue {
    fn from(raw: &str) -> Self {
        AttrValue::parse(raw)
    }
}

/// Top-level attributes. An absent binary is distinct from `"No"`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalAttributes {
    binaries: BTreeMap<BinaryGlobal, String>,
    other: Option<AttrValue>,
}

impl GlobalAttributes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: BinaryGlobal, value: &str) {
        self.binaries.insert(key, normalize_text(value));
    }

    pub fn with(mut self, key: BinaryGlobal, value: &str) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: BinaryGlobal) -> Option<&str> {
        self.binaries.get(&key).map(String::as_str)
    }

    /// `Some(true)` for "Yes", `Some(false)` for "No", `None` when absent or
    /// outside the closed set.
    pub fn flag(&self, key: BinaryGlobal) -> Option<bool> {
        match self.get(key)? {
            YES => Some(true),
            NO => Some(false),
            _ => None,
        }
    }

    pub fn present(&self) -> impl Iterator<Item = (BinaryGlobal, &str)> {
        self.binaries.iter().map(|(k, v)| (*k, v.as_str()))
    }

    pub fn other_global_info(&self) -> Option<&AttrValue> {
        self.other.as_ref()
    }

    pub fn set_other_global_info(&mut self, value: Option<AttrValue>) {
        self.other = value;
    }

    pub fn is_empty(&self) -> bool {
        self.binaries.is_empty() && self.other.is_none()
    }
}

/// One functional structure unit: a keyed record belonging to one function.
///
/// Attribute keys are stored by canonical name; the map order carries no
/// meaning (serialization reorders by registry).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsuEntry {
    pub function: FunctionType,
    /// 1-based position within the group. Metadata only.
    pub index: u32,
    pub attrs: BTreeMap<String, AttrValue>,
}

impl FsuEntry {
    pub fn new(function: FunctionType, index: u32) -> Self {
        Self {
            function,
            index,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<AttrValue>) -> Self {
        self.attrs.insert(normalize_text(key), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&AttrValue> {
        self.attrs.get(key)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsuGroup {
    pub function: FunctionType,
    pub declared_count: Option<u32>,
    pub entries: Vec<FsuEntry>,
}

impl FsuGroup {
    pub fn new(function: FunctionType) -> Self {
        Self {
            function,
            declared_count: None,
            entries: Vec::new(),
        }
    }

    /// Appends an entry, assigning the next 1-based index.
    pub fn push(&mut self, mut entry: FsuEntry) {
        entry.function = self.function;
        entry.index = self.entries.len() as u32 + 1;
        self.entries.push(entry);
    }

    /// Sets `declared_count` to the current entry count.
    pub fn with_matching_count(mut self) -> Self {
        self.declared_count = Some(self.entries.len() as u32);
        self
    }

    /// Renumbers entries 1..=n in their current order.
    pub fn reindex(&mut self) {
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.index = i as u32 + 1;
        }
    }
}

/// The hierarchical FSU decomposition of one sign.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignDecomposition {
    pub globals: GlobalAttributes,
    pub groups: Vec<FsuGroup>,
    /// Function labels that were declared but are not one of the four types.
    pub unknown_functions: Vec<String>,
    /// Unrecognized top-level pairs, kept in order of appearance.
    pub extras: Vec<(String, AttrValue)>,
}

impl SignDecomposition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn group(&self, function: FunctionType) -> Option<&FsuGroup> {
        self.groups.iter().find(|g| g.function == function)
    }

    pub fn group_mut(&mut self, function: FunctionType) -> Option<&mut FsuGroup> {
        self.groups.iter_mut().find(|g| g.function == function)
    }

    /// Returns the group for `function`, appending an empty one if needed.
    pub fn group_or_insert(&mut self, function: FunctionType) -> &mut FsuGroup {
        let pos = match self.groups.iter().position(|g| g.function == function) {
            Some(pos) => pos,
            None => {
                self.groups.push(FsuGroup::new(function));
                self.groups.len() - 1
            }
        };
        &mut self.groups[pos]
    }

    /// Labels carried by the `Function Type` key: group functions in order,
    /// then unrecognized labels.
    pub fn function_labels(&self) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| g.function.name().to_string())
            .chain(self.unknown_functions.iter().cloned())
            .collect()
    }

    /// `None` when the decomposition declares no function at all.
    pub fn function_type_text(&self) -> Option<String> {
        let labels = self.function_labels();
        (!labels.is_empty()).then(|| labels.join(", "))
    }

    /// Total number of FSUs across groups.
    pub fn fsu_count(&self) -> usize {
        self.groups.iter().map(|g| g.entries.len()).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = &FsuEntry> {
        self.groups.iter().flat_map(|g| g.entries.iter())
    }

    /// The function of the first group, used as the benchmark category.
    pub fn primary_function(&self) -> Option<FunctionType> {
        self.groups.first().map(|g| g.function)
    }
}
