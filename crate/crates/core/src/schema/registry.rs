use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use super::{BinaryGlobal, FunctionType, FUNCTION_TYPE_KEY, OTHER_GLOBAL_KEY};
use crate::error::{SchemaError, UnknownFunction};
use crate::text::{lookup_key, normalize_text};

const BUILTIN_SCHEMA: &str = include_str!("../../config/schema.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    registry: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    enumerations: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    key_aliases: BTreeMap<String, String>,
    #[serde(default)]
    global_aliases: BTreeMap<String, String>,
    #[serde(default)]
    function_aliases: BTreeMap<String, String>,
    #[serde(default)]
    translations: BTreeMap<String, String>,
}

/// What a top-level dictionary key refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopLevelKey {
    Binary(BinaryGlobal),
    OtherGlobal,
    FunctionType,
    Count(FunctionType),
    /// `"<Function> Information <i>"`; the index is `None` when omitted.
    Entry(FunctionType, Option<u32>),
}

/// Key registries, closed-set enumerations and label tables.
#[derive(Debug, Clone)]
pub struct Schema {
    registries: BTreeMap<FunctionType, Vec<String>>,
    attr_lookup: HashMap<(FunctionType, String), String>,
    enumerations: HashMap<(FunctionType, String), Vec<String>>,
    key_aliases: HashMap<String, String>,
    global_aliases: HashMap<String, TopLevelKey>,
    function_aliases: HashMap<String, FunctionType>,
    translations: HashMap<String, String>,
}

impl Schema {
    /// The schema shipped in `config/schema.toml`.
    pub fn builtin() -> &'static Schema {
        static BUILTIN: OnceLock<Schema> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Schema::from_toml_str(BUILTIN_SCHEMA).expect("embedded schema config is valid")
        })
    }

    pub fn builtin_source() -> &'static str {
        BUILTIN_SCHEMA
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Schema, SchemaError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Schema::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Schema, SchemaError> {
        let file: SchemaFile = toml::from_str(text)?;

        let mut registries = BTreeMap::new();
        let mut attr_lookup = HashMap::new();
        for (label, keys) in &file.registry {
            let function: FunctionType = label
                .parse()
                .map_err(|_| SchemaError::UnknownFunction(label.clone()))?;
            let keys: Vec<String> = keys.iter().map(|k| normalize_text(k)).collect();
            for k in &keys {
                attr_lookup.insert((function, k.to_lowercase()), k.clone());
            }
            registries.insert(function, keys);
        }
        for f in FunctionType::ALL {
            if !registries.contains_key(&f) {
                return Err(SchemaError::MissingRegistry(f));
            }
        }

        let mut enumerations = HashMap::new();
        for (name, values) in &file.enumerations {
            let (label, key) = name
                .split_once('.')
                .ok_or_else(|| SchemaError::BadEnumerationKey(name.clone()))?;
            let function: FunctionType = label
                .parse()
                .map_err(|_| SchemaError::UnknownFunction(label.to_string()))?;
            let key = normalize_text(key);
            if !registries[&function].contains(&key) {
                return Err(SchemaError::EnumerationOutsideRegistry(name.clone(), function));
            }
            enumerations.insert(
                (function, key),
                values.iter().map(|v| normalize_text(v)).collect(),
            );
        }

        let all_attr_keys: Vec<&String> = registries.values().flatten().collect();
        let mut key_aliases = HashMap::new();
        for (alias, target) in &file.key_aliases {
            let target = normalize_text(target);
            if !all_attr_keys.contains(&&target) {
                return Err(SchemaError::DanglingAlias {
                    alias: alias.clone(),
                    target,
                });
            }
            key_aliases.insert(lookup_key(alias), target);
        }

        let mut global_aliases = HashMap::new();
        for (alias, target) in &file.global_aliases {
            let target_key = normalize_text(target);
            let resolved = match target_key.as_str() {
                OTHER_GLOBAL_KEY => TopLevelKey::OtherGlobal,
                FUNCTION_TYPE_KEY => TopLevelKey::FunctionType,
                other => match BinaryGlobal::from_key(other) {
                    Some(b) => TopLevelKey::Binary(b),
                    None => {
                        return Err(SchemaError::DanglingAlias {
                            alias: alias.clone(),
                            target: target_key,
                        })
                    }
                },
            };
            global_aliases.insert(lookup_key(alias), resolved);
        }
        // Canonical spellings always resolve, whatever the config lists.
        for b in BinaryGlobal::ALL {
            global_aliases.insert(lookup_key(b.key()), TopLevelKey::Binary(b));
        }
        global_aliases.insert(lookup_key(OTHER_GLOBAL_KEY), TopLevelKey::OtherGlobal);
        global_aliases.insert(lookup_key(FUNCTION_TYPE_KEY), TopLevelKey::FunctionType);

        let mut function_aliases = HashMap::new();
        for (alias, target) in &file.function_aliases {
            let function: FunctionType = target.parse().map_err(|_| SchemaError::DanglingAlias {
                alias: alias.clone(),
                target: target.clone(),
            })?;
            function_aliases.insert(lookup_key(alias), function);
        }

        let translations = file
            .translations
            .iter()
            .map(|(from, to)| (normalize_text(from), normalize_text(to)))
            .collect();

        Ok(Schema {
            registries,
            attr_lookup,
            enumerations,
            key_aliases,
            global_aliases,
            function_aliases,
            translations,
        })
    }

    /// Allowed attribute keys for `function`, in serialization order.
    pub fn registry(&self, function: FunctionType) -> &[String] {
        &self.registries[&function]
    }

    /// Closed-set values for `(function, key)`, or `None` for open-set keys.
    pub fn enumeration(&self, function: FunctionType, key: &str) -> Option<&[String]> {
        self.enumerations
            .get(&(function, key.to_string()))
            .map(Vec::as_slice)
    }

    pub fn is_closed_set(&self, function: FunctionType, key: &str) -> bool {
        self.enumeration(function, key).is_some()
    }

    fn translate<'a>(&'a self, normalized: &'a str) -> &'a str {
        self.translations
            .get(normalized)
            .map(String::as_str)
            .unwrap_or(normalized)
    }

    /// Canonical registry key for an attribute key of `function`, if it is
    /// one (directly, through an alias, or through the translation table).
    pub fn resolve_attr_key(&self, function: FunctionType, raw: &str) -> Option<String> {
        let normalized = normalize_text(raw);
        let translated = self.translate(&normalized);
        let lower = translated.to_lowercase();
        if let Some(k) = self.attr_lookup.get(&(function, lower.clone())) {
            return Some(k.clone());
        }
        let aliased = self.key_aliases.get(&lower)?;
        self.attr_lookup
            .get(&(function, aliased.to_lowercase()))
            .cloned()
    }

    /// Position of `key` in the registry of `function`; unknown keys sort
    /// after all registry keys.
    pub fn attr_rank(&self, function: FunctionType, key: &str) -> usize {
        let reg = self.registry(function);
        reg.iter().position(|k| k == key).unwrap_or(reg.len())
    }

    /// Parses one function label, honoring aliases and translations.
    pub fn parse_function(&self, raw: &str) -> Result<FunctionType, UnknownFunction> {
        let normalized = normalize_text(raw);
        let lower = normalized.to_lowercase();
        if let Some(f) = self.function_aliases.get(&lower) {
            return Ok(*f);
        }
        self.translate(&normalized)
            .parse()
            .map_err(|_| UnknownFunction(normalized))
    }

    /// Classifies a top-level key. Returns `None` for unrecognized keys.
    pub fn resolve_top_level(&self, raw: &str) -> Option<TopLevelKey> {
        let normalized = normalize_text(raw);
        let translated = self.translate(&normalized).to_string();
        let lower = translated.to_lowercase();
        if let Some(k) = self.global_aliases.get(&lower) {
            return Some(*k);
        }
        if let Some(f) = self.match_count_key(&lower) {
            return Some(TopLevelKey::Count(f));
        }

        // "<Function> Information <i>", possibly with a translated stem.
        let stem = normalized.trim_end_matches(|c: char| c.is_ascii_digit());
        let digits = &normalized[stem.len()..];
        let stem = stem.trim_end();
        let stem = self.translate(stem).to_lowercase();
        let index = if digits.is_empty() {
            None
        } else {
            Some(digits.parse::<u32>().ok()?)
        };
        let label = stem
            .strip_suffix(" information")
            .or_else(|| stem.strip_suffix(" info"))?;
        let function = self.parse_function(label).ok()?;
        Some(TopLevelKey::Entry(function, index))
    }

    fn match_count_key(&self, lower: &str) -> Option<FunctionType> {
        let rest = lower.strip_prefix("number of ")?;
        let label = rest
            .strip_suffix(" information")
            .or_else(|| rest.strip_suffix(" info"))
            .unwrap_or(rest);
        self.parse_function(label).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_schema_loads() {
        let s = Schema::builtin();
        assert_eq!(s.registry(FunctionType::Construction).len(), 3);
        assert!(s.is_closed_set(FunctionType::Lane, "Turn"));
        assert!(s.is_closed_set(FunctionType::Direction, "Direction"));
        assert!(!s.is_closed_set(FunctionType::Notice, "Direction"));
        assert!(!s.is_closed_set(FunctionType::Direction, "Destination"));
    }

    #[test]
    fn route_is_an_alias_of_via() {
        let s = Schema::builtin();
        assert_eq!(s.resolve_attr_key(FunctionType::Direction, "Route").as_deref(), Some("Via"));
        assert_eq!(s.resolve_attr_key(FunctionType::Direction, "via").as_deref(), Some("Via"));
        assert_eq!(s.resolve_attr_key(FunctionType::Lane, "Route"), None);
        assert_eq!(s.resolve_attr_key(FunctionType::Lane, "Destination"), None);
    }

    #[test]
    fn top_level_spellings_resolve() {
        let s = Schema::builtin();
        for raw in ["Blur", "Blurriness", "blurred", "BLURRY"] {
            assert_eq!(s.resolve_top_level(raw), Some(TopLevelKey::Binary(BinaryGlobal::Blur)));
        }
        assert_eq!(
            s.resolve_top_level("Blocked"),
            Some(TopLevelKey::Binary(BinaryGlobal::Obstruction))
        );
        assert_eq!(
            s.resolve_top_level("Number of Direction Information"),
            Some(TopLevelKey::Count(FunctionType::Direction))
        );
        assert_eq!(
            s.resolve_top_level("Direction Information 12"),
            Some(TopLevelKey::Entry(FunctionType::Direction, Some(12)))
        );
        assert_eq!(
            s.resolve_top_level("lane information"),
            Some(TopLevelKey::Entry(FunctionType::Lane, None))
        );
        assert_eq!(
            s.resolve_top_level("方向信息2"),
            Some(TopLevelKey::Entry(FunctionType::Direction, Some(2)))
        );
        assert_eq!(
            s.resolve_top_level("模糊"),
            Some(TopLevelKey::Binary(BinaryGlobal::Blur))
        );
        assert_eq!(s.resolve_top_level("Parking Information 1"), None);
        assert_eq!(s.resolve_top_level("Colour"), None);
    }

    #[test]
    fn function_aliases() {
        let s = Schema::builtin();
        assert_eq!(s.parse_function("Const."), Ok(FunctionType::Construction));
        assert_eq!(s.parse_function("车道"), Ok(FunctionType::Lane));
        assert!(s.parse_function("Parking").is_err());
    }

    #[test]
    fn rejects_enumeration_outside_registry() {
        let bad = BUILTIN_SCHEMA.replace("\"Lane.Turn\"", "\"Lane.Destination\"");
        assert!(matches!(
            Schema::from_toml_str(&bad),
            Err(SchemaError::EnumerationOutsideRegistry(..))
        ));
    }

    #[test]
    fn rejects_missing_registry() {
        let bad = BUILTIN_SCHEMA.replace("Construction = [\"Construction Site\"", "Parking = [\"Construction Site\"");
        assert!(Schema::from_toml_str(&bad).is_err());
    }
}
