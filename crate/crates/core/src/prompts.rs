//! Agent prompt templates with `{name}` placeholders.

use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PromptKind {
    Background,
    Client,
    Therapist,
    Supervisor,
    EuExtractor,
    EaExtractor,
    ConciseBackground,
    ConciseClient,
    ConciseTherapist,
    ConciseItems,
}

impl PromptKind {
    pub const ALL: [PromptKind; 10] = [
        PromptKind::Background,
        PromptKind::Client,
        PromptKind::Therapist,
        PromptKind::Supervisor,
        PromptKind::EuExtractor,
        PromptKind::EaExtractor,
        PromptKind::ConciseBackground,
        PromptKind::ConciseClient,
        PromptKind::ConciseTherapist,
        PromptKind::ConciseItems,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            PromptKind::Background => "background.txt",
            PromptKind::Client => "client.txt",
            PromptKind::Therapist => "therapist.txt",
            PromptKind::Supervisor => "supervisor.txt",
            PromptKind::EuExtractor => "eu_extractor.txt",
            PromptKind::EaExtractor => "ea_extractor.txt",
            PromptKind::ConciseBackground => "concise_background.txt",
            PromptKind::ConciseClient => "concise_client.txt",
            PromptKind::ConciseTherapist => "concise_therapist.txt",
            PromptKind::ConciseItems => "concise_items.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            PromptKind::Background => include_str!("../prompts/background.txt"),
            PromptKind::Client => include_str!("../prompts/client.txt"),
            PromptKind::Therapist => include_str!("../prompts/therapist.txt"),
            PromptKind::Supervisor => include_str!("../prompts/supervisor.txt"),
            PromptKind::EuExtractor => include_str!("../prompts/eu_extractor.txt"),
            PromptKind::EaExtractor => include_str!("../prompts/ea_extractor.txt"),
            PromptKind::ConciseBackground => include_str!("../prompts/concise_background.txt"),
            PromptKind::ConciseClient => include_str!("../prompts/concise_client.txt"),
            PromptKind::ConciseTherapist => include_str!("../prompts/concise_therapist.txt"),
            PromptKind::ConciseItems => include_str!("../prompts/concise_items.txt"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: HashMap<PromptKind, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            templates: PromptKind::ALL
                .iter()
                .map(|k| (*k, k.builtin().to_string()))
                .collect(),
        }
    }
}

impl PromptSet {
    /// Built-in templates, with any file present in `dir` (by
    /// [`PromptKind::file_name`]) taking precedence.
    pub fn with_overrides(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::default();
        for kind in PromptKind::ALL {
            let path = dir.join(kind.file_name());
            if path.is_file() {
                set.templates.insert(kind, std::fs::read_to_string(path)?);
            }
        }
        Ok(set)
    }

    pub fn template(&self, kind: PromptKind) -> &str {
        &self.templates[&kind]
    }

    pub fn render(&self, kind: PromptKind, vars: &[(&str, &str)]) -> String {
        render(self.template(kind), vars)
    }
}

/// Single-pass substitution of `{name}` where `name` is a known variable.
/// Anything else, including JSON braces, is copied verbatim.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            let is_ident = !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !is_ident {
                return None;
            }
            vars.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (*v, close))
        });
        match replaced {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_known_names_only() {
        let s = render(
            "A {x} {y} {\"k\": 1} {x}",
            &[("x", "1"), ("z", "nope")],
        );
        assert_eq!(s, "A 1 {y} {\"k\": 1} 1");
    }

    #[test]
    fn values_are_not_rescanned() {
        assert_eq!(render("{a}", &[("a", "{a}")]), "{a}");
    }

    #[test]
    fn overrides_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("client.txt"), "custom {persona}").unwrap();
        let set = PromptSet::with_overrides(dir.path()).unwrap();
        assert_eq!(set.render(PromptKind::Client, &[("persona", "p")]), "custom p");
        assert_eq!(
            set.template(PromptKind::Therapist),
            PromptSet::default().template(PromptKind::Therapist)
        );
    }

    #[test]
    fn builtin_templates_use_documented_placeholders() {
        let set = PromptSet::default();
        assert!(set.template(PromptKind::Client).contains("{history}"));
        assert!(set.template(PromptKind::Background).contains("{theme}"));
        assert!(set.template(PromptKind::Supervisor).contains("{background}"));
    }
}
