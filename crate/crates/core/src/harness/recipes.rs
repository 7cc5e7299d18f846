//! Bundled recipes. Each file pins its headline parameters in
//! `published_parameters`, checked when the recipe is loaded.

use super::config::RunConfig;
use crate::error::{Error, Result};

const RECIPES: &[(&str, &str)] = &[
    ("fig1a", include_str!("../../recipes/fig1a.json")),
    ("fig1b", include_str!("../../recipes/fig1b.json")),
    ("fig1c", include_str!("../../recipes/fig1c.json")),
    ("fig2a", include_str!("../../recipes/fig2a.json")),
    ("fig2b", include_str!("../../recipes/fig2b.json")),
    ("fig2c", include_str!("../../recipes/fig2c.json")),
    ("fig2d", include_str!("../../recipes/fig2d.json")),
    ("fig2e", include_str!("../../recipes/fig2e.json")),
    ("fig2f", include_str!("../../recipes/fig2f.json")),
    ("fig3a", include_str!("../../recipes/fig3a.json")),
    ("fig3b", include_str!("../../recipes/fig3b.json")),
    ("fig5", include_str!("../../recipes/fig5.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    RECIPES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    RECIPES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<RunConfig> {
    let text = source(name).ok_or_else(|| {
        Error::Config(format!(
            "no recipe named `{name}`; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    RunConfig::from_json(text)
}

pub fn all() -> Result<Vec<RunConfig>> {
    names().map(load).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_recipe_loads_and_resolves() {
        for name in names() {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
            assert!(!cfg.published_parameters.is_empty(), "{name}");
            cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_recipe_is_a_config_error() {
        assert!(load("nope").unwrap_err().is_config());
    }
}
