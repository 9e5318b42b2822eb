//! On-disk record layout of the catalog file.

use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct File {
    pub format: String,
    pub version: Spanned<u32>,
    #[serde(default)]
    pub system: Vec<Spanned<SystemRecord>>,
    #[serde(default)]
    pub entry: Vec<Spanned<EntryRecord>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct SystemRecord {
    pub id: String,
    pub title: String,
    pub unknowns: Vec<String>,
    pub params: Vec<String>,
    #[serde(default)]
    pub derived: Vec<Spanned<String>>,
    pub equations: Vec<Spanned<String>>,
    pub provenance: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RootsRecord {
    pub name: String,
    pub poly: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct FixtureRecord {
    pub params: Spanned<String>,
    pub candidate: Option<Spanned<String>>,
    pub status: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct EntryRecord {
    pub id: String,
    pub title: String,
    pub alias_of: Option<String>,
    pub params: Vec<String>,
    #[serde(default)]
    pub derived: Vec<Spanned<String>>,
    #[serde(default)]
    pub constraints: Vec<Spanned<String>>,
    pub fixed: Option<Spanned<String>>,
    #[serde(default)]
    pub flags: Vec<String>,
    pub roots: Option<RootsRecord>,
    pub u_equation: Option<Spanned<String>>,
    #[serde(default)]
    pub u_operators: Vec<Spanned<String>>,
    pub v_equation: Option<Spanned<String>>,
    #[serde(default)]
    pub v_operators: Vec<Spanned<String>>,
    pub system: Option<String>,
    pub status: Option<String>,
    #[serde(default)]
    pub fixtures: Vec<FixtureRecord>,
    #[serde(default)]
    pub mutations: Vec<Spanned<String>>,
    #[serde(default)]
    pub cross_refs: Vec<String>,
    pub notes: Option<String>,
    pub provenance: String,
}
