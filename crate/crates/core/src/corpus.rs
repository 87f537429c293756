//! Bundled example programs and type systems with their expected verdicts.

use crate::inference::{infer, InferError};
use crate::syntax::{
    parse_program, parse_type_system, ParseError, Program, TypeParseError, TypeSystem,
};
use serde::Deserialize;
use thiserror::Error;

macro_rules! sources {
    ($($f:literal),* $(,)?) => {
        &[$(($f, include_str!(concat!("../fixtures/", $f)))),*]
    };
}

static SOURCES: &[(&str, &str)] = sources![
    "sieve.migo",
    "fib.migo",
    "fib3.migo",
    "fib_bad.migo",
    "fib-async.migo",
    "fact.migo",
    "dinephil.migo",
    "jobsched.migo",
    "concsys.migo",
    "fanin.migo",
    "fanin-alt.migo",
    "mismatch.migo",
    "fixed.migo",
    "alt-bit.migo",
    "forselect.migo",
    "cond-recur.migo",
    "pingpong-sync.migo",
    "pingpong-async.migo",
    "four-round.mgt",
    "not-live.mgt",
    "unfenced-rw.mgt",
    "double-close.mgt",
];

static MANIFEST: &str = include_str!("../fixtures/manifest.json");

#[derive(Clone, Debug, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub file: String,
    /// Explicit bound; `None` means the automatic sweep.
    #[serde(default)]
    pub k: Option<usize>,
    pub fenced: bool,
    pub live: Option<bool>,
    pub safe: Option<bool>,
    /// Part of the published benchmark table.
    #[serde(default)]
    pub table: bool,
    /// The process graph is finite and small enough to explore fully.
    #[serde(default)]
    pub explorable: bool,
    pub provenance: String,
    #[serde(skip)]
    pub source: &'static str,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Types(#[from] TypeParseError),
    #[error(transparent)]
    Infer(#[from] InferError),
}

impl Fixture {
    pub fn is_program(&self) -> bool {
        self.file.ends_with(".migo")
    }

    pub fn program(&self) -> Option<Result<Program, ParseError>> {
        self.is_program().then(|| parse_program(self.source))
    }

    /// The type system: inferred for programs, parsed otherwise.
    pub fn types(&self) -> Result<TypeSystem, FixtureError> {
        match self.program() {
            Some(p) => Ok(infer(&p?)?),
            None => Ok(parse_type_system(self.source)?),
        }
    }
}

/// All bundled fixtures in manifest order.
pub fn corpus() -> Vec<Fixture> {
    let mut out: Vec<Fixture> = serde_json::from_str(MANIFEST).expect("bundled manifest is valid");
    for f in &mut out {
        f.source = SOURCES
            .iter()
            .find(|(n, _)| *n == f.file)
            .map(|(_, s)| *s)
            .unwrap_or_else(|| panic!("manifest names unknown file {}", f.file));
    }
    out
}

pub fn fixture(name: &str) -> Option<Fixture> {
    corpus().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for f in corpus() {
            f.types().unwrap_or_else(|e| panic!("{}: {e}", f.name));
        }
    }

    #[test]
    fn every_source_is_listed() {
        let c = corpus();
        for (file, _) in SOURCES {
            assert!(c.iter().any(|f| f.file == *file), "{file}");
        }
    }
}
