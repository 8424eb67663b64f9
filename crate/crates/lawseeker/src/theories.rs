//! The bundled example theories. They double as the acceptance corpus:
//! each one parses, checks, explores, matches its golden output under its
//! pinned configuration, and has every emitted law validated by the
//! brute-force oracle.

use crate::frontend::{load_theory, FrontendError};
use crate::theory::Theory;

/// A bundled theory file plus its frozen expected output.
#[derive(Debug, Clone, Copy)]
pub struct BundledTheory {
    pub name: &'static str,
    pub source: &'static str,
    /// Expected text report when explored with the file's own options.
    pub golden: &'static str,
}

impl BundledTheory {
    pub fn load(&self) -> Result<Theory, FrontendError> {
        load_theory(self.source)
    }
}

pub fn bundled_catalog() -> Vec<BundledTheory> {
    vec![
        BundledTheory {
            name: "gcd",
            source: include_str!("../theories/gcd.thy"),
            golden: include_str!("../theories/golden/gcd.txt"),
        },
        BundledTheory {
            name: "maps",
            source: include_str!("../theories/maps.thy"),
            golden: include_str!("../theories/golden/maps.txt"),
        },
        BundledTheory {
            name: "lists",
            source: include_str!("../theories/lists.thy"),
            golden: include_str!("../theories/golden/lists.txt"),
        },
        BundledTheory {
            name: "queue-obs",
            source: include_str!("../theories/queue.thy"),
            golden: include_str!("../theories/golden/queue.txt"),
        },
    ]
}

pub fn bundled(name: &str) -> Option<BundledTheory> {
    bundled_catalog().into_iter().find(|b| b.name == name)
}
