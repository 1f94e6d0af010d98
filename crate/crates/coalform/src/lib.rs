//! File formats, reports, and the command-line driver for
//! [`coalform_core`].

pub mod cli;
pub mod report;
pub mod spec;

pub use report::{profile_of, render_text, Report};
pub use spec::{parse_spec, GameSpec, SpecError};

/// A spec file shipped inside the binary.
#[derive(Clone, Copy, Debug)]
pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

impl Bundled {
    pub fn file_name(&self) -> String {
        format!("{}.spec", self.name)
    }

    pub fn spec(&self) -> GameSpec {
        parse_spec(self.text).expect("bundled specs are valid")
    }
}

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "dinner",
        text: include_str!("../specs/dinner.spec"),
    },
    Bundled {
        name: "pd",
        text: include_str!("../specs/pd.spec"),
    },
    Bundled {
        name: "pd-extrovert",
        text: include_str!("../specs/pd-extrovert.spec"),
    },
    Bundled {
        name: "matching-pennies",
        text: include_str!("../specs/matching-pennies.spec"),
    },
];

/// Looks up a bundled spec by name, with or without the `.spec` suffix.
pub fn bundled(name: &str) -> Option<&'static Bundled> {
    let stem = name.strip_suffix(".spec").unwrap_or(name);
    BUNDLED.iter().find(|b| b.name == stem)
}
