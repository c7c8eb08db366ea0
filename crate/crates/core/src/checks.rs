use serde::{Serialize, Serializer};

fn as_decimal<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:e}"))
}

/// Which side of the tolerance counts as a pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One named pass/fail record.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    #[serde(serialize_with = "as_decimal")]
    pub measured: f64,
    #[serde(serialize_with = "as_decimal")]
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, anchor: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let passed = measured.is_finite() && measured <= tolerance;
        Check { name: name.into(), anchor: anchor.into(), measured, tolerance, relation: Relation::AtMost, passed }
    }

    pub fn at_least(name: impl Into<String>, anchor: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let passed = measured.is_finite() && measured >= tolerance;
        Check { name: name.into(), anchor: anchor.into(), measured, tolerance, relation: Relation::AtLeast, passed }
    }

    /// A check whose evaluation itself failed.
    pub fn errored(name: impl Into<String>, anchor: impl Into<String>, tolerance: f64) -> Self {
        Check { name: name.into(), anchor: anchor.into(), measured: f64::NAN, tolerance, relation: Relation::AtMost, passed: false }
    }

    pub fn line(&self) -> String {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "{} {}: {:.3e} {} {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            op,
            self.tolerance
        )
    }
}
