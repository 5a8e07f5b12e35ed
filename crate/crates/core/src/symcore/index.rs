use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Spacetime, range 4, metric η = diag(−1, 1, 1, 1).
    Lorentz,
    /// Inner space, range `D`, metric δ.
    Inner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexLabel {
    pub name: String,
    pub space: Space,
    pub variance: Variance,
}

impl IndexLabel {
    pub fn new(name: &str, space: Space, variance: Variance) -> Self {
        IndexLabel {
            name: name.to_string(),
            space,
            variance,
        }
    }

    pub fn up(name: &str, space: Space) -> Self {
        IndexLabel::new(name, space, Variance::Upper)
    }

    pub fn down(name: &str, space: Space) -> Self {
        IndexLabel::new(name, space, Variance::Lower)
    }

    /// Upper Lorentz label.
    pub fn lu(name: &str) -> Self {
        IndexLabel::up(name, Space::Lorentz)
    }

    /// Lower Lorentz label.
    pub fn ld(name: &str) -> Self {
        IndexLabel::down(name, Space::Lorentz)
    }

    /// Upper inner label.
    pub fn iu(name: &str) -> Self {
        IndexLabel::up(name, Space::Inner)
    }

    /// Lower inner label.
    pub fn id(name: &str) -> Self {
        IndexLabel::down(name, Space::Inner)
    }

    pub fn flipped(&self) -> Self {
        IndexLabel {
            variance: self.variance.flip(),
            ..self.clone()
        }
    }

    pub fn renamed(&self, name: &str) -> Self {
        IndexLabel {
            name: name.to_string(),
            ..self.clone()
        }
    }

    pub fn with_variance(&self, variance: Variance) -> Self {
        IndexLabel {
            variance,
            ..self.clone()
        }
    }

    /// Canonical dummy names start with `#`; user labels never do.
    pub fn is_canonical_dummy(&self) -> bool {
        self.name.starts_with('#')
    }
}

impl fmt::Display for IndexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.variance {
            Variance::Upper => '^',
            Variance::Lower => '_',
        };
        write!(f, "{v}{}", self.name)
    }
}
