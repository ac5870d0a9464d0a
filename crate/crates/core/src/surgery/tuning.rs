use std::fmt;

use thiserror::Error;

use crate::angle::{digits_to_string, parse_digits, Angle, BinaryExpansion};

use super::config::{validate_config, ConfigError, EdgeConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TuningError {
    #[error("tuning words must be nonempty")]
    Empty,
    #[error("tuning words have different lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("tuning words must differ")]
    Identical,
    #[error("tuning word0 {0} must precede word1 {1}")]
    Order(String, String),
    #[error("tuning word is not a binary string: {0}")]
    NotBinary(String),
}

/// Digit substitution `0 ↦ word0`, `1 ↦ word1`, the angle form of tuning
/// by the hyperbolic component whose root carries the angles `0.(word0)`
/// and `0.(word1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TuningWord {
    word0: Vec<u8>,
    word1: Vec<u8>,
}

impl TuningWord {
    pub fn new(word0: Vec<u8>, word1: Vec<u8>) -> Result<Self, TuningError> {
        if word0.is_empty() || word1.is_empty() {
            return Err(TuningError::Empty);
        }
        if word0.len() != word1.len() {
            return Err(TuningError::LengthMismatch(word0.len(), word1.len()));
        }
        if word0 == word1 {
            return Err(TuningError::Identical);
        }
        if word0 > word1 {
            return Err(TuningError::Order(
                digits_to_string(&word0),
                digits_to_string(&word1),
            ));
        }
        Ok(TuningWord { word0, word1 })
    }

    pub fn parse(word0: &str, word1: &str) -> Result<Self, TuningError> {
        let p = |s: &str| parse_digits(s).map_err(|_| TuningError::NotBinary(s.to_string()));
        Self::new(p(word0)?, p(word1)?)
    }

    /// `(0, 1)`, which leaves every angle unchanged.
    pub fn trivial() -> Self {
        TuningWord {
            word0: vec![0],
            word1: vec![1],
        }
    }

    pub fn word0(&self) -> &[u8] {
        &self.word0
    }

    pub fn word1(&self) -> &[u8] {
        &self.word1
    }

    pub fn period(&self) -> usize {
        self.word0.len()
    }

    pub fn substitute(&self, digits: &[u8]) -> Vec<u8> {
        digits
            .iter()
            .flat_map(|&d| if d == 0 { &self.word0 } else { &self.word1 })
            .copied()
            .collect()
    }

    /// The single substitution equal to applying `inner` first, then `self`.
    pub fn after(&self, inner: &TuningWord) -> TuningWord {
        TuningWord {
            word0: self.substitute(&inner.word0),
            word1: self.substitute(&inner.word1),
        }
    }
}

impl fmt::Display for TuningWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            digits_to_string(&self.word0),
            digits_to_string(&self.word1)
        )
    }
}

/// Substitutes the words into the canonical expansion of `x`.
pub fn tune_angle(word: &TuningWord, x: &Angle) -> Angle {
    let e = x.to_expansion();
    Angle::from_expansion(&BinaryExpansion {
        preperiod_word: word.substitute(&e.preperiod_word),
        period_word: word.substitute(&e.period_word),
    })
}

/// Tunes all eight angles and validates the result from scratch.
pub fn tune_config(word: &TuningWord, cfg: &EdgeConfig) -> Result<EdgeConfig, ConfigError> {
    validate_config(cfg.thetas().clone().map(|t| tune_angle(word, &t)))
}
