use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{digits_to_string, Angle};

use super::config::EdgeConfig;
use super::tuning::{TuningError, TuningWord};

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("malformed config: {0}")]
    Format(#[from] serde_json::Error),
    #[error("malformed angle {key} = {value:?}")]
    Angle { key: &'static str, value: String },
    #[error("tuning_word0 and tuning_word1 must be given together")]
    PartialTuning,
    #[error(transparent)]
    Tuning(#[from] TuningError),
}

/// On-disk edge configuration: eight `"p/q"` strings and an optional
/// tuning word applied on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theta1_minus: String,
    pub theta2_minus: String,
    pub theta3_minus: String,
    pub theta4_minus: String,
    pub theta4_plus: String,
    pub theta3_plus: String,
    pub theta2_plus: String,
    pub theta1_plus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning_word0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning_word1: Option<String>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn from_angles(theta: &[Angle; 8]) -> Self {
        let s = |i: usize| theta[i].to_string();
        ConfigFile {
            theta1_minus: s(0),
            theta2_minus: s(1),
            theta3_minus: s(2),
            theta4_minus: s(3),
            theta4_plus: s(4),
            theta3_plus: s(5),
            theta2_plus: s(6),
            theta1_plus: s(7),
            tuning_word0: None,
            tuning_word1: None,
        }
    }

    pub fn from_config(cfg: &EdgeConfig) -> Self {
        Self::from_angles(cfg.thetas())
    }

    pub fn with_tuning(mut self, word: &TuningWord) -> Self {
        self.tuning_word0 = Some(digits_to_string(word.word0()));
        self.tuning_word1 = Some(digits_to_string(word.word1()));
        self
    }

    pub fn tuning(&self) -> Result<Option<TuningWord>, ConfigFileError> {
        match (&self.tuning_word0, &self.tuning_word1) {
            (None, None) => Ok(None),
            (Some(w0), Some(w1)) => Ok(Some(TuningWord::parse(w0, w1)?)),
            _ => Err(ConfigFileError::PartialTuning),
        }
    }

    /// The eight angles as written, without tuning applied.
    pub fn raw_angles(&self) -> Result<[Angle; 8], ConfigFileError> {
        let fields = [
            ("theta1_minus", &self.theta1_minus),
            ("theta2_minus", &self.theta2_minus),
            ("theta3_minus", &self.theta3_minus),
            ("theta4_minus", &self.theta4_minus),
            ("theta4_plus", &self.theta4_plus),
            ("theta3_plus", &self.theta3_plus),
            ("theta2_plus", &self.theta2_plus),
            ("theta1_plus", &self.theta1_plus),
        ];
        let parsed: Vec<Angle> = fields
            .iter()
            .map(|(key, value)| {
                value
                    .trim()
                    .parse::<Angle>()
                    .map_err(|_| ConfigFileError::Angle {
                        key,
                        value: value.to_string(),
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(parsed.try_into().expect("eight fields"))
    }

    /// The angles to validate: tuned when a tuning word is present.
    pub fn angles(&self) -> Result<[Angle; 8], ConfigFileError> {
        let raw = self.raw_angles()?;
        Ok(match self.tuning()? {
            Some(w) => raw.map(|t| super::tuning::tune_angle(&w, &t)),
            None => raw,
        })
    }
}
