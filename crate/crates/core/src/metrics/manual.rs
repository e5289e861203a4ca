use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Error-free flags for the six annotation categories; `true` means the
/// derivation has no error of that kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub overall: bool,
    pub skip: bool,
    pub repeat: bool,
    pub incorrect: bool,
    pub irrelevant: bool,
    pub redundant: bool,
}

impl ErrorAnnotation {
    pub const CLEAN: ErrorAnnotation = ErrorAnnotation::from_flags([true; 6]);

    pub const fn from_flags(x: [bool; 6]) -> ErrorAnnotation {
        ErrorAnnotation {
            overall: x[0],
            skip: x[1],
            repeat: x[2],
            incorrect: x[3],
            irrelevant: x[4],
            redundant: x[5],
        }
    }

    pub fn flags(&self) -> [bool; 6] {
        [self.overall, self.skip, self.repeat, self.incorrect, self.irrelevant, self.redundant]
    }

    /// From a 0/1 vector in category order.
    pub fn from_bits(x: &[u8]) -> Result<ErrorAnnotation, MetricsError> {
        if x.len() != 6 || x.iter().any(|&b| b > 1) {
            return Err(MetricsError::InvalidAnnotation(format!("{x:?}")));
        }
        let mut f = [false; 6];
        for (o, &b) in f.iter_mut().zip(x) {
            *o = b == 1;
        }
        Ok(ErrorAnnotation::from_flags(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    /// Category weights in the order overall, skip, repeat, incorrect,
    /// irrelevant, redundant.
    pub w: [f64; 6],
    pub alpha: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w: [0.2, 0.05, 0.15, 0.25, 0.25, 0.1],
            alpha: 0.001,
        }
    }
}

impl ScoreWeights {
    pub fn new(w: [f64; 6], alpha: f64) -> Result<ScoreWeights, MetricsError> {
        let s = ScoreWeights { w, alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.w.iter().any(|&x| x.is_nan() || x < 0.0 || x.is_infinite()) {
            return Err(MetricsError::InvalidWeights("weights must be non-negative".into()));
        }
        let sum: f64 = self.w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 || self.alpha.is_infinite() {
            return Err(MetricsError::InvalidWeights("alpha must be positive".into()));
        }
        Ok(())
    }
}

/// `alpha * (exp(ln((alpha + 1) / alpha) * w.x) - 1)`: 0 with every category
/// in error, 1 with none, and steeply convex in between.
pub fn manual_score(x: &ErrorAnnotation, w: &ScoreWeights) -> f64 {
    let wx: f64 = x
        .flags()
        .iter()
        .zip(w.w)
        .map(|(&f, wi)| if f { wi } else { 0.0 })
        .sum();
    let a = w.alpha;
    let m = a * ((((a + 1.0) / a).ln() * wx).exp() - 1.0);
    m.clamp(0.0, 1.0)
}
