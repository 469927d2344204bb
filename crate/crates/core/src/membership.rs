//! Discretized membership functions.
//!
//! A universe of discourse is cut into [`LEVELS`] equal-width bins and every
//! membership function stores one truth value per bin, each in `0..=MAX_TRUTH`.
//! This is the representation the inference chip stores in its rule memory,
//! so everything downstream (rule resolution, inference, code generation)
//! works on these 16-entry vectors.

use std::fmt;

use thiserror::Error;

/// Number of discretization bins across a universe of discourse.
pub const LEVELS: usize = 16;

/// Largest truth value a bin can hold.
pub const MAX_TRUTH: u8 = 15;

/// A truth value in `0..=MAX_TRUTH`.
pub type TruthLevel = u8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MembershipError {
    #[error("universe lower bound {lo} must be finite and strictly below upper bound {hi}")]
    InvalidUniverse { lo: f64, hi: f64 },
    #[error("level index {0} is outside 0..=15")]
    LevelOutOfRange(usize),
    #[error("truth value {value} at index {index} is outside 0..=15")]
    TruthOutOfRange { index: usize, value: i64 },
    #[error("membership function needs exactly 16 truth values, got {0}")]
    WrongLength(usize),
    #[error("center and tail are both at column {0}; the distribution has zero width")]
    Degenerate(usize),
}

/// The real interval a signal ranges over, in the signal's physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Universe {
    lo: f64,
    hi: f64,
}

impl Universe {
    pub fn new(lo: f64, hi: f64) -> Result<Self, MembershipError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Universe { lo, hi })
        } else {
            Err(MembershipError::InvalidUniverse { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    /// Width of one discretization bin.
    pub fn bin_width(&self) -> f64 {
        self.width() / LEVELS as f64
    }

    /// True when every point of `self` also lies in `other`.
    pub fn is_within(&self, other: &Universe) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Maps a physical value onto its bin. Values outside the universe clamp
    /// to the first or last bin; NaN lands in bin 0.
    pub fn quantize(&self, x: f64) -> TruthLevel {
        let scaled = ((x - self.lo) / self.width() * LEVELS as f64).floor();
        // `as` saturates and sends NaN to 0.
        (scaled as i64).clamp(0, LEVELS as i64 - 1) as TruthLevel
    }

    /// Physical value at the middle of bin `level`.
    pub fn bin_center(&self, level: usize) -> Result<f64, MembershipError> {
        if level >= LEVELS {
            return Err(MembershipError::LevelOutOfRange(level));
        }
        Ok(self.position(level as f64))
    }

    /// `lo + (index + 0.5) * bin_width` for a fractional bin index. Shared by
    /// [`Universe::bin_center`] and the centroid so both land on identical bits.
    pub(crate) fn position(&self, index: f64) -> f64 {
        self.lo + (index + 0.5) * self.width() / LEVELS as f64
    }
}

/// Free-function form of [`Universe::quantize`].
pub fn quantize(x: f64, u: &Universe) -> TruthLevel {
    u.quantize(x)
}

/// Free-function form of [`Universe::bin_center`].
pub fn bin_center(level: usize, u: &Universe) -> Result<f64, MembershipError> {
    u.bin_center(level)
}

/// Rounds half away from zero and clamps into the truth range.
pub(crate) fn to_truth(x: f64) -> TruthLevel {
    // f64::round already rounds half away from zero.
    x.round().clamp(0.0, MAX_TRUTH as f64) as TruthLevel
}

/// A fuzzy variable's membership function sampled on the 16-bin grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MembershipFunction([TruthLevel; LEVELS]);

impl MembershipFunction {
    /// All bins at full truth.
    pub const ANY: MembershipFunction = MembershipFunction([MAX_TRUTH; LEVELS]);
    /// All bins at zero truth.
    pub const NULL: MembershipFunction = MembershipFunction([0; LEVELS]);

    pub fn new(levels: [TruthLevel; LEVELS]) -> Result<Self, MembershipError> {
        if let Some((index, &value)) = levels.iter().enumerate().find(|(_, &v)| v > MAX_TRUTH) {
            return Err(MembershipError::TruthOutOfRange {
                index,
                value: value as i64,
            });
        }
        Ok(MembershipFunction(levels))
    }

    /// Builds from arbitrary integers, checking both length and range.
    pub fn from_slice(values: &[i64]) -> Result<Self, MembershipError> {
        if values.len() != LEVELS {
            return Err(MembershipError::WrongLength(values.len()));
        }
        let mut levels = [0; LEVELS];
        for (index, (&value, slot)) in values.iter().zip(levels.iter_mut()).enumerate() {
            if !(0..=MAX_TRUTH as i64).contains(&value) {
                return Err(MembershipError::TruthOutOfRange { index, value });
            }
            *slot = value as TruthLevel;
        }
        Ok(MembershipFunction(levels))
    }

    pub fn levels(&self) -> &[TruthLevel; LEVELS] {
        &self.0
    }

    /// Truth value at bin `level`. Panics if `level >= 16`.
    pub fn at(&self, level: usize) -> TruthLevel {
        self.0[level]
    }

    pub fn max_truth(&self) -> TruthLevel {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Gaussian bump peaking at `center`; the `tail` column sits three standard
    /// deviations out, which rounds to zero truth.
    pub fn normal(center: usize, tail: usize) -> Result<Self, MembershipError> {
        let width = generator_width(center, tail)?;
        let sigma = width / 3.0;
        Ok(Self::from_fn(|i| {
            let d = i as f64 - center as f64;
            MAX_TRUTH as f64 * (-(d * d) / (2.0 * sigma * sigma)).exp()
        }))
    }

    /// Symmetric triangle peaking at `center` and reaching zero at the `tail`
    /// distance on both sides.
    pub fn triangle(center: usize, tail: usize) -> Result<Self, MembershipError> {
        let width = generator_width(center, tail)?;
        Ok(Self::from_fn(|i| {
            let d = (i as f64 - center as f64).abs();
            MAX_TRUTH as f64 * (1.0 - d / width).max(0.0)
        }))
    }

    fn from_fn(f: impl Fn(usize) -> f64) -> Self {
        let mut levels = [0; LEVELS];
        for (i, slot) in levels.iter_mut().enumerate() {
            *slot = to_truth(f(i));
        }
        MembershipFunction(levels)
    }

    /// Applies a single hedge.
    pub fn hedge(&self, adverb: Adverb) -> Self {
        let full = MAX_TRUTH as f64;
        match adverb {
            Adverb::Very => Self::from_fn(|i| {
                let t = self.0[i] as f64 / full;
                full * t * t
            }),
            Adverb::Somewhat => Self::from_fn(|i| full * (self.0[i] as f64 / full).sqrt()),
            Adverb::Above => {
                let peak = self.max_truth();
                let first = self.0.iter().position(|&v| v == peak).unwrap_or(0);
                let mut levels = [0; LEVELS];
                for i in first + 1..LEVELS {
                    levels[i] = MAX_TRUTH - self.0[i];
                }
                MembershipFunction(levels)
            }
            Adverb::Below => {
                let peak = self.max_truth();
                let last = self.0.iter().rposition(|&v| v == peak).unwrap_or(LEVELS - 1);
                let mut levels = [0; LEVELS];
                for i in 0..last {
                    levels[i] = MAX_TRUTH - self.0[i];
                }
                MembershipFunction(levels)
            }
        }
    }

    /// Applies a chain of hedges written left to right in a rule, e.g.
    /// `ABOVE VERY X`: the adverb nearest the noun applies first.
    pub fn hedge_chain(&self, adverbs: &[Adverb]) -> Self {
        adverbs.iter().rev().fold(*self, |m, &a| m.hedge(a))
    }
}

fn generator_width(center: usize, tail: usize) -> Result<f64, MembershipError> {
    for c in [center, tail] {
        if c >= LEVELS {
            return Err(MembershipError::LevelOutOfRange(c));
        }
    }
    if center == tail {
        return Err(MembershipError::Degenerate(center));
    }
    Ok(center.abs_diff(tail) as f64)
}

pub fn make_normal(center: usize, tail: usize) -> Result<MembershipFunction, MembershipError> {
    MembershipFunction::normal(center, tail)
}

pub fn make_triangle(center: usize, tail: usize) -> Result<MembershipFunction, MembershipError> {
    MembershipFunction::triangle(center, tail)
}

pub fn apply_adverb(adverb: Adverb, m: &MembershipFunction) -> MembershipFunction {
    m.hedge(adverb)
}

impl fmt::Debug for MembershipFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MF{:?}", self.0)
    }
}

impl fmt::Display for MembershipFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Linguistic hedge modifying a fuzzy variable inside a rule clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adverb {
    /// Narrows: squares the normalized truth.
    Very,
    /// Relaxes: square root of the normalized truth.
    Somewhat,
    /// Complement of the definition strictly to the right of its first peak.
    Above,
    /// Complement of the definition strictly to the left of its last peak.
    Below,
}

impl Adverb {
    pub const ALL: [Adverb; 4] = [Adverb::Very, Adverb::Somewhat, Adverb::Above, Adverb::Below];

    pub fn keyword(&self) -> &'static str {
        match self {
            Adverb::Very => "VERY",
            Adverb::Somewhat => "SOMEWHAT",
            Adverb::Above => "ABOVE",
            Adverb::Below => "BELOW",
        }
    }

    /// Case-insensitive keyword lookup.
    pub fn from_keyword(word: &str) -> Option<Adverb> {
        Adverb::ALL
            .into_iter()
            .find(|a| a.keyword().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for Adverb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}
