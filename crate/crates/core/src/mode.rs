use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The five transportation modes. The declaration order is the index order
/// and is used for every tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Bike,
    Car,
    Walk,
    Run,
    Bus,
}

pub const NUM_MODES: usize = 5;

/// Number of unordered mode pairs, C(5, 2).
pub const NUM_PAIRS: usize = NUM_MODES * (NUM_MODES - 1) / 2;

impl ModeLabel {
    pub const ALL: [ModeLabel; NUM_MODES] = [
        ModeLabel::Bike,
        ModeLabel::Car,
        ModeLabel::Walk,
        ModeLabel::Run,
        ModeLabel::Bus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<ModeLabel> {
        Self::ALL.get(idx).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeLabel::Bike => "bike",
            ModeLabel::Car => "car",
            ModeLabel::Walk => "walk",
            ModeLabel::Run => "run",
            ModeLabel::Bus => "bus",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::input(format!("unknown mode label `{s}`")))
    }
}

/// Unordered pair of distinct modes, stored with the lower index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModePair {
    lo: ModeLabel,
    hi: ModeLabel,
}

impl ModePair {
    pub fn new(a: ModeLabel, b: ModeLabel) -> Option<ModePair> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(ModePair { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(ModePair { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// All ten pairs in lexicographic index order.
    pub fn all() -> Vec<ModePair> {
        let mut out = Vec::with_capacity(NUM_PAIRS);
        for (i, &a) in ModeLabel::ALL.iter().enumerate() {
            for &b in &ModeLabel::ALL[i + 1..] {
                out.push(ModePair { lo: a, hi: b });
            }
        }
        out
    }

    /// Position of this pair in [`ModePair::all`].
    pub fn index(self) -> usize {
        let (i, j) = (self.lo.index(), self.hi.index());
        // rows before i contribute (n-1) + (n-2) + ... + (n-i) pairs
        i * (2 * NUM_MODES - i - 1) / 2 + (j - i - 1)
    }

    pub fn lo(self) -> ModeLabel {
        self.lo
    }

    pub fn hi(self) -> ModeLabel {
        self.hi
    }

    pub fn contains(self, m: ModeLabel) -> bool {
        self.lo == m || self.hi == m
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl FromStr for ModePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::input(format!("mode pair `{s}` must look like `car-bus`")))?;
        ModePair::new(a.parse()?, b.parse()?)
            .ok_or_else(|| Error::input(format!("mode pair `{s}` repeats a mode")))
    }
}
