//! Binary / bipolar activity vectors with a declared coding level.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng::SeedStream;

/// Alphabet of a pattern: `{0,1}` or `{-1,+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coding {
    Binary,
    Bipolar,
}

/// Activity vector over one of the two alphabets.
///
/// "Active" means `1` in binary mode and `+1` in bipolar mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    bits: Vec<i8>,
    coding: Coding,
}

impl Pattern {
    /// Build from raw values, validating the alphabet.
    pub fn new(bits: Vec<i8>, coding: Coding) -> Result<Self> {
        let ok = match coding {
            Coding::Binary => bits.iter().all(|&b| b == 0 || b == 1),
            Coding::Bipolar => bits.iter().all(|&b| b == -1 || b == 1),
        };
        if !ok {
            return Err(CoreError::InvalidInput(format!(
                "element outside the {coding:?} alphabet"
            )));
        }
        Ok(Self { bits, coding })
    }

    /// All-inactive pattern of dimension `n`.
    pub fn inactive(n: usize, coding: Coding) -> Self {
        let off = match coding {
            Coding::Binary => 0,
            Coding::Bipolar => -1,
        };
        Self {
            bits: vec![off; n],
            coding,
        }
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn coding(&self) -> Coding {
        self.coding
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> i8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, v: i8) {
        debug_assert!(match self.coding {
            Coding::Binary => v == 0 || v == 1,
            Coding::Bipolar => v == -1 || v == 1,
        });
        self.bits[i] = v;
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_active(i)).collect()
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Fraction of active units (the coding level).
    pub fn sparsity(&self) -> f64 {
        self.active_count() as f64 / self.n() as f64
    }

    /// Map `0 -> -1` keeping active units; identity on bipolar input.
    pub fn to_bipolar(&self) -> Pattern {
        match self.coding {
            Coding::Bipolar => self.clone(),
            Coding::Binary => Pattern {
                bits: self.bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect(),
                coding: Coding::Bipolar,
            },
        }
    }

    /// Map `-1 -> 0` keeping active units; identity on binary input.
    pub fn to_binary(&self) -> Pattern {
        match self.coding {
            Coding::Binary => self.clone(),
            Coding::Bipolar => Pattern {
                bits: self.bits.iter().map(|&b| if b == 1 { 1 } else { 0 }).collect(),
                coding: Coding::Binary,
            },
        }
    }

    /// Elementwise complement within the alphabet.
    pub fn complement(&self) -> Pattern {
        let bits = match self.coding {
            Coding::Binary => self.bits.iter().map(|&b| 1 - b).collect(),
            Coding::Bipolar => self.bits.iter().map(|&b| -b).collect(),
        };
        Pattern {
            bits,
            coding: self.coding,
        }
    }

    /// Flip `k` distinct positions chosen uniformly at random.
    pub fn with_flipped(&self, rng: &mut SeedStream, k: usize) -> Pattern {
        let mut out = self.clone();
        for i in rng.choose_indices(self.n(), k) {
            let v = out.bits[i];
            out.bits[i] = match self.coding {
                Coding::Binary => 1 - v,
                Coding::Bipolar => -v,
            };
        }
        out
    }
}

fn check_compatible(a: &Pattern, b: &Pattern) -> Result<()> {
    if a.n() != b.n() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} vs {}",
            a.n(),
            b.n()
        )));
    }
    if a.coding() != b.coding() {
        return Err(CoreError::ModeMismatch(format!(
            "{:?} vs {:?}",
            a.coding(),
            b.coding()
        )));
    }
    Ok(())
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &Pattern, b: &Pattern) -> Result<usize> {
    check_compatible(a, b)?;
    Ok(a.bits
        .iter()
        .zip(&b.bits)
        .filter(|(x, y)| x != y)
        .count())
}

/// Normalized dot product `(1/n) Σ a_i b_i`, bipolar mode only.
pub fn overlap(a: &Pattern, b: &Pattern) -> Result<f64> {
    check_compatible(a, b)?;
    if a.coding() != Coding::Bipolar {
        return Err(CoreError::ModeMismatch(
            "overlap is defined on bipolar patterns".into(),
        ));
    }
    let dot: i64 = a
        .bits
        .iter()
        .zip(&b.bits)
        .map(|(&x, &y)| (x as i64) * (y as i64))
        .sum();
    Ok(dot as f64 / a.n() as f64)
}

/// Pattern with exactly `round(a * n)` active units chosen uniformly
/// without replacement.
pub fn random_sparse_pattern(
    rng: &mut SeedStream,
    n: usize,
    a: f64,
    coding: Coding,
) -> Result<Pattern> {
    if n == 0 {
        return Err(CoreError::InvalidInput("n must be >= 1".into()));
    }
    if !(0.0 < a && a < 1.0) {
        return Err(CoreError::InvalidInput(format!(
            "coding level must be in (0,1), got {a}"
        )));
    }
    let k = (a * n as f64).round() as usize;
    if k == 0 {
        return Err(CoreError::InvalidInput(format!(
            "degenerate coding level: round({a} * {n}) == 0"
        )));
    }
    let mut p = Pattern::inactive(n, coding);
    for i in rng.choose_indices(n, k) {
        p.bits[i] = 1;
    }
    Ok(p)
}

/// Homogeneous collection of patterns (same dimension and coding).
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
    n: usize,
    coding: Coding,
}

impl PatternSet {
    pub fn new(n: usize, coding: Coding) -> Self {
        Self {
            patterns: Vec::new(),
            n,
            coding,
        }
    }

    pub fn from_patterns(patterns: Vec<Pattern>) -> Result<Self> {
        let first = patterns
            .first()
            .ok_or_else(|| CoreError::InvalidInput("empty pattern set".into()))?;
        let (n, coding) = (first.n(), first.coding());
        let mut set = Self::new(n, coding);
        for p in patterns {
            set.push(p)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, p: Pattern) -> Result<()> {
        if p.n() != self.n {
            return Err(CoreError::DimensionMismatch(format!(
                "{} vs {}",
                p.n(),
                self.n
            )));
        }
        if p.coding() != self.coding {
            return Err(CoreError::ModeMismatch(format!(
                "{:?} vs {:?}",
                p.coding(),
                self.coding
            )));
        }
        self.patterns.push(p);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coding(&self) -> Coding {
        self.coding
    }

    pub fn get(&self, i: usize) -> &Pattern {
        &self.patterns[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> Pattern {
        Pattern::new(
            s.bytes().map(|b| (b - b'0') as i8).collect(),
            Coding::Binary,
        )
        .unwrap()
    }

    #[test]
    fn hamming_identity_and_complement() {
        let a = bin("101101");
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &bin("010010")).unwrap(), 6);
        assert_eq!(hamming_distance(&a, &bin("101011")).unwrap(), 2);
    }

    #[test]
    fn hamming_dimension_mismatch() {
        let a = bin("1010");
        let b = bin("10100");
        assert!(matches!(
            hamming_distance(&a, &b),
            Err(CoreError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn overlap_extremes_and_hand_case() {
        let mut s = SeedStream::new(3);
        let a = random_sparse_pattern(&mut s, 64, 0.5, Coding::Bipolar).unwrap();
        assert_eq!(overlap(&a, &a).unwrap(), 1.0);
        assert_eq!(overlap(&a, &a.complement()).unwrap(), -1.0);

        let x = Pattern::new(vec![1, 1, -1, -1], Coding::Bipolar).unwrap();
        let y = Pattern::new(vec![1, -1, -1, -1], Coding::Bipolar).unwrap();
        assert_eq!(overlap(&x, &y).unwrap(), 0.5);
    }

    #[test]
    fn overlap_rejects_binary() {
        let a = bin("1010");
        assert!(matches!(
            overlap(&a, &a),
            Err(CoreError::ModeMismatch(_))
        ));
    }

    #[test]
    fn sparse_pattern_cardinality() {
        let mut s = SeedStream::new(5);
        let p = random_sparse_pattern(&mut s, 100, 0.05, Coding::Binary).unwrap();
        assert_eq!(p.active_count(), 5);
        let q = random_sparse_pattern(&mut s, 10, 0.5, Coding::Bipolar).unwrap();
        assert_eq!(q.active_count(), 5);
    }

    #[test]
    fn sparse_pattern_deterministic() {
        let a = random_sparse_pattern(&mut SeedStream::new(9), 200, 0.1, Coding::Binary).unwrap();
        let b = random_sparse_pattern(&mut SeedStream::new(9), 200, 0.1, Coding::Binary).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sparse_pattern_degenerate_level() {
        let mut s = SeedStream::new(1);
        assert!(random_sparse_pattern(&mut s, 10, 0.01, Coding::Binary).is_err());
    }

    #[test]
    fn per_bit_activation_frequency() {
        // Empirical per-bit frequency over 10^4 draws within 3-sigma of a.
        let mut s = SeedStream::new(11);
        let (n, a, draws) = (50, 0.2, 10_000usize);
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            let p = random_sparse_pattern(&mut s, n, a, Coding::Binary).unwrap();
            for i in 0..n {
                counts[i] += p.is_active(i) as usize;
            }
        }
        let sigma = (a * (1.0 - a) / draws as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - a).abs() < 3.5 * sigma,
                "freq {freq} too far from {a}"
            );
        }
    }
}
