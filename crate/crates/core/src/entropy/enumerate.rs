//! Canonical enumeration of the assignments a resample can produce.
//!
//! Neighbors are taken in ascending vertex order. Neighbor `i` contributes the
//! symbols "its available colors, ascending" followed by ⊥, so its radix is
//! `a(z_i) + 1`. Assignments are ordered lexicographically with the first
//! neighbor most significant, which makes the index of an assignment its
//! mixed-radix value.

use crate::error::{Error, Result};
use crate::palette::{Color, Thresholds};

/// Enumeration cap used unless configured otherwise.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    q: u32,
    avail: Vec<Vec<Color>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadSet {
    pub all_count: u64,
    /// Indices of the bad assignments, ascending.
    pub bad: Vec<u64>,
}

impl BadSet {
    /// Position of `index` within the bad list.
    pub fn position(&self, index: u64) -> Option<u64> {
        self.bad.binary_search(&index).ok().map(|p| p as u64)
    }
}

impl Enumeration {
    pub fn new(q: u32, avail: Vec<Vec<Color>>) -> Self {
        debug_assert!(avail.iter().all(|a| a.windows(2).all(|w| w[0] < w[1])));
        Enumeration { q, avail }
    }

    pub fn width(&self) -> usize {
        self.avail.len()
    }

    pub fn radices(&self) -> impl Iterator<Item = u64> + '_ {
        self.avail.iter().map(|a| a.len() as u64 + 1)
    }

    /// `|All| = prod (a(z) + 1)`, saturating.
    pub fn all_count(&self) -> u128 {
        self.radices()
            .fold(1u128, |acc, r| acc.saturating_mul(u128::from(r)))
    }

    fn symbol(&self, i: usize, c: Option<Color>) -> Option<u64> {
        match c {
            None => Some(self.avail[i].len() as u64),
            Some(c) => self.avail[i].binary_search(&c).ok().map(|p| p as u64),
        }
    }

    fn decode_symbol(&self, i: usize, s: u64) -> Option<Color> {
        self.avail[i].get(s as usize).copied()
    }

    /// Index of `assignment`, or `None` when some entry is not a legal symbol.
    pub fn index_of(&self, assignment: &[Option<Color>]) -> Option<u64> {
        if assignment.len() != self.width() {
            return None;
        }
        let mut index: u64 = 0;
        for (i, &c) in assignment.iter().enumerate() {
            let radix = self.avail[i].len() as u64 + 1;
            index = index.checked_mul(radix)?.checked_add(self.symbol(i, c)?)?;
        }
        Some(index)
    }

    pub fn assignment_at(&self, index: u64) -> Vec<Option<Color>> {
        let mut out = vec![None; self.width()];
        let mut rest = index;
        for i in (0..self.width()).rev() {
            let radix = self.avail[i].len() as u64 + 1;
            out[i] = self.decode_symbol(i, rest % radix);
            rest /= radix;
        }
        debug_assert_eq!(rest, 0, "index beyond |All|");
        out
    }

    /// Whether the center vertex would violate a threshold if its neighborhood
    /// took `assignment`: `a = q - #distinct colors`, `f = #⊥`.
    pub fn is_bad(&self, assignment: &[Option<Color>], t: &Thresholds) -> bool {
        let mut seen = vec![false; self.q as usize];
        let mut distinct = 0u32;
        let mut free = 0u32;
        for c in assignment {
            match c {
                None => free += 1,
                Some(c) => {
                    if !std::mem::replace(&mut seen[*c as usize], true) {
                        distinct += 1;
                    }
                }
            }
        }
        self.q - distinct < t.thr_a || free > t.thr_f
    }

    /// Walks `All` in canonical order and keeps the bad indices.
    pub fn enumerate_bad(&self, t: &Thresholds, cap: u64) -> Result<BadSet> {
        let size = self.all_count();
        if size > u128::from(cap) {
            return Err(Error::ToyScaleExceeded { size, cap });
        }
        let size = size as u64;
        let width = self.width();
        let mut digits = vec![0u64; width];
        let mut current: Vec<Option<Color>> =
            (0..width).map(|i| self.decode_symbol(i, 0)).collect();
        let mut bad = Vec::new();
        for index in 0..size {
            if self.is_bad(&current, t) {
                bad.push(index);
            }
            // Odometer step, least significant digit last.
            for i in (0..width).rev() {
                digits[i] += 1;
                if digits[i] <= self.avail[i].len() as u64 {
                    current[i] = self.decode_symbol(i, digits[i]);
                    break;
                }
                digits[i] = 0;
                current[i] = self.decode_symbol(i, 0);
            }
        }
        Ok(BadSet {
            all_count: size,
            bad,
        })
    }
}
