//! CNF data model: literals, clauses, formulas and bit-packed assignments.
//!
//! Clauses follow the with-replacement model: a clause is an ordered sequence
//! of exactly `k` literals and may repeat a literal or contain both polarities
//! of a variable. Nothing here simplifies clauses.

use std::fmt;
use std::ops::{Deref, Not};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A literal packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    #[inline]
    pub fn new(var: usize, negated: bool) -> Self {
        debug_assert!(var < (u32::MAX >> 1) as usize);
        Literal(((var as u32) << 1) | negated as u32)
    }

    #[inline]
    pub fn positive(var: usize) -> Self {
        Self::new(var, false)
    }

    #[inline]
    pub fn negative(var: usize) -> Self {
        Self::new(var, true)
    }

    /// Builds a literal from its packed code. Codes `0..2n` enumerate the `2n`
    /// literals over `n` variables.
    #[inline]
    pub fn from_code(code: u32) -> Self {
        Literal(code)
    }

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Converts a 1-indexed signed DIMACS literal. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = value.unsigned_abs() as usize - 1;
        Some(Self::new(var, value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Truth value under `a`. The caller guarantees `var < a.len()`.
    #[inline]
    pub fn is_true_under(self, a: &Assignment) -> bool {
        a.get(self.var()) != self.is_negated()
    }
}

impl Not for Literal {
    type Output = Literal;

    #[inline]
    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negated() {
            write!(f, "¬x{}", self.var())
        } else {
            write!(f, "x{}", self.var())
        }
    }
}

/// Owned clause. Duplicates and complementary pairs are kept as drawn.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn into_literals(self) -> Vec<Literal> {
        self.0
    }
}

impl Deref for Clause {
    type Target = [Literal];

    fn deref(&self) -> &[Literal] {
        &self.0
    }
}

impl From<Vec<Literal>> for Clause {
    fn from(v: Vec<Literal>) -> Self {
        Clause(v)
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Clause(iter.into_iter().collect())
    }
}

#[inline]
fn clause_satisfied(clause: &[Literal], a: &Assignment) -> bool {
    clause.iter().any(|&l| l.is_true_under(a))
}

/// Number of literals of `clause` that are true under `a`.
#[inline]
pub fn satisfied_literal_count(clause: &[Literal], a: &Assignment) -> usize {
    clause.iter().filter(|&&l| l.is_true_under(a)).count()
}

/// True iff at least one literal of `clause` is true under `a`.
pub fn eval_clause(clause: &[Literal], a: &Assignment) -> Result<bool> {
    if let Some(l) = clause.iter().find(|l| l.var() >= a.len()) {
        return Err(Error::VarOutOfRange {
            var: l.var(),
            n: a.len(),
        });
    }
    Ok(clause_satisfied(clause, a))
}

/// A k-CNF formula over `n` variables, stored as one flat literal buffer.
///
/// Formulas built through [`Formula::push`] or [`Formula::from_clauses`] have
/// every clause of width exactly `k`. [`Formula::from_clauses_tolerant`]
/// admits mixed widths for third-party inputs; `k` is then the widest clause.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Formula {
    n: usize,
    k: usize,
    literals: Vec<Literal>,
    starts: Vec<u32>,
}

impl Formula {
    pub fn new(n: usize, k: usize) -> Self {
        Formula {
            n,
            k,
            literals: Vec::new(),
            starts: vec![0],
        }
    }

    pub fn with_capacity(n: usize, k: usize, m: usize) -> Self {
        let mut starts = Vec::with_capacity(m + 1);
        starts.push(0);
        Formula {
            n,
            k,
            literals: Vec::with_capacity(m * k),
            starts,
        }
    }

    /// Builds a formula, rejecting clauses whose width differs from `k`.
    pub fn from_clauses<I, C>(n: usize, k: usize, clauses: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[Literal]>,
    {
        let mut f = Formula::new(n, k);
        for c in clauses {
            f.push(c.as_ref())?;
        }
        Ok(f)
    }

    /// Builds a formula that accepts mixed clause widths. `k` becomes the
    /// maximum width seen (0 for an empty formula).
    pub fn from_clauses_tolerant<I, C>(n: usize, clauses: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[Literal]>,
    {
        let mut f = Formula::new(n, 0);
        for c in clauses {
            let c = c.as_ref();
            f.check_vars(c)?;
            f.k = f.k.max(c.len());
            f.push_raw(c);
        }
        Ok(f)
    }

    fn check_vars(&self, clause: &[Literal]) -> Result<()> {
        match clause.iter().find(|l| l.var() >= self.n) {
            Some(l) => Err(Error::VarOutOfRange {
                var: l.var(),
                n: self.n,
            }),
            None => Ok(()),
        }
    }

    fn push_raw(&mut self, clause: &[Literal]) {
        self.literals.extend_from_slice(clause);
        self.starts.push(self.literals.len() as u32);
    }

    /// Appends a clause after checking its width and variable range.
    pub fn push(&mut self, clause: &[Literal]) -> Result<()> {
        if clause.len() != self.k {
            return Err(Error::WidthMismatch {
                clause: self.num_clauses(),
                expected: self.k,
                found: clause.len(),
            });
        }
        self.check_vars(clause)?;
        self.push_raw(clause);
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Clause count `m`.
    #[inline]
    pub fn num_clauses(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.num_clauses() == 0
    }

    /// True when every clause has width `k`.
    pub fn is_uniform_width(&self) -> bool {
        self.clauses().all(|c| c.len() == self.k)
    }

    #[inline]
    pub fn clause(&self, i: usize) -> &[Literal] {
        &self.literals[self.starts[i] as usize..self.starts[i + 1] as usize]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Literal]> + '_ {
        self.starts
            .windows(2)
            .map(move |w| &self.literals[w[0] as usize..w[1] as usize])
    }

    /// Counts satisfied clauses. `a.len()` must equal `n`; see
    /// [`num_clauses_sat`] for the checked form.
    #[inline]
    pub fn count_satisfied(&self, a: &Assignment) -> usize {
        debug_assert_eq!(a.len(), self.n);
        self.clauses().filter(|c| clause_satisfied(c, a)).count()
    }

    /// Index of the lowest-numbered clause falsified by `a`.
    #[inline]
    pub fn first_unsatisfied(&self, a: &Assignment) -> Option<usize> {
        debug_assert_eq!(a.len(), self.n);
        self.clauses().position(|c| !clause_satisfied(c, a))
    }

    #[inline]
    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.first_unsatisfied(a).is_none()
    }

    fn check_len(&self, a: &Assignment) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: a.len(),
            });
        }
        Ok(())
    }
}

/// Number of clauses of `f` satisfied by `a`.
pub fn num_clauses_sat(f: &Formula, a: &Assignment) -> Result<usize> {
    f.check_len(a)?;
    Ok(f.count_satisfied(a))
}

/// Number of clauses of `f` left unsatisfied by `a`.
pub fn num_clauses_unsat(f: &Formula, a: &Assignment) -> Result<usize> {
    f.check_len(a)?;
    Ok(f.num_clauses() - f.count_satisfied(a))
}

/// A length-`n` truth assignment, bit `i` holding variable `i`. Bits past `n`
/// in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

impl Assignment {
    /// The all-false assignment.
    pub fn new(n: usize) -> Self {
        Assignment {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn all_true(n: usize) -> Self {
        let mut a = Assignment {
            n,
            words: vec![u64::MAX; word_count(n)],
        };
        a.clear_padding();
        a
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut a = Assignment::new(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            a.set(i, b);
        }
        a
    }

    /// Builds the assignment whose bit `i` is bit `i` of `index`. Requires
    /// `n <= 64`.
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!(n <= 64, "index form requires n <= 64");
        let mut a = Assignment::new(n);
        a.set_index(index);
        a
    }

    /// Overwrites a `n <= 64` assignment with the bits of `index`.
    #[inline]
    pub fn set_index(&mut self, index: u64) {
        debug_assert!(self.n <= 64);
        if self.n == 0 {
            return;
        }
        self.words[0] = index;
        self.clear_padding();
    }

    /// The integer encoding for `n <= 64`, `None` otherwise.
    pub fn to_index(&self) -> Option<u64> {
        match self.n {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }

    pub(crate) fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        words.resize(word_count(n), 0);
        let mut a = Assignment { n, words };
        a.clear_padding();
        a
    }

    #[inline]
    fn clear_padding(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.n, "bit {i} out of range for length {}", self.n);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.n, "bit {i} out of range for length {}", self.n);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn complement(&self) -> Self {
        let mut c = Assignment {
            n: self.n,
            words: self.words.iter().map(|w| !w).collect(),
        };
        c.clear_padding();
        c
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(|i| self.get(i))
    }

    /// `'0'`/`'1'` string, character `i` holding variable `i`.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut a = Assignment::new(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => a.set(i, true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "assignment string has non-bit character {other:?}"
                    )))
                }
            }
        }
        Ok(a)
    }

    /// Distance without a length check. Panics on mismatched word counts.
    #[inline]
    pub(crate) fn distance_to(&self, other: &Assignment) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({})", self.to_bit_string())
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Assignment::from_bit_string(&s).map_err(serde::de::Error::custom)
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &Assignment, b: &Assignment) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.distance_to(b))
}
