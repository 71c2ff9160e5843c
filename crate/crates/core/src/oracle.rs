//! Exhaustive ground truth over all `2^n` assignments.

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

/// Default largest `n` the exhaustive routines accept.
pub const DEFAULT_BRUTE_FORCE_BOUND: usize = 26;

fn check_bound(n: usize, bound: usize) -> Result<()> {
    // Index encoding needs n <= 63 regardless of the configured bound.
    if n > bound || n > 63 {
        return Err(Error::OverBound { n, bound });
    }
    Ok(())
}

/// Calls `visit` with every assignment in index order, reusing one buffer.
/// Stops early when `visit` returns `false`.
pub(crate) fn for_each_assignment(n: usize, mut visit: impl FnMut(u64, &Assignment) -> bool) {
    let mut a = Assignment::new(n);
    for idx in 0..(1u64 << n) {
        a.set_index(idx);
        if !visit(idx, &a) {
            return;
        }
    }
}

/// First satisfying assignment in index order, or `None`.
pub fn brute_force_solve(f: &Formula) -> Result<Option<Assignment>> {
    brute_force_solve_bounded(f, DEFAULT_BRUTE_FORCE_BOUND)
}

pub fn brute_force_solve_bounded(f: &Formula, bound: usize) -> Result<Option<Assignment>> {
    check_bound(f.n(), bound)?;
    let mut found = None;
    for_each_assignment(f.n(), |_, a| {
        if f.is_satisfied_by(a) {
            found = Some(a.clone());
            false
        } else {
            true
        }
    });
    Ok(found)
}

/// Exact number of satisfying assignments.
pub fn count_satisfying(f: &Formula) -> Result<u64> {
    count_satisfying_bounded(f, DEFAULT_BRUTE_FORCE_BOUND)
}

pub fn count_satisfying_bounded(f: &Formula, bound: usize) -> Result<u64> {
    check_bound(f.n(), bound)?;
    let mut count = 0;
    for_each_assignment(f.n(), |_, a| {
        count += f.is_satisfied_by(a) as u64;
        true
    });
    Ok(count)
}

/// Bitset over assignment indices, bit `i` set iff assignment `i` satisfies
/// `f`.
pub fn satisfying_set(f: &Formula, bound: usize) -> Result<IndexSet> {
    check_bound(f.n(), bound)?;
    let mut set = IndexSet::new(f.n());
    for_each_assignment(f.n(), |idx, a| {
        if f.is_satisfied_by(a) {
            set.insert(idx);
        }
        true
    });
    Ok(set)
}

/// Scans all `2^n` assignments and returns the first one (in index order)
/// that satisfies `f` and lies within `radius` of `center`.
pub fn brute_force_ball_scan(
    f: &Formula,
    center: &Assignment,
    radius: usize,
) -> Result<Option<Assignment>> {
    check_bound(f.n(), DEFAULT_BRUTE_FORCE_BOUND)?;
    if center.len() != f.n() {
        return Err(Error::LengthMismatch {
            expected: f.n(),
            found: center.len(),
        });
    }
    let mut found = None;
    for_each_assignment(f.n(), |_, a| {
        if a.distance_to(center) <= radius && f.is_satisfied_by(a) {
            found = Some(a.clone());
            false
        } else {
            true
        }
    });
    Ok(found)
}

/// Dense bitset over the `2^n` assignment indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
    words: Vec<u64>,
}

impl IndexSet {
    pub fn new(n: usize) -> Self {
        let bits = 1usize << n;
        IndexSet {
            n,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn insert(&mut self, idx: u64) {
        self.words[(idx >> 6) as usize] |= 1 << (idx & 63);
    }

    #[inline]
    pub fn contains(&self, idx: u64) -> bool {
        (self.words[(idx >> 6) as usize] >> (idx & 63)) & 1 == 1
    }

    pub fn len(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(((wi as u64) << 6) | b)
            })
        })
    }

    /// Returns the set of indices within Hamming distance `radius` of some
    /// member, by `radius` rounds of one-bit dilation.
    #[allow(clippy::needless_range_loop)]
    pub fn dilate(&self, radius: usize) -> IndexSet {
        // Masks selecting indices whose bit `b` is clear, for b < 6.
        const LOW: [u64; 6] = [
            0x5555_5555_5555_5555,
            0x3333_3333_3333_3333,
            0x0F0F_0F0F_0F0F_0F0F,
            0x00FF_00FF_00FF_00FF,
            0x0000_FFFF_0000_FFFF,
            0x0000_0000_FFFF_FFFF,
        ];
        let mut cur = self.clone();
        for _ in 0..radius {
            let mut next = cur.clone();
            for bit in 0..self.n {
                if bit < 6 {
                    let s = 1u32 << bit;
                    let mask = LOW[bit];
                    let valid = if self.n < 6 {
                        (1u64 << (1u64 << self.n)) - 1
                    } else {
                        u64::MAX
                    };
                    for (dst, &w) in next.words.iter_mut().zip(&cur.words) {
                        *dst |= (((w & mask) << s) | ((w >> s) & mask)) & valid;
                    }
                } else {
                    let stride = 1usize << (bit - 6);
                    for i in 0..cur.words.len() {
                        next.words[i] |= cur.words[i ^ stride];
                    }
                }
            }
            cur = next;
        }
        cur
    }
}
