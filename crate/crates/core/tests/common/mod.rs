//! Independent brute-force and automaton oracles shared by the suites.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use num::{BigRational, One, Zero};

/// Base-`b` expansions `Σ d_i b^{L-i}` with digits in `digits ⊂ [0, 2b)`,
/// counted through a carry automaton.
///
/// The state of an integer `w` is the membership of `w-2, w-1, w` in the
/// level-`L` value set `S_L`. Every value of `S_{L+1}` is `b·w + d` for some
/// `w ∈ S_L`, so `v = b·w + r` is a value iff `r` is a carry-free digit and
/// `w ∈ S_L`, or `r + b` is a digit and `w - 1 ∈ S_L`. The states of the
/// children `b·w .. b·w + b - 1` therefore depend only on the state of `w`.
pub struct CarryAutomaton {
    base: usize,
    no_carry: Vec<bool>,
    carry: Vec<bool>,
    /// `next[s][s']`: children of a state-`s` integer that land in `s'`.
    next: [[u64; 8]; 8],
}

impl CarryAutomaton {
    pub fn new(base: usize, digits: &[usize]) -> CarryAutomaton {
        assert!(base >= 3 && digits.iter().all(|&d| d < 2 * base));
        let mut no_carry = vec![false; base];
        let mut carry = vec![false; base];
        for &d in digits {
            if d < base {
                no_carry[d] = true;
            } else {
                carry[d - base] = true;
            }
        }
        let mut aut = CarryAutomaton {
            base,
            no_carry,
            carry,
            next: [[0; 8]; 8],
        };
        for s in 1..8 {
            for r in 0..base {
                let child = aut.child_state(s, r);
                aut.next[s][child] += 1;
            }
        }
        aut
    }

    // Bit 2 is `w`, bit 1 is `w-1`, bit 0 is `w-2`.
    fn bit(state: usize, offset: i64) -> bool {
        match offset {
            0 => state & 4 != 0,
            -1 => state & 2 != 0,
            -2 => state & 1 != 0,
            _ => unreachable!("offset {offset}"),
        }
    }

    fn member(&self, state: usize, t: i64) -> bool {
        let b = self.base as i64;
        let q = t.div_euclid(b);
        let r = t.rem_euclid(b) as usize;
        (self.no_carry[r] && Self::bit(state, q)) || (self.carry[r] && Self::bit(state, q - 1))
    }

    fn child_state(&self, state: usize, r: usize) -> usize {
        let r = r as i64;
        (self.member(state, r - 2) as usize)
            | (self.member(state, r - 1) as usize) << 1
            | (self.member(state, r) as usize) << 2
    }

    /// State counts at level `levels`, starting from `S_0 = {0}`.
    fn states(&self, levels: u32) -> [u128; 8] {
        // `w = 0, 1, 2` see 0 at offsets 0, -1, -2.
        let mut v = [0u128; 8];
        v[4] = 1;
        v[2] = 1;
        v[1] = 1;
        for _ in 0..levels {
            let mut w = [0u128; 8];
            for s in 1..8 {
                for t in 1..8 {
                    w[t] += v[s] * self.next[s][t] as u128;
                }
            }
            v = w;
        }
        v
    }

    /// `|S_L|`.
    pub fn values(&self, levels: u32) -> u128 {
        let v = self.states(levels);
        (1..8).filter(|s| s & 4 != 0).map(|s| v[s]).sum()
    }

    /// `|S_L ∪ (S_L + 1)|`: grid cells met by `∪ [v, v + 2]`.
    pub fn cells(&self, levels: u32) -> u128 {
        let v = self.states(levels);
        (1..8).filter(|s| s & 6 != 0).map(|s| v[s]).sum()
    }
}

/// `|S_L|` by building the value set.
pub fn distinct_values(base: u64, digits: &[u64], levels: u32) -> usize {
    let mut set: HashSet<u64> = HashSet::from([0]);
    for _ in 0..levels {
        set = set
            .iter()
            .flat_map(|&w| digits.iter().map(move |&d| base * w + d))
            .collect();
    }
    set.len()
}

/// Probability of landing on `target` by summing over every ordered
/// sequence of steps.
pub fn walk_enumeration(target: u64, steps: &[u64], probs: &[BigRational]) -> BigRational {
    if target == 0 {
        return BigRational::one();
    }
    let mut total = BigRational::zero();
    for (&s, p) in steps.iter().zip(probs) {
        if s <= target {
            total += p * walk_enumeration(target - s, steps, probs);
        }
    }
    total
}

/// Size of a largest subfamily with pairwise gaps `> rho`, over all subsets.
pub fn brute_max_separated(ivals: &[(f64, f64)], rho: f64) -> usize {
    let n = ivals.len();
    assert!(n <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let mut sel: Vec<(f64, f64)> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ivals[i])
            .collect();
        sel.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Gaps between neighbours in left-endpoint order do not suffice when
        // one interval contains another, so check every pair.
        let ok = (0..sel.len()).all(|i| {
            (i + 1..sel.len()).all(|j| {
                let (a, b) = (sel[i], sel[j]);
                b.0 - a.1 > rho || a.0 - b.1 > rho
            })
        });
        if ok {
            best = k;
        }
    }
    best
}

/// For every letter-count vector over `d` letters summing to `n`, the
/// number of words with those counts, found by walking all `d^n` words.
pub fn path_counts(d: usize, n: u32) -> HashMap<Vec<u64>, u64> {
    let mut out = HashMap::new();
    let mut word = vec![0usize; n as usize];
    loop {
        let mut tally = vec![0u64; d];
        for &c in &word {
            tally[c] += 1;
        }
        *out.entry(tally).or_insert(0) += 1;
        // Odometer increment.
        let mut i = 0;
        while i < word.len() && word[i] == d - 1 {
            word[i] = 0;
            i += 1;
        }
        if i == word.len() {
            return out;
        }
        word[i] += 1;
    }
}

/// Distinct words produced by an iterator, checking none repeats.
pub fn distinct<T: Ord>(items: impl Iterator<Item = T>) -> Option<usize> {
    let mut seen = BTreeSet::new();
    for x in items {
        if !seen.insert(x) {
            return None;
        }
    }
    Some(seen.len())
}
