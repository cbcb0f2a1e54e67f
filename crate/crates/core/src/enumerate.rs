//! Exhaustive k-subset search shared by the exact solvers.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Result, TipsError};

/// Default ceiling on enumerated subsets.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Copy, Clone, Debug)]
pub(crate) enum Score {
    Total,
    /// 1-based rank of the reported inconvenience.
    Rank(usize),
}

impl Score {
    fn eval(self, values: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self {
            Score::Total => values.iter().sum(),
            Score::Rank(r) => {
                scratch.clear();
                scratch.extend_from_slice(values);
                let (_, nth, _) = scratch.select_nth_unstable_by(r - 1, f64::total_cmp);
                *nth
            }
        }
    }
}

pub(crate) struct Best {
    pub score: f64,
    pub members: Vec<usize>,
    pub visited: u64,
}

fn better(a: &Best, b: &Best) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then_with(|| a.members.cmp(&b.members))
}

/// Finds the `k`-subset of `columns` minimizing `score` applied to the
/// elementwise minimum of `base` and the chosen columns. Ties go to the
/// lexicographically smallest index set.
pub(crate) fn best_subset(
    base: &[f64],
    columns: &[Vec<f64>],
    k: usize,
    score: Score,
    budget: u128,
) -> Result<Best> {
    let n = columns.len();
    if k > n {
        return Err(TipsError::TooFewSites { k, available: n });
    }
    let subsets = binomial(n, k);
    if subsets > budget {
        return Err(TipsError::TooLarge { subsets, budget });
    }
    if k == 0 {
        let mut scratch = Vec::new();
        return Ok(Best {
            score: score.eval(base, &mut scratch),
            members: Vec::new(),
            visited: 1,
        });
    }
    let best = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut search = Search {
                columns,
                k,
                score,
                levels: vec![base.to_vec(); k + 1],
                stack: Vec::with_capacity(k),
                scratch: Vec::with_capacity(base.len()),
                best: None,
                visited: 0,
            };
            search.descend(0, first);
            let (s, members) = search.best.expect("at least one subset per branch");
            Best {
                score: s,
                members,
                visited: search.visited,
            }
        })
        .reduce_with(|a, b| {
            let visited = a.visited + b.visited;
            let mut winner = if better(&a, &b) != Ordering::Greater {
                a
            } else {
                b
            };
            winner.visited = visited;
            winner
        })
        .expect("n >= k > 0 gives at least one branch");
    Ok(best)
}

struct Search<'a> {
    columns: &'a [Vec<f64>],
    k: usize,
    score: Score,
    levels: Vec<Vec<f64>>,
    stack: Vec<usize>,
    scratch: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
    visited: u64,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, index: usize) {
        let (done, rest) = self.levels.split_at_mut(depth + 1);
        let parent = &done[depth];
        let child = &mut rest[0];
        for ((c, &p), &d) in child.iter_mut().zip(parent).zip(&self.columns[index]) {
            *c = if d < p { d } else { p };
        }
        self.stack.push(index);
        if depth + 1 == self.k {
            self.visited += 1;
            let s = self.score.eval(&self.levels[depth + 1], &mut self.scratch);
            // lexicographic visiting order: keep the first of equal scores
            if self.best.as_ref().is_none_or(|(b, _)| s < *b) {
                self.best = Some((s, self.stack.clone()));
            }
        } else {
            let n = self.columns.len();
            let remaining = self.k - depth - 1;
            for next in index + 1..=n - remaining {
                self.descend(depth + 1, next);
            }
        }
        self.stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(30, 5), 142_506);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(400, 200), u128::MAX);
    }

    fn brute(base: &[f64], cols: &[Vec<f64>], k: usize, score: Score) -> (f64, Vec<usize>) {
        let n = cols.len();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut v = base.to_vec();
            for &i in &members {
                for (x, y) in v.iter_mut().zip(&cols[i]) {
                    *x = x.min(*y);
                }
            }
            let s = score.eval(&v, &mut Vec::new());
            let replace = match &best {
                None => true,
                Some((b, m)) => s < *b || (s == *b && members < *m),
            };
            if replace {
                best = Some((s, members));
            }
        }
        best.unwrap()
    }

    #[test]
    fn matches_bitmask_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(1..8);
            let m = rng.gen_range(1..7);
            let k = rng.gen_range(0..=n);
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0..6) as f64).collect())
                .collect();
            let base: Vec<f64> = (0..m).map(|_| rng.gen_range(3..9) as f64).collect();
            for score in [Score::Total, Score::Rank(m), Score::Rank(m.div_ceil(2))] {
                let got = best_subset(&base, &cols, k, score, u128::MAX).unwrap();
                let (s, members) = brute(&base, &cols, k, score);
                assert_eq!(got.score, s);
                assert_eq!(got.members, members);
                assert_eq!(got.visited as u128, binomial(n, k).max(1));
            }
        }
    }

    #[test]
    fn budget_enforced() {
        let cols = vec![vec![0.0]; 10];
        let err = best_subset(&[1.0], &cols, 5, Score::Total, 100)
            .err()
            .unwrap();
        assert!(matches!(
            err,
            TipsError::TooLarge {
                subsets: 252,
                budget: 100
            }
        ));
    }
}
