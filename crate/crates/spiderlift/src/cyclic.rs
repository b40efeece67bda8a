//! Exact order on the rotations of periodic digit blocks.
//!
//! A point with purely periodic base-`d` expansion `.(b₀ b₁ … b_{k−1})^∞` is
//! the rotation `(w, i)` of block `w` starting at digit `i`. Windows of the
//! infinite sequences are ranked by prefix doubling, so comparing two points,
//! or two windows of equal length, costs O(1) after an `O(k log² k)` setup.
//! This avoids arithmetic on numerators over `d^k − 1` for long periods.

use std::cmp::Ordering;

pub(crate) type Rot = (usize, usize);

pub(crate) struct Rotations {
    pub d: u32,
    pub k: usize,
    blocks: Vec<Vec<u32>>,
    /// `levels[h][w·k + i]`: rank of the cyclic window of length `2^h` at `(w, i)`.
    levels: Vec<Vec<u32>>,
    /// Dense rank of each full rotation; equal ranks are equal points.
    full: Vec<u32>,
    /// Length of the run of digit 0 (resp. `d − 1`) starting at each
    /// position, capped at `k`.
    zero_run: Vec<usize>,
    top_run: Vec<usize>,
}

fn runs(blocks: &[Vec<u32>], digit: u32) -> Vec<usize> {
    let k = blocks[0].len();
    let mut out = Vec::with_capacity(blocks.len() * k);
    for b in blocks {
        let mut run = vec![0; k];
        let mut len = 0;
        for n in (0..2 * k).rev() {
            len = if b[n % k] == digit {
                (len + 1).min(k)
            } else {
                0
            };
            if n < k {
                run[n] = len;
            }
        }
        out.extend(run);
    }
    out
}

fn dense_ranks<K: Ord + Copy>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&x| keys[x]);
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for (n, &x) in order.iter().enumerate() {
        if n > 0 && keys[x] != keys[order[n - 1]] {
            r += 1;
        }
        ranks[x] = r;
    }
    ranks
}

impl Rotations {
    /// All blocks must be nonempty and of equal length.
    pub fn new(d: u32, blocks: Vec<Vec<u32>>) -> Rotations {
        let k = blocks[0].len();
        assert!(
            k > 0 && blocks.iter().all(|b| b.len() == k),
            "blocks must share a nonzero length"
        );
        let mut levels = vec![blocks.iter().flatten().copied().collect::<Vec<u32>>()];
        let mut width = 1;
        while width * 2 <= k {
            let prev = levels.last().expect("level 0 exists");
            let keys: Vec<(u32, u32)> = (0..prev.len())
                .map(|x| (prev[x], prev[x - x % k + (x % k + width) % k]))
                .collect();
            levels.push(dense_ranks(&keys));
            width *= 2;
        }
        let zero_run = runs(&blocks, 0);
        let top_run = runs(&blocks, d - 1);
        let mut rot = Rotations {
            d,
            k,
            blocks,
            levels,
            full: Vec::new(),
            zero_run,
            top_run,
        };
        let keys: Vec<(u32, u32)> = (0..rot.blocks.len() * k)
            .map(|x| rot.window_key((x / k, x % k), k))
            .collect();
        rot.full = dense_ranks(&keys);
        rot
    }

    pub fn count(&self) -> usize {
        self.blocks.len() * self.k
    }

    fn window_key(&self, (w, i): Rot, len: usize) -> (u32, u32) {
        let h = usize::BITS - 1 - len.leading_zeros();
        let level = &self.levels[h as usize];
        let base = w * self.k;
        (
            level[base + i % self.k],
            level[base + (i + len - (1 << h)) % self.k],
        )
    }

    /// Compares the windows of length `len` starting at `a` and `b`.
    pub fn cmp_window(&self, a: Rot, b: Rot, len: usize) -> Ordering {
        if len == 0 {
            return Ordering::Equal;
        }
        self.window_key(a, len).cmp(&self.window_key(b, len))
    }

    pub fn rank(&self, (w, i): Rot) -> u32 {
        self.full[w * self.k + i % self.k]
    }

    pub fn digit(&self, (w, i): Rot, n: usize) -> u32 {
        self.blocks[w][(i + n) % self.k]
    }

    pub fn shift(&self, (w, i): Rot, n: usize) -> Rot {
        (w, (i + n) % self.k)
    }

    /// Whether every block has exact period `k`.
    pub fn primitive(&self) -> bool {
        (0..self.blocks.len()).all(|w| {
            let mut r: Vec<u32> = (0..self.k).map(|i| self.rank((w, i))).collect();
            r.sort_unstable();
            r.windows(2).all(|p| p[0] != p[1])
        })
    }

    /// Digit `n` (0 = most significant) of the `k`-digit block of
    /// `(X − Y) mod (d^k − 1)`, where `X`, `Y` are the blocks of distinct
    /// points `x`, `y`.
    pub fn diff_digit(&self, x: Rot, y: Rot, n: usize) -> u32 {
        let wrap = self.rank(x) < self.rank(y);
        let tail = self.k - 1 - n;
        let lower = self.cmp_window(self.shift(x, n + 1), self.shift(y, n + 1), tail);
        let borrow = if wrap {
            lower != Ordering::Greater
        } else {
            lower == Ordering::Less
        };
        let d = self.d as i64;
        (self.digit(x, n) as i64 - self.digit(y, n) as i64 - borrow as i64).rem_euclid(d) as u32
    }

    fn zero_run(&self, (w, i): Rot) -> usize {
        self.zero_run[w * self.k + i % self.k]
    }

    fn top_run(&self, (w, i): Rot) -> usize {
        self.top_run[w * self.k + i % self.k]
    }

    /// Length of the longest common prefix of two rotations, at most `k`.
    fn lcp(&self, x: Rot, y: Rot) -> usize {
        let (mut lo, mut hi) = (0, self.k);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.cmp_window(x, y, mid).is_eq() {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Whether the top `p` digits of `(X − Y) mod (d^k − 1)` vanish, i.e.
    /// the difference is below `d^{k−p}`.
    fn small_diff(&self, x: Rot, y: Rot, p: usize, lcp: usize) -> bool {
        if p == 0 {
            return true;
        }
        let tail = self.k - p;
        let tails = self.cmp_window(self.shift(x, p), self.shift(y, p), tail);
        if self.rank(x) > self.rank(y) {
            // Top parts equal, or consecutive with a smaller tail in x.
            lcp >= p
                || (lcp < p
                    && self.digit(x, lcp) == self.digit(y, lcp) + 1
                    && self.zero_run(self.shift(x, lcp + 1)) >= p - lcp - 1
                    && self.top_run(self.shift(y, lcp + 1)) >= p - lcp - 1
                    && tails.is_lt())
        } else {
            // X − Y + d^k − 1 is small only for X = 0…0a, Y = (d−1)…(d−1)b, a ≤ b.
            self.zero_run(x) >= p && self.top_run(y) >= p && !tails.is_gt()
        }
    }

    /// Number of leading zero digits of `(X − Y) mod (d^k − 1)`.
    fn leading_zeros(&self, x: Rot, y: Rot) -> usize {
        let lcp = self.lcp(x, y);
        let (mut lo, mut hi) = (0, self.k - 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.small_diff(x, y, mid, lcp) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// The forward arc from `y` to `x`, of length `(X − Y) mod (d^k − 1)`.
    fn arc(&self, x: Rot, y: Rot) -> ArcLength<'_> {
        ArcLength {
            rot: self,
            x,
            y,
            zeros: self.leading_zeros(x, y),
        }
    }

    /// Circular distance between distinct points: the shorter of the two arcs.
    pub fn distance(&self, x: Rot, y: Rot) -> ArcLength<'_> {
        let (a, b) = (self.arc(x, y), self.arc(y, x));
        if a.cmp(&b).is_le() {
            a
        } else {
            b
        }
    }
}

/// An arc length as a lazy digit sequence with a known count of leading zeros.
pub(crate) struct ArcLength<'a> {
    rot: &'a Rotations,
    x: Rot,
    y: Rot,
    zeros: usize,
}

impl ArcLength<'_> {
    pub fn cmp(&self, other: &ArcLength<'_>) -> Ordering {
        other.zeros.cmp(&self.zeros).then_with(|| {
            (self.zeros..self.rot.k)
                .map(|n| {
                    self.rot
                        .diff_digit(self.x, self.y, n)
                        .cmp(&other.rot.diff_digit(other.x, other.y, n))
                })
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;

    fn value(d: u32, block: &[u32]) -> BigInt {
        block.iter().fold(BigInt::from(0), |acc, &x| acc * d + x)
    }

    fn rotated(block: &[u32], i: usize) -> Vec<u32> {
        block[i..].iter().chain(&block[..i]).copied().collect()
    }

    #[test]
    fn order_and_differences_match_integer_arithmetic() {
        let d = 3;
        let blocks = vec![vec![0, 2, 1, 1, 0, 2, 2], vec![1, 0, 2, 2, 0, 1, 0]];
        let rot = Rotations::new(d, blocks.clone());
        let k = 7;
        let m = BigInt::from(d).pow(k as u32) - 1;
        let pts: Vec<Rot> = (0..2).flat_map(|w| (0..k).map(move |i| (w, i))).collect();
        let val = |p: Rot| value(d, &rotated(&blocks[p.0], p.1));
        for &x in &pts {
            for &y in &pts {
                assert_eq!(rot.rank(x).cmp(&rot.rank(y)), val(x).cmp(&val(y)));
                if val(x) == val(y) {
                    continue;
                }
                let diff = (val(x) - val(y)).mod_floor(&m);
                let digits: Vec<u32> = (0..k).map(|n| rot.diff_digit(x, y, n)).collect();
                assert_eq!(value(d, &digits), diff, "{x:?} {y:?}");
                let zeros = digits.iter().take_while(|&&g| g == 0).count();
                assert_eq!(rot.leading_zeros(x, y), zeros, "{x:?} {y:?}");
            }
        }
        assert!(rot.primitive());
        assert!(!Rotations::new(2, vec![vec![0, 1, 0, 1]]).primitive());
    }
}
