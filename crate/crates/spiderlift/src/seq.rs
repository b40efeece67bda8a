//! Helpers for eventually periodic sequences stored as `pre` + repeated `rep`.

/// Reduces `(pre, rep)` to minimal preperiod and minimal period.
pub(crate) fn canonicalize<T: Clone + PartialEq>(mut pre: Vec<T>, rep: Vec<T>) -> (Vec<T>, Vec<T>) {
    assert!(!rep.is_empty(), "repeating block must be nonempty");
    let k = rep.len();
    let p = (1..=k)
        .find(|&p| k.is_multiple_of(p) && (p..k).all(|i| rep[i] == rep[i - p]))
        .unwrap_or(k);
    let mut rep: Vec<T> = rep[..p].to_vec();
    while let Some(last) = pre.last() {
        if *last != rep[p - 1] {
            break;
        }
        pre.pop();
        rep.rotate_right(1);
    }
    (pre, rep)
}

/// Entry `n` (0-based) of the sequence `pre rep rep rep …`.
pub(crate) fn at<'a, T>(pre: &'a [T], rep: &'a [T], n: usize) -> &'a T {
    if n < pre.len() {
        &pre[n]
    } else {
        &rep[(n - pre.len()) % rep.len()]
    }
}

/// Number of leading entries after which two eventually periodic sequences
/// are equal iff they agree on that prefix.
pub(crate) fn comparison_horizon(l1: usize, k1: usize, l2: usize, k2: usize) -> usize {
    l1.max(l2) + num_integer::lcm(k1, k2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinks_period_and_preperiod() {
        assert_eq!(
            canonicalize(vec![1, 0, 1], vec![0, 1, 0, 1]),
            (vec![], vec![1, 0])
        );
        assert_eq!(canonicalize(vec![0, 0], vec![0]), (vec![], vec![0]));
        assert_eq!(canonicalize(vec![2], vec![1, 2]), (vec![], vec![2, 1]));
    }

    #[test]
    fn indexing_wraps_into_block() {
        let pre = [9, 8];
        let rep = [1, 2, 3];
        let got: Vec<i32> = (0..8).map(|n| *at(&pre, &rep, n)).collect();
        assert_eq!(got, vec![9, 8, 1, 2, 3, 1, 2, 3]);
    }
}
