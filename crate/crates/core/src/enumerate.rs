//! Grid construction and multiset enumeration shared by the exhaustive searches.

use std::cmp::Ordering;

/// Rounds to 12 decimals so `k * step` lands on the intended grid point.
pub fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `0, step, 2 step, ...` up to `max_value` inclusive.
pub fn grid_values(step: f64, max_value: f64) -> Vec<f64> {
    assert!(step > 0.0, "grid step must be positive");
    let count = ((max_value / step) + 1e-9).floor() as usize;
    (0..=count).map(|k| snap(k as f64 * step)).collect()
}

/// Sorted ascending union of `base` and `extra`, dropping near-duplicates.
pub fn merge_values(base: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = base
        .iter()
        .chain(extra)
        .copied()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    all
}

/// Lexicographic order on float vectors.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// All multisets of size `len` drawn from `values`, each yielded as a vector
/// sorted ascending (when `values` is ascending), in lexicographic order.
pub struct Multisets<'a> {
    values: &'a [f64],
    idx: Vec<usize>,
    done: bool,
}

pub fn multisets(values: &[f64], len: usize) -> Multisets<'_> {
    Multisets {
        values,
        idx: vec![0; len],
        done: values.is_empty() && len > 0,
    }
}

impl Iterator for Multisets<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let item = self.idx.iter().map(|&i| self.values[i]).collect();
        // Advance the rightmost index that can still grow; reset the tail to it.
        let m = self.values.len();
        match self.idx.iter().rposition(|&i| i + 1 < m) {
            Some(p) => {
                let v = self.idx[p] + 1;
                for slot in &mut self.idx[p..] {
                    *slot = v;
                }
            }
            None => self.done = true,
        }
        Some(item)
    }
}

/// Number of multisets of size `len` over `m` values.
pub fn multiset_count(m: usize, len: usize) -> u64 {
    if len == 0 {
        return 1;
    }
    if m == 0 {
        return 0;
    }
    // C(m + len - 1, len)
    let mut c: u64 = 1;
    for i in 0..len as u64 {
        c = c * (m as u64 + i) / (i + 1);
    }
    c
}

/// Non-increasing lists of length `1..=max_len` over `values`, in a fixed order.
pub fn descending_lists(values: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for mut m in multisets(values, len) {
            m.reverse();
            out.push(m);
        }
    }
    out
}
