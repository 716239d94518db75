//! Integer partitions of `n`: dominance order, the constants `C_pi`, parity
//! classes, Lambda-sequences and decomposition of spectra into Lambda-forms.
//!
//! "Even" follows the same-parity convention: a partition is even when all
//! of its parts share one parity (all odd or all even), and odd otherwise.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` supported by [`Partition::all`].
pub const MAX_ENUMERATION: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Greater,
    Less,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Partition {
    /// Parts must be positive and non-increasing.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("parts not non-increasing: {parts:?}")));
        }
        Ok(Self { parts })
    }

    /// Sorts into canonical order and drops zero parts.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    /// `(n)`.
    pub fn principal(n: u32) -> Self {
        Self { parts: vec![n] }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// True for `(1,...,1)`, whose standard triple is zero.
    pub fn is_trivial(&self) -> bool {
        self.parts[0] == 1
    }

    pub fn all_odd(&self) -> bool {
        self.parts.iter().all(|p| p % 2 == 1)
    }

    /// All partitions of `n` in reverse lexicographic order, `(n)` first.
    pub fn all(n: u32) -> Vec<Partition> {
        assert!((1..=MAX_ENUMERATION).contains(&n), "enumeration limited to 1..={MAX_ENUMERATION}");
        fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            for p in (1..=max.min(rest)).rev() {
                cur.push(p);
                rec(rest - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }

    /// Partitions of `n` other than `(1^n)`.
    pub fn nontrivial(n: u32) -> Vec<Partition> {
        Self::all(n).into_iter().filter(|p| !p.is_trivial()).collect()
    }

    fn prefix_sums(&self, len: usize) -> Vec<u32> {
        let mut acc = 0;
        (0..len)
            .map(|i| {
                acc += self.parts.get(i).copied().unwrap_or(0);
                acc
            })
            .collect()
    }

    /// `sum_p n_p (n_p^2 - 1)`.
    pub fn cubic_sum(&self) -> i64 {
        self.parts.iter().map(|&p| {
            let p = p as i64;
            p * (p * p - 1)
        }).sum()
    }

    /// Parenthesized form such as `(3,1,1)`.
    pub fn paren(&self) -> String {
        let body: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        format!("({})", body.join(","))
    }
}

/// Compact text form with exponent sugar, e.g. `3,1^2`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.parts.len() {
            let p = self.parts[i];
            let run = self.parts[i..].iter().take_while(|&&q| q == p).count();
            if !first {
                f.write_str(",")?;
            }
            first = false;
            if run > 1 {
                write!(f, "{p}^{run}")?;
            } else {
                write!(f, "{p}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = Vec::new();
        for tok in s.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(Error::Parse(format!("empty part in {s:?}")));
            }
            let (base, exp) = match tok.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim()),
                None => (tok, "1"),
            };
            let base: u32 = base.parse().map_err(|_| Error::Parse(format!("bad part {tok:?}")))?;
            let exp: usize = exp.parse().map_err(|_| Error::Parse(format!("bad exponent {tok:?}")))?;
            parts.extend(std::iter::repeat_n(base, exp));
        }
        Partition::new(parts)
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

pub fn dominance_compare(a: &Partition, b: &Partition) -> Result<Dominance> {
    if a.n() != b.n() {
        return Err(Error::PartitionSizeMismatch(a.n(), b.n()));
    }
    let len = a.parts.len().max(b.parts.len());
    let (sa, sb) = (a.prefix_sums(len), b.prefix_sums(len));
    let mut ge = true;
    let mut le = true;
    for (x, y) in sa.iter().zip(&sb) {
        match x.cmp(y) {
            Ordering::Greater => le = false,
            Ordering::Less => ge = false,
            Ordering::Equal => {}
        }
    }
    Ok(match (ge, le) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Greater,
        (false, true) => Dominance::Less,
        (false, false) => Dominance::Incomparable,
    })
}

/// `C_pi = 12 / sum n_p (n_p^2 - 1)` as an exact rational.
pub fn c_constant(p: &Partition) -> Result<Rational64> {
    let denom = p.cubic_sum();
    if denom == 0 {
        return Err(Error::TrivialPartition);
    }
    Ok(Rational64::new(12, denom))
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn parity_class(p: &Partition) -> Parity {
    let first = p.parts[0] % 2;
    if p.parts.iter().all(|q| q % 2 == first) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Concatenation `(Lambda_{n_1}, ..., Lambda_{n_s})`, each block
/// `Lambda_k = (k-1, k-3, ..., 1-k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaSequence {
    pub values: Vec<i64>,
    pub source: Partition,
}

impl LambdaSequence {
    pub fn sorted_desc(&self) -> Vec<i64> {
        let mut v = self.values.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn sum_of_squares(&self) -> i64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

pub fn lambda_sequence(p: &Partition) -> LambdaSequence {
    let values = p
        .parts
        .iter()
        .flat_map(|&k| {
            let k = k as i64;
            (0..k).map(move |i| k - 1 - 2 * i)
        })
        .collect();
    LambdaSequence { values, source: p.clone() }
}

/// One way of writing a spectrum as `t * (Lambda_{n_1}, ..., Lambda_{n_s})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaForm {
    pub scale: f64,
    pub partition: Partition,
}

/// All expressions of `values` as a positive multiple of a Lambda-concatenation.
///
/// Returns an empty list when the multiset is not symmetric about zero or no
/// peeling succeeds. At most two forms exist, and two only for an all-odd
/// partition together with its successor-pair rearrangement.
pub fn match_lambda_forms(values: &[f64], round_tol: f64) -> Result<Vec<LambdaForm>> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let same = round_tol * scale;
    if scale == 0.0 || sorted[sorted.len() - 1] - sorted[0] <= same {
        return Err(Error::ConstantInput);
    }
    let n = sorted.len();
    if (0..n).any(|i| (sorted[i] + sorted[n - 1 - i]).abs() > same) {
        return Ok(Vec::new());
    }

    let mut gap = f64::INFINITY;
    for w in sorted.windows(2) {
        let d = w[1] - w[0];
        if d > same {
            gap = gap.min(d);
        }
    }

    let mut forms: Vec<LambdaForm> = Vec::new();
    for t in [gap / 2.0, gap] {
        if let Some(partition) = peel(&sorted, t, round_tol) {
            if !forms.iter().any(|f| f.partition == partition) {
                forms.push(LambdaForm { scale: t, partition });
            }
        }
    }
    Ok(forms)
}

fn peel(values: &[f64], t: f64, round_tol: f64) -> Option<Partition> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in values {
        let x = v / t;
        let r = x.round();
        if (x - r).abs() > round_tol {
            return None;
        }
        *counts.entry(r as i64).or_default() += 1;
    }
    let mut parts = Vec::new();
    while let Some((&top, _)) = counts.iter().next_back() {
        if top < 0 {
            return None;
        }
        let mut k = top;
        while k >= -top {
            let c = counts.get_mut(&k)?;
            *c -= 1;
            if *c == 0 {
                counts.remove(&k);
            }
            k -= 2;
        }
        parts.push((top + 1) as u32);
    }
    Partition::from_unsorted(parts).ok()
}

/// Inverse of the rearrangement `(2m+1) -> (m, m+1)`: pairs the parts of a
/// successor-pair partition `(m_1, m_1+1, ..., m_s, m_s+1)` (zero parts
/// omitted) and returns `(2m_1+1, ..., 2m_s+1)`, or `None` if no pairing exists.
pub fn successor_pair_dual(p: &Partition) -> Option<Partition> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &q in &p.parts {
        *counts.entry(q).or_default() += 1;
    }
    let mut out = Vec::new();
    while let Some((&top, _)) = counts.iter().next_back() {
        take(&mut counts, top)?;
        // the largest remaining part can only be the m+1 of its pair
        let m = top - 1;
        if m > 0 {
            take(&mut counts, m)?;
        }
        out.push(2 * m + 1);
    }
    Partition::from_unsorted(out).ok()
}

/// `(2m+1) -> (m, m+1)` for an all-odd partition.
pub fn successor_pair_split(p: &Partition) -> Option<Partition> {
    if !p.all_odd() {
        return None;
    }
    let parts = p.parts.iter().flat_map(|&q| [(q - 1) / 2, q.div_ceil(2)]).collect();
    Partition::from_unsorted(parts).ok()
}

fn take(counts: &mut BTreeMap<u32, usize>, k: u32) -> Option<()> {
    let c = counts.get_mut(&k)?;
    *c -= 1;
    if *c == 0 {
        counts.remove(&k);
    }
    Some(())
}
