//! Eigenvalue clusters, Jordan structure from rank sequences, the invariant
//! partition `pi(A)`, uni-real detection and the degeneration sequence whose
//! normalized tail is nilpotent of type `pi(A)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, rank_above, ComplexMatrix, C64, ONE, ZERO};
use crate::partition::Partition;
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: C64,
    pub multiplicity: usize,
    /// Jordan block sizes, non-increasing.
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralProfile {
    pub clusters: Vec<Cluster>,
    pub diagonalizable: bool,
    pub nilpotent: bool,
    pub uni_real_phase: Option<C64>,
    pub invariant_partition: Partition,
    /// Single-linkage height at which the clusters were cut, relative to `|A|`.
    pub merge_height: f64,
}

impl SpectralProfile {
    pub fn jordan_blocks(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.blocks.clone()).collect()
    }

    /// Cluster centers repeated by multiplicity.
    pub fn spectrum(&self) -> Vec<C64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.center, c.multiplicity))
            .collect()
    }

    /// Jordan type of a nilpotent profile.
    pub fn jordan_type(&self) -> Option<Partition> {
        if !self.nilpotent {
            return None;
        }
        Partition::from_unsorted(self.clusters[0].blocks.iter().map(|&b| b as u32).collect()).ok()
    }

    /// Spectrum divided by the uni-real phase, imaginary parts dropped.
    pub fn realified(&self) -> Option<Vec<f64>> {
        let c = self.uni_real_phase?;
        Some(self.spectrum().iter().map(|z| (z / c).re).collect())
    }
}

/// Block-diagonal matrix of lower Jordan blocks `(size, eigenvalue)`.
pub fn jordan_matrix(blocks: &[(usize, C64)]) -> Result<ComplexMatrix> {
    let n: usize = blocks.iter().map(|b| b.0).sum();
    if blocks.iter().any(|b| b.0 == 0) {
        return Err(Error::Parse("zero-size Jordan block".into()));
    }
    if n < 2 {
        return Err(Error::BadShape { rows: n, cols: n });
    }
    let mut m = ComplexMatrix::zeros(n);
    let mut off = 0;
    for &(k, lam) in blocks {
        for i in 0..k {
            m.set(off + i, off + i, lam);
            if i > 0 {
                m.set(off + i, off + i - 1, ONE);
            }
        }
        off += k;
    }
    Ok(m)
}

/// Common phase `c` with every `lambda / c` real, taken from the largest
/// eigenvalue and canonicalized to `arg c` in `[0, pi)`.
pub fn uni_real_phase(eigs: &[C64], tol: f64) -> Result<Option<C64>> {
    let top = eigs
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .ok_or(Error::Empty)?;
    let scale = top.norm();
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }
    if scale == 0.0 {
        return Err(Error::Nilpotent);
    }
    let mut c = top / scale;
    let arg = c.arg();
    if !(0.0..std::f64::consts::PI).contains(&arg) {
        c = -c;
    }
    let ok = eigs.iter().all(|z| (z / c).im.abs() <= tol * scale);
    Ok(ok.then_some(c))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum spanning tree edges `(height, i, j)` in merge order.
fn single_linkage(eigs: &[C64]) -> Vec<(f64, usize, usize)> {
    let n = eigs.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push(((eigs[i] - eigs[j]).norm(), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut uf = UnionFind((0..n).collect());
    edges.into_iter().filter(|&(_, i, j)| uf.union(i, j)).collect()
}

fn groups_after(eigs: &[C64], merges: &[(f64, usize, usize)]) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut uf = UnionFind((0..n).collect());
    for &(_, i, j) in merges {
        uf.union(i, j);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = uf.find(i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

/// Block sizes of the eigenvalue `center` with multiplicity `l`, or `None`
/// when the rank sequence is inconsistent with that multiplicity.
fn blocks_at(a: &ComplexMatrix, center: C64, l: usize, rank_tol: f64) -> Option<Vec<usize>> {
    let n = a.dim();
    let shifted = a.sub_scalar(center);
    let norm = shifted.norm();
    if norm == 0.0 {
        return (l == n).then(|| vec![1; n]);
    }
    let b = shifted.scale_real(1.0 / norm);
    let mut ranks = vec![n];
    let mut p = b.clone();
    for s in 1..=l {
        ranks.push(rank_above(&p, rank_tol));
        if s < l {
            p = p.matmul(&b);
        }
    }
    if ranks[l] != n - l {
        return None;
    }
    // at_least[s] = number of blocks of size >= s
    let at_least: Vec<usize> = (1..=l).map(|s| ranks[s - 1].checked_sub(ranks[s])).collect::<Option<_>>()?;
    if at_least.windows(2).any(|w| w[1] > w[0]) || at_least[0] == 0 {
        return None;
    }
    let mut blocks = Vec::new();
    for s in (1..=l).rev() {
        let exact = at_least[s - 1] - at_least.get(s).copied().unwrap_or(0);
        blocks.extend(std::iter::repeat_n(s, exact));
    }
    Some(blocks)
}

fn try_level(a: &ComplexMatrix, eigs: &[C64], groups: &[Vec<usize>], tol: &Tolerances) -> Option<Vec<Cluster>> {
    groups
        .iter()
        .map(|g| {
            let center = g.iter().map(|&i| eigs[i]).sum::<C64>() / g.len() as f64;
            let center = if groups.len() == 1 { ZERO } else { center };
            let blocks = blocks_at(a, center, g.len(), tol.rank)?;
            Some(Cluster { center, multiplicity: g.len(), blocks })
        })
        .collect()
}

/// `m_j = sum_b k_jb`, with `k_jb` the j-th largest block over eigenvalue b.
fn invariant_partition(clusters: &[Cluster]) -> Partition {
    let depth = clusters.iter().map(|c| c.blocks.len()).max().unwrap_or(0);
    let parts = (0..depth)
        .map(|j| clusters.iter().map(|c| c.blocks.get(j).copied().unwrap_or(0) as u32).sum())
        .collect();
    Partition::from_unsorted(parts).expect("non-empty")
}

pub fn spectral_profile(a: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralProfile> {
    a.check_trace_free(tol)?;
    let n = a.dim();
    let s = a.norm();
    let eigs = eigenvalues(a)?;
    let merges = single_linkage(&eigs);
    let base = merges.iter().take_while(|m| m.0 <= tol.cluster * s).count();
    let top = merges.iter().take_while(|m| m.0 <= tol.cluster_max * s).count();

    let mut chosen = None;
    for k in (base..=top).rev() {
        // levels inside a run of tied heights are not well defined
        if k > base && k < merges.len() && merges[k].0 == merges[k - 1].0 {
            continue;
        }
        let groups = groups_after(&eigs, &merges[..k]);
        if let Some(clusters) = try_level(a, &eigs, &groups, tol) {
            chosen = Some((k, clusters));
            break;
        }
    }
    let (k, mut clusters) = chosen.ok_or_else(|| {
        Error::AmbiguousClustering("no eigenvalue grouping is consistent with the rank sequences".into())
    })?;
    let height = if k == 0 { 0.0 } else { merges[k - 1].0 };
    if k > base && k < merges.len() && merges[k].0 < 10.0 * height {
        return Err(Error::AmbiguousClustering(format!(
            "merge at {:.3e} is within a decade of the next candidate {:.3e}",
            height / s,
            merges[k].0 / s
        )));
    }

    clusters.sort_by(|x, y| {
        y.center
            .re
            .partial_cmp(&x.center.re)
            .unwrap()
            .then(y.center.im.partial_cmp(&x.center.im).unwrap())
    });
    let nilpotent = clusters.len() == 1;
    let diagonalizable = clusters.iter().all(|c| c.blocks.iter().all(|&b| b == 1));
    let centers: Vec<C64> = clusters.iter().map(|c| c.center).collect();
    let uni_real_phase = if nilpotent {
        None
    } else {
        uni_real_phase(&centers, tol.uni_real)?
    };
    let invariant_partition = invariant_partition(&clusters);
    debug_assert_eq!(invariant_partition.n() as usize, n);
    Ok(SpectralProfile {
        clusters,
        diagonalizable,
        nilpotent,
        uni_real_phase,
        invariant_partition,
        merge_height: if s > 0.0 { height / s } else { 0.0 },
    })
}

/// Sequence `i -> A_i` in the orbit of `A`: one lower-bidiagonal block per
/// invariant factor, eigenvalues on the diagonal and `i` below it.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerationWitness {
    pub base: ComplexMatrix,
    /// Diagonal entries of each invariant-factor block.
    pub factors: Vec<Vec<C64>>,
    /// Jordan type of the limit of `A_i / |A_i|`.
    pub predicted: Partition,
}

impl DegenerationWitness {
    pub fn element(&self, i: f64) -> ComplexMatrix {
        let n = self.base.dim();
        let mut m = ComplexMatrix::zeros(n);
        let mut off = 0;
        for f in &self.factors {
            for (r, &lam) in f.iter().enumerate() {
                m.set(off + r, off + r, lam);
                if r > 0 {
                    m.set(off + r, off + r - 1, C64::new(i, 0.0));
                }
            }
            off += f.len();
        }
        m
    }

    pub fn normalized(&self, i: f64) -> ComplexMatrix {
        let m = self.element(i);
        let s = m.norm();
        m.scale_real(1.0 / s)
    }
}

pub fn degeneration_witness(a: &ComplexMatrix, tol: &Tolerances) -> Result<DegenerationWitness> {
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    let profile = spectral_profile(a, tol)?;
    let depth = profile.clusters.iter().map(|c| c.blocks.len()).max().unwrap_or(0);
    let factors = (0..depth)
        .map(|j| {
            profile
                .clusters
                .iter()
                .flat_map(|c| std::iter::repeat_n(c.center, c.blocks.get(j).copied().unwrap_or(0)))
                .collect()
        })
        .collect();
    Ok(DegenerationWitness {
        base: a.clone(),
        factors,
        predicted: profile.invariant_partition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{dominance_compare, Dominance};
    use crate::sample::{random_conjugate, random_unitary, rng_for};
    use crate::sl2::principal_e;
    use rand::Rng;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn prof(a: &ComplexMatrix) -> SpectralProfile {
        spectral_profile(a, &Tolerances::default()).unwrap()
    }

    fn j7() -> ComplexMatrix {
        jordan_matrix(&[(2, ONE), (1, C64::new(-2.0, 0.0))]).unwrap()
    }

    #[test]
    fn profile_examples() {
        let e3 = prof(&principal_e(3));
        assert!(e3.nilpotent && !e3.diagonalizable);
        assert_eq!(e3.jordan_type(), Some(p("3")));
        assert_eq!(e3.invariant_partition, p("3"));

        let d = prof(&ComplexMatrix::real_diag(&[1.0, 1.0, -2.0]));
        assert!(d.diagonalizable && !d.nilpotent);
        assert_eq!(d.invariant_partition, p("2,1"));
        assert_eq!(d.clusters[0].multiplicity, 2);

        let j = prof(&j7());
        assert!(!j.diagonalizable && !j.nilpotent);
        assert_eq!(j.invariant_partition, p("3"));
        assert_eq!(j.jordan_blocks(), vec![vec![2], vec![1]]);
    }

    #[test]
    fn jordan_example_layout() {
        let want = ComplexMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, -2.0],
        ])
        .unwrap();
        assert_eq!(j7(), want);
    }

    #[test]
    fn uni_real_examples() {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let c = uni_real_phase(&[C64::new(1.0, 1.0), C64::new(-1.0, -1.0), ZERO], 1e-9).unwrap().unwrap();
        assert!((c - C64::new(s2, s2)).norm() < 1e-15);
        let none = uni_real_phase(&[ONE, C64::new(0.0, 1.0), C64::new(-1.0, -1.0)], 1e-9).unwrap();
        assert!(none.is_none());
        let c = uni_real_phase(&[C64::new(-2.0, 0.0), ZERO, C64::new(2.0, 0.0)], 1e-9).unwrap().unwrap();
        assert_eq!(c, ONE);
        assert_eq!(uni_real_phase(&[ZERO, ZERO], 1e-9).unwrap_err(), Error::Nilpotent);
        assert_eq!(uni_real_phase(&[], 1e-9).unwrap_err(), Error::Empty);
    }

    #[test]
    fn phase_is_canonical() {
        let c = uni_real_phase(&[C64::new(0.0, -3.0), C64::new(0.0, 3.0)], 1e-9).unwrap().unwrap();
        assert!((c - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_trace_free() {
        let a = ComplexMatrix::real_diag(&[1.0, 1.0, -1.0]);
        assert!(matches!(spectral_profile(&a, &Tolerances::default()), Err(Error::NotTraceFree { .. })));
    }

    fn random_jordan_data<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, C64)> {
        let grid: Vec<C64> = (-2..=2)
            .flat_map(|re| (-1..=1).map(move |im| C64::new(re as f64, im as f64)))
            .collect();
        let mut left = n;
        let mut out: Vec<(usize, C64)> = Vec::new();
        while left > 0 {
            let k = rng.random_range(1..=left.min(4));
            let lam = if !out.is_empty() && rng.random_bool(0.4) {
                out[rng.random_range(0..out.len())].1
            } else {
                grid[rng.random_range(0..grid.len())]
            };
            out.push((k, lam));
            left -= k;
        }
        let mean = out.iter().map(|&(k, l)| l * k as f64).sum::<C64>() / n as f64;
        out.iter().map(|&(k, l)| (k, l - mean)).collect()
    }

    /// Expected profile straight from the construction data.
    fn expected(data: &[(usize, C64)]) -> (Vec<(C64, Vec<usize>)>, Partition) {
        let mut by: Vec<(C64, Vec<usize>)> = Vec::new();
        for &(k, l) in data {
            match by.iter_mut().find(|(c, _)| (*c - l).norm() < 1e-12) {
                Some((_, v)) => v.push(k),
                None => by.push((l, vec![k])),
            }
        }
        for (_, v) in by.iter_mut() {
            v.sort_by(|a, b| b.cmp(a));
        }
        let depth = by.iter().map(|b| b.1.len()).max().unwrap();
        let parts = (0..depth)
            .map(|j| by.iter().map(|b| b.1.get(j).copied().unwrap_or(0) as u32).sum())
            .collect();
        (by, Partition::from_unsorted(parts).unwrap())
    }

    #[test]
    fn rank_sequence_reconstruction() {
        let mut rng = rng_for(21, 0);
        let tol = Tolerances::default();
        for trial in 0..200 {
            let n = rng.random_range(2..=8);
            let data = random_jordan_data(&mut rng, n);
            let (want, want_pi) = expected(&data);
            let j = jordan_matrix(&data).unwrap();
            let u = random_unitary(&mut rng, n);
            let a = random_conjugate(&mut rng, &u.matmul(&j).matmul(&u.star()), 0.3);
            let got = spectral_profile(&a, &tol).unwrap_or_else(|e| panic!("trial {trial} {data:?}: {e}"));
            assert_eq!(got.invariant_partition, want_pi, "trial {trial} {data:?}");
            assert_eq!(got.clusters.len(), want.len());
            for (center, blocks) in &want {
                let c = got
                    .clusters
                    .iter()
                    .find(|c| (c.center - center).norm() < 1e-3)
                    .unwrap_or_else(|| panic!("trial {trial}: {center} missing"));
                assert_eq!(&c.blocks, blocks, "trial {trial} {data:?}");
            }
        }
    }

    #[test]
    fn witness_examples() {
        let tol = Tolerances::default();
        let w = degeneration_witness(&ComplexMatrix::real_diag(&[1.0, -1.0]), &tol).unwrap();
        assert_eq!(w.predicted, p("2"));
        let a5 = w.element(5.0);
        assert_eq!(a5.get(1, 0), C64::new(5.0, 0.0));
        let tail = prof(&w.normalized(1e12));
        assert_eq!(tail.jordan_type(), Some(p("2")));

        let w = degeneration_witness(&principal_e(3), &tol).unwrap();
        assert_eq!(w.predicted, p("3"));
        assert_eq!(prof(&w.normalized(1e12)).jordan_type(), Some(p("3")));

        let w = degeneration_witness(&ComplexMatrix::real_diag(&[1.0, 1.0, -2.0]), &tol).unwrap();
        assert_eq!(prof(&w.normalized(1e12)).jordan_type(), Some(p("2,1")));
        assert_eq!(
            degeneration_witness(&ComplexMatrix::zeros(3), &tol).unwrap_err(),
            Error::ScalarMatrix
        );
    }

    #[test]
    fn witness_elements_are_similar() {
        let mut rng = rng_for(22, 0);
        let tol = Tolerances::default();
        for _ in 0..30 {
            let n = rng.random_range(2..=6);
            let a = jordan_matrix(&random_jordan_data(&mut rng, n)).unwrap();
            let w = degeneration_witness(&a, &tol).unwrap();
            for i in [0.5, 3.0] {
                let ai = w.element(i);
                for (x, y) in ai.char_poly().iter().zip(a.char_poly()) {
                    assert!((x - y).norm() < 1e-8 * (1.0 + y.norm()));
                }
                assert_eq!(prof(&ai).invariant_partition, w.predicted);
            }
            let tail = prof(&w.normalized(1e12));
            assert_eq!(tail.jordan_type().unwrap(), w.predicted);
            let diag = w.element(0.0);
            let below = prof(&diag).invariant_partition;
            assert_ne!(dominance_compare(&below, &w.predicted).unwrap(), Dominance::Greater);
        }
    }

    #[test]
    fn diagonalizable_orbits_are_closed() {
        let mut rng = rng_for(23, 0);
        let d = ComplexMatrix::diag(&[C64::new(2.0, 1.0), C64::new(2.0, 1.0), C64::new(-1.0, 0.0), C64::new(-3.0, -2.0)]);
        let base = prof(&d);
        for _ in 0..20 {
            let g = random_conjugate(&mut rng, &d, 1.0);
            let got = prof(&g);
            assert_eq!(got.invariant_partition, base.invariant_partition);
            assert_eq!(got.jordan_blocks(), base.jordan_blocks());
            assert!(got.diagonalizable);
        }
    }
}
