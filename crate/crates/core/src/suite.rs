//! Reproduction suite: ten acceptance criteria plus the constants and
//! fixture tables.
//!
//! Each criterion draws from its own RNG streams keyed by the suite seed, so
//! results do not depend on the execution mode or on which criteria run.

use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::Rng;
use serde::Serialize;

use crate::classify::{classify_orbit, z_liminf, OrbitClassification};
use crate::exec::Execution;
use crate::kfun::{critical_residual_with, k_functional_with, ness_residual_with, variation_gradient, wedge_defect};
use crate::matrix::{adjoint_star, commutator, inner, matrix_exp, ComplexMatrix, C64, ONE};
use crate::optimize::{minimize_over_orbit_with, OptimizerConfig};
use crate::partition::{c_constant, dominance_compare, rational_to_f64, Dominance, Partition};
use crate::sample::{gaussian_complex, random_conjugate, random_trace_free, random_unitary, random_vector, rng_for};
use crate::sl2::{build_standard_triple, principal_e, Sl2Element};
use crate::spectral::{degeneration_witness, jordan_matrix, spectral_profile};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub execution: Execution,
    pub tol: Tolerances,
    pub optimizer: OptimizerConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let optimizer = OptimizerConfig::default();
        SuiteConfig { seed: optimizer.seed, execution: Execution::default(), tol: Tolerances::default(), optimizer }
    }
}

impl SuiteConfig {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig { execution: self.execution, ..self.optimizer }
    }

    fn rng(&self, criterion: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
        rng_for(self.seed ^ criterion.wrapping_mul(0x9e37_79b9_7f4a_7c15), stream)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} ({:.2}s of {:.0}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_secs,
            self.limit_secs
        )
    }
}

pub const CRITERIA: [(u8, &str, u64); 10] = [
    (1, "constants table", 1),
    (2, "standard-triple identity", 30),
    (3, "invariance suite", 30),
    (4, "wedge inequality", 30),
    (5, "nilpotent minima", 600),
    (6, "seven-case fixtures", 900),
    (7, "rank-2 bound", 60),
    (8, "dominance monotonicity", 10),
    (9, "semicontinuity", 120),
    (10, "gradient correctness", 60),
];

/// Runs criterion `id` (1 through 10).
pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> CriterionOutcome {
    let &(_, name, limit) = CRITERIA.iter().find(|c| c.0 == id).expect("criterion id in 1..=10");
    let start = Instant::now();
    let result = match id {
        1 => constants(),
        2 => standard_triples(cfg),
        3 => invariance(cfg),
        4 => wedge(cfg),
        5 => nilpotent_minima(cfg),
        6 => fixtures(cfg).map(|rows| fixture_verdict(&rows)),
        7 => rank_two(cfg),
        8 => dominance(),
        9 => semicontinuity(cfg),
        _ => gradient(cfg),
    };
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit);
    let (mut passed, mut detail) = match result {
        Ok(v) => v,
        Err(e) => (false, e),
    };
    if elapsed >= limit {
        passed = false;
        detail.push_str("; over the time limit");
    }
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed_secs: elapsed.as_secs_f64(),
        limit_secs: limit.as_secs_f64(),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|c| run_criterion(c.0, cfg)).collect()
}

type Check = std::result::Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub n: u32,
    pub partition: String,
    pub c_exact: String,
    pub c: f64,
}

/// `C_pi` for every non-trivial partition of `n = 2..=8`.
pub fn constants_table() -> Vec<ConstantRow> {
    (2..=8)
        .flat_map(Partition::nontrivial)
        .map(|p| {
            let c = c_constant(&p).expect("non-trivial");
            ConstantRow { n: p.n(), partition: p.paren(), c_exact: c.to_string(), c: rational_to_f64(c) }
        })
        .collect()
}

fn constants() -> Check {
    let mut bad = Vec::new();
    for n in 2..=8i64 {
        let got = c_constant(&Partition::principal(n as u32)).map_err(err)?;
        if got != Rational64::new(12, n * n * n - n) {
            bad.push(format!("C_({n}) = {got}"));
        }
        if n >= 3 {
            let mut parts = vec![3u32];
            parts.extend(std::iter::repeat_n(1, n as usize - 3));
            let hook = c_constant(&Partition::new(parts).map_err(err)?).map_err(err)?;
            if hook != Rational64::new(1, 2) {
                bad.push(format!("C_(3,1^{}) = {hook}", n - 3));
            }
        }
    }
    if c_constant(&Partition::principal(2)).map_err(err)? != Rational64::from_integer(2) {
        bad.push("C_(2) != 2".into());
    }
    if c_constant(&Partition::principal(3)).map_err(err)? != Rational64::new(1, 2) {
        bad.push("C_(3) != 1/2".into());
    }
    let rows = constants_table().len();
    Ok((bad.is_empty(), if bad.is_empty() { format!("{rows} table rows exact") } else { bad.join(", ") }))
}

fn random_element<R: Rng>(rng: &mut R) -> Sl2Element {
    Sl2Element::new(gaussian_complex(rng), gaussian_complex(rng), gaussian_complex(rng))
}

fn standard_triples(cfg: &SuiteConfig) -> Check {
    const SAMPLES: usize = 1000;
    let parts: Vec<Partition> = (2..=8).flat_map(Partition::nontrivial).collect();
    let tol = cfg.tol;
    let results = cfg.execution.map(parts.len(), |i| -> std::result::Result<f64, String> {
        let p = &parts[i];
        let c = rational_to_f64(c_constant(p).map_err(err)?);
        let t = build_standard_triple(p);
        let mut worst = (k_functional_with(&t.e, &tol).map_err(err)?.k().map_err(err)? - c).abs();
        let mut rng = cfg.rng(2, i as u64);
        let mut done = 0;
        while done < SAMPLES {
            let el = random_element(&mut rng);
            if el.in_z(tol.z) {
                continue;
            }
            let k = k_functional_with(&t.embed(el), &tol).map_err(err)?.k().map_err(err)?;
            worst = worst.max((k - c).abs());
            done += 1;
        }
        Ok(worst)
    });
    let mut worst = 0.0f64;
    for r in results {
        worst = worst.max(r?);
    }
    Ok((worst <= 1e-9, format!("{} partitions x {SAMPLES} elements, max |K - C| = {worst:.2e}", parts.len())))
}

fn invariance(cfg: &SuiteConfig) -> Check {
    const SAMPLES: usize = 10_000;
    let tol = cfg.tol;
    let per = cfg.execution.map(SAMPLES, |i| -> std::result::Result<[f64; 5], String> {
        let mut rng = cfg.rng(3, i as u64);
        let n = rng.random_range(2..=6);
        let a = random_trace_free(&mut rng, n);
        let k = k_functional_with(&a, &tol).map_err(err)?;
        let kv = k.k().map_err(err)?;

        let mag = 10f64.powf(rng.random_range(-3.0..3.0));
        let c = gaussian_complex(&mut rng);
        let c = c * (mag / c.norm());
        let scaled = k_functional_with(&a.scale(c), &tol).map_err(err)?.k().map_err(err)?;

        let u = random_unitary(&mut rng, n);
        let rotated = u.matmul(&a).matmul(&u.star());
        let unitary = k_functional_with(&rotated, &tol).map_err(err)?.k().map_err(err)?;

        let n4 = a.norm_sqr().powi(2);
        let naive = n4 - a.matmul(&a).trace().norm_sqr();
        let cs = (-naive / n4).max(-k.denominator / n4);

        let x = random_trace_free(&mut rng, n);
        let y = random_trace_free(&mut rng, n);
        let lhs = inner(&commutator(&a, &x).map_err(err)?, &y).map_err(err)?;
        let rhs = inner(&x, &commutator(&adjoint_star(&a), &y).map_err(err)?).map_err(err)?;
        let scale = a.norm() * x.norm() * y.norm();
        let adj1 = (lhs - rhs).norm() / scale;
        let left = adjoint_star(&commutator(&x, &y).map_err(err)?);
        let right = commutator(&adjoint_star(&y), &adjoint_star(&x)).map_err(err)?;
        let adj2 = left.max_abs_diff(&right) / (x.norm() * y.norm());

        Ok([rel(scaled, kv), rel(unitary, kv), cs, adj1, adj2])
    });
    let mut worst = [0.0f64; 5];
    for r in per {
        for (w, v) in worst.iter_mut().zip(r?) {
            *w = w.max(v);
        }
    }
    let ok = worst.iter().all(|&w| w <= 1e-9);
    Ok((
        ok,
        format!(
            "{SAMPLES} samples: scaling {:.1e}, unitary {:.1e}, -den/|A|^4 {:.1e}, <[A,X],Y> {:.1e}, [X,Y]* {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    ))
}

fn wedge(cfg: &SuiteConfig) -> Check {
    const RANDOM: usize = 100_000;
    const DEPENDENT: usize = 1000;
    const CHUNK: usize = 1000;
    let chunks = cfg.execution.map(RANDOM / CHUNK, |c| -> std::result::Result<f64, String> {
        let mut rng = cfg.rng(4, c as u64);
        let mut low = f64::INFINITY;
        for _ in 0..CHUNK {
            let m = rng.random_range(1..=10);
            let (x, y, z) = (random_vector(&mut rng, m), random_vector(&mut rng, m), random_vector(&mut rng, m));
            low = low.min(wedge_defect(&x, &y, &z).map_err(err)?);
        }
        Ok(low)
    });
    let mut low = f64::INFINITY;
    for c in chunks {
        low = low.min(c?);
    }
    let mut rng = cfg.rng(4, u64::MAX);
    let mut high = f64::NEG_INFINITY;
    for _ in 0..DEPENDENT {
        let m = rng.random_range(1..=10);
        let x = random_vector(&mut rng, m);
        let y = random_vector(&mut rng, m);
        let (p, q) = (gaussian_complex(&mut rng), gaussian_complex(&mut rng));
        let z: Vec<C64> = x.iter().zip(&y).map(|(a, b)| p * a + q * b).collect();
        let mut trip = [x, y, z];
        let k = rng.random_range(0..3);
        trip.swap(k, 2);
        high = high.max(wedge_defect(&trip[0], &trip[1], &trip[2]).map_err(err)?);
    }
    Ok((
        low >= -1e-9 && high <= 1e-9,
        format!("min over {RANDOM} random {low:.2e}, max over {DEPENDENT} dependent {high:.2e}"),
    ))
}

fn nilpotent_minima(cfg: &SuiteConfig) -> Check {
    const POINTS: usize = 20;
    let parts: Vec<Partition> = (2..=5).flat_map(Partition::nontrivial).collect();
    let tol = cfg.tol;
    let opt = OptimizerConfig { restarts: 5, ..cfg.optimizer() };
    let mut bad = Vec::new();
    let mut worst_gap = 0.0f64;
    for (i, p) in parts.iter().enumerate() {
        let c = rational_to_f64(c_constant(p).map_err(err)?);
        let e = build_standard_triple(p).e;
        let mut rng = cfg.rng(5, i as u64);
        let points: Vec<ComplexMatrix> = (0..POINTS).map(|_| random_conjugate(&mut rng, &e, 1.0)).collect();
        let ks = cfg.execution.map_slice(&points, |a| k_functional_with(a, &tol).and_then(|r| r.k()));
        for k in ks {
            let k = k.map_err(err)?;
            if k < c - 1e-6 {
                bad.push(format!("{}: orbit point K = {k}", p.paren()));
            }
        }
        let report = minimize_over_orbit_with(&points[0], &opt, &tol).map_err(err)?;
        worst_gap = worst_gap.max((report.best_k - c).abs());
        if (report.best_k - c).abs() > 1e-3 {
            bad.push(format!("{}: optimizer {} vs {c}", p.paren(), report.best_k));
        }
        let ness = ness_residual_with(&e, &tol).map_err(err)?;
        if !(ness.satisfied && ness.a < 0.0) {
            bad.push(format!("{}: Ness residual {:.1e}, a = {}", p.paren(), ness.relative_residual, ness.a));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} partitions, optimizer max |K - C| = {worst_gap:.1e}", parts.len())
    } else {
        bad.join("; ")
    };
    Ok((bad.is_empty(), detail))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub label: String,
    /// One-line digest, e.g. `diag(2,0,-2): case 2, inf 0.5, extra 2.0`.
    pub summary: String,
    pub case_id: u8,
    pub infimum: f64,
    pub infimum_exact: Option<String>,
    pub achieved: bool,
    pub extra_critical: Option<f64>,
    pub critical_value: Option<f64>,
    pub z_liminf: Option<f64>,
    pub optimized_k: f64,
    pub window_low: f64,
    pub window_high: f64,
    pub optimizer_diverging: bool,
    pub optimizer_floor_bound: bool,
    pub passed: bool,
    pub note: String,
}

fn summary(label: &str, case_id: u8, infimum: f64, extra: Option<f64>) -> String {
    let mut s = format!("{label}: case {case_id}, inf {infimum}");
    if let Some(x) = extra {
        s.push_str(&format!(", extra {x:.1}"));
    }
    s
}

struct Fixture {
    label: &'static str,
    matrix: ComplexMatrix,
    case_id: u8,
    infimum: f64,
    achieved: bool,
    extra: Option<f64>,
    z_liminf: Option<f64>,
}

fn fixture_list(cfg: &SuiteConfig) -> Vec<Fixture> {
    let i = C64::new(0.0, 1.0);
    let mut rng = cfg.rng(6, 0);
    let adjacent = random_conjugate(&mut rng, &ComplexMatrix::real_diag(&[1.0, -1.0, 0.0]), 1.0);
    let j7 = jordan_matrix(&[(2, ONE), (1, C64::new(-2.0, 0.0))]).expect("valid blocks");
    let f = |label, matrix, case_id, infimum, achieved, extra, z_liminf| Fixture {
        label,
        matrix,
        case_id,
        infimum,
        achieved,
        extra,
        z_liminf,
    };
    vec![
        f("diag(1,i,-1-i)", ComplexMatrix::diag(&[ONE, i, -ONE - i]), 1, 0.0, true, None, None),
        f("diag(2,0,-2)", ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]), 2, 0.5, true, Some(2.0), Some(0.5)),
        f("diag(1,-1)", ComplexMatrix::real_diag(&[1.0, -1.0]), 3, 2.0, true, None, Some(2.0)),
        f("g diag(1,-1,0) g^-1", adjacent, 2, 0.5, true, Some(2.0), Some(0.5)),
        f("diag(1,1,0,-1,-1)", ComplexMatrix::real_diag(&[1.0, 1.0, 0.0, -1.0, -1.0]), 4, 0.25, false, None, Some(0.25)),
        f("diag(3,-1,-2)", ComplexMatrix::real_diag(&[3.0, -1.0, -2.0]), 5, 1.0 / 14.0, false, None, Some(1.0 / 14.0)),
        f("e_4", principal_e(4), 6, 0.2, true, None, None),
        f("[[1,0,0],[1,1,0],[0,0,-2]]", j7, 7, 0.0, false, None, Some(0.0)),
    ]
}

fn window(fx: &Fixture) -> (f64, f64) {
    match (fx.achieved, fx.case_id) {
        (_, 1) | (_, 7) => (0.0, 1e-3),
        (true, _) => (fx.infimum - 1e-3, fx.infimum + 1e-3),
        (false, _) => (fx.infimum - 1e-6, fx.infimum + 0.01),
    }
}

/// Classifier prediction against optimizer result for each fixture.
pub fn fixtures(cfg: &SuiteConfig) -> std::result::Result<Vec<FixtureRow>, String> {
    let tol = cfg.tol;
    let opt = cfg.optimizer();
    let mut rows = Vec::new();
    for fx in fixture_list(cfg) {
        let class: OrbitClassification = classify_orbit(&fx.matrix, &tol).map_err(err)?;
        let z = z_liminf(&fx.matrix, &tol).ok().map(|v| v.value);
        let report = minimize_over_orbit_with(&fx.matrix, &opt, &tol).map_err(err)?;
        let (lo, hi) = window(&fx);
        let extra = class.extra_critical.as_ref().map(|c| c.value.value);
        let mut notes = Vec::new();
        if class.case_id != fx.case_id {
            notes.push(format!("case {} expected {}", class.case_id, fx.case_id));
        }
        if (class.infimum.value - fx.infimum).abs() > 1e-12 || class.achieved != fx.achieved {
            notes.push(format!("infimum {} achieved {}", class.infimum.value, class.achieved));
        }
        if extra.map(|x| (x - fx.extra.unwrap_or(f64::NAN)).abs() > 1e-12).unwrap_or(fx.extra.is_some()) {
            notes.push(format!("extra critical {extra:?}"));
        }
        if let Some(want) = fx.z_liminf {
            if z.is_none_or(|z| (z - want).abs() > 1e-12) {
                notes.push(format!("z liminf {z:?}"));
            }
        }
        if !(lo..=hi).contains(&report.best_k) {
            notes.push(format!("optimizer {} outside [{lo}, {hi}]", report.best_k));
        }
        if fx.case_id == 4 || fx.case_id == 2 && fx.label.starts_with('g') {
            let mut rng = cfg.rng(6, rows.len() as u64 + 1);
            for _ in 0..5 {
                let g = random_conjugate(&mut rng, &fx.matrix, 0.8);
                let zg = z_liminf(&g, &tol).map_err(err)?.value;
                if (zg - fx.z_liminf.unwrap_or(f64::NAN)).abs() > 1e-9 {
                    notes.push(format!("conjugate z liminf {zg}"));
                }
            }
        }
        rows.push(FixtureRow {
            label: fx.label.into(),
            summary: summary(fx.label, class.case_id, class.infimum.value, extra),
            case_id: class.case_id,
            infimum: class.infimum.value,
            infimum_exact: class.infimum.exact.map(|r| r.to_string()),
            achieved: class.achieved,
            extra_critical: extra,
            critical_value: class.critical_value.as_ref().map(|c| c.value.value),
            z_liminf: z,
            optimized_k: report.best_k,
            window_low: lo,
            window_high: hi,
            optimizer_diverging: report.diverging,
            optimizer_floor_bound: report.floor_bound,
            passed: notes.is_empty(),
            note: notes.join("; "),
        });
    }
    Ok(rows)
}

fn fixture_verdict(rows: &[FixtureRow]) -> (bool, String) {
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.label, r.note)).collect();
    if failed.is_empty() {
        (true, format!("{} fixtures, classifier and optimizer agree", rows.len()))
    } else {
        (false, failed.join("; "))
    }
}

/// Random trace-free `u1 v1* + u2 v2*` (or rank one).
fn random_rank_two<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let outer = |u: &[C64], v: &[C64]| ComplexMatrix::from_fn(n, |i, j| u[i] * v[j].conj());
    let dot = |v: &[C64], u: &[C64]| -> C64 { v.iter().zip(u).map(|(a, b)| a.conj() * b).sum() };
    let u1 = random_vector(rng, n);
    let mut v1 = random_vector(rng, n);
    if rng.random_bool(0.2) {
        let g = dot(&v1, &u1) / u1.iter().map(|x| x.norm_sqr()).sum::<f64>();
        v1 = v1.iter().zip(&u1).map(|(v, u)| v - u * g.conj()).collect();
        return outer(&u1, &v1);
    }
    let u2 = random_vector(rng, n);
    let w = random_vector(rng, n);
    let t1 = dot(&v1, &u1);
    let gamma = ((-t1 - dot(&w, &u2)) / u2.iter().map(|x| x.norm_sqr()).sum::<f64>()).conj();
    let v2: Vec<C64> = w.iter().zip(&u2).map(|(w, u)| w + u * gamma).collect();
    &outer(&u1, &v1) + &outer(&u2, &v2)
}

fn rank_two(cfg: &SuiteConfig) -> Check {
    const SAMPLES: usize = 10_000;
    let tol = cfg.tol;
    let per = cfg.execution.map(SAMPLES, |i| -> std::result::Result<Option<f64>, String> {
        let mut rng = cfg.rng(7, i as u64);
        let n = if i % 2 == 0 { 4 } else { 5 };
        let a = random_rank_two(&mut rng, n);
        if a.trace().norm() > 1e-12 * a.norm() || crate::matrix::numerical_rank(&a, 1e-10) > 2 {
            return Err(format!("sample {i} is not trace-free of rank <= 2"));
        }
        let r = k_functional_with(&a, &tol).map_err(err)?;
        Ok(r.k_value)
    });
    let mut low = f64::INFINITY;
    let mut skipped = 0;
    for r in per {
        match r? {
            Some(k) => low = low.min(k),
            None => skipped += 1,
        }
    }
    Ok((low >= 0.5 - 1e-9, format!("{} samples off Z, min K = {low:.12}", SAMPLES - skipped)))
}

fn dominance() -> Check {
    let mut pairs = 0usize;
    let mut bad = Vec::new();
    for n in 2..=10 {
        let parts = Partition::nontrivial(n);
        let cs: Vec<Rational64> = parts.iter().map(c_constant).collect::<crate::Result<_>>().map_err(err)?;
        for (i, p) in parts.iter().enumerate() {
            for (j, q) in parts.iter().enumerate() {
                if dominance_compare(p, q).map_err(err)? == Dominance::Less {
                    pairs += 1;
                    if cs[i] <= cs[j] {
                        bad.push(format!("{} < {} but C {} <= {}", p.paren(), q.paren(), cs[i], cs[j]));
                    }
                }
            }
        }
    }
    Ok((bad.is_empty() && pairs > 0, if bad.is_empty() { format!("{pairs} comparable pairs") } else { bad.join("; ") }))
}

/// Invariant-factor degrees straight from Jordan data: the j-th factor
/// collects the j-th largest block of every eigenvalue.
fn invariant_partition_of(data: &[(usize, C64)]) -> Partition {
    let mut by: Vec<(C64, Vec<usize>)> = Vec::new();
    for &(k, l) in data {
        match by.iter_mut().find(|(c, _)| (*c - l).norm() < 1e-12) {
            Some((_, v)) => v.push(k),
            None => by.push((l, vec![k])),
        }
    }
    let depth = by.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for (_, v) in by.iter_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
    }
    let parts = (0..depth).map(|j| by.iter().map(|(_, v)| v.get(j).copied().unwrap_or(0) as u32).sum()).collect();
    Partition::from_unsorted(parts).expect("positive parts")
}

fn random_jordan_data<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, C64)> {
    let grid: Vec<C64> = (-2..=2).flat_map(|re| (-1..=1).map(move |im| C64::new(re as f64, im as f64))).collect();
    loop {
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
        let out: Vec<(usize, C64)> = out.iter().map(|&(k, l)| (k, l - mean)).collect();
        if out.iter().any(|&(k, l)| k > 1 || l.norm() > 1e-12) {
            return out;
        }
    }
}

fn semicontinuity(cfg: &SuiteConfig) -> Check {
    const MATRICES: usize = 20;
    let tol = cfg.tol;
    let per = cfg.execution.map(MATRICES, |s| -> std::result::Result<Option<String>, String> {
        let mut rng = cfg.rng(9, s as u64);
        let n = rng.random_range(2..=6);
        let data = random_jordan_data(&mut rng, n);
        let a = random_conjugate(&mut rng, &jordan_matrix(&data).map_err(err)?, 0.5);
        let expected = invariant_partition_of(&data);
        let w = degeneration_witness(&a, &tol).map_err(err)?;
        if w.predicted != expected {
            return Ok(Some(format!("pi(A) = {} expected {}", w.predicted.paren(), expected.paren())));
        }
        let tail = spectral_profile(&w.normalized(1e12), &tol).map_err(err)?;
        if tail.jordan_type().as_ref() != Some(&expected) {
            return Ok(Some(format!("tail type {:?} expected {}", tail.jordan_type(), expected.paren())));
        }
        for i in [0.0, 0.5, 10.0] {
            // the i = 0 limit of a nilpotent is 0, of type (1^n)
            if w.element(i).norm() == 0.0 {
                continue;
            }
            let u = random_unitary(&mut rng, n);
            let mid = u.matmul(&w.normalized(i)).matmul(&u.star());
            let got = spectral_profile(&mid, &tol).map_err(err)?.invariant_partition;
            if dominance_compare(&got, &expected).map_err(err)? == Dominance::Greater
                || dominance_compare(&got, &expected).map_err(err)? == Dominance::Incomparable
            {
                return Ok(Some(format!("i = {i}: {} not below {}", got.paren(), expected.paren())));
            }
        }
        Ok(None)
    });
    let mut bad = Vec::new();
    for r in per {
        bad.extend(r?);
    }
    Ok((bad.is_empty(), if bad.is_empty() { format!("{MATRICES} matrices") } else { bad.join("; ") }))
}

fn k_along(a: &ComplexMatrix, m: &ComplexMatrix, t: f64, tol: &Tolerances) -> std::result::Result<f64, String> {
    let left = matrix_exp(&m.scale_real(-t)).map_err(err)?;
    let right = matrix_exp(&m.scale_real(t)).map_err(err)?;
    k_functional_with(&left.matmul(a).matmul(&right), tol).and_then(|r| r.k()).map_err(err)
}

fn gradient(cfg: &SuiteConfig) -> Check {
    const POINTS: usize = 100;
    const PER_PARTITION: usize = 20;
    let tol = cfg.tol;
    let fd = cfg.execution.map(POINTS, |i| -> std::result::Result<f64, String> {
        let mut rng = cfg.rng(10, i as u64);
        let n = rng.random_range(3..=6);
        let a = random_trace_free(&mut rng, n);
        let (_, den) = {
            let r = k_functional_with(&a, &tol).map_err(err)?;
            (r.numerator, r.denominator)
        };
        let g = variation_gradient(&a, &tol).map_err(err)?;
        let m = g.scale_real(-1.0 / g.norm());
        let h = 1e-4;
        let slope = (k_along(&a, &m, h, &tol)? - k_along(&a, &m, -h, &tol)?) / (2.0 * h);
        let closed = 4.0 * m.inner_with(&g).re / (den * den);
        Ok(rel(slope, closed))
    });
    let mut worst_fd = 0.0f64;
    for r in fd {
        worst_fd = worst_fd.max(r?);
    }
    let parts: Vec<Partition> = (2..=8).flat_map(Partition::nontrivial).collect();
    let res = cfg.execution.map(parts.len(), |i| -> std::result::Result<f64, String> {
        let t = build_standard_triple(&parts[i]);
        let mut rng = cfg.rng(10, 1000 + i as u64);
        let mut worst = critical_residual_with(&t.e, &tol).map_err(err)?;
        let mut done = 0;
        while done < PER_PARTITION {
            let el = random_element(&mut rng);
            if el.in_z(tol.z) {
                continue;
            }
            worst = worst.max(critical_residual_with(&t.embed(el), &tol).map_err(err)?);
            done += 1;
        }
        Ok(worst)
    });
    let mut worst_res = 0.0f64;
    for r in res {
        worst_res = worst_res.max(r?);
    }
    Ok((
        worst_fd <= 1e-4 && worst_res <= 1e-8,
        format!("finite difference max rel {worst_fd:.1e} on {POINTS} points, embedded residual max {worst_res:.1e}"),
    ))
}
