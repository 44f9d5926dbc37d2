//! The 2n-gon inequality, violation search, and generalized roundness.
//!
//! Configurations are pairs of multisets: repeated points are allowed on
//! either side, so integer multiplicities can stand in for rational
//! coefficients of the negative-type quadratic form. For multiplicity vector
//! `λ = 1_a − 1_b` one has `λᵀΨλ = −2 · deficiency`.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metric::{powered, FiniteMetricSpace, Kernel};
use crate::negtype::{supremal_p, PStarResult};

/// Refuse exhaustive enumeration beyond this many multiset pairs.
pub const EXHAUSTIVE_CAP: u128 = 10_000_000;
/// Largest space on which [`generalized_roundness`] re-checks all 2-gons.
pub const CROSS_CHECK_MAX_POINTS: usize = 12;
/// A deficiency counts as a violation only below `-REL_SLACK · Σ|terms|`.
const REL_SLACK: f64 = 1e-12;

/// Two multisets `a`, `b` of equal size `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GonConfiguration {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl GonConfiguration {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        let config = Self { a, b };
        config.check_shape()?;
        Ok(config)
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }

    fn check_shape(&self) -> Result<()> {
        if self.a.len() != self.b.len() {
            return Err(Error::Domain(format!(
                "gon sides differ in size: {} vs {}",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.a.len() < 2 {
            return Err(Error::Domain(format!("gon size must be at least 2, got {}", self.a.len())));
        }
        Ok(())
    }
}

/// A configuration whose inequality fails at exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationCertificate {
    pub config: GonConfiguration,
    pub p: f64,
    /// Cross sum minus within sums; negative.
    pub deficiency: f64,
}

/// `Σ_{i,j} d(a_i,b_j)^p − Σ_{i<j} (d(a_i,a_j)^p + d(b_i,b_j)^p)`.
///
/// Non-negative exactly when the gon inequality holds for this configuration.
pub fn gon_deficiency(space: &FiniteMetricSpace, config: &GonConfiguration, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent must be positive, got {p}")));
    }
    config.check_shape()?;
    let n = space.len();
    if let Some(&bad) = config.a.iter().chain(&config.b).find(|&&i| i >= n) {
        return Err(Error::Domain(format!("point index {bad} out of range for {n} points")));
    }
    let kernel = powered(space, p);
    Ok(Terms::of(&kernel, &config.a, &config.b).deficiency())
}

#[derive(Debug, Clone, Copy, Default)]
struct Terms {
    cross: f64,
    within: f64,
}

impl Terms {
    fn of(kernel: &Kernel, a: &[usize], b: &[usize]) -> Self {
        Self { cross: cross_sum(kernel, a, b), within: within_sum(kernel, a) + within_sum(kernel, b) }
    }

    fn deficiency(self) -> f64 {
        self.cross - self.within
    }

    fn violates(self) -> bool {
        self.deficiency() < -REL_SLACK * (self.cross + self.within)
    }
}

fn cross_sum(kernel: &Kernel, a: &[usize], b: &[usize]) -> f64 {
    a.iter().map(|&x| b.iter().map(|&y| kernel.get(x, y)).sum::<f64>()).sum()
}

fn within_sum(kernel: &Kernel, a: &[usize]) -> f64 {
    let mut total = 0.0;
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[i + 1..] {
            total += kernel.get(x, y);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Every multiset pair up to `max_n`; complete at those sizes.
    Exhaustive,
    /// Uniformly random configurations.
    Random,
    /// Hill-climbing by single-index replacement with random restarts.
    Local,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "random" => Ok(Strategy::Random),
            "local" => Ok(Strategy::Local),
            other => Err(Error::Domain(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub strategy: Strategy,
    /// Deficiency evaluations for the random and local strategies.
    pub budget: u64,
    pub max_n: usize,
    pub seed: u64,
    /// Independent streams the budget is split across; worker `w` is seeded
    /// with `seed + w`. Fixing this makes results independent of thread count.
    pub workers: usize,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Local,
            budget: 100_000,
            max_n: 4,
            seed: 0,
            workers: 8,
            exec: Exec::default(),
        }
    }
}

/// Looks for a configuration violating the gon inequality at exponent `p`.
///
/// Returns the most negative deficiency seen. `None` is not a proof that the
/// inequality holds everywhere; only [`supremal_p`] gives lower bounds.
pub fn search_violation(
    space: &FiniteMetricSpace,
    p: f64,
    opts: &SearchOptions,
) -> Result<Option<ViolationCertificate>> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent must be positive, got {p}")));
    }
    if opts.max_n < 2 {
        return Err(Error::Domain(format!("max_n must be at least 2, got {}", opts.max_n)));
    }
    if opts.budget == 0 {
        return Err(Error::Domain("search budget must be positive".into()));
    }
    if space.len() == 0 {
        return Ok(None);
    }
    let kernel = powered(space, p);
    let best = match opts.strategy {
        Strategy::Exhaustive => exhaustive(&kernel, opts.max_n, opts.exec)?,
        Strategy::Random | Strategy::Local => {
            let workers = opts.workers.max(1);
            let share = |w: usize| {
                opts.budget / workers as u64 + u64::from((w as u64) < opts.budget % workers as u64)
            };
            let per_worker = opts.exec.map_range(workers, |w| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(w as u64));
                match opts.strategy {
                    Strategy::Random => random_walk(&kernel, opts.max_n, share(w), &mut rng),
                    _ => local_search(&kernel, opts.max_n, share(w), &mut rng),
                }
            });
            pick_best(per_worker.into_iter().flatten())
        }
    };
    Ok(best.filter(|(_, t)| t.violates()).map(|((a, b), t)| ViolationCertificate {
        config: GonConfiguration { a, b },
        p,
        deficiency: t.deficiency(),
    }))
}

type Candidate = ((Vec<usize>, Vec<usize>), Terms);

/// Keeps the first candidate with the smallest deficiency.
fn pick_best(candidates: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in candidates {
        if best.as_ref().map_or(true, |b| c.1.deficiency() < b.1.deficiency()) {
            best = Some(c);
        }
    }
    best
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of ordered multiset pairs the exhaustive strategy would visit.
pub fn exhaustive_pair_count(points: usize, max_n: usize) -> u128 {
    (2..=max_n)
        .map(|n| {
            let k = binomial((points + n - 1) as u128, n as u128);
            k.saturating_mul(k)
        })
        .fold(0u128, u128::saturating_add)
}

/// All size-`n` multisets of `0..m` as non-decreasing sequences, in
/// lexicographic order.
fn multisets(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..n).rev().find(|&i| cur[i] + 1 < m) else {
            return out;
        };
        let v = cur[pos] + 1;
        cur[pos..].iter_mut().for_each(|x| *x = v);
    }
}

fn exhaustive(kernel: &Kernel, max_n: usize, exec: Exec) -> Result<Option<Candidate>> {
    let m = kernel.len();
    let count = exhaustive_pair_count(m, max_n);
    if count > EXHAUSTIVE_CAP {
        return Err(Error::SizeCap {
            what: format!("exhaustive multiset pairs for {m} points up to n={max_n}"),
            count,
            cap: EXHAUSTIVE_CAP,
        });
    }
    let mut overall = Vec::new();
    for n in 2..=max_n {
        let sets = multisets(m, n);
        let within: Vec<f64> = sets.iter().map(|s| within_sum(kernel, s)).collect();
        // The deficiency is symmetric in (a, b), so only b ≥ a is visited.
        let per_a = exec.map_range(sets.len(), |ai| {
            let mut best: Option<(usize, Terms)> = None;
            for bi in ai..sets.len() {
                let t = Terms {
                    cross: cross_sum(kernel, &sets[ai], &sets[bi]),
                    within: within[ai] + within[bi],
                };
                if best.map_or(true, |(_, b)| t.deficiency() < b.deficiency()) {
                    best = Some((bi, t));
                }
            }
            best
        });
        let candidates = per_a
            .into_iter()
            .enumerate()
            .filter_map(|(ai, best)| best.map(|(bi, t)| ((sets[ai].clone(), sets[bi].clone()), t)));
        overall.extend(pick_best(candidates));
    }
    Ok(pick_best(overall))
}

fn random_config(m: usize, max_n: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let n = rng.gen_range(2..=max_n);
    let a = (0..n).map(|_| rng.gen_range(0..m)).collect();
    let b = (0..n).map(|_| rng.gen_range(0..m)).collect();
    (a, b)
}

fn random_walk(kernel: &Kernel, max_n: usize, budget: u64, rng: &mut ChaCha8Rng) -> Option<Candidate> {
    let m = kernel.len();
    pick_best((0..budget).map(|_| {
        let (a, b) = random_config(m, max_n, rng);
        let t = Terms::of(kernel, &a, &b);
        ((a, b), t)
    }))
}

fn local_search(kernel: &Kernel, max_n: usize, budget: u64, rng: &mut ChaCha8Rng) -> Option<Candidate> {
    let m = kernel.len();
    let mut best: Option<Candidate> = None;
    let mut spent = 0u64;
    while spent < budget {
        let (mut a, mut b) = random_config(m, max_n, rng);
        let mut cur = Terms::of(kernel, &a, &b);
        spent += 1;
        loop {
            // Best single-index replacement, scored incrementally.
            let mut mv: Option<(bool, usize, usize, Terms)> = None;
            'scan: for side_a in [true, false] {
                let (this, other) = if side_a { (&a, &b) } else { (&b, &a) };
                for i in 0..this.len() {
                    let old = this[i];
                    let old_cross: f64 = other.iter().map(|&y| kernel.get(old, y)).sum();
                    let old_within: f64 = this
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &y)| kernel.get(old, y))
                        .sum();
                    for x in 0..m {
                        if x == old {
                            continue;
                        }
                        if spent >= budget {
                            break 'scan;
                        }
                        spent += 1;
                        let new_cross: f64 = other.iter().map(|&y| kernel.get(x, y)).sum();
                        let new_within: f64 = this
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, &y)| kernel.get(x, y))
                            .sum();
                        let t = Terms {
                            cross: cur.cross + new_cross - old_cross,
                            within: cur.within + new_within - old_within,
                        };
                        let target = mv.map_or(cur.deficiency(), |(.., t)| t.deficiency());
                        if t.deficiency() < target {
                            mv = Some((side_a, i, x, t));
                        }
                    }
                }
            }
            match mv {
                Some((side_a, i, x, _)) => {
                    if side_a {
                        a[i] = x;
                    } else {
                        b[i] = x;
                    }
                    // Recompute from scratch to keep rounding from drifting.
                    cur = Terms::of(kernel, &a, &b);
                }
                None => break,
            }
        }
        let mut canon = (a, b);
        canon.0.sort_unstable();
        canon.1.sort_unstable();
        best = pick_best(best.into_iter().chain(std::iter::once((canon, cur))));
    }
    best
}

/// Generalized roundness of a finite space, computed as the supremal
/// negative-type exponent.
///
/// On spaces with at most [`CROSS_CHECK_MAX_POINTS`] points the result is
/// cross-checked by exhaustive 2-gon enumeration just below `p*`.
pub fn generalized_roundness(space: &FiniteMetricSpace, tol: f64, p_max: f64) -> Result<PStarResult> {
    let result = supremal_p(space, tol, p_max)?;
    let probe = result.p_star - tol;
    if space.len() <= CROSS_CHECK_MAX_POINTS && probe > 0.0 {
        let kernel = powered(space, probe);
        if let Some(((a, b), t)) = exhaustive(&kernel, 2, Exec::Sequential)?.filter(|(_, t)| t.violates()) {
            return Err(Error::Inconsistent(format!(
                "2-gon a={a:?} b={b:?} violates at p={probe} (deficiency {}) below p*={}",
                t.deficiency(),
                result.p_star
            )));
        }
    }
    Ok(result)
}

/// Runs [`generalized_roundness`] over many spaces; results keep input order.
pub fn batch_roundness(
    spaces: &[FiniteMetricSpace],
    tol: f64,
    p_max: f64,
    exec: Exec,
) -> Vec<Result<PStarResult>> {
    exec.map_slice(spaces, |s| generalized_roundness(s, tol, p_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricSpace {
        let rows = (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
        FiniteMetricSpace::new(vec![], rows).unwrap()
    }

    fn c4() -> FiniteMetricSpace {
        let rows = vec![
            vec![0., 1., 2., 1.],
            vec![1., 0., 1., 2.],
            vec![2., 1., 0., 1.],
            vec![1., 2., 1., 0.],
        ];
        FiniteMetricSpace::new(vec![], rows).unwrap()
    }

    fn exhaustive_opts(max_n: usize) -> SearchOptions {
        SearchOptions { strategy: Strategy::Exhaustive, max_n, ..Default::default() }
    }

    #[test]
    fn identical_points_have_zero_deficiency() {
        let cfg = GonConfiguration::new(vec![1, 1, 1], vec![1, 1, 1]).unwrap();
        assert_eq!(gon_deficiency(&line(3), &cfg, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn path_witness_deficiency() {
        let cfg = GonConfiguration::new(vec![0, 2], vec![1, 1]).unwrap();
        assert_eq!(gon_deficiency(&line(3), &cfg, 2.0).unwrap(), 0.0);
        let d = gon_deficiency(&line(3), &cfg, 2.2).unwrap();
        assert!((d - (4.0 - 2f64.powf(2.2))).abs() < 1e-12);
        assert!((d + 0.595).abs() < 1e-3);
    }

    #[test]
    fn deficiency_domain_errors() {
        let bad = GonConfiguration { a: vec![0], b: vec![1] };
        assert!(matches!(gon_deficiency(&line(3), &bad, 1.0), Err(Error::Domain(_))));
        assert!(GonConfiguration::new(vec![0], vec![1]).is_err());
        assert!(GonConfiguration::new(vec![0, 1], vec![1]).is_err());
        let out = GonConfiguration { a: vec![0, 5], b: vec![1, 1] };
        assert!(gon_deficiency(&line(3), &out, 1.0).is_err());
        let ok = GonConfiguration { a: vec![0, 2], b: vec![1, 1] };
        assert!(gon_deficiency(&line(3), &ok, 0.0).is_err());
    }

    #[test]
    fn multiset_enumeration_counts() {
        assert_eq!(multisets(3, 2), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]);
        for (m, n) in [(4, 3), (5, 2), (1, 4)] {
            assert_eq!(multisets(m, n).len() as u128, binomial((m + n - 1) as u128, n as u128));
        }
        assert_eq!(exhaustive_pair_count(3, 2), 36);
    }

    #[test]
    fn exhaustive_finds_the_path_certificate() {
        let cert = search_violation(&line(3), 2.2, &exhaustive_opts(2)).unwrap().unwrap();
        assert_eq!(cert.config, GonConfiguration { a: vec![0, 2], b: vec![1, 1] });
        assert!((cert.deficiency - (4.0 - 2f64.powf(2.2))).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_finds_nothing_below_two_on_path() {
        assert!(search_violation(&line(3), 1.9, &exhaustive_opts(3)).unwrap().is_none());
    }

    #[test]
    fn exhaustive_c4_alternating() {
        let cert = search_violation(&c4(), 1.1, &exhaustive_opts(2)).unwrap().unwrap();
        assert_eq!(cert.config, GonConfiguration { a: vec![0, 2], b: vec![1, 3] });
        assert!((cert.deficiency - (4.0 - 2.0 * 2f64.powf(1.1))).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_refuses_past_the_cap() {
        let big = line(40);
        assert!(matches!(
            search_violation(&big, 2.5, &exhaustive_opts(5)),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn budget_and_size_checks() {
        let opts = SearchOptions { budget: 0, ..Default::default() };
        assert!(matches!(search_violation(&line(3), 2.2, &opts), Err(Error::Domain(_))));
        let opts = SearchOptions { max_n: 1, ..Default::default() };
        assert!(matches!(search_violation(&line(3), 2.2, &opts), Err(Error::Domain(_))));
    }

    #[test]
    fn random_and_local_find_c4_violation() {
        for strategy in [Strategy::Random, Strategy::Local] {
            let opts = SearchOptions { strategy, budget: 5_000, max_n: 3, seed: 3, ..Default::default() };
            let cert = search_violation(&c4(), 1.3, &opts).unwrap().expect("violation");
            assert!(cert.deficiency < 0.0);
            let recomputed = gon_deficiency(&c4(), &cert.config, 1.3).unwrap();
            assert!((recomputed - cert.deficiency).abs() < 1e-9);
        }
    }

    #[test]
    fn seeded_search_is_reproducible_across_exec_policies() {
        let space = line(6);
        for strategy in [Strategy::Random, Strategy::Local] {
            let base = SearchOptions { strategy, budget: 3_000, max_n: 3, seed: 11, ..Default::default() };
            let seq = search_violation(&space, 2.4, &SearchOptions { exec: Exec::Sequential, ..base }).unwrap();
            let par = search_violation(&space, 2.4, &SearchOptions { exec: Exec::Parallel, ..base }).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn deficiency_decreases_in_p_for_long_sides() {
        // Cross terms at distance 1 stay constant; the within term 2^p grows.
        let cfg = GonConfiguration::new(vec![0, 2], vec![1, 1]).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let d = gon_deficiency(&line(3), &cfg, 0.1 * k as f64).unwrap();
            assert!(d < prev);
            prev = d;
        }
        // 4·2^p − 4^p only turns decreasing once 2^p > 2.
        let cfg = GonConfiguration::new(vec![0, 4], vec![2, 2]).unwrap();
        let mut prev = f64::INFINITY;
        for k in 11..60 {
            let d = gon_deficiency(&line(5), &cfg, 0.1 * k as f64).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn generalized_roundness_examples() {
        assert!((generalized_roundness(&c4(), 1e-6, 8.0).unwrap().p_star - 1.0).abs() <= 1e-6);
        for n in [3, 4, 7] {
            let r = generalized_roundness(&line(n), 1e-6, 8.0).unwrap();
            assert!((r.p_star - 2.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("local".parse::<Strategy>().unwrap(), Strategy::Local);
        assert!("annealing".parse::<Strategy>().is_err());
    }
}
