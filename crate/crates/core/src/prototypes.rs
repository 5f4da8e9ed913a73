//! How many prototypes each kernel gets, and which training instances
//! supply them.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distances::{CostMatrixWorkspace, DistanceCallCounter, DistanceMeasure};
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Per-channel activations of one series under one kernel.
pub type Activation = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSet {
    pub activations: Vec<Activation>,
    pub source_indices: Vec<usize>,
}

impl PrototypeSet {
    pub fn len(&self) -> usize {
        self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    #[serde(alias = "random")]
    UniformRandom,
    Stratified,
    #[serde(alias = "kmeanspp")]
    KmeansppInit,
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" | "uniform" | "uniform_random" => Ok(Self::UniformRandom),
            "stratified" => Ok(Self::Stratified),
            "kmeanspp" | "kmeans++" | "kmeanspp_init" => Ok(Self::KmeansppInit),
            other => Err(Error::InvalidConfig(format!(
                "unknown selection {other:?}, expected random, stratified or kmeanspp"
            ))),
        }
    }
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UniformRandom => "random",
            Self::Stratified => "stratified",
            Self::KmeansppInit => "kmeanspp",
        })
    }
}

/// `⌈log_base(n)⌉`, at least 1.
///
/// Counted by repeated multiplication so exact powers of the base do not
/// round up through floating-point logarithms.
pub fn prototype_count(n: usize, base: f64) -> usize {
    assert!(base > 1.0 && base.is_finite(), "log base must exceed 1");
    let target = n as f64;
    let mut power = 1.0;
    let mut count = 0;
    while power < target {
        power *= base;
        count += 1;
    }
    count.max(1)
}

fn check_size(requested: usize, available: usize) -> Result<()> {
    if requested == 0 || requested > available {
        return Err(Error::TooFewInstances {
            requested,
            available,
        });
    }
    Ok(())
}

/// `count` distinct indices from `0..n`, uniformly without replacement.
pub fn select_uniform(n: usize, count: usize, stream: &RandomStream) -> Result<Vec<usize>> {
    check_size(count, n)?;
    let mut rng = stream.rng();
    Ok(index::sample(&mut rng, n, count).into_vec())
}

/// Largest-remainder apportionment of `count` over class sizes. Ties in the
/// remainder go to the lower class index.
pub fn stratified_quotas(class_sizes: &[usize], count: usize) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let mut quotas: Vec<usize> = class_sizes.iter().map(|&s| s * count / n).collect();
    // remainders as exact integers: (s·count) mod n
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse((class_sizes[c] * count) % n));
    let mut left = count - quotas.iter().sum::<usize>();
    for &c in order.iter().cycle().take(order.len() * 2) {
        if left == 0 {
            break;
        }
        if quotas[c] < class_sizes[c] {
            quotas[c] += 1;
            left -= 1;
        }
    }
    quotas
}

/// Sample each class in proportion to its prevalence.
pub fn select_stratified(labels: &[usize], count: usize, stream: &RandomStream) -> Result<Vec<usize>> {
    check_size(count, labels.len())?;
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let quotas = stratified_quotas(&sizes, count);
    let mut rng = stream.rng();
    let mut chosen = Vec::with_capacity(count);
    for (pool, &quota) in members.iter().zip(&quotas) {
        if quota > 0 {
            chosen.extend(index::sample(&mut rng, pool.len(), quota).iter().map(|k| pool[k]));
        }
    }
    Ok(chosen)
}

/// KMeans++ seeding over `n` items without any Lloyd iterations. The first
/// center is uniform; each later one is drawn with probability proportional
/// to its distance from the nearest chosen center. If every remaining
/// distance is zero the draw falls back to uniform over the remaining items.
///
/// Nearest-center distances are updated incrementally, so `distance` is
/// called `Σ_{j=1}^{count-1} (n - j)` times.
pub fn kmeanspp_init_by<F>(n: usize, count: usize, stream: &RandomStream, mut distance: F) -> Result<Vec<usize>>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    check_size(count, n)?;
    let mut rng = stream.rng();
    let mut is_center = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut centers = Vec::with_capacity(count);
    let mut newest = rng.random_range(0..n);
    loop {
        is_center[newest] = true;
        centers.push(newest);
        if centers.len() == count {
            return Ok(centers);
        }
        for x in 0..n {
            if !is_center[x] {
                nearest[x] = nearest[x].min(distance(x, newest)?);
            }
        }
        let total: f64 = (0..n).filter(|&x| !is_center[x]).map(|x| nearest[x]).sum();
        newest = if total > 0.0 && total.is_finite() {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = None;
            for x in (0..n).filter(|&x| !is_center[x] && nearest[x] > 0.0) {
                acc += nearest[x];
                pick = Some(x);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let remaining: Vec<usize> = (0..n).filter(|&x| !is_center[x]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
    }
}

/// KMeans++ seeding on univariate activations under `measure`, recording
/// every distance on `counter`.
pub fn select_kmeanspp_init(
    activations: &[Vec<f64>],
    count: usize,
    measure: &DistanceMeasure,
    stream: &RandomStream,
    counter: &DistanceCallCounter,
) -> Result<Vec<usize>> {
    let mut ws = CostMatrixWorkspace::new();
    kmeanspp_init_by(activations.len(), count, stream, |x, c| {
        counter.measure(measure, &activations[x], &activations[c], &mut ws)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::MeasureKind;
    use std::collections::HashSet;

    #[test]
    fn count_examples() {
        assert_eq!(prototype_count(10, 4.0), 2);
        assert_eq!(prototype_count(5000, 4.0), 7);
        assert_eq!(prototype_count(16, 4.0), 2);
        assert_eq!(prototype_count(64, 4.0), 3);
        assert_eq!(prototype_count(65, 4.0), 4);
        assert_eq!(prototype_count(2, 4.0), 1);
        assert_eq!(prototype_count(4, 4.0), 1);
        assert_eq!(prototype_count(100, 4.0), 4);
        assert_eq!(prototype_count(1000, 10.0), 3);
    }

    #[test]
    fn uniform_all_when_full() {
        let mut got = select_uniform(7, 7, &RandomStream::new(1)).unwrap();
        got.sort();
        assert_eq!(got, (0..7).collect::<Vec<_>>());
        assert!(matches!(
            select_uniform(3, 4, &RandomStream::new(1)),
            Err(Error::TooFewInstances { .. })
        ));
    }

    #[test]
    fn uniform_is_deterministic() {
        let s = RandomStream::new(42).derive("proto", 3);
        assert_eq!(select_uniform(100, 5, &s).unwrap(), select_uniform(100, 5, &s).unwrap());
    }

    #[test]
    fn uniform_frequencies() {
        let master = RandomStream::new(5);
        let mut hits = [0usize; 100];
        let trials = 10_000;
        for t in 0..trials {
            for i in select_uniform(100, 5, &master.derive("trial", t)).unwrap() {
                hits[i] += 1;
            }
        }
        for h in hits {
            let f = h as f64 / trials as f64;
            assert!((f - 0.05).abs() <= 0.01, "{f}");
        }
    }

    #[test]
    fn quotas_examples() {
        assert_eq!(stratified_quotas(&[50, 50], 2), vec![1, 1]);
        assert_eq!(stratified_quotas(&[90, 10], 2), vec![2, 0]);
        assert_eq!(stratified_quotas(&[30], 3), vec![3]);
        assert_eq!(stratified_quotas(&[1, 1, 1], 2), vec![1, 1, 0]);
    }

    #[test]
    fn stratified_picks_from_each_class() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let got = select_stratified(&labels, 2, &RandomStream::new(9)).unwrap();
        let classes: HashSet<usize> = got.iter().map(|&i| labels[i]).collect();
        assert_eq!(classes.len(), 2);
        let single = vec![0usize; 10];
        assert_eq!(select_stratified(&single, 3, &RandomStream::new(9)).unwrap().len(), 3);
    }

    #[test]
    fn kmeanspp_single_center_is_free() {
        let counter = DistanceCallCounter::new();
        let acts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let m = DistanceMeasure::unbanded(MeasureKind::Euclidean);
        let got = select_kmeanspp_init(&acts, 1, &m, &RandomStream::new(0), &counter).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(counter.get(), 0);
    }

    #[test]
    fn kmeanspp_zero_weight_points_never_chosen() {
        // points {0, 0, 10}; once index 0 is the first center only index 2 has weight
        let acts = vec![vec![0.0], vec![0.0], vec![10.0]];
        let m = DistanceMeasure::unbanded(MeasureKind::Euclidean);
        let mut seen_first_zero = 0;
        for seed in 0..200 {
            let counter = DistanceCallCounter::new();
            let got = select_kmeanspp_init(&acts, 2, &m, &RandomStream::new(seed), &counter).unwrap();
            if got[0] == 0 {
                seen_first_zero += 1;
                assert_eq!(got[1], 2);
            }
            assert_eq!(counter.get(), 2);
        }
        assert!(seen_first_zero > 0);
    }

    #[test]
    fn kmeanspp_degenerate_falls_back_to_uniform() {
        let acts = vec![vec![1.0]; 6];
        let m = DistanceMeasure::unbanded(MeasureKind::Euclidean);
        let counter = DistanceCallCounter::new();
        let got = select_kmeanspp_init(&acts, 4, &m, &RandomStream::new(3), &counter).unwrap();
        assert_eq!(got.iter().collect::<HashSet<_>>().len(), 4);
        assert!(counter.get() <= 3 * 5);
    }

    #[test]
    fn strategy_names() {
        for s in ["random", "stratified", "kmeanspp"] {
            assert_eq!(s.parse::<SelectionStrategy>().unwrap().to_string(), s);
        }
        assert!("best".parse::<SelectionStrategy>().is_err());
    }
}
