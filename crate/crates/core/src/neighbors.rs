//! Brute-force nearest-neighbor queries that return the whole admissible
//! answer set, and the policies that pick one representative from it.
//!
//! Every query computes the exact distance to every point, so the exact
//! nearest distance `rho` is always known and candidate sets are exact
//! filters over it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::space::{Dataset, DistanceRecord, Label};

/// Default relative tie tolerance for floating-point data.
pub const FLOAT_TIE_TOL: f64 = 1e-12;

/// Exact nearest distance plus the candidate set a query admitted.
///
/// Candidates are sorted by index and always contain the lowest-index point
/// attaining `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQueryResult {
    pub rho: f64,
    pub candidates: Vec<DistanceRecord>,
}

impl NeighborQueryResult {
    /// Number of admissible answers (`k_eps`).
    pub fn k_eps(&self) -> usize {
        self.candidates.len()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.candidates.iter().map(|c| c.index).collect()
    }

    /// Lowest index attaining the exact nearest distance.
    pub fn nearest(&self) -> usize {
        self.candidates
            .iter()
            .find(|c| c.distance == self.rho)
            .map(|c| c.index)
            .expect("candidate sets always contain the minimizer")
    }

    pub fn contains(&self, index: usize) -> bool {
        self.candidates
            .binary_search_by_key(&index, |c| c.index)
            .is_ok()
    }

    /// All points with `distance <= rho * factor`, from precomputed
    /// distances in index order.
    pub fn within_factor(distances: &[f64], factor: f64) -> Result<Self> {
        let rho = min_distance(distances)?;
        let limit = rho * factor;
        let candidates = distances
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= limit || d == rho)
            .map(|(index, &distance)| DistanceRecord { index, distance })
            .collect();
        Ok(Self { rho, candidates })
    }

    /// The `max(1, ceil(fractile·N))` closest points, boundary ties broken
    /// by smallest index, from precomputed distances in index order.
    pub fn fractile(distances: &[f64], fractile: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fractile) {
            return Err(invalid("fractile", format!("must lie in [0, 1], got {fractile}")));
        }
        let rho = min_distance(distances)?;
        let m = fractile_size(distances.len(), fractile);
        let mut order: Vec<usize> = (0..distances.len()).collect();
        order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
        order.truncate(m);
        order.sort_unstable();
        let candidates = order
            .into_iter()
            .map(|index| DistanceRecord {
                index,
                distance: distances[index],
            })
            .collect();
        Ok(Self { rho, candidates })
    }
}

fn min_distance(distances: &[f64]) -> Result<f64> {
    distances
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptyDataset)
}

/// Size of a fractile candidate set over `n` points.
pub fn fractile_size(n: usize, fractile: f64) -> usize {
    ((fractile * n as f64).ceil() as usize).clamp(1, n.max(1))
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Exact nearest distance and every point tied with it up to a relative
/// tolerance: all `i` with `d(s_i, q) <= rho·(1 + tie_tol)`.
pub fn exact_nn_set(ds: &Dataset, q: &[f64], tie_tol: f64) -> Result<NeighborQueryResult> {
    check_nonneg("tie_tol", tie_tol)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    NeighborQueryResult::within_factor(&ds.distances_to(q)?, 1.0 + tie_tol)
}

/// Every epsilon-approximate nearest neighbor of `q`: all `i` with
/// `d(s_i, q) <= (1 + epsilon)·rho`.
pub fn epsilon_candidate_set(ds: &Dataset, q: &[f64], epsilon: f64) -> Result<NeighborQueryResult> {
    check_nonneg("epsilon", epsilon)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    NeighborQueryResult::within_factor(&ds.distances_to(q)?, 1.0 + epsilon)
}

/// The closest `max(1, ceil(fractile·N))` points to `q`.
pub fn fractile_candidate_set(ds: &Dataset, q: &[f64], fractile: f64) -> Result<NeighborQueryResult> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    NeighborQueryResult::fractile(&ds.distances_to(q)?, fractile)
}

/// Fractile that shrinks with the database: `min(1, c/N)`.
///
/// Paired with [`fractile_candidate_set`] this bounds the candidate set at
/// `ceil(c)` points for every `N`.
pub fn fractile_schedule(n: usize, c: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N", "database size must be at least 1"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("c", format!("must be finite and > 0, got {c}")));
    }
    Ok((c / n as f64).min(1.0))
}

/// Label-free description of a selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    RandomUniform,
    FirstIndex,
    MinorityClass,
    WrongClass,
    Farthest,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::RandomUniform,
        PolicyKind::FirstIndex,
        PolicyKind::MinorityClass,
        PolicyKind::WrongClass,
        PolicyKind::Farthest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::RandomUniform => "random-uniform",
            PolicyKind::FirstIndex => "first-index",
            PolicyKind::MinorityClass => "minority-class",
            PolicyKind::WrongClass => "wrong-class",
            PolicyKind::Farthest => "farthest",
        }
    }

    /// Attaches the query's true label, which only `WrongClass` needs.
    pub fn bind(self, true_label: Option<Label>) -> Result<SelectionPolicy> {
        Ok(match self {
            PolicyKind::RandomUniform => SelectionPolicy::RandomUniform,
            PolicyKind::FirstIndex => SelectionPolicy::FirstIndex,
            PolicyKind::MinorityClass => SelectionPolicy::MinorityClass,
            PolicyKind::Farthest => SelectionPolicy::Farthest,
            PolicyKind::WrongClass => {
                SelectionPolicy::WrongClass(true_label.ok_or(Error::MissingLabels("wrong-class"))?)
            }
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PolicyKind::ALL.iter().map(|p| p.name()).collect();
                format!("unknown policy `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Rule for returning one representative from a candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    RandomUniform,
    FirstIndex,
    /// Prefers a candidate of the globally least frequent label.
    MinorityClass,
    /// Prefers a candidate whose label differs from the carried true label.
    WrongClass(Label),
    Farthest,
}

impl SelectionPolicy {
    pub fn kind(self) -> PolicyKind {
        match self {
            SelectionPolicy::RandomUniform => PolicyKind::RandomUniform,
            SelectionPolicy::FirstIndex => PolicyKind::FirstIndex,
            SelectionPolicy::MinorityClass => PolicyKind::MinorityClass,
            SelectionPolicy::WrongClass(_) => PolicyKind::WrongClass,
            SelectionPolicy::Farthest => PolicyKind::Farthest,
        }
    }
}

/// Least frequent label among those present; ties go to the smaller label.
pub fn minority_label(labels: &[Label]) -> Option<Label> {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .min_by_key(|&(label, count)| (count, label))
        .map(|(label, _)| label)
}

/// Picks one candidate index according to `policy`.
///
/// The label-driven policies take the lowest-index candidate with the
/// preferred label and fall back to a uniform choice when none exists.
pub fn select_representative<R: Rng + ?Sized>(
    result: &NeighborQueryResult,
    policy: SelectionPolicy,
    labels: Option<&[Label]>,
    rng: &mut R,
) -> Result<usize> {
    let cands = &result.candidates;
    if cands.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let uniform = |rng: &mut R| cands[rng.random_range(0..cands.len())].index;
    let labels_for = |name: &'static str| -> Result<&[Label]> {
        let labels = labels.ok_or(Error::MissingLabels(name))?;
        let max = cands.iter().map(|c| c.index).max().unwrap_or(0);
        if max >= labels.len() {
            return Err(Error::LabelCount {
                expected: max + 1,
                found: labels.len(),
            });
        }
        Ok(labels)
    };
    let prefer = |labels: &[Label], want: &dyn Fn(Label) -> bool, rng: &mut R| {
        cands
            .iter()
            .find(|c| want(labels[c.index]))
            .map(|c| c.index)
            .unwrap_or_else(|| uniform(rng))
    };
    Ok(match policy {
        SelectionPolicy::RandomUniform => uniform(rng),
        SelectionPolicy::FirstIndex => cands[0].index,
        SelectionPolicy::Farthest => {
            cands
                .iter()
                .fold(cands[0], |best, c| if c.distance > best.distance { *c } else { best })
                .index
        }
        SelectionPolicy::MinorityClass => {
            let labels = labels_for("minority-class")?;
            let minority = minority_label(labels).ok_or(Error::MissingLabels("minority-class"))?;
            prefer(labels, &|l| l == minority, rng)
        }
        SelectionPolicy::WrongClass(truth) => {
            let labels = labels_for("wrong-class")?;
            prefer(labels, &|l| l != truth, rng)
        }
    })
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if amplitude > 0.0 && amplitude < 0.25 {
        Ok(())
    } else {
        Err(invalid(
            "amplitude",
            format!("must lie strictly between 0 and 1/4, got {amplitude}"),
        ))
    }
}

/// Uniform draw from the L2 ball of radius `radius` in `d` dimensions.
fn ball_offset<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            return dir.into_iter().map(|x| x / norm * r).collect();
        }
    }
}

/// Shifts an integer-grid point by a uniform draw from the L2 ball of
/// radius `amplitude`.
pub fn perturb_point<R: Rng + ?Sized>(q: &[f64], amplitude: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_amplitude(amplitude)?;
    if let Some((coord, &value)) = q.iter().enumerate().find(|(_, c)| c.fract() != 0.0 || !c.is_finite()) {
        return Err(Error::NonIntegral { point: 0, coord, value });
    }
    let offset = ball_offset(q.len(), amplitude, rng);
    Ok(q.iter().zip(offset).map(|(x, o)| x + o).collect())
}

/// Perturbs every point of an integer-grid dataset independently, with
/// displacement norm strictly below `amplitude < 1/4`. Labels are kept.
///
/// Any two perturbed points keep their original distance up to less than
/// 1/2, so exact ties on the grid are broken at random while strict grid
/// orderings survive.
pub fn perturb_grid_dataset<R: Rng + ?Sized>(ds: &Dataset, amplitude: f64, rng: &mut R) -> Result<Dataset> {
    check_amplitude(amplitude)?;
    let d = ds.dim();
    if let Some(pos) = ds.coords().iter().position(|c| c.fract() != 0.0) {
        return Err(Error::NonIntegral {
            point: pos / d,
            coord: pos % d,
            value: ds.coords()[pos],
        });
    }
    let mut coords = Vec::with_capacity(ds.coords().len());
    for p in ds.points() {
        let offset = ball_offset(d, amplitude, rng);
        coords.extend(p.iter().zip(offset).map(|(x, o)| x + o));
    }
    Dataset::new(d, coords, ds.labels().map(<[Label]>::to_vec))
}
