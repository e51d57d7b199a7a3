use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;

use super::Registry;
use crate::ensembles::{StackingSpec, MAX_FOLDS, MIN_FOLDS};
use crate::error::{Error, Result};

/// GA genome: level-2 learner `level2` (1-based registry index), internal
/// stacking fold count `folds` and one membership bit per registry entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Individual {
    pub level2: usize,
    pub folds: usize,
    pub members: Vec<bool>,
}

impl Individual {
    pub fn new(level2: usize, folds: usize, members: Vec<bool>) -> Result<Self> {
        let ind = Individual { level2, folds, members };
        ind.check(ind.members.len())?;
        Ok(ind)
    }

    /// Builds a genome from 1-based member indices.
    pub fn from_indices(level2: usize, folds: usize, indices: &[usize], registry_len: usize) -> Result<Self> {
        let mut members = vec![false; registry_len];
        for &i in indices {
            if i == 0 || i > registry_len {
                return Err(Error::param(format!("member index {i} outside 1..={registry_len}")));
            }
            members[i - 1] = true;
        }
        Individual::new(level2, folds, members)
    }

    pub fn check(&self, registry_len: usize) -> Result<()> {
        if self.members.len() != registry_len {
            return Err(Error::Dimension { expected: registry_len, actual: self.members.len() });
        }
        if self.level2 == 0 || self.level2 > registry_len {
            return Err(Error::param(format!("level-2 index {} outside 1..={registry_len}", self.level2)));
        }
        if !(MIN_FOLDS..=MAX_FOLDS).contains(&self.folds) {
            return Err(Error::param(format!("folds {} outside {MIN_FOLDS}..={MAX_FOLDS}", self.folds)));
        }
        if self.size() == 0 {
            return Err(Error::param("genome has no members"));
        }
        Ok(())
    }

    /// Number of level-1 members.
    pub fn size(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    /// 1-based indices of the set bits.
    pub fn member_indices(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect()
    }

    pub fn to_stacking(&self, registry: &Registry) -> Result<StackingSpec> {
        self.check(registry.len())?;
        let ensemble = self
            .member_indices()
            .into_iter()
            .map(|i| registry.get(i).expect("checked index").clone())
            .collect();
        let level2 = registry.get(self.level2).expect("checked index").clone();
        Ok(StackingSpec::new(ensemble, level2, self.folds))
    }

    /// Inverse of [`to_stacking`](Self::to_stacking). Members must be
    /// registry entries; duplicates collapse to one bit.
    pub fn from_stacking(spec: &StackingSpec, registry: &Registry) -> Result<Self> {
        let find = |s: &crate::learners::LearnerSpec| {
            registry
                .position_of(s)
                .ok_or_else(|| Error::param(format!("learner `{}` is not in the registry", s.display_name())))
        };
        let level2 = find(&spec.level2)?;
        let indices = spec.ensemble.iter().map(find).collect::<Result<Vec<_>>>()?;
        Individual::from_indices(level2, spec.folds, &indices, registry.len())
    }

    /// Readable layout: level-2 learner, folds and members by name.
    pub fn describe(&self, registry: &Registry) -> String {
        let mut s = String::new();
        s.push_str(&format!("level2 = {}\n", registry.name(self.level2).unwrap_or("?")));
        s.push_str(&format!("folds = {}\n", self.folds));
        s.push_str("members:\n");
        for i in self.member_indices() {
            s.push_str(&format!("  {:>3}  {}\n", i, registry.name(i).unwrap_or("?")));
        }
        s
    }
}

impl fmt::Display for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.member_indices().iter().map(|i| i.to_string()).collect();
        write!(f, "l2={} folds={} members={}", self.level2, self.folds, members.join("+"))
    }
}

impl FromStr for Individual {
    type Err = Error;

    /// Parses the `Display` form. The registry length is not encoded, so
    /// the bit vector ends at the largest member; use
    /// [`Individual::from_indices`] to widen it.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("malformed genome `{s}`"));
        let mut level2 = None;
        let mut folds = None;
        let mut members = None;
        for part in s.split_whitespace() {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k {
                "l2" => level2 = Some(v.parse::<usize>().map_err(|_| bad())?),
                "folds" => folds = Some(v.parse::<usize>().map_err(|_| bad())?),
                "members" => {
                    members = Some(
                        v.split('+')
                            .map(|x| x.parse::<usize>().map_err(|_| bad()))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                _ => return Err(bad()),
            }
        }
        let (level2, folds, members) = (level2.ok_or_else(bad)?, folds.ok_or_else(bad)?, members.ok_or_else(bad)?);
        let len = members.iter().copied().chain([level2]).max().unwrap_or(0);
        Individual::from_indices(level2, folds, &members, len)
    }
}

/// Sets one uniformly chosen bit when `members` is empty.
fn repair<R: Rng + ?Sized>(members: &mut [bool], rng: &mut R) {
    if !members.iter().any(|&b| b) && !members.is_empty() {
        let i = rng.random_range(0..members.len());
        members[i] = true;
    }
}

/// With a fair coin, applies [`mutate_level2`] or [`mutate_folds`].
pub fn mutate_m<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> Individual {
    if rng.random_bool(0.5) {
        mutate_level2(ind, rng)
    } else {
        mutate_folds(ind, rng)
    }
}

/// Redraws the level-2 index uniformly from the whole registry.
pub fn mutate_level2<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> Individual {
    Individual { level2: rng.random_range(1..=ind.members.len()), ..ind.clone() }
}

/// Redraws the fold count uniformly from 2..=6.
pub fn mutate_folds<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> Individual {
    Individual { folds: rng.random_range(MIN_FOLDS..=MAX_FOLDS), ..ind.clone() }
}

/// Flips one uniformly chosen membership bit, repairing an emptied vector.
pub fn mutate_v<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> Individual {
    let position = rng.random_range(0..ind.members.len());
    flip_at(ind, position, rng)
}

/// `mutate_v` with the flipped (0-based) position fixed.
pub(crate) fn flip_at<R: Rng + ?Sized>(ind: &Individual, position: usize, rng: &mut R) -> Individual {
    let mut out = ind.clone();
    out.members[position] = !out.members[position];
    repair(&mut out.members, rng);
    out
}

/// One-point crossover: head and first `i` bits from `p`, remaining bits
/// from `q`, with `i` uniform in `1..=|BL|`.
pub fn crossover<R: Rng + ?Sized>(p: &Individual, q: &Individual, rng: &mut R) -> Result<Individual> {
    if p.members.len() != q.members.len() {
        return Err(Error::Dimension { expected: p.members.len(), actual: q.members.len() });
    }
    let i = rng.random_range(1..=p.members.len());
    Ok(crossover_at(p, q, i, rng))
}

/// Crossover with the cut point fixed: bits `1..=i` (1-based) from `p`.
pub(crate) fn crossover_at<R: Rng + ?Sized>(p: &Individual, q: &Individual, i: usize, rng: &mut R) -> Individual {
    let mut members = p.members[..i].to_vec();
    members.extend_from_slice(&q.members[i..]);
    repair(&mut members, rng);
    Individual { level2: p.level2, folds: p.folds, members }
}

/// Clears uniformly chosen set bits until at most `limit` remain.
pub fn enforce_size_limit<R: Rng + ?Sized>(ind: &Individual, limit: usize, rng: &mut R) -> Individual {
    let limit = limit.max(1);
    let set = ind.member_indices();
    if set.len() <= limit {
        return ind.clone();
    }
    let mut out = ind.clone();
    for k in sample(rng, set.len(), set.len() - limit) {
        out.members[set[k] - 1] = false;
    }
    out
}

/// Random genome: uniform level-2 index and folds, each bit set with
/// probability `min(0.1, limit / |BL|)`, then repaired and limited.
pub fn random_individual<R: Rng + ?Sized>(registry_len: usize, size_limit: Option<usize>, rng: &mut R) -> Individual {
    let level2 = rng.random_range(1..=registry_len);
    let folds = rng.random_range(MIN_FOLDS..=MAX_FOLDS);
    let p = match size_limit {
        Some(l) => (l as f64 / registry_len as f64).min(0.1),
        None => 0.1,
    };
    let mut members: Vec<bool> = (0..registry_len).map(|_| rng.random_bool(p)).collect();
    repair(&mut members, rng);
    let ind = Individual { level2, folds, members };
    match size_limit {
        Some(l) => enforce_size_limit(&ind, l, rng),
        None => ind,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn ind(level2: usize, folds: usize, bits: &[u8]) -> Individual {
        Individual::new(level2, folds, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn crossover_fixed_cut() {
        let mut rng = seed::rng(1);
        let p = ind(3, 4, &[1, 0, 1, 1, 0, 0, 0]);
        let q = ind(7, 2, &[0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(crossover_at(&p, &q, 2, &mut rng), ind(3, 4, &[1, 0, 0, 0, 0, 0, 0]));
        assert_eq!(crossover_at(&p, &q, 7, &mut rng), p);
        assert_eq!(crossover_at(&p, &p, 3, &mut rng), p);
    }

    #[test]
    fn crossover_head_from_first_parent() {
        let mut rng = seed::rng(2);
        let p = ind(1, 6, &[1, 0, 0, 0]);
        let q = ind(4, 2, &[0, 0, 0, 1]);
        for _ in 0..200 {
            let c = crossover(&p, &q, &mut rng).unwrap();
            assert_eq!((c.level2, c.folds), (1, 6));
            assert!(c.size() >= 1);
        }
        assert!(crossover(&p, &ind(1, 2, &[1, 0]), &mut rng).is_err());
    }

    #[test]
    fn mutate_v_repairs() {
        let mut rng = seed::rng(3);
        let x = ind(1, 3, &[1, 0, 0]);
        let y = flip_at(&x, 0, &mut rng);
        assert_eq!(y.size(), 1);
        let z = flip_at(&ind(1, 3, &[1, 1, 0]), 1, &mut rng);
        assert_eq!(z, ind(1, 3, &[1, 0, 0]));
    }

    #[test]
    fn mutate_m_single_entry() {
        let mut rng = seed::rng(4);
        let x = ind(1, 3, &[1]);
        for _ in 0..100 {
            let y = mutate_m(&x, &mut rng);
            assert_eq!(y.level2, 1);
            assert_eq!(y.members, x.members);
            assert!((2..=6).contains(&y.folds));
        }
    }

    #[test]
    fn size_limit() {
        let mut rng = seed::rng(5);
        let x = ind(1, 3, &[1, 1, 1, 0, 1, 1, 1, 1, 0]);
        let y = enforce_size_limit(&x, 5, &mut rng);
        assert_eq!(y.size(), 5);
        assert!(y.members.iter().zip(&x.members).all(|(&a, &b)| !a || b));
        assert_eq!(enforce_size_limit(&ind(1, 2, &[1, 0, 1, 1]), 5, &mut rng), ind(1, 2, &[1, 0, 1, 1]));
        assert_eq!(enforce_size_limit(&x, 1, &mut rng).size(), 1);
    }

    #[test]
    fn display_round_trip() {
        let x = Individual::from_indices(12, 4, &[1, 3, 18], 20).unwrap();
        assert_eq!(x.to_string(), "l2=12 folds=4 members=1+3+18");
        let y: Individual = x.to_string().parse().unwrap();
        assert_eq!(y.member_indices(), x.member_indices());
        assert_eq!((y.level2, y.folds), (12, 4));
        assert!("l2=1 folds=9 members=1".parse::<Individual>().is_err());
        assert!("garbage".parse::<Individual>().is_err());
    }

    #[test]
    fn random_individuals_valid() {
        let mut rng = seed::rng(6);
        for _ in 0..500 {
            let x = random_individual(104, Some(5), &mut rng);
            x.check(104).unwrap();
            assert!(x.size() <= 5);
        }
    }
}
