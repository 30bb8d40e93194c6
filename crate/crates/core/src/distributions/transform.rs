use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;

use super::{Arm, PlantedInstance, ProblemKind, RowData, StreamSource};
use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::rng::{derived_rng, rng_from, Domain};

/// A row-wise rewrite applied lazily whenever a row is produced.
#[derive(Debug, Clone)]
pub(crate) enum Transform {
    ZeroColumns { rows: Arc<Vec<bool>>, columns: Arc<Vec<usize>> },
    Permute(Arc<Permutation>),
}

impl Transform {
    pub(crate) fn apply(&self, index: usize, data: &mut RowData) {
        match self {
            Transform::ZeroColumns { rows, columns } => {
                if rows.get(index).copied().unwrap_or(false) {
                    if let RowData::Bits(bits) = data {
                        for &j in columns.iter() {
                            bits.set(j, false);
                        }
                    }
                }
            }
            Transform::Permute(perm) => *data = perm.apply(data),
        }
    }
}

/// A permutation `pi` of column indices; applying it moves entry `j` to position `pi[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(&mut rng_from(seed));
        Permutation { map }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(Error::invalid("permutation", "not a bijection"));
            }
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &m) in self.map.iter().enumerate() {
            inv[m] = j;
        }
        Permutation { map: inv }
    }

    pub fn apply(&self, data: &RowData) -> RowData {
        match data {
            RowData::Bits(bits) => {
                let mut out = BitRow::zeros(bits.len());
                for j in bits.ones() {
                    out.set(self.map[j], true);
                }
                RowData::Bits(out)
            }
            RowData::Real(v) => {
                let mut out = vec![0.0; v.len()];
                for (j, &x) in v.iter().enumerate() {
                    out[self.map[j]] = x;
                }
                RowData::Real(out)
            }
        }
    }
}

/// Zeroes a random set `I` of `k - k_prime` non-plant columns in every planted row.
///
/// `I` is drawn once per stream, so every planted row loses the same
/// positions. Null-arm streams are returned unchanged.
pub fn apply_monotone_adversary(
    source: StreamSource,
    instance: &PlantedInstance,
    k_prime: usize,
) -> Result<StreamSource> {
    let spec = source.spec().clone();
    if !matches!(
        spec.kind,
        ProblemKind::Biclique | ProblemKind::DistributionalBiclique | ProblemKind::SemiRandomBiclique
    ) {
        return Err(Error::NotApplicable(format!("monotone adversary needs a biclique stream, got {}", spec.kind)));
    }
    if instance.arm == Arm::Null {
        return Ok(source);
    }
    if k_prime > spec.k {
        return Err(Error::invalid("k_prime", format!("{k_prime} exceeds k = {}", spec.k)));
    }
    let deleted = spec.k - k_prime;
    let outside: Vec<usize> = (0..spec.cols).filter(|j| instance.columns.binary_search(j).is_err()).collect();
    if deleted > outside.len() {
        return Err(Error::invalid("k_prime", "not enough non-plant columns to delete"));
    }
    if deleted == 0 {
        return Ok(source);
    }
    let mut rng = derived_rng(source.seed(), Domain::Adversary, 0);
    let mut columns: Vec<usize> = sample_indices(&mut rng, outside.len(), deleted).iter().map(|i| outside[i]).collect();
    columns.sort_unstable();
    let mut rows = vec![false; source.len()];
    for &r in &instance.rows {
        rows[r] = true;
    }
    Ok(source.with_transform(Transform::ZeroColumns { rows: Arc::new(rows), columns: Arc::new(columns) }))
}

/// Permutes the columns of every row by one random permutation derived from `seed`.
pub fn consistent_permute(source: StreamSource, seed: u64) -> StreamSource {
    let n = source.spec().cols;
    let perm = Permutation::random(n, derived_rng_seed(seed));
    consistent_permute_with(source, perm)
}

fn derived_rng_seed(seed: u64) -> u64 {
    crate::rng::derive_seed(seed, Domain::Permutation, 0)
}

/// Permutes the columns of every row by `perm`.
pub fn consistent_permute_with(source: StreamSource, perm: Permutation) -> StreamSource {
    source.with_transform(Transform::Permute(Arc::new(perm)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_stream, ProblemSpec};

    #[test]
    fn permutation_inverse_round_trips() {
        let p = Permutation::random(50, 4);
        let row = RowData::Real((0..50).map(|x| x as f64).collect());
        assert_eq!(p.inverse().apply(&p.apply(&row)), row);
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn adversary_rejects_gaussian_kinds() {
        let spec = ProblemSpec::new(ProblemKind::SparseMean, 4, 8).with_ell(2);
        let (src, inst) = make_stream(&spec, Arm::Planted, 0).unwrap();
        assert!(matches!(apply_monotone_adversary(src, &inst, 1), Err(Error::NotApplicable(_))));
    }
}
