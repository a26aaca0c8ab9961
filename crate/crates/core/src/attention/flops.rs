//! Analytic cost model.
//!
//! Only the two matrix products are counted: the `n x m` score product costs
//! `2 n m d` and the weighted value sum costs `2 n m d_v`. Softmax is ignored,
//! so the ratio depends on shapes alone.

use serde::Serialize;

use super::{AttentionError, PartSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlopReport {
    pub full_flops: u64,
    pub part_flops: u64,
    /// `full_flops / part_flops`
    pub ratio: f64,
}

impl FlopReport {
    fn new(full_flops: u64, part_flops: u64) -> Self {
        let ratio = if part_flops == 0 {
            1.0
        } else {
            full_flops as f64 / part_flops as f64
        };
        Self {
            full_flops,
            part_flops,
            ratio,
        }
    }
}

/// FLOPs of dense vs part-restricted attention.
///
/// `group_sizes[g]` is the number of queries of part `g + 1`. Without
/// `key_part_sets` this is self attention (`keys` must equal `queries`) and
/// `part = 2 (d + d_v) sum L_g^2`. With them it is cross attention and
/// `part = 2 (d + d_v) sum L_g M_g`, where `M_g` counts the keys admitting part
/// `g`; a non-empty group with `M_g = 0` attends to all keys and is charged `M`.
pub fn count_flops(
    queries: usize,
    keys: usize,
    dim: usize,
    value_dim: usize,
    group_sizes: &[usize],
    key_part_sets: Option<&[PartSet]>,
) -> Result<FlopReport, AttentionError> {
    let total: usize = group_sizes.iter().sum();
    if total != queries {
        return Err(AttentionError::GroupSizes {
            expected: queries,
            found: total,
        });
    }
    let width = 2 * (dim + value_dim) as u64;
    let (l, m) = (queries as u64, keys as u64);
    match key_part_sets {
        None => {
            if keys != queries {
                return Err(AttentionError::NotSelfAttention);
            }
            let sq: u64 = group_sizes.iter().map(|&s| (s as u64) * (s as u64)).sum();
            Ok(FlopReport::new(width * l * l, width * sq))
        }
        Some(sets) => {
            if sets.len() != keys {
                return Err(AttentionError::DimensionMismatch {
                    what: "key part sets",
                    expected: keys,
                    found: sets.len(),
                });
            }
            let mut admitted = vec![0u64; group_sizes.len()];
            for set in sets {
                for &g in set {
                    if g == 0 {
                        return Err(AttentionError::ZeroPart(0));
                    }
                    if let Some(c) = admitted.get_mut(g as usize - 1) {
                        *c += 1;
                    }
                }
            }
            let pairs: u64 = group_sizes
                .iter()
                .zip(&admitted)
                .map(|(&lg, &mg)| {
                    let mg = if mg == 0 && lg > 0 { m } else { mg };
                    lg as u64 * mg
                })
                .sum();
            Ok(FlopReport::new(width * l * m, width * pairs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_group_ratio_one() {
        let r = count_flops(8, 8, 4, 4, &[8], None).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.full_flops, 2 * 8 * 8 * 8);
    }

    #[test]
    fn singleton_groups_ratio_l() {
        let r = count_flops(8, 8, 4, 4, &[1; 8], None).unwrap();
        assert_eq!(r.ratio, 8.0);
    }

    #[test]
    fn balanced_groups_ratio_k() {
        for k in [2usize, 4, 8, 16] {
            let r = count_flops(1024, 1024, 64, 64, &vec![1024 / k; k], None).unwrap();
            assert_eq!(r.ratio, k as f64);
        }
    }

    #[test]
    fn cross_counts_admitted_keys() {
        let sets = vec![PartSet::from([1]), PartSet::from([1, 2]), PartSet::new(), PartSet::from([2])];
        let r = count_flops(3, 4, 2, 2, &[2, 1], Some(&sets)).unwrap();
        // L_1 M_1 + L_2 M_2 = 2*2 + 1*2
        assert_eq!(r.part_flops, 8 * 6);
        assert_eq!(r.full_flops, 8 * 12);
    }

    #[test]
    fn cross_fallback_group_charged_all_keys() {
        let sets = vec![PartSet::from([1]), PartSet::from([1])];
        let r = count_flops(3, 2, 1, 1, &[1, 2], Some(&sets)).unwrap();
        assert_eq!(r.part_flops, 4 * (2 + 2 * 2));
    }

    #[test]
    fn inconsistent_sizes() {
        assert!(count_flops(8, 8, 1, 1, &[3, 4], None).is_err());
        assert!(count_flops(8, 4, 1, 1, &[8], None).is_err());
        assert!(count_flops(2, 3, 1, 1, &[2], Some(&[PartSet::new()])).is_err());
    }
}
