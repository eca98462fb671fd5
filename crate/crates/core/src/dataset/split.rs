use super::Role;
use crate::error::{Error, Result};
use crate::numeric::Rng;

/// Stream id reserved for target splitting.
const SPLIT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub test: usize,
    pub labeled: usize,
    pub unlabeled: usize,
}

impl SplitCounts {
    /// Half (rounded down) of the points go to test; the training half is
    /// split again with the extra point, if any, going to the labelled side.
    pub fn for_size(n: usize) -> SplitCounts {
        let test = n / 2;
        let train = n - test;
        SplitCounts { test, labeled: train.div_ceil(2), unlabeled: train / 2 }
    }

    pub fn of(roles: &[Role]) -> SplitCounts {
        let count = |r| roles.iter().filter(|&&x| x == r).count();
        SplitCounts {
            test: count(Role::Test),
            labeled: count(Role::TrainLabeled),
            unlabeled: count(Role::TrainUnlabeled),
        }
    }
}

/// Seeded random assignment of `n` target points to test, labelled-train
/// and unlabelled-train roles.
pub fn split_target(n: usize, seed: u64) -> Result<Vec<Role>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "target domain needs at least 4 points to split, has {n}"
        )));
    }
    let counts = SplitCounts::for_size(n);
    let mut order: Vec<usize> = (0..n).collect();
    Rng::with_stream(seed, SPLIT_STREAM).shuffle(&mut order);
    let mut roles = vec![Role::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        roles[i] = if rank < counts.test {
            Role::Test
        } else if rank < counts.test + counts.labeled {
            Role::TrainLabeled
        } else {
            Role::TrainUnlabeled
        };
    }
    Ok(roles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_points() {
        let roles = split_target(12, 3).unwrap();
        assert_eq!(SplitCounts::of(&roles), SplitCounts { test: 6, labeled: 3, unlabeled: 3 });
    }

    #[test]
    fn ten_points_round_toward_labeled() {
        let roles = split_target(10, 3).unwrap();
        assert_eq!(SplitCounts::of(&roles), SplitCounts { test: 5, labeled: 3, unlabeled: 2 });
    }

    #[test]
    fn seeded() {
        assert_eq!(split_target(20, 9).unwrap(), split_target(20, 9).unwrap());
        assert_ne!(split_target(20, 9).unwrap(), split_target(20, 10).unwrap());
    }

    #[test]
    fn too_small() {
        assert!(split_target(3, 0).is_err());
        assert!(split_target(4, 0).is_ok());
    }
}
