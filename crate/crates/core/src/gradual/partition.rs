//! Independent groups of constraints: two constraints belong together when
//! they mention a common liquid variable.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constraints::{ConstraintSystem, OccurrenceId};
use crate::lang::{ConstraintId, KVarId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub id: usize,
    pub constraints: Vec<ConstraintId>,
    pub kvars: Vec<KVarId>,
    pub occurrences: Vec<OccurrenceId>,
}

impl Partition {
    pub fn is_gradual(&self) -> bool {
        !self.occurrences.is_empty()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Partition the constraints. With `enabled` unset everything forms one
/// partition. Partitions are ordered by their first constraint.
pub fn partition(cs: &ConstraintSystem, enabled: bool) -> Vec<Partition> {
    let n = cs.constraints.len();
    let mut parent: Vec<usize> = (0..n).collect();
    if enabled {
        let mut owner: BTreeMap<KVarId, usize> = BTreeMap::new();
        for (i, c) in cs.constraints.iter().enumerate() {
            for k in c.kvars() {
                match owner.get(&k) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a.max(b)] = a.min(b);
                    }
                    None => {
                        owner.insert(k, i);
                    }
                }
            }
        }
    } else {
        parent.iter_mut().for_each(|p| *p = 0);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .into_values()
        .enumerate()
        .map(|(id, members)| {
            let constraints: Vec<ConstraintId> = members.iter().map(|&i| cs.constraints[i].id).collect();
            let mut kvars: Vec<KVarId> = members.iter().flat_map(|&i| cs.constraints[i].kvars()).collect();
            kvars.sort();
            kvars.dedup();
            let occurrences =
                cs.occurrences.iter().filter(|o| constraints.contains(&o.constraint)).map(|o| o.id).collect();
            Partition { id, constraints, kvars, occurrences }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::generate;
    use crate::frontend::load;

    const TWO_BRANCHES: &str = "assume isPos :: x:Int -> Bool\n\
        sig divIf :: x:{Int | ?} -> Int\n\
        def divIf x = if isPos x then 1 / x else 1 / (1 - x)\n";

    #[test]
    fn branches_are_independent() {
        let cs = generate(&load("t.gl", TWO_BRANCHES).unwrap()).unwrap();
        let parts = partition(&cs, true);
        assert_eq!(parts.iter().filter(|p| p.is_gradual()).count(), 2);
        let all: usize = parts.iter().map(|p| p.constraints.len()).sum();
        assert_eq!(all, cs.constraints.len());
    }

    #[test]
    fn disabled_partitioning_yields_one_group() {
        let cs = generate(&load("t.gl", TWO_BRANCHES).unwrap()).unwrap();
        let parts = partition(&cs, false);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].occurrences.len(), cs.occurrences.len());
    }
}
