//! Partition of tree nodes into buckets and the bucket sampling law.

use std::collections::HashMap;

use rand::Rng;

use crate::dynamics::RobotPose;
use crate::ltl::StateId;

/// `None` distance (unreachable accept) sorts after every finite distance.
pub type Dist = u32;
pub const INF_DIST: Dist = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    Biased,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    cells: Vec<(i64, i64, i64)>,
    dfa: StateId,
}

/// Buckets `V_k` with the `K_min` / complement split kept as two index lists.
#[derive(Clone, Debug)]
pub struct BucketIndex {
    members: Vec<Vec<usize>>,
    dist: Vec<Dist>,
    keys: HashMap<Key, usize>,
    pos_quantum: f64,
    angle_quantum: f64,
    warmup: usize,
    inserted: usize,
    d_min: Dist,
    kmin: Vec<usize>,
    rest: Vec<usize>,
    // position of each bucket inside kmin or rest
    slot: Vec<(bool, usize)>,
}

impl BucketIndex {
    pub fn new(pos_quantum: f64, angle_quantum: f64, warmup: usize) -> Self {
        Self {
            members: Vec::new(),
            dist: Vec::new(),
            keys: HashMap::new(),
            pos_quantum,
            angle_quantum,
            warmup,
            inserted: 0,
            d_min: INF_DIST,
            kmin: Vec::new(),
            rest: Vec::new(),
            slot: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self, bucket: usize) -> &[usize] {
        &self.members[bucket]
    }

    pub fn occupancy(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn d_min(&self) -> Dist {
        self.d_min
    }

    pub fn kmin(&self) -> &[usize] {
        &self.kmin
    }

    pub fn complement(&self) -> &[usize] {
        &self.rest
    }

    fn key(&self, team: &[RobotPose], dfa: StateId) -> Key {
        let cells = team
            .iter()
            .map(|p| {
                (
                    (p.x / self.pos_quantum).floor() as i64,
                    (p.y / self.pos_quantum).floor() as i64,
                    (p.theta / self.angle_quantum).floor() as i64,
                )
            })
            .collect();
        Key { cells, dfa }
    }

    /// Files a node and returns its bucket. The first `warmup` nodes each get
    /// a fresh singleton bucket.
    pub fn insert(&mut self, node: usize, team: &[RobotPose], dfa: StateId, dist: Dist) -> usize {
        let bucket = if self.inserted < self.warmup {
            self.new_bucket(dist)
        } else {
            let key = self.key(team, dfa);
            match self.keys.get(&key) {
                Some(&b) => b,
                None => {
                    let b = self.new_bucket(dist);
                    self.keys.insert(key, b);
                    b
                }
            }
        };
        self.inserted += 1;
        self.members[bucket].push(node);
        if dist < self.d_min {
            self.d_min = dist;
            self.rebuild();
        }
        bucket
    }

    fn new_bucket(&mut self, dist: Dist) -> usize {
        let b = self.members.len();
        self.members.push(Vec::new());
        self.dist.push(dist);
        if dist == self.d_min {
            self.slot.push((true, self.kmin.len()));
            self.kmin.push(b);
        } else {
            self.slot.push((false, self.rest.len()));
            self.rest.push(b);
        }
        b
    }

    fn rebuild(&mut self) {
        self.kmin.clear();
        self.rest.clear();
        for b in 0..self.members.len() {
            if self.dist[b] == self.d_min {
                self.slot[b] = (true, self.kmin.len());
                self.kmin.push(b);
            } else {
                self.slot[b] = (false, self.rest.len());
                self.rest.push(b);
            }
        }
    }

    pub fn in_kmin(&self, bucket: usize) -> bool {
        self.slot[bucket].0
    }

    pub fn sample<R: Rng + ?Sized>(&self, p_rand: f64, mode: SamplingMode, rng: &mut R) -> usize {
        sample_bucket(&self.kmin, &self.rest, p_rand, mode, rng)
    }
}

/// With probability `p_rand` uniform over `kmin`, otherwise uniform over
/// `rest`; uniform over `kmin` when `rest` is empty. Uniform mode ignores
/// the split.
pub fn sample_bucket<R: Rng + ?Sized>(kmin: &[usize], rest: &[usize], p_rand: f64, mode: SamplingMode, rng: &mut R) -> usize {
    let total = kmin.len() + rest.len();
    assert!(total > 0, "at least one bucket");
    if mode == SamplingMode::Uniform {
        let i = rng.random_range(0..total);
        return if i < kmin.len() { kmin[i] } else { rest[i - kmin.len()] };
    }
    if rest.is_empty() {
        return kmin[rng.random_range(0..kmin.len())];
    }
    if kmin.is_empty() {
        return rest[rng.random_range(0..rest.len())];
    }
    if rng.random::<f64>() < p_rand {
        kmin[rng.random_range(0..kmin.len())]
    } else {
        rest[rng.random_range(0..rest.len())]
    }
}
