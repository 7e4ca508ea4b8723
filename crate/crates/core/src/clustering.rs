//! Mobility-aware DBSCAN and drone placement.
//!
//! A seed vehicle gathers its ε-neighbors, computes their centroid once and
//! drops every neighbor that lies outside drone coverage of that centroid,
//! drives at a dissimilar speed, or is predicted to end up in another grid
//! cell. With at least `min_points` survivors the seed opens a cluster, which
//! then grows through core members the way DBSCAN does. Speed and prediction
//! checks always compare against the cluster seed.
//!
//! Growth is guarded: a candidate is admitted only if, with the centroid
//! recomputed, at most one existing member falls out of coverage. That member
//! is evicted back to the unassigned pool.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Point3};
use crate::mobility::{same_predicted_region, speed_similar, Vehicle};
use crate::scenario::ScenarioConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Vehicle that opened the cluster.
    pub seed: usize,
    pub members: BTreeSet<usize>,
    /// Mean member position.
    pub centroid: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbsStation {
    pub id: usize,
    pub cluster_id: usize,
    pub position: Point3,
    pub power_budget_w: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    /// Vehicles left to the macro cell.
    pub unclustered: BTreeSet<usize>,
}

/// Which filters of the clustering pass are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterRules {
    /// Drop candidates farther than `r_k` from the centroid.
    pub coverage: bool,
    /// Drop candidates whose speed differs from the seed by `theta_kmh` or more.
    pub speed: bool,
    /// Drop candidates predicted in a different grid cell than the seed.
    pub prediction: bool,
    /// Allow one coverage eviction per admitted candidate during growth.
    pub expansion_guard: bool,
}

impl ClusterRules {
    pub const PROPOSED: Self = Self {
        coverage: true,
        speed: true,
        prediction: true,
        expansion_guard: true,
    };

    /// Textbook ε / MinPoints DBSCAN.
    pub const PLAIN: Self = Self {
        coverage: false,
        speed: false,
        prediction: false,
        expansion_guard: false,
    };
}

fn vehicle(vehicles: &[Vehicle], id: usize) -> Result<&Vehicle> {
    vehicles
        .get(id)
        .filter(|v| v.id == id)
        .ok_or(Error::UnknownVehicle(id))
}

fn check_dense_ids(vehicles: &[Vehicle]) -> Result<()> {
    match vehicles.iter().enumerate().find(|(i, v)| v.id != *i) {
        Some((_, v)) => Err(Error::UnknownVehicle(v.id)),
        None => Ok(()),
    }
}

/// Every other vehicle within planar distance `epsilon_m` of vehicle `i`.
///
/// Vehicle ids must equal their index in `vehicles`.
pub fn neighbors(i: usize, vehicles: &[Vehicle], epsilon_m: f64) -> Result<BTreeSet<usize>> {
    let origin = vehicle(vehicles, i)?.position;
    Ok(vehicles
        .iter()
        .filter(|v| v.id != i && v.position.distance(origin) <= epsilon_m)
        .map(|v| v.id)
        .collect())
}

/// Mean position of the given vehicles.
pub fn centroid(members: &BTreeSet<usize>, vehicles: &[Vehicle]) -> Result<Point2> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let mut sum = Point2::default();
    for &id in members {
        sum = sum + vehicle(vehicles, id)?.position;
    }
    Ok(sum.scale(1.0 / members.len() as f64))
}

/// Removes from `candidates` every vehicle that is outside drone coverage of
/// the centroid of `{i} ∪ candidates`, fails the speed window with `i`, or
/// is predicted in a different cell than `i`.
pub fn filter_neighbors(
    i: usize,
    candidates: &BTreeSet<usize>,
    vehicles: &[Vehicle],
    config: &ScenarioConfig,
) -> Result<BTreeSet<usize>> {
    filter_candidates(i, i, candidates, vehicles, config, ClusterRules::PROPOSED)
}

/// `anchor` joins the candidates for the centroid; `reference` is the vehicle
/// the speed and prediction checks compare against.
fn filter_candidates(
    anchor: usize,
    reference: usize,
    candidates: &BTreeSet<usize>,
    vehicles: &[Vehicle],
    config: &ScenarioConfig,
    rules: ClusterRules,
) -> Result<BTreeSet<usize>> {
    let mut with_anchor = candidates.clone();
    with_anchor.insert(anchor);
    let center = centroid(&with_anchor, vehicles)?;
    let reference = vehicle(vehicles, reference)?;

    let mut kept = BTreeSet::new();
    for &j in candidates {
        let v = vehicle(vehicles, j)?;
        if rules.coverage && v.position.distance(center) > config.r_k {
            continue;
        }
        if rules.speed && !speed_similar(reference, v, config.theta_kmh) {
            continue;
        }
        if rules.prediction && !same_predicted_region(reference, v, config) {
            continue;
        }
        kept.insert(j);
    }
    Ok(kept)
}

fn outside_coverage(
    members: &BTreeSet<usize>,
    vehicles: &[Vehicle],
    r_k: f64,
) -> Result<Vec<(usize, f64)>> {
    let center = centroid(members, vehicles)?;
    Ok(members
        .iter()
        .map(|&m| (m, vehicles[m].position.distance(center)))
        .filter(|&(_, d)| d > r_k)
        .collect())
}

/// Drops the farthest non-seed member until everyone is covered by the
/// centroid. Returns `false` if the seed itself cannot be covered.
fn trim_to_coverage(
    members: &mut BTreeSet<usize>,
    seed: usize,
    vehicles: &[Vehicle],
    r_k: f64,
) -> Result<bool> {
    loop {
        let out = outside_coverage(members, vehicles, r_k)?;
        if out.is_empty() {
            return Ok(true);
        }
        let worst =
            out.iter()
                .filter(|(m, _)| *m != seed)
                .fold(None::<(usize, f64)>, |best, &(m, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((m, d)),
                });
        match worst {
            Some((m, _)) => {
                members.remove(&m);
            }
            None => return Ok(false),
        }
    }
}

enum Admission {
    Rejected,
    Admitted { evicted: Option<usize> },
}

fn admit(
    members: &mut BTreeSet<usize>,
    candidate: usize,
    seed: usize,
    vehicles: &[Vehicle],
    config: &ScenarioConfig,
    rules: ClusterRules,
) -> Result<Admission> {
    members.insert(candidate);
    if !rules.coverage {
        return Ok(Admission::Admitted { evicted: None });
    }
    let out = outside_coverage(members, vehicles, config.r_k)?;
    let allowed = usize::from(rules.expansion_guard);
    let blocked = out.len() > allowed || out.iter().any(|&(m, _)| m == candidate || m == seed);
    if blocked {
        members.remove(&candidate);
        return Ok(Admission::Rejected);
    }
    let Some(&(evicted, _)) = out.first() else {
        return Ok(Admission::Admitted { evicted: None });
    };
    members.remove(&evicted);
    if outside_coverage(members, vehicles, config.r_k)?.is_empty() {
        Ok(Admission::Admitted {
            evicted: Some(evicted),
        })
    } else {
        members.insert(evicted);
        members.remove(&candidate);
        Ok(Admission::Rejected)
    }
}

/// Clusters vehicles with every filter enabled.
pub fn form_clusters(vehicles: &[Vehicle], config: &ScenarioConfig) -> Result<Clustering> {
    form_clusters_with(vehicles, config, ClusterRules::PROPOSED)
}

/// Clusters vehicles in ascending id order under the given rules.
pub fn form_clusters_with(
    vehicles: &[Vehicle],
    config: &ScenarioConfig,
    rules: ClusterRules,
) -> Result<Clustering> {
    check_dense_ids(vehicles)?;
    let n = vehicles.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<BTreeSet<usize>> = Vec::new();
    let mut seeds = Vec::new();

    for seed in 0..n {
        if owner[seed].is_some() {
            continue;
        }
        let ngb: BTreeSet<usize> = neighbors(seed, vehicles, config.epsilon_m)?
            .into_iter()
            .filter(|&j| owner[j].is_none())
            .collect();
        let kept = filter_candidates(seed, seed, &ngb, vehicles, config, rules)?;
        if kept.len() < config.min_points {
            continue;
        }
        let mut members = kept;
        members.insert(seed);
        if rules.coverage && !trim_to_coverage(&mut members, seed, vehicles, config.r_k)? {
            continue;
        }
        if members.len() < config.min_points + 1 {
            continue;
        }

        let k = clusters.len();
        for &m in &members {
            owner[m] = Some(k);
        }
        let mut queue: VecDeque<usize> = members.iter().copied().filter(|&m| m != seed).collect();
        while let Some(m) = queue.pop_front() {
            if owner[m] != Some(k) {
                continue;
            }
            let ngb_m: BTreeSet<usize> = neighbors(m, vehicles, config.epsilon_m)?
                .into_iter()
                .filter(|&j| owner[j].is_none() || owner[j] == Some(k))
                .collect();
            let kept_m = filter_candidates(m, seed, &ngb_m, vehicles, config, rules)?;
            if kept_m.len() < config.min_points {
                continue;
            }
            for c in kept_m {
                if owner[c].is_some() {
                    continue;
                }
                if let Admission::Admitted { evicted } =
                    admit(&mut members, c, seed, vehicles, config, rules)?
                {
                    owner[c] = Some(k);
                    queue.push_back(c);
                    if let Some(e) = evicted {
                        owner[e] = None;
                    }
                }
            }
        }
        clusters.push(members);
        seeds.push(seed);
    }

    let clusters = clusters
        .into_iter()
        .zip(seeds)
        .enumerate()
        .map(|(id, (members, seed))| {
            Ok(Cluster {
                id,
                seed,
                centroid: centroid(&members, vehicles)?,
                members,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unclustered = (0..n).filter(|&i| owner[i].is_none()).collect();
    Ok(Clustering {
        clusters,
        unclustered,
    })
}

/// One drone per cluster, hovering over the centroid at `dbs_altitude_m`.
pub fn place_dbs(clusters: &[Cluster], config: &ScenarioConfig) -> Vec<DbsStation> {
    clusters
        .iter()
        .enumerate()
        .map(|(id, c)| DbsStation {
            id,
            cluster_id: c.id,
            position: c.centroid.at_height(config.dbs_altitude_m),
            power_budget_w: config.p_k_max,
        })
        .collect()
}
