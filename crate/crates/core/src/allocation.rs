//! NOMA pairing, channel assignment and power split per serving station.
//!
//! Each station (the macro cell and every drone) gets a disjoint block of
//! channels, one per NOMA group. Inside a block, groups are matched to
//! channels by the Hungarian method on negated group gain. The station budget
//! is split evenly across its groups and, within a pair, by the far/near
//! coefficients. Pairs that cannot support SIC are broken up, and the whole
//! pass repeats until every surviving pair is decodable.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::assignment::hungarian;
use crate::radio::{distance_m, path_gain, se_far, se_near, se_oma, sic_margin};
use crate::scenario::{ScenarioConfig, ScenarioState};
use crate::{Error, Result};

/// Serving station. The macro cell orders before every drone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StationId {
    Macro,
    Drone(usize),
}

/// A near/far pair sharing one channel, or a lone OMA user when `far_user`
/// is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NomaGroup {
    pub station: StationId,
    pub near_user: usize,
    pub far_user: Option<usize>,
    pub channel: Option<usize>,
}

impl NomaGroup {
    pub fn is_pair(&self) -> bool {
        self.far_user.is_some()
    }

    pub fn users(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.near_user).chain(self.far_user)
    }
}

/// Path gains from each station to the users it serves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainTable {
    by_station: BTreeMap<StationId, BTreeMap<usize, f64>>,
}

impl GainTable {
    /// Gains for the station/user attachment recorded in `state`.
    pub fn from_state(state: &ScenarioState, config: &ScenarioConfig) -> Self {
        let mut table = Self::default();
        let ground = |id: usize| state.vehicles[id].position.at_height(0.0);
        table.by_station.insert(StationId::Macro, BTreeMap::new());
        for &user in &state.mbs_users {
            let d = distance_m(state.mbs_position, ground(user));
            table.insert(StationId::Macro, user, path_gain(d, config.fc_ghz));
        }
        for dbs in &state.dbs_list {
            let station = StationId::Drone(dbs.id);
            table.by_station.insert(station, BTreeMap::new());
            for &user in &state.clusters[dbs.cluster_id].members {
                let d = distance_m(dbs.position, ground(user));
                table.insert(station, user, path_gain(d, config.fc_ghz));
            }
        }
        table
    }

    pub fn insert(&mut self, station: StationId, user: usize, gain: f64) {
        self.by_station
            .entry(station)
            .or_default()
            .insert(user, gain);
    }

    /// Panics if the user is not attached to the station.
    pub fn gain(&self, station: StationId, user: usize) -> f64 {
        self.by_station[&station][&user]
    }

    pub fn station(&self, station: StationId) -> Option<&BTreeMap<usize, f64>> {
        self.by_station.get(&station)
    }

    pub fn stations(&self) -> impl Iterator<Item = StationId> + '_ {
        self.by_station.keys().copied()
    }
}

/// Key of a transmit power entry: station, user, channel.
pub type PowerKey = (StationId, usize, usize);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AllocationPlan {
    /// Groups with channels set, in station order.
    pub groups: Vec<NomaGroup>,
    pub powers: BTreeMap<PowerKey, f64>,
    pub per_user_se: BTreeMap<usize, f64>,
    /// Users dropped because no spare channel could host them after a failed
    /// SIC check.
    pub unserved: BTreeSet<usize>,
    pub total_se: f64,
}

impl AllocationPlan {
    pub fn station_power(&self, station: StationId) -> f64 {
        self.powers
            .iter()
            .filter(|((s, _, _), _)| *s == station)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn power(&self, station: StationId, user: usize) -> Option<f64> {
        self.powers
            .iter()
            .find(|((s, u, _), _)| *s == station && *u == user)
            .map(|(_, &p)| p)
    }
}

/// Sorts users by gain (descending, ties by id) and pairs rank `r` with rank
/// `r + ceil(n/2)`. With an odd count the middle-ranked user is left alone.
pub fn pair_users(
    user_ids: &[usize],
    gains: &BTreeMap<usize, f64>,
    station: StationId,
) -> Vec<NomaGroup> {
    let mut ranked = user_ids.to_vec();
    ranked.sort_by(|a, b| gains[b].total_cmp(&gains[a]).then(a.cmp(b)));
    let n = ranked.len();
    let half = n.div_ceil(2);
    let mut groups: Vec<NomaGroup> = (0..n / 2)
        .map(|r| NomaGroup {
            station,
            near_user: ranked[r],
            far_user: Some(ranked[r + half]),
            channel: None,
        })
        .collect();
    if n % 2 == 1 {
        groups.push(NomaGroup {
            station,
            near_user: ranked[half - 1],
            far_user: None,
            channel: None,
        });
    }
    groups
}

/// Hands out channels in ascending index, one per group, to stations in
/// station order.
pub fn partition_channels(
    num_channels: usize,
    demands: &[(StationId, usize)],
) -> Result<BTreeMap<StationId, Vec<usize>>> {
    let demanded: usize = demands.iter().map(|(_, d)| d).sum();
    if demanded > num_channels {
        return Err(Error::InsufficientChannels {
            demanded,
            available: num_channels,
        });
    }
    let mut ordered = demands.to_vec();
    ordered.sort_by_key(|(s, _)| *s);
    let mut next = 0;
    Ok(ordered
        .into_iter()
        .map(|(station, count)| {
            let block = (next..next + count).collect();
            next += count;
            (station, block)
        })
        .collect())
}

/// Rows are groups, columns are channels; the cost of a group is its negated
/// total member gain.
pub fn build_cost_matrix(
    groups: &[NomaGroup],
    channels: &[usize],
    gains: &GainTable,
) -> Vec<Vec<f64>> {
    groups
        .iter()
        .map(|g| {
            let total: f64 = g.users().map(|u| gains.gain(g.station, u)).sum();
            vec![-total; channels.len()]
        })
        .collect()
}

/// Equal share `budget / nc` per group. In a pair the far user gets
/// `alpha_f` of the share and the near user `alpha_n`; a lone user gets all.
pub fn allocate_power(
    groups: &[NomaGroup],
    station_budget_w: f64,
    alpha_f: f64,
    alpha_n: f64,
) -> BTreeMap<usize, f64> {
    let mut powers = BTreeMap::new();
    if groups.is_empty() {
        return powers;
    }
    let share = station_budget_w / groups.len() as f64;
    for g in groups {
        match g.far_user {
            Some(far) => {
                powers.insert(far, alpha_f * share);
                powers.insert(g.near_user, alpha_n * share);
            }
            None => {
                powers.insert(g.near_user, share);
            }
        }
    }
    powers
}

/// Whether the pair's SIC margin reaches `p_tol`. Lone users always pass.
pub fn check_sic(
    group: &NomaGroup,
    powers: &BTreeMap<usize, f64>,
    gains: &GainTable,
    sigma2: f64,
    p_tol: f64,
) -> bool {
    let Some(far) = group.far_user else {
        return true;
    };
    let near = group.near_user;
    let margin = sic_margin(
        powers[&near],
        gains.gain(group.station, near),
        powers[&far],
        gains.gain(group.station, far),
        sigma2,
    );
    margin >= p_tol
}

fn group_power(plan: &AllocationPlan, group: &NomaGroup, user: usize) -> f64 {
    let channel = group.channel.expect("plan groups carry channels");
    plan.powers[&(group.station, user, channel)]
}

/// Sum of the achievable efficiencies of every group in the plan.
pub fn total_spectral_efficiency(plan: &AllocationPlan, gains: &GainTable, sigma2: f64) -> f64 {
    per_user_efficiency(plan, gains, sigma2).values().sum()
}

fn per_user_efficiency(
    plan: &AllocationPlan,
    gains: &GainTable,
    sigma2: f64,
) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for g in &plan.groups {
        let near = g.near_user;
        let h_near = gains.gain(g.station, near);
        let p_near = group_power(plan, g, near);
        match g.far_user {
            Some(far) => {
                let p_far = group_power(plan, g, far);
                let h_far = gains.gain(g.station, far);
                out.insert(far, se_far(p_far, h_far, p_near, sigma2));
                out.insert(near, se_near(p_near, h_near, sigma2));
            }
            None => {
                out.insert(near, se_oma(p_near, h_near, sigma2));
            }
        }
    }
    out
}

fn station_budget(station: StationId, config: &ScenarioConfig) -> f64 {
    match station {
        StationId::Macro => config.p_b_max,
        StationId::Drone(_) => config.p_k_max,
    }
}

/// Pairs, assigns channels and powers, and breaks SIC-infeasible pairs.
///
/// A broken pair becomes two lone users when a spare channel exists;
/// otherwise only its near user stays served. Spare channels go to the
/// broken pairs whose far user has the strongest gain.
pub fn build_plan(
    state: &ScenarioState,
    gains: &GainTable,
    config: &ScenarioConfig,
) -> Result<AllocationPlan> {
    let sigma2 = config.sigma2_w();
    let mut attached: Vec<(StationId, Vec<usize>)> =
        vec![(StationId::Macro, state.mbs_users.iter().copied().collect())];
    for dbs in &state.dbs_list {
        let members = &state.clusters[dbs.cluster_id].members;
        attached.push((StationId::Drone(dbs.id), members.iter().copied().collect()));
    }
    let mut groups: BTreeMap<StationId, Vec<NomaGroup>> = BTreeMap::new();
    for (station, users) in attached {
        let empty = BTreeMap::new();
        let table = gains.station(station).unwrap_or(&empty);
        groups.insert(station, pair_users(&users, table, station));
    }

    let mut unserved = BTreeSet::new();
    loop {
        let demands: Vec<(StationId, usize)> = groups.iter().map(|(s, g)| (*s, g.len())).collect();
        let blocks = partition_channels(config.num_channels, &demands)?;

        let mut powers: BTreeMap<StationId, BTreeMap<usize, f64>> = BTreeMap::new();
        for (station, station_groups) in groups.iter_mut() {
            let block = &blocks[station];
            let cost = build_cost_matrix(station_groups, block, gains);
            let matched = hungarian(&cost)?;
            for (g, &col) in station_groups.iter_mut().zip(&matched.columns) {
                g.channel = Some(block[col]);
            }
            powers.insert(
                *station,
                allocate_power(
                    station_groups,
                    station_budget(*station, config),
                    config.alpha_f,
                    config.alpha_n,
                ),
            );
        }

        let mut broken: Vec<(StationId, usize, f64)> = Vec::new();
        for (station, station_groups) in &groups {
            for (idx, g) in station_groups.iter().enumerate() {
                if !check_sic(g, &powers[station], gains, sigma2, config.p_tol) {
                    let far = g.far_user.expect("only pairs fail SIC");
                    broken.push((*station, idx, gains.gain(*station, far)));
                }
            }
        }

        if broken.is_empty() {
            return Ok(assemble(groups, &powers, unserved, gains, sigma2));
        }

        broken.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let in_use: usize = groups.values().map(Vec::len).sum();
        let mut spare = config.num_channels - in_use;
        let mut split_off: Vec<NomaGroup> = Vec::new();
        for (station, idx, _) in broken {
            let g = &mut groups.get_mut(&station).expect("station exists")[idx];
            let far = g.far_user.take().expect("broken groups are pairs");
            if spare > 0 {
                spare -= 1;
                split_off.push(NomaGroup {
                    station,
                    near_user: far,
                    far_user: None,
                    channel: None,
                });
            } else {
                unserved.insert(far);
            }
        }
        for g in split_off {
            groups.get_mut(&g.station).expect("station exists").push(g);
        }
    }
}

fn assemble(
    groups: BTreeMap<StationId, Vec<NomaGroup>>,
    powers: &BTreeMap<StationId, BTreeMap<usize, f64>>,
    unserved: BTreeSet<usize>,
    gains: &GainTable,
    sigma2: f64,
) -> AllocationPlan {
    let mut plan = AllocationPlan {
        unserved,
        ..AllocationPlan::default()
    };
    for (station, station_groups) in groups {
        for g in station_groups {
            let channel = g.channel.expect("assigned above");
            for user in g.users() {
                plan.powers
                    .insert((station, user, channel), powers[&station][&user]);
            }
            plan.groups.push(g);
        }
    }
    plan.per_user_se = per_user_efficiency(&plan, gains, sigma2);
    plan.total_se = plan.per_user_se.values().sum();
    plan
}
