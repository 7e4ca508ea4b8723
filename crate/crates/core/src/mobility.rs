//! Vehicle population, waypoint motion and the two similarity predicates used
//! by clustering.
//!
//! Vehicles either cruise between uniformly drawn waypoints or queue at one of
//! a few congestion hotspots. Several flows converge on each hotspot from
//! random directions; a flow lines up behind the hotspot along its approach
//! and its vehicles share a narrow speed band.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::scenario::{ScenarioConfig, SimRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: usize,
    pub position: Point2,
    pub destination: Point2,
    pub speed_kmh: f64,
    /// Unit vector from `position` toward `destination`.
    pub heading: Point2,
}

impl Vehicle {
    /// Builds a vehicle, deriving the heading from position and destination.
    /// A vehicle sitting on its destination gets heading `(1, 0)`.
    pub fn new(id: usize, position: Point2, destination: Point2, speed_kmh: f64) -> Self {
        Self {
            id,
            position,
            destination,
            speed_kmh,
            heading: heading_between(position, destination),
        }
    }

    pub fn speed_mps(&self) -> f64 {
        kmh_to_mps(self.speed_kmh)
    }
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh * 1000.0 / 3600.0
}

fn heading_between(from: Point2, to: Point2) -> Point2 {
    let delta = to - from;
    let len = delta.norm();
    if len > 0.0 {
        delta.scale(1.0 / len)
    } else {
        Point2::new(1.0, 0.0)
    }
}

fn uniform_point(side: f64, rng: &mut SimRng) -> Point2 {
    Point2::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
}

fn uniform_speed(config: &ScenarioConfig, rng: &mut SimRng) -> f64 {
    rng.random_range(config.speed_min_kmh..=config.speed_max_kmh)
}

/// Destination drawn uniformly over the arena, distinct from `from`.
fn fresh_destination(from: Point2, side: f64, rng: &mut SimRng) -> Point2 {
    loop {
        let p = uniform_point(side, rng);
        if p != from {
            return p;
        }
    }
}

struct Flow {
    /// Unit vector from the hotspot toward the tail of this flow's queue.
    approach: Point2,
    speed_kmh: f64,
}

struct Hotspot {
    center: Point2,
    flows: Vec<Flow>,
}

/// Index among queued vehicles if vehicle `id` is queued. Queued vehicles are
/// spread evenly over the id range so that exactly `floor(n * fraction)` of
/// the first `n` ids are queued.
fn queue_slot(id: usize, fraction: f64) -> Option<usize> {
    let before = (id as f64 * fraction).floor() as usize;
    let through = ((id + 1) as f64 * fraction).floor() as usize;
    (through > before).then_some(before)
}

/// Spawns `config.num_vehicles` vehicles with ids `0..num_vehicles`.
///
/// A `hotspot_fraction` share of the vehicles is dealt round-robin over the
/// hotspots and their flows; the rest have uniform position, destination and
/// speed.
pub fn spawn_vehicles(config: &ScenarioConfig, rng: &mut SimRng) -> Vec<Vehicle> {
    let side = config.arena_side_m;
    let hotspots: Vec<Hotspot> = if config.hotspot_fraction > 0.0 {
        (0..config.hotspot_count)
            .map(|_| Hotspot {
                center: uniform_point(side, rng),
                flows: (0..config.hotspot_flows)
                    .map(|_| {
                        let angle = rng.random_range(0.0..std::f64::consts::TAU);
                        Flow {
                            approach: Point2::new(angle.cos(), angle.sin()),
                            speed_kmh: uniform_speed(config, rng),
                        }
                    })
                    .collect(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let jitter = Normal::new(0.0, config.hotspot_spread_m).expect("spread validated positive");
    let clamp = |v: f64| v.clamp(0.0, side);

    (0..config.num_vehicles)
        .map(|id| {
            if let Some(slot) =
                queue_slot(id, config.hotspot_fraction).filter(|_| !hotspots.is_empty())
            {
                let hotspot = &hotspots[slot % hotspots.len()];
                let flow = &hotspot.flows[(slot / hotspots.len()) % hotspot.flows.len()];
                let back = flow
                    .approach
                    .scale(rng.random_range(0.0..=config.hotspot_queue_m));
                let position = Point2::new(
                    clamp(hotspot.center.x + back.x + jitter.sample(rng)),
                    clamp(hotspot.center.y + back.y + jitter.sample(rng)),
                );
                let spread = config.hotspot_speed_spread_kmh;
                let speed = (flow.speed_kmh + rng.random_range(-spread..=spread))
                    .clamp(config.speed_min_kmh, config.speed_max_kmh);
                let destination = if hotspot.center == position {
                    fresh_destination(position, side, rng)
                } else {
                    hotspot.center
                };
                Vehicle::new(id, position, destination, speed)
            } else {
                let position = uniform_point(side, rng);
                let destination = fresh_destination(position, side, rng);
                Vehicle::new(id, position, destination, uniform_speed(config, rng))
            }
        })
        .collect()
}

/// Advances a vehicle by `dt_s` seconds.
///
/// On reaching its destination mid-step the vehicle draws a new destination
/// and speed and spends the rest of the step travelling toward it.
pub fn step(
    vehicle: &Vehicle,
    dt_s: f64,
    config: &ScenarioConfig,
    rng: &mut SimRng,
) -> Result<Vehicle> {
    if dt_s.is_nan() || dt_s <= 0.0 {
        return Err(Error::NonPositiveStep(dt_s));
    }
    let mut next = vehicle.clone();
    let mut remaining_s = dt_s;
    loop {
        let speed = next.speed_mps();
        let to_go = next.position.distance(next.destination);
        let reach_s = to_go / speed;
        if reach_s > remaining_s {
            next.position = next.position + next.heading.scale(speed * remaining_s);
            return Ok(next);
        }
        remaining_s -= reach_s;
        next.position = next.destination;
        next.destination = fresh_destination(next.position, config.arena_side_m, rng);
        next.speed_kmh = uniform_speed(config, rng);
        next.heading = heading_between(next.position, next.destination);
        if remaining_s <= 0.0 {
            return Ok(next);
        }
    }
}

/// Dead-reckoned position after `horizon_s`, stopping at the destination.
pub fn predict_location(vehicle: &Vehicle, horizon_s: f64) -> Point2 {
    let travel = vehicle.speed_mps() * horizon_s;
    if travel >= vehicle.position.distance(vehicle.destination) {
        vehicle.destination
    } else {
        vehicle.position + vehicle.heading.scale(travel)
    }
}

/// Speeds differ by strictly less than `theta_kmh`.
pub fn speed_similar(a: &Vehicle, b: &Vehicle, theta_kmh: f64) -> bool {
    (a.speed_kmh - b.speed_kmh).abs() < theta_kmh
}

/// Grid cell containing `p` for cells of side `cell_m` anchored at the origin.
pub fn grid_cell(p: Point2, cell_m: f64) -> (i64, i64) {
    ((p.x / cell_m).floor() as i64, (p.y / cell_m).floor() as i64)
}

/// Both predicted positions fall in the same prediction grid cell.
pub fn same_predicted_region(a: &Vehicle, b: &Vehicle, config: &ScenarioConfig) -> bool {
    let pa = predict_location(a, config.prediction_horizon_s);
    let pb = predict_location(b, config.prediction_horizon_s);
    grid_cell(pa, config.prediction_cell_m) == grid_cell(pb, config.prediction_cell_m)
}
