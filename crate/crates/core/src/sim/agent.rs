//! Traffic agents: lane followers with scripted events, path walkers and
//! static obstructions.

use serde::{Deserialize, Serialize};

use crate::collision::{NeighborState, NeighborType};
use crate::geom::{wrap_angle, ConvexPolygon, Polyline, Vec2};
use crate::road::{pick_successor, LaneId, RoadNetwork};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Immediately,
    AtTime(f64),
    /// Fires once the ego reference point is within this many meters.
    EgoWithin(f64),
}

impl Trigger {
    fn jittered(self, j: f64) -> Self {
        match self {
            Trigger::Immediately => Trigger::Immediately,
            Trigger::AtTime(t) => Trigger::AtTime((t + j).max(0.0)),
            Trigger::EgoWithin(d) => Trigger::EgoWithin((d + j).max(0.0)),
        }
    }

    fn fired(self, t: f64, ego_distance: f64) -> bool {
        match self {
            Trigger::Immediately => true,
            Trigger::AtTime(at) => t >= at - 1e-9,
            Trigger::EgoWithin(d) => ego_distance <= d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LaneAction {
    /// Change speed toward `speed` at `rate` m/s².
    SetSpeed { speed: f64, rate: f64 },
    /// Move into lane `lane` (index on the current road) over `duration` s.
    ChangeLane { lane: usize, duration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneEvent {
    pub trigger: Trigger,
    pub action: LaneAction,
}

fn default_rate() -> f64 {
    2.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MotionSpec {
    LaneFollow {
        road: String,
        lane: usize,
        s: f64,
        speed: f64,
        #[serde(default)]
        lateral: f64,
        #[serde(default)]
        reactive: bool,
        #[serde(default)]
        events: Vec<LaneEvent>,
    },
    /// Moves along `waypoints` once `trigger` fires.
    Path {
        waypoints: Vec<Vec2>,
        speed: f64,
        #[serde(default = "default_rate")]
        accel: f64,
        trigger: Trigger,
        #[serde(default = "yes")]
        stop_at_end: bool,
    },
    Static {
        position: Vec2,
        heading: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    pub kind: NeighborType,
    /// Footprint length and width; defaults depend on `kind`.
    #[serde(default)]
    pub size: Option<(f64, f64)>,
    pub motion: MotionSpec,
    /// Half-width of the uniform jitter applied to every trigger value.
    #[serde(default)]
    pub jitter: f64,
}

pub fn default_size(kind: NeighborType) -> (f64, f64) {
    match kind {
        NeighborType::Vehicle => (4.5, 1.9),
        NeighborType::Pedestrian => (0.5, 0.5),
        NeighborType::Cyclist => (1.8, 0.6),
        NeighborType::Obstruction => (4.5, 1.9),
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LaneChange {
    from_lateral: f64,
    start: f64,
    duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Motion {
    Lane {
        lane: LaneId,
        s: f64,
        lateral: f64,
        change: Option<LaneChange>,
        command: f64,
        rate: f64,
        reactive: bool,
        events: Vec<(LaneEvent, bool)>,
    },
    Path {
        line: Polyline,
        s: f64,
        cruise: f64,
        accel: f64,
        trigger: Trigger,
        started: bool,
        stop_at_end: bool,
    },
    Static,
}

/// What the world tells a reactive agent before it moves.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AgentEnv {
    pub t: f64,
    pub ego_distance: f64,
    /// Gap to and speed of the entity ahead in the agent's lane.
    pub lead: Option<(f64, f64)>,
    /// Distance to a stop line the agent must hold at.
    pub hold: Option<f64>,
}

/// Intelligent-driver-model acceleration toward `v0`.
pub fn idm_accel(v: f64, v0: f64, lead: Option<(f64, f64)>) -> f64 {
    let (a, b, s0, headway): (f64, f64, f64, f64) = (1.5, 2.0, 2.0, 1.5);
    let free = 1.0 - (v / v0.max(0.1)).powi(4);
    let interaction = match lead {
        Some((gap, vl)) => {
            let s_star = s0 + v * headway + v * (v - vl) / (2.0 * (a * b).sqrt());
            (s_star.max(0.0) / gap.max(0.1)).powi(2)
        }
        None => 0.0,
    };
    (a * (free - interaction)).max(-9.0)
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub name: String,
    pub kind: NeighborType,
    pub shape: ConvexPolygon,
    pub length: f64,
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
    pub accel: f64,
    pub turn_rate: f64,
    /// `false` once a lane follower runs off the end of the map.
    pub active: bool,
    motion: Motion,
}

impl Agent {
    /// Builds the runtime agent; `jitter` draws one offset per trigger.
    pub fn from_spec(
        id: usize,
        spec: &AgentSpec,
        net: Option<&RoadNetwork>,
        jitter: &mut dyn FnMut(f64) -> f64,
    ) -> Result<Self, Error> {
        let bad = |m: String| Error::Invalid(format!("agent '{}': {m}", spec.id));
        let (length, width) = spec.size.unwrap_or_else(|| default_size(spec.kind));
        let shape = ConvexPolygon::rectangle(length, width).map_err(|e| bad(e.to_string()))?;
        let mut agent = Agent {
            id,
            name: spec.id.clone(),
            kind: spec.kind,
            shape,
            length,
            position: Vec2::ZERO,
            heading: 0.0,
            speed: 0.0,
            accel: 0.0,
            turn_rate: 0.0,
            active: true,
            motion: Motion::Static,
        };
        match &spec.motion {
            MotionSpec::LaneFollow { road, lane, s, speed, lateral, reactive, events } => {
                let net = net.ok_or_else(|| bad("lane_follow needs a map".into()))?;
                let lane_id = net.road_lane(road, *lane).ok_or_else(|| bad(format!("no lane {lane} on road '{road}'")))?;
                if !(*speed >= 0.0) {
                    return Err(bad("speed must be non-negative".into()));
                }
                let events = events
                    .iter()
                    .map(|e| {
                        let mut e = e.clone();
                        e.trigger = e.trigger.jittered(jitter(spec.jitter));
                        (e, false)
                    })
                    .collect();
                agent.speed = *speed;
                agent.motion = Motion::Lane {
                    lane: lane_id,
                    s: *s,
                    lateral: *lateral,
                    change: None,
                    command: *speed,
                    rate: default_rate(),
                    reactive: *reactive,
                    events,
                };
                agent.place(net, 0.0, 0.0);
            }
            MotionSpec::Path { waypoints, speed, accel, trigger, stop_at_end } => {
                let line = Polyline::new(waypoints.clone()).map_err(|e| bad(format!("waypoints: {e}")))?;
                if !(*speed > 0.0 && *accel > 0.0) {
                    return Err(bad("speed and accel must be positive".into()));
                }
                agent.position = line.start();
                agent.heading = line.heading_at(0.0);
                agent.motion = Motion::Path {
                    line,
                    s: 0.0,
                    cruise: *speed,
                    accel: *accel,
                    trigger: trigger.jittered(jitter(spec.jitter)),
                    started: false,
                    stop_at_end: *stop_at_end,
                };
            }
            MotionSpec::Static { position, heading } => {
                agent.position = *position;
                agent.heading = *heading;
            }
        }
        Ok(agent)
    }

    pub fn lane(&self) -> Option<LaneId> {
        match self.motion {
            Motion::Lane { lane, .. } => Some(lane),
            _ => None,
        }
    }

    /// Lane and arclength of a lane follower.
    pub fn lane_position(&self) -> Option<(LaneId, f64)> {
        match self.motion {
            Motion::Lane { lane, s, .. } => Some((lane, s)),
            _ => None,
        }
    }

    pub fn is_reactive(&self) -> bool {
        matches!(self.motion, Motion::Lane { reactive: true, .. })
    }

    pub fn footprint(&self) -> ConvexPolygon {
        self.shape.transformed(self.position, self.heading)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.speed
    }

    pub fn observe(&self) -> NeighborState {
        NeighborState {
            id: self.id,
            shape: self.shape.clone(),
            position: self.position,
            heading: self.heading,
            velocity: self.velocity(),
            lane: self.lane(),
            accel: self.accel,
            turn_rate: self.turn_rate,
            kind: self.kind,
        }
    }

    fn place(&mut self, net: &RoadNetwork, lateral_rate: f64, _dt: f64) {
        if let Motion::Lane { lane, s, lateral, .. } = &self.motion {
            let c = &net.lanes[*lane].centerline;
            let h = c.heading_at(*s);
            self.position = c.point_at(*s) + Vec2::from_angle(h).perp() * *lateral;
            let slip = if self.speed > 0.1 { (lateral_rate / self.speed).atan() } else { 0.0 };
            self.heading = h + slip;
        }
    }

    /// Advances the agent by `dt`.
    pub fn update(&mut self, net: Option<&RoadNetwork>, env: &AgentEnv, dt: f64) {
        if !self.active {
            return;
        }
        let (v0, h0) = (self.speed, self.heading);
        let mut lateral_rate = 0.0;
        let t = env.t;
        match &mut self.motion {
            Motion::Static => {}
            Motion::Lane { lane, s, lateral, change, command, rate, reactive, events } => {
                let net = net.expect("lane agents always have a map");
                for (e, done) in events.iter_mut() {
                    if *done || !e.trigger.fired(t, env.ego_distance) {
                        continue;
                    }
                    *done = true;
                    match e.action {
                        LaneAction::SetSpeed { speed, rate: r } => {
                            *command = speed.max(0.0);
                            *rate = r.abs().max(1e-3);
                        }
                        LaneAction::ChangeLane { lane: idx, duration } => {
                            let Some(road) = net.lanes[*lane].road else { continue };
                            let Some(&target) = net.roads[road].lanes.get(idx) else { continue };
                            let p = self.position;
                            let pr = net.lanes[target].centerline.project(p);
                            *lane = target;
                            *s = pr.arclength;
                            *lateral = pr.lateral;
                            *change = Some(LaneChange { from_lateral: pr.lateral, start: t, duration: duration.max(0.1) });
                        }
                    }
                }
                let mut a = (*command - v0).clamp(-*rate * dt, *rate * dt) / dt;
                if *reactive {
                    let mut lead = env.lead;
                    if let Some(d) = env.hold {
                        let stop = (d, 0.0);
                        lead = Some(match lead {
                            Some(l) if l.0 < d => l,
                            _ => stop,
                        });
                    }
                    a = a.min(idm_accel(v0, *command, lead));
                }
                self.speed = (v0 + a * dt).max(0.0);
                *s += 0.5 * (v0 + self.speed) * dt;
                if let Some(c) = change {
                    let prev = *lateral;
                    *lateral = c.from_lateral * (1.0 - smoothstep((t + dt - c.start) / c.duration));
                    lateral_rate = (*lateral - prev) / dt;
                    if t + dt >= c.start + c.duration {
                        *lateral = 0.0;
                        *change = None;
                    }
                }
                while *s > net.lanes[*lane].length() {
                    match pick_successor(net, None, *lane) {
                        Some(next) => {
                            *s -= net.lanes[*lane].length();
                            *lane = next;
                        }
                        None => {
                            self.active = false;
                            break;
                        }
                    }
                }
                if self.active {
                    self.place(net, lateral_rate, dt);
                }
            }
            Motion::Path { line, s, cruise, accel, trigger, started, stop_at_end } => {
                if !*started && trigger.fired(t, env.ego_distance) {
                    *started = true;
                }
                if *started {
                    let remaining = (line.length() - *s).max(0.0);
                    let mut target = *cruise;
                    if *stop_at_end {
                        target = target.min((2.0 * *accel * remaining).sqrt());
                    }
                    let dv = (target - v0).clamp(-*accel * dt, *accel * dt);
                    self.speed = (v0 + dv).max(0.0);
                    let mut next = *s + 0.5 * (v0 + self.speed) * dt;
                    if *stop_at_end && next >= line.length() {
                        next = line.length();
                        self.speed = 0.0;
                    }
                    *s = next;
                    self.position = line.point_at(*s);
                    if *s < line.length() || !*stop_at_end {
                        self.heading = line.heading_at(*s);
                    }
                }
            }
        }
        self.accel = (self.speed - v0) / dt;
        self.turn_rate = wrap_angle(self.heading - h0) / dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walker(trigger: Trigger) -> Agent {
        let spec = AgentSpec {
            id: "p".into(),
            kind: NeighborType::Pedestrian,
            size: None,
            motion: MotionSpec::Path {
                waypoints: vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 10.0)],
                speed: 1.5,
                accel: 1.0,
                trigger,
                stop_at_end: true,
            },
            jitter: 0.0,
        };
        Agent::from_spec(0, &spec, None, &mut |_| 0.0).unwrap()
    }

    #[test]
    fn walker_waits_then_crosses_and_stops() {
        let mut a = walker(Trigger::AtTime(1.0));
        let dt = 1.0 / 60.0;
        for i in 0..60 {
            a.update(None, &AgentEnv { t: i as f64 * dt, ego_distance: 100.0, ..Default::default() }, dt);
        }
        assert!(a.position.distance(Vec2::ZERO) < 1e-9);
        for i in 60..1200 {
            a.update(None, &AgentEnv { t: i as f64 * dt, ego_distance: 100.0, ..Default::default() }, dt);
        }
        assert!((a.position.y - 10.0).abs() < 1e-9);
        assert_eq!(a.speed, 0.0);
    }

    #[test]
    fn ego_trigger() {
        let mut a = walker(Trigger::EgoWithin(20.0));
        let dt = 0.1;
        a.update(None, &AgentEnv { t: 0.0, ego_distance: 25.0, ..Default::default() }, dt);
        assert_eq!(a.speed, 0.0);
        a.update(None, &AgentEnv { t: 0.1, ego_distance: 19.0, ..Default::default() }, dt);
        assert!(a.speed > 0.0);
    }

    #[test]
    fn idm_brakes_for_stopped_lead() {
        assert!(idm_accel(10.0, 10.0, Some((10.0, 0.0))) < -1.0);
        assert!(idm_accel(0.0, 10.0, None) > 1.4);
    }
}
