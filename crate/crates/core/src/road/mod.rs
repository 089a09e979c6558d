//! Lane-level road graph, routing and the behavior state machine.

pub mod fsm;
pub mod lanepath;
pub mod network;
pub mod route;

pub use fsm::{fsm_transition, BehaviorLabel, BehaviorOverride, FsmEvent, LaneChangeDirection};
pub use lanepath::{pick_successor, LanePath};
pub use network::{
    closest_lane_point, ControlSpec, IntersectionControl, Lane, LaneId, LanePosition, LaneSpec, ManeuverKind, MapSpec, NodeId,
    NodeSpec, PhaseSpec, RoadId, RoadNetwork, RoadSpec, SignalColor,
};
pub use route::{plan_route, RoadTransitionManeuver, RoutePlan};
