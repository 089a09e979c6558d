use serde::{Deserialize, Serialize};

use super::network::ManeuverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorLabel {
    DrivingStraight,
    TurningLeft,
    TurningRight,
    MergingLeft,
    MergingRight,
    StoppedWaiting,
}

impl BehaviorLabel {
    pub const ALL: [BehaviorLabel; 6] = [
        BehaviorLabel::DrivingStraight,
        BehaviorLabel::TurningLeft,
        BehaviorLabel::TurningRight,
        BehaviorLabel::MergingLeft,
        BehaviorLabel::MergingRight,
        BehaviorLabel::StoppedWaiting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorLabel::DrivingStraight => "driving_straight",
            BehaviorLabel::TurningLeft => "turning_left",
            BehaviorLabel::TurningRight => "turning_right",
            BehaviorLabel::MergingLeft => "merging_left",
            BehaviorLabel::MergingRight => "merging_right",
            BehaviorLabel::StoppedWaiting => "stopped_waiting",
        }
    }

    pub fn is_turning(self) -> bool {
        matches!(self, BehaviorLabel::TurningLeft | BehaviorLabel::TurningRight)
    }

    pub fn is_merging(self) -> bool {
        matches!(self, BehaviorLabel::MergingLeft | BehaviorLabel::MergingRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneChangeDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FsmEvent {
    ManeuverPointReached(ManeuverKind),
    LaneChangePlanned(LaneChangeDirection),
    LaneChangeComplete,
    StopRequired,
    ClearedToGo,
    ManeuverComplete,
}

impl FsmEvent {
    pub const ALL: [FsmEvent; 10] = [
        FsmEvent::ManeuverPointReached(ManeuverKind::LeftTurn),
        FsmEvent::ManeuverPointReached(ManeuverKind::RightTurn),
        FsmEvent::ManeuverPointReached(ManeuverKind::Merge),
        FsmEvent::ManeuverPointReached(ManeuverKind::Straight),
        FsmEvent::LaneChangePlanned(LaneChangeDirection::Left),
        FsmEvent::LaneChangePlanned(LaneChangeDirection::Right),
        FsmEvent::LaneChangeComplete,
        FsmEvent::StopRequired,
        FsmEvent::ClearedToGo,
        FsmEvent::ManeuverComplete,
    ];
}

/// Table lookup; `None` for pairs without an entry.
pub fn transition_table(current: BehaviorLabel, event: FsmEvent) -> Option<BehaviorLabel> {
    use BehaviorLabel::*;
    use FsmEvent::*;
    Some(match (current, event) {
        (DrivingStraight, ManeuverPointReached(ManeuverKind::LeftTurn)) => TurningLeft,
        (DrivingStraight, ManeuverPointReached(ManeuverKind::RightTurn)) => TurningRight,
        (DrivingStraight, ManeuverPointReached(_)) => DrivingStraight,
        (DrivingStraight, LaneChangePlanned(LaneChangeDirection::Left)) => MergingLeft,
        (DrivingStraight, LaneChangePlanned(LaneChangeDirection::Right)) => MergingRight,
        (MergingLeft | MergingRight, LaneChangeComplete) => DrivingStraight,
        (DrivingStraight | MergingLeft | MergingRight | TurningLeft | TurningRight, StopRequired) => StoppedWaiting,
        (StoppedWaiting, ClearedToGo) => DrivingStraight,
        (TurningLeft | TurningRight, ManeuverComplete) => DrivingStraight,
        _ => return None,
    })
}

/// Applies `event`; pairs without a table entry leave the state unchanged.
pub fn fsm_transition(current: BehaviorLabel, event: FsmEvent) -> BehaviorLabel {
    match transition_table(current, event) {
        Some(next) => next,
        None => {
            log::debug!("behavior: no transition from {} on {:?}", current.as_str(), event);
            current
        }
    }
}

/// Per-behavior planning adjustments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorOverride {
    pub drift_scale: f64,
    pub mdist_scale: f64,
    /// Multiplier on the candidate steering span.
    pub steering_span_scale: f64,
    /// Restrict sampled steering to the side of the guiding arc's turn.
    pub steer_toward_turn_only: bool,
    /// Multiplier on every planning horizon.
    pub horizon_scale: f64,
}

impl Default for BehaviorOverride {
    fn default() -> Self {
        Self::for_label(BehaviorLabel::DrivingStraight)
    }
}

impl BehaviorOverride {
    pub fn for_label(label: BehaviorLabel) -> Self {
        if label.is_turning() {
            BehaviorOverride {
                drift_scale: 4.0,
                mdist_scale: 4.0,
                steering_span_scale: 0.5,
                steer_toward_turn_only: true,
                horizon_scale: 0.5,
            }
        } else {
            BehaviorOverride {
                drift_scale: 1.0,
                mdist_scale: 1.0,
                steering_span_scale: 1.0,
                steer_toward_turn_only: false,
                horizon_scale: 1.0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lane_change_cycle() {
        let s = fsm_transition(BehaviorLabel::DrivingStraight, FsmEvent::LaneChangePlanned(LaneChangeDirection::Left));
        assert_eq!(s, BehaviorLabel::MergingLeft);
        assert_eq!(fsm_transition(s, FsmEvent::LaneChangeComplete), BehaviorLabel::DrivingStraight);
        assert_eq!(
            fsm_transition(BehaviorLabel::DrivingStraight, FsmEvent::LaneChangePlanned(LaneChangeDirection::Right)),
            BehaviorLabel::MergingRight
        );
    }

    #[test]
    fn stop_cycle() {
        let s = fsm_transition(BehaviorLabel::DrivingStraight, FsmEvent::StopRequired);
        assert_eq!(s, BehaviorLabel::StoppedWaiting);
        assert_eq!(fsm_transition(s, FsmEvent::ClearedToGo), BehaviorLabel::DrivingStraight);
    }

    #[test]
    fn undefined_pair_is_identity() {
        assert_eq!(fsm_transition(BehaviorLabel::StoppedWaiting, FsmEvent::LaneChangeComplete), BehaviorLabel::StoppedWaiting);
        assert!(transition_table(BehaviorLabel::TurningLeft, FsmEvent::LaneChangePlanned(LaneChangeDirection::Left)).is_none());
    }

    #[test]
    fn every_state_returns_to_straight() {
        for start in BehaviorLabel::ALL {
            // Breadth-first search over table edges.
            let mut seen = vec![start];
            let mut i = 0;
            while i < seen.len() {
                for e in FsmEvent::ALL {
                    if let Some(n) = transition_table(seen[i], e) {
                        if !seen.contains(&n) {
                            seen.push(n);
                        }
                    }
                }
                i += 1;
            }
            assert!(seen.contains(&BehaviorLabel::DrivingStraight), "{start:?}");
        }
    }
}
