use std::fmt;
use std::str::FromStr;

use crate::model::{PetriNet, PlaceIdx};

use super::{AnalysisError, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Eq,
    Le,
    Ge,
}

impl Comparator {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Comparator::Eq => lhs == rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
        }
    }
}

/// Which steps a condition is checked at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum When {
    At(usize),
    Any,
    All,
}

/// `place <cmp> value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub place: String,
    pub cmp: Comparator,
    pub value: u64,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.place, self.cmp.symbol(), self.value)
    }
}

/// A constraint an execution sequence must satisfy to be kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Waypoint {
    Holds(Condition, When),
    /// First condition at some step, second at a strictly later one.
    Then(Condition, Condition),
    /// The place is empty at some step and non-empty at a later one.
    DepletionRecovery(String),
}

fn parse_condition(s: &str) -> Result<Condition, AnalysisError> {
    let invalid = || AnalysisError::InvalidPredicate(s.to_owned());
    let (place, cmp, value) = if let Some((p, v)) = s.split_once("<=") {
        (p, Comparator::Le, v)
    } else if let Some((p, v)) = s.split_once(">=") {
        (p, Comparator::Ge, v)
    } else if let Some((p, v)) = s.split_once("==") {
        (p, Comparator::Eq, v)
    } else if let Some((p, v)) = s.split_once('=') {
        (p, Comparator::Eq, v)
    } else {
        return Err(invalid());
    };
    let place = place.trim();
    if place.is_empty() {
        return Err(invalid());
    }
    Ok(Condition {
        place: place.to_owned(),
        cmp,
        value: value.trim().parse().map_err(|_| invalid())?,
    })
}

impl FromStr for Waypoint {
    type Err = AnalysisError;

    /// `bpg13=4@5`, `dhap>=1@any`, `g3p<=3@all`, `dhap=0 then dhap>=1`,
    /// `depletion_recovery(dhap)`. Without `@` a condition means `@any`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("depletion_recovery(") {
            let place = rest
                .strip_suffix(')')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| AnalysisError::InvalidPredicate(s.to_owned()))?;
            return Ok(Waypoint::DepletionRecovery(place.to_owned()));
        }
        if let Some((a, b)) = s.split_once(" then ") {
            return Ok(Waypoint::Then(parse_condition(a)?, parse_condition(b)?));
        }
        let (cond, when) = match s.split_once('@') {
            None => (s, When::Any),
            Some((c, w)) => {
                let when = match w.trim() {
                    "any" => When::Any,
                    "all" => When::All,
                    n => When::At(
                        n.parse()
                            .map_err(|_| AnalysisError::InvalidPredicate(s.to_owned()))?,
                    ),
                };
                (c, when)
            }
        };
        Ok(Waypoint::Holds(parse_condition(cond)?, when))
    }
}

struct Resolved {
    place: PlaceIdx,
    cmp: Comparator,
    value: u64,
}

impl Resolved {
    fn new(net: &PetriNet, c: &Condition) -> Result<Self, AnalysisError> {
        Ok(Resolved {
            place: net.place_index(&c.place)?,
            cmp: c.cmp,
            value: c.value,
        })
    }

    fn at<T: Trajectory + ?Sized>(&self, s: &T, step: usize) -> bool {
        self.cmp
            .holds(s.marking_at(step).get(self.place), self.value)
    }
}

enum Check {
    Holds(Resolved, When),
    Then(Resolved, Resolved),
    Depletion(PlaceIdx),
}

/// Way-points resolved against a net, ready to test sequences.
pub struct WaypointFilter {
    checks: Vec<Check>,
}

impl WaypointFilter {
    pub fn new(
        net: &PetriNet,
        waypoints: &[Waypoint],
        horizon: usize,
    ) -> Result<Self, AnalysisError> {
        let checks = waypoints
            .iter()
            .map(|w| {
                Ok(match w {
                    Waypoint::Holds(c, When::At(step)) if *step > horizon => {
                        return Err(AnalysisError::InvalidPredicate(format!(
                            "{c}@{step}: step beyond horizon {horizon}"
                        )))
                    }
                    Waypoint::Holds(c, when) => Check::Holds(Resolved::new(net, c)?, *when),
                    Waypoint::Then(a, b) => {
                        Check::Then(Resolved::new(net, a)?, Resolved::new(net, b)?)
                    }
                    Waypoint::DepletionRecovery(p) => Check::Depletion(net.place_index(p)?),
                })
            })
            .collect::<Result<_, AnalysisError>>()?;
        Ok(WaypointFilter { checks })
    }

    /// Whether `s` satisfies every way-point over steps `0..=k`.
    pub fn accepts<T: Trajectory + ?Sized>(&self, s: &T) -> bool {
        let k = s.horizon();
        self.checks.iter().all(|c| match c {
            Check::Holds(r, When::At(step)) => r.at(s, *step),
            Check::Holds(r, When::Any) => (0..=k).any(|i| r.at(s, i)),
            Check::Holds(r, When::All) => (0..=k).all(|i| r.at(s, i)),
            Check::Then(a, b) => {
                // earliest step satisfying `a`, then any later one for `b`
                match (0..=k).find(|&i| a.at(s, i)) {
                    Some(i) => (i + 1..=k).any(|j| b.at(s, j)),
                    None => false,
                }
            }
            Check::Depletion(p) => match (0..=k).find(|&i| s.marking_at(i).get(*p) == 0) {
                Some(i) => (i + 1..=k).any(|j| s.marking_at(j).get(*p) > 0),
                None => false,
            },
        })
    }
}

/// Sequences satisfying every way-point, in input order.
pub fn filter_waypoints<T: Trajectory + Clone>(
    net: &PetriNet,
    sequences: &[T],
    waypoints: &[Waypoint],
) -> Result<Vec<T>, AnalysisError> {
    let Some(first) = sequences.first() else {
        return Ok(Vec::new());
    };
    let filter = WaypointFilter::new(net, waypoints, first.horizon())?;
    Ok(sequences
        .iter()
        .filter(|s| filter.accepts(*s))
        .cloned()
        .collect())
}
