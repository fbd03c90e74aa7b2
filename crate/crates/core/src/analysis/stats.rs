use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::engine::LayeredGraph;
use crate::model::{Marking, PetriNet, PlaceIdx};

use super::{AnalysisError, Trajectory};

/// Aggregate of one place at one step across all sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepStats {
    pub step: usize,
    pub mean: BigRational,
    pub min: u64,
    pub max: u64,
    pub distinct: BTreeSet<u64>,
}

/// Per-step aggregate of one place over steps `0..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceSeries {
    pub place: String,
    pub sequences: BigUint,
    pub per_step: Vec<StepStats>,
}

impl PlaceSeries {
    pub fn horizon(&self) -> usize {
        self.per_step.len() - 1
    }

    pub fn last(&self) -> &StepStats {
        self.per_step.last().expect("at least step 0")
    }

    /// Mean of the place at step `k` divided by `k`.
    pub fn mean_rate(&self) -> Option<BigRational> {
        let k = self.horizon();
        (k > 0).then(|| &self.last().mean / BigRational::from_integer(BigInt::from(k)))
    }
}

/// `n/d` with the denominator always present.
pub fn fraction_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal rendering rounded half away from zero to `places` digits.
pub fn decimal_string(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (r * BigRational::from_integer(scale.clone()))
        .round()
        .to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Serializable row of a place series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsRow {
    pub place: String,
    pub step: usize,
    pub mean: String,
    pub mean_decimal: String,
    pub min: u64,
    pub max: u64,
    pub distinct_count: usize,
    pub distinct_values: Vec<u64>,
}

impl PlaceSeries {
    pub fn rows(&self) -> Vec<StatsRow> {
        self.per_step
            .iter()
            .map(|s| StatsRow {
                place: self.place.clone(),
                step: s.step,
                mean: fraction_string(&s.mean),
                mean_decimal: decimal_string(&s.mean, 6),
                min: s.min,
                max: s.max,
                distinct_count: s.distinct.len(),
                distinct_values: s.distinct.iter().copied().collect(),
            })
            .collect()
    }
}

struct Slot {
    sum: u128,
    min: u64,
    max: u64,
    distinct: BTreeSet<u64>,
}

/// Streaming aggregation, for use inside [`walk`](crate::engine::walk).
pub struct StatsAccumulator {
    place: PlaceIdx,
    name: String,
    count: u64,
    slots: Vec<Slot>,
}

impl StatsAccumulator {
    pub fn new(net: &PetriNet, place: &str, horizon: usize) -> Result<Self, AnalysisError> {
        let idx = net.place_index(place)?;
        Ok(StatsAccumulator {
            place: idx,
            name: place.to_owned(),
            count: 0,
            slots: (0..=horizon)
                .map(|_| Slot {
                    sum: 0,
                    min: u64::MAX,
                    max: 0,
                    distinct: BTreeSet::new(),
                })
                .collect(),
        })
    }

    pub fn push<T: Trajectory + ?Sized>(&mut self, seq: &T) {
        self.count += 1;
        for (step, slot) in self.slots.iter_mut().enumerate() {
            let v = seq.marking_at(step).get(self.place);
            slot.sum += v as u128;
            slot.min = slot.min.min(v);
            slot.max = slot.max.max(v);
            slot.distinct.insert(v);
        }
    }

    pub fn finish(self) -> Result<PlaceSeries, AnalysisError> {
        if self.count == 0 {
            return Err(AnalysisError::EmptyInput);
        }
        let n = BigInt::from(self.count);
        Ok(PlaceSeries {
            place: self.name,
            sequences: BigUint::from(self.count),
            per_step: self
                .slots
                .into_iter()
                .enumerate()
                .map(|(step, s)| StepStats {
                    step,
                    mean: BigRational::new(BigInt::from(s.sum), n.clone()),
                    min: s.min,
                    max: s.max,
                    distinct: s.distinct,
                })
                .collect(),
        })
    }
}

/// Exact per-step aggregation over a list of sequences with a common horizon.
pub fn place_stats<T: Trajectory>(
    net: &PetriNet,
    sequences: &[T],
    place: &str,
) -> Result<PlaceSeries, AnalysisError> {
    let first = sequences.first().ok_or(AnalysisError::EmptyInput)?;
    let mut acc = StatsAccumulator::new(net, place, first.horizon())?;
    for s in sequences {
        if s.horizon() != first.horizon() {
            return Err(AnalysisError::MixedHorizons);
        }
        acc.push(s);
    }
    acc.finish()
}

/// Same result as [`place_stats`] over every sequence of `graph`, computed
/// from path counts instead of visiting sequences.
pub fn place_stats_layered(
    net: &PetriNet,
    graph: &LayeredGraph,
    place: &str,
) -> Result<PlaceSeries, AnalysisError> {
    let idx = net.place_index(place)?;
    let prefix = graph.prefix_counts();
    let suffix = graph.suffix_counts();
    let total = suffix[0].clone();
    if total.is_zero() {
        return Err(AnalysisError::EmptyInput);
    }
    let per_step = (0..=graph.steps())
        .map(|step| {
            let mut sum = BigUint::zero();
            let mut distinct = BTreeSet::new();
            for &node in graph.layer(step) {
                let weight = &prefix[node] * &suffix[node];
                if weight.is_zero() {
                    continue;
                }
                let v = graph.marking(node).get(idx);
                sum += weight * v;
                distinct.insert(v);
            }
            StepStats {
                step,
                mean: BigRational::new(sum.into(), total.clone().into()),
                min: *distinct.first().expect("every layer is reachable"),
                max: *distinct.last().expect("every layer is reachable"),
                distinct,
            }
        })
        .collect();
    Ok(PlaceSeries {
        place: place.to_owned(),
        sequences: total,
        per_step,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateResult {
    pub place: String,
    pub horizon: usize,
    pub rate_per_sequence: Vec<BigRational>,
    pub mean_rate: BigRational,
}

/// Count of `place` at step `k` divided by `k`, per sequence and on average.
pub fn rate<T: Trajectory>(
    net: &PetriNet,
    sequences: &[T],
    place: &str,
) -> Result<RateResult, AnalysisError> {
    let idx = net.place_index(place)?;
    let first = sequences.first().ok_or(AnalysisError::EmptyInput)?;
    let k = first.horizon();
    if k == 0 {
        return Err(AnalysisError::ZeroHorizon);
    }
    let kk = BigInt::from(k);
    let rate_per_sequence: Vec<BigRational> = sequences
        .iter()
        .map(|s| {
            let m: &Marking = s.marking_at(s.horizon());
            BigRational::new(BigInt::from(m.get(idx)), kk.clone())
        })
        .collect();
    let sum: BigRational = rate_per_sequence.iter().sum();
    let mean_rate = sum / BigRational::from_integer(BigInt::from(sequences.len()));
    Ok(RateResult {
        place: place.to_owned(),
        horizon: k,
        rate_per_sequence,
        mean_rate,
    })
}
