use serde::{Deserialize, Serialize};

use super::{ScheduleEntry, TaskSchedule};

/// Offline Largest-Processing-Time-first on `machines` identical machines.
///
/// Tasks are taken in non-increasing duration order (ties by index) and each
/// goes to the least-loaded machine (ties by lower machine id).
pub fn lpt_offline(durations: &[u64], machines: usize) -> TaskSchedule {
    assert!(machines >= 1, "at least one machine");
    let mut order: Vec<usize> = (0..durations.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(durations[i]));
    let mut loads = vec![0u64; machines];
    let mut entries = Vec::with_capacity(durations.len());
    for task in order {
        let worker = (0..machines).min_by_key(|&m| (loads[m], m)).unwrap();
        let start = loads[worker];
        loads[worker] += durations[task];
        entries.push(ScheduleEntry {
            task,
            worker,
            start,
            finish: loads[worker],
        });
    }
    entries.sort_by_key(|e| e.task);
    TaskSchedule { entries }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMakespan {
    pub policy: String,
    pub makespan: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRatio {
    pub numerator: String,
    pub denominator: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanReport {
    pub makespans: Vec<PolicyMakespan>,
    /// `makespan[i] / makespan[j]` for every `i < j`.
    pub ratios: Vec<PolicyRatio>,
}

impl MakespanReport {
    pub fn ratio(&self, numerator: &str, denominator: &str) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
            .map(|r| r.ratio)
    }
}

pub fn makespan_report(schedules: &[(&str, &TaskSchedule)]) -> MakespanReport {
    let makespans: Vec<PolicyMakespan> = schedules
        .iter()
        .map(|(name, s)| PolicyMakespan {
            policy: name.to_string(),
            makespan: s.makespan(),
        })
        .collect();
    let mut ratios = Vec::new();
    for i in 0..makespans.len() {
        for j in i + 1..makespans.len() {
            let (a, b) = (&makespans[i], &makespans[j]);
            let ratio = if a.makespan == b.makespan {
                1.0
            } else {
                a.makespan as f64 / b.makespan as f64
            };
            ratios.push(PolicyRatio {
                numerator: a.policy.clone(),
                denominator: b.policy.clone(),
                ratio,
            });
        }
    }
    MakespanReport { makespans, ratios }
}
