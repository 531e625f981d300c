use proptest::prelude::*;
use superflow::scheduler::{lpt_offline, simulate_dynamic, simulate_static, TaskSchedule};

/// Optimal makespan by trying every assignment.
fn brute_force_opt(durations: &[u64], machines: usize) -> u64 {
    let n = durations.len();
    let mut best = u64::MAX;
    let mut assign = vec![0usize; n];
    loop {
        let mut loads = vec![0u64; machines];
        for (t, &m) in assign.iter().enumerate() {
            loads[m] += durations[t];
        }
        best = best.min(loads.into_iter().max().unwrap_or(0));
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            assign[i] += 1;
            if assign[i] < machines {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

fn within_graham_bound(s: &TaskSchedule, opt: u64, m: usize) -> bool {
    // makespan <= (2 - 1/m) * opt, kept in integers
    s.makespan() * m as u64 <= (2 * m as u64 - 1) * opt
}

#[test]
fn brute_force_sanity() {
    assert_eq!(brute_force_opt(&[3, 1, 3, 1], 2), 4);
    assert_eq!(brute_force_opt(&[7, 5, 4, 3, 2], 2), 11);
    assert_eq!(brute_force_opt(&[], 3), 0);
}

proptest! {
    #[test]
    fn schedules_are_valid(
        durations in prop::collection::vec(0u64..50, 0..20),
        slots in prop::collection::vec(1usize..=3, 1..=4),
    ) {
        let n = durations.len();
        let dy = simulate_dynamic(&durations, &slots);
        prop_assert_eq!(dy.validate(n, &slots), Ok(()));
        let ones = vec![1; slots.len()];
        prop_assert_eq!(simulate_static(&durations, slots.len()).validate(n, &ones), Ok(()));
        prop_assert_eq!(lpt_offline(&durations, slots.len()).validate(n, &ones), Ok(()));
        let total: u64 = durations.iter().sum();
        prop_assert_eq!(dy.loads(slots.len()).iter().sum::<u64>(), total);
    }

    #[test]
    fn dynamic_and_lpt_within_bound(
        durations in prop::collection::vec(1u64..20, 1..=8),
        m in 1usize..=3,
    ) {
        let opt = brute_force_opt(&durations, m);
        let dy = simulate_dynamic(&durations, &vec![1; m]);
        let lpt = lpt_offline(&durations, m);
        prop_assert!(within_graham_bound(&dy, opt, m), "dynamic {} vs opt {}", dy.makespan(), opt);
        prop_assert!(within_graham_bound(&lpt, opt, m), "lpt {} vs opt {}", lpt.makespan(), opt);
        // LPT's tighter guarantee: 4/3 - 1/(3m)
        prop_assert!(lpt.makespan() * 3 * m as u64 <= (4 * m as u64 - 1) * opt);
        prop_assert!(dy.makespan() >= opt && lpt.makespan() >= opt);
    }

    #[test]
    fn static_is_round_robin(durations in prop::collection::vec(0u64..50, 0..20), m in 1usize..=4) {
        let s = simulate_static(&durations, m);
        for e in &s.entries {
            prop_assert_eq!(e.worker, e.task % m);
        }
    }
}
