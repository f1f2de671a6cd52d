use el_sched::sim::{
    check_feasibility, response_times, simulate_el, simulate_tfp, trace_b_quantities, JobBehavior, JobSequence, Phase,
};
use el_sched::{PriorityAssignment, TaskSet};

fn fig1() -> (TaskSet, JobSequence) {
    let ts = TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
    let periodic = |j: usize| JobBehavior {
        task: 0,
        job: j,
        release: 5 * j as u64,
        demand: 2,
        phases: vec![Phase { execute: 2, suspend: 0 }],
    };
    let mut jobs: Vec<JobBehavior> = (0..3).map(periodic).collect();
    jobs.push(JobBehavior {
        task: 1,
        job: 0,
        release: 0,
        demand: 7,
        phases: vec![Phase { execute: 1, suspend: 3 }, Phase { execute: 6, suspend: 0 }],
    });
    let seq = JobSequence::new(jobs, 15, &ts).unwrap();
    (ts, seq)
}

#[test]
fn fig1_trace_matches_golden_file() {
    let (ts, seq) = fig1();
    let trace = simulate_el(&ts, &PriorityAssignment::new(vec![4, 10]), &seq).unwrap();
    let golden = include_str!("golden/fig1.trace");
    assert_eq!(trace.export(), golden);
    assert!(check_feasibility(&trace, &ts));
    let rt = response_times(&trace, ts.len());
    assert_eq!(rt.per_task_max, vec![Some(5), Some(13)]);
}

#[test]
fn fig1_partition_over_every_subinterval() {
    let (ts, seq) = fig1();
    let trace = simulate_el(&ts, &PriorityAssignment::new(vec![4, 10]), &seq).unwrap();
    for k in 0..2 {
        for c in 0..=15 {
            for d in c..=15 {
                let q = trace_b_quantities(&trace, &ts, k, c, d, 0).unwrap();
                assert_eq!(q.b_tilde + q.b_k + q.b_i_k.iter().sum::<u64>(), d - c);
                assert_eq!(q.b_k, q.b_k_j.values().sum::<u64>());
            }
        }
    }
}

#[test]
fn tfp_and_prefix_sum_el_agree_on_fig1() {
    let (ts, seq) = fig1();
    // Prefix sums of deadlines: 5, 21.
    let el = simulate_el(&ts, &PriorityAssignment::new(vec![5, 21]), &seq).unwrap();
    let tfp = simulate_tfp(&ts, &seq).unwrap();
    assert_eq!(el.export(), tfp.export());
}
