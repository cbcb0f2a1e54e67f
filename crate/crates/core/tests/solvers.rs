mod common;

use common::*;
use tips_core::enumerate::{binomial, DEFAULT_ENUMERATION_BUDGET};
use tips_core::maxtips::default_precision;
use tips_core::{
    build_index, exact_avgtips, exact_maxtips, great, hcc, hcc_from, inconvenience_profile, mif,
    netclus_maxtips, total_inconvenience, DistanceMatrix, HccParams, NodeId, TipsError, TraceEvent,
    TrajectoryGeometry,
};

const BUDGET: u128 = DEFAULT_ENUMERATION_BUDGET;

#[test]
fn exact_objectives_do_not_increase_with_k() {
    for seed in 0..8 {
        let inst = grid_instance(seed, 4, 8, 1);
        let matrix = DistanceMatrix::build(&inst).unwrap();
        let mut last_mi = f64::INFINITY;
        let mut last_ti = f64::INFINITY;
        for k in 0..4 {
            let mi = exact_maxtips(&inst, &matrix, k, 1.0, BUDGET)
                .unwrap()
                .objective;
            let ti = exact_avgtips(&inst, &matrix, k, BUDGET).unwrap().objective;
            assert!(mi <= last_mi && ti <= last_ti, "seed {seed} k {k}");
            last_mi = mi;
            last_ti = ti;
        }
    }
}

#[test]
fn exact_matches_brute_force_over_subsets() {
    for seed in 0..6 {
        let inst = with_facilities(random_instance(seed, 12, 6), 1, seed);
        let d = all_pairs(&inst);
        let matrix = DistanceMatrix::build(&inst).unwrap();
        let free = inst.candidates();
        let mut best = f64::INFINITY;
        for a in 0..free.len() {
            for b in a + 1..free.len() {
                let mut open = vec![free[a], free[b]];
                open.extend(&inst.facilities);
                let total: f64 = brute_profile(&d, &inst, &open).iter().sum();
                best = best.min(total);
            }
        }
        let r = exact_avgtips(&inst, &matrix, 2, BUDGET).unwrap();
        assert_eq!(r.objective, best);
        assert_eq!(r.work as u128, binomial(free.len(), 2));
    }
}

#[test]
fn exact_budget_is_reported() {
    let inst = grid_instance(1, 5, 5, 0);
    let matrix = DistanceMatrix::build(&inst).unwrap();
    let err = exact_maxtips(&inst, &matrix, 4, 1.0, 1000).unwrap_err();
    assert!(matches!(err, TipsError::TooLarge { .. }));
    assert!(err.is_budget());
}

#[test]
fn selecting_every_free_site() {
    let inst = reference_instance();
    let matrix = DistanceMatrix::build(&inst).unwrap();
    let r = exact_avgtips(&inst, &matrix, 4, BUDGET).unwrap();
    assert_eq!(r.selected, nodes(&[1, 2, 3, 4]));
    assert!(exact_avgtips(&inst, &matrix, 5, BUDGET).is_err());
}

#[test]
fn mif_with_facilities_already_covering_everyone() {
    let inst = grid_instance(3, 4, 6, 0);
    let on_route: Vec<NodeId> = inst.trajectories.iter().map(|t| t.nodes[0]).collect();
    let inst =
        tips_core::PlacementInstance::new(inst.network, inst.trajectories, inst.sites, on_route)
            .unwrap();
    let geometry = TrajectoryGeometry::build(&inst).unwrap();
    let r = mif(&inst, &geometry, 2, 1.0, 0, 3).unwrap();
    assert_eq!(r.objective, 0.0);
    assert_eq!(r.selected.len(), 2);
}

#[test]
fn mif_is_seed_deterministic() {
    let inst = grid_instance(5, 6, 10, 0);
    let geometry = TrajectoryGeometry::build(&inst).unwrap();
    let a = mif(&inst, &geometry, 3, 0.7, 11, 3).unwrap();
    let b = mif(&inst, &geometry, 3, 0.7, 11, 3).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.work, 9);
}

#[test]
fn great_first_pick_is_best_single_site() {
    for seed in 0..10 {
        let inst = grid_instance(seed, 4, 8, 1);
        let matrix = DistanceMatrix::build(&inst).unwrap();
        let g = great(&inst, &matrix, 1).unwrap();
        let e = exact_avgtips(&inst, &matrix, 1, BUDGET).unwrap();
        assert_eq!(g.objective, e.objective);
    }
}

#[test]
fn hcc_result_is_locally_optimal_when_scanning_everything() {
    for seed in 0..5 {
        let inst = grid_instance(seed, 4, 10, 0);
        let matrix = DistanceMatrix::build(&inst).unwrap();
        let params = HccParams {
            swap_fraction: 1.0,
            max_iterations: 1000,
            ..HccParams::default()
        };
        let r = hcc(&inst, &matrix, 3, &params).unwrap();
        let current = total_inconvenience(&inconvenience_profile(&inst, &r.selected).unwrap());
        assert_eq!(current, r.objective);
        for out in &r.selected {
            for &add in &inst.sites {
                if r.selected.contains(&add) {
                    continue;
                }
                let mut q: Vec<NodeId> = r.selected.iter().copied().filter(|s| s != out).collect();
                q.push(add);
                let ti = total_inconvenience(&inconvenience_profile(&inst, &q).unwrap());
                assert!(
                    ti >= current,
                    "seed {seed}: swapping {out} for {add} improves"
                );
            }
        }
    }
}

#[test]
fn hcc_swaps_strictly_improve() {
    let inst = grid_instance(8, 5, 12, 1);
    let matrix = DistanceMatrix::build(&inst).unwrap();
    let r = hcc(
        &inst,
        &matrix,
        3,
        &HccParams {
            swap_fraction: 0.3,
            ..HccParams::default()
        },
    )
    .unwrap();
    let mut last = f64::INFINITY;
    let mut trial = usize::MAX;
    for event in &r.trace {
        match *event {
            TraceEvent::HccStart {
                trial: t, total, ..
            } => {
                trial = t;
                last = total;
            }
            TraceEvent::HccSwap {
                trial: t, total, ..
            } => {
                assert_eq!(t, trial);
                assert!(total < last);
                last = total;
            }
            _ => unreachable!(),
        }
    }
}

#[test]
fn hcc_with_one_iteration_cap_swaps_at_most_once() {
    let inst = reference_instance();
    let matrix = DistanceMatrix::build(&inst).unwrap();
    let params = HccParams {
        swap_fraction: 1.0,
        max_iterations: 1,
        ..HccParams::default()
    };
    let r = hcc_from(&inst, &matrix, &nodes(&[1, 4]), &params).unwrap();
    let swaps = r
        .trace
        .iter()
        .filter(|e| matches!(e, TraceEvent::HccSwap { .. }))
        .count();
    assert!(swaps <= 1);
}

#[test]
fn hcc_rejects_bad_parameters() {
    let inst = reference_instance();
    let matrix = DistanceMatrix::build(&inst).unwrap();
    for params in [
        HccParams {
            swap_fraction: 0.0,
            ..HccParams::default()
        },
        HccParams {
            swap_fraction: 1.5,
            ..HccParams::default()
        },
        HccParams {
            trials: 0,
            ..HccParams::default()
        },
    ] {
        assert!(hcc(&inst, &matrix, 2, &params).is_err());
    }
}

#[test]
fn heuristics_never_beat_exact() {
    for seed in 0..10 {
        let inst = grid_instance(seed, 5, 10, (seed % 3) as usize);
        let matrix = DistanceMatrix::build(&inst).unwrap();
        let geometry = TrajectoryGeometry::build(&inst).unwrap();
        let index = build_index(&inst, 100.0, 2000.0, 0.5, seed).unwrap();
        for k in 1..=3 {
            let exact_mi = exact_maxtips(&inst, &matrix, k, 0.8, BUDGET)
                .unwrap()
                .objective;
            assert!(mif(&inst, &geometry, k, 0.8, seed, 3).unwrap().objective >= exact_mi);
            let nc = netclus_maxtips(&index, &inst, k, 0.8, default_precision(100.0)).unwrap();
            assert!(nc.objective >= exact_mi);
            let exact_ti = exact_avgtips(&inst, &matrix, k, BUDGET).unwrap().objective;
            assert!(great(&inst, &matrix, k).unwrap().objective >= exact_ti);
            assert!(
                hcc(
                    &inst,
                    &matrix,
                    k,
                    &HccParams {
                        seed,
                        ..HccParams::default()
                    }
                )
                .unwrap()
                .objective
                    >= exact_ti
            );
        }
    }
}
