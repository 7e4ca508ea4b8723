use noma_v2x_core::assignment::hungarian;
use proptest::prelude::*;

/// Minimum over every injective row-to-column map, summed in row order.
fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn walk(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                walk(cost, row + 1, used, acc + cost[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let cols = cost.first().map_or(0, Vec::len);
    walk(cost, 0, &mut vec![false; cols], 0.0, &mut best);
    best
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..=0.0, cols), rows)
}

fn shaped() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6)
        .prop_flat_map(|rows| (Just(rows), rows..=6))
        .prop_flat_map(|(rows, cols)| matrix(rows, cols))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn matches_exhaustive_minimum(cost in shaped()) {
        let a = hungarian(&cost).unwrap();
        prop_assert_eq!(a.total_cost, brute_force(&cost));
        let mut seen = a.columns.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), cost.len());
        let recomputed: f64 = a.columns.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
        prop_assert_eq!(recomputed, a.total_cost);
    }

    #[test]
    fn integer_costs_match_exhaustive_minimum(cost in (2usize..=5).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec((-4i32..=4).prop_map(f64::from), n), n)
    })) {
        prop_assert_eq!(hungarian(&cost).unwrap().total_cost, brute_force(&cost));
    }

    #[test]
    fn shifting_a_row_shifts_the_optimum(cost in shaped(), row in 0usize..6, shift in -3.0f64..3.0) {
        let row = row % cost.len();
        let mut moved = cost.clone();
        for c in &mut moved[row] {
            *c += shift;
        }
        let base = hungarian(&cost).unwrap().total_cost;
        let after = hungarian(&moved).unwrap().total_cost;
        prop_assert!((after - base - shift).abs() < 1e-9);
    }
}

#[test]
fn frozen_three_by_three() {
    let cost = vec![
        vec![4.0, 1.0, 3.0],
        vec![2.0, 0.0, 5.0],
        vec![3.0, 2.0, 2.0],
    ];
    let a = hungarian(&cost).unwrap();
    assert_eq!(a.columns, vec![1, 0, 2]);
    assert_eq!(a.total_cost, 5.0);
    assert_eq!(brute_force(&cost), 5.0);
}
