#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soco_core::costs::{contiguous_groups, DispatchCost, GroupLassoCost, LassoCost, TrackingCost};
use soco_core::{FeasibleBox, ProblemInstance, StageCost, SwitchingCost};

/// Which stage families a random instance may draw from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Families {
    /// Tracking, lasso, group lasso and dispatch.
    Proximable,
    /// Tracking and dispatch.
    Smooth,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vector(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-spread..spread)).collect()
}

fn random_box(rng: &mut ChaCha8Rng, d: usize) -> FeasibleBox {
    match rng.gen_range(0..3) {
        0 => FeasibleBox::unbounded(d),
        1 => FeasibleBox::uniform(d, -rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0)).unwrap(),
        _ => {
            let lo = vector(rng, d, 3.0);
            let hi = lo.iter().map(|l| l + rng.gen_range(0.5..5.0)).collect();
            FeasibleBox::new(lo, hi).unwrap()
        }
    }
}

fn random_stage(rng: &mut ChaCha8Rng, d: usize, families: Families) -> StageCost {
    let pick = match families {
        Families::Proximable => rng.gen_range(0..4),
        Families::Smooth => [0, 3][rng.gen_range(0..2)],
    };
    match pick {
        0 => StageCost::Tracking(TrackingCost::new(vector(rng, d, 5.0))),
        1 => {
            let m = rng.gen_range(1..5);
            let samples: Vec<Vec<f64>> = (0..m).map(|_| vector(rng, d, 5.0)).collect();
            StageCost::Lasso(LassoCost::new(&samples, rng.gen_range(0.1..4.0)).unwrap())
        }
        2 => {
            let groups = if d == 1 {
                vec![vec![0]]
            } else {
                let width = rng.gen_range(1..=d);
                let count = d - width + 1;
                contiguous_groups(count, 1, width)
            };
            StageCost::GroupLasso(GroupLassoCost::new(vector(rng, d, 5.0), groups).unwrap())
        }
        _ => {
            let gens: Vec<(f64, f64, f64)> = (0..d)
                .map(|_| {
                    (
                        rng.gen_range(0.2..2.0),
                        rng.gen_range(-3.0..3.0),
                        rng.gen_range(0.0..5.0),
                    )
                })
                .collect();
            let cost = DispatchCost::new(
                &gens,
                rng.gen_range(0.0..1.5),
                rng.gen_range(0.0..6.0),
                rng.gen_range(0.0..2.0),
            );
            StageCost::Dispatch(cost.unwrap())
        }
    }
}

/// A random instance with `d <= 5`, `N <= 40` and `W <= min(10, N)`.
pub fn random_instance(seed: u64, families: Families, quadratic_only: bool) -> ProblemInstance {
    let mut rng = rng(seed);
    let d = rng.gen_range(1..=5);
    let n = rng.gen_range(2..=40);
    let w = rng.gen_range(1..=n.min(10));
    let bounds = random_box(&mut rng, d);
    let x0 = bounds.project(&vector(&mut rng, d, 4.0)).unwrap();
    let stages = (0..n).map(|_| random_stage(&mut rng, d, families)).collect();
    let gamma = 10f64.powf(rng.gen_range(-1.0..1.5));
    let switching = if quadratic_only || rng.gen_bool(0.6) {
        SwitchingCost::Quadratic { gamma }
    } else {
        SwitchingCost::SumSquared { gamma }
    };
    ProblemInstance::new(x0, bounds, stages, switching, w).unwrap()
}

pub fn max_grid_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Minimizer of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}
