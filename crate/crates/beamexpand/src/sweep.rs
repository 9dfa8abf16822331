//! Sweep-level parallelism over independent points.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// Environment variable holding the worker budget.
pub const WORKERS_ENV: &str = "BEAMEXPAND_WORKERS";

/// Budget from the environment, else the available parallelism.
pub fn worker_budget() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Applies `f` to every point with up to `workers` threads. Results come
/// back in input order; each point is computed exactly as it would be
/// serially.
pub fn sweep_parallel<T, R, F>(points: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let workers = workers.clamp(1, points.len().max(1));
    if workers == 1 {
        return points.iter().enumerate().map(|(i, p)| f(i, p)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..points.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let r = f(i, &points[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every point is visited"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_restored() {
        let points: Vec<u64> = (0..37).collect();
        let work =
            |_: usize, &p: &u64| (0..p * 1000).fold(p, |a, x| a.wrapping_mul(31).wrapping_add(x));
        let serial = sweep_parallel(&points, 1, work);
        let parallel = sweep_parallel(&points, 8, work);
        assert_eq!(serial, parallel);
    }

    #[test]
    fn empty_input() {
        let out: Vec<u8> = sweep_parallel(&[] as &[u8], 4, |_, &x| x);
        assert!(out.is_empty());
    }
}
