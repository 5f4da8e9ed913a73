//! Brute-force references. Each one enumerates every alignment path or edit
//! script explicitly and keeps the cheapest, so it shares nothing with the
//! dynamic programs except the per-step cost definitions.

use sprocket::MeasureKind;

/// Cheapest monotone lattice path from `start` to `end`, where a step adds
/// `step(from, to)` and `admissible(cell)` restricts visited cells.
fn cheapest_path<S, A>(start: (usize, usize), start_cost: f64, end: (usize, usize), step: &S, admissible: &A) -> f64
where
    S: Fn((usize, usize), (usize, usize)) -> f64,
    A: Fn(usize, usize) -> bool,
{
    fn walk<S, A>(at: (usize, usize), acc: f64, end: (usize, usize), step: &S, admissible: &A, best: &mut f64)
    where
        S: Fn((usize, usize), (usize, usize)) -> f64,
        A: Fn(usize, usize) -> bool,
    {
        if at == end {
            *best = best.min(acc);
            return;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            let to = (at.0 + di, at.1 + dj);
            if to.0 > end.0 || to.1 > end.1 || !admissible(to.0, to.1) {
                continue;
            }
            walk(to, acc + step(at, to), end, step, admissible, best);
        }
    }
    let mut best = f64::INFINITY;
    if admissible(start.0, start.1) {
        walk(start, start_cost, end, step, admissible, &mut best);
    }
    best
}

/// Band rule: `|i·q − j·p| ≤ max(w, |p−q|)·q`.
pub fn band(p: usize, q: usize, window: Option<usize>) -> impl Fn(usize, usize) -> bool {
    move |i, j| match window {
        None => true,
        Some(w) => {
            let half = w.max(p.abs_diff(q));
            (i * q).abs_diff(j * p) <= half * q
        }
    }
}

fn is_diagonal(from: (usize, usize), to: (usize, usize)) -> bool {
    to.0 == from.0 + 1 && to.1 == from.1 + 1
}

fn msm_cost(new: f64, prev: f64, other: f64, c: f64) -> f64 {
    let between = (prev <= new && new <= other) || (prev >= new && new >= other);
    if between {
        c
    } else {
        c + (new - prev).abs().min((new - other).abs())
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]).powi(2);
    }
    s.sqrt()
}

/// Reference distance for any measure; `window` applies to elastic ones.
pub fn brute_force(kind: &MeasureKind, a: &[f64], b: &[f64], window: Option<usize>) -> f64 {
    let (p, q) = (a.len(), b.len());
    let ok = band(p, q, window);
    let sq = |i: usize, j: usize| (a[i - 1] - b[j - 1]).powi(2);
    match *kind {
        MeasureKind::Euclidean => euclidean(a, b),
        MeasureKind::Dtw => cheapest_path((1, 1), sq(1, 1), (p, q), &|_, t| sq(t.0, t.1), &ok),
        MeasureKind::Wdtw { g } => {
            let len = p.max(q) as f64;
            let weight = |d: usize| 1.0 / (1.0 + (-g * (d as f64 - len / 2.0)).exp());
            let cost = |i: usize, j: usize| weight(i.abs_diff(j)) * sq(i, j);
            cheapest_path((1, 1), cost(1, 1), (p, q), &|_, t| cost(t.0, t.1), &ok)
        }
        MeasureKind::Adtw { omega } => cheapest_path(
            (1, 1),
            sq(1, 1),
            (p, q),
            &|f, t| sq(t.0, t.1) + if is_diagonal(f, t) { 0.0 } else { omega },
            &ok,
        ),
        MeasureKind::Erp { gap } => cheapest_path(
            (0, 0),
            0.0,
            (p, q),
            &|f, t| {
                if is_diagonal(f, t) {
                    (a[t.0 - 1] - b[t.1 - 1]).abs()
                } else if t.0 > f.0 {
                    (a[t.0 - 1] - gap).abs()
                } else {
                    (b[t.1 - 1] - gap).abs()
                }
            },
            &ok,
        ),
        MeasureKind::Twe { nu, lambda } => {
            let pa: Vec<f64> = std::iter::once(0.0).chain(a.iter().copied()).collect();
            let pb: Vec<f64> = std::iter::once(0.0).chain(b.iter().copied()).collect();
            cheapest_path(
                (0, 0),
                0.0,
                (p, q),
                &|f, t| {
                    let (i, j) = t;
                    if is_diagonal(f, t) {
                        (pa[i] - pb[j]).abs()
                            + (pa[i - 1] - pb[j - 1]).abs()
                            + 2.0 * nu * i.abs_diff(j) as f64
                    } else if i > f.0 {
                        (pa[i] - pa[i - 1]).abs() + nu + lambda
                    } else {
                        (pb[j] - pb[j - 1]).abs() + nu + lambda
                    }
                },
                &|i, j| (i == 0) == (j == 0) && ok(i, j),
            )
        }
        MeasureKind::Msm { c } => cheapest_path(
            (1, 1),
            (a[0] - b[0]).abs(),
            (p, q),
            &|f, t| {
                let (i, j) = t;
                if is_diagonal(f, t) {
                    (a[i - 1] - b[j - 1]).abs()
                } else if i > f.0 {
                    msm_cost(a[i - 1], a[i - 2], b[j - 1], c)
                } else {
                    msm_cost(b[j - 1], b[j - 2], a[i - 1], c)
                }
            },
            &ok,
        ),
    }
}
