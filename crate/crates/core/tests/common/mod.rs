//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: families are enumerated
//! from scratch, sums are plain loops, and the pair constant is counted
//! directly.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// All maps `0..n -> 0..cols`.
pub fn all_maps(n: usize, cols: usize) -> Vec<Vec<usize>> {
    let total = cols.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut g = vec![0; n];
            for slot in g.iter_mut().rev() {
                *slot = code % cols;
                code /= cols;
            }
            g
        })
        .collect()
}

/// Members of the family a descriptor such as `sym:3` or `map:2:4` names.
pub fn members_of(descriptor: &str) -> Vec<Vec<usize>> {
    let parts: Vec<usize> = descriptor.split(':').skip(1).map(|t| t.parse().unwrap()).collect();
    match descriptor.split(':').next().unwrap() {
        "sym" => permutations(parts[0]),
        "map" => all_maps(parts[0], parts[1]),
        other => panic!("no oracle for {other}"),
    }
}

pub fn rows_of(entries: &[f64], cols: usize) -> Vec<Vec<f64>> {
    entries.chunks(cols).map(|r| r.iter().map(|x| x.abs()).collect()).collect()
}

fn desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// `E Σ_{k<=ell} kmax_i a[i][g(i)]` by direct enumeration.
pub fn expectation(a: &[Vec<f64>], members: &[Vec<usize>], ell: usize) -> f64 {
    let mut total = 0.0;
    for g in members {
        let path = desc(g.iter().enumerate().map(|(i, &j)| a[i][j]).collect());
        total += path[..ell].iter().sum::<f64>();
    }
    total / members.len() as f64
}

/// `E (Σ_i a[i][g(i)]^p)^{1/p}` by direct enumeration.
pub fn lp_expectation(a: &[Vec<f64>], members: &[Vec<usize>], p: f64) -> f64 {
    let mut total = 0.0;
    for g in members {
        let s: f64 = g.iter().enumerate().map(|(i, &j)| a[i][j].powf(p)).sum();
        total += s.powf(1.0 / p);
    }
    total / members.len() as f64
}

/// Sum of the `k` largest entries.
pub fn top_sum(a: &[Vec<f64>], k: usize) -> f64 {
    desc(a.iter().flatten().copied().collect())[..k].iter().sum()
}

/// `(1/N) Σ_{k<=N} s(k) + ((1/N) Σ_{k>N} s(k)^p)^{1/p}`.
pub fn two_term(a: &[Vec<f64>], p: f64) -> f64 {
    let cols = a[0].len() as f64;
    let s = desc(a.iter().flatten().copied().collect());
    let head: f64 = s[..a[0].len()].iter().sum::<f64>() / cols;
    let tail: f64 = s[a[0].len()..].iter().map(|x| x.powf(p)).sum::<f64>() / cols;
    head + tail.powf(1.0 / p)
}

/// `N^2 · max P(g(i1)=j1, g(i2)=j2)` over pairs with `i1 != i2`.
pub fn pair_constant(members: &[Vec<usize>], cols: usize) -> BigRational {
    let n = members[0].len();
    let mut best = 0u64;
    for i1 in 0..n {
        for i2 in 0..n {
            if i1 == i2 {
                continue;
            }
            for j1 in 0..cols {
                for j2 in 0..cols {
                    let c = members.iter().filter(|g| g[i1] == j1 && g[i2] == j2).count() as u64;
                    best = best.max(c);
                }
            }
        }
    }
    if best == 0 {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(best) * BigInt::from(cols * cols), BigInt::from(members.len()))
}

/// `‖x‖_{M_j}` for `M_j(t) = max(0, t - 1/j)`: the largest
/// `(x*_1 + ... + x*_k) / (1 + k/j)`.
pub fn luxemburg_mj(x: &[f64], j: usize) -> f64 {
    let s = desc(x.iter().map(|v| v.abs()).collect());
    let mut acc = 0.0;
    let mut best = 0.0f64;
    for (k, v) in s.iter().enumerate() {
        acc += v;
        best = best.max(acc / (1.0 + (k + 1) as f64 / j as f64));
    }
    best
}

/// `min_c Σ (|x_i| - c)_+ + t c` over a 10^4-point grid of `c` in
/// `[0, max |x_i|]` together with the values `|x_i|` themselves.
pub fn k_functional(x: &[f64], t: f64) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cost = |c: f64| x.iter().map(|v| (v.abs() - c).max(0.0)).sum::<f64>() + t * c;
    (0..=10_000)
        .map(|i| max * i as f64 / 10_000.0)
        .chain(x.iter().map(|v| v.abs()))
        .map(cost)
        .fold(f64::INFINITY, f64::min)
}
